#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lalg {

namespace detail {
struct Node;
}

/// Thrown when evaluation leaves the domain of smoothness (division by zero,
/// log of a nonpositive value, sqrt of a negative value).
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, std::string subexpression)
      : std::runtime_error(what), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

/// Thrown by parse_expr on malformed input; carries a 0-based offset into the text.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Immutable symbolic expression over named chart variables.
///
/// The AST covers rational constants, variables, n-ary sums and products,
/// quotients, integer powers and the unary functions sin, cos, exp, log, sqrt.
/// The only simplifications applied are constant folding and flattening of
/// nested sums/products; equality of expressions is always decided numerically
/// on sample grids, never symbolically.
class Expr {
 public:
  Expr();  // zero

  static Expr constant(double value);
  static Expr variable(int index, std::string name);

  bool is_constant() const;
  bool is_zero() const;      // structurally the constant 0
  double constant_value() const;

  /// Evaluates at a point given as the full chart coordinate vector.
  double eval(std::span<const double> coords) const;

  /// Exact structural derivative with respect to the variable of given index.
  Expr derivative(int var_index) const;

  /// Rebuilds the expression with variable index i replaced by new_index[i].
  /// Used when embedding a factor chart into a product chart.
  Expr remap_variables(const std::vector<int>& new_index) const;

  /// Parseable text form (round-trips through parse_expr).
  std::string str() const;

  friend Expr operator+(const Expr&, const Expr&);
  friend Expr operator-(const Expr&, const Expr&);
  friend Expr operator*(const Expr&, const Expr&);
  friend Expr operator/(const Expr&, const Expr&);
  friend Expr operator-(const Expr&);
  Expr pow(int exponent) const;

  friend Expr sin(const Expr&);
  friend Expr cos(const Expr&);
  friend Expr exp(const Expr&);
  friend Expr log(const Expr&);
  friend Expr sqrt(const Expr&);

  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
  const detail::Node& node() const { return *node_; }

 private:
  std::shared_ptr<const detail::Node> node_;
};

inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator+(double a, const Expr& b) { return Expr::constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }
inline Expr operator-(double a, const Expr& b) { return Expr::constant(a) - b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::constant(b); }
inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
inline Expr operator/(const Expr& a, double b) { return a / Expr::constant(b); }
inline Expr operator/(double a, const Expr& b) { return Expr::constant(a) / b; }

/// Parses `text` over the declared variable names (variable i refers to
/// coordinate i of evaluation points). Grammar: docs/grammar.md.
Expr parse_expr(std::string_view text, const std::vector<std::string>& variables);

}  // namespace lalg
