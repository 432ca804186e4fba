#include "lalg/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace lalg {
namespace detail {

enum class Kind { Constant, Variable, Sum, Product, Quotient, Power, Call };
enum class Fn { Sin, Cos, Exp, Log, Sqrt };

struct Node {
  Kind kind;
  double value = 0.0;          // Constant
  int var = -1;                // Variable
  std::string name;            // Variable
  std::vector<Expr> args;      // Sum/Product children, Quotient{num,den}, Power{base}, Call{arg}
  int exponent = 0;            // Power
  Fn fn = Fn::Sin;             // Call
};

namespace {

Expr make(Node n) { return Expr(std::make_shared<const Node>(std::move(n))); }

const Node& N(const Expr& e) { return e.node(); }

bool is_const(const Expr& e, double v) {
  return N(e).kind == Kind::Constant && N(e).value == v;
}

Expr constant(double v) {
  Node n;
  n.kind = Kind::Constant;
  n.value = v;
  return make(std::move(n));
}

// Flattens nested sums and folds constant children.
Expr sum(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  double c = 0.0;
  for (auto& t : terms) {
    if (N(t).kind == Kind::Sum) {
      for (const auto& u : N(t).args) {
        if (N(u).kind == Kind::Constant)
          c += N(u).value;
        else
          flat.push_back(u);
      }
    } else if (N(t).kind == Kind::Constant) {
      c += N(t).value;
    } else {
      flat.push_back(std::move(t));
    }
  }
  if (c != 0.0 || flat.empty()) flat.push_back(constant(c));
  if (flat.size() == 1) return flat.front();
  Node n;
  n.kind = Kind::Sum;
  n.args = std::move(flat);
  return make(std::move(n));
}

// Flattens nested products and folds constant children; a constant 0 annihilates.
Expr product(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  double c = 1.0;
  for (auto& f : factors) {
    if (N(f).kind == Kind::Product) {
      for (const auto& u : N(f).args) {
        if (N(u).kind == Kind::Constant)
          c *= N(u).value;
        else
          flat.push_back(u);
      }
    } else if (N(f).kind == Kind::Constant) {
      c *= N(f).value;
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (c == 0.0) return constant(0.0);
  if (flat.empty()) return constant(c);
  if (c != 1.0) flat.insert(flat.begin(), constant(c));
  if (flat.size() == 1) return flat.front();
  Node n;
  n.kind = Kind::Product;
  n.args = std::move(flat);
  return make(std::move(n));
}

Expr quotient(Expr num, Expr den) {
  if (N(den).kind == Kind::Constant && N(num).kind == Kind::Constant && N(den).value != 0.0)
    return constant(N(num).value / N(den).value);
  if (is_const(den, 1.0)) return num;
  Node n;
  n.kind = Kind::Quotient;
  n.args = {std::move(num), std::move(den)};
  return make(std::move(n));
}

Expr power(Expr base, int k) {
  if (k == 0) return constant(1.0);
  if (k == 1) return base;
  if (N(base).kind == Kind::Constant) return constant(std::pow(N(base).value, double(k)));
  Node n;
  n.kind = Kind::Power;
  n.args = {std::move(base)};
  n.exponent = k;
  return make(std::move(n));
}

Expr call(Fn fn, Expr arg) {
  if (N(arg).kind == Kind::Constant) {
    double v = N(arg).value;
    switch (fn) {
      case Fn::Sin: return constant(std::sin(v));
      case Fn::Cos: return constant(std::cos(v));
      case Fn::Exp: return constant(std::exp(v));
      case Fn::Log:
        if (v > 0.0) return constant(std::log(v));
        break;
      case Fn::Sqrt:
        if (v >= 0.0) return constant(std::sqrt(v));
        break;
    }
  }
  Node n;
  n.kind = Kind::Call;
  n.fn = fn;
  n.args = {std::move(arg)};
  return make(std::move(n));
}

const char* fn_name(Fn fn) {
  switch (fn) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Exp: return "exp";
    case Fn::Log: return "log";
    case Fn::Sqrt: return "sqrt";
  }
  return "?";
}

// Precedence levels for printing: sum < product/quotient < power/unary < atom.
int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::Sum: return 1;
    case Kind::Product:
    case Kind::Quotient: return 2;
    case Kind::Power: return 3;
    default: return 4;
  }
}

void print(const Expr& e, std::ostream& os, int parent_prec) {
  const Node& n = N(e);
  int prec = precedence(n);
  bool paren = prec < parent_prec;
  if (n.kind == Kind::Constant && n.value < 0.0) paren = parent_prec > 1;
  if (paren) os << '(';
  switch (n.kind) {
    case Kind::Constant: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.value;
      os << tmp.str();
      break;
    }
    case Kind::Variable:
      os << n.name;
      break;
    case Kind::Sum:
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) os << " + ";
        print(n.args[i], os, 1);
      }
      break;
    case Kind::Product:
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) os << "*";
        print(n.args[i], os, 3);  // children of * need parens if they are sums
      }
      break;
    case Kind::Quotient:
      print(n.args[0], os, 3);
      os << "/";
      print(n.args[1], os, 4);
      break;
    case Kind::Power:
      print(n.args[0], os, 4);
      os << "^";
      if (n.exponent < 0)
        os << "(" << n.exponent << ")";
      else
        os << n.exponent;
      break;
    case Kind::Call:
      os << fn_name(n.fn) << "(";
      print(n.args[0], os, 0);
      os << ")";
      break;
  }
  if (paren) os << ')';
}

}  // namespace
}  // namespace detail

using detail::Fn;
using detail::Kind;
using detail::Node;

Expr::Expr() : node_(detail::constant(0.0).node_) {}

Expr Expr::constant(double value) { return detail::constant(value); }

Expr Expr::variable(int index, std::string name) {
  Node n;
  n.kind = Kind::Variable;
  n.var = index;
  n.name = std::move(name);
  return detail::make(std::move(n));
}

bool Expr::is_constant() const { return node_->kind == Kind::Constant; }
bool Expr::is_zero() const { return is_constant() && node_->value == 0.0; }

double Expr::constant_value() const {
  if (!is_constant()) throw std::logic_error("Expr::constant_value on non-constant");
  return node_->value;
}

double Expr::eval(std::span<const double> coords) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return n.value;
    case Kind::Variable:
      if (n.var < 0 || static_cast<std::size_t>(n.var) >= coords.size())
        throw std::out_of_range("variable index out of range for point");
      return coords[static_cast<std::size_t>(n.var)];
    case Kind::Sum: {
      double s = 0.0;
      for (const auto& a : n.args) s += a.eval(coords);
      return s;
    }
    case Kind::Product: {
      double p = 1.0;
      for (const auto& a : n.args) p *= a.eval(coords);
      return p;
    }
    case Kind::Quotient: {
      double den = n.args[1].eval(coords);
      if (den == 0.0) throw DomainError("division by zero", n.args[1].str());
      return n.args[0].eval(coords) / den;
    }
    case Kind::Power:
      return std::pow(n.args[0].eval(coords), double(n.exponent));
    case Kind::Call: {
      double v = n.args[0].eval(coords);
      switch (n.fn) {
        case Fn::Sin: return std::sin(v);
        case Fn::Cos: return std::cos(v);
        case Fn::Exp: return std::exp(v);
        case Fn::Log:
          if (v <= 0.0) throw DomainError("log of nonpositive value", n.args[0].str());
          return std::log(v);
        case Fn::Sqrt:
          if (v < 0.0) throw DomainError("sqrt of negative value", n.args[0].str());
          return std::sqrt(v);
      }
      return 0.0;
    }
  }
  return 0.0;
}

Expr Expr::derivative(int var_index) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return Expr::constant(0.0);
    case Kind::Variable:
      return Expr::constant(n.var == var_index ? 1.0 : 0.0);
    case Kind::Sum: {
      std::vector<Expr> terms;
      terms.reserve(n.args.size());
      for (const auto& a : n.args) terms.push_back(a.derivative(var_index));
      return detail::sum(std::move(terms));
    }
    case Kind::Product: {
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        std::vector<Expr> factors = n.args;
        factors[i] = n.args[i].derivative(var_index);
        terms.push_back(detail::product(std::move(factors)));
      }
      return detail::sum(std::move(terms));
    }
    case Kind::Quotient: {
      const Expr& a = n.args[0];
      const Expr& b = n.args[1];
      return (a.derivative(var_index) * b - a * b.derivative(var_index)) / b.pow(2);
    }
    case Kind::Power: {
      const Expr& b = n.args[0];
      return Expr::constant(double(n.exponent)) * b.pow(n.exponent - 1) *
             b.derivative(var_index);
    }
    case Kind::Call: {
      const Expr& u = n.args[0];
      Expr du = u.derivative(var_index);
      switch (n.fn) {
        case Fn::Sin: return cos(u) * du;
        case Fn::Cos: return Expr::constant(-1.0) * sin(u) * du;
        case Fn::Exp: return exp(u) * du;
        case Fn::Log: return du / u;
        case Fn::Sqrt: return du / (Expr::constant(2.0) * sqrt(u));
      }
      return Expr();
    }
  }
  return Expr();
}

Expr Expr::remap_variables(const std::vector<int>& new_index) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return *this;
    case Kind::Variable:
      if (n.var < 0 || static_cast<std::size_t>(n.var) >= new_index.size())
        throw std::out_of_range("remap_variables: index out of range");
      return Expr::variable(new_index[static_cast<std::size_t>(n.var)], n.name);
    default: {
      Node copy = n;
      for (auto& a : copy.args) a = a.remap_variables(new_index);
      return detail::make(std::move(copy));
    }
  }
}

std::string Expr::str() const {
  std::ostringstream os;
  detail::print(*this, os, 0);
  return os.str();
}

Expr operator+(const Expr& a, const Expr& b) { return detail::sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) {
  return detail::sum({a, detail::product({Expr::constant(-1.0), b})});
}
Expr operator*(const Expr& a, const Expr& b) { return detail::product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return detail::quotient(a, b); }
Expr operator-(const Expr& a) { return detail::product({Expr::constant(-1.0), a}); }
Expr Expr::pow(int exponent) const { return detail::power(*this, exponent); }

Expr sin(const Expr& e) { return detail::call(Fn::Sin, e); }
Expr cos(const Expr& e) { return detail::call(Fn::Cos, e); }
Expr exp(const Expr& e) { return detail::call(Fn::Exp, e); }
Expr log(const Expr& e) { return detail::call(Fn::Log, e); }
Expr sqrt(const Expr& e) { return detail::call(Fn::Sqrt, e); }

// ---------------------------------------------------------------------------
// Recursive-descent parser. Grammar published in docs/grammar.md.

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& variables)
      : text_(text), vars_(variables) {}

  Expr parse() {
    Expr e = expression();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = e + term();
      else if (accept('-'))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*'))
        e = e * unary();
      else if (accept('/'))
        e = e / unary();
      else
        return e;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (accept('^')) return base.pow(exponent());
    return base;
  }

  int exponent() {
    skip_ws();
    bool paren = accept('(');
    skip_ws();
    bool neg = accept('-');
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) throw ParseError("expected integer exponent", pos_);
    int value = std::stoi(std::string(text_.substr(start, pos_ - start)));
    if (paren && !accept(')')) throw ParseError("expected ')' after exponent", pos_);
    return neg ? -value : value;
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // "e" was the start of an identifier, not an exponent
      }
    }
    return Expr::constant(std::stod(std::string(text_.substr(start, pos_ - start))));
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (name == "sin" || name == "cos" || name == "exp" || name == "log" || name == "sqrt") {
      if (!accept('(')) throw ParseError("expected '(' after function name '" + name + "'", pos_);
      Expr arg = expression();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      if (name == "sin") return sin(arg);
      if (name == "cos") return cos(arg);
      if (name == "exp") return exp(arg);
      if (name == "log") return log(arg);
      return sqrt(arg);
    }
    if (name == "pi") return Expr::constant(3.14159265358979323846);
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name) return Expr::variable(int(i), name);
    throw ParseError("unknown identifier '" + name + "'", start);
  }
};

}  // namespace

Expr parse_expr(std::string_view text, const std::vector<std::string>& variables) {
  return Parser(text, variables).parse();
}

}  // namespace lalg
