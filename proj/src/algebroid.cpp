#include "lalg/algebroid.hpp"

#include <stdexcept>

#include "lalg/combo.hpp"

namespace lalg {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

LieAlgebroid::LieAlgebroid(Chart chart, int rank, std::vector<std::vector<Expr>> anchor,
                           std::vector<std::vector<std::vector<Expr>>> structure)
    : chart_(std::move(chart)), rank_(rank), anchor_(std::move(anchor)),
      structure_(std::move(structure)) {
  require(rank_ >= 1, "LieAlgebroid: rank must be positive");
  require(anchor_.size() == static_cast<std::size_t>(rank_), "LieAlgebroid: anchor row count != rank");
  for (const auto& row : anchor_)
    require(row.size() == chart_.dim(), "LieAlgebroid: anchor column count != chart dim");
  require(structure_.size() == static_cast<std::size_t>(rank_), "LieAlgebroid: structure shape");
  for (const auto& plane : structure_) {
    require(plane.size() == static_cast<std::size_t>(rank_), "LieAlgebroid: structure shape");
    for (const auto& row : plane)
      require(row.size() == static_cast<std::size_t>(rank_), "LieAlgebroid: structure shape");
  }
  // Skew-symmetry of C^c_{ab} is probed numerically at a few deterministic
  // box points; full-grid verification happens in validate().
  if (!chart_.box.empty()) {
    auto pts = halton_points(chart_.box, 5, 12345);
    for (const auto& p : pts) {
      for (int a = 0; a < rank_; ++a)
        for (int b = 0; b <= a; ++b)
          for (int c = 0; c < rank_; ++c) {
            double r = this->structure(a, b, c).eval(p.coords) +
                       this->structure(b, a, c).eval(p.coords);
            if (std::abs(r) > 1e-9)
              throw std::invalid_argument(
                  "LieAlgebroid: structure functions are not skew-symmetric in the lower "
                  "indices");
          }
    }
  }
}

AlgebroidPtr LieAlgebroid::tangent(Chart chart) {
  int n = int(chart.dim());
  std::vector<std::vector<Expr>> anchor(static_cast<std::size_t>(n), std::vector<Expr>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) anchor[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = Expr::constant(1.0);
  std::vector<std::vector<std::vector<Expr>>> C(
      static_cast<std::size_t>(n), std::vector<std::vector<Expr>>(static_cast<std::size_t>(n), std::vector<Expr>(static_cast<std::size_t>(n))));
  return std::make_shared<const LieAlgebroid>(std::move(chart), n, std::move(anchor), std::move(C));
}

AlgebroidPtr make_algebroid(Chart chart, int rank, std::vector<std::vector<Expr>> anchor,
                            std::vector<std::vector<std::vector<Expr>>> structure) {
  return std::make_shared<const LieAlgebroid>(std::move(chart), rank, std::move(anchor),
                                              std::move(structure));
}

Expr LieAlgebroid::rho_frame_apply(int a, const Expr& f) const {
  Expr acc;
  for (int i = 0; i < dim(); ++i) {
    const Expr& rho = anchor(a, i);
    if (rho.is_zero()) continue;
    acc = acc + rho * f.derivative(i);
  }
  return acc;
}

// --- TensorField -----------------------------------------------------------

TensorField::TensorField(AlgebroidPtr E, Kind kind, int degree, std::vector<Expr> comps)
    : owner_(std::move(E)), kind_(kind), degree_(degree), comps_(std::move(comps)) {}

int TensorField::rank() const { return owner_->rank(); }

TensorField TensorField::function(AlgebroidPtr E, Expr f) {
  return TensorField(std::move(E), Kind::Form, 0, {std::move(f)});
}

TensorField TensorField::section(AlgebroidPtr E, std::vector<Expr> comps) {
  require(comps.size() == static_cast<std::size_t>(E->rank()), "section: component count != rank");
  return TensorField(std::move(E), Kind::Section, 0, std::move(comps));
}

TensorField TensorField::frame_section(AlgebroidPtr E, int a) {
  std::vector<Expr> c(static_cast<std::size_t>(E->rank()));
  c[static_cast<std::size_t>(a)] = Expr::constant(1.0);
  return section(std::move(E), std::move(c));
}

TensorField TensorField::one_form(AlgebroidPtr E, std::vector<Expr> comps) {
  require(comps.size() == static_cast<std::size_t>(E->rank()), "one_form: component count != rank");
  return TensorField(std::move(E), Kind::Form, 1, std::move(comps));
}

TensorField TensorField::form(AlgebroidPtr E, int degree, std::vector<Expr> canonical) {
  require(canonical.size() == static_cast<std::size_t>(binom(E->rank(), degree)),
          "form: canonical component count mismatch");
  return TensorField(std::move(E), Kind::Form, degree, std::move(canonical));
}

TensorField TensorField::form2(AlgebroidPtr E, const std::vector<std::vector<Expr>>& values) {
  int m = E->rank();
  std::vector<Expr> canonical;
  canonical.reserve(static_cast<std::size_t>(binom(m, 2)));
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) canonical.push_back(values[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
  return form(std::move(E), 2, std::move(canonical));
}

TensorField TensorField::endomorphism(AlgebroidPtr E, std::vector<std::vector<Expr>> comps) {
  int m = E->rank();
  require(comps.size() == static_cast<std::size_t>(m), "endomorphism: shape");
  std::vector<Expr> flat;
  flat.reserve(static_cast<std::size_t>(m * m));
  for (auto& row : comps) {
    require(row.size() == static_cast<std::size_t>(m), "endomorphism: shape");
    for (auto& e : row) flat.push_back(std::move(e));
  }
  return TensorField(std::move(E), Kind::Endomorphism, 0, std::move(flat));
}

TensorField TensorField::identity_endomorphism(AlgebroidPtr E) {
  int m = E->rank();
  std::vector<std::vector<Expr>> c(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int i = 0; i < m; ++i) c[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = Expr::constant(1.0);
  return endomorphism(std::move(E), std::move(c));
}

TensorField TensorField::covariant2(AlgebroidPtr E, std::vector<std::vector<Expr>> comps) {
  int m = E->rank();
  require(comps.size() == static_cast<std::size_t>(m), "covariant2: shape");
  std::vector<Expr> flat;
  flat.reserve(static_cast<std::size_t>(m * m));
  for (auto& row : comps) {
    require(row.size() == static_cast<std::size_t>(m), "covariant2: shape");
    for (auto& e : row) flat.push_back(std::move(e));
  }
  return TensorField(std::move(E), Kind::Covariant2, 0, std::move(flat));
}

TensorField TensorField::vector_valued_2form(AlgebroidPtr E,
                                             std::vector<std::vector<Expr>> comps) {
  int m = E->rank();
  auto n_combo = static_cast<std::size_t>(binom(m, 2));
  require(comps.size() == n_combo, "vector_valued_2form: combo count");
  std::vector<Expr> flat;
  flat.reserve(n_combo * static_cast<std::size_t>(m));
  for (auto& row : comps) {
    require(row.size() == static_cast<std::size_t>(m), "vector_valued_2form: value size");
    for (auto& e : row) flat.push_back(std::move(e));
  }
  return TensorField(std::move(E), Kind::VectorValued2Form, 2, std::move(flat));
}

const Expr& TensorField::form_canonical(int combo_rank) const {
  return comps_[static_cast<std::size_t>(combo_rank)];
}

int TensorField::form_term_count() const { return int(comps_.size()); }

Expr TensorField::form_component(std::vector<int> indices) const {
  require(kind_ == Kind::Form, "form_component: not a form");
  int sign = sort_with_sign(indices);
  if (sign == 0) return Expr();
  const Expr& c = comps_[static_cast<std::size_t>(combo_rank(indices, rank()))];
  return sign > 0 ? c : -c;
}

const Expr& TensorField::section_component(int c) const { return comps_[static_cast<std::size_t>(c)]; }

const Expr& TensorField::endo_component(int i, int j) const {
  return comps_[static_cast<std::size_t>(i * rank() + j)];
}

const Expr& TensorField::cov2_component(int a, int b) const {
  return comps_[static_cast<std::size_t>(a * rank() + b)];
}

Expr TensorField::vv2_component(int a, int b, int c) const {
  require(kind_ == Kind::VectorValued2Form, "vv2_component: wrong kind");
  if (a == b) return Expr();
  int sign = 1;
  if (a > b) {
    std::swap(a, b);
    sign = -1;
  }
  std::vector<int> idx = {a, b};
  const Expr& e = comps_[static_cast<std::size_t>(combo_rank(idx, rank()) * rank() + c)];
  return sign > 0 ? e : -e;
}

double TensorField::eval_function(const Point& p) const { return comps_[0].eval(p.coords); }

Eigen::VectorXd TensorField::eval_vector(const Point& p) const {
  Eigen::VectorXd v(comps_.size());
  for (std::size_t i = 0; i < comps_.size(); ++i) v[long(i)] = comps_[i].eval(p.coords);
  return v;
}

std::vector<double> TensorField::eval_form(const Point& p) const {
  std::vector<double> v(comps_.size());
  for (std::size_t i = 0; i < comps_.size(); ++i) v[i] = comps_[i].eval(p.coords);
  return v;
}

Eigen::MatrixXd TensorField::eval_matrix(const Point& p) const {
  int m = rank();
  Eigen::MatrixXd M(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) M(i, j) = comps_[static_cast<std::size_t>(i * m + j)].eval(p.coords);
  return M;
}

Eigen::MatrixXd TensorField::eval_form2_matrix(const Point& p) const {
  require(kind_ == Kind::Form && degree_ == 2, "eval_form2_matrix: not a 2-form");
  int m = rank();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  int k = 0;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      double v = comps_[static_cast<std::size_t>(k++)].eval(p.coords);
      M(a, b) = v;
      M(b, a) = -v;
    }
  return M;
}

Eigen::VectorXd TensorField::eval_vv2(int a, int b, const Point& p) const {
  int m = rank();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
  if (a == b) return v;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<int> idx = {a, b};
  int base = combo_rank(idx, m) * m;
  for (int c = 0; c < m; ++c) v[c] = sign * comps_[static_cast<std::size_t>(base + c)].eval(p.coords);
  return v;
}

TensorField TensorField::operator+(const TensorField& o) const {
  require(kind_ == o.kind_ && degree_ == o.degree_ && comps_.size() == o.comps_.size(),
          "TensorField+: shape mismatch");
  std::vector<Expr> out(comps_.size());
  for (std::size_t i = 0; i < comps_.size(); ++i) out[i] = comps_[i] + o.comps_[i];
  return TensorField(owner_, kind_, degree_, std::move(out));
}

TensorField TensorField::operator-(const TensorField& o) const {
  require(kind_ == o.kind_ && degree_ == o.degree_ && comps_.size() == o.comps_.size(),
          "TensorField-: shape mismatch");
  std::vector<Expr> out(comps_.size());
  for (std::size_t i = 0; i < comps_.size(); ++i) out[i] = comps_[i] - o.comps_[i];
  return TensorField(owner_, kind_, degree_, std::move(out));
}

TensorField TensorField::scaled(const Expr& factor) const {
  std::vector<Expr> out(comps_.size());
  for (std::size_t i = 0; i < comps_.size(); ++i) out[i] = factor * comps_[i];
  return TensorField(owner_, kind_, degree_, std::move(out));
}

TensorField TensorField::scaled(double factor) const { return scaled(Expr::constant(factor)); }

// --- calculus --------------------------------------------------------------

TensorField bracket(const TensorField& s1, const TensorField& s2) {
  require(s1.kind() == TensorField::Kind::Section && s2.kind() == TensorField::Kind::Section,
          "bracket: expects sections");
  require(s1.owner() == s2.owner(), "bracket: sections over different algebroids");
  const LieAlgebroid& E = *s1.owner();
  int m = E.rank();
  std::vector<Expr> out(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c) {
    Expr acc;
    for (int a = 0; a < m; ++a) {
      const Expr& f = s1.section_component(a);
      if (!f.is_zero()) {
        // f rho_a acting on the coefficients of s2
        acc = acc + f * E.rho_frame_apply(a, s2.section_component(c));
        for (int b = 0; b < m; ++b) {
          const Expr& g = s2.section_component(b);
          const Expr& C = E.structure(a, b, c);
          if (!g.is_zero() && !C.is_zero()) acc = acc + f * g * C;
        }
      }
      const Expr& g = s2.section_component(a);
      if (!g.is_zero()) acc = acc - g * E.rho_frame_apply(a, s1.section_component(c));
    }
    out[static_cast<std::size_t>(c)] = acc;
  }
  return TensorField::section(s1.owner(), std::move(out));
}

Expr anchor_apply_expr(const TensorField& s, const Expr& f) {
  const LieAlgebroid& E = *s.owner();
  Expr acc;
  for (int a = 0; a < E.rank(); ++a) {
    const Expr& sa = s.section_component(a);
    if (!sa.is_zero()) acc = acc + sa * E.rho_frame_apply(a, f);
  }
  return acc;
}

TensorField anchor_apply(const TensorField& s, const TensorField& f) {
  require(s.kind() == TensorField::Kind::Section, "anchor_apply: s must be a section");
  require(f.kind() == TensorField::Kind::Form && f.degree() == 0,
          "anchor_apply: f must be a scalar function");
  require(s.owner() == f.owner(), "anchor_apply: mismatched algebroids");
  return TensorField::function(s.owner(), anchor_apply_expr(s, f.form_canonical(0)));
}

TensorField exterior_derivative(const TensorField& omega, DConvention convention) {
  require(omega.kind() == TensorField::Kind::Form, "exterior_derivative: expects a form");
  const AlgebroidPtr& E = omega.owner();
  int m = E->rank();
  int p = omega.degree();
  auto combos = combinations(m, p + 1);
  std::vector<Expr> out(combos.size());
  for (std::size_t k = 0; k < combos.size(); ++k) {
    const auto& B = combos[k];
    Expr acc;
    for (int i = 0; i <= p; ++i) {
      std::vector<int> sub;
      sub.reserve(static_cast<std::size_t>(p));
      for (int t = 0; t <= p; ++t)
        if (t != i) sub.push_back(B[static_cast<std::size_t>(t)]);
      Expr w = p == 0 ? omega.form_canonical(0)
                      : omega.form_canonical(combo_rank(sub, m));
      Expr term = E->rho_frame_apply(B[static_cast<std::size_t>(i)], w);
      acc = (i % 2 == 0) ? acc + term : acc - term;
    }
    for (int i = 0; i <= p; ++i)
      for (int j = i + 1; j <= p; ++j) {
        std::vector<int> rest;
        rest.reserve(static_cast<std::size_t>(p - 1));
        for (int t = 0; t <= p; ++t)
          if (t != i && t != j) rest.push_back(B[static_cast<std::size_t>(t)]);
        for (int c = 0; c < m; ++c) {
          const Expr& C = E->structure(B[static_cast<std::size_t>(i)], B[static_cast<std::size_t>(j)], c);
          if (C.is_zero()) continue;
          std::vector<int> idx;
          idx.reserve(static_cast<std::size_t>(p));
          idx.push_back(c);
          idx.insert(idx.end(), rest.begin(), rest.end());
          Expr w = omega.form_component(std::move(idx));
          if (w.is_zero()) continue;
          Expr term = C * w;
          acc = ((i + j) % 2 == 0) ? acc + term : acc - term;
        }
      }
    out[k] = acc;
  }
  TensorField d = TensorField::form(E, p + 1, std::move(out));
  if (convention == DConvention::Half && p == 1) return d.scaled(0.5);
  return d;
}

TensorField interior_product(const TensorField& s, const TensorField& omega) {
  require(s.kind() == TensorField::Kind::Section, "interior_product: s must be a section");
  require(omega.kind() == TensorField::Kind::Form && omega.degree() >= 1,
          "interior_product: degree-0 input");
  require(s.owner() == omega.owner(), "interior_product: mismatched algebroids");
  const AlgebroidPtr& E = s.owner();
  int m = E->rank();
  int p = omega.degree();
  auto combos = combinations(m, p - 1);
  std::vector<Expr> out(combos.size());
  for (std::size_t k = 0; k < combos.size(); ++k) {
    Expr acc;
    for (int a = 0; a < m; ++a) {
      const Expr& sa = s.section_component(a);
      if (sa.is_zero()) continue;
      std::vector<int> idx;
      idx.reserve(static_cast<std::size_t>(p));
      idx.push_back(a);
      idx.insert(idx.end(), combos[k].begin(), combos[k].end());
      Expr w = omega.form_component(std::move(idx));
      if (!w.is_zero()) acc = acc + sa * w;
    }
    out[k] = acc;
  }
  return TensorField::form(E, p - 1, std::move(out));
}

TensorField lie_derivative(const TensorField& s, const TensorField& T) {
  require(s.kind() == TensorField::Kind::Section, "lie_derivative: s must be a section");
  require(s.owner() == T.owner(), "lie_derivative: mismatched algebroids");
  const AlgebroidPtr& E = s.owner();
  int m = E->rank();
  switch (T.kind()) {
    case TensorField::Kind::Form:
      if (T.degree() == 0) return anchor_apply(s, T);
      // Cartan formula (plain derivative; Half would break d iota + iota d).
      return exterior_derivative(interior_product(s, T)) +
             interior_product(s, exterior_derivative(T));
    case TensorField::Kind::Section:
      return bracket(s, T);
    case TensorField::Kind::Endomorphism: {
      std::vector<std::vector<Expr>> out(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
      for (int b = 0; b < m; ++b) {
        std::vector<Expr> col(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) col[static_cast<std::size_t>(i)] = T.endo_component(i, b);
        TensorField Aeb = TensorField::section(E, std::move(col));
        TensorField t1 = bracket(s, Aeb);
        TensorField t2 = apply_endo(T, bracket(s, TensorField::frame_section(E, b)));
        for (int i = 0; i < m; ++i)
          out[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)] =
              t1.section_component(i) - t2.section_component(i);
      }
      return TensorField::endomorphism(E, std::move(out));
    }
    case TensorField::Kind::Covariant2: {
      std::vector<std::vector<Expr>> out(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
      std::vector<TensorField> br;
      br.reserve(static_cast<std::size_t>(m));
      for (int a = 0; a < m; ++a) br.push_back(bracket(s, TensorField::frame_section(E, a)));
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          Expr acc = anchor_apply_expr(s, T.cov2_component(a, b));
          for (int c = 0; c < m; ++c) {
            const Expr& ba = br[static_cast<std::size_t>(a)].section_component(c);
            if (!ba.is_zero()) acc = acc - ba * T.cov2_component(c, b);
            const Expr& bb = br[static_cast<std::size_t>(b)].section_component(c);
            if (!bb.is_zero()) acc = acc - bb * T.cov2_component(a, c);
          }
          out[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = acc;
        }
      return TensorField::covariant2(E, std::move(out));
    }
    default:
      throw std::invalid_argument("lie_derivative: unsupported variance");
  }
}

TensorField wedge(const TensorField& w1, const TensorField& w2) {
  require(w1.kind() == TensorField::Kind::Form && w2.kind() == TensorField::Kind::Form,
          "wedge: expects forms");
  require(w1.owner() == w2.owner(), "wedge: mismatched algebroids");
  const AlgebroidPtr& E = w1.owner();
  int m = E->rank();
  int p = w1.degree(), q = w2.degree();
  auto combos_out = combinations(m, p + q);
  std::vector<Expr> out(combos_out.size());
  auto subsets = combinations(p + q, p);  // positions of w1 arguments inside K
  for (std::size_t k = 0; k < combos_out.size(); ++k) {
    const auto& K = combos_out[k];
    Expr acc;
    for (const auto& pos : subsets) {
      std::vector<int> s1, s2;
      s1.reserve(static_cast<std::size_t>(p));
      s2.reserve(static_cast<std::size_t>(q));
      std::vector<bool> taken(static_cast<std::size_t>(p + q), false);
      for (int t : pos) taken[static_cast<std::size_t>(t)] = true;
      // shuffle sign: moving the i-th selected slot from position pos[i] to
      // position i crosses pos[i] - i unselected slots
      int sign = 1;
      for (std::size_t i = 0; i < pos.size(); ++i)
        if ((pos[i] - int(i)) % 2 != 0) sign = -sign;
      for (int t = 0; t < p + q; ++t)
        (taken[static_cast<std::size_t>(t)] ? s1 : s2).push_back(K[static_cast<std::size_t>(t)]);
      Expr a = p == 0 ? w1.form_canonical(0) : w1.form_canonical(combo_rank(s1, m));
      Expr b = q == 0 ? w2.form_canonical(0) : w2.form_canonical(combo_rank(s2, m));
      if (a.is_zero() || b.is_zero()) continue;
      Expr term = a * b;
      acc = sign > 0 ? acc + term : acc - term;
    }
    out[k] = acc;
  }
  return TensorField::form(E, p + q, std::move(out));
}

TensorField nijenhuis(const TensorField& A) {
  require(A.kind() == TensorField::Kind::Endomorphism, "nijenhuis: expects a (1,1)-tensor");
  const AlgebroidPtr& E = A.owner();
  int m = E->rank();
  std::vector<TensorField> Ae;
  Ae.reserve(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) Ae.push_back(apply_endo(A, TensorField::frame_section(E, a)));
  std::vector<std::vector<Expr>> out;
  out.reserve(static_cast<std::size_t>(binom(m, 2)));
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      TensorField eab = bracket(TensorField::frame_section(E, a), TensorField::frame_section(E, b));
      TensorField t = bracket(Ae[static_cast<std::size_t>(a)], Ae[static_cast<std::size_t>(b)]) -
                      apply_endo(A, bracket(Ae[static_cast<std::size_t>(a)], TensorField::frame_section(E, b))) -
                      apply_endo(A, bracket(TensorField::frame_section(E, a), Ae[static_cast<std::size_t>(b)])) +
                      apply_endo(A, apply_endo(A, eab));
      std::vector<Expr> val(static_cast<std::size_t>(m));
      for (int c = 0; c < m; ++c) val[static_cast<std::size_t>(c)] = t.section_component(c);
      out.push_back(std::move(val));
    }
  return TensorField::vector_valued_2form(E, std::move(out));
}

// --- helpers ----------------------------------------------------------------

TensorField apply_endo(const TensorField& A, const TensorField& s) {
  require(A.kind() == TensorField::Kind::Endomorphism &&
              s.kind() == TensorField::Kind::Section,
          "apply_endo: expects (1,1)-tensor and section");
  int m = A.rank();
  std::vector<Expr> out(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Expr acc;
    for (int j = 0; j < m; ++j) {
      const Expr& sj = s.section_component(j);
      if (!sj.is_zero()) acc = acc + A.endo_component(i, j) * sj;
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return TensorField::section(A.owner(), std::move(out));
}

TensorField compose_endo(const TensorField& A, const TensorField& B) {
  int m = A.rank();
  std::vector<std::vector<Expr>> out(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Expr acc;
      for (int k = 0; k < m; ++k) acc = acc + A.endo_component(i, k) * B.endo_component(k, j);
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
    }
  return TensorField::endomorphism(A.owner(), std::move(out));
}

TensorField outer(const TensorField& one_form, const TensorField& section) {
  int m = one_form.rank();
  std::vector<std::vector<Expr>> out(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          section.section_component(i) * one_form.form_canonical(j);
  return TensorField::endomorphism(one_form.owner(), std::move(out));
}

Expr pair_form_section(const TensorField& one_form, const TensorField& s) {
  int m = one_form.rank();
  Expr acc;
  for (int a = 0; a < m; ++a) acc = acc + one_form.form_canonical(a) * s.section_component(a);
  return acc;
}

Expr bilinear(const TensorField& cov2, const TensorField& s1, const TensorField& s2) {
  int m = cov2.rank();
  Expr acc;
  for (int a = 0; a < m; ++a) {
    const Expr& x = s1.section_component(a);
    if (x.is_zero()) continue;
    for (int b = 0; b < m; ++b) {
      const Expr& y = s2.section_component(b);
      if (y.is_zero()) continue;
      acc = acc + cov2.cov2_component(a, b) * x * y;
    }
  }
  return acc;
}

TensorField lower_index(const TensorField& cov2, const TensorField& s) {
  int m = cov2.rank();
  std::vector<Expr> out(static_cast<std::size_t>(m));
  for (int b = 0; b < m; ++b) {
    Expr acc;
    for (int a = 0; a < m; ++a) {
      const Expr& sa = s.section_component(a);
      if (!sa.is_zero()) acc = acc + cov2.cov2_component(a, b) * sa;
    }
    out[static_cast<std::size_t>(b)] = acc;
  }
  return TensorField::one_form(cov2.owner(), std::move(out));
}

// --- validate ----------------------------------------------------------------

Report validate(const LieAlgebroid& E, const SampleGrid& grid) {
  // The algebroid object is copied into a shared owner so the symbolic fields
  // assembled here do not dangle.
  AlgebroidPtr P = std::make_shared<const LieAlgebroid>(E);
  int m = E.rank();
  Report rep;

  // (a) Jacobi identity of the extended bracket on frame triples.
  {
    std::vector<Expr> residuals;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        for (int c = b + 1; c < m; ++c) {
          TensorField ea = TensorField::frame_section(P, a);
          TensorField eb = TensorField::frame_section(P, b);
          TensorField ec = TensorField::frame_section(P, c);
          TensorField j = bracket(bracket(ea, eb), ec) + bracket(bracket(eb, ec), ea) +
                          bracket(bracket(ec, ea), eb);
          for (int d = 0; d < m; ++d) residuals.push_back(j.section_component(d));
        }
    CheckResult cr;
    if (residuals.empty()) {
      cr = skipped("jacobi", "rank < 3, no frame triples");
    } else {
      cr = check_max(
          "jacobi", grid,
          [&](const Point& p) {
            double worst = 0.0;
            for (const auto& r : residuals) worst = std::max(worst, std::abs(r.eval(p.coords)));
            return worst;
          },
          grid.tol_eq);
    }
    rep.entries.push_back(cr);
  }

  // (b) anchor morphism: rho([e_a,e_b]) = [rho(e_a), rho(e_b)] as vector fields.
  {
    std::vector<Expr> residuals;
    int n = E.dim();
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        for (int i = 0; i < n; ++i) {
          Expr lhs;
          for (int c = 0; c < m; ++c) {
            const Expr& C = E.structure(a, b, c);
            if (!C.is_zero()) lhs = lhs + C * E.anchor(c, i);
          }
          Expr rhs;
          for (int j = 0; j < n; ++j) {
            if (!E.anchor(a, j).is_zero())
              rhs = rhs + E.anchor(a, j) * E.anchor(b, i).derivative(j);
            if (!E.anchor(b, j).is_zero())
              rhs = rhs - E.anchor(b, j) * E.anchor(a, i).derivative(j);
          }
          residuals.push_back(lhs - rhs);
        }
    CheckResult cr;
    if (residuals.empty()) {
      cr = skipped("anchor_morphism", "rank < 2");
    } else {
      cr = check_max(
          "anchor_morphism", grid,
          [&](const Point& p) {
            double worst = 0.0;
            for (const auto& r : residuals) worst = std::max(worst, std::abs(r.eval(p.coords)));
            return worst;
          },
          grid.tol_eq);
    }
    rep.entries.push_back(cr);
  }

  // (c) skew-symmetry of the structure functions.
  rep.entries.push_back(check_max(
      "structure_skew", grid,
      [&](const Point& p) {
        double worst = 0.0;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b <= a; ++b)
            for (int c = 0; c < m; ++c)
              worst = std::max(worst, std::abs(E.structure(a, b, c).eval(p.coords) +
                                               E.structure(b, a, c).eval(p.coords)));
        return worst;
      },
      grid.tol_eq));

  // d_E^2 = 0 on the coordinate functions; follows from (a)+(b) and serves as
  // an end-to-end exercise of the Cartan machinery.
  {
    std::vector<TensorField> dd;
    for (int i = 0; i < E.dim(); ++i) {
      TensorField f = TensorField::function(P, Expr::variable(i, E.chart().variables[static_cast<std::size_t>(i)]));
      dd.push_back(exterior_derivative(exterior_derivative(f)));
    }
    rep.entries.push_back(check_max(
        "d_squared_coordinates", grid,
        [&](const Point& p) {
          double worst = 0.0;
          for (const auto& t : dd)
            for (double v : t.eval_form(p)) worst = std::max(worst, std::abs(v));
          return worst;
        },
        grid.tol_eq));
  }

  return rep;
}

}  // namespace lalg
