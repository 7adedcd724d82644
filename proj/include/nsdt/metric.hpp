#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nsdt/errors.hpp"
#include "nsdt/fields.hpp"
#include "nsdt/linalg.hpp"

namespace nsdt {

enum class MetricBackend { SpecialForm, ProductSphere, Generic };

// Special-form triple: g rows [[p,r,0,1],[r,q,-1,0],[0,-1,0,0],[1,0,0,0]].
struct SpecialFormData {
  ScalarField p, q, r;
};

// Neutral (split-signature) metric on the chart.
class NeutralMetric {
 public:
  static NeutralMetric special_form(ScalarField p, ScalarField q, ScalarField r) {
    NeutralMetric m;
    m.backend_ = MetricBackend::SpecialForm;
    m.form_ = SpecialFormData{p, q, r};
    auto one = ScalarField::constant(1);
    auto mone = ScalarField::constant(-1);
    m.g_ = FieldMat4{FieldVec4{p, r, ScalarField::zero(), one},
                     FieldVec4{r, q, mone, ScalarField::zero()},
                     FieldVec4{ScalarField::zero(), mone, ScalarField::zero(), ScalarField::zero()},
                     FieldVec4{one, ScalarField::zero(), ScalarField::zero(), ScalarField::zero()}};
    return m;
  }

  static NeutralMetric generic(FieldMat4 g) {
    NeutralMetric m;
    m.backend_ = MetricBackend::Generic;
    m.g_ = std::move(g);
    return m;
  }

  // Round-sphere difference on the chart (theta1, phi1, theta2, phi2):
  // diag(1, sin^2 theta1, -1, -sin^2 theta2), first factor positive.
  static NeutralMetric product_sphere(double chart_margin = 1e-6) {
    NeutralMetric m;
    m.backend_ = MetricBackend::ProductSphere;
    m.chart_margin_ = chart_margin;
    auto guard = [chart_margin](const ChartPoint& p, int axis) {
      double s = std::sin(p[axis]);
      if (std::abs(s) < chart_margin)
        throw ChartSingularity("product-sphere chart singular near a pole");
      return s;
    };
    m.g_ = zero_field_mat4();
    m.g_[0][0] = ScalarField::constant(1);
    m.g_[1][1] = ScalarField([guard](const ChartPoint& p) {
      double s = guard(p, 0);
      return s * s;
    });
    m.g_[2][2] = ScalarField::constant(-1);
    m.g_[3][3] = ScalarField([guard](const ChartPoint& p) {
      double s = guard(p, 2);
      return -s * s;
    });
    return m;
  }

  MetricBackend backend() const { return backend_; }
  const FieldMat4& g() const { return g_; }
  const ScalarField& g(int i, int j) const {
    return g_[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  const SpecialFormData& form() const {
    if (!form_) throw SingularMetric("metric has no special-form data");
    return *form_;
  }
  bool has_form() const { return form_.has_value(); }
  double chart_margin() const { return chart_margin_; }

  Mat4 gram(const ChartPoint& p) const { return evaluate_mat4(g_, p); }

  // Symbolic inverse; exact for the special form (det == 1).
  FieldMat4 inverse() const { return field_inverse4(g_); }

  double pairing(const Vec4& v, const Vec4& w, const ChartPoint& p) const {
    Mat4 gm = gram(p);
    double acc = 0.0;
    for (size_t i = 0; i < 4; ++i)
      for (size_t j = 0; j < 4; ++j) acc += gm[i][j] * v[i] * w[j];
    return acc;
  }

  // Signature check at a probe point: exactly two positive and two
  // negative eigenvalues of the Gram matrix.
  bool split_signature_at(const ChartPoint& p) const {
    auto ev = symmetric_eigenvalues4(gram(p));
    int pos = 0, neg = 0;
    for (double e : ev) {
      if (e > 1e-12) ++pos;
      if (e < -1e-12) ++neg;
    }
    return pos == 2 && neg == 2;
  }

 private:
  MetricBackend backend_ = MetricBackend::Generic;
  FieldMat4 g_ = zero_field_mat4();
  std::optional<SpecialFormData> form_;
  double chart_margin_ = 1e-6;
};

inline NeutralMetric build_special_form(const ScalarField& p, const ScalarField& q,
                                        const ScalarField& r) {
  return NeutralMetric::special_form(p, q, r);
}

// Residuals of the self-duality system on (p,q,r):
//   d2^2 p,  d3^2 q,  d3^2 p + d2^2 q + 4 d2 d3 r,
//   d2^2 r + d2 d3 p,  d3^2 r + d2 d3 q.
// The 4 d2 d3 r term in the third equation is required: substituting the
// connection component values into the duality identities gives
//   p0(a-d)(e1) - p1(d-a)(e0) = -(d2^2 p + d2^2 q + d3^2 p + d3^2 q
//                                 + 4 d2 d3 r)/2,
// and dropping it produces metrics whose anti-self-dual Weyl part is
// nonzero (checked against the independent Hodge-star curvature oracle:
// p=q=0, r=x2 x3 fails, while p=-(x3)^2, q=-(x2)^2, r=x2 x3 is exactly
// self-dual).
struct SdSystemReport {
  std::array<ScalarField, 5> residuals;
  std::array<bool, 5> equation_pass{};
  bool pass = false;

  static constexpr std::array<const char*, 5> kNames = {
      "d2^2 p", "d3^2 q", "d3^2 p + d2^2 q + 4 d2 d3 r", "d2^2 r + d2 d3 p",
      "d3^2 r + d2 d3 q"};
};

inline SdSystemReport check_sd_system(const ScalarField& p, const ScalarField& q,
                                      const ScalarField& r, double tolerance = 1e-9,
                                      int probes = 32) {
  SdSystemReport rep;
  auto d = [](const ScalarField& f, int i, int j) { return f.derivative(i).derivative(j); };
  rep.residuals[0] = d(p, 2, 2);
  rep.residuals[1] = d(q, 3, 3);
  rep.residuals[2] = d(p, 3, 3) + d(q, 2, 2) + d(r, 2, 3).scaled(Rational(4));
  rep.residuals[3] = d(r, 2, 2) + d(p, 2, 3);
  rep.residuals[4] = d(r, 3, 3) + d(q, 2, 3);
  rep.pass = true;
  for (size_t i = 0; i < 5; ++i) {
    rep.equation_pass[i] = rep.residuals[i].is_identically_zero(tolerance, probes);
    rep.pass = rep.pass && rep.equation_pass[i];
  }
  return rep;
}

inline SdSystemReport check_sd_system(const NeutralMetric& m, double tolerance = 1e-9,
                                      int probes = 32) {
  const auto& f = m.form();
  return check_sd_system(f.p, f.q, f.r, tolerance, probes);
}

namespace detail {

struct MonomialBasis {
  std::vector<Exponents> monomials;  // shared by p, q and r slots
};

inline MonomialBasis sd_monomial_basis(unsigned fiber_degree, unsigned base_degree) {
  MonomialBasis b;
  for (unsigned a0 = 0; a0 <= base_degree; ++a0)
    for (unsigned a1 = 0; a0 + a1 <= base_degree; ++a1)
      for (unsigned a2 = 0; a2 <= fiber_degree; ++a2)
        for (unsigned a3 = 0; a2 + a3 <= fiber_degree; ++a3)
          b.monomials.push_back({a0, a1, a2, a3});
  return b;
}

inline Polynomial from_coefficients(const MonomialBasis& basis,
                                    const std::vector<Rational>& coeffs, size_t slot) {
  Polynomial out;
  size_t n = basis.monomials.size();
  for (size_t k = 0; k < n; ++k) out.add_term(coeffs[slot * n + k], basis.monomials[k]);
  return out;
}

// Exact solve of the (square, SPD over Q) normal equations.
inline std::vector<Rational> rational_solve(RationalMatrix a, std::vector<Rational> rhs) {
  size_t n = a.size();
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    while (piv < n && a[piv][c] == 0) ++piv;
    if (piv == n) throw SingularMetric("singular rational system");
    std::swap(a[piv], a[c]);
    std::swap(rhs[piv], rhs[c]);
    Rational d = a[c][c];
    for (size_t j = 0; j < n; ++j) a[c][j] /= d;
    rhs[c] /= d;
    for (size_t i = 0; i < n; ++i) {
      if (i == c || a[i][c] == 0) continue;
      Rational f = a[i][c];
      for (size_t j = 0; j < n; ++j) a[i][j] -= f * a[c][j];
      rhs[i] -= f * rhs[c];
    }
  }
  return rhs;
}

}  // namespace detail

// Exact polynomial solutions of the SD system, produced by projecting
// random coefficient vectors onto the null space of the linear
// constraint map induced by the five PDEs.
inline std::vector<std::array<ScalarField, 3>> generate_sd_family(unsigned fiber_degree,
                                                                  unsigned base_degree,
                                                                  uint64_t seed, unsigned count) {
  auto basis = detail::sd_monomial_basis(fiber_degree, base_degree);
  size_t n = basis.monomials.size();
  size_t cols = 3 * n;

  // Constraint rows: one per (equation, residual monomial).
  std::map<std::pair<int, Exponents>, size_t> row_index;
  RationalMatrix constraints;
  auto add_rows = [&](size_t col, const std::array<Polynomial, 5>& residuals) {
    for (int eq = 0; eq < 5; ++eq)
      for (const auto& [e, c] : residuals[static_cast<size_t>(eq)].terms()) {
        auto key = std::make_pair(eq, e);
        auto it = row_index.find(key);
        if (it == row_index.end()) {
          it = row_index.emplace(key, constraints.size()).first;
          constraints.emplace_back(cols, Rational(0));
        }
        constraints[it->second][col] += c;
      }
  };
  for (size_t slot = 0; slot < 3; ++slot)
    for (size_t k = 0; k < n; ++k) {
      Polynomial unit;
      unit.add_term(1, basis.monomials[k]);
      ScalarField zero = ScalarField::zero();
      ScalarField p = (slot == 0) ? ScalarField(unit) : zero;
      ScalarField q = (slot == 1) ? ScalarField(unit) : zero;
      ScalarField r = (slot == 2) ? ScalarField(unit) : zero;
      auto rep = check_sd_system(p, q, r);
      std::array<Polynomial, 5> res;
      for (size_t i = 0; i < 5; ++i) res[i] = rep.residuals[i].poly();
      add_rows(slot * n + k, res);
    }

  auto null_basis = rational_null_space(constraints, cols);
  if (null_basis.empty()) throw InfeasibleDegree("SD constraint null space is trivial");

  // Gram matrix of the null-space basis for exact orthogonal projection.
  size_t nb = null_basis.size();
  RationalMatrix gram(nb, std::vector<Rational>(nb, Rational(0)));
  for (size_t i = 0; i < nb; ++i)
    for (size_t j = 0; j < nb; ++j)
      for (size_t k = 0; k < cols; ++k) gram[i][j] += null_basis[i][k] * null_basis[j][k];

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coeff(-9, 9);
  std::vector<std::array<ScalarField, 3>> family;
  while (family.size() < count) {
    std::vector<Rational> raw(cols);
    for (auto& c : raw) c = coeff(rng);
    std::vector<Rational> rhs(nb, Rational(0));
    for (size_t i = 0; i < nb; ++i)
      for (size_t k = 0; k < cols; ++k) rhs[i] += null_basis[i][k] * raw[k];
    auto y = detail::rational_solve(gram, rhs);
    std::vector<Rational> projected(cols, Rational(0));
    for (size_t i = 0; i < nb; ++i)
      for (size_t k = 0; k < cols; ++k) projected[k] += y[i] * null_basis[i][k];
    bool nonzero = false;
    for (const auto& c : projected) nonzero = nonzero || (c != 0);
    if (!nonzero) continue;
    family.push_back({ScalarField(detail::from_coefficients(basis, projected, 0)),
                      ScalarField(detail::from_coefficients(basis, projected, 1)),
                      ScalarField(detail::from_coefficients(basis, projected, 2))});
  }
  return family;
}

// Gram matrix of the standard structure at a chart point
// (theta1, phi1, theta2, phi2).
inline Mat4 standard_s2xs2(const ChartPoint& x, double chart_margin = 1e-6) {
  return NeutralMetric::product_sphere(chart_margin).gram(x);
}

}  // namespace nsdt
