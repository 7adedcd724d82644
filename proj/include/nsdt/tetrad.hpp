#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "nsdt/errors.hpp"
#include "nsdt/fields.hpp"
#include "nsdt/linalg.hpp"
#include "nsdt/metric.hpp"

namespace nsdt {

// f differentiated along the vector field X (chart components).
inline ScalarField apply_vector(const FieldVec4& x, const ScalarField& f) {
  ScalarField acc = ScalarField::zero();
  for (int m = 0; m < 4; ++m) acc = acc + x[static_cast<size_t>(m)] * f.derivative(m);
  return acc;
}

inline FieldVec4 lie_bracket(const FieldVec4& x, const FieldVec4& y) {
  FieldVec4 r;
  for (int c = 0; c < 4; ++c) {
    ScalarField acc = ScalarField::zero();
    for (int m = 0; m < 4; ++m)
      acc = acc + x[static_cast<size_t>(m)] * y[static_cast<size_t>(c)].derivative(m) -
            y[static_cast<size_t>(m)] * x[static_cast<size_t>(c)].derivative(m);
    r[static_cast<size_t>(c)] = acc;
  }
  return r;
}

// Frame (e0, e1, p0, p1) whose Gram matrix is the fixed null pattern
// g(e0,p1) = 1, g(e1,p0) = -1, all other pairings zero.
struct NullTetrad {
  std::array<FieldVec4, 4> frames;  // order: e0, e1, p0, p1

  const FieldVec4& e0() const { return frames[0]; }
  const FieldVec4& e1() const { return frames[1]; }
  const FieldVec4& p0() const { return frames[2]; }
  const FieldVec4& p1() const { return frames[3]; }

  // E[chart index][frame index]
  FieldMat4 component_matrix() const {
    FieldMat4 e;
    for (size_t c = 0; c < 4; ++c)
      for (size_t i = 0; i < 4; ++i) e[c][i] = frames[i][c];
    return e;
  }
};

// The constant null Gram pattern in frame order (e0, e1, p0, p1).
inline Mat4 null_gram_pattern() {
  Mat4 g{};
  g[0][3] = 1.0;
  g[3][0] = 1.0;
  g[1][2] = -1.0;
  g[2][1] = -1.0;
  return g;
}

inline ScalarField field_pairing(const NeutralMetric& m, const FieldVec4& x, const FieldVec4& y) {
  ScalarField acc = ScalarField::zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      acc = acc + m.g(i, j) * x[static_cast<size_t>(i)] * y[static_cast<size_t>(j)];
  return acc;
}

struct TetradValidation {
  double max_residual = 0.0;
  bool exact = false;  // every deviation vanishes as a polynomial
  int worst_i = -1, worst_j = -1;
};

inline TetradValidation validate_tetrad(const NullTetrad& t, const NeutralMetric& m,
                                        int probes = 32) {
  TetradValidation v;
  v.exact = true;
  Mat4 pattern = null_gram_pattern();
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      ScalarField dev =
          field_pairing(m, t.frames[static_cast<size_t>(i)], t.frames[static_cast<size_t>(j)]) -
          ScalarField::constant(Rational(static_cast<int>(pattern[static_cast<size_t>(i)]
                                                                 [static_cast<size_t>(j)])));
      bool zero = dev.is_polynomial() ? dev.poly().is_zero() : false;
      if (!zero) {
        v.exact = false;
        double r = dev.max_abs_on_probes(probes);
        if (r > v.max_residual) {
          v.max_residual = r;
          v.worst_i = i;
          v.worst_j = j;
        }
      }
    }
  if (v.exact) v.max_residual = 0.0;
  return v;
}

// Adapted tetrad for a metric whose vertical distribution span(d2,d3)
// is totally null. Special form uses the closed expression
//   e0 = d0 + (r d2 - p d3)/2,  e1 = d1 + (q d2 - r d3)/2,  p_i = d_{2+i};
// the generic path solves the 2x2 systems of the defining conditions.
inline NullTetrad construct_foliation_tetrad(const NeutralMetric& m) {
  auto coord = [](int i) {
    FieldVec4 v{};
    for (auto& c : v) c = ScalarField::zero();
    v[static_cast<size_t>(i)] = ScalarField::constant(1);
    return v;
  };

  for (int i = 2; i < 4; ++i)
    for (int j = 2; j < 4; ++j)
      if (!m.g(i, j).is_identically_zero(1e-12))
        throw DegenerateVertical("vertical distribution span(d2,d3) is not totally null");

  NullTetrad t;
  t.frames[2] = coord(2);
  t.frames[3] = coord(3);

  if (m.backend() == MetricBackend::SpecialForm) {
    const auto& f = m.form();
    Rational half(1, 2);
    t.frames[0] = coord(0);
    t.frames[0][2] = f.r.scaled(half);
    t.frames[0][3] = f.p.scaled(Rational(-1, 2));
    t.frames[1] = coord(1);
    t.frames[1][2] = f.q.scaled(half);
    t.frames[1][3] = f.r.scaled(Rational(-1, 2));
    return t;
  }

  // Generic foliated backend. M = [[g(d0,d2), g(d0,d3)], [g(d1,d2), g(d1,d3)]].
  std::array<std::array<ScalarField, 2>, 2> mm{
      std::array<ScalarField, 2>{m.g(0, 2), m.g(0, 3)},
      std::array<ScalarField, 2>{m.g(1, 2), m.g(1, 3)}};
  ScalarField det = mm[0][0] * mm[1][1] - mm[0][1] * mm[1][0];
  if (det.is_identically_zero(1e-12))
    throw DegenerateVertical("pairing matrix of the vertical frame is singular");

  // Exact inverse when det is a nonzero rational constant; otherwise a
  // numeric division callback.
  auto divide = [&det](const ScalarField& num) -> ScalarField {
    if (det.is_polynomial() && num.is_polynomial() && det.poly().degree() == 0) {
      Rational d = det.poly().terms().begin()->second;
      return num.scaled(Rational(1) / d);
    }
    return ScalarField([num, det](const ChartPoint& p) {
      double d = det.evaluate(p);
      if (std::abs(d) < 1e-12) throw DegenerateVertical("singular vertical pairing at probe");
      return num.evaluate(p) / d;
    });
  };
  auto solve2 = [&](const ScalarField& r0, const ScalarField& r1) {
    // M (a,b)^T = (r0,r1)^T by Cramer.
    std::array<ScalarField, 2> sol;
    sol[0] = divide(r0 * mm[1][1] - r1 * mm[0][1]);
    sol[1] = divide(r1 * mm[0][0] - r0 * mm[1][0]);
    return sol;
  };

  // p1: g(e0,p1)=1, g(e1,p1)=0 -> pairings against d0, d1.
  auto p1c = solve2(ScalarField::constant(1), ScalarField::zero());
  t.frames[3] = FieldVec4{ScalarField::zero(), ScalarField::zero(), p1c[0], p1c[1]};
  // p0: g(e0,p0)=0, g(e1,p0)=-1.
  auto p0c = solve2(ScalarField::zero(), ScalarField::constant(-1));
  t.frames[2] = FieldVec4{ScalarField::zero(), ScalarField::zero(), p0c[0], p0c[1]};

  // e_i = d_i + alpha_i with vertical alpha_i in the symmetric gauge
  //   M alpha_0 = (-g00/2, -g01/2),  M alpha_1 = (-g01/2, -g11/2),
  // which reproduces the closed special-form expression.
  Rational mhalf(-1, 2);
  auto a0 = solve2(m.g(0, 0).scaled(mhalf), m.g(0, 1).scaled(mhalf));
  auto a1 = solve2(m.g(0, 1).scaled(mhalf), m.g(1, 1).scaled(mhalf));
  t.frames[0] = coord(0);
  t.frames[0][2] = a0[0];
  t.frames[0][3] = a0[1];
  t.frames[1] = coord(1);
  t.frames[1][2] = a1[0];
  t.frames[1][3] = a1[1];
  return t;
}

// ---------------------------------------------------------------------------
// Bivectors and null-plane classification

// Antisymmetric chart bivector with ScalarField components.
using FieldBivector = FieldMat4;

inline FieldBivector field_wedge(const FieldVec4& x, const FieldVec4& y) {
  FieldBivector f;
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) f[i][j] = x[i] * y[j] - x[j] * y[i];
  return f;
}

inline FieldBivector bivector_add(const FieldBivector& a, const FieldBivector& b) {
  FieldBivector r;
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}

inline FieldBivector bivector_scale(const FieldBivector& a, const Rational& c) {
  FieldBivector r;
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) r[i][j] = a[i][j].scaled(c);
  return r;
}

// The frames of wedge^+ = <phi1,phi2,phi3> and wedge^- = <psi1,psi2,psi3>:
//   phi1 = e0^e1, phi2 = p0^p1, phi3 = (e0^p1 - e1^p0)/sqrt(2),
//   psi1 = e0^p0, psi2 = e1^p1, psi3 = (e0^p1 + e1^p0)/sqrt(2).
// The 1/sqrt(2) normalization is irrational; the raw combinations are
// stored and the normalization applied where numeric values are needed.
struct LambdaFrames {
  std::array<FieldBivector, 3> phi;  // phi3 holds e0^p1 - e1^p0 (unnormalized)
  std::array<FieldBivector, 3> psi;  // psi3 holds e0^p1 + e1^p0 (unnormalized)
  static constexpr double kSqrt2 = 1.4142135623730951;
};

inline LambdaFrames lambda_frames(const NullTetrad& t) {
  LambdaFrames f;
  f.phi[0] = field_wedge(t.e0(), t.e1());
  f.phi[1] = field_wedge(t.p0(), t.p1());
  f.phi[2] = bivector_add(field_wedge(t.e0(), t.p1()),
                          bivector_scale(field_wedge(t.e1(), t.p0()), Rational(-1)));
  f.psi[0] = field_wedge(t.e0(), t.p0());
  f.psi[1] = field_wedge(t.e1(), t.p1());
  f.psi[2] = bivector_add(field_wedge(t.e0(), t.p1()), field_wedge(t.e1(), t.p0()));
  return f;
}

// Numeric bivector at a point.
using Bivector = Mat4;

inline Bivector wedge_at(const Vec4& v, const Vec4& w) {
  Bivector f{};
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) f[i][j] = v[i] * w[j] - v[j] * w[i];
  return f;
}

// Pointwise Hodge star on bivectors, with the chart orientation
// eps_{0123} = +1: (*F)^{ij} = (1/2) g^{ik} g^{jl} sqrt(det g) eps_{klmn} F^{mn}.
inline Bivector hodge_star_at(const NeutralMetric& m, const ChartPoint& p, const Bivector& f) {
  Mat4 g = m.gram(p);
  Mat4 ginv = invert_mat4(g);
  double det = 0.0;
  {
    // 4x4 determinant by cofactor expansion on the first row.
    auto det3 = [&](int r0, int r1, int r2, int c0, int c1, int c2) {
      auto a = [&](int i, int j) { return g[static_cast<size_t>(i)][static_cast<size_t>(j)]; };
      return a(r0, c0) * (a(r1, c1) * a(r2, c2) - a(r1, c2) * a(r2, c1)) -
             a(r0, c1) * (a(r1, c0) * a(r2, c2) - a(r1, c2) * a(r2, c0)) +
             a(r0, c2) * (a(r1, c0) * a(r2, c1) - a(r1, c1) * a(r2, c0));
    };
    det = g[0][0] * det3(1, 2, 3, 1, 2, 3) - g[0][1] * det3(1, 2, 3, 0, 2, 3) +
          g[0][2] * det3(1, 2, 3, 0, 1, 3) - g[0][3] * det3(1, 2, 3, 0, 1, 2);
  }
  if (det <= 0.0) throw SingularMetric("split-signature volume form needs det g > 0");
  double s = std::sqrt(det);

  auto eps = [](int i, int j, int k, int l) -> int {
    int p4[4] = {i, j, k, l};
    int sign = 1;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        if (p4[a] == p4[b]) return 0;
        if (p4[a] > p4[b]) sign = -sign;
      }
    return sign;
  };

  Bivector lowered{};
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) {
      double acc = 0.0;
      for (int mm = 0; mm < 4; ++mm)
        for (int n = 0; n < 4; ++n)
          acc += 0.5 * s * eps(k, l, mm, n) * f[static_cast<size_t>(mm)][static_cast<size_t>(n)];
      lowered[static_cast<size_t>(k)][static_cast<size_t>(l)] = acc;
    }
  Bivector out{};
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (size_t k = 0; k < 4; ++k)
        for (size_t l = 0; l < 4; ++l) acc += ginv[i][k] * ginv[j][l] * lowered[k][l];
      out[i][j] = acc;
    }
  return out;
}

enum class PlaneClass { Alpha, Beta, NotTotallyNull };

// Classification of a totally null 2-plane by the sign of its Hodge
// eigenvalue. The indeterminate band between the nullity tolerance and
// the rejection margin raises instead of guessing.
inline PlaneClass classify_null_plane(const Vec4& v, const Vec4& w, const NeutralMetric& m,
                                      const ChartPoint& p, double tolerance = 1e-9,
                                      double reject_margin = 1e-6) {
  double nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
  double nw = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2] + w[3] * w[3]);
  Bivector f = wedge_at(v, w);
  double fmax = 0.0;
  for (const auto& row : f)
    for (double c : row) fmax = std::max(fmax, std::abs(c));
  if (nv == 0.0 || nw == 0.0 || fmax < 1e-12 * nv * nw)
    throw IndecomposableInput("null-plane classification needs independent spanning vectors");

  Mat4 g = m.gram(p);
  double scale = 0.0;
  for (const auto& row : g)
    for (double c : row) scale = std::max(scale, std::abs(c));
  scale *= std::max(nv * nv, nw * nw);
  double defect = std::max({std::abs(m.pairing(v, v, p)), std::abs(m.pairing(v, w, p)),
                            std::abs(m.pairing(w, w, p))});
  if (defect > reject_margin * scale) return PlaneClass::NotTotallyNull;
  if (defect > tolerance * scale)
    throw IndecomposableInput("nullity is indeterminate at this tolerance");

  Bivector sf = hodge_star_at(m, p, f);
  double plus = 0.0, minus = 0.0;
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) {
      plus = std::max(plus, std::abs(sf[i][j] - f[i][j]));
      minus = std::max(minus, std::abs(sf[i][j] + f[i][j]));
    }
  return (plus <= minus) ? PlaneClass::Alpha : PlaneClass::Beta;
}

// Decomposition of a pointwise bivector over the (phi, psi) frames of a
// tetrad, solving the 6x6 system <B_A> coefficients = F. Used as the
// frame-based classification route and cross-checked against the star.
struct FrameDecomposition {
  std::array<double, 3> phi{};
  std::array<double, 3> psi{};
};

inline FrameDecomposition decompose_over_frames(const LambdaFrames& lf, const ChartPoint& p,
                                                const Bivector& f) {
  // Independent components of an antisymmetric 4x4: (01,02,03,12,13,23).
  constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  double a[6][7];
  for (int r = 0; r < 6; ++r) {
    int i = pairs[r][0], j = pairs[r][1];
    for (int c = 0; c < 3; ++c) {
      double phic = lf.phi[static_cast<size_t>(c)][static_cast<size_t>(i)][static_cast<size_t>(j)]
                        .evaluate(p);
      double psic = lf.psi[static_cast<size_t>(c)][static_cast<size_t>(i)][static_cast<size_t>(j)]
                        .evaluate(p);
      if (c == 2) {
        phic /= LambdaFrames::kSqrt2;
        psic /= LambdaFrames::kSqrt2;
      }
      a[r][c] = phic;
      a[r][c + 3] = psic;
    }
    a[r][6] = f[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  // Gaussian elimination with partial pivoting on the 6x7 tableau.
  for (int col = 0; col < 6; ++col) {
    int piv = col;
    for (int r = col + 1; r < 6; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-13)
      throw IndecomposableInput("degenerate lambda frame at probe point");
    for (int c2 = 0; c2 < 7; ++c2) std::swap(a[piv][c2], a[col][c2]);
    for (int r = 0; r < 6; ++r) {
      if (r == col) continue;
      double fac = a[r][col] / a[col][col];
      if (fac == 0.0) continue;
      for (int c2 = col; c2 < 7; ++c2) a[r][c2] -= fac * a[col][c2];
    }
  }
  FrameDecomposition d;
  for (int c = 0; c < 3; ++c) {
    d.phi[static_cast<size_t>(c)] = a[c][6] / a[c][c];
    d.psi[static_cast<size_t>(c)] = a[c + 3][6] / a[c + 3][c + 3];
  }
  return d;
}

}  // namespace nsdt
