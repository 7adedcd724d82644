#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nsdt/connection.hpp"
#include "nsdt/errors.hpp"
#include "nsdt/fields.hpp"
#include "nsdt/metric.hpp"
#include "nsdt/tetrad.hpp"

namespace nsdt {

// Polynomial in the fiber coordinate zeta with ScalarField coefficients.
using ZetaPoly = std::vector<ScalarField>;

inline ScalarField zeta_coeff(const ZetaPoly& p, size_t k) {
  return k < p.size() ? p[k] : ScalarField::zero();
}

// Vector field on the 5-dimensional space (x^0..x^3, zeta); each
// component a zeta-polynomial. zeta is a formal variable here, so
// brackets of lifted fields stay exact on polynomial backends.
struct ZetaVectorField {
  std::array<ZetaPoly, 5> comp;  // directions d0..d3, d_zeta
};

inline ZetaPoly zeta_mul(const ZetaPoly& a, const ZetaPoly& b) {
  if (a.empty() || b.empty()) return {};
  ZetaPoly r(a.size() + b.size() - 1, ScalarField::zero());
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] = r[i + j] + a[i] * b[j];
  return r;
}

inline ZetaPoly zeta_add(const ZetaPoly& a, const ZetaPoly& b) {
  ZetaPoly r(std::max(a.size(), b.size()), ScalarField::zero());
  for (size_t i = 0; i < r.size(); ++i) r[i] = zeta_coeff(a, i) + zeta_coeff(b, i);
  return r;
}

inline ZetaPoly zeta_sub(const ZetaPoly& a, const ZetaPoly& b) {
  ZetaPoly r(std::max(a.size(), b.size()), ScalarField::zero());
  for (size_t i = 0; i < r.size(); ++i) r[i] = zeta_coeff(a, i) - zeta_coeff(b, i);
  return r;
}

inline ZetaPoly zeta_derivative_formal(const ZetaPoly& a) {
  if (a.size() <= 1) return {};
  ZetaPoly r(a.size() - 1, ScalarField::zero());
  for (size_t k = 1; k < a.size(); ++k) r[k - 1] = a[k].scaled(Rational(static_cast<int>(k)));
  return r;
}

inline ZetaPoly zeta_chart_derivative(const ZetaPoly& a, int axis) {
  ZetaPoly r(a.size(), ScalarField::zero());
  for (size_t k = 0; k < a.size(); ++k) r[k] = a[k].derivative(axis);
  return r;
}

inline ZetaVectorField zeta_bracket(const ZetaVectorField& u, const ZetaVectorField& v) {
  ZetaVectorField r;
  for (int c = 0; c < 5; ++c) {
    ZetaPoly acc;
    for (int m = 0; m < 5; ++m) {
      ZetaPoly dv = (m < 4) ? zeta_chart_derivative(v.comp[static_cast<size_t>(c)], m)
                            : zeta_derivative_formal(v.comp[static_cast<size_t>(c)]);
      ZetaPoly du = (m < 4) ? zeta_chart_derivative(u.comp[static_cast<size_t>(c)], m)
                            : zeta_derivative_formal(u.comp[static_cast<size_t>(c)]);
      acc = zeta_add(acc, zeta_sub(zeta_mul(u.comp[static_cast<size_t>(m)], dv),
                                   zeta_mul(v.comp[static_cast<size_t>(m)], du)));
    }
    r.comp[static_cast<size_t>(c)] = acc;
  }
  return r;
}

inline double zeta_eval(const ZetaPoly& p, const ChartPoint& x, double zeta) {
  double acc = 0.0, zp = 1.0;
  for (const auto& c : p) {
    acc += c.evaluate(x) * zp;
    zp *= zeta;
  }
  return acc;
}

// The twistor (Lax) lift:
//   m1 = e0 + zeta e1 + Q1(zeta) d_zeta,
//   m2 = p0 + zeta p1 + Q2(zeta) d_zeta,
// with Q1 = -(b + zeta(d-a) - zeta^2 c)(e0 + zeta e1) and Q2 the same
// cubic applied to (p0 + zeta p1).
struct TwistorLift {
  std::array<ScalarField, 4> q;    // Q1 coefficients q0..q3
  std::array<ScalarField, 4> q2;   // Q2 coefficients
  NullTetrad tetrad;
  ConnectionComponents components;

  ZetaVectorField m1() const {
    ZetaVectorField v;
    for (int c = 0; c < 4; ++c)
      v.comp[static_cast<size_t>(c)] = {tetrad.e0()[static_cast<size_t>(c)],
                                        tetrad.e1()[static_cast<size_t>(c)]};
    v.comp[4] = {q[0], q[1], q[2], q[3]};
    return v;
  }

  ZetaVectorField m2() const {
    ZetaVectorField v;
    for (int c = 0; c < 4; ++c)
      v.comp[static_cast<size_t>(c)] = {tetrad.p0()[static_cast<size_t>(c)],
                                        tetrad.p1()[static_cast<size_t>(c)]};
    v.comp[4] = {q2[0], q2[1], q2[2], q2[3]};
    return v;
  }
};

inline TwistorLift build_twistor_lift(const ConnectionComponents& c, const NullTetrad& t) {
  TwistorLift lift;
  lift.tetrad = t;
  lift.components = c;
  // Q1 = -(c + zeta(d-a) - zeta^2 b) evaluated on (e0 + zeta e1).
  lift.q[0] = -c.c[0];
  lift.q[1] = -(c.d[0] - c.a[0]) - c.c[1];
  lift.q[2] = (c.a[1] - c.d[1]) + c.b[0];
  lift.q[3] = c.b[1];
  // Q2: the same pencil evaluated on (p0 + zeta p1).
  lift.q2[0] = -c.c[2];
  lift.q2[1] = -(c.c[3] + (c.d[2] - c.a[2]));
  lift.q2[2] = -((c.d[3] - c.a[3]) - c.b[2]);
  lift.q2[3] = c.b[3];
  return lift;
}

struct LaxReport {
  std::array<ScalarField, 4> q2_residuals;
  std::array<ScalarField, 5> vertical_derivative_residuals;  // coeffs of (p0+z p1)Q1
  bool coefficients_pass = false;
  bool bracket_pass = false;
  bool pass = false;
  double max_bracket_residual = 0.0;
};

// Integrability of the Lax pair: Q2 == 0, (p0 + zeta p1) Q1 == 0 as a
// zeta-polynomial, and a direct bracket span test at sampled real zeta.
inline LaxReport check_lax_integrability(const TwistorLift& lift, double tolerance = 1e-9,
                                         int probes = 16, uint64_t seed = 20060711) {
  LaxReport rep;
  const NullTetrad& t = lift.tetrad;
  rep.coefficients_pass = true;
  for (size_t k = 0; k < 4; ++k) {
    rep.q2_residuals[k] = lift.q2[k];
    rep.coefficients_pass =
        rep.coefficients_pass && lift.q2[k].is_identically_zero(tolerance, probes);
  }
  for (size_t k = 0; k < 5; ++k) {
    ScalarField res = ScalarField::zero();
    if (k < 4) res = res + apply_vector(t.p0(), lift.q[k]);
    if (k >= 1) res = res + apply_vector(t.p1(), lift.q[k - 1]);
    rep.vertical_derivative_residuals[k] = res;
    rep.coefficients_pass = rep.coefficients_pass && res.is_identically_zero(tolerance, probes);
  }

  // Direct bracket test: [m1, m2] must lie in span{m1, m2} pointwise.
  ZetaVectorField m1 = lift.m1(), m2 = lift.m2();
  ZetaVectorField br = zeta_bracket(m1, m2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const std::array<double, 5> zetas{-2.0, -1.0, 0.0, 0.5, 3.0};
  rep.bracket_pass = true;
  for (int pp = 0; pp < probes; ++pp) {
    ChartPoint x;
    for (int i = 0; i < 4; ++i) x[i] = dist(rng);
    for (double z : zetas) {
      std::array<double, 5> u{}, v{}, b{};
      double scale = 0.0;
      for (size_t c = 0; c < 5; ++c) {
        u[c] = zeta_eval(m1.comp[c], x, z);
        v[c] = zeta_eval(m2.comp[c], x, z);
        b[c] = zeta_eval(br.comp[c], x, z);
        scale = std::max({scale, std::abs(u[c]), std::abs(v[c]), 1.0});
      }
      // Least squares [u v] (s,t)^T = b via normal equations.
      double uu = 0, uv = 0, vv = 0, ub = 0, vb = 0;
      for (size_t c = 0; c < 5; ++c) {
        uu += u[c] * u[c];
        uv += u[c] * v[c];
        vv += v[c] * v[c];
        ub += u[c] * b[c];
        vb += v[c] * b[c];
      }
      double det = uu * vv - uv * uv;
      double s = 0, tt = 0;
      if (std::abs(det) > 1e-14) {
        s = (ub * vv - vb * uv) / det;
        tt = (vb * uu - ub * uv) / det;
      }
      double res = 0.0;
      for (size_t c = 0; c < 5; ++c) res = std::max(res, std::abs(b[c] - s * u[c] - tt * v[c]));
      rep.max_bracket_residual = std::max(rep.max_bracket_residual, res / scale);
    }
  }
  rep.bracket_pass = rep.max_bracket_residual <= std::max(tolerance, 1e-9);
  rep.pass = rep.coefficients_pass && rep.bracket_pass;
  return rep;
}

struct BasicReport {
  std::array<std::array<ScalarField, 4>, 2> residuals;  // residuals[i][j] = p_i q_j
  bool basic = false;
};

// Fiber-independence of the Lax coefficients: p_i q_j == 0. Only
// meaningful for self-dual metrics (the lemma's hypothesis), so a
// failing integrability report is rejected.
inline BasicReport check_basic(const TwistorLift& lift, const LaxReport& integrability,
                               double tolerance = 1e-9, int probes = 16) {
  if (!integrability.pass)
    throw NotSelfDual("basic criterion assumes a self-dual metric (Lax integrability failed)");
  BasicReport rep;
  rep.basic = true;
  for (int i = 0; i < 2; ++i)
    for (size_t j = 0; j < 4; ++j) {
      const FieldVec4& v = (i == 0) ? lift.tetrad.p0() : lift.tetrad.p1();
      rep.residuals[static_cast<size_t>(i)][j] = apply_vector(v, lift.q[j]);
      rep.basic = rep.basic &&
                  rep.residuals[static_cast<size_t>(i)][j].is_identically_zero(tolerance, probes);
    }
  return rep;
}

// ---------------------------------------------------------------------------
// Induced projective structure on the leaf space

// Torsion-free connection on the 2D leaf chart (y0,y1):
// w[i][j][k] = omega^i_j(d_{y^k}).
struct ProjectiveConnection2D {
  std::array<std::array<std::array<ScalarField, 2>, 2>, 2> w;

  const ScalarField& value(int i, int j, int k) const {
    return w[static_cast<size_t>(i)][static_cast<size_t>(j)][static_cast<size_t>(k)];
  }
};

// Leaf connection of a basic SD foliation:
//   w^0_1 = b,  w^1_0 = c,
//   w^0_0(d0) = (a-d)(e0) + c(e1),  w^0_0(d1) = b(e0),
//   w^1_1(d0) = c(e1),              w^1_1(d1) = (d-a)(e1) + b(e0).
// Torsion-free by construction; its spray cubic reproduces Q1 exactly.
inline ProjectiveConnection2D induced_projective_connection(const TwistorLift& lift,
                                                            const LaxReport& integrability,
                                                            const BasicReport& basic) {
  if (!basic.basic)
    throw NotBasic("leaf connection requires the basic condition (b, c, a-d descend)");
  (void)integrability;
  const auto& c = lift.components;
  ProjectiveConnection2D conn;
  ScalarField ad0 = c.a[0] - c.d[0], ad1 = c.a[1] - c.d[1];
  conn.w[0][1][0] = c.b[0];
  conn.w[0][1][1] = c.b[1];
  conn.w[1][0][0] = c.c[0];
  conn.w[1][0][1] = c.c[1];
  conn.w[0][0][0] = ad0 + c.c[1];
  conn.w[0][0][1] = c.b[0];
  conn.w[1][1][0] = c.c[1];
  conn.w[1][1][1] = -ad1 + c.b[0];
  return conn;
}

// zeta-cubic of the projective spray on P(TB):
//   n = d0 + zeta d1 - (w^1_0 + zeta(w^1_1 - w^0_0) - zeta^2 w^0_1)(d0 + zeta d1) d_zeta.
inline std::array<ScalarField, 4> spray_zeta_cubic(const ProjectiveConnection2D& c) {
  std::array<ScalarField, 4> k;
  k[0] = -c.value(1, 0, 0);
  k[1] = -(c.value(1, 0, 1) + c.value(1, 1, 0) - c.value(0, 0, 0));
  k[2] = -(c.value(1, 1, 1) - c.value(0, 0, 1) - c.value(0, 1, 0));
  k[3] = c.value(0, 1, 1);
  return k;
}

struct SprayState {
  double y0 = 0.0, y1 = 0.0, zeta = 0.0;
};

// Spray vector (dy0, dy1, dzeta) at a state; fields are evaluated on the
// chart point (y0, y1, 0, 0).
inline std::array<double, 3> projective_spray(const ProjectiveConnection2D& c,
                                              const SprayState& s) {
  ChartPoint p;
  p[0] = s.y0;
  p[1] = s.y1;
  p[2] = 0.0;
  p[3] = 0.0;
  auto cubic = spray_zeta_cubic(c);
  double z = s.zeta;
  double dz = cubic[0].evaluate(p) + z * (cubic[1].evaluate(p) +
                                          z * (cubic[2].evaluate(p) + z * cubic[3].evaluate(p)));
  return {1.0, z, dz};
}

// The same spray in the inverted fiber chart zt = 1/zeta, parameterized
// by y1; obtained from the affine formula by swapping the index roles.
inline std::array<double, 3> projective_spray_inverted(const ProjectiveConnection2D& c,
                                                       const SprayState& s) {
  ChartPoint p;
  p[0] = s.y0;
  p[1] = s.y1;
  p[2] = 0.0;
  p[3] = 0.0;
  double z = s.zeta;  // here: zt
  auto val = [&](int i, int j, int k) { return c.value(i, j, k).evaluate(p); };
  // cubic in zt: -(w^0_1 + zt(w^0_0 - w^1_1) - zt^2 w^1_0)(d1 + zt d0)
  double k0 = -val(0, 1, 1);
  double k1 = -(val(0, 1, 0) + val(0, 0, 1) - val(1, 1, 1));
  double k2 = -(val(0, 0, 0) - val(1, 1, 0) - val(1, 0, 1));
  double k3 = val(1, 0, 0);
  double dz = k0 + z * (k1 + z * (k2 + z * k3));
  return {z, 1.0, dz};  // (dy0, dy1, dzt)
}

// Reduction identity: the spray cubic of the induced leaf connection
// equals Q1 coefficient-by-coefficient.
inline bool reduction_identity_holds(const TwistorLift& lift, const ProjectiveConnection2D& conn,
                                     double tolerance = 1e-9, int probes = 16) {
  auto k = spray_zeta_cubic(conn);
  for (size_t i = 0; i < 4; ++i)
    if (!(k[i] - lift.q[i]).is_identically_zero(tolerance, probes)) return false;
  return true;
}

}  // namespace nsdt
