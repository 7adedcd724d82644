#pragma once

#include <array>
#include <cmath>
#include <string>

#include "nsdt/connection.hpp"
#include "nsdt/errors.hpp"
#include "nsdt/fields.hpp"
#include "nsdt/linalg.hpp"
#include "nsdt/metric.hpp"
#include "nsdt/tetrad.hpp"

namespace nsdt {

// Riemann tensor with R^k_{l i j} = d_i G^k_{jl} - d_j G^k_{il}
// + G^k_{im} G^m_{jl} - G^k_{jm} G^m_{il}; lowered on the first index.
// Signs are pinned so the unit round sphere has sectional curvature +1.
struct CurvatureTensor {
  // lowered[k][l][i][j] = R_{klij}
  std::array<std::array<FieldMat4, 4>, 4> lowered;
  FieldMat4 ricci;       // Ric_{lj} = R^i_{l i j}
  ScalarField scalar;    // g^{lj} Ric_{lj}

  const ScalarField& at(int k, int l, int i, int j) const {
    return lowered[static_cast<size_t>(k)][static_cast<size_t>(l)][static_cast<size_t>(i)]
                  [static_cast<size_t>(j)];
  }
};

inline CurvatureTensor riemann(const NeutralMetric& m) {
  Christoffels gamma = christoffel(m);
  auto gm = [&gamma](int k, int i, int j) -> const ScalarField& {
    return gamma[static_cast<size_t>(k)][static_cast<size_t>(i)][static_cast<size_t>(j)];
  };

  std::array<std::array<FieldMat4, 4>, 4> upper;  // R^k_{lij}
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          if (j < i) {
            upper[static_cast<size_t>(k)][static_cast<size_t>(l)][static_cast<size_t>(i)]
                 [static_cast<size_t>(j)] =
                     -upper[static_cast<size_t>(k)][static_cast<size_t>(l)]
                           [static_cast<size_t>(j)][static_cast<size_t>(i)];
            continue;
          }
          ScalarField acc = gm(k, j, l).derivative(i) - gm(k, i, l).derivative(j);
          for (int mm = 0; mm < 4; ++mm)
            acc = acc + gm(k, i, mm) * gm(mm, j, l) - gm(k, j, mm) * gm(mm, i, l);
          upper[static_cast<size_t>(k)][static_cast<size_t>(l)][static_cast<size_t>(i)]
               [static_cast<size_t>(j)] = acc;
        }

  CurvatureTensor r;
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          ScalarField acc = ScalarField::zero();
          for (int mm = 0; mm < 4; ++mm)
            acc = acc + m.g(k, mm) * upper[static_cast<size_t>(mm)][static_cast<size_t>(l)]
                                          [static_cast<size_t>(i)][static_cast<size_t>(j)];
          r.lowered[static_cast<size_t>(k)][static_cast<size_t>(l)][static_cast<size_t>(i)]
                   [static_cast<size_t>(j)] = acc;
        }

  for (int l = 0; l < 4; ++l)
    for (int j = 0; j < 4; ++j) {
      ScalarField acc = ScalarField::zero();
      for (int i = 0; i < 4; ++i)
        acc = acc + upper[static_cast<size_t>(i)][static_cast<size_t>(l)][static_cast<size_t>(i)]
                         [static_cast<size_t>(j)];
      r.ricci[static_cast<size_t>(l)][static_cast<size_t>(j)] = acc;
    }

  FieldMat4 ginv = detail::all_polynomial(m.g()) ? m.inverse() : FieldMat4{};
  if (!detail::all_polynomial(m.g())) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        ginv[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            ScalarField([&m, i, j](const ChartPoint& p) {
              return invert_mat4(m.gram(p))[static_cast<size_t>(i)][static_cast<size_t>(j)];
            });
  }
  ScalarField s = ScalarField::zero();
  for (int l = 0; l < 4; ++l)
    for (int j = 0; j < 4; ++j)
      s = s + ginv[static_cast<size_t>(l)][static_cast<size_t>(j)] *
                  r.ricci[static_cast<size_t>(l)][static_cast<size_t>(j)];
  r.scalar = s;
  return r;
}

// Weyl tensor of a 4-metric, lowered indices, same layout as Riemann.
inline std::array<std::array<FieldMat4, 4>, 4> weyl_tensor(const NeutralMetric& m,
                                                           const CurvatureTensor& r) {
  std::array<std::array<FieldMat4, 4>, 4> w;
  Rational half(1, 2), sixth(1, 6);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          ScalarField acc = r.at(a, b, c, d);
          auto g = [&m](int i, int j) -> const ScalarField& { return m.g(i, j); };
          auto ric = [&r](int i, int j) -> const ScalarField& {
            return r.ricci[static_cast<size_t>(i)][static_cast<size_t>(j)];
          };
          acc = acc - (g(a, c) * ric(b, d) - g(a, d) * ric(b, c) - g(b, c) * ric(a, d) +
                       g(b, d) * ric(a, c))
                          .scaled(half);
          acc = acc + (r.scalar * (g(a, c) * g(b, d) - g(a, d) * g(b, c))).scaled(sixth);
          w[static_cast<size_t>(a)][static_cast<size_t>(b)][static_cast<size_t>(c)]
           [static_cast<size_t>(d)] = acc;
        }
  return w;
}

// Quadratic form of the Weyl operator over the (phi, psi') frames,
// where psi3' (and phi3') are the unnormalized combinations of
// lambda_frames: Q[A][B] = (1/4) B_A^{ab} W_{abcd} B_B^{cd}.
struct WeylDecomposition {
  std::array<std::array<ScalarField, 3>, 3> plus;   // phi-phi block
  std::array<std::array<ScalarField, 3>, 3> minus;  // psi-psi block
  std::array<std::array<ScalarField, 3>, 3> mixed;  // phi-psi block (zero for Weyl)
  bool asd_exact_zero = false;
  double asd_norm = 0.0;
  bool sd = false;
};

inline WeylDecomposition weyl_decomposition(const NeutralMetric& m, double tolerance = 1e-8,
                                            int probes = 32) {
  CurvatureTensor r = riemann(m);
  auto w = weyl_tensor(m, r);
  NullTetrad t = construct_foliation_tetrad(m);
  LambdaFrames lf = lambda_frames(t);

  auto contract = [&](const FieldBivector& ba, const FieldBivector& bb) {
    ScalarField acc = ScalarField::zero();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) {
            const ScalarField& wf = w[static_cast<size_t>(a)][static_cast<size_t>(b)]
                                     [static_cast<size_t>(c)][static_cast<size_t>(d)];
            if (wf.is_polynomial() && wf.poly().is_zero()) continue;
            acc = acc + (ba[static_cast<size_t>(a)][static_cast<size_t>(b)] * wf *
                         bb[static_cast<size_t>(c)][static_cast<size_t>(d)])
                            .scaled(Rational(1, 4));
          }
    return acc;
  };

  WeylDecomposition dec;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      dec.plus[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          contract(lf.phi[static_cast<size_t>(i)], lf.phi[static_cast<size_t>(j)]);
      dec.minus[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          contract(lf.psi[static_cast<size_t>(i)], lf.psi[static_cast<size_t>(j)]);
      dec.mixed[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          contract(lf.phi[static_cast<size_t>(i)], lf.psi[static_cast<size_t>(j)]);
    }

  dec.asd_exact_zero = true;
  for (const auto& row : dec.minus)
    for (const auto& f : row) {
      bool z = f.is_polynomial() && f.poly().is_zero();
      dec.asd_exact_zero = dec.asd_exact_zero && z;
      if (!z) dec.asd_norm = std::max(dec.asd_norm, f.max_abs_on_probes(probes));
    }
  dec.sd = dec.asd_exact_zero || dec.asd_norm <= tolerance;
  return dec;
}

// Hodge star on chart bivectors, symbolic when sqrt(det g) is an exact
// rational (the special form has det == 1); numeric callbacks otherwise.
class HodgeStar {
 public:
  explicit HodgeStar(const NeutralMetric& m) : m_(m) {
    if (detail::all_polynomial(m.g())) {
      ScalarField det = field_det4(m.g());
      const Polynomial& dp = det.poly();
      if (!dp.is_zero() && dp.degree() == 0) {
        Rational d = dp.terms().begin()->second;
        if (d == 1) {
          exact_ = true;
          ginv_ = m.inverse();
        }
      }
    }
  }

  bool exact() const { return exact_; }

  FieldBivector apply(const FieldBivector& f) const {
    if (exact_) return apply_exact(f);
    const NeutralMetric& m = m_;
    FieldBivector out;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        out[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            ScalarField([&m, f, i, j](const ChartPoint& p) {
              Bivector fp{};
              for (size_t a = 0; a < 4; ++a)
                for (size_t b = 0; b < 4; ++b) fp[a][b] = f[a][b].evaluate(p);
              return hodge_star_at(m, p, fp)[static_cast<size_t>(i)][static_cast<size_t>(j)];
            });
    return out;
  }

 private:
  static int eps(int i, int j, int k, int l) {
    int p4[4] = {i, j, k, l};
    int sign = 1;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        if (p4[a] == p4[b]) return 0;
        if (p4[a] > p4[b]) sign = -sign;
      }
    return sign;
  }

  FieldBivector apply_exact(const FieldBivector& f) const {
    FieldBivector lowered;
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) {
        ScalarField acc = ScalarField::zero();
        for (int mm = 0; mm < 4; ++mm)
          for (int n = 0; n < 4; ++n) {
            int s = eps(k, l, mm, n);
            if (s == 0) continue;
            acc = acc +
                  f[static_cast<size_t>(mm)][static_cast<size_t>(n)].scaled(Rational(s, 2));
          }
        lowered[static_cast<size_t>(k)][static_cast<size_t>(l)] = acc;
      }
    FieldBivector out;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        ScalarField acc = ScalarField::zero();
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l)
            acc = acc + ginv_[static_cast<size_t>(i)][static_cast<size_t>(k)] *
                            ginv_[static_cast<size_t>(j)][static_cast<size_t>(l)] *
                            lowered[static_cast<size_t>(k)][static_cast<size_t>(l)];
        out[static_cast<size_t>(i)][static_cast<size_t>(j)] = acc;
      }
    return out;
  }

  const NeutralMetric& m_;
  bool exact_ = false;
  FieldMat4 ginv_;
};

// ---------------------------------------------------------------------------
// Positive spin curvature and the basic-foliation residuals

// Curvature of the sl(2)+ part: Omega+ = d omega+ + omega+ ^ omega+,
// a 2x2 matrix of frame 2-forms; basic iff i(p_A) Omega+ = 0.
struct SpinCurvatureReport {
  // values[i][j][a][b] = Omega+^i_j(frame_a, frame_b)
  std::array<std::array<std::array<std::array<ScalarField, 4>, 4>, 2>, 2> values;
  bool basic = false;
  bool exact = false;
  double max_vertical_residual = 0.0;
};

inline SpinCurvatureReport spin_curvature_plus(const NeutralMetric& m, const NullTetrad& t,
                                               double tolerance = 1e-8, int probes = 32) {
  auto w = connection_form_in_tetrad(m, t, tolerance);
  auto spin = split_spin_parts(w);
  FieldMat4 einv = field_inverse4(t.component_matrix());

  // Bracket coefficients [f_a, f_b] = sum_k coeff^k f_k.
  std::array<std::array<FieldVec4, 4>, 4> bracket_coeff;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      FieldVec4 br = lie_bracket(t.frames[static_cast<size_t>(a)], t.frames[static_cast<size_t>(b)]);
      for (int k = 0; k < 4; ++k) {
        ScalarField acc = ScalarField::zero();
        for (int c = 0; c < 4; ++c)
          acc = acc +
                einv[static_cast<size_t>(k)][static_cast<size_t>(c)] * br[static_cast<size_t>(c)];
        bracket_coeff[static_cast<size_t>(a)][static_cast<size_t>(b)][static_cast<size_t>(k)] = acc;
      }
    }

  auto d_of = [&](const FrameOneForm& sigma, int a, int b) {
    ScalarField acc = apply_vector(t.frames[static_cast<size_t>(a)], sigma[static_cast<size_t>(b)]) -
                      apply_vector(t.frames[static_cast<size_t>(b)], sigma[static_cast<size_t>(a)]);
    for (int k = 0; k < 4; ++k)
      acc = acc - bracket_coeff[static_cast<size_t>(a)][static_cast<size_t>(b)]
                               [static_cast<size_t>(k)] *
                      sigma[static_cast<size_t>(k)];
    return acc;
  };

  SpinCurvatureReport rep;
  rep.exact = true;
  rep.basic = true;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          ScalarField acc = d_of(spin.plus[static_cast<size_t>(i)][static_cast<size_t>(j)], a, b);
          for (int k = 0; k < 2; ++k) {
            const FrameOneForm& wik = spin.plus[static_cast<size_t>(i)][static_cast<size_t>(k)];
            const FrameOneForm& wkj = spin.plus[static_cast<size_t>(k)][static_cast<size_t>(j)];
            acc = acc + wik[static_cast<size_t>(a)] * wkj[static_cast<size_t>(b)] -
                  wik[static_cast<size_t>(b)] * wkj[static_cast<size_t>(a)];
          }
          rep.values[static_cast<size_t>(i)][static_cast<size_t>(j)][static_cast<size_t>(a)]
                    [static_cast<size_t>(b)] = acc;
        }

  // Interior products with the vertical directions p0 (frame 2), p1 (frame 3).
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 2; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          const ScalarField& f = rep.values[static_cast<size_t>(i)][static_cast<size_t>(j)]
                                           [static_cast<size_t>(a)][static_cast<size_t>(b)];
          bool zero_exact = f.is_polynomial() && f.poly().is_zero();
          if (!zero_exact) {
            rep.exact = false;
            rep.max_vertical_residual = std::max(rep.max_vertical_residual,
                                                 f.max_abs_on_probes(probes));
          }
          rep.basic = rep.basic && f.is_identically_zero(tolerance, probes);
        }
  return rep;
}

}  // namespace nsdt
