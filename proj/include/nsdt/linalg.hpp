#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nsdt/errors.hpp"
#include "nsdt/fields.hpp"

namespace nsdt {

using FieldVec4 = std::array<ScalarField, 4>;
using FieldMat4 = std::array<FieldVec4, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec4 = std::array<double, 4>;

inline FieldMat4 zero_field_mat4() { return FieldMat4{}; }

namespace detail {

inline ScalarField field_det3(const FieldMat4& m, const std::array<int, 3>& rows,
                              const std::array<int, 3>& cols) {
  auto a = [&](int i, int j) -> const ScalarField& {
    return m[static_cast<size_t>(rows[static_cast<size_t>(i)])]
            [static_cast<size_t>(cols[static_cast<size_t>(j)])];
  };
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

inline std::array<int, 3> complement(int k) {
  std::array<int, 3> r{};
  int n = 0;
  for (int i = 0; i < 4; ++i)
    if (i != k) r[static_cast<size_t>(n++)] = i;
  return r;
}

}  // namespace detail

inline ScalarField field_det4(const FieldMat4& m) {
  ScalarField det = ScalarField::zero();
  for (int j = 0; j < 4; ++j) {
    auto minor = detail::field_det3(m, detail::complement(0), detail::complement(j));
    ScalarField term = m[0][static_cast<size_t>(j)] * minor;
    det = (j % 2 == 0) ? det + term : det - term;
  }
  return det;
}

// Inverse of a field matrix whose determinant is a nonzero constant
// (both metric and tetrad matrices used here have det == 1, so the
// adjugate divided by the constant stays polynomial).
inline FieldMat4 field_inverse4(const FieldMat4& m) {
  ScalarField det = field_det4(m);
  if (!det.is_polynomial())
    throw SingularMetric("symbolic inverse requires a polynomial matrix");
  const Polynomial& dp = det.poly();
  if (dp.is_zero()) throw SingularMetric("matrix determinant is identically zero");
  if (dp.degree() != 0)
    throw SingularMetric("symbolic inverse requires a constant determinant");
  Rational d = dp.terms().begin()->second;
  FieldMat4 inv;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      auto cof = detail::field_det3(m, detail::complement(j), detail::complement(i));
      Rational sign = ((i + j) % 2 == 0) ? Rational(1) : Rational(-1);
      inv[static_cast<size_t>(i)][static_cast<size_t>(j)] = cof.scaled(sign / d);
    }
  return inv;
}

inline Mat4 evaluate_mat4(const FieldMat4& m, const ChartPoint& p) {
  Mat4 r{};
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) r[i][j] = m[i][j].evaluate(p);
  return r;
}

inline Mat4 invert_mat4(const Mat4& a_in) {
  Mat4 a = a_in;
  Mat4 inv{};
  for (int i = 0; i < 4; ++i) inv[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1.0;
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[static_cast<size_t>(r)][static_cast<size_t>(col)]) >
          std::abs(a[static_cast<size_t>(piv)][static_cast<size_t>(col)]))
        piv = r;
    if (std::abs(a[static_cast<size_t>(piv)][static_cast<size_t>(col)]) < 1e-14)
      throw SingularMetric("numerically singular 4x4 matrix");
    std::swap(a[static_cast<size_t>(piv)], a[static_cast<size_t>(col)]);
    std::swap(inv[static_cast<size_t>(piv)], inv[static_cast<size_t>(col)]);
    double d = a[static_cast<size_t>(col)][static_cast<size_t>(col)];
    for (int j = 0; j < 4; ++j) {
      a[static_cast<size_t>(col)][static_cast<size_t>(j)] /= d;
      inv[static_cast<size_t>(col)][static_cast<size_t>(j)] /= d;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      double f = a[static_cast<size_t>(r)][static_cast<size_t>(col)];
      if (f == 0.0) continue;
      for (int j = 0; j < 4; ++j) {
        a[static_cast<size_t>(r)][static_cast<size_t>(j)] -=
            f * a[static_cast<size_t>(col)][static_cast<size_t>(j)];
        inv[static_cast<size_t>(r)][static_cast<size_t>(j)] -=
            f * inv[static_cast<size_t>(col)][static_cast<size_t>(j)];
      }
    }
  }
  return inv;
}

// Eigenvalues of a symmetric 4x4 matrix by cyclic Jacobi rotations.
inline std::array<double, 4> symmetric_eigenvalues4(Mat4 a) {
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (size_t i = 0; i < 4; ++i)
      for (size_t j = i + 1; j < 4; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-28) break;
    for (size_t p = 0; p < 4; ++p)
      for (size_t q = p + 1; q < 4; ++q) {
        if (std::abs(a[p][q]) < 1e-15) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (size_t k = 0; k < 4; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < 4; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  return {a[0][0], a[1][1], a[2][2], a[3][3]};
}

// Dense rational matrix machinery for the coefficient-space SD solver.
using RationalMatrix = std::vector<std::vector<Rational>>;

// Null space basis of A (rows = constraints) by exact Gauss-Jordan.
inline std::vector<std::vector<Rational>> rational_null_space(RationalMatrix a, size_t cols) {
  size_t rows = a.size();
  std::vector<size_t> pivot_col;
  size_t r = 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    size_t piv = r;
    while (piv < rows && a[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[r]);
    Rational d = a[r][c];
    for (size_t j = 0; j < cols; ++j) a[r][j] /= d;
    for (size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c] == 0) continue;
      Rational f = a[i][c];
      for (size_t j = 0; j < cols; ++j) a[i][j] -= f * a[r][j];
    }
    pivot_col.push_back(c);
    ++r;
  }
  std::vector<bool> is_pivot(cols, false);
  for (size_t c : pivot_col) is_pivot[c] = true;
  std::vector<std::vector<Rational>> basis;
  for (size_t free_c = 0; free_c < cols; ++free_c) {
    if (is_pivot[free_c]) continue;
    std::vector<Rational> v(cols, Rational(0));
    v[free_c] = 1;
    for (size_t i = 0; i < pivot_col.size(); ++i) v[pivot_col[i]] = -a[i][free_c];
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace nsdt
