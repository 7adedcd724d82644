#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "nsdt/connection.hpp"
#include "nsdt/errors.hpp"
#include "nsdt/fields.hpp"
#include "nsdt/linalg.hpp"
#include "nsdt/metric.hpp"
#include "nsdt/twistor.hpp"

namespace nsdt {

// ---------------------------------------------------------------------------
// Small fixed-size 3D helpers (sphere embeddings, chart rotations)

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

inline Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }
inline Vec3 scale3(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline Vec3 normalize3(const Vec3& a) {
  double n = norm3(a);
  return scale3(a, 1.0 / n);
}

inline Vec3 mat3_vec(const Mat3& m, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[static_cast<size_t>(i)] += m[static_cast<size_t>(i)][static_cast<size_t>(j)] * v[static_cast<size_t>(j)];
  return r;
}

inline Mat3 mat3_mul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        r[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
            a[static_cast<size_t>(i)][static_cast<size_t>(k)] * b[static_cast<size_t>(k)][static_cast<size_t>(j)];
  return r;
}

inline Mat3 mat3_transpose(const Mat3& a) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[static_cast<size_t>(i)][static_cast<size_t>(j)] = a[static_cast<size_t>(j)][static_cast<size_t>(i)];
  return r;
}

inline Mat3 mat3_identity() { return Mat3{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}}; }

// Columns as an orthonormal frame.
inline Mat3 mat3_from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i) {
    r[static_cast<size_t>(i)][0] = c0[static_cast<size_t>(i)];
    r[static_cast<size_t>(i)][1] = c1[static_cast<size_t>(i)];
    r[static_cast<size_t>(i)][2] = c2[static_cast<size_t>(i)];
  }
  return r;
}

// Uniform random rotation from a normalized Gaussian quaternion.
inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
  double s = std::sqrt(w * w + x * x + y * y + z * z);
  w /= s;
  x /= s;
  y /= s;
  z /= s;
  Mat3 r;
  r[0] = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)};
  r[1] = {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)};
  r[2] = {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)};
  return r;
}

inline Vec3 sphere_embed(double th, double ph) {
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

inline Vec3 sphere_embed_velocity(double th, double ph, double vth, double vph) {
  double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
  return {vth * ct * cp - vph * st * sp, vth * ct * sp + vph * st * cp, -vth * st};
}

// ---------------------------------------------------------------------------
// Geodesic tracing

struct GeodesicState {
  double t = 0.0;
  ChartPoint x{};
  std::array<double, 4> v{};
};

struct TracerConfig {
  double step = 1e-3;
  size_t max_steps = 100000;
  double closure_tolerance = 1e-2;  // raw signature distance for a closure candidate
  bool chart_rotation = true;       // product-sphere pole policy
};

// Path with chart-independent closure signatures. For the product-sphere
// backend the signature is (p1, u1, p2, u2) in R^3 x R^3 per factor
// (position + unit velocity); for chart metrics it is (x, v/|v|), zero
// padded. Signature distance is immune to chart seams and rotations.
struct GeodesicPath {
  std::vector<GeodesicState> states;
  std::vector<std::array<double, 12>> signatures;
  std::vector<double> defects;  // |g(v,v)| pointwise
  double max_null_defect = 0.0;
  std::array<double, 2> energy_drift{0.0, 0.0};  // per factor, product backend only
};

inline double null_defect(const GeodesicPath& path) { return path.max_null_defect; }

namespace detail {

// Geodesic right-hand side from Christoffel values at a point.
inline std::array<double, 8> geodesic_rhs(const std::array<std::array<std::array<double, 4>, 4>, 4>& gamma,
                                          const std::array<double, 8>& s) {
  std::array<double, 8> d{};
  for (int i = 0; i < 4; ++i) d[static_cast<size_t>(i)] = s[static_cast<size_t>(i) + 4];
  for (int k = 0; k < 4; ++k) {
    double acc = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        acc -= gamma[static_cast<size_t>(k)][static_cast<size_t>(i)][static_cast<size_t>(j)] *
               s[static_cast<size_t>(i) + 4] * s[static_cast<size_t>(j) + 4];
    d[static_cast<size_t>(k) + 4] = acc;
  }
  return d;
}

// Christoffels at a point by central differences of the metric.
inline std::array<std::array<std::array<double, 4>, 4>, 4> numeric_christoffel_at(
    const NeutralMetric& m, const ChartPoint& x, double h = 1e-5) {
  std::array<Mat4, 4> dg{};
  for (int a = 0; a < 4; ++a) {
    ChartPoint xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    Mat4 gp = m.gram(xp), gm = m.gram(xm);
    for (size_t i = 0; i < 4; ++i)
      for (size_t j = 0; j < 4; ++j) dg[static_cast<size_t>(a)][i][j] = (gp[i][j] - gm[i][j]) / (2 * h);
  }
  Mat4 ginv = invert_mat4(m.gram(x));
  std::array<std::array<std::array<double, 4>, 4>, 4> gamma{};
  for (size_t k = 0; k < 4; ++k)
    for (size_t i = 0; i < 4; ++i)
      for (size_t j = 0; j < 4; ++j) {
        double acc = 0.0;
        for (size_t l = 0; l < 4; ++l)
          acc += 0.5 * ginv[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]);
        gamma[k][i][j] = acc;
      }
  return gamma;
}

}  // namespace detail

// Single-sphere factor tracked with its chart rotation: world = rot * chart.
struct SphereFactor {
  double th, ph, vth, vph;
  Mat3 rot = mat3_identity();

  Vec3 world_position() const { return mat3_vec(rot, sphere_embed(th, ph)); }
  Vec3 world_velocity() const { return mat3_vec(rot, sphere_embed_velocity(th, ph, vth, vph)); }
  double energy() const {
    double st = std::sin(th);
    return vth * vth + st * st * vph * vph;
  }

  // Re-chart so the current point sits on the new chart's equator at ph=0
  // with velocity along +phi. Isometric, so the energy is untouched.
  void rotate_chart() {
    Vec3 p = world_position();
    Vec3 v = world_velocity();
    double speed = norm3(v);
    Vec3 c0 = normalize3(p);
    Vec3 c1;
    if (speed > 1e-14) {
      Vec3 vproj = {v[0] - dot3(v, c0) * c0[0], v[1] - dot3(v, c0) * c0[1],
                    v[2] - dot3(v, c0) * c0[2]};
      c1 = normalize3(vproj);
    } else {
      // Degenerate (stationary factor): any tangent direction works.
      Vec3 seed = std::abs(c0[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
      c1 = normalize3(cross3(c0, seed));
    }
    Vec3 c2 = cross3(c0, c1);
    rot = mat3_from_columns(c0, c1, c2);
    th = M_PI / 2;
    ph = 0.0;
    vth = 0.0;
    vph = speed;
  }
};

namespace detail {

inline std::array<double, 4> sphere_factor_rhs(const std::array<double, 4>& s) {
  double th = s[0], vth = s[2], vph = s[3];
  double st = std::sin(th), ct = std::cos(th);
  // theta'' = sin th cos th (phi')^2 ; phi'' = -2 cot th th' phi'
  return {vth, vph, st * ct * vph * vph, -2.0 * (ct / st) * vth * vph};
}

inline void rk4_sphere_step(SphereFactor& f, double h) {
  std::array<double, 4> s{f.th, f.ph, f.vth, f.vph};
  auto k1 = sphere_factor_rhs(s);
  std::array<double, 4> s2, s3, s4;
  for (int i = 0; i < 4; ++i) s2[static_cast<size_t>(i)] = s[static_cast<size_t>(i)] + 0.5 * h * k1[static_cast<size_t>(i)];
  auto k2 = sphere_factor_rhs(s2);
  for (int i = 0; i < 4; ++i) s3[static_cast<size_t>(i)] = s[static_cast<size_t>(i)] + 0.5 * h * k2[static_cast<size_t>(i)];
  auto k3 = sphere_factor_rhs(s3);
  for (int i = 0; i < 4; ++i) s4[static_cast<size_t>(i)] = s[static_cast<size_t>(i)] + h * k3[static_cast<size_t>(i)];
  auto k4 = sphere_factor_rhs(s4);
  f.th = s[0] + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
  f.ph = s[1] + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
  f.vth = s[2] + h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
  f.vph = s[3] + h / 6.0 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]);
}

}  // namespace detail

// Chart order for the product backend: x = (th1, ph1, th2, ph2).
inline GeodesicPath trace_product_sphere(const GeodesicState& init, const TracerConfig& cfg) {
  GeodesicPath path;
  SphereFactor f1{init.x[0], init.x[1], init.v[0], init.v[1], mat3_identity()};
  SphereFactor f2{init.x[2], init.x[3], init.v[2], init.v[3], mat3_identity()};
  const double rotate_band = 0.3;  // re-chart when sin th drops below this
  const double e1_0 = f1.energy(), e2_0 = f2.energy();

  auto record = [&](double t) {
    GeodesicState s;
    s.t = t;
    s.x = ChartPoint{};
    s.x[0] = f1.th;
    s.x[1] = f1.ph;
    s.x[2] = f2.th;
    s.x[3] = f2.ph;
    s.v = {f1.vth, f1.vph, f2.vth, f2.vph};
    path.states.push_back(s);
    std::array<double, 12> sig{};
    Vec3 p1 = f1.world_position(), p2 = f2.world_position();
    Vec3 u1 = f1.world_velocity(), u2 = f2.world_velocity();
    double n1 = norm3(u1), n2 = norm3(u2);
    if (n1 > 1e-14) u1 = scale3(u1, 1.0 / n1);
    if (n2 > 1e-14) u2 = scale3(u2, 1.0 / n2);
    for (int i = 0; i < 3; ++i) {
      sig[static_cast<size_t>(i)] = p1[static_cast<size_t>(i)];
      sig[static_cast<size_t>(i) + 3] = u1[static_cast<size_t>(i)];
      sig[static_cast<size_t>(i) + 6] = p2[static_cast<size_t>(i)];
      sig[static_cast<size_t>(i) + 9] = u2[static_cast<size_t>(i)];
    }
    path.signatures.push_back(sig);
    double defect = std::abs(f1.energy() - f2.energy());
    path.defects.push_back(defect);
    path.max_null_defect = std::max(path.max_null_defect, defect);
    path.energy_drift[0] = std::max(path.energy_drift[0], std::abs(f1.energy() - e1_0));
    path.energy_drift[1] = std::max(path.energy_drift[1], std::abs(f2.energy() - e2_0));
  };

  double t = init.t;
  record(t);
  for (size_t step = 0; step < cfg.max_steps; ++step) {
    for (SphereFactor* f : {&f1, &f2}) {
      if (std::abs(std::sin(f->th)) < rotate_band) {
        if (!cfg.chart_rotation)
          throw ChartSingularity("pole proximity with chart rotation disabled");
        f->rotate_chart();
      }
    }
    detail::rk4_sphere_step(f1, cfg.step);
    detail::rk4_sphere_step(f2, cfg.step);
    t += cfg.step;
    record(t);
  }
  return path;
}

// RK4 on the chart geodesic equation. Polynomial metrics with constant
// determinant use exact symbolic Christoffels evaluated pointwise;
// anything else differentiates the Gram matrix numerically.
inline GeodesicPath trace_chart_metric(const NeutralMetric& m, const GeodesicState& init,
                                       const TracerConfig& cfg) {
  bool symbolic = true;
  Christoffels gamma_sym;
  try {
    gamma_sym = christoffel(m);
  } catch (const SingularMetric&) {
    symbolic = false;
  }

  auto gamma_at = [&](const ChartPoint& x) {
    std::array<std::array<std::array<double, 4>, 4>, 4> g{};
    if (symbolic) {
      for (size_t k = 0; k < 4; ++k)
        for (size_t i = 0; i < 4; ++i)
          for (size_t j = 0; j < 4; ++j) g[k][i][j] = gamma_sym[k][i][j].evaluate(x);
      return g;
    }
    return detail::numeric_christoffel_at(m, x);
  };

  GeodesicPath path;
  std::array<double, 8> s{};
  for (size_t i = 0; i < 4; ++i) {
    s[i] = init.x[i];
    s[i + 4] = init.v[i];
  }
  auto record = [&](double t) {
    GeodesicState st;
    st.t = t;
    for (size_t i = 0; i < 4; ++i) {
      st.x[i] = s[i];
      st.v[i] = s[i + 4];
    }
    path.states.push_back(st);
    Mat4 g = m.gram(st.x);
    double q = 0.0, vn = 0.0;
    for (size_t i = 0; i < 4; ++i) {
      vn += st.v[i] * st.v[i];
      for (size_t j = 0; j < 4; ++j) q += g[i][j] * st.v[i] * st.v[j];
    }
    double defect = std::abs(q);
    path.defects.push_back(defect);
    path.max_null_defect = std::max(path.max_null_defect, defect);
    std::array<double, 12> sig{};
    double inv = vn > 1e-28 ? 1.0 / std::sqrt(vn) : 0.0;
    for (size_t i = 0; i < 4; ++i) {
      sig[i] = st.x[i];
      sig[i + 4] = st.v[i] * inv;
    }
    path.signatures.push_back(sig);
  };

  double t = init.t;
  record(t);
  for (size_t step = 0; step < cfg.max_steps; ++step) {
    auto rhs = [&](const std::array<double, 8>& y) {
      ChartPoint x;
      for (size_t i = 0; i < 4; ++i) x[i] = y[i];
      return detail::geodesic_rhs(gamma_at(x), y);
    };
    auto k1 = rhs(s);
    std::array<double, 8> s2, s3, s4;
    for (size_t i = 0; i < 8; ++i) s2[i] = s[i] + 0.5 * cfg.step * k1[i];
    auto k2 = rhs(s2);
    for (size_t i = 0; i < 8; ++i) s3[i] = s[i] + 0.5 * cfg.step * k2[i];
    auto k3 = rhs(s3);
    for (size_t i = 0; i < 8; ++i) s4[i] = s[i] + cfg.step * k3[i];
    auto k4 = rhs(s4);
    for (size_t i = 0; i < 8; ++i)
      s[i] += cfg.step / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    t += cfg.step;
    record(t);
  }
  return path;
}

inline GeodesicPath trace_geodesic(const NeutralMetric& m, const GeodesicState& init,
                                   const TracerConfig& cfg) {
  if (cfg.step <= 0) throw StepLimitExceeded("step size must be positive");
  if (m.backend() == MetricBackend::ProductSphere) return trace_product_sphere(init, cfg);
  return trace_chart_metric(m, init, cfg);
}

// ---------------------------------------------------------------------------
// Closure detection

struct ClosureVerdict {
  bool closed = false;
  double period = 0.0;
  double min_distance = std::numeric_limits<double>::infinity();
};

// First return of the closure signature to its initial value: the first
// local minimum of the signature distance below tolerance, after the
// trajectory has moved away. The period is refined by a parabola fit on
// the squared distance (sub-step accuracy).
inline ClosureVerdict detect_closure(const GeodesicPath& path, double tolerance) {
  ClosureVerdict verdict;
  size_t n = path.signatures.size();
  if (n < 3) return verdict;
  const auto& s0 = path.signatures[0];
  std::vector<double> d(n);
  for (size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (size_t i = 0; i < 12; ++i) {
      double diff = path.signatures[k][i] - s0[i];
      acc += diff * diff;
    }
    d[k] = std::sqrt(acc);
  }
  bool departed = false;
  for (size_t k = 1; k + 1 < n; ++k) {
    if (d[k] > 10 * tolerance) departed = true;
    if (!departed) continue;
    if (d[k] <= d[k - 1] && d[k] <= d[k + 1] && d[k] < tolerance) {
      double t0 = path.states[k - 1].t, t1 = path.states[k].t, t2 = path.states[k + 1].t;
      double y0 = d[k - 1] * d[k - 1], y1 = d[k] * d[k], y2 = d[k + 1] * d[k + 1];
      double denom = (y0 - 2 * y1 + y2);
      double tstar = t1;
      if (std::abs(denom) > 1e-300) tstar = t1 + 0.5 * (t2 - t0) / 2 * (y0 - y2) / denom;
      verdict.closed = true;
      verdict.period = tstar - path.states[0].t;
      verdict.min_distance = d[k];
      return verdict;
    }
    verdict.min_distance = std::min(verdict.min_distance, d[k]);
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Beta-surface intersections on the standard model

// A beta surface of the product structure is the graph {(x, M x)} of an
// orientation-reversing isometry M in O(3) \ SO(3).
struct BetaPairSample {
  Mat3 m1, m2;
  int intersections = 0;
  bool degenerate = false;
};

struct BetaIntersectionReport {
  std::map<int, int> histogram;  // intersection count -> number of pairs
  int degenerate_skips = 0;
  std::vector<BetaPairSample> samples;
};

// Intersections of two graphs are fixed points of R = m2^T m1 (a
// rotation); for R != I these are the two antipodal axis points.
inline int count_graph_intersections(const Mat3& m1, const Mat3& m2, bool& degenerate) {
  Mat3 r = mat3_mul(mat3_transpose(m2), m1);
  double off = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      off += std::abs(r[static_cast<size_t>(i)][static_cast<size_t>(j)] - (i == j ? 1.0 : 0.0));
  if (off < 1e-9) {
    degenerate = true;  // identical surfaces: intersection is the whole sphere
    return 0;
  }
  degenerate = false;
  // Axis from the skew part; near angle pi fall back to columns of R + I.
  Vec3 axis = {r[2][1] - r[1][2], r[0][2] - r[2][0], r[1][0] - r[0][1]};
  if (norm3(axis) < 1e-8) {
    double best = -1.0;
    for (int c = 0; c < 3; ++c) {
      Vec3 col = {r[0][static_cast<size_t>(c)] + (c == 0), r[1][static_cast<size_t>(c)] + (c == 1),
                  r[2][static_cast<size_t>(c)] + (c == 2)};
      if (norm3(col) > best) {
        best = norm3(col);
        axis = col;
      }
    }
  }
  axis = normalize3(axis);
  int count = 0;
  for (double sign : {1.0, -1.0}) {
    Vec3 x = scale3(axis, sign);
    Vec3 rx = mat3_vec(r, x);
    Vec3 diff = {rx[0] - x[0], rx[1] - x[1], rx[2] - x[2]};
    if (norm3(diff) < 1e-9) ++count;
  }
  return count;
}

inline BetaIntersectionReport sample_beta_intersections(int n, uint64_t seed) {
  BetaIntersectionReport rep;
  std::mt19937_64 rng(seed);
  const Mat3 antipodal{Vec3{-1, 0, 0}, Vec3{0, -1, 0}, Vec3{0, 0, -1}};  // det = -1
  for (int k = 0; k < n; ++k) {
    BetaPairSample s;
    s.m1 = mat3_mul(random_rotation(rng), antipodal);
    s.m2 = mat3_mul(random_rotation(rng), antipodal);
    s.intersections = count_graph_intersections(s.m1, s.m2, s.degenerate);
    if (s.degenerate)
      ++rep.degenerate_skips;
    else
      ++rep.histogram[s.intersections];
    rep.samples.push_back(s);
  }
  return rep;
}

// Chart data of the beta surface {(x, M x)} at world point x: the chart
// point (th1,ph1,th2,ph2) and two tangent 4-vectors spanning the surface.
// Singular when either factor point is at a chart pole.
struct BetaTangentPlane {
  ChartPoint point;
  std::array<double, 4> u, w;
};

inline std::array<double, 2> world_to_sphere_angles(const Vec3& p) {
  return {std::acos(std::clamp(p[2], -1.0, 1.0)), std::atan2(p[1], p[0])};
}

inline std::array<double, 2> world_to_chart_tangent(const Vec3& p, const Vec3& t) {
  double st = std::sqrt(std::max(1e-300, 1.0 - p[2] * p[2]));
  double dth = -t[2] / st;
  double dph = (p[0] * t[1] - p[1] * t[0]) / (p[0] * p[0] + p[1] * p[1]);
  return {dth, dph};
}

inline BetaTangentPlane beta_tangent_plane(const Mat3& m, const Vec3& x_in) {
  Vec3 x = normalize3(x_in);
  Vec3 y = mat3_vec(m, x);
  if (std::abs(x[2]) > 0.99 || std::abs(y[2]) > 0.99)
    throw ChartSingularity("beta tangent plane sampled at a chart pole");
  Vec3 seed = std::abs(x[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 u1 = normalize3(cross3(x, seed));
  Vec3 u2 = cross3(x, u1);
  BetaTangentPlane plane;
  auto a1 = world_to_sphere_angles(x);
  auto a2 = world_to_sphere_angles(y);
  plane.point = ChartPoint{};
  plane.point[0] = a1[0];
  plane.point[1] = a1[1];
  plane.point[2] = a2[0];
  plane.point[3] = a2[1];
  auto fill = [&](const Vec3& tx, std::array<double, 4>& out) {
    Vec3 ty = mat3_vec(m, tx);
    auto c1 = world_to_chart_tangent(x, tx);
    auto c2 = world_to_chart_tangent(y, ty);
    out = {c1[0], c1[1], c2[0], c2[1]};
  };
  fill(u1, plane.u);
  fill(u2, plane.w);
  return plane;
}

// ---------------------------------------------------------------------------
// Projective-spray tracing on the leaf space (2-sphere leaf chart)

// Leaf connection of the round sphere in the (theta, phi) chart:
// Gamma^0_{11} = -sin th cos th, Gamma^1_{01} = Gamma^1_{10} = cot th.
inline ProjectiveConnection2D round_sphere_leaf_connection(double margin = 1e-8) {
  auto guard = [margin](double th) {
    if (std::abs(std::sin(th)) < margin)
      throw ChartSingularity("round-sphere connection evaluated at a pole");
  };
  ProjectiveConnection2D c;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) c.w[static_cast<size_t>(i)][static_cast<size_t>(j)][static_cast<size_t>(k)] = ScalarField::zero();
  // w^i_j(d_k) = Gamma^i_{jk}
  c.w[0][1][1] = ScalarField([guard](const ChartPoint& p) {
    guard(p[0]);
    return -std::sin(p[0]) * std::cos(p[0]);
  });
  c.w[1][0][1] = ScalarField([guard](const ChartPoint& p) {
    guard(p[0]);
    return std::cos(p[0]) / std::sin(p[0]);
  });
  c.w[1][1][0] = c.w[1][0][1];
  return c;
}

struct SprayPathPoint {
  double arc = 0.0;  // accumulated round arc length (parameter-free closure scale)
  double y0 = 0.0, y1 = 0.0, zeta = 0.0;
  bool inverted = false;  // zeta is the inverted fiber coordinate 1/zeta
};

struct SprayTracerResult {
  std::vector<SprayPathPoint> points;
  std::vector<std::array<double, 12>> signatures;  // embedded (position, direction), padded
  std::vector<double> arcs;
};

// Integrates the projective spray on P(TS^2) over the (theta,phi) leaf
// chart, switching the fiber chart when |zeta| leaves [-2,2]. Closure is
// judged on the embedded (position, unit direction) signature against
// arc length, so the non-affine spray parameter does not matter.
inline SprayTracerResult trace_sphere_spray(const ProjectiveConnection2D& conn, double th0,
                                            double ph0, double zeta0, const TracerConfig& cfg) {
  SprayTracerResult res;
  double y0 = th0, y1 = ph0, z = zeta0;
  bool inverted = false;
  // Orientation of the traversal relative to the chart parameter. The
  // inverted chart runs with dphi/ds = +1, which points backward along the
  // curve whenever zeta is negative at the flip; the sign keeps the tangent
  // continuous across chart switches.
  double orient = 1.0;
  if (std::abs(z) > 2.0) {
    z = 1.0 / z;
    inverted = true;
    if (z < 0.0) orient = -1.0;
  }
  double arc = 0.0;

  auto rhs = [&](double a, double b, double zz, bool inv) -> std::array<double, 3> {
    SprayState s{a, b, zz};
    auto v = inv ? projective_spray_inverted(conn, s) : projective_spray(conn, s);
    for (double& c : v) c *= orient;
    return v;
  };

  auto record = [&]() {
    res.points.push_back({arc, y0, y1, z, inverted});
    double dth, dph;
    if (!inverted) {
      dth = orient;
      dph = orient * z;
    } else {
      dth = orient * z;
      dph = orient;
    }
    Vec3 p = sphere_embed(y0, y1);
    Vec3 t = sphere_embed_velocity(y0, y1, dth, dph);
    double nt = norm3(t);
    if (nt > 1e-14) t = scale3(t, 1.0 / nt);
    std::array<double, 12> sig{};
    for (int i = 0; i < 3; ++i) {
      sig[static_cast<size_t>(i)] = p[static_cast<size_t>(i)];
      sig[static_cast<size_t>(i) + 3] = t[static_cast<size_t>(i)];
    }
    res.signatures.push_back(sig);
    res.arcs.push_back(arc);
  };

  record();
  for (size_t step = 0; step < cfg.max_steps; ++step) {
    // RK4 on (y0, y1, zeta) in the current fiber chart.
    std::array<double, 3> s{y0, y1, z};
    auto k1 = rhs(s[0], s[1], s[2], inverted);
    auto k2 = rhs(s[0] + 0.5 * cfg.step * k1[0], s[1] + 0.5 * cfg.step * k1[1],
                  s[2] + 0.5 * cfg.step * k1[2], inverted);
    auto k3 = rhs(s[0] + 0.5 * cfg.step * k2[0], s[1] + 0.5 * cfg.step * k2[1],
                  s[2] + 0.5 * cfg.step * k2[2], inverted);
    auto k4 = rhs(s[0] + cfg.step * k3[0], s[1] + cfg.step * k3[1], s[2] + cfg.step * k3[2],
                  inverted);
    double dy0 = cfg.step / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    double dy1 = cfg.step / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    double dz = cfg.step / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
    y0 += dy0;
    y1 += dy1;
    z += dz;
    double st = std::sin(y0);
    arc += std::sqrt(dy0 * dy0 + st * st * dy1 * dy1);
    if (std::abs(z) > 2.0) {
      z = 1.0 / z;
      inverted = !inverted;
      if (z < 0.0) orient = -orient;
    }
    record();
  }
  return res;
}

inline ClosureVerdict detect_spray_closure(const SprayTracerResult& res, double tolerance) {
  GeodesicPath fake;
  fake.signatures = res.signatures;
  fake.states.resize(res.arcs.size());
  for (size_t i = 0; i < res.arcs.size(); ++i) fake.states[i].t = res.arcs[i];
  return detect_closure(fake, tolerance);
}

}  // namespace nsdt
