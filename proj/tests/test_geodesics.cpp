#include <doctest.h>

#include <cmath>
#include <random>

#include "nsdt/geodesics.hpp"
#include "nsdt/metric.hpp"
#include "test_util.hpp"

using namespace nsdt;

TEST_CASE("flat chart metric traces straight open lines") {
  NeutralMetric flat = NeutralMetric::special_form(ScalarField::zero(), ScalarField::zero(),
                                                   ScalarField::zero());
  GeodesicState init;
  init.x = ChartPoint{{0, 0, 0, 0}};
  init.v = {1, 0, 1, 0};  // g(v,v) = 2 g02 = 0
  TracerConfig cfg;
  cfg.step = 1e-2;
  cfg.max_steps = 2000;
  auto path = trace_geodesic(flat, init, cfg);
  CHECK(path.max_null_defect < 1e-12);
  const auto& last = path.states.back();
  CHECK(last.x[0] == doctest::Approx(last.t));
  CHECK(last.x[2] == doctest::Approx(last.t));
  CHECK_FALSE(detect_closure(path, 1e-2).closed);
}

TEST_CASE("product sphere: equal-speed null geodesics close at 2 pi") {
  NeutralMetric m = NeutralMetric::product_sphere();
  GeodesicState init;
  init.x = ChartPoint{{M_PI / 2, 0.0, M_PI / 2, 0.0}};
  init.v = {0.3, 1.1, -0.6, 0.97};
  // Normalize each factor to unit speed: null and 2-pi periodic.
  for (int f = 0; f < 2; ++f) {
    double s1 = std::sin(init.x[2 * f]);
    double e = std::sqrt(init.v[static_cast<size_t>(2 * f)] * init.v[static_cast<size_t>(2 * f)] +
                         s1 * s1 * init.v[static_cast<size_t>(2 * f + 1)] *
                             init.v[static_cast<size_t>(2 * f + 1)]);
    init.v[static_cast<size_t>(2 * f)] /= e;
    init.v[static_cast<size_t>(2 * f + 1)] /= e;
  }
  TracerConfig cfg;
  auto path = trace_geodesic(m, init, cfg);
  CHECK(path.max_null_defect < 1e-8);
  CHECK(path.energy_drift[0] < 1e-9);
  CHECK(path.energy_drift[1] < 1e-9);
  auto verdict = detect_closure(path, 1e-2);
  CHECK(verdict.closed);
  CHECK(std::abs(verdict.period - 2 * M_PI) < 1e-4);
}

TEST_CASE("product sphere: chart rotation handles pole crossings") {
  NeutralMetric m = NeutralMetric::product_sphere();
  GeodesicState init;
  init.x = ChartPoint{{M_PI / 2, 0.0, M_PI / 2, 0.0}};
  init.v = {1.0, 0.0, 1.0, 0.0};  // meridians, straight through both poles
  TracerConfig cfg;
  auto path = trace_geodesic(m, init, cfg);
  CHECK(path.max_null_defect < 1e-8);
  auto verdict = detect_closure(path, 1e-2);
  CHECK(verdict.closed);
  CHECK(std::abs(verdict.period - 2 * M_PI) < 1e-4);
}

TEST_CASE("non-null initial data conserves its defect") {
  NeutralMetric m = NeutralMetric::product_sphere();
  GeodesicState init;
  init.x = ChartPoint{{M_PI / 2, 0.0, M_PI / 2, 0.0}};
  init.v = {1.0, 0.0, 0.5, 0.0};  // g(v,v) = 1 - 0.25
  TracerConfig cfg;
  cfg.max_steps = 5000;
  auto path = trace_geodesic(m, init, cfg);
  CHECK(path.max_null_defect == doctest::Approx(0.75).epsilon(1e-6));
  for (double d : path.defects) CHECK(d == doctest::Approx(0.75).epsilon(1e-6));
}

TEST_CASE("closure sampling over random null initial conditions") {
  NeutralMetric m = NeutralMetric::product_sphere();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> th(0.6, M_PI - 0.6), ph(-M_PI, M_PI),
      comp(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    GeodesicState init;
    init.x = ChartPoint{{th(rng), ph(rng), th(rng), ph(rng)}};
    init.v = {comp(rng), comp(rng), comp(rng), comp(rng)};
    for (int f = 0; f < 2; ++f) {
      double s = std::sin(init.x[2 * f]);
      double e = std::sqrt(init.v[static_cast<size_t>(2 * f)] * init.v[static_cast<size_t>(2 * f)] +
                           s * s * init.v[static_cast<size_t>(2 * f + 1)] *
                               init.v[static_cast<size_t>(2 * f + 1)]);
      if (e < 0.2) {
        init.v[static_cast<size_t>(2 * f)] += 0.5;
        e = std::sqrt(init.v[static_cast<size_t>(2 * f)] * init.v[static_cast<size_t>(2 * f)] +
                      s * s * init.v[static_cast<size_t>(2 * f + 1)] *
                          init.v[static_cast<size_t>(2 * f + 1)]);
      }
      init.v[static_cast<size_t>(2 * f)] /= e;
      init.v[static_cast<size_t>(2 * f + 1)] /= e;
    }
    auto path = trace_geodesic(m, init, TracerConfig{});
    auto verdict = detect_closure(path, 1e-2);
    CHECK(verdict.closed);
    CHECK(std::abs(verdict.period - 2 * M_PI) < 1e-4);
    CHECK(path.max_null_defect < 1e-7);
  }
}

TEST_CASE("beta surface pairs intersect in exactly two points") {
  auto rep = sample_beta_intersections(100, 7);
  int counted = 0;
  for (const auto& [k, n] : rep.histogram) {
    CHECK(k == 2);
    counted += n;
  }
  CHECK(counted + rep.degenerate_skips == 100);
  CHECK(counted >= 99);  // random pairs are almost never degenerate
}

TEST_CASE("beta tangent planes classify as beta planes") {
  NeutralMetric m = NeutralMetric::product_sphere();
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int classified = 0;
  for (int trial = 0; trial < 20 && classified < 8; ++trial) {
    Mat3 rot = random_rotation(rng);
    Mat3 graph = mat3_mul(rot, Mat3{Vec3{-1, 0, 0}, Vec3{0, -1, 0}, Vec3{0, 0, -1}});
    Vec3 x{u(rng), u(rng), u(rng)};
    if (norm3(x) < 0.3) continue;
    try {
      auto plane = beta_tangent_plane(graph, x);
      CHECK(classify_null_plane(plane.u, plane.w, m, plane.point) == PlaneClass::Beta);
      ++classified;
    } catch (const ChartSingularity&) {
      continue;  // resampled at a pole; skip
    }
  }
  CHECK(classified >= 8);
}

TEST_CASE("round-sphere projective spray closes after one great circle") {
  auto conn = round_sphere_leaf_connection();
  TracerConfig cfg;
  cfg.max_steps = 20000;
  for (double zeta0 : {0.0, 0.7, -1.4, 5.0}) {
    auto res = trace_sphere_spray(conn, M_PI / 2, 0.0, zeta0, cfg);
    auto verdict = detect_spray_closure(res, 1e-2);
    CHECK(verdict.closed);
    CHECK(std::abs(verdict.period - 2 * M_PI) < 1e-3);
  }
}
