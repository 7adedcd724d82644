#include <doctest.h>

#include <random>

#include "nsdt/connection.hpp"
#include "nsdt/metric.hpp"
#include "nsdt/tetrad.hpp"
#include "test_util.hpp"

using namespace nsdt;
using testutil::mono;

namespace {

ScalarField rand_field(std::mt19937_64& rng, int terms = 3, int max_expo = 2) {
  std::uniform_int_distribution<int> coeff(-3, 3), expo(0, max_expo);
  Polynomial poly;
  for (int t = 0; t < terms; ++t)
    poly.add_term(Rational(coeff(rng)),
                  {static_cast<unsigned>(expo(rng)), static_cast<unsigned>(expo(rng)),
                   static_cast<unsigned>(expo(rng)), static_cast<unsigned>(expo(rng))});
  return ScalarField(poly);
}

}  // namespace

TEST_CASE("christoffels: flat, symmetric, metric-compatible") {
  NeutralMetric flat = NeutralMetric::special_form(ScalarField::zero(), ScalarField::zero(),
                                                   ScalarField::zero());
  auto flat_gamma = christoffel(flat);
  for (const auto& plane : flat_gamma)
    for (const auto& row : plane)
      for (const auto& entry : row) CHECK(entry.is_identically_zero());

  testutil::WorkedExample ex;
  NeutralMetric m = build_special_form(ex.p, ex.q, ex.r);
  auto gamma = christoffel(m);
  // Torsion-free: Gamma^k_{ij} == Gamma^k_{ji}.
  for (size_t k = 0; k < 4; ++k)
    for (size_t i = 0; i < 4; ++i)
      for (size_t j = i + 1; j < 4; ++j)
        CHECK((gamma[k][i][j] - gamma[k][j][i]).is_identically_zero());
  // Metric compatibility: d_m g_ij = Gamma^l_{mi} g_lj + Gamma^l_{mj} g_il.
  for (size_t mm = 0; mm < 4; ++mm)
    for (size_t i = 0; i < 4; ++i)
      for (size_t j = 0; j < 4; ++j) {
        ScalarField res = m.g(static_cast<int>(i), static_cast<int>(j))
                              .derivative(static_cast<int>(mm));
        for (size_t l = 0; l < 4; ++l)
          res = res - gamma[l][mm][i] * m.g()[l][j] - gamma[l][mm][j] * m.g()[i][l];
        CHECK(res.is_identically_zero());
      }
}

TEST_CASE("connection form: flat is zero, pattern holds") {
  NeutralMetric flat = NeutralMetric::special_form(ScalarField::zero(), ScalarField::zero(),
                                                   ScalarField::zero());
  NullTetrad t = construct_foliation_tetrad(flat);
  auto w = connection_form_in_tetrad(flat, t);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) CHECK(w.value(i, j, k).is_identically_zero());
}

TEST_CASE("closed-form components match the Christoffel path exactly") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 4; ++trial) {
    ScalarField p = rand_field(rng), q = rand_field(rng), r = rand_field(rng);
    NeutralMetric m = NeutralMetric::special_form(p, q, r);
    NullTetrad t = construct_foliation_tetrad(m);
    auto path = extract_components(connection_form_in_tetrad(m, t));
    auto closed = special_form_components(p, q, r);
    for (size_t k = 0; k < 4; ++k) {
      CHECK((path.a[k] - closed.a[k]).is_identically_zero());
      CHECK((path.b[k] - closed.b[k]).is_identically_zero());
      CHECK((path.c[k] - closed.c[k]).is_identically_zero());
      CHECK((path.d[k] - closed.d[k]).is_identically_zero());
      CHECK((path.e[k] - closed.e[k]).is_identically_zero());
      CHECK((path.f[k] - closed.f[k]).is_identically_zero());
    }
  }
}

TEST_CASE("worked example component values") {
  testutil::WorkedExample ex;
  auto c = special_form_components(ex.p, ex.q, ex.r);
  ScalarField x2 = ScalarField::variable(2), x3 = ScalarField::variable(3);
  CHECK((c.a[0] - x2).is_identically_zero());   // 2a(e0) = -d3 p = 2 x2
  CHECK((c.b[1] - x2).is_identically_zero());   // 2b(e1) = -d3 q = 2 x2
  CHECK((c.c[0] + x3).is_identically_zero());   // 2c(e0) = d2 p = -2 x3
  CHECK((c.d[0] - x2).is_identically_zero());   // 2d(e0) = d2 r = 2 x2
  CHECK((c.a[1] + x3).is_identically_zero());
  CHECK((c.d[1] + x3).is_identically_zero());
  for (size_t k = 0; k < 4; ++k) CHECK(c.e[k].is_identically_zero());
  // Fiber-direction values all vanish.
  for (size_t k = 2; k < 4; ++k) {
    CHECK(c.a[k].is_identically_zero());
    CHECK(c.b[k].is_identically_zero());
    CHECK(c.c[k].is_identically_zero());
    CHECK(c.d[k].is_identically_zero());
    CHECK(c.f[k].is_identically_zero());
  }
}

TEST_CASE("spin split is trace-free and reassembles") {
  std::mt19937_64 rng(43);
  ScalarField p = rand_field(rng), q = rand_field(rng), r = rand_field(rng);
  NeutralMetric m = NeutralMetric::special_form(p, q, r);
  NullTetrad t = construct_foliation_tetrad(m);
  auto c = extract_components(connection_form_in_tetrad(m, t));
  auto s = split_spin_parts(c);
  for (size_t k = 0; k < 4; ++k) {
    CHECK((s.plus[0][0][k] + s.plus[1][1][k]).is_identically_zero());
    CHECK((s.minus[0][0][k] + s.minus[1][1][k]).is_identically_zero());
    // plus block entries: [[ (a-d)/2, b], [c, (d-a)/2 ]].
    CHECK((s.plus[0][1][k] - c.b[k]).is_identically_zero());
    CHECK((s.plus[1][0][k] - c.c[k]).is_identically_zero());
    CHECK((s.plus[0][0][k] - (c.a[k] - c.d[k]).scaled(Rational(1, 2))).is_identically_zero());
    CHECK((s.minus[0][1][k] - c.e[k]).is_identically_zero());
    CHECK((s.minus[1][0][k] - c.f[k]).is_identically_zero());
  }
}

TEST_CASE("structural identities hold for any special form") {
  NeutralMetric flat = NeutralMetric::special_form(ScalarField::zero(), ScalarField::zero(),
                                                   ScalarField::zero());
  CHECK(verify_structural_identities(flat).pass);

  testutil::WorkedExample ex;
  CHECK(verify_structural_identities(build_special_form(ex.p, ex.q, ex.r)).pass);

  // Non-self-dual input still satisfies the ideal/commutator identities.
  NeutralMetric nonsd = NeutralMetric::special_form(mono(Rational(1), 0, 0, 3, 0),
                                                    ScalarField::zero(), ScalarField::zero());
  CHECK(verify_structural_identities(nonsd).pass);

  // [p0, p1] = 0 exactly.
  NullTetrad t = construct_foliation_tetrad(build_special_form(ex.p, ex.q, ex.r));
  auto br = lie_bracket(t.p0(), t.p1());
  for (const auto& comp : br) CHECK(comp.is_identically_zero());
}

TEST_CASE("self-duality component identities separate SD from non-SD") {
  testutil::WorkedExample ex;
  CHECK(verify_sd_component_identities(build_special_form(ex.p, ex.q, ex.r)).pass);

  auto family = generate_sd_family(2, 1, 42, 5);
  for (const auto& [p, q, r] : family)
    CHECK(verify_sd_component_identities(NeutralMetric::special_form(p, q, r)).pass);

  NeutralMetric nonsd = NeutralMetric::special_form(mono(Rational(1), 0, 0, 2, 0),
                                                    ScalarField::zero(), ScalarField::zero());
  CHECK_FALSE(verify_sd_component_identities(nonsd).pass);
}
