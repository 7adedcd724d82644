#include <doctest.h>

#include "nsdt/connection.hpp"
#include "nsdt/metric.hpp"
#include "nsdt/tetrad.hpp"
#include "nsdt/twistor.hpp"
#include "test_util.hpp"

using namespace nsdt;
using testutil::mono;

namespace {

TwistorLift lift_of(const NeutralMetric& m) {
  NullTetrad t = construct_foliation_tetrad(m);
  return build_twistor_lift(extract_components(connection_form_in_tetrad(m, t)), t);
}

}  // namespace

TEST_CASE("flat lift has vanishing cubics") {
  NeutralMetric flat = NeutralMetric::special_form(ScalarField::zero(), ScalarField::zero(),
                                                   ScalarField::zero());
  auto lift = lift_of(flat);
  for (const auto& qi : lift.q) CHECK(qi.is_identically_zero());
  for (const auto& qi : lift.q2) CHECK(qi.is_identically_zero());
}

TEST_CASE("worked example cubic Q1 = x3 - x2 z - x3 z^2 + x2 z^3") {
  testutil::WorkedExample ex;
  auto lift = lift_of(build_special_form(ex.p, ex.q, ex.r));
  ScalarField x2 = ScalarField::variable(2), x3 = ScalarField::variable(3);
  CHECK((lift.q[0] - x3).is_identically_zero());
  CHECK((lift.q[1] + x2).is_identically_zero());
  CHECK((lift.q[2] + x3).is_identically_zero());
  CHECK((lift.q[3] - x2).is_identically_zero());
  for (const auto& qi : lift.q2) CHECK(qi.is_identically_zero());
}

TEST_CASE("lax integrability: worked example and generated family pass exactly") {
  testutil::WorkedExample ex;
  auto rep = check_lax_integrability(lift_of(build_special_form(ex.p, ex.q, ex.r)));
  CHECK(rep.pass);
  CHECK(rep.coefficients_pass);
  CHECK(rep.bracket_pass);
  for (const auto& res : rep.vertical_derivative_residuals) CHECK(res.is_identically_zero());

  auto family = generate_sd_family(2, 1, 42, 5);
  for (const auto& [p, q, r] : family) {
    auto frep = check_lax_integrability(lift_of(NeutralMetric::special_form(p, q, r)));
    CHECK(frep.pass);
    for (const auto& res : frep.q2_residuals) CHECK(res.is_identically_zero());
  }
}

TEST_CASE("lax integrability fails for a non-self-dual metric") {
  NeutralMetric bad = NeutralMetric::special_form(mono(Rational(1), 0, 0, 0, 2),
                                                  ScalarField::zero(), ScalarField::zero());
  auto rep = check_lax_integrability(lift_of(bad));
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.coefficients_pass);
  // Coefficient identities and the direct bracket test agree on failure.
  CHECK_FALSE(rep.bracket_pass);
}

TEST_CASE("basic condition") {
  NeutralMetric flat = NeutralMetric::special_form(ScalarField::zero(), ScalarField::zero(),
                                                   ScalarField::zero());
  auto flat_lift = lift_of(flat);
  auto flat_lax = check_lax_integrability(flat_lift);
  CHECK(check_basic(flat_lift, flat_lax).basic);

  testutil::WorkedExample ex;
  auto lift = lift_of(build_special_form(ex.p, ex.q, ex.r));
  auto lax = check_lax_integrability(lift);
  auto basic = check_basic(lift, lax);
  CHECK_FALSE(basic.basic);
  // p0 q1 = d2(-x2) = -1, the witnessing residual.
  CHECK((basic.residuals[0][1] + ScalarField::constant(1)).is_identically_zero());

  // The lemma assumes self-duality; reject otherwise.
  NeutralMetric bad = NeutralMetric::special_form(mono(Rational(1), 0, 0, 0, 2),
                                                  ScalarField::zero(), ScalarField::zero());
  auto bad_lift = lift_of(bad);
  auto bad_lax = check_lax_integrability(bad_lift);
  CHECK_THROWS_AS((void)check_basic(bad_lift, bad_lax), NotSelfDual);
}

TEST_CASE("induced projective connection and the reduction identity") {
  NeutralMetric flat = NeutralMetric::special_form(ScalarField::zero(), ScalarField::zero(),
                                                   ScalarField::zero());
  auto flat_lift = lift_of(flat);
  auto flat_lax = check_lax_integrability(flat_lift);
  auto flat_basic = check_basic(flat_lift, flat_lax);
  auto flat_conn = induced_projective_connection(flat_lift, flat_lax, flat_basic);
  for (auto& row : flat_conn.w)
    for (auto& col : row)
      for (auto& entry : col) CHECK(entry.is_identically_zero());
  CHECK(reduction_identity_holds(flat_lift, flat_conn));

  // Vertical-linear triples are self-dual and basic; the spray cubic of
  // the induced connection must reproduce Q1 exactly.
  auto family = generate_sd_family(1, 2, 17, 4);
  for (const auto& [p, q, r] : family) {
    auto lift = lift_of(NeutralMetric::special_form(p, q, r));
    auto lax = check_lax_integrability(lift);
    REQUIRE(lax.pass);
    auto basic = check_basic(lift, lax);
    REQUIRE(basic.basic);
    auto conn = induced_projective_connection(lift, lax, basic);
    CHECK(reduction_identity_holds(lift, conn));
    auto cubic = spray_zeta_cubic(conn);
    for (size_t i = 0; i < 4; ++i) CHECK((cubic[i] - lift.q[i]).is_identically_zero());
  }

  // Non-basic input is rejected.
  testutil::WorkedExample ex;
  auto lift = lift_of(build_special_form(ex.p, ex.q, ex.r));
  auto lax = check_lax_integrability(lift);
  auto basic = check_basic(lift, lax);
  CHECK_THROWS_AS((void)induced_projective_connection(lift, lax, basic), NotBasic);
}

TEST_CASE("projective spray: zero connection gives straight lines with constant zeta") {
  ProjectiveConnection2D zero;
  for (auto& row : zero.w)
    for (auto& col : row)
      for (auto& entry : col) entry = ScalarField::zero();
  SprayState s{0.3, -0.2, 0.7};
  auto v = projective_spray(zero, s);
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(0.7));
  CHECK(v[2] == doctest::Approx(0.0));

  auto vi = projective_spray_inverted(zero, s);
  CHECK(vi[2] == doctest::Approx(0.0));
}

TEST_CASE("zeta polynomial helpers") {
  ZetaPoly a = {ScalarField::constant(1), ScalarField::variable(2)};       // 1 + x2 z
  ZetaPoly b = {ScalarField::variable(3), ScalarField::constant(2)};       // x3 + 2 z
  auto prod = zeta_mul(a, b);
  REQUIRE(prod.size() == 3);
  CHECK((prod[0] - ScalarField::variable(3)).is_identically_zero());
  ScalarField mid = ScalarField::constant(2) + ScalarField::variable(2) * ScalarField::variable(3);
  CHECK((prod[1] - mid).is_identically_zero());
  CHECK((prod[2] - ScalarField::variable(2).scaled(Rational(2))).is_identically_zero());

  auto d = zeta_derivative_formal(prod);
  REQUIRE(d.size() == 2);
  CHECK((d[1] - ScalarField::variable(2).scaled(Rational(4))).is_identically_zero());
}
