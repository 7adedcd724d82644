#include <doctest.h>

#include "nsdt/killing.hpp"
#include "nsdt/metric.hpp"
#include "nsdt/tetrad.hpp"
#include "nsdt/twistor.hpp"
#include "test_util.hpp"

using namespace nsdt;
using testutil::mono;

namespace {

struct Pipeline {
  NeutralMetric m;
  NullTetrad t;
  ConnectionComponents c;

  explicit Pipeline(const NeutralMetric& metric)
      : m(metric),
        t(construct_foliation_tetrad(metric)),
        c(extract_components(connection_form_in_tetrad(metric, t))) {}
};

}  // namespace

TEST_CASE("canonical connection") {
  Pipeline flat(NeutralMetric::special_form(ScalarField::zero(), ScalarField::zero(),
                                            ScalarField::zero()));
  auto cc = canonical_connection(flat.c);
  CHECK(cc.exists);
  for (const auto& v : cc.tau) CHECK(v.is_identically_zero());

  testutil::WorkedExample ex;
  Pipeline wp(build_special_form(ex.p, ex.q, ex.r));
  auto wcc = canonical_connection(wp.c);
  CHECK(wcc.exists);
  // tau(e0) = -(a+d)(e0)/2 = -x2.
  CHECK((wcc.tau[0] + ScalarField::variable(2)).is_identically_zero());
  // Uniqueness: re-derive tau from its defining equations and compare.
  for (size_t k = 0; k < 4; ++k) {
    ScalarField expected = (wp.c.a[k] + wp.c.d[k]).scaled(Rational(-1, 2));
    if (k >= 2) expected = expected - wp.c.e[k - 2];
    CHECK((wcc.tau[k] - expected).is_identically_zero());
  }
}

TEST_CASE("self-dual foliation criterion, two routes") {
  Pipeline flat(NeutralMetric::special_form(ScalarField::zero(), ScalarField::zero(),
                                            ScalarField::zero()));
  auto frep = check_sd_foliation(flat.c, flat.t);
  CHECK(frep.pass);

  testutil::WorkedExample ex;
  Pipeline wp(build_special_form(ex.p, ex.q, ex.r));
  auto wrep = check_sd_foliation(wp.c, wp.t);
  CHECK(wrep.connection_exists);
  CHECK_FALSE(wrep.pass);
  CHECK(wrep.component_pass == wrep.dtau_pass);  // the two routes agree

  // Agreement with the basic criterion on self-dual metrics.
  auto check_agreement = [](const std::array<ScalarField, 3>& triple) {
    Pipeline pl(NeutralMetric::special_form(triple[0], triple[1], triple[2]));
    auto lift = build_twistor_lift(pl.c, pl.t);
    auto lax = check_lax_integrability(lift);
    REQUIRE(lax.pass);
    bool basic = check_basic(lift, lax).basic;
    CHECK(check_sd_foliation(pl.c, pl.t).pass == basic);
  };
  for (const auto& triple : generate_sd_family(2, 1, 42, 4)) check_agreement(triple);
  for (const auto& triple : generate_sd_family(1, 1, 13, 3)) check_agreement(triple);
}

TEST_CASE("conformal killing: flat translations and dilation") {
  Pipeline flat(NeutralMetric::special_form(ScalarField::zero(), ScalarField::zero(),
                                            ScalarField::zero()));
  auto trans = check_conformal_killing(flat.m, flat.t, flat.c, ScalarField::constant(1),
                                       ScalarField::zero());
  CHECK(trans.pass);
  CHECK(trans.eta.is_identically_zero());

  auto dil = check_conformal_killing(flat.m, flat.t, flat.c, ScalarField::variable(2),
                                     ScalarField::variable(3));
  CHECK(dil.pass);
  CHECK((dil.eta - ScalarField::constant(1)).is_identically_zero());

  auto imp = check_killing_implications(flat.m, flat.t, flat.c, ScalarField::variable(2),
                                        ScalarField::variable(3), dil);
  CHECK(imp.pass);
  CHECK(imp.basic);
}

TEST_CASE("worked example: vertical translation is not conformal killing") {
  testutil::WorkedExample ex;
  Pipeline wp(build_special_form(ex.p, ex.q, ex.r));
  auto rep = check_conformal_killing(wp.m, wp.t, wp.c, ScalarField::constant(1),
                                     ScalarField::zero());
  CHECK_FALSE(rep.pass);
  // The e0 K1 equation residual reduces to c(e0) = -x3.
  CHECK((rep.component_residuals[4] + ScalarField::variable(3)).is_identically_zero());
  // Tensor and component routes agree on the verdict.
  CHECK(rep.lie_pass == rep.component_pass);
}

TEST_CASE("dilation chain on a homogeneous self-dual triple") {
  // Vertical-linear coefficients: SD, and the dilation K = x2 p0 + x3 p1
  // is conformal Killing with eta == 1.
  ScalarField p = mono(Rational(1), 1, 0, 1, 0) + mono(Rational(2), 0, 2, 0, 1);
  ScalarField q = mono(Rational(-1), 0, 1, 0, 1) + mono(Rational(1), 1, 1, 1, 0);
  ScalarField r = mono(Rational(1), 1, 1, 1, 0) + mono(Rational(-3), 2, 0, 0, 1);
  Pipeline pl(NeutralMetric::special_form(p, q, r));
  REQUIRE(check_sd_system(p, q, r).pass);

  ScalarField K0 = ScalarField::variable(2), K1 = ScalarField::variable(3);
  auto ck = check_conformal_killing(pl.m, pl.t, pl.c, K0, K1);
  CHECK(ck.pass);
  CHECK((ck.eta - ScalarField::constant(1)).is_identically_zero());
  for (const auto& res : ck.lie_residuals) CHECK(res.is_identically_zero());
  for (const auto& res : ck.component_residuals) CHECK(res.is_identically_zero());

  auto imp = check_killing_implications(pl.m, pl.t, pl.c, K0, K1, ck);
  CHECK(imp.implications_pass);
  CHECK(imp.eta_pass);
  CHECK(imp.basic);
  for (const auto& res : imp.component_implications) CHECK(res.is_identically_zero());

  // The implication chain needs eta != 0.
  auto flat_ck = check_conformal_killing(pl.m, pl.t, pl.c, ScalarField::zero(),
                                         ScalarField::zero());
  CHECK_THROWS_AS((void)check_killing_implications(pl.m, pl.t, pl.c, ScalarField::zero(),
                                                   ScalarField::zero(), flat_ck),
                  ZeroEta);
}

TEST_CASE("inconsistent conformal factor is rejected") {
  Pipeline flat(NeutralMetric::special_form(ScalarField::zero(), ScalarField::zero(),
                                            ScalarField::zero()));
  // p0 K0 = 1 but p1 K1 = 2: no single eta fits both unit pairings.
  CHECK_THROWS_AS((void)check_conformal_killing(flat.m, flat.t, flat.c,
                                                ScalarField::variable(2),
                                                ScalarField::variable(3).scaled(Rational(2))),
                  InconsistentEta);
}
