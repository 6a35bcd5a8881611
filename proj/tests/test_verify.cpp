#include <catch2/catch_amalgamated.hpp>

#include "simbvp/verify.hpp"

using namespace simbvp;

TEST_CASE("scaled solutions re-integrate onto the rescaled profile", "[verify]") {
  const auto c = verify_scaling_covariance();
  INFO(c.note << "  worst=" << c.worst << " over " << c.cases << " cases");
  CHECK(c.cases >= 90);
  REQUIRE(c.worst < c.threshold);
  REQUIRE(c.passed);
}

TEST_CASE("f'' + alpha f f' is conserved when beta = -alpha", "[verify]") {
  const auto c = verify_first_integral();
  INFO("drift=" << c.worst);
  REQUIRE(c.cases == 20);
  REQUIRE(c.worst < 1e-6);
  REQUIRE(c.passed);
}

TEST_CASE("phase flow reproduces the transformed closed form", "[verify]") {
  const auto c = verify_phase_conjugacy();
  INFO("sup error=" << c.worst << " over " << c.cases << " samples");
  REQUIRE(c.cases > 100);
  REQUIRE(c.worst < 1e-6);
  REQUIRE(c.passed);
}

TEST_CASE("reported fixed points sit on the field's zeros", "[verify]") {
  const auto c = verify_fixed_point_residuals();
  REQUIRE(c.cases >= 100);
  REQUIRE(c.worst < 1e-12);
  REQUIRE(c.passed);
}

TEST_CASE("the exponent fitter recovers a synthetic tail", "[verify]") {
  const auto c = verify_exponent_selftest();
  REQUIRE(c.worst < 1e-3);
  REQUIRE(c.passed);
}

TEST_CASE("the full battery reports per-check results", "[verify]") {
  const auto rep = run_verification();
  REQUIRE(rep.checks.size() == 5);
  for (const auto& c : rep.checks) {
    INFO(c.name << " worst=" << c.worst << " threshold=" << c.threshold);
    CHECK(c.passed);
    REQUIRE(c.threshold > 0.0);
    REQUIRE_FALSE(c.name.empty());
  }
  REQUIRE(rep.all_passed());
}

TEST_CASE("verification is deterministic for a fixed seed", "[verify]") {
  const auto a = verify_scaling_covariance(7u);
  const auto b = verify_scaling_covariance(7u);
  REQUIRE(a.worst == b.worst);
  REQUIRE(a.cases == b.cases);
}
