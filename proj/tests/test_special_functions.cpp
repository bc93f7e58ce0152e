#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "vbunmix/oracle/quadrature.hpp"
#include "vbunmix/oracle/reference_moments.hpp"
#include "vbunmix/rng.hpp"
#include "vbunmix/special_functions.hpp"

using namespace vbunmix;

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_CASE("hazard ratio anchors") {
  // phi(0)/Phi(0) = 2/sqrt(2*pi)
  CHECK(rel(hazard_ratio(0.0), 0.79788456080286535588) < 1e-14);

  // far right tail: Phi ~ 1, value is the density itself; must stay finite
  const double far = hazard_ratio(38.0);
  CHECK(std::isfinite(far));
  CHECK(far > 0.0);
  CHECK(far < 1e-300);

  // deep left tail against the quadrature oracle
  CHECK(rel(hazard_ratio(-5.0), oracle::hazard_ratio_reference(-5.0)) < 1e-12);
  CHECK(hazard_ratio(-5.0) == doctest::Approx(5.18650396).epsilon(1e-8));

  CHECK_THROWS_AS(hazard_ratio(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(hazard_ratio(INFINITY), std::domain_error);
}

TEST_CASE("hazard ratio matches quadrature on a log grid over [-35, 35]") {
  double z = 1e-3;
  while (z <= 35.0) {
    CHECK(rel(hazard_ratio(z), oracle::hazard_ratio_reference(z)) < 1e-10);
    CHECK(rel(hazard_ratio(-z), oracle::hazard_ratio_reference(-z)) < 1e-10);
    z *= 1.45;
  }
}

TEST_CASE("truncated normal moments: half-normal closed form") {
  const auto m = truncated_normal_moments(0.0, 1.0);
  CHECK(rel(m.mean, std::sqrt(2.0 / M_PI)) < 1e-14);
  CHECK(rel(m.variance, 1.0 - 2.0 / M_PI) < 1e-14);

  const auto scaled = truncated_normal_moments(0.0, 2.5);
  CHECK(rel(scaled.mean, 2.5 * std::sqrt(2.0 / M_PI)) < 1e-14);
  CHECK(rel(scaled.variance, 6.25 * (1.0 - 2.0 / M_PI)) < 1e-14);
}

TEST_CASE("truncated normal moments: negligible truncation") {
  const auto m = truncated_normal_moments(10.0, 1.0);
  CHECK(std::abs(m.mean - 10.0) < 1e-10);
  CHECK(std::abs(m.variance - 1.0) < 1e-10);
}

TEST_CASE("truncated normal moments: deep truncation vs quadrature") {
  const auto m = truncated_normal_moments(-5.0, 1.0);
  const auto r = oracle::truncated_normal_moments_reference(-5.0, 1.0);
  CHECK(rel(m.mean, r.mean) < 1e-11);
  CHECK(rel(m.variance, r.variance) < 1e-11);
}

TEST_CASE("truncated normal moments: domain errors") {
  CHECK_THROWS_AS(truncated_normal_moments(0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(truncated_normal_moments(0.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(truncated_normal_moments(std::nan(""), 1.0), std::domain_error);
}

TEST_CASE("truncated normal moments: range invariants over mu/sigma in [-30, 30]") {
  for (double sigma : {0.03, 1.0, 40.0}) {
    for (double z = -30.0; z <= 30.0001; z += 0.5) {
      const double mu = z * sigma;
      const auto m = truncated_normal_moments(mu, sigma);
      CHECK(m.mean > 0.0);
      // the tail correction can round to zero ulps for z >> 0, so >= here
      CHECK(m.mean >= std::max(0.0, mu));
      CHECK(m.mean <= mu + sigma * (std::abs(z) + 1.0));
      CHECK(m.variance > 0.0);
      CHECK(m.variance <= sigma * sigma);
    }
  }
}

TEST_CASE("deep truncation asymptote: mean * (-mu) -> sigma^2") {
  for (double z : {-10.0, -14.0, -22.0, -30.0}) {
    for (double sigma : {0.4, 3.0}) {
      const double mu = z * sigma;
      const auto m = truncated_normal_moments(mu, sigma);
      CHECK(m.mean * (-mu) == doctest::Approx(sigma * sigma).epsilon(0.02));
    }
  }
}

TEST_CASE("gig half moments: closed-form anchors") {
  const auto m = gig_half_moments(1.0, 4.0);
  CHECK(m.mean == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(m.mean_inverse == doctest::Approx(0.75).epsilon(1e-15));

  // a = b collapses the mean to 1 and the inverse mean to 1 + 1/b
  for (double ab : {0.2, 1.0, 57.0}) {
    const auto s = gig_half_moments(ab, ab);
    CHECK(s.mean == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.mean_inverse == doctest::Approx(1.0 + 1.0 / ab).epsilon(1e-15));
  }

  CHECK_THROWS_AS(gig_half_moments(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(gig_half_moments(1.0, -2.0), std::domain_error);
}

TEST_CASE("gig half moments vs quadrature") {
  const auto got = gig_half_moments(2.5, 0.3);
  const auto want = oracle::gig_half_moments_reference(2.5, 0.3);
  CHECK(rel(got.mean, want.mean) < 1e-11);
  CHECK(rel(got.mean_inverse, want.mean_inverse) < 1e-11);
}

TEST_CASE("gig half moments: Jensen gap is exactly 1/b") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double a = std::exp(rng.uniform(-6.0, 6.0));
    const double b = std::exp(rng.uniform(-6.0, 6.0));
    const auto m = gig_half_moments(a, b);
    CHECK(m.mean_inverse * m.mean >= 1.0);
    CHECK(m.mean_inverse - 1.0 / m.mean == doctest::Approx(1.0 / b).epsilon(1e-12));
  }
}

TEST_CASE("Bessel-collapse identity: closed marginal equals the alpha integral") {
  Rng rng(13);
  for (int i = 0; i < 20; ++i) {
    const double w = rng.uniform(0.0, 3.0);
    const double b = rng.uniform(0.1, 6.0);
    const double beta = rng.uniform(0.1, 6.0);
    const double rate = std::sqrt(beta * b);
    const double closed = rate * std::exp(-rate * w);
    const double numeric = oracle::marginal_component_density_reference(w, b, beta);
    CHECK(rel(closed, numeric) < 1e-8);
  }
}
