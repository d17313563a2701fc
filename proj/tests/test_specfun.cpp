#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "conelab/specfun.hpp"

using namespace conelab;
using doctest::Approx;

TEST_CASE("gamma at integers and half integers") {
  CHECK(conelab::gamma(5.0) == Approx(24.0).epsilon(1e-15));
  CHECK(conelab::gamma(0.5) == Approx(std::sqrt(std::numbers::pi)).epsilon(1e-15));
  CHECK(conelab::gamma(1.0) == Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(conelab::gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(conelab::gamma(-1.5), std::domain_error);
  CHECK_THROWS_AS(conelab::gamma(171.0), std::overflow_error);
}

TEST_CASE("Hardy constants, reference values") {
  // mpmath, 30 digits (tests/oracles/specfun_oracle.py)
  CHECK(hardy_H(2, 0.75) == Approx(0.11833314742208217863).epsilon(1e-13));
  CHECK(hardy_c(2, 0.75) == Approx(0.085583564845276171463).epsilon(1e-13));
  CHECK(hardy_c(1, 0.5) == Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-14));
  CHECK(hardy_H(1, 0.6) == Approx(0.028200470179932922518).epsilon(1e-13));
  const HardyConstants k = hardy_constants(2, 0.75);
  CHECK(k.n == 2);
  CHECK(k.H == hardy_H(2, 0.75));
  CHECK(k.c == hardy_c(2, 0.75));
}

TEST_CASE("Hardy constant in one dimension at sigma = (1+s)/2") {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> u(1e-6, 0.5 - 1e-6);
  for (int k = 0; k < 100; ++k) {
    const double s = u(rng);
    const double g1 = std::tgamma((2.0 + s) / 4.0), g2 = std::tgamma((4.0 - s) / 4.0);
    const double expected = s * s * std::pow(2.0, s - 2.0) * g1 * g1 / (g2 * g2);
    CHECK(hardy_H(1, 0.5 * (1.0 + s)) == Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("hardy_ratio behaves like s^2") {
  for (double s = 0.01; s <= 0.49 + 1e-12; s += 0.01) {
    const double q = hardy_ratio(s) / (s * s);
    CHECK(q >= 1.0);
    CHECK(q <= 10.0);
  }
  const double half_pi2 = 0.5 * std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(hardy_ratio(0.01) / 1e-4 / half_pi2 - 1.0) < 0.01);
  CHECK(hardy_ratio(0.01) / 1e-4 == Approx(4.8862456531232543664).epsilon(1e-12));
  CHECK(hardy_ratio(0.25) / 0.0625 == Approx(4.1276180490565804327).epsilon(1e-12));
  CHECK(hardy_ratio(0.49) / (0.49 * 0.49) == Approx(4.079166902891209725).epsilon(1e-12));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(hardy_ratio(0.0), std::domain_error);
  CHECK_THROWS_AS(hardy_ratio(0.5), std::domain_error);
  CHECK_THROWS_AS(hardy_H(0, 0.5), std::domain_error);
  CHECK_THROWS_AS(hardy_c(1, 1.0), std::domain_error);
  CHECK_THROWS_AS(hardy_c(1, 0.0), std::domain_error);
}
