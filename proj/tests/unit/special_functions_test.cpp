#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "uaml/special_functions.hpp"

namespace uaml {
namespace {

double beta_density(double a, double b, double x) {
  return std::exp((a - 1) * std::log(x) + (b - 1) * std::log1p(-x) - log_beta(a, b));
}

TEST(LogGamma, MatchesFactorials) {
  double fact = 1.0;
  for (int n = 1; n <= 20; ++n) {
    EXPECT_NEAR(log_gamma(n), std::log(fact), 1e-10 * std::max(1.0, std::log(fact)))
        << "n=" << n;
    fact *= n;
  }
}

TEST(LogGamma, HalfInteger) {
  EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-12);
  EXPECT_NEAR(log_gamma(1e-3), std::lgamma(1e-3), 1e-10);
  EXPECT_NEAR(log_gamma(171.5), std::lgamma(171.5), 1e-9);
}

TEST(Digamma, RecurrenceAndKnownValue) {
  EXPECT_NEAR(digamma(1.0), -0.57721566490153286, 1e-12);
  for (double x : {0.01, 0.3, 1.0, 2.5, 7.0, 40.0}) {
    EXPECT_NEAR(digamma(x + 1), digamma(x) + 1 / x, 1e-10) << x;
  }
}

TEST(Trigamma, RecurrenceAndKnownValue) {
  EXPECT_NEAR(trigamma(1.0), std::numbers::pi * std::numbers::pi / 6, 1e-11);
  for (double x : {0.05, 0.5, 1.5, 4.0, 30.0}) {
    EXPECT_NEAR(trigamma(x + 1), trigamma(x) - 1 / (x * x), 1e-9 * (1 + 1 / (x * x))) << x;
  }
}

TEST(Digamma, DerivativeIsTrigamma) {
  for (double x : {0.7, 2.0, 9.0}) {
    const double h = 1e-5;
    EXPECT_NEAR((digamma(x + h) - digamma(x - h)) / (2 * h), trigamma(x), 1e-7);
  }
}

TEST(IncompleteBeta, MatchesQuadratureOracle) {
  for (double x : {0.5, 0.7, 0.8, 0.85, 0.9, 0.95, 0.99}) {
    const double oracle =
        testing::integrate([](double t) { return beta_density(19, 3, t); }, 0.0, x, 256);
    EXPECT_NEAR(incomplete_beta(19, 3, x), oracle, 1e-9) << x;
  }
}

TEST(IncompleteBeta, EndpointsAndSymmetry) {
  EXPECT_EQ(incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(incomplete_beta(2, 3, 1.0), 1.0);
  EXPECT_NEAR(incomplete_beta(1, 1, 0.37), 0.37, 1e-12);
  for (double x : {0.1, 0.42, 0.9}) {
    EXPECT_NEAR(incomplete_beta(2.5, 7, x), 1 - incomplete_beta(7, 2.5, 1 - x), 1e-10);
  }
}

TEST(BetaQuantile, InvertsIncompleteBeta) {
  EXPECT_NEAR(beta_quantile(2, 1, 0.5), std::sqrt(0.5), 1e-7);
  EXPECT_NEAR(beta_quantile(1, 1, 0.25), 0.25, 1e-7);
  for (double p : {0.05, 0.5, 0.95}) {
    const double q = beta_quantile(19, 3, p);
    EXPECT_NEAR(incomplete_beta(19, 3, q), p, 1e-7) << p;
  }
}

}  // namespace
}  // namespace uaml
