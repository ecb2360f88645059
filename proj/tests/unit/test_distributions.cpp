#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "idleq/distributions.hpp"
#include "idleq/errors.hpp"
#include "idleq/rng.hpp"

using namespace idleq;

namespace {

std::vector<DistributionSpec> menu() {
  return {
      DistributionSpec::exponential(1.3),
      DistributionSpec::erlang(3, 2.0),
      DistributionSpec::hyperexponential({0.3, 0.7}, {0.5, 4.0}),
      DistributionSpec::lognormal(0.1, 0.6),
      DistributionSpec::uniform(0.5, 2.0),
      DistributionSpec::weibull(1.5, 1.2),
      DistributionSpec::weibull(0.7, 1.0),
  };
}

// Interior points away from kinks of the uniform law.
std::vector<double> interior_points(const DistributionSpec& d, int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  std::vector<double> xs;
  while (static_cast<int>(xs.size()) < count) {
    const double x = d.inverse_cdf(u(gen));
    if (const auto* f = std::get_if<UniformShifted>(&d.family())) {
      if (std::abs(x - f->lo) < 1e-4 || std::abs(x - f->hi) < 1e-4) continue;
    }
    xs.push_back(x);
  }
  return xs;
}

double sample_mean(const DistributionSpec& d, int n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += d.sample(rng);
  return acc / n;
}

}  // namespace

TEST(Cdf, ExponentialLeftEdgeAndMedian) {
  const auto d = DistributionSpec::exponential(1.0);
  EXPECT_EQ(d.cdf(0.0), 0.0);
  EXPECT_NEAR(d.cdf(std::log(2.0)), 0.5, 1e-15);
}

TEST(Cdf, ErlangClosedForm) {
  const auto d = DistributionSpec::erlang(2, 2.0);
  EXPECT_NEAR(d.cdf(1.0), 1.0 - 3.0 * std::exp(-2.0), 1e-14);
  EXPECT_NEAR(d.cdf(1.0), 0.59399, 1e-5);
}

TEST(Hazard, Examples) {
  const auto e = DistributionSpec::exponential(0.7);
  for (double x : {0.0, 0.3, 5.0, 40.0}) EXPECT_NEAR(e.hazard(x), 0.7, 1e-12);
  EXPECT_NEAR(DistributionSpec::erlang(2, 1.0).hazard(1.0), 0.5, 1e-14);
  EXPECT_NEAR(DistributionSpec::hyperexponential({0.5, 0.5}, {1.0, 3.0}).hazard(0.0), 2.0, 1e-14);
}

TEST(Hazard, PastSupportEdge) {
  const auto u = DistributionSpec::uniform(0.5, 2.0);
  EXPECT_THROW(u.hazard(2.0), PastSupportEdge);
  EXPECT_THROW(u.hazard(3.0), PastSupportEdge);
}

TEST(InverseCdf, Examples) {
  const auto e = DistributionSpec::exponential(1.0);
  EXPECT_EQ(e.inverse_cdf(0.0), 0.0);
  EXPECT_TRUE(std::isinf(e.inverse_cdf(1.0)));
  const auto er = DistributionSpec::erlang(2, 2.0);
  EXPECT_NEAR(er.inverse_cdf(1.0 - 3.0 * std::exp(-2.0)), 1.0, 1e-10);
  EXPECT_NEAR(er.inverse_cdf(0.59399), 1.0, 1e-4);
  EXPECT_EQ(DistributionSpec::uniform(0.5, 2.0).inverse_cdf(1.0), 2.0);
}

TEST(SurvivalIntegral, Examples) {
  EXPECT_NEAR(DistributionSpec::exponential(2.5).survival_integral(kInfinity), 0.4, 1e-15);
  for (const auto& d : menu()) EXPECT_EQ(d.survival_integral(0.0), 0.0);
  EXPECT_NEAR(DistributionSpec::exponential(1.0).survival_integral(std::log(2.0)), 0.5, 1e-12);
}

TEST(SurvivalIntegral, MatchesClosedFormExponential) {
  const auto d = DistributionSpec::exponential(0.8);
  for (double x : {0.01, 0.5, 3.0, 20.0}) EXPECT_NEAR(d.survival_integral(x), (1.0 - std::exp(-0.8 * x)) / 0.8, 1e-11);
}

TEST(Sample, Reproducible) {
  const auto d = DistributionSpec::lognormal(0.0, 0.5);
  RngStream a(42, 2);
  RngStream b(42, 2);
  RngStream c(42, 3);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = d.sample(a);
    EXPECT_EQ(x, d.sample(b));
    differs = differs || x != d.sample(c);
  }
  EXPECT_TRUE(differs);
}

TEST(Sample, EmpiricalMeans) {
  const int n = 1'000'000;
  // Exponential(1): sd 1.
  EXPECT_NEAR(sample_mean(DistributionSpec::exponential(1.0), n, 1), 1.0, 3.0 / std::sqrt(n));
  // Erlang(2, 2): variance 2 / 4.
  EXPECT_NEAR(sample_mean(DistributionSpec::erlang(2, 2.0), n, 2), 1.0, 3.0 * std::sqrt(0.5 / n));
  // LogNormal(0, 0.5): mean e^{0.125}, variance (e^{0.25} - 1) e^{0.25}.
  const double var = (std::exp(0.25) - 1.0) * std::exp(0.25);
  EXPECT_NEAR(sample_mean(DistributionSpec::lognormal(0.0, 0.5), n, 3), std::exp(0.125), 3.0 * std::sqrt(var / n));
}

TEST(Sample, MenuMeans) {
  const int n = 200'000;
  for (const auto& d : menu()) {
    RngStream rng(9, 1);
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = d.sample(rng);
      ASSERT_GE(x, 0.0);
      s += x;
      s2 += x * x;
    }
    const double m = s / n;
    const double sd = std::sqrt((s2 / n - m * m) / n);
    EXPECT_NEAR(m, d.mean(), 4.0 * sd) << d.describe();
  }
}

TEST(Properties, DensityIsCdfDerivative) {
  for (const auto& d : menu()) {
    for (double x : interior_points(d, 1000, 11)) {
      const double h = std::min(1e-6 * std::max(1.0, x), 1e-3 * x);
      const double fd = (d.cdf(x + h) - d.cdf(x - h)) / (2 * h);
      EXPECT_NEAR(fd, d.pdf(x), 1e-6) << d.describe() << " x=" << x;
    }
  }
}

TEST(Properties, HazardTimesSurvivalIsDensity) {
  for (const auto& d : menu()) {
    for (double x : interior_points(d, 1000, 12)) {
      if (d.cdf(x) >= 1.0 - 1e-9) continue;
      const double lhs = d.hazard(x) * d.survival(x);
      EXPECT_NEAR(lhs, d.pdf(x), 1e-10 * std::max(1e-300, d.pdf(x))) << d.describe() << " x=" << x;
    }
  }
}

TEST(Properties, InverseCdfRoundTrip) {
  for (const auto& d : menu()) {
    for (double x : interior_points(d, 1000, 13)) {
      EXPECT_NEAR(d.inverse_cdf(d.cdf(x)), x, 1e-8 * std::max(1.0, x)) << d.describe();
    }
  }
}

TEST(Properties, CdfOfInverseCdf) {
  for (const auto& d : menu()) {
    for (double u : {1e-9, 1e-4, 0.1, 0.37, 0.5, 0.8, 0.999, 1.0 - 1e-9}) {
      EXPECT_NEAR(d.cdf(d.inverse_cdf(u)), u, 1e-12) << d.describe() << " u=" << u;
    }
  }
}

TEST(Properties, SurvivalIntegralOfInfinityIsMean) {
  for (const auto& d : menu()) {
    EXPECT_NEAR(d.survival_integral(kInfinity), d.mean(), 1e-8 * d.mean()) << d.describe();
    EXPECT_NEAR(d.survival_integral(d.inverse_survival(1e-14)), d.mean(), 1e-8 * d.mean()) << d.describe();
  }
}

TEST(Patience, RejectsUnboundedHazard) {
  EXPECT_THROW(DistributionSpec::uniform(0.0, 2.0, Role::Patience), AssumptionViolated);
  EXPECT_THROW(DistributionSpec::weibull(2.0, 1.0, Role::Patience), AssumptionViolated);
  EXPECT_THROW(DistributionSpec::weibull(0.5, 1.0, Role::Patience), AssumptionViolated);
  EXPECT_NO_THROW(DistributionSpec::erlang(3, 1.0, Role::Patience));
  EXPECT_NO_THROW(DistributionSpec::lognormal(0.0, 0.5, Role::Patience));
  EXPECT_NO_THROW(DistributionSpec::uniform(0.0, 2.0, Role::Service));
}

TEST(Patience, NonIncreasingHazardCheck) {
  EXPECT_NO_THROW(DistributionSpec::exponential(1.0, Role::Patience).require_nonincreasing_hazard());
  EXPECT_NO_THROW(
      DistributionSpec::hyperexponential({0.5, 0.5}, {3.0, 0.6}, Role::Patience).require_nonincreasing_hazard());
  EXPECT_THROW(DistributionSpec::erlang(2, 1.0, Role::Patience).require_nonincreasing_hazard(), AssumptionViolated);
  EXPECT_FALSE(DistributionSpec::lognormal(0.0, 0.5, Role::Patience).has_nonincreasing_hazard());
}

TEST(Construction, RejectsBadParameters) {
  EXPECT_THROW(DistributionSpec::exponential(0.0), ConfigError);
  EXPECT_THROW(DistributionSpec::erlang(0, 1.0), ConfigError);
  EXPECT_THROW(DistributionSpec::hyperexponential({0.5, 0.6}, {1.0, 2.0}), ConfigError);
  EXPECT_THROW(DistributionSpec::hyperexponential({0.5}, {1.0, 2.0}), ConfigError);
  EXPECT_THROW(DistributionSpec::lognormal(0.0, -1.0), ConfigError);
  EXPECT_THROW(DistributionSpec::uniform(2.0, 1.0), ConfigError);
  EXPECT_THROW(DistributionSpec::uniform(-1.0, 1.0), ConfigError);
  EXPECT_THROW(DistributionSpec::weibull(1.0, 0.0), ConfigError);
}
