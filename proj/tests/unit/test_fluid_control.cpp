#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "idleq/errors.hpp"
#include "idleq/fluid_control.hpp"

using namespace idleq;

namespace {

CostModel quadratic(double a = 1.0, double c = 0.0, double kappa = 1.0) {
  CostModel m;
  m.a = a;
  m.c = c;
  m.utilization = QuadraticCost{kappa};
  return m;
}

const DistributionSpec kExpPatience = DistributionSpec::exponential(1.0, Role::Patience);
const DistributionSpec kHyperPatience = DistributionSpec::hyperexponential({0.5, 0.5}, {3.0, 0.6}, Role::Patience);

}  // namespace

TEST(SolveFluid, QuadraticExample) {
  const auto d = solve_fluid(2.0, 1.0, quadratic());
  EXPECT_NEAR(d.b_star, 0.5, 1e-10);
  EXPECT_NEAR(d.fluid_cost, 1.75, 1e-12);
  EXPECT_NEAR(d.p_star, 0.25, 1e-10);
  EXPECT_EQ(d.regime, Regime::IdlingOptimal);
}

TEST(SolveFluid, NearlyFreeUtilizationIsNonIdling) {
  CostModel m;
  m.utilization = PowerCost{1e-9, 1.0};
  const auto d = solve_fluid(0.5, 1.0, m);
  EXPECT_NEAR(d.b_star, 0.5, 1e-10);
  EXPECT_EQ(d.regime, Regime::NonIdlingOptimal);
  EXPECT_NEAR(d.p_star, 1.0, 1e-10);
}

TEST(SolveFluid, QuadraticGrid) {
  for (double lambda : {0.3, 1.0, 2.0, 5.0}) {
    for (double mu : {0.5, 1.0, 2.0}) {
      const auto d = solve_fluid(lambda, mu, quadratic());
      EXPECT_NEAR(d.b_star, std::min({1.0, mu / 2.0, lambda / mu}), 1e-10) << lambda << ' ' << mu;
    }
  }
}

TEST(SolveFluid, DegenerateAllReject) {
  CostModel m;
  m.utilization = PowerCost{2.0, 1.0};  // g' = 2 > a mu = 1
  const auto d = solve_fluid(2.0, 1.0, m);
  EXPECT_EQ(d.b_star, 0.0);
  EXPECT_TRUE(d.degenerate_all_reject);
  EXPECT_EQ(d.p_star, kMinAdmission);
  EXPECT_FALSE(d.warnings.empty());
}

TEST(SolveFluid, RejectsHoldingCost) { EXPECT_THROW(solve_fluid(2.0, 1.0, quadratic(1.0, 0.5)), ConfigError); }

TEST(SolveFluid, PiecewiseLinearKinkIsFound) {
  CostModel m;
  // Slopes 0.2 then 3: the minimizer of g(b) - b sits on the kink at 0.4.
  m.utilization = PiecewiseLinearCost{{{0.0, 0.0}, {0.4, 0.08}, {1.0, 1.88}}};
  const auto d = solve_fluid(2.0, 1.0, m);
  EXPECT_NEAR(d.b_star, 0.4, 1e-9);
}

TEST(SolveFluid, BracketPerturbationIsStable) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.2, 4.0);
  for (int i = 0; i < 50; ++i) {
    const double lambda = u(gen);
    const double mu = u(gen);
    const auto m = quadratic(u(gen), 0.0, u(gen));
    auto f = [&](double b) { return m.a * (lambda - b * mu) + m.g(b); };
    const double cap = max_busy_fraction(1.0, lambda, mu);
    const double b0 = golden_section_minimize(f, 0.0, cap);
    const double b1 = golden_section_minimize(f, 0.0, cap - 1e-6);
    const double b2 = golden_section_minimize(f, 1e-6, cap);
    EXPECT_LE(std::abs(b1 - b0), 1e-6 + 1e-12);
    EXPECT_LE(std::abs(b2 - b0), 1e-6 + 1e-12);
  }
}

TEST(SolveFluid, IndependentOfPatience) {
  const auto m = quadratic(1.3, 0.0, 0.8);
  const auto a = solve_fluid_hc(2.0, 1.0, kExpPatience, m, false);
  const auto b = solve_fluid_hc(2.0, 1.0, kHyperPatience, m, false);
  const auto c = solve_fluid_hc(2.0, 1.0, DistributionSpec::lognormal(0.0, 1.0, Role::Patience), m, false);
  EXPECT_EQ(a.b_star, b.b_star);
  EXPECT_EQ(a.b_star, c.b_star);
  EXPECT_EQ(a.fluid_cost, b.fluid_cost);
}

TEST(GoldenSection, TiesGoLeft) {
  auto flat = [](double) { return 1.0; };
  EXPECT_EQ(golden_section_minimize(flat, 0.0, 1.0), 0.0);
}

TEST(CostModel, ValidationRejectsBadCosts) {
  CostModel m;
  m.a = 0.0;
  EXPECT_THROW(m.validate(), ConfigError);
  m = CostModel{};
  m.c = -1.0;
  EXPECT_THROW(m.validate(), ConfigError);
  m = CostModel{};
  m.utilization = PowerCost{1.0, 0.5};
  EXPECT_THROW(m.validate(), InvalidCost);
  m.utilization = PiecewiseLinearCost{{{0.0, 0.0}, {0.5, 1.0}, {1.0, 1.2}}};  // concave
  EXPECT_THROW(m.validate(), InvalidCost);
  m.utilization = PiecewiseLinearCost{{{0.0, 0.0}, {0.5, 0.0}, {1.0, 1.0}}};  // flat piece
  EXPECT_THROW(m.validate(), InvalidCost);
  m.utilization = QuadraticCost{-1.0};
  EXPECT_THROW(m.validate(), InvalidCost);
  EXPECT_THROW(solve_fluid(1.0, 1.0, m), InvalidCost);
}

TEST(InvariantQueue, Examples) {
  EXPECT_NEAR(invariant_queue_length(0.6, 0.3, 2.0, 1.0, kExpPatience), 0.0, 1e-15);
  EXPECT_NEAR(invariant_queue_length(0.5, 1.0, 2.0, 1.0, kExpPatience), 1.5, 1e-10);
  const auto theta2 = DistributionSpec::exponential(2.0, Role::Patience);
  EXPECT_NEAR(invariant_queue_length(0.0, 0.5, 2.0, 1.0, theta2), 0.5, 1e-12);
}

TEST(InvariantQueue, ExponentialClosedForm) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double theta = 4 * u(gen);
    const double lambda = 3 * u(gen);
    const double mu = 2 * u(gen);
    const double p = u(gen);
    const double b = u(gen) * max_busy_fraction(p, lambda, mu);
    const auto pat = DistributionSpec::exponential(theta, Role::Patience);
    EXPECT_NEAR(invariant_queue_length(b, p, lambda, mu, pat), (p * lambda - b * mu) / theta, 1e-10);
  }
}

TEST(InvariantQueue, OutsideDomain) {
  EXPECT_THROW(invariant_queue_length(0.7, 0.3, 2.0, 1.0, kExpPatience), DomainError);
  EXPECT_THROW(invariant_queue_length(0.5, 0.0, 2.0, 1.0, kExpPatience), DomainError);
  EXPECT_THROW(invariant_queue_length(-0.1, 1.0, 2.0, 1.0, kExpPatience), DomainError);
}

TEST(Compensator, Examples) {
  for (double b : {0.0, 0.3, 0.9}) EXPECT_EQ(holding_compensator(b, 1.0, 2.0, 1.0, kHyperPatience, 3.0), 0.0);
  EXPECT_EQ(holding_compensator(0.2, 0.4, 2.0, 1.0, kHyperPatience, 0.0), 0.0);
  EXPECT_NEAR(holding_compensator(0.4, 0.5, 2.0, 1.0, kExpPatience, 2.0), 2.0, 1e-10);
}

TEST(Compensator, PIndependentObjective) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double lambda = 3 * u(gen);
    const double mu = 2 * u(gen);
    const double p = u(gen);
    const double b = u(gen) * max_busy_fraction(p, lambda, mu);
    const double a = u(gen);
    const double c = u(gen);
    const auto& pat = (i % 2) ? kHyperPatience : kExpPatience;
    const double lhs = c * invariant_queue_length(b, p, lambda, mu, pat) +
                       holding_compensator(b, p, lambda, mu, pat, c) + a * (p * lambda - b * mu) +
                       a * (1 - p) * lambda;
    const double rhs = c * invariant_queue_length(b, 1.0, lambda, mu, pat) + a * (lambda - b * mu);
    EXPECT_NEAR(lhs, rhs, 1e-9);
  }
}

TEST(SolveFluidHc, ZeroHoldingMatchesSolveFluid) {
  for (double lambda : {0.3, 1.0, 2.0, 5.0}) {
    const auto m = quadratic();
    const auto plain = solve_fluid(lambda, 1.0, m);
    EXPECT_NEAR(solve_fluid_hc(lambda, 1.0, kHyperPatience, m, false).b_star, plain.b_star, 1e-9);
    EXPECT_NEAR(solve_fluid_hc(lambda, 1.0, kHyperPatience, m, true).b_star, plain.b_star, 1e-9);
  }
}

TEST(SolveFluidHc, ExponentialCalculusOracle) {
  // 4 - 2b + b^2 is minimized at the right end b = 1.
  auto d = solve_fluid_hc(2.0, 1.0, kExpPatience, quadratic(1.0, 1.0), true);
  EXPECT_NEAR(d.b_star, 1.0, 1e-6);
  EXPECT_NEAR(d.fluid_cost, 3.0, 1e-6);
  // 0.2 (2 - b) + b^2 is minimized at b = 0.1.
  d = solve_fluid_hc(2.0, 1.0, kExpPatience, quadratic(0.1, 0.1), true);
  EXPECT_NEAR(d.b_star, 0.1, 1e-6);
  ASSERT_TRUE(d.q_at_optimum.has_value());
  EXPECT_NEAR(*d.q_at_optimum, 1.9, 1e-6);
  // Grid-scan path agrees.
  EXPECT_NEAR(solve_fluid_hc(2.0, 1.0, kExpPatience, quadratic(0.1, 0.1), false).b_star, 0.1, 1e-6);
}

TEST(SolveFluidHc, DfrAssumptionEnforced) {
  const auto erl = DistributionSpec::erlang(2, 2.0, Role::Patience);
  EXPECT_THROW(solve_fluid_hc(2.0, 1.0, erl, quadratic(0.5, 0.5), true), AssumptionViolated);
  const auto d = solve_fluid_hc(2.0, 1.0, erl, quadratic(0.5, 0.5), false);
  EXPECT_FALSE(d.uniqueness_guaranteed);
  EXPECT_FALSE(d.warnings.empty());
}

TEST(SolveFluidHc, SensitiveToPatienceLaw) {
  const auto m = quadratic(0.5, 0.5);
  const auto e = solve_fluid_hc(2.0, 1.0, kExpPatience, m, true);
  const auto h = solve_fluid_hc(2.0, 1.0, kHyperPatience, m, true);
  EXPECT_NEAR(e.b_star, 0.5, 1e-6);
  EXPECT_GT(std::abs(e.b_star - h.b_star), 1e-6);
}

TEST(SolveFluidHc, QueueLengthConvexUnderDfr) {
  for (const auto& pat : {kExpPatience, kHyperPatience}) {
    const double lambda = 2.0;
    const double mu = 1.0;
    const int n = 1000;
    std::vector<double> q(n + 1);
    for (int i = 0; i <= n; ++i) q[i] = invariant_queue_length(static_cast<double>(i) / n, 1.0, lambda, mu, pat);
    for (int i = 1; i < n; ++i) EXPECT_GE(q[i + 1] - 2 * q[i] + q[i - 1], -1e-9) << i;
  }
}

TEST(Breakdown, ExampleDesign) {
  const auto m = quadratic();
  const auto d = solve_fluid(2.0, 1.0, m);
  const auto parts = fluid_cost_breakdown(d, 2.0, 1.0, kExpPatience, m);
  EXPECT_NEAR(parts.rejection, 1.5, 1e-9);
  EXPECT_NEAR(parts.abandonment, 0.0, 1e-9);
  EXPECT_NEAR(parts.utilization, 0.25, 1e-9);
  EXPECT_NEAR(parts.total(), 1.75, 1e-10);
  EXPECT_NEAR(parts.total(), d.fluid_cost, 1e-10);
}

TEST(Breakdown, PEqualsOneHasNoRejection) {
  const auto parts = fluid_cost_breakdown(0.5, 1.0, 2.0, 1.0, kExpPatience, quadratic(1.0, 0.3));
  EXPECT_EQ(parts.rejection, 0.0);
  EXPECT_EQ(parts.compensator, 0.0);
}

TEST(Breakdown, SumsToHoldingDesignCost) {
  const auto m = quadratic(0.5, 0.5);
  const auto d = solve_fluid_hc(2.0, 1.0, kHyperPatience, m, true);
  EXPECT_NEAR(fluid_cost_breakdown(d, 2.0, 1.0, kHyperPatience, m).total(), d.fluid_cost, 1e-10);
}

TEST(Breakdown, TotalIndependentOfP) {
  const auto m = quadratic(0.7, 0.4);
  const double b = 0.3;
  const double ref = fluid_cost_breakdown(b, 1.0, 2.0, 1.0, kHyperPatience, m).total();
  for (double p : {0.3, 0.6, 0.9}) {
    EXPECT_NEAR(fluid_cost_breakdown(b, p, 2.0, 1.0, kHyperPatience, m).total(), ref, 1e-10);
  }
}

TEST(Design, PStarIdentity) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double lambda = u(gen);
    const double mu = u(gen);
    const auto d = solve_fluid(lambda, mu, quadratic(u(gen), 0.0, u(gen)));
    if (d.degenerate_all_reject) continue;
    EXPECT_NEAR(d.p_star * lambda, d.b_star * mu, 1e-12);
    EXPECT_GT(d.p_star, 0.0);
    EXPECT_LE(d.p_star, 1.0);
  }
}
