#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "idleq/des_engine.hpp"
#include "idleq/errors.hpp"

using namespace idleq;

namespace {

SimParams mm1(double horizon, std::uint64_t seed = 7) {
  SimParams p;
  p.n = 1;
  p.lambda = 1.0;
  p.interarrival = DistributionSpec::exponential(1.0, Role::Interarrival);
  p.service = DistributionSpec::exponential(1.0, Role::Service);
  p.patience = DistributionSpec::exponential(1.0, Role::Patience);
  p.policy = PolicySpec::non_idling();
  p.horizon = horizon;
  p.burn_in = 50.0;
  p.seed = seed;
  return p;
}

SimParams erlang_mix(int n, double horizon) {
  SimParams p;
  p.n = n;
  p.lambda = 1.3;
  p.interarrival = DistributionSpec::exponential(1.0, Role::Interarrival);
  p.service = DistributionSpec::erlang(2, 2.0, Role::Service);
  p.patience = DistributionSpec::erlang(2, 1.5, Role::Patience);
  p.policy = PolicySpec::thinned(0.8);
  p.horizon = horizon;
  p.burn_in = 10.0;
  p.seed = 99;
  return p;
}

Customer make_customer(std::uint64_t id, double arrival, double deadline, CustomerStatus status) {
  Customer c;
  c.id = id;
  c.arrival_time = arrival;
  c.patience_deadline = deadline;
  c.status = status;
  return c;
}

// Q-th smallest potential wait: inf{x >= 0 : #{w <= x} >= Q}.
double brute_force_chi(const SystemState& s) {
  if (s.queue_length == 0) return 0.0;
  auto eta = snapshot_measures(s).eta;
  std::sort(eta.begin(), eta.end());
  return eta.at(s.queue_length - 1);
}

}  // namespace

TEST(Simulate, SingleServerMatchesPoissonLaw) {
  const auto est = simulate(mm1(1e6));
  // X is Poisson(1): P(X >= 1) = 1 - e^-1, E[(X - 1)^+] = e^-1.
  EXPECT_NEAR(est.busy_frac.mean, 1.0 - std::exp(-1.0), 3 * est.busy_frac.se);
  EXPECT_NEAR(est.abandonment_rate.mean, std::exp(-1.0), 3 * est.abandonment_rate.se);
  EXPECT_GT(est.busy_frac.se, 0.0);
}

TEST(Simulate, EmptyWindowGivesZeroCost) {
  auto p = mm1(0.0);
  p.burn_in = 0.0;
  p.policy = PolicySpec::thinned(1e-9);
  const auto est = simulate(p);
  EXPECT_EQ(est.total.mean, 0.0);
  EXPECT_EQ(est.rejection.mean + est.abandonment.mean + est.holding.mean + est.compensator.mean +
                est.utilization.mean,
            0.0);
}

TEST(Simulate, ComponentsSumToTotal) {
  auto p = erlang_mix(10, 300.0);
  p.cost.c = 0.4;
  const auto est = simulate(p);
  const double sum =
      est.rejection.mean + est.abandonment.mean + est.holding.mean + est.compensator.mean + est.utilization.mean;
  EXPECT_NEAR(est.total.mean, sum, 1e-12);
  EXPECT_GT(est.rejection.mean, 0.0);
  EXPECT_GT(est.holding.mean, 0.0);
  for (const Metric* m : {&est.total, &est.rejection, &est.abandonment, &est.holding, &est.utilization})
    EXPECT_TRUE(std::isfinite(m->se));
}

TEST(Simulate, InvariantsHoldAtEveryEvent) {
  for (const auto& policy : {PolicySpec::non_idling(), PolicySpec::thinned(0.6), PolicySpec::rest(0.7)}) {
    auto p = erlang_mix(7, 200.0);
    p.policy = policy;
    p.check_invariants = true;
    EXPECT_NO_THROW(simulate(p)) << policy.name();
  }
}

TEST(Simulate, TraceHashIsDeterministic) {
  const auto a = simulate(erlang_mix(5, 100.0));
  const auto b = simulate(erlang_mix(5, 100.0));
  EXPECT_EQ(a.trace_hash, b.trace_hash);
  EXPECT_EQ(a.total.mean, b.total.mean);
  auto other = erlang_mix(5, 100.0);
  other.seed = 100;
  EXPECT_NE(simulate(other).trace_hash, a.trace_hash);
}

TEST(Simulate, RejectsBadPolicies) {
  auto p = mm1(10.0);
  p.policy = PolicySpec::thinned(0.0);
  EXPECT_THROW(simulate(p), ConfigError);
  p.policy = PolicySpec::thinned(1.5);
  EXPECT_THROW(simulate(p), ConfigError);
  p.policy = PolicySpec::rest(-1.0);
  EXPECT_THROW(simulate(p), ConfigError);
  p.policy = PolicySpec::non_idling();
  p.n = 0;
  EXPECT_THROW(simulate(p), ConfigError);
  p.n = 1;
  p.burn_in = 20.0;
  EXPECT_THROW(simulate(p), ConfigError);
}

TEST(Simulate, RestPolicyBusyFraction) {
  // M/M/N+M with lambda = 2, mu = 1: b* = 1/2 and the rest is (1 - b)/(b mu) = 1.
  SimParams p;
  p.n = 100;
  p.lambda = 2.0;
  p.policy = PolicySpec::rest(1.0);
  p.horizon = 600.0;
  p.burn_in = 50.0;
  p.seed = 3;
  const auto est = run_replications(p, 4, false);
  EXPECT_NEAR(est.busy_frac.mean, 0.5, 3 * est.busy_frac.se + 1e-3);
}

TEST(Simulate, MartingaleGapHasMeanZero) {
  auto p = erlang_mix(3, 40.0);
  p.burn_in = 0.0;
  double s = 0.0;
  double s2 = 0.0;
  const int count = 200;
  for (int i = 0; i < count; ++i) {
    p.seed = replication_seed(1234, i);
    const double g = simulate(p).martingale_gap.mean;
    s += g;
    s2 += g * g;
  }
  const double mean = s / count;
  const double se = std::sqrt((s2 / count - mean * mean) / (count - 1));
  EXPECT_NEAR(mean, 0.0, 3 * se);
}

TEST(HlWaitingTime, EmptyQueue) {
  SystemState s;
  s.clock = 4.0;
  EXPECT_EQ(hl_waiting_time(s), 0.0);
}

TEST(HlWaitingTime, SingleQueuedCustomer) {
  SystemState s;
  s.n_servers = 1;
  s.clock = 3.0;
  s.first_id = 0;
  s.customers.push_back(make_customer(0, 0.5, 10.0, CustomerStatus::Queued));
  s.queue.push_back(0);
  s.queue_length = 1;
  EXPECT_DOUBLE_EQ(hl_waiting_time(s), 2.5);
}

TEST(HlWaitingTime, AgreesWithQuantileOnRunCheckpoints) {
  auto p = erlang_mix(4, 5100.0);
  p.lambda = 1.6;
  Simulator sim(p);
  int nonempty = 0;
  for (int i = 1; i <= 10000; ++i) {
    sim.run_until(0.5 * i);
    const auto& st = sim.state();
    ASSERT_EQ(hl_waiting_time(st), brute_force_chi(st)) << "checkpoint " << i;
    nonempty += st.queue_length > 0 ? 1 : 0;
  }
  EXPECT_GT(nonempty, 1000);
}

TEST(HazardIntegrand, ExponentialPatienceCountsQueue) {
  auto p = mm1(500.0);
  p.n = 3;
  p.lambda = 2.0;
  p.patience = DistributionSpec::exponential(0.7, Role::Patience);
  Simulator sim(p);
  for (int i = 1; i <= 400; ++i) {
    sim.run_until(1.1 * i);
    const auto& st = sim.state();
    EXPECT_NEAR(hazard_abandonment_integrand(st, p.patience), 0.7 * static_cast<double>(st.queue_length), 1e-12);
  }
}

TEST(HazardIntegrand, EmptySystem) {
  SystemState s;
  EXPECT_EQ(hazard_abandonment_integrand(s, DistributionSpec::erlang(2, 1.0, Role::Patience)), 0.0);
}

TEST(HazardIntegrand, ErlangPatienceMatchesDirectSum) {
  auto p = erlang_mix(4, 800.0);
  p.lambda = 1.6;
  Simulator sim(p);
  for (int i = 1; i <= 500; ++i) {
    sim.run_until(1.5 * i);
    const auto& st = sim.state();
    double direct = 0.0;
    for (std::uint64_t id : st.queue) {
      const auto& c = st.customer(id);
      if (c.status != CustomerStatus::Queued) continue;
      const double w = st.clock - c.arrival_time;
      direct += p.patience.pdf(w) / p.patience.survival(w);
    }
    EXPECT_NEAR(hazard_abandonment_integrand(st, p.patience), direct, 1e-12 * std::max(1.0, direct));
  }
}

TEST(Snapshot, FreshSystemIsEmpty) {
  Simulator sim(mm1(100.0));
  const auto snap = snapshot_measures(sim.state());
  EXPECT_TRUE(snap.nu.empty());
  EXPECT_TRUE(snap.eta.empty());
  EXPECT_EQ(snap.x, 0);
}

TEST(Snapshot, OneCustomerInService) {
  SystemState s;
  s.n_servers = 1;
  s.clock = 2.0;
  s.last_arrival = 0.8;
  auto c = make_customer(0, 0.8, 5.0, CustomerStatus::InService);
  c.entry_time = 0.8;
  c.server = 0;
  s.customers.push_back(c);
  s.server_customer = {0};
  s.busy = 1;
  const auto snap = snapshot_measures(s);
  ASSERT_EQ(snap.nu.size(), 1U);
  EXPECT_DOUBLE_EQ(snap.nu[0], 1.2);
  EXPECT_EQ(snap.x, 1);
  EXPECT_DOUBLE_EQ(snap.alpha, 1.2);
}

TEST(Snapshot, RunCheckpointProperties) {
  Simulator sim(erlang_mix(6, 300.0));
  for (int i = 1; i <= 200; ++i) {
    sim.run_until(1.25 * i);
    const auto& st = sim.state();
    const auto snap = snapshot_measures(st);
    EXPECT_GE(snap.eta.size(), st.queue_length);
    EXPECT_EQ(static_cast<int>(snap.nu.size()), st.busy);
    EXPECT_EQ(snap.x, st.in_system());
    for (double a : snap.nu) EXPECT_GE(a, 0.0);
  }
}

TEST(Replications, SingleEqualsSimulate) {
  const auto p = erlang_mix(5, 200.0);
  const auto one = run_replications(p, 1, false);
  const auto direct = simulate(p);
  EXPECT_EQ(one.total.mean, direct.total.mean);
  EXPECT_EQ(one.total.se, direct.total.se);
  EXPECT_EQ(one.busy_frac.mean, direct.busy_frac.mean);
  EXPECT_EQ(one.trace_hash, direct.trace_hash);
}

TEST(Replications, ParallelMatchesSerialBitForBit) {
  const auto p = erlang_mix(5, 100.0);
  const auto a = run_replications(p, 16, true);
  const auto b = run_replications(p, 16, false);
  EXPECT_EQ(a.total.mean, b.total.mean);
  EXPECT_EQ(a.total.se, b.total.se);
  EXPECT_EQ(a.busy_frac.mean, b.busy_frac.mean);
  EXPECT_EQ(a.q_frac.se, b.q_frac.se);
  EXPECT_EQ(a.trace_hash, b.trace_hash);
  EXPECT_EQ(a.replications, 16);
}

TEST(Replications, StandardErrorShrinksWithCount) {
  SimParams p;
  p.n = 1;
  p.lambda = 1.2;
  p.patience = DistributionSpec::exponential(0.5, Role::Patience);
  p.horizon = 2000.0;
  p.burn_in = 50.0;
  p.seed = 5;
  const auto one = simulate(p);
  const auto many = run_replications(p, 64, false);
  const double ratio = many.busy_frac.se / one.busy_frac.se;
  EXPECT_GT(ratio, 0.125 / 2);
  EXPECT_LT(ratio, 0.125 * 2);
}

TEST(ReplicationSeed, FirstIsMaster) {
  EXPECT_EQ(replication_seed(42, 0), 42U);
  EXPECT_NE(replication_seed(42, 1), replication_seed(42, 2));
}
