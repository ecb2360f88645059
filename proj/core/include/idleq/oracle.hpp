#pragma once

#include <vector>

#include "idleq/fluid_control.hpp"

namespace idleq {

/// Stationary law of the M/M/N+M birth-death chain.
struct OracleResult {
  int n = 0;
  double admitted_rate = 0.0;
  double mu = 0.0;
  double theta = 0.0;
  std::vector<double> pi;  // P(X = k), k = 0..K
  double E_busy = 0.0;
  double E_queue = 0.0;
  double abandonment_rate = 0.0;
  double throughput = 0.0;
  double tail_mass = 0.0;  // bound on the mass cut off beyond K
};

// Birth-death balance with death rate min(k, N) mu + (k - N)^+ theta.
// The state space grows from k_max until the truncated tail drops below
// 1e-12; throws TruncationError past 10^6 states.
OracleResult erlang_a_oracle(int n, double admitted_rate, double mu, double theta, int k_max = 1024);

// Fluid-scaled long-run cost of the thinned system described by `r`:
// rejection a(lambda - Lambda/N), abandonment a * rate / N, holding c E[Q]/N,
// and E[g(B/N)] for the utilization term. The compensator is left at 0.
CostBreakdown oracle_cost(const OracleResult& r, double lambda, const CostModel& cost);

}  // namespace idleq
