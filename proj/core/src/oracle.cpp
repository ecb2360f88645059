#include "idleq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "idleq/errors.hpp"

namespace idleq {

namespace {

constexpr double kTailTol = 1e-12;
constexpr int kMaxStates = 1'000'000;

}  // namespace

OracleResult erlang_a_oracle(int n, double admitted_rate, double mu, double theta, int k_max) {
  if (n < 1) throw ConfigError("oracle: N must be >= 1");
  if (!(std::isfinite(admitted_rate) && admitted_rate > 0.0)) throw ConfigError("oracle: admitted rate must be > 0");
  if (!(std::isfinite(mu) && mu > 0.0)) throw ConfigError("oracle: mu must be > 0");
  if (!(std::isfinite(theta) && theta > 0.0)) throw ConfigError("oracle: theta must be > 0");
  if (k_max < 1) throw ConfigError("oracle: K_max must be >= 1");

  auto death = [&](long k) { return std::min<long>(k, n) * mu + std::max<long>(k - n, 0) * theta; };

  // Unnormalized weights in log space, then scaled by the max to avoid
  // overflow for large N.
  int k_cap = std::max(k_max, n + 1);
  for (;;) {
    std::vector<double> logw(static_cast<std::size_t>(k_cap) + 1);
    logw[0] = 0.0;
    for (int k = 1; k <= k_cap; ++k) logw[k] = logw[k - 1] + std::log(admitted_rate / death(k));
    const double top = *std::max_element(logw.begin(), logw.end());
    std::vector<double> pi(logw.size());
    double total = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) {
      pi[k] = std::exp(logw[k] - top);
      total += pi[k];
    }
    // Beyond k_cap the ratio Lambda / r(k+1) keeps shrinking once k > N, so
    // the tail is bounded by a geometric series.
    const double ratio = admitted_rate / death(k_cap + 1);
    const double last = pi.back() / total;
    const double tail = ratio < 1.0 ? last * ratio / (1.0 - ratio) : 1.0;

    if (tail < kTailTol) {
      OracleResult r;
      r.n = n;
      r.admitted_rate = admitted_rate;
      r.mu = mu;
      r.theta = theta;
      r.tail_mass = tail;
      for (double& v : pi) v /= total;
      for (std::size_t k = 0; k < pi.size(); ++k) {
        const auto kk = static_cast<long>(k);
        r.E_busy += pi[k] * static_cast<double>(std::min<long>(kk, n));
        r.E_queue += pi[k] * static_cast<double>(std::max<long>(kk - n, 0));
      }
      r.abandonment_rate = theta * r.E_queue;
      r.throughput = mu * r.E_busy;
      r.pi = std::move(pi);
      return r;
    }
    if (k_cap >= kMaxStates) {
      throw TruncationError("oracle: tail mass " + std::to_string(tail) + " above 1e-12 at K_max = 10^6");
    }
    k_cap = std::min(kMaxStates, 2 * k_cap);
  }
}

CostBreakdown oracle_cost(const OracleResult& r, double lambda, const CostModel& cost) {
  const double nd = static_cast<double>(r.n);
  CostBreakdown out;
  out.rejection = cost.a * std::max(0.0, lambda - r.admitted_rate / nd);
  out.abandonment = cost.a * r.abandonment_rate / nd;
  out.holding = cost.c * r.E_queue / nd;
  for (std::size_t k = 0; k < r.pi.size(); ++k) {
    const double busy = static_cast<double>(std::min<std::size_t>(k, static_cast<std::size_t>(r.n))) / nd;
    out.utilization += r.pi[k] * cost.g(busy);
  }
  return out;
}

}  // namespace idleq
