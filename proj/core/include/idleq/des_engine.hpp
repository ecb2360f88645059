#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "idleq/distributions.hpp"
#include "idleq/fluid_control.hpp"
#include "idleq/rng.hpp"

namespace idleq {

enum class PolicyKind { ThinnedNonIdling, NonIdling, RestAfterCompletion };

/// Head-of-line control policy with optional admission control.
///
/// ThinnedNonIdling admits each arrival independently with probability p and
/// never lets a server idle while customers wait. RestAfterCompletion admits
/// everyone but sends each server on a fixed rest after every completion.
struct PolicySpec {
  PolicyKind kind = PolicyKind::NonIdling;
  double p = 1.0;
  double rest_duration = 0.0;

  static PolicySpec thinned(double p) { return {PolicyKind::ThinnedNonIdling, p, 0.0}; }
  static PolicySpec non_idling() { return {PolicyKind::NonIdling, 1.0, 0.0}; }
  static PolicySpec rest(double duration) { return {PolicyKind::RestAfterCompletion, 1.0, duration}; }

  double admission_probability() const { return kind == PolicyKind::ThinnedNonIdling ? p : 1.0; }
  bool is_non_idling() const { return kind != PolicyKind::RestAfterCompletion; }
  void validate() const;
  std::string name() const;
};

enum class CustomerStatus { Rejected, Queued, InService, Abandoned, Departed };

struct Customer {
  std::uint64_t id = 0;
  double arrival_time = 0.0;
  double patience_deadline = 0.0;
  double service_req = 0.0;  // drawn at entry into service
  double entry_time = 0.0;
  int server = -1;
  CustomerStatus status = CustomerStatus::Queued;
};

struct Counters {
  std::uint64_t arrivals = 0;
  std::uint64_t admitted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t abandoned = 0;
  std::uint64_t departed = 0;
  std::uint64_t entered_service = 0;
};

inline constexpr std::int64_t kServerIdle = -1;
inline constexpr std::int64_t kServerResting = -2;

/// Live state of the N-server queue.
///
/// `customers` holds every admitted customer whose potential-wait atom may
/// still be live, ordered by arrival (and therefore by id). Records are
/// dropped from the front once the customer has left the system and its
/// patience has run out. `queue` lists ids in arrival order; its head is
/// always a Queued customer when queue_length > 0.
struct SystemState {
  int n_servers = 0;
  double clock = 0.0;
  double last_arrival = 0.0;
  std::deque<Customer> customers;
  std::uint64_t first_id = 0;
  std::deque<std::uint64_t> queue;
  std::size_t queue_length = 0;
  std::vector<std::int64_t> server_customer;  // customer id, kServerIdle or kServerResting
  int busy = 0;
  int resting = 0;
  Counters counters;

  double alpha() const { return clock - last_arrival; }
  int idle() const { return n_servers - busy - resting; }
  std::int64_t in_system() const { return busy + static_cast<std::int64_t>(queue_length); }

  const Customer& customer(std::uint64_t id) const { return customers[id - first_id]; }
  Customer& customer(std::uint64_t id) { return customers[id - first_id]; }

  // Throws std::logic_error naming the first broken invariant.
  void check_invariants(bool non_idling) const;
};

// Waiting time of the oldest queued customer; 0 with an empty queue.
double hl_waiting_time(const SystemState& state);

// Sum of h^r(w) over potential waits w no older than the head-of-line wait.
double hazard_abandonment_integrand(const SystemState& state, const DistributionSpec& patience);

struct MeasureSnapshot {
  std::vector<double> nu;   // ages in service
  std::vector<double> eta;  // potential waiting times
  double alpha = 0.0;
  std::int64_t x = 0;
};

MeasureSnapshot snapshot_measures(const SystemState& state);

struct SimParams {
  int n = 1;
  double lambda = 1.0;  // fluid arrival rate; the N-server system sees n * lambda
  DistributionSpec interarrival = DistributionSpec::exponential(1.0, Role::Interarrival);
  DistributionSpec service = DistributionSpec::exponential(1.0, Role::Service);
  DistributionSpec patience = DistributionSpec::exponential(1.0, Role::Patience);
  PolicySpec policy;
  CostModel cost;
  double horizon = 1000.0;
  double burn_in = 0.0;
  std::uint64_t seed = 1;
  int batches = 20;
  double record_dt = 0.0;         // > 0 records (B/N, Q/N) on a time grid from 0
  bool check_invariants = false;  // validate the state after every event

  void validate() const;
};

struct Metric {
  double mean = 0.0;
  double se = 0.0;
};

struct TrajectoryPoint {
  double t = 0.0;
  double busy = 0.0;   // B/N
  double queue = 0.0;  // Q/N
  double x = 0.0;      // X/N
};

/// Fluid-scaled time averages over the window (burn_in, horizon].
struct SimEstimate {
  int n = 0;
  double p = 1.0;
  std::string policy;
  double horizon = 0.0;
  double burn_in = 0.0;
  int replications = 1;

  Metric rejection;
  Metric abandonment;
  Metric holding;
  Metric compensator;
  Metric utilization;
  Metric total;

  Metric busy_frac;
  Metric q_frac;
  Metric abandonment_rate;         // abandonments per server per unit time
  Metric hazard_abandonment_rate;  // compensator of the abandonment count, same units
  // R - integral of the abandonment hazard over the window, unscaled.
  Metric martingale_gap;

  std::uint64_t trace_hash = 0;
  std::vector<TrajectoryPoint> trajectory;
};

class Simulator {
 public:
  explicit Simulator(SimParams params);
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  // Processes every event with time <= t, then moves the clock to t.
  void run_until(double t);
  // Runs to the horizon and returns the window estimate.
  SimEstimate run();

  const SystemState& state() const;
  const SimParams& params() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SimEstimate simulate(const SimParams& params);

// Seed of replication `index`; index 0 reuses the master seed.
std::uint64_t replication_seed(std::uint64_t master, int index);

// Independent replications, reduced in replication order so the result does
// not depend on `parallel`.
SimEstimate run_replications(const SimParams& params, int replications, bool parallel);

// Combines per-replication estimates (mean across replications, SE from the
// spread across replications when there are at least two).
SimEstimate aggregate(const std::vector<SimEstimate>& reps);

}  // namespace idleq
