#include "idleq/des_engine.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "idleq/errors.hpp"

namespace idleq {

void PolicySpec::validate() const {
  if (kind == PolicyKind::ThinnedNonIdling && !(p > 0.0 && p <= 1.0)) {
    throw ConfigError("policy: admission probability p must lie in (0, 1]");
  }
  if (kind == PolicyKind::RestAfterCompletion && !(std::isfinite(rest_duration) && rest_duration >= 0.0)) {
    throw ConfigError("policy: rest_duration must be >= 0");
  }
}

std::string PolicySpec::name() const {
  switch (kind) {
    case PolicyKind::ThinnedNonIdling:
      return "pistar";
    case PolicyKind::NonIdling:
      return "nonidle";
    case PolicyKind::RestAfterCompletion:
      return "rest";
  }
  return "unknown";
}

void SimParams::validate() const {
  if (n < 1) throw ConfigError("simulate: N must be >= 1");
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw ConfigError("simulate: lambda must be > 0");
  if (!(std::isfinite(burn_in) && burn_in >= 0.0)) throw ConfigError("simulate: burn_in must be >= 0");
  if (!(std::isfinite(horizon) && horizon >= burn_in)) throw ConfigError("simulate: horizon must be >= burn_in");
  if (batches < 2) throw ConfigError("simulate: need at least two batches");
  if (!(record_dt >= 0.0)) throw ConfigError("simulate: record_dt must be >= 0");
  if (service.role() != Role::Service) throw ConfigError("simulate: service law must have the service role");
  if (patience.role() != Role::Patience) throw ConfigError("simulate: patience law must have the patience role");
  policy.validate();
  cost.validate();
}

void SystemState::check_invariants(bool non_idling) const {
  auto fail = [this](const std::string& what) {
    std::ostringstream msg;
    msg << "state invariant broken at t=" << clock << ": " << what;
    throw std::logic_error(msg.str());
  };
  if (busy < 0 || resting < 0 || busy + resting > n_servers) fail("server accounting");
  int busy_seen = 0;
  int resting_seen = 0;
  for (auto s : server_customer) {
    if (s >= 0) ++busy_seen;
    if (s == kServerResting) ++resting_seen;
  }
  if (busy_seen != busy || resting_seen != resting) fail("server table disagrees with counts");
  const std::uint64_t in_queue = queue_length;
  if (counters.admitted != in_queue + static_cast<std::uint64_t>(busy) + counters.abandoned + counters.departed)
    fail("flow conservation admitted = queued + in service + abandoned + departed");
  if (counters.arrivals != counters.admitted + counters.rejected) fail("arrivals = admitted + rejected");
  if (non_idling && idle() > 0 && queue_length > 0) fail("server idles while customers wait");
  if (queue_length > 0 && customer(queue.front()).status != CustomerStatus::Queued) fail("queue head not queued");
  std::size_t queued = 0;
  for (const auto& c : customers) {
    if (c.status == CustomerStatus::Queued) {
      ++queued;
      if (c.patience_deadline < clock) fail("queued customer past its patience deadline");
    }
  }
  if (queued != queue_length) fail("queue_length disagrees with customer records");
}

double hl_waiting_time(const SystemState& state) {
  if (state.queue_length == 0) return 0.0;
  return state.clock - state.customer(state.queue.front()).arrival_time;
}

double hazard_abandonment_integrand(const SystemState& state, const DistributionSpec& patience) {
  if (state.queue_length == 0) return 0.0;
  const double chi = hl_waiting_time(state);
  double total = 0.0;
  for (const auto& c : state.customers) {
    if (c.patience_deadline <= state.clock) continue;
    const double w = state.clock - c.arrival_time;
    if (w <= chi) total += patience.hazard(w);
  }
  return total;
}

MeasureSnapshot snapshot_measures(const SystemState& state) {
  MeasureSnapshot snap;
  snap.alpha = state.alpha();
  snap.x = state.in_system();
  for (const auto& c : state.customers) {
    if (c.status == CustomerStatus::InService) snap.nu.push_back(state.clock - c.entry_time);
    if (c.patience_deadline > state.clock) snap.eta.push_back(state.clock - c.arrival_time);
  }
  return snap;
}

namespace {

enum class EventKind : std::uint8_t { Arrival, Abandon, Completion, RestEnd };

struct Event {
  double time;
  std::uint64_t seq;
  std::uint64_t ref;  // customer id or server index
  EventKind kind;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct BatchAcc {
  double rejections = 0.0;
  double abandonments = 0.0;
  double hazard = 0.0;
  double busy_int = 0.0;
  double queue_int = 0.0;
  double util_int = 0.0;
  double comp_int = 0.0;
};

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffU;
    h *= kFnvPrime;
  }
  return h;
}

Metric batch_metric(const std::vector<double>& values) {
  Metric m;
  const auto k = static_cast<double>(values.size());
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / k;
  if (values.size() < 2) return m;
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.se = std::sqrt(ss / (k - 1.0) / k);
  return m;
}

}  // namespace

struct Simulator::Impl {
  SimParams params;
  SystemState state;
  std::priority_queue<Event, std::vector<Event>, EventLater> events;
  std::priority_queue<int, std::vector<int>, std::greater<>> free_servers;
  std::uint64_t seq = 0;
  std::uint64_t next_id = 0;

  RngStream arrival_rng;
  RngStream admit_rng;
  RngStream service_rng;
  RngStream patience_rng;

  double interarrival_scale;
  double admit_p;
  std::vector<double> util_table;
  std::vector<double> comp_table;

  double window_lo;
  double window_hi;
  double batch_len;
  std::vector<BatchAcc> batches;

  double next_record = 0.0;
  std::vector<TrajectoryPoint> trajectory;
  std::uint64_t trace_hash = kFnvOffset;
  bool finished = false;

  explicit Impl(SimParams p)
      : params(std::move(p)),
        arrival_rng(params.seed, 0),
        admit_rng(params.seed, 1),
        service_rng(params.seed, 2),
        patience_rng(params.seed, 3) {
    params.validate();
    const int n = params.n;
    state.n_servers = n;
    state.server_customer.assign(static_cast<std::size_t>(n), kServerIdle);
    for (int s = 0; s < n; ++s) free_servers.push(s);

    interarrival_scale = 1.0 / (params.interarrival.mean() * n * params.lambda);
    admit_p = params.policy.admission_probability();

    const double mu = 1.0 / params.service.mean();
    util_table.resize(static_cast<std::size_t>(n) + 1);
    comp_table.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
      const double b = static_cast<double>(k) / n;
      util_table[static_cast<std::size_t>(k)] = params.cost.g(b);
      if (params.cost.c > 0.0 && admit_p < 1.0) {
        // q(., p) extended by 0 past its feasible range, see the ledger.
        auto q_ext = [&](double pp) {
          return b >= max_busy_fraction(pp, params.lambda, mu)
                     ? 0.0
                     : invariant_queue_length(b, pp, params.lambda, mu, params.patience);
        };
        comp_table[static_cast<std::size_t>(k)] = params.cost.c * (q_ext(1.0) - q_ext(admit_p));
      }
    }

    window_lo = params.burn_in;
    window_hi = params.horizon;
    batch_len = (window_hi - window_lo) / params.batches;
    batches.assign(static_cast<std::size_t>(params.batches), BatchAcc{});

    schedule(params.interarrival.sample(arrival_rng) * interarrival_scale, EventKind::Arrival, 0);
  }

  void schedule(double t, EventKind kind, std::uint64_t ref) { events.push(Event{t, seq++, ref, kind}); }

  std::size_t batch_of(double t) const {
    if (batch_len <= 0.0) return 0;
    auto k = static_cast<std::size_t>((t - window_lo) / batch_len);
    return std::min(k, batches.size() - 1);
  }

  bool in_window(double t) const { return t > window_lo && t <= window_hi && batch_len > 0.0; }

  // Piecewise-constant integrals over [clock, t).
  void advance(double t) {
    const double t0 = state.clock;
    if (params.record_dt > 0.0) {
      const double inv_n = 1.0 / params.n;
      while (next_record < t && next_record <= params.horizon) {
        trajectory.push_back({next_record, state.busy * inv_n, static_cast<double>(state.queue_length) * inv_n,
                              static_cast<double>(state.in_system()) * inv_n});
        next_record += params.record_dt;
      }
    }
    double lo = std::max(t0, window_lo);
    const double hi = std::min(t, window_hi);
    if (hi > lo && batch_len > 0.0) {
      const auto b = static_cast<std::size_t>(state.busy);
      const double busy = state.busy;
      const double q = static_cast<double>(state.queue_length);
      const double util = util_table[b];
      const double comp = comp_table[b];
      while (lo < hi) {
        const std::size_t k = batch_of(lo);
        const double end = (k + 1 == batches.size()) ? hi : std::min(hi, window_lo + (k + 1) * batch_len);
        const double dt = end - lo;
        if (dt <= 0.0) {
          // rounding at a batch edge; push into the next batch
          lo = std::nextafter(lo, hi);
          continue;
        }
        BatchAcc& acc = batches[k];
        acc.busy_int += busy * dt;
        acc.queue_int += q * dt;
        acc.util_int += util * dt;
        acc.comp_int += comp * dt;
        lo = end;
      }
    }
    state.clock = t;
  }

  // Adds the integrated abandonment hazard of a customer that waited in
  // queue over [arrival, exit], restricted to the window and split by batch.
  void book_hazard(double arrival, double exit) {
    double lo = std::max(arrival, window_lo);
    const double hi = std::min(exit, window_hi);
    if (!(hi > lo) || batch_len <= 0.0) return;
    const auto& pat = params.patience;
    double prev = pat.cumulative_hazard(lo - arrival);
    while (lo < hi) {
      const std::size_t k = batch_of(lo);
      const double end = (k + 1 == batches.size()) ? hi : std::min(hi, window_lo + (k + 1) * batch_len);
      if (end <= lo) {
        lo = std::nextafter(lo, hi);
        continue;
      }
      const double cur = pat.cumulative_hazard(end - arrival);
      batches[k].hazard += cur - prev;
      prev = cur;
      lo = end;
    }
  }

  void clean_queue_head() {
    while (!state.queue.empty() && state.customer(state.queue.front()).status != CustomerStatus::Queued) {
      state.queue.pop_front();
    }
  }

  void prune_records() {
    while (!state.customers.empty()) {
      const Customer& c = state.customers.front();
      const bool gone = c.status == CustomerStatus::Departed || c.status == CustomerStatus::Abandoned;
      if (!gone || c.patience_deadline > state.clock) break;
      state.customers.pop_front();
      ++state.first_id;
    }
  }

  void dispatch() {
    const double t = state.clock;
    while (state.queue_length > 0 && !free_servers.empty()) {
      const int server = free_servers.top();
      free_servers.pop();
      const std::uint64_t id = state.queue.front();
      state.queue.pop_front();
      --state.queue_length;
      Customer& c = state.customer(id);
      c.status = CustomerStatus::InService;
      c.entry_time = t;
      c.server = server;
      c.service_req = params.service.sample(service_rng);
      state.server_customer[static_cast<std::size_t>(server)] = static_cast<std::int64_t>(id);
      ++state.busy;
      ++state.counters.entered_service;
      book_hazard(c.arrival_time, t);
      schedule(t + c.service_req, EventKind::Completion, static_cast<std::uint64_t>(server));
      clean_queue_head();
    }
  }

  void on_arrival() {
    const double t = state.clock;
    ++state.counters.arrivals;
    state.last_arrival = t;
    schedule(t + params.interarrival.sample(arrival_rng) * interarrival_scale, EventKind::Arrival, 0);

    if (admit_p < 1.0 && !admit_rng.bernoulli(admit_p)) {
      ++state.counters.rejected;
      if (in_window(t)) batches[batch_of(t)].rejections += 1.0;
      return;
    }
    ++state.counters.admitted;
    Customer c;
    c.id = next_id++;
    c.arrival_time = t;
    c.patience_deadline = t + params.patience.sample(patience_rng);
    c.status = CustomerStatus::Queued;
    state.customers.push_back(c);
    state.queue.push_back(c.id);
    ++state.queue_length;
    dispatch();
    if (state.customer(c.id).status == CustomerStatus::Queued) {
      schedule(c.patience_deadline, EventKind::Abandon, c.id);
    }
  }

  void on_abandon(std::uint64_t id) {
    if (id < state.first_id) return;
    Customer& c = state.customer(id);
    if (c.status != CustomerStatus::Queued) return;
    const double t = state.clock;
    c.status = CustomerStatus::Abandoned;
    --state.queue_length;
    ++state.counters.abandoned;
    if (in_window(t)) batches[batch_of(t)].abandonments += 1.0;
    book_hazard(c.arrival_time, t);
    clean_queue_head();
  }

  void on_completion(int server) {
    const double t = state.clock;
    auto& slot = state.server_customer[static_cast<std::size_t>(server)];
    Customer& c = state.customer(static_cast<std::uint64_t>(slot));
    c.status = CustomerStatus::Departed;
    --state.busy;
    ++state.counters.departed;
    if (params.policy.kind == PolicyKind::RestAfterCompletion) {
      slot = kServerResting;
      ++state.resting;
      schedule(t + params.policy.rest_duration, EventKind::RestEnd, static_cast<std::uint64_t>(server));
    } else {
      slot = kServerIdle;
      free_servers.push(server);
      dispatch();
    }
  }

  void on_rest_end(int server) {
    state.server_customer[static_cast<std::size_t>(server)] = kServerIdle;
    --state.resting;
    free_servers.push(server);
    dispatch();
  }

  void run_until(double t) {
    while (!events.empty() && events.top().time <= t) {
      const Event ev = events.top();
      events.pop();
      advance(ev.time);
      trace_hash = fnv_mix(fnv_mix(trace_hash, static_cast<std::uint64_t>(ev.kind)), std::bit_cast<std::uint64_t>(ev.time));
      switch (ev.kind) {
        case EventKind::Arrival:
          on_arrival();
          break;
        case EventKind::Abandon:
          on_abandon(ev.ref);
          break;
        case EventKind::Completion:
          on_completion(static_cast<int>(ev.ref));
          break;
        case EventKind::RestEnd:
          on_rest_end(static_cast<int>(ev.ref));
          break;
      }
      prune_records();
      if (params.check_invariants) state.check_invariants(params.policy.is_non_idling());
    }
    if (t > state.clock) advance(t);
  }

  SimEstimate finish() {
    if (finished) throw std::logic_error("Simulator::run called twice");
    finished = true;
    run_until(params.horizon);
    // Customers still waiting at the horizon contribute their partial hazard.
    for (std::uint64_t id : state.queue) {
      const Customer& c = state.customer(id);
      if (c.status == CustomerStatus::Queued) book_hazard(c.arrival_time, params.horizon);
    }

    SimEstimate est;
    est.n = params.n;
    est.p = admit_p;
    est.policy = params.policy.name();
    est.horizon = params.horizon;
    est.burn_in = params.burn_in;
    est.replications = 1;
    est.trace_hash = trace_hash;
    est.trajectory = std::move(trajectory);
    if (batch_len <= 0.0) return est;

    const double n = params.n;
    const double a = params.cost.a;
    const double c = params.cost.c;
    const std::size_t nb = batches.size();
    std::vector<double> rej(nb), ab(nb), hold(nb), comp(nb), util(nb), busy(nb), q(nb), ab_rate(nb), hz(nb),
        gap(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      const BatchAcc& acc = batches[k];
      const double scale = 1.0 / (n * batch_len);
      rej[k] = a * acc.rejections * scale;
      ab[k] = a * acc.abandonments * scale;
      hold[k] = c * acc.queue_int * scale;
      comp[k] = acc.comp_int / batch_len;
      util[k] = acc.util_int / batch_len;
      busy[k] = acc.busy_int * scale;
      q[k] = acc.queue_int * scale;
      ab_rate[k] = acc.abandonments * scale;
      hz[k] = acc.hazard * scale;
      gap[k] = acc.abandonments - acc.hazard;
    }
    est.rejection = batch_metric(rej);
    est.abandonment = batch_metric(ab);
    est.holding = batch_metric(hold);
    est.compensator = batch_metric(comp);
    est.utilization = batch_metric(util);
    std::vector<double> tot(nb);
    for (std::size_t k = 0; k < nb; ++k) tot[k] = rej[k] + ab[k] + hold[k] + comp[k] + util[k];
    est.total = batch_metric(tot);
    est.total.mean = est.rejection.mean + est.abandonment.mean + est.holding.mean + est.compensator.mean +
                     est.utilization.mean;
    est.busy_frac = batch_metric(busy);
    est.q_frac = batch_metric(q);
    est.abandonment_rate = batch_metric(ab_rate);
    est.hazard_abandonment_rate = batch_metric(hz);
    // The gap is a window total, not a rate.
    est.martingale_gap = batch_metric(gap);
    est.martingale_gap.mean *= static_cast<double>(nb);
    est.martingale_gap.se *= static_cast<double>(nb);
    return est;
  }
};

Simulator::Simulator(SimParams params) : impl_(std::make_unique<Impl>(std::move(params))) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

void Simulator::run_until(double t) {
  if (t > impl_->params.horizon) throw DomainError("run_until: past the horizon");
  impl_->run_until(t);
}

SimEstimate Simulator::run() { return impl_->finish(); }
const SystemState& Simulator::state() const { return impl_->state; }
const SimParams& Simulator::params() const { return impl_->params; }

SimEstimate simulate(const SimParams& params) { return Simulator(params).run(); }

std::uint64_t replication_seed(std::uint64_t master, int index) {
  if (index == 0) return master;
  return mix_seed(master ^ mix_seed(static_cast<std::uint64_t>(index)));
}

namespace {

void reduce_metric(Metric SimEstimate::*field, const std::vector<SimEstimate>& reps, SimEstimate& out) {
  if (reps.size() == 1) {
    out.*field = reps.front().*field;
    return;
  }
  const double k = static_cast<double>(reps.size());
  double sum = 0.0;
  for (const auto& r : reps) sum += (r.*field).mean;
  const double mean = sum / k;
  double ss = 0.0;
  for (const auto& r : reps) ss += ((r.*field).mean - mean) * ((r.*field).mean - mean);
  out.*field = Metric{mean, std::sqrt(ss / (k - 1.0) / k)};
}

}  // namespace

SimEstimate aggregate(const std::vector<SimEstimate>& reps) {
  if (reps.empty()) throw DomainError("aggregate: no replications");
  SimEstimate out = reps.front();
  out.replications = static_cast<int>(reps.size());
  for (auto field : {&SimEstimate::rejection, &SimEstimate::abandonment, &SimEstimate::holding,
                     &SimEstimate::compensator, &SimEstimate::utilization, &SimEstimate::total,
                     &SimEstimate::busy_frac, &SimEstimate::q_frac, &SimEstimate::abandonment_rate,
                     &SimEstimate::hazard_abandonment_rate, &SimEstimate::martingale_gap}) {
    reduce_metric(field, reps, out);
  }
  if (reps.size() > 1) {
    out.total.mean =
        out.rejection.mean + out.abandonment.mean + out.holding.mean + out.compensator.mean + out.utilization.mean;
  }
  std::uint64_t h = kFnvOffset;
  for (const auto& r : reps) h = fnv_mix(h, r.trace_hash);
  out.trace_hash = reps.size() == 1 ? reps.front().trace_hash : h;

  // Pointwise mean of the recorded trajectories (common grid).
  std::size_t len = reps.front().trajectory.size();
  for (const auto& r : reps) len = std::min(len, r.trajectory.size());
  out.trajectory.assign(reps.front().trajectory.begin(), reps.front().trajectory.begin() + static_cast<long>(len));
  if (reps.size() > 1) {
    for (std::size_t i = 0; i < len; ++i) {
      TrajectoryPoint acc{out.trajectory[i].t, 0.0, 0.0, 0.0};
      for (const auto& r : reps) {
        acc.busy += r.trajectory[i].busy;
        acc.queue += r.trajectory[i].queue;
        acc.x += r.trajectory[i].x;
      }
      const double k = static_cast<double>(reps.size());
      acc.busy /= k;
      acc.queue /= k;
      acc.x /= k;
      out.trajectory[i] = acc;
    }
  }
  return out;
}

SimEstimate run_replications(const SimParams& params, int replications, bool parallel) {
  if (replications < 1) throw ConfigError("run_replications: need at least one replication");
  params.validate();
  std::vector<SimEstimate> results(static_cast<std::size_t>(replications));
  auto run_one = [&](int i) {
    SimParams p = params;
    p.seed = replication_seed(params.seed, i);
    results[static_cast<std::size_t>(i)] = simulate(p);
  };

  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  const unsigned workers = parallel ? std::min<unsigned>(hw, static_cast<unsigned>(replications)) : 1U;
  if (workers <= 1) {
    for (int i = 0; i < replications; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int i = next++; i < replications; i = next++) run_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return aggregate(results);
}

}  // namespace idleq
