#include "idleq/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace idleq {

SweepResult convergence_sweep(const ExperimentConfig& config, bool parallel) {
  config.validate();
  SweepResult out;
  out.design = design_for(config);

  struct Cell {
    int n;
    std::string name;
    SimParams params;
  };
  std::vector<Cell> cells;
  for (int n : config.n_values) {
    for (const auto& pc : config.policies) {
      const PolicySpec spec = resolve_policy(pc, out.design);
      SimParams sp = make_sim_params(config, n, spec);
      sp.validate();
      cells.push_back({n, pc.choice == PolicyChoice::Thinned ? spec.name() : pc.name(), std::move(sp)});
    }
  }

  const int reps = config.replications;
  const std::size_t tasks = cells.size() * static_cast<std::size_t>(reps);
  std::vector<SimEstimate> results(tasks);
  auto run_task = [&](std::size_t t) {
    const Cell& cell = cells[t / static_cast<std::size_t>(reps)];
    SimParams p = cell.params;
    p.seed = replication_seed(cell.params.seed, static_cast<int>(t % static_cast<std::size_t>(reps)));
    results[t] = simulate(p);
  };

  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  const unsigned workers = parallel ? static_cast<unsigned>(std::min<std::size_t>(hw, tasks)) : 1U;
  if (workers <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = next++; t < tasks; t = next++) run_task(t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto first = results.begin() + static_cast<long>(c * static_cast<std::size_t>(reps));
    SimEstimate est = aggregate(std::vector<SimEstimate>(first, first + reps));
    SweepRow row{cells[c].n, cells[c].name, std::move(est), 0.0};
    row.gap = row.estimate.total.mean - out.design.fluid_cost;
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<std::string> estimate_columns() {
  return {"n",           "policy",     "p",       "rep_count", "cost_total",  "cost_se",
          "rejection",   "abandonment", "holding", "compensator", "utilization", "busy_frac",
          "q_frac",      "hazard_abandonment_rate"};
}

std::vector<CsvCell> estimate_cells(const SimEstimate& e) {
  return {static_cast<std::int64_t>(e.n),
          e.policy,
          e.p,
          static_cast<std::int64_t>(e.replications),
          e.total.mean,
          e.total.se,
          e.rejection.mean,
          e.abandonment.mean,
          e.holding.mean,
          e.compensator.mean,
          e.utilization.mean,
          e.busy_frac.mean,
          e.q_frac.mean,
          e.hazard_abandonment_rate.mean};
}

CsvTable simulate_table(const std::vector<SimEstimate>& estimates) {
  CsvTable t(estimate_columns());
  for (const auto& e : estimates) t.add_row(estimate_cells(e));
  return t;
}

CsvTable sweep_table(const SweepResult& result) {
  auto cols = estimate_columns();
  cols.insert(cols.end(), {"fluid_b_star", "fluid_p_star", "fluid_cost", "gap"});
  CsvTable t(std::move(cols));
  for (const auto& row : result.rows) {
    auto cells = estimate_cells(row.estimate);
    cells[1] = row.policy;
    cells.insert(cells.end(), {result.design.b_star, result.design.p_star, result.design.fluid_cost, row.gap});
    t.add_row(std::move(cells));
  }
  return t;
}

CsvTable design_table(const ExperimentConfig& config, const FluidDesign& d) {
  const CostBreakdown parts = fluid_cost_breakdown(d, config.lambda, config.mu(), config.patience, config.cost);
  CsvTable t({"lambda", "mu", "b_star", "p_star", "fluid_cost", "regime", "q_at_optimum", "rejection",
              "abandonment", "holding", "compensator", "utilization", "degenerate_all_reject",
              "uniqueness_guaranteed"});
  t.add_row({d.lambda, d.mu, d.b_star, d.p_star, d.fluid_cost, std::string(to_string(d.regime)),
             d.q_at_optimum.value_or(0.0), parts.rejection, parts.abandonment, parts.holding, parts.compensator,
             parts.utilization, static_cast<std::int64_t>(d.degenerate_all_reject),
             static_cast<std::int64_t>(d.uniqueness_guaranteed)});
  return t;
}

}  // namespace idleq
