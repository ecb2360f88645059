// idleq command-line driver.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "idleq/config.hpp"
#include "idleq/csv.hpp"
#include "idleq/des_engine.hpp"
#include "idleq/errors.hpp"
#include "idleq/fluid_control.hpp"
#include "idleq/fluid_model.hpp"
#include "idleq/oracle.hpp"
#include "idleq/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
  std::string config;
  std::string out = "-";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (YAML)")->required();
  cmd->add_option("--out", c.out, "CSV output path, - for stdout");
}

int cmd_solve(const Common& c) {
  const auto cfg = idleq::load_config(c.config);
  const auto design = idleq::design_for(cfg);
  for (const auto& w : design.warnings) std::cerr << "warning: " << w << '\n';
  idleq::design_table(cfg, design).write(c.out);
  return kExitOk;
}

struct SimulateArgs {
  std::string policy = "pistar";
  std::optional<int> n;
  std::optional<double> horizon;
  std::optional<double> burn_in;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  bool serial = false;
};

int cmd_simulate(const Common& c, const SimulateArgs& a) {
  auto cfg = idleq::load_config(c.config);
  if (a.horizon) cfg.horizon = *a.horizon;
  if (a.burn_in) cfg.burn_in = *a.burn_in;
  if (a.reps) cfg.replications = *a.reps;
  if (a.seed) cfg.master_seed = *a.seed;
  if (a.n) cfg.n_values = {*a.n};
  cfg.validate();

  const auto design = idleq::design_for(cfg);
  const auto policy = idleq::resolve_policy(idleq::parse_policy_name(a.policy), design);
  std::vector<idleq::SimEstimate> rows;
  for (int n : cfg.n_values) {
    const auto params = idleq::make_sim_params(cfg, n, policy);
    rows.push_back(idleq::run_replications(params, cfg.replications, !a.serial));
  }
  idleq::simulate_table(rows).write(c.out);
  return kExitOk;
}

struct FluidArgs {
  std::string policy = "nonidle";
  std::optional<double> horizon;
  std::optional<double> dx;
  std::string init = "empty";
  int every = 1;
};

int cmd_fluid(const Common& c, const FluidArgs& a) {
  const auto cfg = idleq::load_config(c.config);
  const double dx = a.dx.value_or(cfg.effective_fluid_dx());
  if (!(dx > 0.0)) throw idleq::ConfigError("--dx must be > 0");
  if (a.every < 1) throw idleq::ConfigError("--every must be >= 1");
  const double horizon = a.horizon.value_or(cfg.fluid_horizon);

  const auto design = idleq::design_for(cfg);
  double rate = cfg.lambda;
  idleq::FluidPolicy policy = idleq::FluidPolicy::non_idling();
  if (a.policy == "pistar") {
    rate = design.p_star * cfg.lambda;
  } else if (a.policy == "rest" || a.policy == "busycap") {
    policy = idleq::FluidPolicy::busy_cap(design.b_star);
  } else if (a.policy != "nonidle") {
    throw idleq::ConfigError("--policy must be one of pistar, nonidle, rest, busycap");
  }

  const idleq::FluidModel model(cfg.service, cfg.patience, dx);
  idleq::FluidState init;
  if (a.init == "empty") {
    init = model.empty_state();
  } else if (a.init == "invariant") {
    // Invariant state matching the arrival rate actually fed in.
    const double p = rate / cfg.lambda;
    init = model.invariant_state(std::min(design.b_star, idleq::max_busy_fraction(p, cfg.lambda, cfg.mu())), p,
                                 cfg.lambda);
  } else {
    throw idleq::ConfigError("--init must be empty or invariant");
  }

  const auto traj = model.integrate(init, horizon, rate, policy, &cfg.cost);
  idleq::CsvTable table({"t", "X", "B", "Q", "chi", "R", "D", "K", "I", "residual"});
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    if (i % static_cast<std::size_t>(a.every) != 0 && i + 1 != traj.samples.size()) continue;
    const auto& s = traj.samples[i];
    table.add_row({s.t, s.X, s.B, s.Q, s.chi, s.R, s.D, s.K, s.I, s.residual});
  }
  table.write(c.out);
  std::cerr << "max_residual " << idleq::format_double(traj.max_residual) << '\n';
  return kExitOk;
}

int cmd_sweep(const Common& c, bool serial) {
  const auto cfg = idleq::load_config(c.config);
  const auto result = idleq::convergence_sweep(cfg, !serial);
  for (const auto& w : result.design.warnings) std::cerr << "warning: " << w << '\n';
  idleq::sweep_table(result).write(c.out);
  return kExitOk;
}

struct OracleArgs {
  std::string policy = "nonidle";
  std::optional<int> n;
};

int cmd_oracle(const Common& c, const OracleArgs& a) {
  auto cfg = idleq::load_config(c.config);
  if (a.n) cfg.n_values = {*a.n};
  const auto* svc = std::get_if<idleq::Exponential>(&cfg.service.family());
  const auto* pat = std::get_if<idleq::Exponential>(&cfg.patience.family());
  if (svc == nullptr || pat == nullptr)
    throw idleq::ConfigError("oracle: service and patience must both be exponential");
  if (!std::holds_alternative<idleq::Exponential>(cfg.interarrival.family()))
    throw idleq::ConfigError("oracle: interarrival law must be exponential");

  const auto design = idleq::design_for(cfg);
  const auto policy = idleq::resolve_policy(idleq::parse_policy_name(a.policy), design);
  if (!policy.is_non_idling()) throw idleq::ConfigError("oracle: only non-idling policies have a birth-death form");

  idleq::CsvTable table({"n", "policy", "p", "admitted_rate", "busy_frac", "q_frac", "abandonment_rate",
                         "throughput", "rejection", "abandonment", "holding", "utilization", "cost_total"});
  for (int n : cfg.n_values) {
    const double admitted = policy.admission_probability() * cfg.lambda * n;
    const auto r = idleq::erlang_a_oracle(n, admitted, svc->rate, pat->rate);
    const auto cost = idleq::oracle_cost(r, cfg.lambda, cfg.cost);
    const double nd = n;
    table.add_row({static_cast<std::int64_t>(n), policy.name(), policy.admission_probability(), admitted,
                   r.E_busy / nd, r.E_queue / nd, r.abandonment_rate / nd, r.throughput / nd, cost.rejection,
                   cost.abandonment, cost.holding, cost.utilization, cost.total()});
  }
  table.write(c.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Many-server queue with abandonment: fluid control, simulation and fluid integration"};
  app.require_subcommand(1);

  Common solve_c, sim_c, fluid_c, sweep_c, oracle_c;
  SimulateArgs sim_a;
  FluidArgs fluid_a;
  OracleArgs oracle_a;
  bool sweep_serial = false;

  auto* solve = app.add_subcommand("solve-fluid", "solve the fluid control problem and print the design");
  add_common(solve, solve_c);

  auto* sim = app.add_subcommand("simulate", "estimate long-run costs by simulation");
  add_common(sim, sim_c);
  sim->add_option("--policy", sim_a.policy, "pistar, nonidle or rest")
      ->check(CLI::IsMember({"pistar", "nonidle", "rest"}));
  sim->add_option("--n", sim_a.n, "number of servers")->check(CLI::PositiveNumber);
  sim->add_option("--horizon", sim_a.horizon, "simulation horizon");
  sim->add_option("--burn-in", sim_a.burn_in, "start of the averaging window");
  sim->add_option("--reps", sim_a.reps, "independent replications")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_a.seed, "master seed");
  sim->add_flag("--serial", sim_a.serial, "run replications on one thread");

  auto* fluid = app.add_subcommand("fluid-integrate", "integrate the fluid model");
  add_common(fluid, fluid_c);
  fluid->add_option("--policy", fluid_a.policy, "nonidle, pistar, rest or busycap")
      ->check(CLI::IsMember({"pistar", "nonidle", "rest", "busycap"}));
  fluid->add_option("--horizon", fluid_a.horizon, "integration horizon");
  fluid->add_option("--dx", fluid_a.dx, "age and time step");
  fluid->add_option("--init", fluid_a.init, "empty or invariant")->check(CLI::IsMember({"empty", "invariant"}));
  fluid->add_option("--every", fluid_a.every, "emit every k-th step")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "simulate every (N, policy) pair in the config");
  add_common(sweep, sweep_c);
  sweep->add_flag("--serial", sweep_serial, "run tasks on one thread");

  auto* oracle = app.add_subcommand("oracle", "exact M/M/N+M stationary measures");
  add_common(oracle, oracle_c);
  oracle->add_option("--policy", oracle_a.policy, "pistar or nonidle")->check(CLI::IsMember({"pistar", "nonidle"}));
  oracle->add_option("--n", oracle_a.n, "number of servers")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*solve) return cmd_solve(solve_c);
    if (*sim) return cmd_simulate(sim_c, sim_a);
    if (*fluid) return cmd_fluid(fluid_c, fluid_a);
    if (*sweep) return cmd_sweep(sweep_c, sweep_serial);
    if (*oracle) return cmd_oracle(oracle_c, oracle_a);
  } catch (const idleq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const idleq::AssumptionViolated& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
