#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "idleq/des_engine.hpp"
#include "idleq/distributions.hpp"
#include "idleq/fluid_control.hpp"

namespace idleq {

inline constexpr int kSchemaVersion = 1;

enum class PolicyChoice { PiStar, NonIdling, Rest, Thinned };

/// A policy as written in the config. `pistar` and a `rest` entry without a
/// duration are resolved against the fluid design at run time.
struct PolicyConfig {
  PolicyChoice choice = PolicyChoice::PiStar;
  std::optional<double> p;              // thinned only
  std::optional<double> rest_duration;  // rest only; default (1 - b*) / (b* mu)

  std::string name() const;
};

PolicyConfig parse_policy_name(const std::string& name);

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  double lambda = 1.0;
  DistributionSpec interarrival = DistributionSpec::exponential(1.0, Role::Interarrival);
  DistributionSpec service = DistributionSpec::exponential(1.0, Role::Service);
  DistributionSpec patience = DistributionSpec::exponential(1.0, Role::Patience);
  CostModel cost;
  bool assume_dfr = false;
  std::vector<PolicyConfig> policies{PolicyConfig{}};
  std::vector<int> n_values{10};
  double horizon = 1000.0;
  std::optional<double> burn_in;  // default max(50/mu, 50/lambda)
  int replications = 4;
  std::uint64_t master_seed = 1;
  std::optional<double> fluid_dx;  // default min(1/mu, 1/theta) / 200
  double fluid_horizon = 20.0;

  double mu() const { return 1.0 / service.mean(); }
  double theta() const { return 1.0 / patience.mean(); }
  double effective_burn_in() const;
  double effective_fluid_dx() const;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Strict parse: unknown keys, missing required keys and bad values raise
// ConfigError with "<source>:<line>: <field>: <reason>".
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::string& path);

std::string emit_config(const ExperimentConfig& config);

// b*, p* for the config; holding costs and the DFR assumption are honoured.
FluidDesign design_for(const ExperimentConfig& config);

PolicySpec resolve_policy(const PolicyConfig& policy, const FluidDesign& design);

SimParams make_sim_params(const ExperimentConfig& config, int n, const PolicySpec& policy);

}  // namespace idleq
