#include "idleq/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "idleq/errors.hpp"
#include "idleq/fluid_model.hpp"

namespace idleq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& field, const std::string& reason) const {
    std::ostringstream msg;
    msg << source_;
    if (at.IsDefined() && at.Mark().line >= 0) msg << ':' << at.Mark().line + 1;
    msg << ": " << (field.empty() ? "<root>" : field) << ": " << reason;
    throw ConfigError(msg.str());
  }

  void require_map(const YAML::Node& node, const std::string& field) const {
    if (!node.IsMap()) fail(node, field, "expected a mapping");
  }

  void only_keys(const YAML::Node& node, const std::string& field, std::initializer_list<std::string_view> allowed) const {
    require_map(node, field);
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(kv.first, join(field, key), "unknown key");
      }
    }
  }

  YAML::Node child(const YAML::Node& parent, const std::string& field, const std::string& key, bool required) const {
    YAML::Node n = parent[key];
    if (!n.IsDefined() || n.IsNull()) {
      if (required) fail(parent, join(field, key), "missing required key");
      return YAML::Node(YAML::NodeType::Undefined);
    }
    return n;
  }

  double number(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(n, field, "expected a number");
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) fail(n, field, "must be finite");
      return v;
    } catch (const YAML::BadConversion&) {
      fail(n, field, "expected a number, got '" + n.Scalar() + "'");
    }
  }

  long long integer(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(n, field, "expected an integer");
    try {
      return n.as<long long>();
    } catch (const YAML::BadConversion&) {
      fail(n, field, "expected an integer, got '" + n.Scalar() + "'");
    }
  }

  std::uint64_t unsigned_integer(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(n, field, "expected a nonnegative integer");
    try {
      return n.as<std::uint64_t>();
    } catch (const YAML::BadConversion&) {
      fail(n, field, "expected a nonnegative integer, got '" + n.Scalar() + "'");
    }
  }

  bool boolean(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(n, field, "expected true or false");
    try {
      return n.as<bool>();
    } catch (const YAML::BadConversion&) {
      fail(n, field, "expected true or false, got '" + n.Scalar() + "'");
    }
  }

  std::string text(const YAML::Node& n, const std::string& field) const {
    if (!n.IsScalar()) fail(n, field, "expected a string");
    return n.Scalar();
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& field) const {
    if (!n.IsSequence()) fail(n, field, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(number(n[i], field + "[" + std::to_string(i) + "]"));
    return out;
  }

  static std::string join(const std::string& field, const std::string& key) {
    return field.empty() ? key : field + "." + key;
  }

 private:
  std::string source_;
};

Role role_from(const std::string& s) {
  if (s == "interarrival") return Role::Interarrival;
  if (s == "service") return Role::Service;
  if (s == "patience") return Role::Patience;
  throw ConfigError("unknown role '" + s + "'");
}

DistributionSpec read_distribution(const Reader& r, const YAML::Node& node, const std::string& field, Role role) {
  r.only_keys(node, field, {"family", "params", "role"});
  const std::string family = r.text(r.child(node, field, "family", true), field + ".family");
  if (YAML::Node rn = r.child(node, field, "role", false); rn.IsDefined()) {
    const std::string given = r.text(rn, field + ".role");
    Role parsed{};
    try {
      parsed = role_from(given);
    } catch (const ConfigError& e) {
      r.fail(rn, field + ".role", e.what());
    }
    if (parsed != role) r.fail(rn, field + ".role", "role '" + given + "' does not match its slot");
  }
  const std::string pf = field + ".params";
  const YAML::Node params = r.child(node, field, "params", true);
  auto num = [&](const char* key) { return r.number(r.child(params, pf, key, true), pf + "." + key); };

  Family fam;
  if (family == "exponential") {
    r.only_keys(params, pf, {"rate"});
    fam = Exponential{num("rate")};
  } else if (family == "erlang") {
    r.only_keys(params, pf, {"shape", "rate"});
    const long long shape = r.integer(r.child(params, pf, "shape", true), pf + ".shape");
    if (shape < 1 || shape > 1'000'000) r.fail(params["shape"], pf + ".shape", "must be a positive integer");
    fam = Erlang{static_cast<int>(shape), num("rate")};
  } else if (family == "hyperexponential") {
    r.only_keys(params, pf, {"weights", "rates"});
    fam = HyperExponential{r.numbers(r.child(params, pf, "weights", true), pf + ".weights"),
                           r.numbers(r.child(params, pf, "rates", true), pf + ".rates")};
  } else if (family == "lognormal") {
    r.only_keys(params, pf, {"mu", "sigma"});
    fam = LogNormal{num("mu"), num("sigma")};
  } else if (family == "uniform") {
    r.only_keys(params, pf, {"lo", "hi"});
    fam = UniformShifted{num("lo"), num("hi")};
  } else if (family == "weibull") {
    r.only_keys(params, pf, {"shape", "scale"});
    fam = Weibull{num("shape"), num("scale")};
  } else {
    r.fail(node["family"], field + ".family", "unknown family '" + family + "'");
  }
  try {
    return DistributionSpec(std::move(fam), role);
  } catch (const Error& e) {
    r.fail(node, field, e.what());
  }
}

UtilizationCost read_utilization(const Reader& r, const YAML::Node& node, const std::string& field) {
  r.require_map(node, field);
  const std::string kind = r.text(r.child(node, field, "kind", true), field + ".kind");
  auto num = [&](const char* key) { return r.number(r.child(node, field, key, true), field + "." + key); };
  if (kind == "quadratic") {
    r.only_keys(node, field, {"kind", "coeff"});
    return QuadraticCost{num("coeff")};
  }
  if (kind == "power") {
    r.only_keys(node, field, {"kind", "coeff", "exponent"});
    return PowerCost{num("coeff"), num("exponent")};
  }
  if (kind == "piecewise_linear") {
    r.only_keys(node, field, {"kind", "knots"});
    const YAML::Node knots = r.child(node, field, "knots", true);
    if (!knots.IsSequence()) r.fail(knots, field + ".knots", "expected a list of [b, g] pairs");
    PiecewiseLinearCost pl;
    for (std::size_t i = 0; i < knots.size(); ++i) {
      const std::string kf = field + ".knots[" + std::to_string(i) + "]";
      const auto pair = r.numbers(knots[i], kf);
      if (pair.size() != 2) r.fail(knots[i], kf, "expected a [b, g] pair");
      pl.knots.emplace_back(pair[0], pair[1]);
    }
    return pl;
  }
  r.fail(node["kind"], field + ".kind", "unknown utilization cost kind '" + kind + "'");
}

PolicyConfig read_policy(const Reader& r, const YAML::Node& node, const std::string& field) {
  if (node.IsScalar()) {
    try {
      return parse_policy_name(node.Scalar());
    } catch (const ConfigError& e) {
      r.fail(node, field, e.what());
    }
  }
  r.require_map(node, field);
  const YAML::Node kn = r.child(node, field, "kind", true);
  PolicyConfig pc;
  try {
    pc = parse_policy_name(r.text(kn, field + ".kind"));
  } catch (const ConfigError& e) {
    r.fail(kn, field + ".kind", e.what());
  }
  switch (pc.choice) {
    case PolicyChoice::PiStar:
    case PolicyChoice::NonIdling:
      r.only_keys(node, field, {"kind"});
      break;
    case PolicyChoice::Rest:
      r.only_keys(node, field, {"kind", "rest_duration"});
      if (YAML::Node d = r.child(node, field, "rest_duration", false); d.IsDefined()) {
        pc.rest_duration = r.number(d, field + ".rest_duration");
        if (*pc.rest_duration < 0.0) r.fail(d, field + ".rest_duration", "must be >= 0");
      }
      break;
    case PolicyChoice::Thinned: {
      r.only_keys(node, field, {"kind", "p"});
      const YAML::Node pn = r.child(node, field, "p", true);
      pc.p = r.number(pn, field + ".p");
      if (!(*pc.p > 0.0 && *pc.p <= 1.0)) r.fail(pn, field + ".p", "admission probability must lie in (0, 1]");
      break;
    }
  }
  return pc;
}

void emit_distribution(YAML::Emitter& out, const DistributionSpec& d) {
  out << YAML::BeginMap;
  out << YAML::Key << "family";
  std::visit(overloaded{
                 [&](const Exponential& f) {
                   out << YAML::Value << "exponential" << YAML::Key << "params" << YAML::Value << YAML::Flow
                       << YAML::BeginMap << YAML::Key << "rate" << YAML::Value << f.rate << YAML::EndMap;
                 },
                 [&](const Erlang& f) {
                   out << YAML::Value << "erlang" << YAML::Key << "params" << YAML::Value << YAML::Flow
                       << YAML::BeginMap << YAML::Key << "shape" << YAML::Value << f.shape << YAML::Key << "rate"
                       << YAML::Value << f.rate << YAML::EndMap;
                 },
                 [&](const HyperExponential& f) {
                   out << YAML::Value << "hyperexponential" << YAML::Key << "params" << YAML::Value << YAML::Flow
                       << YAML::BeginMap << YAML::Key << "weights" << YAML::Value << YAML::Flow << f.weights
                       << YAML::Key << "rates" << YAML::Value << YAML::Flow << f.rates << YAML::EndMap;
                 },
                 [&](const LogNormal& f) {
                   out << YAML::Value << "lognormal" << YAML::Key << "params" << YAML::Value << YAML::Flow
                       << YAML::BeginMap << YAML::Key << "mu" << YAML::Value << f.mu << YAML::Key << "sigma"
                       << YAML::Value << f.sigma << YAML::EndMap;
                 },
                 [&](const UniformShifted& f) {
                   out << YAML::Value << "uniform" << YAML::Key << "params" << YAML::Value << YAML::Flow
                       << YAML::BeginMap << YAML::Key << "lo" << YAML::Value << f.lo << YAML::Key << "hi"
                       << YAML::Value << f.hi << YAML::EndMap;
                 },
                 [&](const Weibull& f) {
                   out << YAML::Value << "weibull" << YAML::Key << "params" << YAML::Value << YAML::Flow
                       << YAML::BeginMap << YAML::Key << "shape" << YAML::Value << f.shape << YAML::Key << "scale"
                       << YAML::Value << f.scale << YAML::EndMap;
                 },
             },
             d.family());
  out << YAML::Key << "role" << YAML::Value << std::string(to_string(d.role()));
  out << YAML::EndMap;
}

}  // namespace

std::string PolicyConfig::name() const {
  switch (choice) {
    case PolicyChoice::PiStar:
      return "pistar";
    case PolicyChoice::NonIdling:
      return "nonidle";
    case PolicyChoice::Rest:
      return "rest";
    case PolicyChoice::Thinned:
      return "thinned";
  }
  return "?";
}

PolicyConfig parse_policy_name(const std::string& name) {
  if (name == "pistar") return {PolicyChoice::PiStar, std::nullopt, std::nullopt};
  if (name == "nonidle") return {PolicyChoice::NonIdling, std::nullopt, std::nullopt};
  if (name == "rest") return {PolicyChoice::Rest, std::nullopt, std::nullopt};
  if (name == "thinned") return {PolicyChoice::Thinned, 1.0, std::nullopt};
  throw ConfigError("unknown policy '" + name + "' (expected pistar, nonidle, rest or thinned)");
}

double ExperimentConfig::effective_burn_in() const {
  if (burn_in) return *burn_in;
  return std::min(std::max(50.0 / mu(), 50.0 / lambda), 0.5 * horizon);
}

double ExperimentConfig::effective_fluid_dx() const {
  return fluid_dx ? *fluid_dx : FluidModel::default_dx(service, patience);
}

void ExperimentConfig::validate() const {
  if (schema_version != kSchemaVersion)
    throw ConfigError("schema_version: unsupported version " + std::to_string(schema_version));
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw ConfigError("lambda: must be > 0");
  if (interarrival.role() != Role::Interarrival) throw ConfigError("distributions.interarrival: wrong role");
  if (service.role() != Role::Service) throw ConfigError("distributions.service: wrong role");
  if (patience.role() != Role::Patience) throw ConfigError("distributions.patience: wrong role");
  cost.validate();
  if (policies.empty()) throw ConfigError("policies: at least one policy is required");
  for (const auto& p : policies) {
    if (p.p && !(*p.p > 0.0 && *p.p <= 1.0)) throw ConfigError("policies: admission probability must lie in (0, 1]");
    if (p.rest_duration && !(*p.rest_duration >= 0.0)) throw ConfigError("policies: rest_duration must be >= 0");
  }
  if (n_values.empty()) throw ConfigError("n_values: must be nonempty");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 1) throw ConfigError("n_values: entries must be >= 1");
    if (i > 0 && n_values[i] <= n_values[i - 1]) throw ConfigError("n_values: must be strictly increasing");
  }
  if (!(std::isfinite(horizon) && horizon > 0.0)) throw ConfigError("horizon: must be > 0");
  const double bi = effective_burn_in();
  if (!(bi >= 0.0)) throw ConfigError("burn_in: must be >= 0");
  if (!(horizon > bi)) throw ConfigError("horizon: must exceed burn_in");
  if (replications < 1) throw ConfigError("replications: must be >= 1");
  if (fluid_dx && !(std::isfinite(*fluid_dx) && *fluid_dx > 0.0)) throw ConfigError("fluid.dx: must be > 0");
  if (!(std::isfinite(fluid_horizon) && fluid_horizon >= 0.0)) throw ConfigError("fluid.horizon: must be >= 0");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": <syntax>: " + e.msg);
  }
  const Reader r(source);
  if (!root.IsDefined() || root.IsNull()) throw ConfigError(source + ": <root>: empty config");
  r.only_keys(root, "", {"schema_version", "lambda", "distributions", "cost", "policies", "n_values", "horizon",
                         "burn_in", "replications", "master_seed", "fluid"});

  ExperimentConfig cfg;
  {
    const YAML::Node v = r.child(root, "", "schema_version", true);
    const long long ver = r.integer(v, "schema_version");
    if (ver != kSchemaVersion) r.fail(v, "schema_version", "unsupported version " + std::to_string(ver));
    cfg.schema_version = static_cast<int>(ver);
  }
  {
    const YAML::Node v = r.child(root, "", "lambda", true);
    cfg.lambda = r.number(v, "lambda");
    if (!(cfg.lambda > 0.0)) r.fail(v, "lambda", "must be > 0");
  }

  const YAML::Node dist = r.child(root, "", "distributions", true);
  r.only_keys(dist, "distributions", {"interarrival", "service", "patience"});
  if (YAML::Node ia = r.child(dist, "distributions", "interarrival", false); ia.IsDefined()) {
    cfg.interarrival = read_distribution(r, ia, "distributions.interarrival", Role::Interarrival);
  }
  cfg.service = read_distribution(r, r.child(dist, "distributions", "service", true), "distributions.service",
                                  Role::Service);
  cfg.patience = read_distribution(r, r.child(dist, "distributions", "patience", true), "distributions.patience",
                                   Role::Patience);

  if (YAML::Node cost = r.child(root, "", "cost", false); cost.IsDefined()) {
    r.only_keys(cost, "cost", {"a", "c", "utilization", "assume_dfr"});
    if (YAML::Node v = r.child(cost, "cost", "a", false); v.IsDefined()) cfg.cost.a = r.number(v, "cost.a");
    if (YAML::Node v = r.child(cost, "cost", "c", false); v.IsDefined()) cfg.cost.c = r.number(v, "cost.c");
    if (YAML::Node v = r.child(cost, "cost", "utilization", false); v.IsDefined())
      cfg.cost.utilization = read_utilization(r, v, "cost.utilization");
    if (YAML::Node v = r.child(cost, "cost", "assume_dfr", false); v.IsDefined())
      cfg.assume_dfr = r.boolean(v, "cost.assume_dfr");
    try {
      cfg.cost.validate();
    } catch (const Error& e) {
      r.fail(cost, "cost", e.what());
    }
  }

  if (YAML::Node pol = r.child(root, "", "policies", false); pol.IsDefined()) {
    if (!pol.IsSequence() || pol.size() == 0) r.fail(pol, "policies", "expected a nonempty list");
    cfg.policies.clear();
    for (std::size_t i = 0; i < pol.size(); ++i)
      cfg.policies.push_back(read_policy(r, pol[i], "policies[" + std::to_string(i) + "]"));
  }

  if (YAML::Node nv = r.child(root, "", "n_values", false); nv.IsDefined()) {
    if (!nv.IsSequence() || nv.size() == 0) r.fail(nv, "n_values", "expected a nonempty list");
    cfg.n_values.clear();
    for (std::size_t i = 0; i < nv.size(); ++i) {
      const std::string f = "n_values[" + std::to_string(i) + "]";
      const long long n = r.integer(nv[i], f);
      if (n < 1 || n > 100'000'000) r.fail(nv[i], f, "must be a positive integer");
      if (!cfg.n_values.empty() && n <= cfg.n_values.back()) r.fail(nv[i], f, "n_values must be strictly increasing");
      cfg.n_values.push_back(static_cast<int>(n));
    }
  }

  if (YAML::Node v = r.child(root, "", "horizon", false); v.IsDefined()) {
    cfg.horizon = r.number(v, "horizon");
    if (!(cfg.horizon > 0.0)) r.fail(v, "horizon", "must be > 0");
  }
  if (YAML::Node v = r.child(root, "", "burn_in", false); v.IsDefined()) {
    cfg.burn_in = r.number(v, "burn_in");
    if (!(*cfg.burn_in >= 0.0)) r.fail(v, "burn_in", "must be >= 0");
    if (!(cfg.horizon > *cfg.burn_in)) r.fail(v, "burn_in", "horizon must exceed burn_in");
  }
  if (YAML::Node v = r.child(root, "", "replications", false); v.IsDefined()) {
    const long long reps = r.integer(v, "replications");
    if (reps < 1 || reps > 1'000'000) r.fail(v, "replications", "must be a positive integer");
    cfg.replications = static_cast<int>(reps);
  }
  if (YAML::Node v = r.child(root, "", "master_seed", false); v.IsDefined())
    cfg.master_seed = r.unsigned_integer(v, "master_seed");

  if (YAML::Node fl = r.child(root, "", "fluid", false); fl.IsDefined()) {
    r.only_keys(fl, "fluid", {"dx", "horizon"});
    if (YAML::Node v = r.child(fl, "fluid", "dx", false); v.IsDefined()) {
      cfg.fluid_dx = r.number(v, "fluid.dx");
      if (!(*cfg.fluid_dx > 0.0)) r.fail(v, "fluid.dx", "must be > 0");
    }
    if (YAML::Node v = r.child(fl, "fluid", "horizon", false); v.IsDefined()) {
      cfg.fluid_horizon = r.number(v, "fluid.horizon");
      if (!(cfg.fluid_horizon >= 0.0)) r.fail(v, "fluid.horizon", "must be >= 0");
    }
  }

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string emit_config(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << cfg.schema_version;
  out << YAML::Key << "lambda" << YAML::Value << cfg.lambda;
  out << YAML::Key << "distributions" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "interarrival" << YAML::Value;
  emit_distribution(out, cfg.interarrival);
  out << YAML::Key << "service" << YAML::Value;
  emit_distribution(out, cfg.service);
  out << YAML::Key << "patience" << YAML::Value;
  emit_distribution(out, cfg.patience);
  out << YAML::EndMap;

  out << YAML::Key << "cost" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "a" << YAML::Value << cfg.cost.a;
  out << YAML::Key << "c" << YAML::Value << cfg.cost.c;
  out << YAML::Key << "utilization" << YAML::Value << YAML::Flow << YAML::BeginMap;
  std::visit(overloaded{
                 [&](const QuadraticCost& q) {
                   out << YAML::Key << "kind" << YAML::Value << "quadratic" << YAML::Key << "coeff" << YAML::Value
                       << q.coeff;
                 },
                 [&](const PowerCost& p) {
                   out << YAML::Key << "kind" << YAML::Value << "power" << YAML::Key << "coeff" << YAML::Value
                       << p.coeff << YAML::Key << "exponent" << YAML::Value << p.exponent;
                 },
                 [&](const PiecewiseLinearCost& pl) {
                   out << YAML::Key << "kind" << YAML::Value << "piecewise_linear" << YAML::Key << "knots"
                       << YAML::Value << YAML::BeginSeq;
                   for (const auto& [b, g] : pl.knots) out << YAML::Flow << std::vector<double>{b, g};
                   out << YAML::EndSeq;
                 },
             },
             cfg.cost.utilization);
  out << YAML::EndMap;
  out << YAML::Key << "assume_dfr" << YAML::Value << cfg.assume_dfr;
  out << YAML::EndMap;

  out << YAML::Key << "policies" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : cfg.policies) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << p.name();
    if (p.choice == PolicyChoice::Thinned && p.p) out << YAML::Key << "p" << YAML::Value << *p.p;
    if (p.choice == PolicyChoice::Rest && p.rest_duration)
      out << YAML::Key << "rest_duration" << YAML::Value << *p.rest_duration;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "n_values" << YAML::Value << YAML::Flow << cfg.n_values;
  out << YAML::Key << "horizon" << YAML::Value << cfg.horizon;
  if (cfg.burn_in) out << YAML::Key << "burn_in" << YAML::Value << *cfg.burn_in;
  out << YAML::Key << "replications" << YAML::Value << cfg.replications;
  out << YAML::Key << "master_seed" << YAML::Value << cfg.master_seed;
  out << YAML::Key << "fluid" << YAML::Value << YAML::BeginMap;
  if (cfg.fluid_dx) out << YAML::Key << "dx" << YAML::Value << *cfg.fluid_dx;
  out << YAML::Key << "horizon" << YAML::Value << cfg.fluid_horizon;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

FluidDesign design_for(const ExperimentConfig& cfg) {
  return solve_fluid_hc(cfg.lambda, cfg.mu(), cfg.patience, cfg.cost, cfg.assume_dfr);
}

PolicySpec resolve_policy(const PolicyConfig& policy, const FluidDesign& design) {
  switch (policy.choice) {
    case PolicyChoice::PiStar:
      return PolicySpec::thinned(design.p_star);
    case PolicyChoice::NonIdling:
      return PolicySpec::non_idling();
    case PolicyChoice::Thinned:
      return PolicySpec::thinned(policy.p.value_or(1.0));
    case PolicyChoice::Rest: {
      if (policy.rest_duration) return PolicySpec::rest(*policy.rest_duration);
      if (design.b_star <= 0.0) throw DomainError("rest policy: b* is 0, no finite default rest duration");
      return PolicySpec::rest((1.0 - design.b_star) / (design.b_star * design.mu));
    }
  }
  throw DomainError("unknown policy");
}

SimParams make_sim_params(const ExperimentConfig& cfg, int n, const PolicySpec& policy) {
  SimParams sp;
  sp.n = n;
  sp.lambda = cfg.lambda;
  sp.interarrival = cfg.interarrival;
  sp.service = cfg.service;
  sp.patience = cfg.patience;
  sp.policy = policy;
  sp.cost = cfg.cost;
  sp.horizon = cfg.horizon;
  sp.burn_in = cfg.effective_burn_in();
  sp.seed = cfg.master_seed;
  return sp;
}

}  // namespace idleq
