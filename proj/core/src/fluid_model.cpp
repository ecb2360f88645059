#include "idleq/fluid_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "idleq/errors.hpp"

namespace idleq {

namespace {

constexpr double kGridTail = 1e-8;
constexpr double kOverflowMass = 1e-8;

std::vector<double> survival_ratios(const DistributionSpec& law, double dx) {
  const double top = law.inverse_survival(kGridTail);
  const auto cells = static_cast<std::size_t>(std::ceil(top / dx)) + 1;
  std::vector<double> ratio(cells);
  double prev = 1.0;
  for (std::size_t j = 0; j < cells; ++j) {
    const double next = law.survival(static_cast<double>(j + 1) * dx);
    ratio[j] = prev > 0.0 ? next / prev : 0.0;
    prev = next;
  }
  return ratio;
}

// Simpson average of the survival function over cell j.
double cell_average_survival(const DistributionSpec& law, std::size_t j, double dx) {
  const double x0 = static_cast<double>(j) * dx;
  return (law.survival(x0) + 4.0 * law.survival(x0 + 0.5 * dx) + law.survival(x0 + dx)) / 6.0;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Shifts cell masses one cell older. Returns the mass lost to the hazard
// (including anything pushed past the last cell); `outflow` receives the
// part that left the grid.
double shift(std::vector<double>& mass, const std::vector<double>& ratio, double& outflow) {
  const std::size_t n = mass.size();
  double lost = 0.0;
  outflow = mass[n - 1] * ratio[n - 1];
  lost += mass[n - 1];
  for (std::size_t j = n - 1; j-- > 0;) {
    const double moved = mass[j] * ratio[j];
    lost += mass[j] - moved;
    mass[j + 1] = moved;
  }
  mass[0] = 0.0;
  return lost;
}

}  // namespace

double FluidState::eta_mass() const { return sum(eta_density) * dx; }

double chi_quantile(const FluidState& s) {
  if (s.Q <= 0.0) return 0.0;
  double cum = 0.0;
  for (std::size_t j = 0; j < s.eta_density.size(); ++j) {
    const double m = s.eta_density[j] * s.dx;
    if (cum + m >= s.Q) {
      const double frac = m > 0.0 ? (s.Q - cum) / m : 0.0;
      return (static_cast<double>(j) + std::clamp(frac, 0.0, 1.0)) * s.dx;
    }
    cum += m;
  }
  return static_cast<double>(s.eta_density.size()) * s.dx;
}

FluidModel::FluidModel(DistributionSpec service, DistributionSpec patience, double dx)
    : service_(std::move(service)), patience_(std::move(patience)), dx_(dx) {
  if (!(std::isfinite(dx) && dx > 0.0)) throw ConfigError("fluid model: dx must be > 0");
  service_ratio_ = survival_ratios(service_, dx_);
  patience_ratio_ = survival_ratios(patience_, dx_);
}

double FluidModel::default_dx(const DistributionSpec& service, const DistributionSpec& patience) {
  return std::min(service.mean(), patience.mean()) / 200.0;
}

void FluidModel::refresh(FluidState& s) const {
  s.B = sum(s.nu_density) * s.dx;
  s.Q = sum(s.queue_density) * s.dx;
  s.X = s.B + s.Q;
  s.I = 1.0 - s.B;
  s.chi = chi_quantile(s);
}

FluidState FluidModel::empty_state() const {
  FluidState s;
  s.dx = dx_;
  s.nu_density.assign(service_cells(), 0.0);
  s.eta_density.assign(patience_cells(), 0.0);
  s.queue_density.assign(patience_cells(), 0.0);
  refresh(s);
  return s;
}

FluidState FluidModel::from_densities(std::vector<double> nu_density, std::vector<double> eta_density,
                                      double queue_mass) const {
  auto fit = [this](std::vector<double>& v, std::size_t cells, const char* what) {
    for (double d : v) {
      if (!(std::isfinite(d) && d >= 0.0)) throw ConfigError(std::string("fluid state: ") + what + " density must be >= 0");
    }
    if (v.size() > cells) {
      const double excess = std::accumulate(v.begin() + static_cast<long>(cells), v.end(), 0.0) * dx_;
      if (excess > kOverflowMass) throw GridOverflow(std::string("fluid state: ") + what + " mass beyond the age grid");
      v.resize(cells);
    }
    v.resize(cells, 0.0);
  };
  fit(nu_density, service_cells(), "nu");
  fit(eta_density, patience_cells(), "eta");

  FluidState s;
  s.dx = dx_;
  s.nu_density = std::move(nu_density);
  s.eta_density = std::move(eta_density);
  s.queue_density.assign(patience_cells(), 0.0);

  if (queue_mass < 0.0) throw ConfigError("fluid state: queue mass must be >= 0");
  if (s.nu_density.empty() || sum(s.nu_density) * dx_ > 1.0 + 1e-12)
    throw ConfigError("fluid state: busy mass exceeds 1");
  double remaining = queue_mass;
  for (std::size_t j = 0; j < s.eta_density.size() && remaining > 0.0; ++j) {
    const double m = s.eta_density[j] * dx_;
    const double take = std::min(m, remaining);
    s.queue_density[j] = take / dx_;
    remaining -= take;
  }
  if (remaining > 1e-12) throw ConfigError("fluid state: queue mass exceeds eta mass");
  refresh(s);
  return s;
}

FluidState FluidModel::invariant_state(double b, double p, double lambda) const {
  const double mu = 1.0 / service_.mean();
  const double q = invariant_queue_length(b, p, lambda, mu, patience_);

  std::vector<double> nu(service_cells());
  for (std::size_t j = 0; j < nu.size(); ++j) nu[j] = cell_average_survival(service_, j, dx_);
  const double scale = sum(nu) * dx_;
  for (double& v : nu) v = scale > 0.0 ? v * b / scale : 0.0;

  std::vector<double> eta(patience_cells());
  for (std::size_t j = 0; j < eta.size(); ++j) eta[j] = p * lambda * cell_average_survival(patience_, j, dx_);

  return from_densities(std::move(nu), std::move(eta), q);
}

FluidState FluidModel::step(const FluidState& state, double arrival_rate, const FluidPolicy& policy) const {
  if (!(arrival_rate >= 0.0)) throw ConfigError("fluid step: arrival rate must be >= 0");
  if (state.dx != dx_) throw ConfigError("fluid step: state grid does not match the model");
  FluidState s = state;
  const double dx = dx_;

  // Work on cell masses.
  for (double& v : s.nu_density) v *= dx;
  for (double& v : s.eta_density) v *= dx;
  for (double& v : s.queue_density) v *= dx;

  double out_nu = 0.0;
  double out_eta = 0.0;
  double out_queue = 0.0;
  const double departed = shift(s.nu_density, service_ratio_, out_nu);
  shift(s.eta_density, patience_ratio_, out_eta);
  const double abandoned = shift(s.queue_density, patience_ratio_, out_queue);
  if (out_nu > kOverflowMass || out_queue > kOverflowMass || out_eta > kOverflowMass) {
    throw GridOverflow("fluid step: surviving mass left the age grid at t=" + std::to_string(s.t));
  }

  const double arrived = arrival_rate * dx;
  s.eta_density[0] = arrived;
  s.queue_density[0] = arrived;

  double busy = sum(s.nu_density);
  double queued = sum(s.queue_density);
  const double room = policy.kind == FluidPolicyKind::NonIdling ? 1.0 - busy : policy.cap - busy;
  const double entering = std::clamp(std::min(room, queued), 0.0, queued);

  // Head-of-line: drain the oldest waiting mass first.
  double left = entering;
  for (std::size_t j = s.queue_density.size(); j-- > 0 && left > 0.0;) {
    const double take = std::min(s.queue_density[j], left);
    s.queue_density[j] -= take;
    left -= take;
  }
  s.nu_density[0] += entering - left;

  s.t += dx;
  s.E += arrived;
  s.D += departed;
  s.R += abandoned;
  s.K += entering - left;

  for (double& v : s.nu_density) v /= dx;
  for (double& v : s.eta_density) v /= dx;
  for (double& v : s.queue_density) v /= dx;
  refresh(s);
  return s;
}

FluidTrajectory FluidModel::integrate(const FluidState& initial, double horizon, double arrival_rate,
                                      const FluidPolicy& policy, const CostModel* cost) const {
  if (!(horizon >= 0.0)) throw ConfigError("fluid integrate: horizon must be >= 0");
  FluidTrajectory traj;
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dx_));

  const double x0 = initial.X;
  const double b0 = initial.B;
  const double r0 = initial.R;
  const double d0 = initial.D;
  const double e0 = initial.E;
  const double k0 = initial.K;
  double prev_k = initial.K;

  auto residual = [&](const FluidState& s) {
    double r = std::abs((s.X - x0) - (s.E - e0) + (s.R - r0) + (s.D - d0));
    r = std::max(r, std::abs((s.K - k0) - (s.B + (s.D - d0) - b0)));
    r = std::max(r, std::max(0.0, prev_k - s.K - 1e-12));
    r = std::max(r, std::max(0.0, s.B - 1.0 - 1e-12));
    r = std::max(r, std::max(0.0, -s.B));
    r = std::max(r, std::max(0.0, s.B - s.X));
    r = std::max(r, std::max(0.0, s.X - s.B - s.eta_mass()));
    if (policy.kind == FluidPolicyKind::NonIdling) r = std::max(r, std::abs(s.I - std::max(0.0, 1.0 - s.X)));
    return r;
  };
  auto sample = [&](const FluidState& s, double res) {
    return FluidSample{s.t, s.X, s.B, s.Q, s.chi, s.R, s.D, s.K, s.I, res};
  };

  traj.samples.reserve(steps + 1);
  traj.samples.push_back(sample(initial, 0.0));
  FluidState s = initial;
  for (std::size_t i = 0; i < steps; ++i) {
    s = step(s, arrival_rate, policy);
    const double res = residual(s);
    prev_k = s.K;
    traj.max_residual = std::max(traj.max_residual, res);
    traj.samples.push_back(sample(s, res));
    if (cost != nullptr) {
      traj.utilization_cost += cost->g(std::clamp(s.B, 0.0, 1.0)) * dx_;
      traj.holding_cost += cost->c * s.Q * dx_;
    }
  }
  if (cost != nullptr) traj.abandonment_cost = cost->a * (s.R - r0);
  traj.final_state = std::move(s);
  return traj;
}

}  // namespace idleq
