#pragma once

#include <vector>

#include "idleq/distributions.hpp"
#include "idleq/fluid_control.hpp"

namespace idleq {

enum class FluidPolicyKind { NonIdling, BusyCap };

struct FluidPolicy {
  FluidPolicyKind kind = FluidPolicyKind::NonIdling;
  double cap = 1.0;  // busy fraction ceiling for BusyCap

  static FluidPolicy non_idling() { return {FluidPolicyKind::NonIdling, 1.0}; }
  static FluidPolicy busy_cap(double b) { return {FluidPolicyKind::BusyCap, b}; }
};

/// Age-discretized fluid state. Densities are mass per unit age on cells
/// [j*dx, (j+1)*dx). `queue_density` is the part of eta still waiting; under
/// head-of-line service it always sits on the youngest ages.
struct FluidState {
  double t = 0.0;
  double dx = 0.0;
  std::vector<double> nu_density;
  std::vector<double> eta_density;
  std::vector<double> queue_density;

  double X = 0.0;
  double B = 0.0;
  double Q = 0.0;
  double chi = 0.0;
  double I = 1.0;
  double R = 0.0;
  double D = 0.0;
  double K = 0.0;
  double E = 0.0;

  double eta_mass() const;
};

// Smallest age x with eta mass on [0, x] >= Q, interpolated inside the
// crossing cell; 0 when Q is 0.
double chi_quantile(const FluidState& state);

struct FluidSample {
  double t = 0.0;
  double X = 0.0;
  double B = 0.0;
  double Q = 0.0;
  double chi = 0.0;
  double R = 0.0;
  double D = 0.0;
  double K = 0.0;
  double I = 0.0;
  double residual = 0.0;
};

struct FluidTrajectory {
  std::vector<FluidSample> samples;  // initial state first, then one per step
  FluidState final_state;
  double utilization_cost = 0.0;  // integral of g_U(B)
  double abandonment_cost = 0.0;  // a * R over the run
  double holding_cost = 0.0;      // c * integral of Q
  double max_residual = 0.0;
};

class FluidModel {
 public:
  FluidModel(DistributionSpec service, DistributionSpec patience, double dx);

  // min(1/mu, 1/theta) / 200
  static double default_dx(const DistributionSpec& service, const DistributionSpec& patience);

  double dx() const { return dx_; }
  std::size_t service_cells() const { return service_ratio_.size(); }
  std::size_t patience_cells() const { return patience_ratio_.size(); }
  const DistributionSpec& service() const { return service_; }
  const DistributionSpec& patience() const { return patience_; }

  FluidState empty_state() const;

  // Invariant state for busy fraction b under arrivals thinned to p*lambda:
  // nu proportional to the service survival with mass b, eta equal to
  // p*lambda times the patience survival (both as cell averages), and the
  // youngest q(b, p) of eta waiting. The scheme's own fixed point differs
  // from this by O(dx).
  FluidState invariant_state(double b, double p, double lambda) const;

  // Builds a state from densities; queue mass is taken from the youngest eta
  // ages. Vectors shorter than the grid are zero padded.
  FluidState from_densities(std::vector<double> nu_density, std::vector<double> eta_density, double queue_mass) const;

  // One characteristic step of length dx.
  FluidState step(const FluidState& state, double arrival_rate, const FluidPolicy& policy) const;

  FluidTrajectory integrate(const FluidState& initial, double horizon, double arrival_rate,
                            const FluidPolicy& policy, const CostModel* cost = nullptr) const;

 private:
  void refresh(FluidState& s) const;

  DistributionSpec service_;
  DistributionSpec patience_;
  double dx_;
  std::vector<double> service_ratio_;   // S(x_{j+1}) / S(x_j)
  std::vector<double> patience_ratio_;
};

}  // namespace idleq
