#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "idleq/distributions.hpp"

namespace idleq {

// g_U(b) = coeff * b^exponent
struct PowerCost {
  double coeff;
  double exponent;
};
// g_U(b) = coeff * b^2
struct QuadraticCost {
  double coeff;
};
// Linear interpolation through (b, g_U(b)) knots; first knot at b = 0, last at b = 1.
struct PiecewiseLinearCost {
  std::vector<std::pair<double, double>> knots;
};

using UtilizationCost = std::variant<PowerCost, QuadraticCost, PiecewiseLinearCost>;

double evaluate(const UtilizationCost& g, double b);
std::string_view kind_name(const UtilizationCost& g);

/// Cost rates: `a` per abandoned or rejected customer, `c` per waiting
/// customer per unit time, and a utilization cost on the busy fraction.
struct CostModel {
  double a = 1.0;
  double c = 0.0;
  UtilizationCost utilization = QuadraticCost{1.0};

  double g(double b) const { return evaluate(utilization, b); }

  // Throws ConfigError for bad a/c and InvalidCost when g_U is not
  // nonnegative, strictly increasing and convex on a 1e3-point probe.
  void validate() const;
};

enum class Regime { NonIdlingOptimal, IdlingOptimal };
std::string_view to_string(Regime r);

struct FluidDesign {
  double lambda = 0.0;
  double mu = 0.0;
  double b_star = 0.0;
  double p_star = 1.0;
  double fluid_cost = 0.0;
  Regime regime = Regime::NonIdlingOptimal;
  // q(b_star, 1); set whenever the solver had a patience law to work with.
  std::optional<double> q_at_optimum;
  // b_star == 0 forces p_star to the clamp floor kMinAdmission.
  bool degenerate_all_reject = false;
  bool uniqueness_guaranteed = true;
  std::vector<std::string> warnings;
};

inline constexpr double kMinAdmission = 1e-9;

struct CostBreakdown {
  double rejection = 0.0;
  double abandonment = 0.0;
  double holding = 0.0;
  double compensator = 0.0;
  double utilization = 0.0;

  double total() const { return rejection + abandonment + holding + compensator + utilization; }
};

// Minimizes a unimodal f on [lo, hi] to an interval of width `tol`, then
// compares against both endpoints. Ties resolve to the leftmost point.
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-10);

// Upper end of the feasible busy fraction range, min(1, p*lambda/mu).
inline double max_busy_fraction(double p, double lambda, double mu) {
  const double r = p * lambda / mu;
  return r < 1.0 ? r : 1.0;
}

FluidDesign solve_fluid(double lambda, double mu, const CostModel& cost);

// Invariant fluid queue length when arrivals are thinned to p*lambda and the
// servers are busy a fraction b of the time.
double invariant_queue_length(double b, double p, double lambda, double mu, const DistributionSpec& patience);

// c * (q(b, 1) - q(b, p)): holding cost charged for rejected arrivals.
double holding_compensator(double b, double p, double lambda, double mu, const DistributionSpec& patience, double c);

FluidDesign solve_fluid_hc(double lambda, double mu, const DistributionSpec& patience, const CostModel& cost,
                           bool assume_dfr);

CostBreakdown fluid_cost_breakdown(const FluidDesign& design, double lambda, double mu,
                                   const DistributionSpec& patience, const CostModel& cost);

// Same, at an arbitrary (b, p) operating point.
CostBreakdown fluid_cost_breakdown(double b, double p, double lambda, double mu, const DistributionSpec& patience,
                                   const CostModel& cost);

}  // namespace idleq
