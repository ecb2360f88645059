#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "idleq/rng.hpp"

namespace idleq {

enum class Role { Interarrival, Service, Patience };

std::string_view to_string(Role role);

struct Exponential {
  double rate;
};
struct Erlang {
  int shape;
  double rate;
};
struct HyperExponential {
  std::vector<double> weights;
  std::vector<double> rates;
};
struct LogNormal {
  double mu;
  double sigma;
};
struct UniformShifted {
  double lo;
  double hi;
};
struct Weibull {
  double shape;
  double scale;
};

using Family = std::variant<Exponential, Erlang, HyperExponential, LogNormal, UniformShifted, Weibull>;

std::string_view family_name(const Family& family);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Hazard ceiling used by the bounded-hazard probe for patience laws.
inline constexpr double kMaxPatienceHazard = 1e6;

/// An absolutely continuous law on [0, inf) with every functional the cost
/// and fluid formulas consume. Immutable once built; parameters are checked
/// in the constructor and a Patience role additionally requires a bounded
/// hazard rate.
class DistributionSpec {
 public:
  DistributionSpec(Family family, Role role);

  static DistributionSpec exponential(double rate, Role role = Role::Service) {
    return {Exponential{rate}, role};
  }
  static DistributionSpec erlang(int shape, double rate, Role role = Role::Service) {
    return {Erlang{shape, rate}, role};
  }
  static DistributionSpec hyperexponential(std::vector<double> weights, std::vector<double> rates,
                                           Role role = Role::Service) {
    return {HyperExponential{std::move(weights), std::move(rates)}, role};
  }
  static DistributionSpec lognormal(double mu, double sigma, Role role = Role::Service) {
    return {LogNormal{mu, sigma}, role};
  }
  static DistributionSpec uniform(double lo, double hi, Role role = Role::Service) {
    return {UniformShifted{lo, hi}, role};
  }
  static DistributionSpec weibull(double shape, double scale, Role role = Role::Service) {
    return {Weibull{shape, scale}, role};
  }

  const Family& family() const noexcept { return family_; }
  Role role() const noexcept { return role_; }

  double cdf(double x) const;
  // 1 - cdf(x), evaluated without cancellation.
  double survival(double x) const;
  double pdf(double x) const;
  // pdf / survival. Throws PastSupportEdge once the survival underflows.
  double hazard(double x) const;
  // -log(survival(x)); the integral of the hazard over [0, x].
  double cumulative_hazard(double x) const;

  // Returns right_edge() for u == 1 (kInfinity for unbounded support).
  double inverse_cdf(double u) const;
  // The x with survival(x) == s; accurate for tiny s.
  double inverse_survival(double s) const;

  double mean() const;
  double right_edge() const;

  // Integral of survival over [0, upper]; upper may be kInfinity.
  double survival_integral(double upper) const;

  double sample(RngStream& rng) const;

  // Numerical probe (plus per-family short cuts) for a non-increasing hazard.
  // Throws AssumptionViolated when an increase larger than 1e-9 is found.
  void require_nonincreasing_hazard() const;
  bool has_nonincreasing_hazard() const;

  // Largest hazard seen on the probe grid; kInfinity for analytically
  // unbounded families.
  double probe_hazard_sup() const;

  std::string describe() const;

 private:
  double bisect_cdf(double u) const;
  double bisect_survival(double s) const;

  Family family_;
  Role role_;
};

}  // namespace idleq
