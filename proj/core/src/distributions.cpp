#include "idleq/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "idleq/errors.hpp"

namespace idleq {

namespace {

// Panels are short and smooth; deeper recursion only chases roundoff on
// tiny estimates, where the relative tolerance never triggers.
constexpr unsigned kQuadratureDepth = 10;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kProbeTail = 1e-9;
constexpr int kProbePoints = 10000;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void validate(const Family& family) {
  std::visit(overloaded{
                 [](const Exponential& f) {
                   if (!positive_finite(f.rate)) throw ConfigError("exponential: rate must be > 0");
                 },
                 [](const Erlang& f) {
                   if (f.shape < 1) throw ConfigError("erlang: shape must be a positive integer");
                   if (!positive_finite(f.rate)) throw ConfigError("erlang: rate must be > 0");
                 },
                 [](const HyperExponential& f) {
                   if (f.weights.empty() || f.weights.size() != f.rates.size())
                     throw ConfigError("hyperexponential: weights and rates must be nonempty and equal length");
                   double total = 0.0;
                   for (std::size_t i = 0; i < f.weights.size(); ++i) {
                     if (!std::isfinite(f.weights[i]) || f.weights[i] <= 0.0)
                       throw ConfigError("hyperexponential: weights must be > 0");
                     if (!positive_finite(f.rates[i])) throw ConfigError("hyperexponential: rates must be > 0");
                     total += f.weights[i];
                   }
                   if (std::abs(total - 1.0) > 1e-12) throw ConfigError("hyperexponential: weights must sum to 1");
                 },
                 [](const LogNormal& f) {
                   if (!std::isfinite(f.mu)) throw ConfigError("lognormal: mu must be finite");
                   if (!positive_finite(f.sigma)) throw ConfigError("lognormal: sigma must be > 0");
                 },
                 [](const UniformShifted& f) {
                   if (!std::isfinite(f.lo) || f.lo < 0.0) throw ConfigError("uniform: lo must be >= 0");
                   if (!std::isfinite(f.hi) || f.hi <= f.lo) throw ConfigError("uniform: hi must exceed lo");
                 },
                 [](const Weibull& f) {
                   if (!positive_finite(f.shape)) throw ConfigError("weibull: shape must be > 0");
                   if (!positive_finite(f.scale)) throw ConfigError("weibull: scale must be > 0");
                 },
             },
             family);
}

// Hyperexponential sums with the slowest exponential factored out, so the
// hazard stays finite far in the tail.
struct ShiftedMix {
  double slowest;
  double weight_sum;       // sum w_i e^{-(r_i - slowest) x}
  double weighted_rate;    // sum w_i r_i e^{-(r_i - slowest) x}
};

ShiftedMix shifted_mix(const HyperExponential& f, double x) {
  const double slowest = *std::min_element(f.rates.begin(), f.rates.end());
  ShiftedMix m{slowest, 0.0, 0.0};
  for (std::size_t i = 0; i < f.rates.size(); ++i) {
    const double e = std::exp(-(f.rates[i] - slowest) * x);
    m.weight_sum += f.weights[i] * e;
    m.weighted_rate += f.weights[i] * f.rates[i] * e;
  }
  return m;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Interarrival:
      return "interarrival";
    case Role::Service:
      return "service";
    case Role::Patience:
      return "patience";
  }
  return "unknown";
}

std::string_view family_name(const Family& family) {
  return std::visit(overloaded{
                        [](const Exponential&) { return std::string_view("exponential"); },
                        [](const Erlang&) { return std::string_view("erlang"); },
                        [](const HyperExponential&) { return std::string_view("hyperexponential"); },
                        [](const LogNormal&) { return std::string_view("lognormal"); },
                        [](const UniformShifted&) { return std::string_view("uniform"); },
                        [](const Weibull&) { return std::string_view("weibull"); },
                    },
                    family);
}

DistributionSpec::DistributionSpec(Family family, Role role) : family_(std::move(family)), role_(role) {
  validate(family_);
  if (role_ == Role::Patience) {
    const double sup = probe_hazard_sup();
    if (!(sup <= kMaxPatienceHazard)) {
      throw AssumptionViolated("patience law " + describe() +
                               " has an unbounded hazard rate (probe sup " + std::to_string(sup) + ")");
    }
  }
}

double DistributionSpec::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return std::visit(overloaded{
                        [x](const Exponential& f) { return -std::expm1(-f.rate * x); },
                        [x](const Erlang& f) { return boost::math::gamma_p(f.shape, f.rate * x); },
                        [x](const HyperExponential& f) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < f.rates.size(); ++i)
                            acc += f.weights[i] * -std::expm1(-f.rates[i] * x);
                          return acc;
                        },
                        [x](const LogNormal& f) {
                          return 0.5 * std::erfc(-(std::log(x) - f.mu) / (f.sigma * kSqrt2));
                        },
                        [x](const UniformShifted& f) { return std::clamp((x - f.lo) / (f.hi - f.lo), 0.0, 1.0); },
                        [x](const Weibull& f) { return -std::expm1(-std::pow(x / f.scale, f.shape)); },
                    },
                    family_);
}

double DistributionSpec::survival(double x) const {
  if (x <= 0.0) return 1.0;
  return std::visit(overloaded{
                        [x](const Exponential& f) { return std::exp(-f.rate * x); },
                        [x](const Erlang& f) { return boost::math::gamma_q(f.shape, f.rate * x); },
                        [x](const HyperExponential& f) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < f.rates.size(); ++i)
                            acc += f.weights[i] * std::exp(-f.rates[i] * x);
                          return acc;
                        },
                        [x](const LogNormal& f) {
                          return 0.5 * std::erfc((std::log(x) - f.mu) / (f.sigma * kSqrt2));
                        },
                        [x](const UniformShifted& f) { return std::clamp((f.hi - x) / (f.hi - f.lo), 0.0, 1.0); },
                        [x](const Weibull& f) { return std::exp(-std::pow(x / f.scale, f.shape)); },
                    },
                    family_);
}

double DistributionSpec::pdf(double x) const {
  if (x < 0.0) return 0.0;
  return std::visit(overloaded{
                        [x](const Exponential& f) { return f.rate * std::exp(-f.rate * x); },
                        [x](const Erlang& f) {
                          return f.rate * boost::math::gamma_p_derivative(f.shape, f.rate * x);
                        },
                        [x](const HyperExponential& f) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < f.rates.size(); ++i)
                            acc += f.weights[i] * f.rates[i] * std::exp(-f.rates[i] * x);
                          return acc;
                        },
                        [x](const LogNormal& f) {
                          if (x <= 0.0) return 0.0;
                          const double z = (std::log(x) - f.mu) / f.sigma;
                          return std::exp(-0.5 * z * z) / (x * f.sigma * std::sqrt(2.0 * std::numbers::pi));
                        },
                        [x](const UniformShifted& f) { return (x >= f.lo && x < f.hi) ? 1.0 / (f.hi - f.lo) : 0.0; },
                        [x](const Weibull& f) {
                          if (x == 0.0) {
                            if (f.shape < 1.0) return kInfinity;
                            return f.shape == 1.0 ? 1.0 / f.scale : 0.0;
                          }
                          const double z = x / f.scale;
                          return f.shape / f.scale * std::pow(z, f.shape - 1.0) * std::exp(-std::pow(z, f.shape));
                        },
                    },
                    family_);
}

double DistributionSpec::hazard(double x) const {
  if (x < 0.0) x = 0.0;
  return std::visit(overloaded{
                        [](const Exponential& f) { return f.rate; },
                        [this, x](const HyperExponential& f) {
                          const ShiftedMix m = shifted_mix(f, x);
                          if (m.weight_sum == 0.0) throw PastSupportEdge("hazard: survival underflow at " + describe());
                          return m.weighted_rate / m.weight_sum;
                        },
                        [x](const Weibull& f) {
                          if (x == 0.0) {
                            if (f.shape < 1.0) return kInfinity;
                            return f.shape == 1.0 ? 1.0 / f.scale : 0.0;
                          }
                          return f.shape / f.scale * std::pow(x / f.scale, f.shape - 1.0);
                        },
                        [this, x](const UniformShifted& f) {
                          if (x < f.lo) return 0.0;
                          if (x >= f.hi) throw PastSupportEdge("hazard: at or past the right edge of " + describe());
                          return 1.0 / (f.hi - x);
                        },
                        [this, x](const auto&) {
                          const double s = survival(x);
                          if (s <= 0.0) throw PastSupportEdge("hazard: survival underflow at " + describe());
                          return pdf(x) / s;
                        },
                    },
                    family_);
}

double DistributionSpec::cumulative_hazard(double x) const {
  if (x <= 0.0) return 0.0;
  return std::visit(overloaded{
                        [x](const Exponential& f) { return f.rate * x; },
                        [x](const Erlang& f) {
                          // -log(e^{-rx} sum_{j<k} (rx)^j / j!)
                          const double rx = f.rate * x;
                          double term = 1.0;
                          double sum = 1.0;
                          for (int j = 1; j < f.shape; ++j) {
                            term *= rx / j;
                            sum += term;
                          }
                          return rx - std::log(sum);
                        },
                        [x](const HyperExponential& f) {
                          const ShiftedMix m = shifted_mix(f, x);
                          return m.slowest * x - std::log(m.weight_sum);
                        },
                        [x](const Weibull& f) { return std::pow(x / f.scale, f.shape); },
                        [this, x](const auto&) { return -std::log(survival(x)); },
                    },
                    family_);
}

double DistributionSpec::bisect_cdf(double u) const {
  double lo = 0.0;
  double hi = std::max(mean(), 1e-300);
  while (cdf(hi) < u) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double DistributionSpec::bisect_survival(double s) const {
  double lo = 0.0;
  double hi = std::max(mean(), 1e-300);
  while (survival(hi) > s) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (survival(mid) > s) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double DistributionSpec::inverse_cdf(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("inverse_cdf: u must lie in [0, 1]");
  if (u == 1.0) return right_edge();
  if (u > 0.5) return inverse_survival(1.0 - u);  // 1 - u is exact here
  return std::visit(overloaded{
                        [u](const Exponential& f) { return -std::log1p(-u) / f.rate; },
                        [u](const LogNormal& f) {
                          if (u == 0.0) return 0.0;
                          return std::exp(f.mu - f.sigma * kSqrt2 * boost::math::erfc_inv(2.0 * u));
                        },
                        [u](const UniformShifted& f) { return u == 0.0 ? 0.0 : f.lo + u * (f.hi - f.lo); },
                        [u](const Weibull& f) { return f.scale * std::pow(-std::log1p(-u), 1.0 / f.shape); },
                        [this, u](const auto&) { return u == 0.0 ? 0.0 : bisect_cdf(u); },
                    },
                    family_);
}

double DistributionSpec::inverse_survival(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("inverse_survival: s must lie in [0, 1]");
  if (s == 0.0) return right_edge();
  if (s == 1.0) return 0.0;
  return std::visit(overloaded{
                        [s](const Exponential& f) { return -std::log(s) / f.rate; },
                        [s](const LogNormal& f) {
                          return std::exp(f.mu + f.sigma * kSqrt2 * boost::math::erfc_inv(2.0 * s));
                        },
                        [s](const UniformShifted& f) { return f.hi - s * (f.hi - f.lo); },
                        [s](const Weibull& f) { return f.scale * std::pow(-std::log(s), 1.0 / f.shape); },
                        [this, s](const auto&) { return bisect_survival(s); },
                    },
                    family_);
}

double DistributionSpec::mean() const {
  return std::visit(overloaded{
                        [](const Exponential& f) { return 1.0 / f.rate; },
                        [](const Erlang& f) { return f.shape / f.rate; },
                        [](const HyperExponential& f) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < f.rates.size(); ++i) acc += f.weights[i] / f.rates[i];
                          return acc;
                        },
                        [](const LogNormal& f) { return std::exp(f.mu + 0.5 * f.sigma * f.sigma); },
                        [](const UniformShifted& f) { return 0.5 * (f.lo + f.hi); },
                        [](const Weibull& f) { return f.scale * std::tgamma(1.0 + 1.0 / f.shape); },
                    },
                    family_);
}

double DistributionSpec::right_edge() const {
  if (const auto* u = std::get_if<UniformShifted>(&family_)) return u->hi;
  return kInfinity;
}

double DistributionSpec::survival_integral(double upper) const {
  if (std::isnan(upper)) throw DomainError("survival_integral: upper is NaN");
  if (upper <= 0.0) return 0.0;
  if (upper == kInfinity) return mean();

  // E[min(T, upper)] in closed form where one exists.
  if (const auto* e = std::get_if<Exponential>(&family_)) return -std::expm1(-e->rate * upper) / e->rate;
  if (const auto* h = std::get_if<HyperExponential>(&family_)) {
    double acc = 0.0;
    for (std::size_t i = 0; i < h->rates.size(); ++i) acc -= h->weights[i] * std::expm1(-h->rates[i] * upper) / h->rates[i];
    return acc;
  }
  if (const auto* er = std::get_if<Erlang>(&family_)) {
    const double k = er->shape;
    return k / er->rate * boost::math::gamma_p(k + 1.0, er->rate * upper) + upper * survival(upper);
  }

  // Break the range at tail quantiles so each panel sees a well-scaled
  // integrand; the uniform law additionally breaks at its kinks.
  std::vector<double> cuts{0.0};
  if (const auto* u = std::get_if<UniformShifted>(&family_)) {
    cuts.push_back(u->lo);
    cuts.push_back(u->hi);
  } else {
    for (double s : {0.5, 1e-2, 1e-4, 1e-8, 1e-12, 1e-16}) cuts.push_back(inverse_survival(s));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [upper](double c) { return c >= upper; }), cuts.end());
  cuts.push_back(upper);

  auto integrand = [this](double x) { return survival(x); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, cuts[i], cuts[i + 1],
                                                                           kQuadratureDepth, 1e-12);
  }
  return total;
}

double DistributionSpec::sample(RngStream& rng) const {
  return std::visit(overloaded{
                        [&rng](const Exponential& f) { return -std::log(rng.uniform_open0()) / f.rate; },
                        [&rng](const Erlang& f) {
                          double acc = 0.0;
                          for (int i = 0; i < f.shape; ++i) acc -= std::log(rng.uniform_open0());
                          return acc / f.rate;
                        },
                        [&rng](const HyperExponential& f) {
                          const double u = rng.uniform();
                          double cum = 0.0;
                          std::size_t pick = f.weights.size() - 1;
                          for (std::size_t i = 0; i < f.weights.size(); ++i) {
                            cum += f.weights[i];
                            if (u < cum) {
                              pick = i;
                              break;
                            }
                          }
                          return -std::log(rng.uniform_open0()) / f.rates[pick];
                        },
                        [&rng](const LogNormal& f) { return std::exp(f.mu + f.sigma * rng.normal()); },
                        [&rng](const UniformShifted& f) { return f.lo + rng.uniform() * (f.hi - f.lo); },
                        [&rng](const Weibull& f) {
                          return f.scale * std::pow(-std::log(rng.uniform_open0()), 1.0 / f.shape);
                        },
                    },
                    family_);
}

double DistributionSpec::probe_hazard_sup() const {
  if (std::holds_alternative<UniformShifted>(family_)) return kInfinity;
  if (const auto* w = std::get_if<Weibull>(&family_); w && w->shape != 1.0) return kInfinity;
  const double top = inverse_survival(kProbeTail);
  double sup = 0.0;
  for (int i = 0; i <= kProbePoints; ++i) {
    const double h = hazard(top * i / kProbePoints);
    if (!std::isfinite(h)) return kInfinity;
    sup = std::max(sup, h);
  }
  return sup;
}

bool DistributionSpec::has_nonincreasing_hazard() const {
  if (std::holds_alternative<Exponential>(family_)) return true;
  if (const auto* e = std::get_if<Erlang>(&family_)) return e->shape == 1;
  if (std::holds_alternative<UniformShifted>(family_)) return false;
  if (const auto* w = std::get_if<Weibull>(&family_)) return w->shape <= 1.0;
  const double top = inverse_survival(kProbeTail);
  double prev = hazard(0.0);
  for (int i = 1; i <= kProbePoints; ++i) {
    const double h = hazard(top * i / kProbePoints);
    if (h - prev > 1e-9) return false;
    prev = h;
  }
  return true;
}

void DistributionSpec::require_nonincreasing_hazard() const {
  if (!has_nonincreasing_hazard()) {
    throw AssumptionViolated("patience law " + describe() + " does not have a non-increasing hazard rate");
  }
}

std::string DistributionSpec::describe() const {
  std::ostringstream out;
  out.precision(12);
  out << family_name(family_) << '(';
  std::visit(overloaded{
                 [&out](const Exponential& f) { out << "rate=" << f.rate; },
                 [&out](const Erlang& f) { out << "shape=" << f.shape << ", rate=" << f.rate; },
                 [&out](const HyperExponential& f) {
                   out << "weights=[";
                   for (std::size_t i = 0; i < f.weights.size(); ++i) out << (i ? "," : "") << f.weights[i];
                   out << "], rates=[";
                   for (std::size_t i = 0; i < f.rates.size(); ++i) out << (i ? "," : "") << f.rates[i];
                   out << ']';
                 },
                 [&out](const LogNormal& f) { out << "mu=" << f.mu << ", sigma=" << f.sigma; },
                 [&out](const UniformShifted& f) { out << "lo=" << f.lo << ", hi=" << f.hi; },
                 [&out](const Weibull& f) { out << "shape=" << f.shape << ", scale=" << f.scale; },
             },
             family_);
  out << ')';
  return out.str();
}

}  // namespace idleq
