#include "idleq/fluid_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "idleq/errors.hpp"

namespace idleq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr int kCostProbePoints = 1000;
constexpr int kGridScanPoints = 10000;
constexpr double kRegimeTol = 1e-8;

void check_rates(double lambda, double mu) {
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw ConfigError("lambda must be > 0");
  if (!(std::isfinite(mu) && mu > 0.0)) throw ConfigError("mu must be > 0");
}

void finish_design(FluidDesign& d) {
  const double cap = max_busy_fraction(1.0, d.lambda, d.mu);
  d.regime = (cap - d.b_star <= kRegimeTol) ? Regime::NonIdlingOptimal : Regime::IdlingOptimal;
  d.p_star = d.b_star * d.mu / d.lambda;
  if (d.p_star < kMinAdmission) {
    d.p_star = kMinAdmission;
    d.degenerate_all_reject = true;
    d.warnings.emplace_back("b_star is 0: admission probability clamped, every arrival is rejected in the limit");
  }
  d.p_star = std::min(d.p_star, 1.0);
}

}  // namespace

double evaluate(const UtilizationCost& g, double b) {
  return std::visit(overloaded{
                        [b](const PowerCost& p) { return p.coeff * std::pow(b, p.exponent); },
                        [b](const QuadraticCost& q) { return q.coeff * b * b; },
                        [b](const PiecewiseLinearCost& pl) {
                          const auto& k = pl.knots;
                          if (b <= k.front().first) return k.front().second;
                          if (b >= k.back().first) return k.back().second;
                          auto it = std::upper_bound(k.begin(), k.end(), b,
                                                     [](double v, const auto& knot) { return v < knot.first; });
                          const auto& [x1, y1] = *it;
                          const auto& [x0, y0] = *(it - 1);
                          return y0 + (y1 - y0) * (b - x0) / (x1 - x0);
                        },
                    },
                    g);
}

std::string_view kind_name(const UtilizationCost& g) {
  return std::visit(overloaded{
                        [](const PowerCost&) { return std::string_view("power"); },
                        [](const QuadraticCost&) { return std::string_view("quadratic"); },
                        [](const PiecewiseLinearCost&) { return std::string_view("piecewise_linear"); },
                    },
                    g);
}

std::string_view to_string(Regime r) {
  return r == Regime::NonIdlingOptimal ? "non_idling_optimal" : "idling_optimal";
}

void CostModel::validate() const {
  if (!(std::isfinite(a) && a > 0.0)) throw ConfigError("cost: a must be > 0");
  if (!(std::isfinite(c) && c >= 0.0)) throw ConfigError("cost: c must be >= 0");

  std::visit(overloaded{
                 [](const PowerCost& p) {
                   if (!(std::isfinite(p.coeff) && p.coeff > 0.0)) throw InvalidCost("power cost: coeff must be > 0");
                   if (!(std::isfinite(p.exponent) && p.exponent >= 1.0))
                     throw InvalidCost("power cost: exponent must be >= 1");
                 },
                 [](const QuadraticCost& q) {
                   if (!(std::isfinite(q.coeff) && q.coeff > 0.0)) throw InvalidCost("quadratic cost: coeff must be > 0");
                 },
                 [](const PiecewiseLinearCost& pl) {
                   const auto& k = pl.knots;
                   if (k.size() < 2) throw InvalidCost("piecewise linear cost: need at least two knots");
                   if (k.front().first != 0.0 || k.back().first != 1.0)
                     throw InvalidCost("piecewise linear cost: knots must start at b=0 and end at b=1");
                   for (std::size_t i = 1; i < k.size(); ++i) {
                     if (!(k[i].first > k[i - 1].first))
                       throw InvalidCost("piecewise linear cost: knot abscissae must increase");
                   }
                 },
             },
             utilization);

  const double h = 1.0 / kCostProbePoints;
  if (!(g(0.0) >= 0.0)) throw InvalidCost("utilization cost must be nonnegative at b = 0");
  double prev = g(0.0);
  double prev_diff = std::numeric_limits<double>::quiet_NaN();
  for (int i = 1; i <= kCostProbePoints; ++i) {
    const double cur = g(i * h);
    const double diff = cur - prev;
    if (!(diff > 0.0)) throw InvalidCost("utilization cost must be strictly increasing on [0, 1]");
    if (i > 1 && diff - prev_diff < -1e-12) throw InvalidCost("utilization cost must be convex on [0, 1]");
    prev = cur;
    prev_diff = diff;
  }
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (hi < lo) throw DomainError("golden_section_minimize: empty bracket");
  if (hi == lo) return lo;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 500 && (b - a) > tol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  double best = 0.5 * (a + b);
  double best_val = f(best);

  // Near the minimum f is flat to rounding, which caps the bracket at about
  // sqrt(eps). For convex f the central difference f(x+h) - f(x-h) is
  // nondecreasing in x, so bisecting on its sign gets past that limit.
  {
    const double h = 1e-5 * (hi - lo);
    double pa = std::max(lo + h, a - h);
    double pb = std::min(hi - h, b + h);
    if (pa < pb) {
      for (int it = 0; it < 200 && pb - pa > 1e-15 * (hi - lo); ++it) {
        const double mid = 0.5 * (pa + pb);
        if (f(mid + h) - f(mid - h) < 0.0) {
          pa = mid;
        } else {
          pb = mid;
        }
      }
      const double polished = 0.5 * (pa + pb);
      const double polished_val = f(polished);
      if (polished_val <= best_val) {
        best = polished;
        best_val = polished_val;
      }
    }
  }

  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_hi <= best_val) {
    best = hi;
    best_val = f_hi;
  }
  if (f_lo <= best_val) best = lo;
  return best;
}

FluidDesign solve_fluid(double lambda, double mu, const CostModel& cost) {
  check_rates(lambda, mu);
  cost.validate();
  if (cost.c != 0.0) throw ConfigError("solve_fluid handles c = 0 only; use solve_fluid_hc for holding costs");

  // a(lambda - b mu) + g(b) without the constant a*lambda, which would only
  // eat precision in the comparisons.
  const double a_mu = cost.a * mu;
  auto reduced = [&](double b) { return cost.g(b) - a_mu * b; };

  FluidDesign d;
  d.lambda = lambda;
  d.mu = mu;
  d.b_star = golden_section_minimize(reduced, 0.0, max_busy_fraction(1.0, lambda, mu));
  d.fluid_cost = cost.a * (lambda - d.b_star * mu) + cost.g(d.b_star);
  finish_design(d);
  return d;
}

double invariant_queue_length(double b, double p, double lambda, double mu, const DistributionSpec& patience) {
  check_rates(lambda, mu);
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("invariant_queue_length: p must lie in (0, 1]");
  const double cap = max_busy_fraction(p, lambda, mu);
  if (!(b >= 0.0) || b > cap + 1e-12)
    throw DomainError("invariant_queue_length: b outside [0, min(1, p*lambda/mu)]");
  const double admitted = p * lambda;
  const double served_share = b * mu / admitted;
  if (served_share >= 1.0) return 0.0;
  return admitted * patience.survival_integral(patience.inverse_survival(served_share));
}

double holding_compensator(double b, double p, double lambda, double mu, const DistributionSpec& patience,
                           double c) {
  const double q_p = invariant_queue_length(b, p, lambda, mu, patience);
  if (c == 0.0 || p == 1.0) return 0.0;
  return c * (invariant_queue_length(b, 1.0, lambda, mu, patience) - q_p);
}

FluidDesign solve_fluid_hc(double lambda, double mu, const DistributionSpec& patience, const CostModel& cost,
                           bool assume_dfr) {
  check_rates(lambda, mu);
  cost.validate();
  if (assume_dfr) patience.require_nonincreasing_hazard();

  const double cap = max_busy_fraction(1.0, lambda, mu);
  const double a_mu = cost.a * mu;
  auto reduced = [&](double b) {
    const double hold = cost.c == 0.0 ? 0.0 : cost.c * invariant_queue_length(b, 1.0, lambda, mu, patience);
    return hold + cost.g(b) - a_mu * b;
  };

  FluidDesign d;
  d.lambda = lambda;
  d.mu = mu;
  if (assume_dfr || cost.c == 0.0) {
    d.b_star = golden_section_minimize(reduced, 0.0, cap);
  } else {
    // No convexity guarantee: coarse scan, then polish the best cell.
    double best_b = 0.0;
    double best_val = reduced(0.0);
    int best_i = 0;
    for (int i = 1; i <= kGridScanPoints; ++i) {
      const double b = cap * i / kGridScanPoints;
      const double v = reduced(b);
      if (v < best_val) {
        best_val = v;
        best_b = b;
        best_i = i;
      }
    }
    const double lo = cap * std::max(best_i - 1, 0) / kGridScanPoints;
    const double hi = cap * std::min(best_i + 1, kGridScanPoints) / kGridScanPoints;
    const double refined = golden_section_minimize(reduced, lo, hi);
    d.b_star = reduced(refined) <= best_val ? refined : best_b;
    d.uniqueness_guaranteed = patience.has_nonincreasing_hazard();
    if (!d.uniqueness_guaranteed) {
      d.warnings.emplace_back("patience hazard is not non-increasing: the minimizer may not be unique");
    }
  }
  const double q1 = invariant_queue_length(d.b_star, 1.0, lambda, mu, patience);
  d.q_at_optimum = q1;
  d.fluid_cost = cost.c * q1 + cost.a * (lambda - d.b_star * mu) + cost.g(d.b_star);
  finish_design(d);
  return d;
}

CostBreakdown fluid_cost_breakdown(double b, double p, double lambda, double mu, const DistributionSpec& patience,
                                   const CostModel& cost) {
  check_rates(lambda, mu);
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("fluid_cost_breakdown: p must lie in (0, 1]");
  CostBreakdown out;
  out.rejection = cost.a * (1.0 - p) * lambda;
  out.abandonment = cost.a * (p * lambda - b * mu);
  out.utilization = cost.g(b);
  if (cost.c != 0.0) {
    out.holding = cost.c * invariant_queue_length(b, p, lambda, mu, patience);
    out.compensator = holding_compensator(b, p, lambda, mu, patience, cost.c);
  }
  return out;
}

CostBreakdown fluid_cost_breakdown(const FluidDesign& design, double lambda, double mu,
                                   const DistributionSpec& patience, const CostModel& cost) {
  return fluid_cost_breakdown(design.b_star, design.p_star, lambda, mu, patience, cost);
}

}  // namespace idleq
