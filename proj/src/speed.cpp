#include "kpp/speed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "kpp/errors.hpp"

namespace kpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Sample {
  double lambda;
  double g;
};

class SpeedFunction {
 public:
  SpeedFunction(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                const EigenOptions& options)
      : d_(d), r_(r), options_(options) {}

  double operator()(double lambda) {
    ++evaluations;
    return -principal_eigenvalue(d_, r_, lambda, options_) / lambda;
  }

  // d/dlambda of -k/lambda.
  double slope(double lambda) {
    ++evaluations;
    const EigenvalueSlope s = principal_eigenvalue_with_slope(d_, r_, lambda, options_);
    return (s.k - lambda * s.dk_dlambda) / (lambda * lambda);
  }

  int evaluations = 0;

 private:
  const PeriodicCoefficient& d_;
  const PeriodicCoefficient& r_;
  const EigenOptions& options_;
};

// Evaluates g on a geometric grid. Points where the eigensolve fails are
// dropped when the analytic bound g >= <r>_a/lambda + lambda <d>_h shows they
// cannot compete with the best successful value; otherwise the failure
// propagates.
std::vector<Sample> prescan(SpeedFunction& g, double lo, double hi, int points, double mean_r,
                            double harmonic_d) {
  std::vector<Sample> out(static_cast<std::size_t>(points));
  std::vector<std::size_t> failed;
  std::string first_error;
  const double ratio = std::pow(hi / lo, 1.0 / (points - 1));
  for (int i = 0; i < points; ++i) {
    const double lambda = (i == points - 1) ? hi : lo * std::pow(ratio, i);
    out[i].lambda = lambda;
    try {
      out[i].g = g(lambda);
    } catch (const NumericalError& e) {
      out[i].g = kInf;
      failed.push_back(static_cast<std::size_t>(i));
      if (first_error.empty()) first_error = e.what();
    }
  }
  double best = kInf;
  for (const Sample& s : out) best = std::min(best, s.g);
  for (std::size_t i : failed) {
    const double lambda = out[i].lambda;
    if (mean_r / lambda + lambda * harmonic_d <= best) {
      throw NumericalError("speed", fmt::format("eigensolve failed at lambda = {:.6g} inside the "
                                                "search region: {}",
                                                lambda, first_error));
    }
  }
  return out;
}

Sample golden_section(SpeedFunction& g, double a, double b, double rel_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = g(x1);
  double f2 = g(x2);
  while (b - a > rel_tol * 0.5 * (a + b)) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = g(x2);
    }
  }
  return f1 <= f2 ? Sample{x1, f1} : Sample{x2, f2};
}

}  // namespace

void require_speed_inputs(const PeriodicCoefficient& d, const PeriodicCoefficient& r) {
  require_compatible(d, r);
  require_positive(d, "diffusion coefficient d");
  const double mean_r = arithmetic_mean(r);
  if (!(mean_r > 0.0)) {
    throw PreconditionError(fmt::format("mean of r must be positive, got {:.6g}", mean_r));
  }
}

double speed_at(const PeriodicCoefficient& d, const PeriodicCoefficient& r, double lambda,
                const EigenOptions& options) {
  return -principal_eigenvalue(d, r, lambda, options) / lambda;
}

double lower_bound(const PeriodicCoefficient& d, const PeriodicCoefficient& r) {
  require_speed_inputs(d, r);
  return 2.0 * std::sqrt(harmonic_mean(d) * arithmetic_mean(r));
}

double condition_residual(const PeriodicCoefficient& d, const PeriodicCoefficient& r) {
  require_compatible(d, r);
  const double mean_r = arithmetic_mean(r);
  const double harmonic_d = harmonic_mean(d);
  double res = 0.0;
  for (std::size_t j = 0; j < d.grid_size(); ++j) {
    res = std::max(res, std::abs(r.samples()[j] / mean_r + harmonic_d / d.samples()[j] - 2.0));
  }
  return res;
}

SpeedResult minimal_speed(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                          const SpeedOptions& options) {
  require_speed_inputs(d, r);
  const double mean_r = arithmetic_mean(r);
  const double harmonic_d = harmonic_mean(d);
  const double lambda0 = std::sqrt(mean_r / harmonic_d);

  SpeedFunction g(d, r, options.eigen);
  double lo = lambda0 / options.initial_bracket_factor;
  double hi = lambda0 * options.initial_bracket_factor;
  std::vector<Sample> scan;
  for (;;) {
    scan = prescan(g, lo, hi, options.prescan_points, mean_r, harmonic_d);
    const auto best = std::min_element(scan.begin(), scan.end(),
                                       [](const Sample& a, const Sample& b) { return a.g < b.g; });
    const bool at_left = best == scan.begin();
    const bool at_right = best == scan.end() - 1;
    if (!at_left && !at_right) break;
    if (at_left) lo /= options.initial_bracket_factor;
    if (at_right) hi *= options.initial_bracket_factor;
    if (std::log10(hi / lo) > options.max_bracket_decades) {
      throw NumericalError("speed", fmt::format("bracket expansion exhausted: -k/lambda has no "
                                                "interior minimum on [{:.3g}, {:.3g}]",
                                                lo, hi));
    }
  }

  // Refine every interior local minimum of the scan, keep the global one.
  Sample best{0.0, kInf};
  std::pair<double, double> sub{0.0, 0.0};
  for (std::size_t i = 1; i + 1 < scan.size(); ++i) {
    if (!std::isfinite(scan[i].g)) continue;
    if (!(scan[i].g <= scan[i - 1].g && scan[i].g <= scan[i + 1].g)) continue;
    const Sample s = golden_section(g, scan[i - 1].lambda, scan[i + 1].lambda, options.lambda_rel_tol);
    if (s.g < best.g) {
      best = s;
      sub = {scan[i - 1].lambda, scan[i + 1].lambda};
    }
  }

  // -k/lambda is flat to second order at the minimum, so value comparisons
  // cannot place lambda* closer than ~sqrt(eigenvalue noise). A root solve on
  // the analytic slope resolves it to rounding level.
  SpeedResult out;
  out.bracket = sub;
  double delta = 1e-3;
  while (true) {
    const double a = std::max(best.lambda * (1.0 - delta), sub.first);
    const double b = std::min(best.lambda * (1.0 + delta), sub.second);
    const double sa = g.slope(a);
    const double sb = g.slope(b);
    if (sa < 0.0 && sb > 0.0) {
      std::uintmax_t max_iter = 100;
      const auto root = boost::math::tools::toms748_solve(
          [&g](double x) { return g.slope(x); }, a, b, sa, sb,
          boost::math::tools::eps_tolerance<double>(50), max_iter);
      const double lambda = 0.5 * (root.first + root.second);
      const double value = g(lambda);
      if (value <= best.g + 1e-12 * std::abs(best.g)) best = {lambda, value};
      out.bracket = {a, b};
      break;
    }
    if (a == sub.first && b == sub.second) break;
    delta *= 4.0;
  }

  out.lambda_star = best.lambda;
  out.c_star = best.g;
  out.k_at_star = -best.g * best.lambda;
  out.lower_bound = 2.0 * std::sqrt(harmonic_d * mean_r);
  out.grid_size = d.grid_size();
  if (options.richardson) {
    const std::size_t fine = 2 * d.grid_size();
    const double c_fine = speed_at(d.resampled(fine), r.resampled(fine), best.lambda, options.eigen);
    ++g.evaluations;
    out.richardson_estimate = (4.0 * c_fine - out.c_star) / 3.0;
  } else {
    out.richardson_estimate = out.c_star;
  }
  out.evaluations = g.evaluations;
  return out;
}

EqualityReport equality_report(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                               const SpeedOptions& options) {
  require_speed_inputs(d, r);
  EqualityReport rep;
  rep.condition_residual = condition_residual(d, r);
  rep.speed = minimal_speed(d, r, options);
  rep.speed_gap = rep.speed.richardson_estimate - rep.speed.lower_bound;
  rep.lambda0 = std::sqrt(arithmetic_mean(r) / harmonic_mean(d));
  const EigenPair pair = principal_eigenpair(assemble_operator(d, r, rep.lambda0), options.eigen);
  const auto [mn, mx] = std::minmax_element(pair.psi.begin(), pair.psi.end());
  rep.eigenfunction_deviation = *mx - *mn;
  return rep;
}

}  // namespace kpp
