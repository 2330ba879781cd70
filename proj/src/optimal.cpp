#include "kpp/optimal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "kpp/errors.hpp"

namespace kpp {

PeriodicCoefficient optimal_growth(const PeriodicCoefficient& d, double alpha) {
  require_positive(d, "diffusion coefficient d");
  if (!(alpha > 0.0)) throw PreconditionError(fmt::format("alpha must be positive, got {}", alpha));
  const double hd = harmonic_mean(d);
  if (!d.has_exact_evaluator()) {
    std::vector<double> v(d.grid_size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = alpha * (2.0 - hd / d.samples()[j]);
    return PeriodicCoefficient::from_samples(std::move(v), d.period());
  }
  return PeriodicCoefficient::from_function(
      SourceKind::Derived, fmt::format("optimal_growth({}, {:.17g})", d.description(), alpha),
      [d, hd, alpha](double x) { return alpha * (2.0 - hd / d(x)); }, d.period(), d.grid_size());
}

double scale_invariance_check(const PeriodicCoefficient& d, double alpha, double k) {
  if (!(k > 0.0)) throw PreconditionError("scale factor k must be positive");
  const PeriodicCoefficient base = optimal_growth(d, alpha);
  const PeriodicCoefficient other = optimal_growth(scaled(d, k), alpha);
  double diff = 0.0;
  for (std::size_t j = 0; j < base.grid_size(); ++j) {
    diff = std::max(diff, std::abs(other.samples()[j] - base.samples()[j]));
  }
  return diff;
}

double uniform_symmetric(std::mt19937_64& gen) {
  const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

PeriodicCoefficient random_perturbation(double period, std::size_t grid_size, std::mt19937_64& gen,
                                        int max_order) {
  FourierRecord rec;
  for (int k = 0; k < max_order; ++k) {
    rec.cos_coeffs.push_back(uniform_symmetric(gen));
    rec.sin_coeffs.push_back(uniform_symmetric(gen));
  }
  auto raw = PeriodicCoefficient::from_function(
      SourceKind::Fourier, "fourier: " + format_fourier_payload(rec),
      [rec, period](double x) { return rec.evaluate(x, period); }, period, grid_size);
  const double peak = std::max(std::abs(raw.min()), std::abs(raw.max()));
  for (double& c : rec.cos_coeffs) c /= peak;
  for (double& c : rec.sin_coeffs) c /= peak;
  return PeriodicCoefficient::from_function(
      SourceKind::Fourier, "fourier: " + format_fourier_payload(rec),
      [rec, period](double x) { return rec.evaluate(x, period); }, period, grid_size);
}

PerturbationStudy perturbation_study(const PeriodicCoefficient& d, double alpha,
                                     std::span<const double> epsilons, std::uint64_t seed,
                                     const PerturbationOptions& options) {
  const PeriodicCoefficient rd = optimal_growth(d, alpha);
  PerturbationStudy study;
  study.base_speed = minimal_speed(d, rd, options.speed).richardson_estimate;
  study.min_delta = INFINITY;

  std::mt19937_64 gen(seed);
  for (int id = 0; id < options.perturbations; ++id) {
    const PeriodicCoefficient eta =
        random_perturbation(d.period(), d.grid_size(), gen, options.max_order);
    for (double eps : epsilons) {
      PerturbationTrial trial;
      trial.eta_id = id;
      trial.epsilon = eps;
      try {
        trial.speed = minimal_speed(d, linear_combination(rd, eps, eta), options.speed).richardson_estimate;
      } catch (const NumericalError& e) {
        throw NumericalError("perturb", fmt::format("eta {} epsilon {}: {}", id, eps, e.what()));
      }
      trial.delta = trial.speed - study.base_speed;
      study.min_delta = std::min(study.min_delta, trial.delta);
      study.trials.push_back(trial);
    }
  }
  return study;
}

const char* to_string(Constancy verdict) {
  return verdict == Constancy::Constant ? "constant" : "nonconstant";
}

ConstancyResult constancy_test(const PeriodicCoefficient& d, double alpha,
                               const EigenOptions& options) {
  const PeriodicCoefficient rd = optimal_growth(d, alpha);
  ConstancyResult out;
  out.lambda0 = std::sqrt(alpha / harmonic_mean(d));
  const EigenPair pair = principal_eigenpair(assemble_operator(d, rd, out.lambda0), options);
  const auto [mn, mx] = std::minmax_element(pair.psi.begin(), pair.psi.end());
  out.deviation = *mx - *mn;
  out.verdict = out.deviation < kConstancyThreshold ? Constancy::Constant : Constancy::Nonconstant;
  return out;
}

bool PeriodScan::nondecreasing(double slack) const {
  for (std::size_t i = 1; i < speeds.size(); ++i) {
    if (speeds[i] < speeds[i - 1] - slack) return false;
  }
  return true;
}

double second_difference(double x0, double x1, double x2, double f0, double f1, double f2) {
  const double h1 = x1 - x0;
  const double h2 = x2 - x1;
  return 2.0 * (f0 / (h1 * (h1 + h2)) - f1 / (h1 * h2) + f2 / (h2 * (h1 + h2)));
}

PeriodScan period_scan(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                       std::span<const double> Ls, const SpeedOptions& options) {
  require_speed_inputs(d, r);
  if (Ls.size() < 3) throw PreconditionError("period scan needs at least three periods");
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    if (!(Ls[i] > 0.0)) throw PreconditionError("scan periods must be positive");
    if (i > 0 && !(Ls[i] > Ls[i - 1])) throw PreconditionError("scan periods must be increasing");
  }

  PeriodScan scan;
  scan.Ls.assign(Ls.begin(), Ls.end());
  scan.limit_value = 2.0 * std::sqrt(harmonic_mean(d) * arithmetic_mean(r));
  for (double L : Ls) {
    SpeedOptions opts = options;
    opts.richardson = true;
    SpeedResult res;
    try {
      res = minimal_speed(rescale_period(d, L), rescale_period(r, L), opts);
    } catch (const NumericalError& e) {
      throw NumericalError("scan-period", fmt::format("L = {:.6g}: {}", L, e.what()));
    }
    scan.speeds.push_back(res.richardson_estimate);
    scan.grid_speeds.push_back(res.c_star);
  }
  const double h1 = Ls[1] - Ls[0];
  const double h2 = Ls[2] - Ls[1];
  scan.second_difference_at_zero = second_difference(Ls[0], Ls[1], Ls[2], scan.speeds[0],
                                                     scan.speeds[1], scan.speeds[2]);
  // The stencil weights sum in magnitude to 4 / (h1 h2).
  scan.second_difference_tolerance = 4.0 * kSpeedTolerance / (h1 * h2);
  return scan;
}

}  // namespace kpp
