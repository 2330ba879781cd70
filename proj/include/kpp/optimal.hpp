#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kpp/coeffs.hpp"
#include "kpp/speed.hpp"

namespace kpp {

// r_d(x) = alpha (2 - <d>_h / d(x)), the minimizer of c*_d(r) over mean-alpha r.
PeriodicCoefficient optimal_growth(const PeriodicCoefficient& d, double alpha);

// ||optimal_growth(k d, alpha) - optimal_growth(d, alpha)||_inf
double scale_invariance_check(const PeriodicCoefficient& d, double alpha, double k);

// Uniform draw in [-1, 1) from the raw 53 high bits, so sequences are
// identical across standard library implementations.
double uniform_symmetric(std::mt19937_64& gen);

// Mean-zero trigonometric polynomial with modes 1..max_order, coefficients
// uniform in [-1, 1], scaled so that max_j |eta(x_j)| = 1.
PeriodicCoefficient random_perturbation(double period, std::size_t grid_size, std::mt19937_64& gen,
                                        int max_order = 4);

struct PerturbationTrial {
  int eta_id = 0;
  double epsilon = 0.0;
  double speed = 0.0;
  double delta = 0.0;
};

struct PerturbationStudy {
  double base_speed = 0.0;
  std::vector<PerturbationTrial> trials;
  double min_delta = 0.0;
};

struct PerturbationOptions {
  int perturbations = 10;
  int max_order = 4;
  SpeedOptions speed{};
};

// Speeds are Richardson-extrapolated from N and 2N.
PerturbationStudy perturbation_study(const PeriodicCoefficient& d, double alpha,
                                     std::span<const double> epsilons, std::uint64_t seed,
                                     const PerturbationOptions& options = {});

enum class Constancy { Constant, Nonconstant };
const char* to_string(Constancy verdict);

struct ConstancyResult {
  double deviation = 0.0;  // max psi - min psi, psi max-normalized
  Constancy verdict = Constancy::Constant;
  double lambda0 = 0.0;
};

inline constexpr double kConstancyThreshold = 1e-6;

// Principal eigenfunction of the operator for (d, r_d) at lambda0 = sqrt(alpha / <d>_h).
ConstancyResult constancy_test(const PeriodicCoefficient& d, double alpha,
                               const EigenOptions& options = {});

struct PeriodScan {
  std::vector<double> Ls;
  std::vector<double> speeds;       // Richardson-extrapolated c*_L
  std::vector<double> grid_speeds;  // c*_L on the ambient grid
  double limit_value = 0.0;         // 2 sqrt(<d>_h <r>_a)
  double second_difference_at_zero = 0.0;
  // Bound on the second difference induced by a 1e-6 error in each speed.
  double second_difference_tolerance = 0.0;

  bool nondecreasing(double slack = 1e-6) const;
  bool curvature_detected() const { return second_difference_at_zero > second_difference_tolerance; }
};

inline constexpr double kSpeedTolerance = 1e-6;

// c*_L for d_L = rescale_period(d, L), r_L = rescale_period(r, L). Needs at
// least three strictly increasing periods.
PeriodScan period_scan(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                       std::span<const double> Ls, const SpeedOptions& options = {});

// Second derivative at the middle of three non-uniformly spaced points.
double second_difference(double x0, double x1, double x2, double f0, double f1, double f2);

}  // namespace kpp
