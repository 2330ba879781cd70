#pragma once

#include <cstddef>
#include <utility>

#include "kpp/coeffs.hpp"
#include "kpp/eigen.hpp"

namespace kpp {

struct SpeedResult {
  double c_star = 0.0;
  double lambda_star = 0.0;
  double k_at_star = 0.0;
  double lower_bound = 0.0;
  std::pair<double, double> bracket{0.0, 0.0};
  int evaluations = 0;
  std::size_t grid_size = 0;
  double richardson_estimate = 0.0;  // from grids N and 2N at lambda_star
};

struct SpeedOptions {
  double lambda_rel_tol = 1e-10;
  int prescan_points = 17;
  double initial_bracket_factor = 64.0;
  double max_bracket_decades = 12.0;
  bool richardson = true;
  EigenOptions eigen{};
};

// -k_lambda(d, r) / lambda on the coefficients' grid.
double speed_at(const PeriodicCoefficient& d, const PeriodicCoefficient& r, double lambda,
                const EigenOptions& options = {});

// c*_d(r) = min_{lambda > 0} -k_lambda(d, r) / lambda.
//
// A geometric pre-scan locates every local minimum inside a verified bracket,
// golden-section search refines each one, and the winner is polished by a
// root solve on the analytic slope of -k/lambda.
SpeedResult minimal_speed(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                          const SpeedOptions& options = {});

// 2 sqrt(<d>_h <r>_a)
double lower_bound(const PeriodicCoefficient& d, const PeriodicCoefficient& r);

// max_j |r_j / <r>_a + <d>_h / d_j - 2|
double condition_residual(const PeriodicCoefficient& d, const PeriodicCoefficient& r);

struct EqualityReport {
  double condition_residual = 0.0;
  double speed_gap = 0.0;  // richardson_estimate - lower_bound
  double lambda0 = 0.0;    // sqrt(<r>_a / <d>_h)
  double eigenfunction_deviation = 0.0;
  SpeedResult speed;
};

EqualityReport equality_report(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                               const SpeedOptions& options = {});

// Checks min d > 0 (with refinement) and <r>_a > 0.
void require_speed_inputs(const PeriodicCoefficient& d, const PeriodicCoefficient& r);

}  // namespace kpp
