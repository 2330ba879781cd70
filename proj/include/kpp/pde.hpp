#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "kpp/coeffs.hpp"

namespace kpp {

struct StationaryState {
  std::vector<double> p;  // one period, on the coefficients' grid
  double residual = 0.0;  // ||(d p')' + (r - p) p||_inf
  int newton_steps = 0;
};

// Positive periodic solution of (d p')' + (r - p) p = 0 by damped Newton
// iteration from p = max(<r>_a, max r), using the same flux discretization as
// the eigenvalue operator.
StationaryState stationary_state(const PeriodicCoefficient& d, const PeriodicCoefficient& r);

// Compactly supported bump: height * (1 + cos(pi (x - center) / half_width)) / 2
// for |x - center| < half_width, zero elsewhere.
struct InitialData {
  double center = 0.0;
  std::optional<double> half_width;  // default: one period
  std::optional<double> height;      // default: half of min p
};

struct SimulationConfig {
  SimulationConfig(PeriodicCoefficient d, PeriodicCoefficient r) : d(std::move(d)), r(std::move(r)) {}

  PeriodicCoefficient d;
  PeriodicCoefficient r;
  // X; 0 selects 1.5 c t_end + 5 L, with c the expected speed below.
  double domain_half_width = 0.0;
  std::size_t points_per_period = 64;
  double dt = 0.0;         // 0 selects min(0.1, 0.25 dx)
  double t_end = 150.0;
  double threshold = 0.0;  // 0 selects 0.01 <r>_a
  std::pair<double, double> fit_window{0.5, 1.0};
  InitialData initial;
  double output_interval = 0.5;
  double snapshot_interval = 0.0;  // 0 disables snapshots
  // Used for the domain-size check X >= 1.5 c t_end; defaults to the lower
  // bound 2 sqrt(<d>_h <r>_a).
  std::optional<double> expected_speed;
};

// Mesh actually used by simulate(): x_i = (i - K) dx, dx = L / points_per_period,
// i = 0..2K, with u = 0 imposed at i = 0 and i = 2K.
struct SimulationMesh {
  double dx = 0.0;
  std::size_t half_points = 0;  // K
  std::size_t size() const noexcept { return 2 * half_points + 1; }
  double x(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(half_points)) * dx;
  }
};

SimulationMesh simulation_mesh(const SimulationConfig& config);

struct FrontTrajectory {
  std::vector<double> times;
  std::vector<double> positions;  // NaN while no point exceeds the threshold
  std::vector<double> support;    // measure of {u >= threshold}
  double fitted_speed = 0.0;
  double fitted_intercept = 0.0;
  double slope_standard_error = 0.0;
  double fit_residual = 0.0;  // RMS of the linear fit over the window
  bool boundary_contamination = false;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> u;
};

struct SimulationRun {
  SimulationMesh mesh;
  double dt = 0.0;
  double threshold = 0.0;
  FrontTrajectory front;
  std::vector<Snapshot> snapshots;
  // Profiles at every output time in the last quarter of the run.
  std::vector<Snapshot> late_profiles;
  std::vector<double> stationary;  // p over one period of the simulation mesh
  double min_u = 0.0;
  double max_u = 0.0;
  double initial_max = 0.0;
  // max |u - p| over the period centred on the initial data at t_end.
  double central_deviation = 0.0;

  // Linear interpolation of a profile at x (0 outside the mesh).
  double value_at(const Snapshot& s, double x) const;
};

// Validates the configuration; throws PreconditionError naming the violated
// condition.
void validate(const SimulationConfig& config);

// Semi-implicit Euler: explicit logistic reaction followed by a backward-Euler
// flux-form diffusion solve, homogeneous Dirichlet data at x = +-X.
SimulationRun simulate(const SimulationConfig& config);

struct SpreadingEstimate {
  double speed = 0.0;
  double ci_halfwidth = 0.0;  // 3 standard errors of the fitted slope
  bool fast_ray_decays = false;  // u(1.2 c t, t) < 1e-6 over the last quarter
  bool slow_ray_persists = false;  // u(0.8 c t, t) > threshold over the last quarter
  SimulationRun run;
};

SpreadingEstimate spreading_speed_estimate(const SimulationConfig& config);

// "t x u" rows, 17 significant digits, one blank-line separated block per snapshot.
void write_snapshots(std::ostream& out, const SimulationRun& run);

}  // namespace kpp
