#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "kpp/errors.hpp"
#include "kpp/pde.hpp"
#include "kpp/speed.hpp"

namespace kpp {

namespace {

constexpr double kNegativityTolerance = 1e-12;
constexpr double kContaminationPeriods = 5.0;
constexpr double kFastRayLevel = 1e-6;

struct Resolved {
  PeriodicCoefficient d;
  PeriodicCoefficient r;
  StationaryState p;
  double period = 0.0;
  SimulationMesh mesh;
  double half_width_domain = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  double threshold = 0.0;
  double center = 0.0;
  double bump_half_width = 0.0;
  double bump_height = 0.0;
};

// Maps the global node offset g = i - K to a position on the periodic grid.
std::size_t periodic_index(std::ptrdiff_t g, std::size_t m) {
  const auto mm = static_cast<std::ptrdiff_t>(m);
  return static_cast<std::size_t>(((g % mm) + mm) % mm);
}

double bump(double x, double center, double half_width, double height) {
  const double s = std::abs(x - center);
  if (s >= half_width) return 0.0;
  return 0.5 * height * (1.0 + std::cos(M_PI * s / half_width));
}

Resolved resolve(const SimulationConfig& c) {
  require_compatible(c.d, c.r);
  require_speed_inputs(c.d, c.r);
  const std::size_t m = c.points_per_period;
  if (m < kMinGridSize || !is_power_of_two(m)) {
    throw PreconditionError(
        fmt::format("points_per_period must be a power of two >= {}, got {}", kMinGridSize, m));
  }
  if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) {
    throw PreconditionError(fmt::format("t_end must be positive, got {}", c.t_end));
  }
  if (!(c.output_interval > 0.0) || !std::isfinite(c.output_interval)) {
    throw PreconditionError(fmt::format("output_interval must be positive, got {}", c.output_interval));
  }
  if (!(c.snapshot_interval >= 0.0) || !std::isfinite(c.snapshot_interval)) {
    throw PreconditionError(
        fmt::format("snapshot_interval must be nonnegative, got {}", c.snapshot_interval));
  }
  const auto [fit_a, fit_b] = c.fit_window;
  if (!(fit_a >= 0.0 && fit_a < fit_b && fit_b <= 1.0)) {
    throw PreconditionError(
        fmt::format("fit_window must satisfy 0 <= start < end <= 1, got ({}, {})", fit_a, fit_b));
  }

  Resolved out{c.d.resampled(m), c.r.resampled(m), {}, 0.0, {}};
  out.p = stationary_state(out.d, out.r);
  out.period = c.d.period();
  const double p_min = *std::min_element(out.p.p.begin(), out.p.p.end());
  const double p_max = *std::max_element(out.p.p.begin(), out.p.p.end());

  out.threshold = c.threshold > 0.0 ? c.threshold : 0.01 * arithmetic_mean(c.r);
  if (c.threshold < 0.0 || !(out.threshold < p_min)) {
    throw PreconditionError(fmt::format(
        "threshold must satisfy 0 < threshold < min p = {:.6g}, got {:.6g}", p_min, out.threshold));
  }

  double expected = lower_bound(c.d, c.r);
  if (c.expected_speed) {
    if (!(*c.expected_speed > 0.0) || !std::isfinite(*c.expected_speed)) {
      throw PreconditionError(
          fmt::format("expected_speed must be positive, got {}", *c.expected_speed));
    }
    expected = *c.expected_speed;
  }
  const double needed = 1.5 * expected * c.t_end;
  if (c.domain_half_width == 0.0) {
    out.half_width_domain = needed + kContaminationPeriods * out.period;
  } else {
    out.half_width_domain = c.domain_half_width;
    if (!(c.domain_half_width >= needed)) {
      throw PreconditionError(fmt::format(
          "domain half-width X = {} is below 1.5 * c * t_end = {:.6g} (c = {:.6g})",
          c.domain_half_width, needed, expected));
    }
  }

  out.mesh.dx = out.period / static_cast<double>(m);
  out.mesh.half_points =
      static_cast<std::size_t>(std::ceil(out.half_width_domain / out.mesh.dx - 1e-9));

  out.center = c.initial.center;
  out.bump_half_width = c.initial.half_width.value_or(out.period);
  out.bump_height = c.initial.height.value_or(0.5 * p_min);
  if (!std::isfinite(out.center) || !(out.bump_half_width > 0.0) ||
      !std::isfinite(out.bump_half_width)) {
    throw PreconditionError("initial data needs a finite center and a positive half_width");
  }
  if (!(out.bump_height >= 0.0) || !std::isfinite(out.bump_height)) {
    throw PreconditionError(
        fmt::format("initial height must be nonnegative, got {}", out.bump_height));
  }
  if (std::abs(out.center) + out.bump_half_width >= out.half_width_domain) {
    throw PreconditionError("initial data support must lie inside (-X, X)");
  }
  bool nonzero = false;
  for (std::size_t i = 1; i + 1 < out.mesh.size() && !nonzero; ++i) {
    nonzero = bump(out.mesh.x(i), out.center, out.bump_half_width, out.bump_height) > 0.0;
  }
  if (!nonzero) throw PreconditionError("initial data is identically zero on the mesh");

  // Explicit logistic step u -> u + dt (r - u) u is monotone on [0, U] when
  // dt (2U - r) <= 1; U bounds the solution by comparison.
  const double u_bound = std::max(out.bump_height, p_max);
  const double denom = 2.0 * u_bound - out.r.min();
  const double dt_stable = denom > 0.0 ? 1.0 / denom : INFINITY;
  out.dt = c.dt > 0.0 ? c.dt : std::min(0.1, 0.25 * out.mesh.dx);
  if (c.dt < 0.0 || !std::isfinite(out.dt)) {
    throw PreconditionError(fmt::format("dt must be positive, got {}", c.dt));
  }
  if (out.dt > dt_stable) {
    throw PreconditionError(
        fmt::format("dt = {} exceeds the reaction stability bound {:.6g}", out.dt, dt_stable));
  }
  out.steps = static_cast<std::size_t>(std::ceil(c.t_end / out.dt - 1e-9));
  out.dt = c.t_end / static_cast<double>(out.steps);
  return out;
}

// Tridiagonal I - dt D with homogeneous Dirichlet rows, factored once.
class ImplicitDiffusion {
 public:
  ImplicitDiffusion(const std::vector<double>& dm, double mu) : n_(dm.size() + 1), dm_(dm), mu_(mu) {
    // Unknowns are the interior nodes 1..n-2.
    c_.assign(n_, 0.0);
    inv_beta_.assign(n_, 0.0);
    double prev_c = 0.0;
    for (std::size_t i = 1; i + 1 < n_; ++i) {
      const double lower = i > 1 ? -mu_ * dm_[i - 1] : 0.0;
      const double diag = 1.0 + mu_ * (dm_[i - 1] + dm_[i]);
      const double upper = -mu_ * dm_[i];
      const double beta = diag - lower * prev_c;
      inv_beta_[i] = 1.0 / beta;
      c_[i] = upper * inv_beta_[i];
      prev_c = c_[i];
    }
  }

  void solve(std::vector<double>& u) const {
    double prev = 0.0;
    for (std::size_t i = 1; i + 1 < n_; ++i) {
      const double lower = i > 1 ? -mu_ * dm_[i - 1] : 0.0;
      prev = (u[i] - lower * prev) * inv_beta_[i];
      u[i] = prev;
    }
    for (std::size_t i = n_ - 2; i-- > 1;) u[i] -= c_[i] * u[i + 1];
    u.front() = 0.0;
    u.back() = 0.0;
  }

 private:
  std::size_t n_;
  std::vector<double> dm_;
  double mu_;
  std::vector<double> c_;
  std::vector<double> inv_beta_;
};

double front_position(const SimulationMesh& mesh, const std::vector<double>& u, double theta) {
  for (std::size_t i = u.size(); i-- > 0;) {
    if (u[i] >= theta) {
      if (i + 1 == u.size()) return mesh.x(i);
      return mesh.x(i) + (u[i] - theta) / (u[i] - u[i + 1]) * mesh.dx;
    }
  }
  return NAN;
}

void fit_front(FrontTrajectory& f, double t_from, double t_to) {
  std::vector<double> ts, xs;
  for (std::size_t k = 0; k < f.times.size(); ++k) {
    if (f.times[k] >= t_from - 1e-12 && f.times[k] <= t_to + 1e-12 && std::isfinite(f.positions[k])) {
      ts.push_back(f.times[k]);
      xs.push_back(f.positions[k]);
    }
  }
  const std::size_t n = ts.size();
  if (n < 3) {
    throw NumericalError("simulate",
                         fmt::format("only {} front positions in the fit window; need 3", n));
  }
  double mt = 0.0, mx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mt += ts[k];
    mx += xs[k];
  }
  mt /= static_cast<double>(n);
  mx /= static_cast<double>(n);
  double stt = 0.0, stx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    stt += (ts[k] - mt) * (ts[k] - mt);
    stx += (ts[k] - mt) * (xs[k] - mx);
  }
  f.fitted_speed = stx / stt;
  f.fitted_intercept = mx - f.fitted_speed * mt;
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = xs[k] - (f.fitted_intercept + f.fitted_speed * ts[k]);
    ssr += e * e;
  }
  f.fit_residual = std::sqrt(ssr / static_cast<double>(n));
  f.slope_standard_error = std::sqrt(ssr / static_cast<double>(n - 2) / stt);
}

}  // namespace

SimulationMesh simulation_mesh(const SimulationConfig& config) { return resolve(config).mesh; }

void validate(const SimulationConfig& config) { resolve(config); }

double SimulationRun::value_at(const Snapshot& s, double x) const {
  const double pos = x / mesh.dx + static_cast<double>(mesh.half_points);
  if (!(pos >= 0.0) || pos >= static_cast<double>(mesh.size() - 1)) return 0.0;
  const auto i = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * s.u[i] + w * s.u[i + 1];
}

SimulationRun simulate(const SimulationConfig& config) {
  const Resolved res = resolve(config);
  const std::size_t m = res.d.grid_size();
  const std::size_t n = res.mesh.size();
  const auto k = static_cast<std::ptrdiff_t>(res.mesh.half_points);

  const std::vector<double> dm_period = res.d.midpoint_samples();
  std::vector<double> dm(n - 1), r(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = periodic_index(static_cast<std::ptrdiff_t>(i) - k, m);
    r[i] = res.r.samples()[j];
    p[i] = res.p.p[j];
    if (i + 1 < n) dm[i] = dm_period[j];
  }

  SimulationRun run;
  run.mesh = res.mesh;
  run.dt = res.dt;
  run.threshold = res.threshold;
  run.stationary = res.p.p;

  std::vector<double> u(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    u[i] = bump(res.mesh.x(i), res.center, res.bump_half_width, res.bump_height);
  }
  run.initial_max = *std::max_element(u.begin(), u.end());
  run.min_u = 0.0;
  run.max_u = run.initial_max;

  const ImplicitDiffusion diffusion(dm, res.dt / (res.mesh.dx * res.mesh.dx));
  const auto every = [&](double interval) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(interval / res.dt)));
  };
  const std::size_t output_every = every(config.output_interval);
  const std::size_t snapshot_every = config.snapshot_interval > 0.0 ? every(config.snapshot_interval) : 0;
  const double late_start = 0.75 * config.t_end;

  auto record = [&](std::size_t step) {
    const double t = static_cast<double>(step) * res.dt;
    run.front.times.push_back(t);
    run.front.positions.push_back(front_position(res.mesh, u, res.threshold));
    const auto above = std::count_if(u.begin(), u.end(), [&](double v) { return v >= res.threshold; });
    run.front.support.push_back(static_cast<double>(above) * res.mesh.dx);
    if (t >= late_start - 1e-12) run.late_profiles.push_back({t, u});
  };

  record(0);
  if (snapshot_every) run.snapshots.push_back({0.0, u});
  for (std::size_t step = 1; step <= res.steps; ++step) {
    for (std::size_t i = 1; i + 1 < n; ++i) u[i] += res.dt * (r[i] - u[i]) * u[i];
    diffusion.solve(u);
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    run.min_u = std::min(run.min_u, *lo);
    run.max_u = std::max(run.max_u, *hi);
    if (*lo < -kNegativityTolerance) {
      throw NumericalError("simulate", fmt::format("u = {:.3e} < 0 at t = {:.6g}; stepper unstable",
                                                   *lo, static_cast<double>(step) * res.dt));
    }
    if (step % output_every == 0 || step == res.steps) record(step);
    if (snapshot_every && step % snapshot_every == 0) {
      run.snapshots.push_back({static_cast<double>(step) * res.dt, u});
    }
  }

  const double fit_from = config.fit_window.first * config.t_end;
  const double fit_to = config.fit_window.second * config.t_end;
  const double right_edge = res.mesh.x(n - 1);
  for (std::size_t q = 0; q < run.front.times.size(); ++q) {
    const double t = run.front.times[q];
    const double x = run.front.positions[q];
    if (t >= fit_from - 1e-12 && t <= fit_to + 1e-12 && std::isfinite(x) &&
        right_edge - x < kContaminationPeriods * res.period) {
      run.front.boundary_contamination = true;
    }
  }
  if (run.front.boundary_contamination) {
    throw NumericalError("simulate", fmt::format("front came within {} periods of the boundary "
                                                 "x = {:.6g} during the fit window",
                                                 kContaminationPeriods, right_edge));
  }
  fit_front(run.front, fit_from, fit_to);

  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(res.mesh.x(i) - res.center) <= 0.5 * res.period) {
      run.central_deviation = std::max(run.central_deviation, std::abs(u[i] - p[i]));
    }
  }
  return run;
}

SpreadingEstimate spreading_speed_estimate(const SimulationConfig& config) {
  SpreadingEstimate out;
  out.run = simulate(config);
  out.speed = out.run.front.fitted_speed;
  out.ci_halfwidth = 3.0 * out.run.front.slope_standard_error;
  const double center = config.initial.center;
  out.fast_ray_decays = !out.run.late_profiles.empty();
  out.slow_ray_persists = !out.run.late_profiles.empty();
  for (const Snapshot& s : out.run.late_profiles) {
    if (!(out.run.value_at(s, center + 1.2 * out.speed * s.t) < kFastRayLevel)) {
      out.fast_ray_decays = false;
    }
    if (!(out.run.value_at(s, center + 0.8 * out.speed * s.t) > out.run.threshold)) {
      out.slow_ray_persists = false;
    }
  }
  return out;
}

void write_snapshots(std::ostream& out, const SimulationRun& run) {
  bool first = true;
  for (const Snapshot& s : run.snapshots) {
    if (!first) out << '\n';
    first = false;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      fmt::print(out, "{:.16e} {:.16e} {:.16e}\n", s.t, run.mesh.x(i), s.u[i]);
    }
  }
}

}  // namespace kpp
