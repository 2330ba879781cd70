#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "kpp/errors.hpp"
#include "kpp/pde.hpp"
#include "kpp/tridiag.hpp"

namespace kpp {

namespace {

constexpr int kMaxNewtonSteps = 50;
constexpr double kResidualTolerance = 1e-8;

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Discretization {
  std::vector<double> dm;  // d at x_{j+1/2}
  std::vector<double> r;
  double inv_h2;

  std::vector<double> residual(const std::vector<double>& p) const {
    const std::size_t n = p.size();
    std::vector<double> f(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t jm = (j + n - 1) % n;
      const std::size_t jp = (j + 1) % n;
      const double flux = dm[j] * (p[jp] - p[j]) - dm[jm] * (p[j] - p[jm]);
      f[j] = flux * inv_h2 + (r[j] - p[j]) * p[j];
    }
    return f;
  }

  CyclicTridiagonal jacobian(const std::vector<double>& p) const {
    const std::size_t n = p.size();
    CyclicTridiagonal jac{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t jm = (j + n - 1) % n;
      jac.lower[j] = dm[jm] * inv_h2;
      jac.upper[j] = dm[j] * inv_h2;
      jac.diag[j] = -(dm[jm] + dm[j]) * inv_h2 + r[j] - 2.0 * p[j];
    }
    return jac;
  }
};

}  // namespace

StationaryState stationary_state(const PeriodicCoefficient& d, const PeriodicCoefficient& r) {
  require_compatible(d, r);
  require_positive(d, "d");
  const double mean_r = arithmetic_mean(r);
  if (!(mean_r > 0.0)) {
    throw PreconditionError(fmt::format("<r>_a must be positive, got {}", mean_r));
  }

  const double h = d.spacing();
  const Discretization disc{d.midpoint_samples(),
                            std::vector<double>(r.samples().begin(), r.samples().end()),
                            1.0 / (h * h)};

  StationaryState out;
  out.p.assign(d.grid_size(), std::max(mean_r, r.max()));
  std::vector<double> f = disc.residual(out.p);
  double norm = inf_norm(f);

  while (norm >= kResidualTolerance) {
    if (out.newton_steps == kMaxNewtonSteps) {
      throw NumericalError("stationary", fmt::format("Newton iteration did not converge in {} steps "
                                                     "(residual {:.3e})",
                                                     kMaxNewtonSteps, norm));
    }
    ++out.newton_steps;
    for (double& v : f) v = -v;
    std::vector<double> delta;
    try {
      delta = solve_cyclic(disc.jacobian(out.p), f);
    } catch (const std::runtime_error& e) {
      throw NumericalError("stationary", fmt::format("singular Newton system: {}", e.what()));
    }

    double tau = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30 && !accepted; ++halving, tau *= 0.5) {
      std::vector<double> trial = out.p;
      for (std::size_t j = 0; j < trial.size(); ++j) trial[j] += tau * delta[j];
      if (*std::min_element(trial.begin(), trial.end()) <= 0.0) continue;
      std::vector<double> trial_f = disc.residual(trial);
      const double trial_norm = inf_norm(trial_f);
      if (trial_norm < norm) {
        out.p = std::move(trial);
        f = std::move(trial_f);
        norm = trial_norm;
        accepted = true;
      }
    }
    if (!accepted) {
      throw NumericalError("stationary",
                           fmt::format("damped Newton step failed to reduce the residual {:.3e}", norm));
    }
  }

  // A few extra full steps take the residual to rounding level, so that the
  // simulator's comparison with p is not limited by the Newton tolerance.
  for (int polish = 0; polish < 3; ++polish) {
    for (double& v : f) v = -v;
    std::vector<double> trial = out.p;
    try {
      const std::vector<double> delta = solve_cyclic(disc.jacobian(out.p), f);
      for (std::size_t j = 0; j < trial.size(); ++j) trial[j] += delta[j];
    } catch (const std::runtime_error&) {
      break;
    }
    std::vector<double> trial_f = disc.residual(trial);
    const double trial_norm = inf_norm(trial_f);
    if (!(trial_norm < 0.5 * norm)) break;
    out.p = std::move(trial);
    f = std::move(trial_f);
    norm = trial_norm;
  }

  if (!(*std::min_element(out.p.begin(), out.p.end()) > 0.0)) {
    throw NumericalError("stationary", "stationary state lost positivity");
  }
  out.residual = norm;
  return out;
}

}  // namespace kpp
