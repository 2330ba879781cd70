#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kpp/eigen.hpp"
#include "kpp/errors.hpp"

namespace kpp {

namespace {

// Grid data shared by the functional, its gradient and the preconditioner.
struct Discretization {
  Discretization(const PeriodicCoefficient& d, const PeriodicCoefficient& r, double lambda)
      : n(d.grid_size()),
        h(d.spacing()),
        length(d.period()),
        lambda(lambda),
        dmid(d.midpoint_samples()),
        dv(d.samples().begin(), d.samples().end()),
        rv(r.samples().begin(), r.samples().end()) {
    require_compatible(d, r);
    if (!(d.min() > 0.0)) throw PreconditionError("diffusion coefficient d must be strictly positive");
    if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  }

  double inverse_weight(std::span<const double> phi) const {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += 1.0 / (dv[j] * phi[j] * phi[j]);
    return h * s;
  }

  double functional(std::span<const double> phi) const {
    double grad = 0.0, react = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = phi[(j + 1) % n] - phi[j];
      grad += dmid[j] * diff * diff;
      react += rv[j] * phi[j] * phi[j];
    }
    return grad / h - h * react - lambda * lambda * length * length / inverse_weight(phi);
  }

  // Euler-Lagrange residual vector; equals half the constrained L2 gradient.
  std::vector<double> residual(std::span<const double> phi) const {
    const double value = functional(phi);
    const double weight = inverse_weight(phi);
    const double coupling = lambda * lambda * length * length / (weight * weight);
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double prev = phi[(j + n - 1) % n];
      const double next = phi[(j + 1) % n];
      const double flux = (dmid[j] * (next - phi[j]) - dmid[(j + n - 1) % n] * (phi[j] - prev)) / (h * h);
      out[j] = -flux - rv[j] * phi[j] - coupling / (dv[j] * phi[j] * phi[j] * phi[j]) - value * phi[j];
    }
    return out;
  }

  void normalize(std::vector<double>& phi) const {
    double s = 0.0;
    for (double v : phi) s += v * v;
    const double scale = 1.0 / std::sqrt(h * s);
    for (double& v : phi) v *= scale;
  }

  std::size_t n;
  double h;
  double length;
  double lambda;
  std::vector<double> dmid;
  std::vector<double> dv;
  std::vector<double> rv;
};

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double variational_functional(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                              double lambda, std::span<const double> phi) {
  return Discretization(d, r, lambda).functional(phi);
}

double euler_lagrange_residual(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                               double lambda, std::span<const double> phi) {
  return inf_norm(Discretization(d, r, lambda).residual(phi));
}

VariationalResult variational_value(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                                    double lambda, const VariationalOptions& options) {
  const Discretization disc(d, r, lambda);
  const std::size_t n = disc.n;
  const double h = disc.h;

  // H^1-type preconditioner: -(d u')' + beta u.
  const double beta = 1.0 + std::max(std::abs(r.min()), std::abs(r.max())) + lambda * lambda * d.max();
  CyclicTridiagonal precond{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    const double left = disc.dmid[(j + n - 1) % n];
    const double right = disc.dmid[j];
    precond.lower[j] = -left / (h * h);
    precond.upper[j] = -right / (h * h);
    precond.diag[j] = (left + right) / (h * h) + beta;
  }

  VariationalResult out;
  std::vector<double> phi(n, 1.0 / std::sqrt(disc.length));
  double value = disc.functional(phi);
  double step = 1.0;
  int stalled = 0;
  int it = 0;
  for (; it < options.max_iterations && stalled < options.stall_steps; ++it) {
    const std::vector<double> grad = disc.residual(phi);
    std::vector<double> dir = solve_cyclic(precond, grad);
    double along = 0.0;
    for (std::size_t j = 0; j < n; ++j) along += dir[j] * phi[j];
    along *= h;
    for (std::size_t j = 0; j < n; ++j) dir[j] -= along * phi[j];

    bool accepted = false;
    double trial_value = value;
    std::vector<double> trial(n);
    step = std::min(2.0 * step, 4.0);
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = std::max(phi[j] - step * dir[j], options.floor);
      disc.normalize(trial);
      trial_value = disc.functional(trial);
      if (trial_value < value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (it == 0 && inf_norm(grad) > 1e-8 * std::max(1.0, std::abs(value))) {
        throw NumericalError("variational",
                             "no descent from the constant start point despite a nonzero gradient");
      }
      break;
    }
    stalled = (value - trial_value < options.stall_decrease) ? stalled + 1 : 0;
    phi.swap(trial);
    value = trial_value;
  }
  out.iterations = it;
  out.value = value;
  out.el_residual = euler_lagrange_residual(d, r, lambda, phi);
  out.phi = std::move(phi);
  return out;
}

}  // namespace kpp
