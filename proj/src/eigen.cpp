#include "kpp/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "kpp/errors.hpp"

namespace kpp {

namespace {

void check_operator_inputs(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                           double lambda) {
  require_compatible(d, r);
  if (!(d.min() > 0.0)) throw PreconditionError("diffusion coefficient d must be strictly positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw PreconditionError(fmt::format("lambda must be positive, got {}", lambda));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Scales v so that its entry of largest magnitude equals +1.
void max_normalize(std::vector<double>& v) {
  const auto it = std::max_element(v.begin(), v.end(),
                                   [](double a, double b) { return std::abs(a) < std::abs(b); });
  const double s = *it;
  for (double& x : v) x /= s;
}

template <typename Apply>
EigenPair inverse_iteration(const CyclicTridiagonal& a, Apply&& apply, const EigenOptions& options) {
  const std::size_t n = a.size();
  const double bound =
      std::min(a.gershgorin_lower_bound(), a.transposed().gershgorin_lower_bound());
  // The bound can coincide with the eigenvalue (constant coefficients); step
  // slightly below it so the shifted matrix stays nonsingular.
  const double sigma = bound - 1e-3 * (1.0 + std::abs(bound));
  const CyclicTridiagonal shifted = a.shifted(sigma);

  std::vector<double> x(n, 1.0);
  EigenPair out;
  bool converged = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    std::vector<double> y = solve_cyclic(shifted, x);
    max_normalize(y);
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) change = std::max(change, std::abs(y[j] - x[j]));
    x = std::move(y);
    out.iterations = it;
    if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
      throw NumericalError("eigen", "inverse iteration produced non-finite values");
    }
    if (change < options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NumericalError("eigen", fmt::format("inverse iteration did not converge in {} iterations",
                                              options.max_iterations));
  }
  if (*std::min_element(x.begin(), x.end()) <= 0.0) {
    throw NumericalError("eigen",
                         "principal eigenvector changes sign; discretization too coarse");
  }
  const std::vector<double> ax = apply(x);
  out.k = dot(x, ax) / dot(x, x);
  double res = 0.0;
  for (std::size_t j = 0; j < n; ++j) res = std::max(res, std::abs(ax[j] - out.k * x[j]));
  out.residual = res;
  out.psi = std::move(x);
  return out;
}

}  // namespace

OperatorMatrix assemble_operator(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                                 double lambda) {
  check_operator_inputs(d, r, lambda);
  const std::size_t n = d.grid_size();
  const double h = d.spacing();
  const double h2 = h * h;
  const std::vector<double> dmid = d.midpoint_samples();  // d(x_{j+1/2})
  const std::vector<double> dprime = d.derivative_samples();
  const auto dv = d.samples();
  const auto rv = r.samples();

  OperatorMatrix op;
  op.lambda = lambda;
  op.period = d.period();
  op.entries.lower.resize(n);
  op.entries.diag.resize(n);
  op.entries.upper.resize(n);
  op.spacing = h;
  op.d_mid = dmid;
  op.d_node.assign(dv.begin(), dv.end());
  op.potential.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double left = dmid[(j + n - 1) % n];
    const double right = dmid[j];
    op.entries.lower[j] = -left / h2 + lambda * dv[j] / h;
    op.entries.upper[j] = -right / h2 - lambda * dv[j] / h;
    op.potential[j] = lambda * lambda * dv[j] + lambda * dprime[j] + rv[j];
    op.entries.diag[j] = (left + right) / h2 - op.potential[j];
  }
  return op;
}

std::vector<double> OperatorMatrix::apply(std::span<const double> psi) const {
  const std::size_t n = grid_size();
  const double h = spacing;
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double prev = psi[(j + n - 1) % n];
    const double next = psi[(j + 1) % n];
    const double flux = d_mid[j] * (next - psi[j]) - d_mid[(j + n - 1) % n] * (psi[j] - prev);
    out[j] = -flux / (h * h) - lambda * d_node[j] * (next - prev) / h - potential[j] * psi[j];
  }
  return out;
}

bool OperatorMatrix::is_z_matrix() const {
  for (std::size_t j = 0; j < grid_size(); ++j) {
    if (entries.lower[j] > 0.0 || entries.upper[j] > 0.0) return false;
  }
  return true;
}

namespace {

void require_z_matrix(const OperatorMatrix& op) {
  if (!op.is_z_matrix()) {
    throw NumericalError("eigen", fmt::format("lambda = {:.6g} is too large for grid spacing {:.6g}: "
                                              "the discrete operator has positive off-diagonal "
                                              "entries",
                                              op.lambda, op.spacing));
  }
}

}  // namespace

EigenPair principal_eigenpair(const OperatorMatrix& op, const EigenOptions& options) {
  require_z_matrix(op);
  return inverse_iteration(
      op.entries, [&op](std::span<const double> x) { return op.apply(x); }, options);
}

EigenPair principal_left_eigenpair(const OperatorMatrix& op, const EigenOptions& options) {
  require_z_matrix(op);
  const CyclicTridiagonal t = op.entries.transposed();
  return inverse_iteration(
      t, [&t](std::span<const double> x) { return t.apply(x); }, options);
}

double principal_eigenvalue(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                            double lambda, const EigenOptions& options) {
  return principal_eigenpair(assemble_operator(d, r, lambda), options).k;
}

EigenvalueSlope principal_eigenvalue_with_slope(const PeriodicCoefficient& d,
                                                const PeriodicCoefficient& r, double lambda,
                                                const EigenOptions& options) {
  const OperatorMatrix op = assemble_operator(d, r, lambda);
  const EigenPair right = principal_eigenpair(op, options);
  const EigenPair left = principal_left_eigenpair(op, options);

  const std::size_t n = op.grid_size();
  const double h = d.spacing();
  const std::vector<double> dprime = d.derivative_samples();
  const auto dv = d.samples();
  CyclicTridiagonal da{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    da.lower[j] = dv[j] / h;
    da.upper[j] = -dv[j] / h;
    da.diag[j] = -(2.0 * lambda * dv[j] + dprime[j]);
  }
  const std::vector<double> dpsi = da.apply(right.psi);
  return {right.k, dot(left.psi, dpsi) / dot(left.psi, right.psi)};
}

}  // namespace kpp
