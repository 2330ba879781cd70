#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kpp/coeffs.hpp"
#include "kpp/tridiag.hpp"

namespace kpp {

// Second-order discretization of the periodic operator
//
//   psi -> -(d psi')' - 2 lambda d psi' - (lambda^2 d + lambda d' + r) psi
//
// The flux term uses d at cell midpoints, the advection term centered
// differences, and d' comes from spectral differentiation of d.
struct OperatorMatrix {
  double lambda = 0.0;
  double period = 0.0;
  CyclicTridiagonal entries;

  // Flux-form data; apply() uses it to avoid cancellation between the
  // O(1/h^2) entries when psi is nearly constant.
  double spacing = 0.0;
  std::vector<double> d_mid;      // d(x_{j+1/2})
  std::vector<double> d_node;     // d(x_j)
  std::vector<double> potential;  // lambda^2 d + lambda d' + r at x_j

  std::size_t grid_size() const noexcept { return entries.size(); }
  std::vector<double> dense() const { return entries.dense(); }
  std::vector<double> apply(std::span<const double> psi) const;

  // True when every off-diagonal entry is <= 0 (Perron theory applies).
  bool is_z_matrix() const;
};

OperatorMatrix assemble_operator(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                                 double lambda);

struct EigenPair {
  double k = 0.0;
  std::vector<double> psi;  // positive, max-normalized
  double residual = 0.0;    // ||A psi - k psi||_inf
  int iterations = 0;
};

struct EigenOptions {
  double tolerance = 1e-12;  // relative change of the iterate
  int max_iterations = 10000;
};

// Perron eigenpair of the discretized operator by shifted inverse iteration.
// Throws NumericalError when the operator has positive off-diagonal entries
// (lambda * h too large for the grid), on non-convergence, or on a
// sign-changing eigenvector.
EigenPair principal_eigenpair(const OperatorMatrix& op, const EigenOptions& options = {});

// Positive left eigenvector (A^T w = k w), max-normalized.
EigenPair principal_left_eigenpair(const OperatorMatrix& op, const EigenOptions& options = {});

// k_lambda(d, r) and dk/dlambda for the discrete operator. The derivative is
// <w, (dA/dlambda) psi> / <w, psi> with w the left eigenvector.
struct EigenvalueSlope {
  double k = 0.0;
  double dk_dlambda = 0.0;
};
EigenvalueSlope principal_eigenvalue_with_slope(const PeriodicCoefficient& d,
                                                const PeriodicCoefficient& r, double lambda,
                                                const EigenOptions& options = {});

double principal_eigenvalue(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                            double lambda, const EigenOptions& options = {});

// Discrete Rayleigh-type functional
//   I(phi) = int d |phi'|^2 - int r phi^2 - lambda^2 L^2 / int 1/(d phi^2)
// with trapezoid sums, forward differences and midpoint d.
double variational_functional(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                              double lambda, std::span<const double> phi);

struct VariationalResult {
  double value = 0.0;
  std::vector<double> phi;  // positive, int phi^2 = 1
  double el_residual = 0.0;
  int iterations = 0;
};

struct VariationalOptions {
  double floor = 1e-8;
  double stall_decrease = 1e-12;
  int stall_steps = 20;
  int max_iterations = 20000;
};

// Minimizes the functional over positive phi with int phi^2 = 1 by projected
// descent along an H^1-preconditioned gradient, starting from phi = 1/sqrt(L).
VariationalResult variational_value(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                                    double lambda, const VariationalOptions& options = {});

// ||-(d phi')' - r phi - lambda^2 L^2 / (int 1/(d phi^2))^2 / (d phi^3) - I(phi) phi||_inf
double euler_lagrange_residual(const PeriodicCoefficient& d, const PeriodicCoefficient& r,
                               double lambda, std::span<const double> phi);

}  // namespace kpp
