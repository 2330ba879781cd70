#include "kpp/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kpp {

std::vector<double> CyclicTridiagonal::apply(std::span<const double> x) const {
  const std::size_t n = size();
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) {
    y[j] = lower[j] * x[(j + n - 1) % n] + diag[j] * x[j] + upper[j] * x[(j + 1) % n];
  }
  return y;
}

CyclicTridiagonal CyclicTridiagonal::transposed() const {
  const std::size_t n = size();
  CyclicTridiagonal t{std::vector<double>(n), diag, std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    // A^T(j, j-1) = A(j-1, j), A^T(j, j+1) = A(j+1, j)
    t.lower[j] = upper[(j + n - 1) % n];
    t.upper[j] = lower[(j + 1) % n];
  }
  return t;
}

CyclicTridiagonal CyclicTridiagonal::shifted(double sigma) const {
  CyclicTridiagonal s = *this;
  for (double& v : s.diag) v -= sigma;
  return s;
}

std::vector<double> CyclicTridiagonal::dense() const {
  const std::size_t n = size();
  std::vector<double> m(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    m[j * n + (j + n - 1) % n] += lower[j];
    m[j * n + j] += diag[j];
    m[j * n + (j + 1) % n] += upper[j];
  }
  return m;
}

double CyclicTridiagonal::gershgorin_lower_bound() const {
  double bound = INFINITY;
  for (std::size_t j = 0; j < size(); ++j) {
    bound = std::min(bound, diag[j] - std::abs(lower[j]) - std::abs(upper[j]));
  }
  return bound;
}

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> b) {
  const std::size_t n = diag.size();
  std::vector<double> c(n), x(n);
  double beta = diag[0];
  if (beta == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
  x[0] = b[0] / beta;
  for (std::size_t j = 1; j < n; ++j) {
    c[j] = upper[j - 1] / beta;
    beta = diag[j] - lower[j] * c[j];
    if (beta == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
    x[j] = (b[j] - lower[j] * x[j - 1]) / beta;
  }
  for (std::size_t j = n - 1; j-- > 0;) x[j] -= c[j + 1] * x[j + 1];
  return x;
}

std::vector<double> solve_cyclic(const CyclicTridiagonal& a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n < 3) throw std::invalid_argument("cyclic tridiagonal solve needs N >= 3");
  const double alpha = a.upper[n - 1];  // A(n-1, 0)
  const double beta = a.lower[0];       // A(0, n-1)
  const double gamma = -a.diag[0];

  std::vector<double> diag = a.diag;
  diag[0] -= gamma;
  diag[n - 1] -= alpha * beta / gamma;

  std::vector<double> x = solve_tridiagonal(a.lower, diag, a.upper, b);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  std::vector<double> z = solve_tridiagonal(a.lower, diag, a.upper, u);

  const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t j = 0; j < n; ++j) x[j] -= fact * z[j];
  return x;
}

}  // namespace kpp
