#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "kpp/coeffs.hpp"
#include "kpp/eigen.hpp"
#include "kpp/errors.hpp"
#include "oracles.hpp"

using namespace kpp;

namespace {

const double kTwoPi = 2.0 * M_PI;

double spread(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
}

PeriodicCoefficient example1_d(std::size_t n = 256) { return parse_coefficient("1/(1 - 0.5*sin(x))", kTwoPi, n); }
PeriodicCoefficient example1_r(std::size_t n = 256) { return parse_coefficient("1 + 0.5*sin(x)", kTwoPi, n); }

}  // namespace

TEST_CASE("operator applied to constants") {
  const auto one = PeriodicCoefficient::constant(1.0, kTwoPi, 64);
  const std::vector<double> ones(64, 1.0);
  for (double v : assemble_operator(one, one, 1.0).apply(ones)) CHECK(v == -2.0);

  const auto two = PeriodicCoefficient::constant(2.0, 1.0, 64);
  const auto zero = PeriodicCoefficient::constant(0.0, 1.0, 64);
  for (double v : assemble_operator(two, zero, 3.0).apply(ones)) CHECK(v == -18.0);
}

TEST_CASE("zeroth-order term against a finite-difference derivative") {
  const auto d = example1_d();
  const auto r = example1_r();
  const OperatorMatrix op = assemble_operator(d, r, 1.0);
  const auto row = op.apply(std::vector<double>(256, 1.0));
  const auto df = [](double x) { return 1.0 / (1.0 - 0.5 * std::sin(x)); };
  for (std::size_t j = 0; j < 256; ++j) {
    const double x = kTwoPi * static_cast<double>(j) / 256.0;
    const double expected = -(df(x) + oracle::derivative(df, x, kTwoPi) + 1.0 + 0.5 * std::sin(x));
    CHECK(std::abs(row[j] - expected) < 1e-6);
  }
}

TEST_CASE("operator sign structure") {
  const auto d = example1_d(64);
  const auto r = example1_r(64);
  const OperatorMatrix op = assemble_operator(d, r, 1.0);
  CHECK(op.is_z_matrix());
  const auto dense = op.dense();
  for (std::size_t i = 0; i < 64; ++i) {
    for (std::size_t j = 0; j < 64; ++j) {
      const std::size_t gap = std::min((i + 64 - j) % 64, (j + 64 - i) % 64);
      if (gap > 1) CHECK(dense[i * 64 + j] == 0.0);
    }
  }
  CHECK_THROWS_AS(assemble_operator(d, r, 0.0), PreconditionError);
  CHECK_THROWS_AS(assemble_operator(parse_coefficient("sin(x)", kTwoPi, 64), r, 1.0), PreconditionError);
}

TEST_CASE("constant coefficients") {
  struct Case {
    double d, r, lambda;
  };
  for (const Case c : {Case{1, 1, 1}, Case{2, 3, 0.5}, Case{0.3, -0.2, 2.0}, Case{5, 1, 0.1}}) {
    const auto d = PeriodicCoefficient::constant(c.d, 1.0, 64);
    const auto r = PeriodicCoefficient::constant(c.r, 1.0, 64);
    const EigenPair e = principal_eigenpair(assemble_operator(d, r, c.lambda));
    CHECK(std::abs(e.k + (c.lambda * c.lambda * c.d + c.r)) < 1e-10);
    CHECK(spread(e.psi) < 1e-10);
  }
  const auto two = PeriodicCoefficient::constant(2.0, kTwoPi, 128);
  const auto three = PeriodicCoefficient::constant(3.0, kTwoPi, 128);
  CHECK(principal_eigenvalue(two, three, 0.5) == doctest::Approx(-3.5).epsilon(1e-12));
}

TEST_CASE("equality-case eigenpair") {
  const EigenPair e = principal_eigenpair(assemble_operator(example1_d(), example1_r(), 1.0));
  CHECK(std::abs(e.k + 2.0) < 1e-4);
  CHECK(*std::min_element(e.psi.begin(), e.psi.end()) > 0.0);
  CHECK(*std::max_element(e.psi.begin(), e.psi.end()) == 1.0);
  CHECK(spread(e.psi) > 0.01);
  CHECK(e.residual <= 1e-8 * std::max(1.0, std::abs(e.k)));
}

TEST_CASE("second-order grid convergence and the Galerkin oracle") {
  const auto d = [](double x) { return 1.0 + 0.3 * std::cos(x); };
  const auto r = [](double x) { return 1.0 + 0.5 * std::sin(x); };
  const double exact = oracle::principal_eigenvalue(d, r, kTwoPi, 1.0);
  double k[4];
  std::size_t n = 64;
  for (double& v : k) {
    v = principal_eigenvalue(parse_coefficient("1 + 0.3*cos(x)", kTwoPi, n),
                             parse_coefficient("1 + 0.5*sin(x)", kTwoPi, n), 1.0);
    n *= 2;
  }
  CHECK(std::abs(k[2] - exact) < 1e-4);
  const double order = std::log2(std::abs(k[1] - k[0]) / std::abs(k[2] - k[1]));
  CHECK(order > 1.9);
  CHECK(std::abs((4.0 * k[3] - k[2]) / 3.0 - exact) < 1e-8);
}

TEST_CASE("test-function upper bound and monotonicity in r") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int trial = 0; trial < 8; ++trial) {
    const double a = u(gen), b = u(gen), c = u(gen), lambda = 0.3 + std::abs(u(gen)) * 4;
    const auto d = PeriodicCoefficient::from_function(
        SourceKind::Derived, "d", [=](double x) { return 1.0 + a * std::sin(x) + 0.5 * b * std::cos(2 * x); }, kTwoPi, 256);
    const auto r = PeriodicCoefficient::from_function(
        SourceKind::Derived, "r", [=](double x) { return 0.5 + c * std::cos(x) + a * std::sin(3 * x); }, kTwoPi, 256);
    const double k = principal_eigenvalue(d, r, lambda);
    CHECK(k <= -arithmetic_mean(r) - lambda * lambda * harmonic_mean(d) + 1e-10);

    const auto bump = PeriodicCoefficient::from_function(
        SourceKind::Derived, "bump", [](double x) { return std::exp(std::cos(x)); }, kTwoPi, 256);
    CHECK(principal_eigenvalue(d, linear_combination(r, 0.1, bump), lambda) < k);
  }
}

TEST_CASE("left eigenpair and eigenvalue slope") {
  const auto d = parse_coefficient("1 + 0.3*cos(x)", kTwoPi, 128);
  const auto r = parse_coefficient("1 + 0.5*sin(x)", kTwoPi, 128);
  const OperatorMatrix op = assemble_operator(d, r, 0.8);
  const EigenPair right = principal_eigenpair(op);
  const EigenPair left = principal_left_eigenpair(op);
  CHECK(left.k == doctest::Approx(right.k).epsilon(1e-11));
  CHECK(*std::min_element(left.psi.begin(), left.psi.end()) > 0.0);

  const EigenvalueSlope s = principal_eigenvalue_with_slope(d, r, 0.8);
  const double h = 1e-5;
  const double fd = (principal_eigenvalue(d, r, 0.8 + h) - principal_eigenvalue(d, r, 0.8 - h)) / (2 * h);
  CHECK(s.k == doctest::Approx(right.k).epsilon(1e-12));
  CHECK(std::abs(s.dk_dlambda - fd) < 1e-6);
}

TEST_CASE("lambda beyond the grid's resolution fails loudly") {
  const auto d = PeriodicCoefficient::constant(1.0, kTwoPi, 16);
  CHECK_THROWS_AS(principal_eigenpair(assemble_operator(d, d, 10.0)), NumericalError);
}

TEST_CASE("variational characterization") {
  const double sqrt_l = std::sqrt(kTwoPi);
  const auto one = PeriodicCoefficient::constant(1.0, kTwoPi, 256);
  const VariationalResult flat = variational_value(one, one, 1.0);
  CHECK(flat.value == doctest::Approx(-2.0).epsilon(1e-12));
  for (double v : flat.phi) CHECK(v == doctest::Approx(1.0 / sqrt_l).epsilon(1e-12));

  const VariationalResult ex1 = variational_value(example1_d(), example1_r(), 1.0);
  CHECK(std::abs(ex1.value + 2.0) < 1e-10);
  std::vector<double> scaled_phi = ex1.phi;
  for (double& v : scaled_phi) v *= sqrt_l;
  CHECK(spread(scaled_phi) < 1e-6);

  const auto r = example1_r();
  const VariationalResult v = variational_value(one, r, 1.0);
  const double k = principal_eigenvalue(one, r, 1.0);
  CHECK(v.value < -2.0);
  CHECK(std::abs(v.value - k) <= 1e-4 * std::max(1.0, std::abs(k)));
  const double exact = oracle::principal_eigenvalue([](double) { return 1.0; },
                                                    [](double x) { return 1.0 + 0.5 * std::sin(x); }, kTwoPi, 1.0);
  CHECK(std::abs(v.value - exact) < 1e-4);
  const double integral = std::accumulate(v.phi.begin(), v.phi.end(), 0.0,
                                          [](double s, double p) { return s + p * p; }) * kTwoPi / 256.0;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Euler-Lagrange residual") {
  const std::vector<double> phi0(256, 1.0 / std::sqrt(kTwoPi));
  CHECK(euler_lagrange_residual(example1_d(), example1_r(), 1.0, phi0) < 1e-8);
  const auto one = PeriodicCoefficient::constant(1.0, kTwoPi, 256);
  CHECK(euler_lagrange_residual(one, one, 1.0, phi0) < 1e-12);
  // Only the r phi term varies: the residual is max|r - <r>_a| * phi0.
  CHECK(euler_lagrange_residual(one, example1_r(), 1.0, phi0) ==
        doctest::Approx(0.5 / std::sqrt(kTwoPi)).epsilon(1e-10));
}
