#include <cmath>
#include <random>

#include <doctest.h>

#include "kpp/coeffs.hpp"
#include "kpp/errors.hpp"
#include "kpp/expression.hpp"
#include "oracles.hpp"

using namespace kpp;

namespace {
const double kTwoPi = 2.0 * M_PI;
}

TEST_CASE("expression grammar") {
  CHECK(Expression::parse("1 + 2*3")(0.0) == 7.0);
  CHECK(Expression::parse("-x*-2")(1.5) == 3.0);
  CHECK(Expression::parse("2.5e-1 * 4")(0.0) == 1.0);
  CHECK(Expression::parse("(1 - 2) - 3")(0.0) == -4.0);
  CHECK(Expression::parse("8/2/2")(0.0) == 2.0);
  CHECK(Expression::parse("exp(0) + cos(pi)")(0.0) == doctest::Approx(0.0));
  CHECK(Expression::parse("sin(x)")(0.25) == std::sin(0.25));
}

TEST_CASE("syntax errors report one-based positions") {
  try {
    parse_coefficient("1 + 2*sin(x", kTwoPi, 256);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 12);
  }
  try {
    Expression::parse("1 + * 2");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 5);
  }
  CHECK_THROWS_AS(Expression::parse("tan(x)"), ParseError);
  CHECK_THROWS_AS(Expression::parse(""), ParseError);
  CHECK_THROWS_AS(Expression::parse("1 2"), ParseError);
}

TEST_CASE("division by zero at a grid node is a precondition error") {
  CHECK_THROWS_AS(parse_coefficient("1/sin(x)", kTwoPi, 64), PreconditionError);
  CHECK_THROWS_AS(parse_coefficient("1/(x - x)", kTwoPi, 64), PreconditionError);
}

TEST_CASE("grid size and period are validated") {
  CHECK_THROWS_AS(parse_coefficient("1", 1.0, 200), PreconditionError);
  CHECK_THROWS_AS(parse_coefficient("1", 1.0, 8), PreconditionError);
  CHECK_THROWS_AS(parse_coefficient("1", 0.0, 64), PreconditionError);
  CHECK_THROWS_AS(parse_coefficient("1", -1.0, 64), PreconditionError);
  CHECK_NOTHROW(parse_coefficient("1", 1.0, 16));
}

TEST_CASE("parse examples") {
  const auto r = parse_coefficient("1 + 0.5*sin(x)", kTwoPi, 256);
  CHECK(r.grid_size() == 256);
  CHECK(arithmetic_mean(r) == doctest::Approx(1.0).epsilon(1e-14));

  const auto d = parse_coefficient("1/(1 - 0.5*sin(x))", kTwoPi, 256);
  CHECK(d.min() > 0.0);
  CHECK(d.min() == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  // x = 3 pi / 2 is node 192 of 256.
  CHECK(d.samples()[192] == d.min());
}

TEST_CASE("expression samples are exact node evaluations") {
  const auto c = parse_coefficient("exp(cos(x)) - 0.3*sin(2*x)", kTwoPi, 64);
  for (std::size_t j = 0; j < 64; ++j) {
    const double x = kTwoPi * static_cast<double>(j) / 64.0;
    CHECK(c.samples()[j] == std::exp(std::cos(x)) - 0.3 * std::sin(2 * x));
  }
}

TEST_CASE("means") {
  const auto three = PeriodicCoefficient::constant(3.0, 1.0, 64);
  const MeanSummary m3 = means(three);
  CHECK(m3.arithmetic_mean == 3.0);
  REQUIRE(m3.harmonic_mean);
  CHECK(*m3.harmonic_mean == doctest::Approx(3.0).epsilon(1e-15));

  const auto d = parse_coefficient("1/(1 - 0.5*sin(x))", kTwoPi, 256);
  const MeanSummary md = means(d);
  CHECK(*md.harmonic_mean == doctest::Approx(1.0).epsilon(1e-14));
  // <1/(1 - a sin x)> = 1/sqrt(1 - a^2)
  CHECK(md.arithmetic_mean == doctest::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-12));

  const auto r = parse_coefficient("1 + 0.5*sin(x)", kTwoPi, 256);
  const MeanSummary mr = means(r);
  REQUIRE(mr.harmonic_mean);
  const double oracle_h = oracle::harmonic_mean([](double x) { return 1 + 0.5 * std::sin(x); }, kTwoPi);
  CHECK(*mr.harmonic_mean < 1.0);
  CHECK(*mr.harmonic_mean == doctest::Approx(oracle_h).epsilon(1e-12));

  const auto s = parse_coefficient("sin(x)", kTwoPi, 64);
  CHECK_FALSE(means(s).harmonic_mean.has_value());
  CHECK_THROWS_AS(harmonic_mean(s), PreconditionError);
}

TEST_CASE("means are stable under refinement and satisfy AM >= HM") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = u(gen), b = u(gen), c = u(gen);
    const auto f = [=](double x) { return 1.0 + a * std::cos(x) + b * std::sin(2 * x) + c * std::cos(3 * x); };
    const auto coarse = PeriodicCoefficient::from_function(SourceKind::Derived, "f", f, kTwoPi, 128);
    const auto fine = coarse.resampled(256);
    const double ha = harmonic_mean(coarse), aa = arithmetic_mean(coarse);
    CHECK(ha <= aa);
    CHECK(std::abs(arithmetic_mean(fine) - aa) < 1e-12);
    CHECK(std::abs(harmonic_mean(fine) - ha) < 1e-9);
    CHECK(coarse.resolution_change() < 1e-9);
  }
  const auto nearly = parse_coefficient("2 + 1e-9*cos(x)", kTwoPi, 64);
  CHECK(arithmetic_mean(nearly) - harmonic_mean(nearly) < 1e-10);
  CHECK(nearly.max() - nearly.min() < 1e-6);
}

TEST_CASE("Fourier records") {
  const auto c = parse_coefficient("fourier: 1, [0.5, 0], [0, 0.25]", 2.0, 64);
  for (std::size_t j = 0; j < 64; ++j) {
    const double x = 2.0 * static_cast<double>(j) / 64.0;
    CHECK(c.samples()[j] ==
          doctest::Approx(1 + 0.5 * std::cos(M_PI * x) + 0.25 * std::sin(2 * M_PI * x)).epsilon(1e-15));
  }
  const auto rc = parse_coefficient("reciprocal_fourier: 1, [0, -0.5]", kTwoPi, 256);
  const auto d = parse_coefficient("1/(1 - 0.5*sin(x))", kTwoPi, 256);
  for (std::size_t j = 0; j < 256; ++j) CHECK(rc.samples()[j] == doctest::Approx(d.samples()[j]).epsilon(1e-15));

  CHECK_THROWS_AS(parse_coefficient("fourier: 1, [0.5]", 1.0, 64), ParseError);
  CHECK_THROWS_AS(parse_coefficient("fourier: ", 1.0, 64), ParseError);
  CHECK_THROWS_AS(parse_coefficient("reciprocal_fourier: 0", 1.0, 64), PreconditionError);
}

TEST_CASE("Fourier pretty-print round trip is bit exact") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FourierRecord rec;
  rec.a0 = 2.0 + u(gen);
  for (int k = 0; k < 5; ++k) {
    rec.cos_coeffs.push_back(u(gen) / 3.0);
    rec.sin_coeffs.push_back(u(gen) / 3.0);
  }
  const std::string text = "fourier: " + format_fourier_payload(rec);
  const auto a = parse_coefficient(text, 3.0, 128);
  const auto b = parse_coefficient("fourier: " + format_fourier_payload(parse_fourier_payload(format_fourier_payload(rec))), 3.0, 128);
  for (std::size_t j = 0; j < 128; ++j) {
    CHECK(a.samples()[j] == b.samples()[j]);
    CHECK(a.samples()[j] == rec.evaluate(3.0 * static_cast<double>(j) / 128.0, 3.0));
  }
}

TEST_CASE("rescale_period") {
  const auto d = parse_coefficient("1/(1 - 0.5*sin(x))", kTwoPi, 128);
  const auto same = rescale_period(d, kTwoPi);
  for (std::size_t j = 0; j < 128; ++j) CHECK(same.samples()[j] == d.samples()[j]);

  const auto small = rescale_period(d, 0.01);
  CHECK(small.period() == 0.01);
  CHECK(small.grid_size() == 128);
  CHECK(harmonic_mean(small) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(arithmetic_mean(small) - arithmetic_mean(d)) < 1e-12);

  const auto r = parse_coefficient("1 + 0.5*sin(2*pi*x)", 1.0, 256);
  const auto r7 = rescale_period(r, 7.0);
  for (std::size_t j = 0; j < 256; ++j) {
    const double x = 7.0 * static_cast<double>(j) / 256.0;
    CHECK(r7.samples()[j] == doctest::Approx(1 + 0.5 * std::sin(2 * M_PI * x / 7.0)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(rescale_period(r, 0.0), PreconditionError);
}

TEST_CASE("raw samples") {
  std::vector<double> s(32);
  for (std::size_t j = 0; j < 32; ++j) s[j] = 2.0 + std::cos(kTwoPi * static_cast<double>(j) / 32.0);
  const auto c = PeriodicCoefficient::from_samples(s, kTwoPi);
  CHECK(c.source() == SourceKind::Samples);
  CHECK_FALSE(c.has_exact_evaluator());
  // Trigonometric interpolation reproduces a band-limited function.
  CHECK(c(0.3) == doctest::Approx(2.0 + std::cos(0.3)).epsilon(1e-13));
  const auto fine = c.resampled(64);
  CHECK(fine.samples()[1] == doctest::Approx(2.0 + std::cos(kTwoPi / 64.0)).epsilon(1e-13));
  const auto mids = c.midpoint_samples();
  CHECK(mids[0] == doctest::Approx(0.5 * (s[0] + s[1])).epsilon(1e-15));
  CHECK_THROWS_AS(PeriodicCoefficient::from_samples(std::vector<double>(24, 1.0), 1.0), PreconditionError);
  CHECK_THROWS_AS(PeriodicCoefficient::from_samples({1, 2, 3}, 1.0), PreconditionError);
}

TEST_CASE("spectral derivative matches a fine centered difference") {
  const auto f = [](double x) { return 1.0 / (1.0 - 0.5 * std::sin(x)); };
  const auto d = parse_coefficient("1/(1 - 0.5*sin(x))", kTwoPi, 256);
  const auto dp = d.derivative_samples();
  for (std::size_t j = 0; j < 256; j += 7) {
    const double x = kTwoPi * static_cast<double>(j) / 256.0;
    CHECK(std::abs(dp[j] - oracle::derivative(f, x, kTwoPi)) < 1e-6);
  }
}

TEST_CASE("positivity and compatibility checks") {
  CHECK_THROWS_AS(require_positive(parse_coefficient("sin(x)", kTwoPi, 64), "d"), PreconditionError);
  CHECK_NOTHROW(require_positive(parse_coefficient("1.5 + sin(x)", kTwoPi, 64), "d"));
  // A dip missed by the 16-point grid is caught by the 2N re-check.
  CHECK_THROWS_AS(require_positive(parse_coefficient("1 - 1.02*sin(8*x)*sin(8*x)", kTwoPi, 16), "d"),
                  PreconditionError);
  CHECK_THROWS_AS(require_compatible(PeriodicCoefficient::constant(1, 1.0, 64), PeriodicCoefficient::constant(1, 2.0, 64)),
                  PreconditionError);
  CHECK_THROWS_AS(require_compatible(PeriodicCoefficient::constant(1, 1.0, 64), PeriodicCoefficient::constant(1, 1.0, 32)),
                  PreconditionError);
}

TEST_CASE("constraint set and combinations") {
  CHECK_THROWS_AS(ConstraintSet(0.0, 1.0), PreconditionError);
  const ConstraintSet set(1.0, kTwoPi);
  CHECK(set.contains(parse_coefficient("1 + 0.5*sin(x)", kTwoPi, 64)));
  CHECK_FALSE(set.contains(parse_coefficient("1.1 + 0.5*sin(x)", kTwoPi, 64)));
  const auto a = parse_coefficient("1", kTwoPi, 64);
  const auto b = parse_coefficient("sin(x)", kTwoPi, 64);
  const auto c = linear_combination(a, 0.5, b);
  CHECK(c.samples()[16] == doctest::Approx(1.5));
  CHECK(scaled(c, 2.0).samples()[16] == doctest::Approx(3.0));
}
