// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "kpp/coeffs.hpp"
#include "kpp/eigen.hpp"
#include "kpp/optimal.hpp"
#include "kpp/pde.hpp"
#include "kpp/speed.hpp"

using namespace kpp;

namespace {

const double kTwoPi = 2.0 * M_PI;

struct Outcome {
  bool pass;
  std::string detail;
};

PeriodicCoefficient coef(const std::string& text, std::size_t n = kDefaultGridSize, double period = kTwoPi) {
  return parse_coefficient(text, period, n);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<std::string> kOptimalCatalogue = {"1 + 0.5*cos(x)", "1/(1 - 0.5*sin(x))", "3 + sin(x)"};
const std::vector<std::string> kBarrierCatalogue = {"1", "2", "1 + 0.5*cos(x)", "1/(1 - 0.5*sin(x))", "3 + sin(x)"};

// Trigonometric polynomial of order <= 3 with coefficients in [-amp, amp].
std::function<double(double)> random_series(std::mt19937_64& gen, double period, double amp) {
  std::vector<double> a(3), b(3);
  for (int k = 0; k < 3; ++k) {
    a[k] = amp * uniform_symmetric(gen);
    b[k] = amp * uniform_symmetric(gen);
  }
  return [=](double x) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double w = 2.0 * M_PI * (k + 1) * x / period;
      s += a[k] * std::cos(w) + b[k] * std::sin(w);
    }
    return s;
  };
}

struct RandomPair {
  PeriodicCoefficient d;
  PeriodicCoefficient r;
};

// Smooth pair with min d > 0.2 and <r>_a > 0.2; r may change sign.
RandomPair random_pair(std::mt19937_64& gen) {
  const double period = 0.5 + 4.75 * (1.0 + uniform_symmetric(gen));
  const auto dosc = random_series(gen, period, 0.4);
  const auto rosc = random_series(gen, period, 0.8);
  const double r0 = 0.2 + 0.1 + 0.5 * (1.0 + uniform_symmetric(gen));
  double lowest = INFINITY;
  for (int j = 0; j < 4096; ++j) lowest = std::min(lowest, dosc(period * j / 4096.0));
  const double d0 = 0.3 - lowest + 0.5 * (1.0 + uniform_symmetric(gen));
  auto d = PeriodicCoefficient::from_function(SourceKind::Derived, "random d",
                                              [=](double x) { return d0 + dosc(x); }, period, kDefaultGridSize);
  auto r = PeriodicCoefficient::from_function(SourceKind::Derived, "random r",
                                              [=](double x) { return r0 + rosc(x); }, period, kDefaultGridSize);
  return {std::move(d), std::move(r)};
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const SpeedResult s = minimal_speed(coef("1/(1 - 0.5*sin(x))"), coef("1 + 0.5*sin(x)"));
  const double secs = seconds_since(t0);
  const double e256 = std::abs(s.c_star - 2.0);
  const double erich = std::abs(s.richardson_estimate - 2.0);
  return {e256 < 1e-3 && erich < 1e-5 && secs < 10.0,
          fmt::format("|c*(256) - 2| = {:.2e}, |Richardson(256,512) - 2| = {:.2e}, {:.2f} s", e256, erich, secs)};
}

Outcome criterion2() {
  const auto one = coef("1");
  const SpeedResult s = minimal_speed(one, one);
  double worst_k = 0.0;
  for (double lambda : {0.5, 1.0, 2.0}) {
    worst_k = std::max(worst_k, std::abs(principal_eigenvalue(one, one, lambda) + (lambda * lambda + 1.0)));
  }
  const double ec = std::abs(s.c_star - 2.0), el = std::abs(s.lambda_star - 1.0);
  return {ec < 1e-8 && el < 1e-8 && worst_k < 1e-10,
          fmt::format("|c* - 2| = {:.2e}, |lambda* - 1| = {:.2e}, max |k + lambda^2 + 1| = {:.2e}", ec, el, worst_k)};
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(20240601);
  double worst = INFINITY;
  for (int i = 0; i < 20; ++i) {
    const RandomPair p = random_pair(gen);
    const SpeedResult s = minimal_speed(p.d, p.r);
    worst = std::min(worst, s.c_star - s.lower_bound);
  }
  const double secs = seconds_since(t0);
  return {worst >= -1e-6 && secs < 300.0,
          fmt::format("min (c* - lower bound) over 20 pairs = {:.3e}, {:.1f} s", worst, secs)};
}

Outcome criterion4() {
  double worst_gap = 0.0, min_delta = INFINITY, min_signed = INFINITY;
  const double eps[] = {-0.5, -0.1, 0.1, 0.5};
  for (const std::string& text : kOptimalCatalogue) {
    const auto d = coef(text);
    const SpeedResult s = minimal_speed(d, optimal_growth(d, 1.0));
    worst_gap = std::max(worst_gap, std::abs(s.c_star - 2.0 * std::sqrt(harmonic_mean(d))));
    const PerturbationStudy study = perturbation_study(d, 1.0, eps, 42);
    for (const PerturbationTrial& t : study.trials) {
      min_signed = std::min(min_signed, t.delta);
      if (std::abs(t.epsilon) >= 0.1) min_delta = std::min(min_delta, t.delta);
    }
  }
  return {worst_gap < 1e-4 && min_signed >= -1e-6 && min_delta > 1e-5,
          fmt::format("max |c*(r_d) - 2 sqrt(<d>_h)| = {:.2e}, min delta = {:.3e} (10 eta x 4 eps x 3 d)",
                      worst_gap, min_delta)};
}

Outcome criterion5() {
  double worst = 0.0;
  for (const std::string& text : kOptimalCatalogue) {
    for (double k : {1e-3, 1.0, 1e3}) worst = std::max(worst, scale_invariance_check(coef(text), 1.0, k));
  }
  return {worst < 1e-12, fmt::format("max |r_kd - r_d| = {:.2e}", worst)};
}

Outcome criterion6() {
  double worst_constant = 0.0, least_varying = INFINITY;
  bool verdicts = true;
  for (const char* text : {"1", "2", "4"}) {
    const ConstancyResult c = constancy_test(coef(text), 1.0);
    worst_constant = std::max(worst_constant, c.deviation);
    verdicts = verdicts && c.verdict == Constancy::Constant;
  }
  for (const std::string& text : kOptimalCatalogue) {
    const ConstancyResult c = constancy_test(coef(text), 1.0);
    least_varying = std::min(least_varying, c.deviation);
    verdicts = verdicts && c.verdict == Constancy::Nonconstant;
  }
  return {verdicts && worst_constant < 1e-6 && least_varying > 1e-3,
          fmt::format("constant d: max deviation {:.2e}; nonconstant d: min deviation {:.3f}", worst_constant,
                      least_varying)};
}

Outcome criterion7() {
  // Both discretizations converge to the same continuum value at second
  // order; at N = 256 their difference can reach ~1e-4 for lambda near 3, so
  // the comparison runs at N = 1024 and the N = 256 figure is reported too.
  constexpr std::size_t kFine = 1024;
  std::mt19937_64 gen(777);
  double worst = 0.0, worst_coarse = 0.0;
  for (int i = 0; i < 10; ++i) {
    const RandomPair p = random_pair(gen);
    const double lambda = 0.2 + 1.4 * (1.0 + uniform_symmetric(gen));
    const auto d = p.d.resampled(kFine);
    const auto r = p.r.resampled(kFine);
    const double k = principal_eigenvalue(d, r, lambda);
    const double v = variational_value(d, r, lambda).value;
    worst = std::max(worst, std::abs(v - k) / std::max(1.0, std::abs(k)));
    const double kc = principal_eigenvalue(p.d, p.r, lambda);
    const double vc = variational_value(p.d, p.r, lambda).value;
    worst_coarse = std::max(worst_coarse, std::abs(vc - kc) / std::max(1.0, std::abs(kc)));
  }
  double worst_el = 0.0;
  for (const std::string& text : kOptimalCatalogue) {
    const auto d = coef(text);
    const auto r = optimal_growth(d, 1.0);
    const std::vector<double> phi0(d.grid_size(), 1.0 / std::sqrt(d.period()));
    worst_el = std::max(worst_el, euler_lagrange_residual(d, r, std::sqrt(1.0 / harmonic_mean(d)), phi0));
  }
  return {worst <= 1e-4 && worst_el < 1e-8,
          fmt::format("max |I - k| / max(1,|k|) = {:.2e} on 10 triples at N = 1024 ({:.2e} at N = 256), "
                      "max EL residual at phi0 = {:.2e}",
                      worst, worst_coarse, worst_el)};
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> ls(12);
  for (int i = 0; i < 12; ++i) ls[i] = 0.05 * std::pow(20.0 / 0.05, i / 11.0);
  ls.back() = 20.0;
  const PeriodScan het = period_scan(coef("1", kDefaultGridSize, 1.0), coef("1 + 0.5*sin(2*pi*x)", kDefaultGridSize, 1.0), ls);
  const PeriodScan eq = period_scan(coef("1/(1 - 0.5*sin(2*pi*x))", kDefaultGridSize, 1.0),
                                    coef("1 + 0.5*sin(2*pi*x)", kDefaultGridSize, 1.0), ls);
  const double secs = seconds_since(t0);
  const double e0 = std::abs(het.speeds.front() - 2.0);
  const bool ok = het.nondecreasing(1e-6) && e0 < 1e-3 && het.second_difference_at_zero > 0.0 &&
                  het.curvature_detected() &&
                  std::abs(eq.second_difference_at_zero) < eq.second_difference_tolerance && secs < 600.0;
  return {ok, fmt::format("nondecreasing {}, |c*_0.05 - 2| = {:.2e}, second difference {:.3e} (tol {:.2e}); "
                          "equality pair {:.2e} (tol {:.2e}); {:.1f} s",
                          het.nondecreasing(1e-6), e0, het.second_difference_at_zero,
                          het.second_difference_tolerance, eq.second_difference_at_zero,
                          eq.second_difference_tolerance, secs)};
}

Outcome criterion9() {
  struct Case {
    const char* d;
    const char* r;
  };
  bool ok = true;
  std::string detail;
  for (const Case c : {Case{"1", "1"}, Case{"1/(1 - 0.5*sin(x))", "1 + 0.5*sin(x)"}, Case{"1", "1 + 0.5*sin(x)"}}) {
    const double cstar = minimal_speed(coef(c.d), coef(c.r)).richardson_estimate;
    const auto t0 = std::chrono::steady_clock::now();
    const SpreadingEstimate e = spreading_speed_estimate(SimulationConfig(coef(c.d, 64), coef(c.r, 64)));
    const double secs = seconds_since(t0);
    const double rel = std::abs(e.speed - cstar) / cstar;
    ok = ok && rel <= 0.05 && secs < 120.0;
    detail += fmt::format("{}{:.2f}% ({:.1f} s)", detail.empty() ? "relative errors " : ", ", 100.0 * rel, secs);
  }
  return {ok, detail};
}

Outcome criterion10() {
  const auto r = coef("1 + 2*sin(x)");
  double least = INFINITY;
  for (const std::string& text : kBarrierCatalogue) {
    const auto d = coef(text);
    least = std::min(least, minimal_speed(d, r).c_star - 2.0 * std::sqrt(harmonic_mean(d)));
  }
  return {least > 1e-3, fmt::format("min (c* - 2 sqrt(<d>_h)) over 5 sampled d = {:.3f} (sampled, not universal)", least)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"exact example speed", criterion1},  {"homogeneous oracle", criterion2},
      {"lower bound", criterion3},          {"optimality of r_d", criterion4},
      {"scale invariance", criterion5},     {"eigenfunction dichotomy", criterion6},
      {"variational cross-check", criterion7}, {"period scan", criterion8},
      {"spreading-speed coincidence", criterion9}, {"fixed-growth barrier", criterion10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failures += o.pass ? 0 : 1;
    fmt::print("criterion {:2} {} [{}]: {}\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
