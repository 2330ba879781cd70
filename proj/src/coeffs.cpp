#include "kpp/coeffs.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "kpp/errors.hpp"
#include "kpp/spectral.hpp"

namespace kpp {

const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::Expression: return "expression";
    case SourceKind::Fourier: return "fourier";
    case SourceKind::ReciprocalFourier: return "reciprocal_fourier";
    case SourceKind::Samples: return "samples";
    case SourceKind::Derived: return "derived";
  }
  return "unknown";
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

void check_grid(double period, std::size_t grid_size) {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw PreconditionError(fmt::format("period must be positive and finite, got {}", period));
  }
  if (grid_size < kMinGridSize || !is_power_of_two(grid_size)) {
    throw PreconditionError(
        fmt::format("grid size must be a power of two >= {}, got {}", kMinGridSize, grid_size));
  }
}

double node(std::size_t j, double period, std::size_t n) {
  return static_cast<double>(j) * period / static_cast<double>(n);
}

std::vector<double> sample(const PeriodicCoefficient::Evaluator& f, double period, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = node(j, period, n);
    out[j] = f(x);
    if (!std::isfinite(out[j])) {
      throw PreconditionError(fmt::format("coefficient is not finite at x = {:.17g}", x));
    }
  }
  return out;
}

// Neumaier-compensated sum, so means of constant data come out exact.
template <typename F>
double compensated_sum(std::span<const double> v, F&& f) {
  double sum = 0.0, carry = 0.0;
  for (double x : v) {
    const double term = f(x);
    const double t = sum + term;
    carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + carry;
}

double average(std::span<const double> v) {
  return compensated_sum(v, [](double x) { return x; }) / static_cast<double>(v.size());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

PeriodicCoefficient PeriodicCoefficient::from_function(SourceKind kind, std::string description,
                                                       Evaluator f, double period,
                                                       std::size_t grid_size) {
  check_grid(period, grid_size);
  PeriodicCoefficient c;
  c.period_ = period;
  c.kind_ = kind;
  c.description_ = std::move(description);
  c.samples_ = sample(f, period, grid_size);
  const double coarse = average(c.samples_);
  const double fine = average(sample(f, period, 2 * grid_size));
  c.resolution_change_ = std::abs(fine - coarse) / std::max(std::abs(coarse), 1e-300);
  c.eval_ = std::move(f);
  return c;
}

PeriodicCoefficient PeriodicCoefficient::from_samples(std::vector<double> samples, double period) {
  check_grid(period, samples.size());
  for (double v : samples) {
    if (!std::isfinite(v)) throw PreconditionError("coefficient samples must be finite");
  }
  PeriodicCoefficient c;
  c.period_ = period;
  c.kind_ = SourceKind::Samples;
  c.description_ = fmt::format("samples[{}]", samples.size());
  c.interpolant_ = std::make_shared<const FourierRecord>(spectral::fourier_series(samples));
  c.samples_ = std::move(samples);
  return c;
}

PeriodicCoefficient PeriodicCoefficient::constant(double value, double period,
                                                  std::size_t grid_size) {
  return from_function(SourceKind::Expression, fmt::format("{:.17g}", value),
                       [value](double) { return value; }, period, grid_size);
}

double PeriodicCoefficient::operator()(double x) const {
  if (eval_) return eval_(x);
  return interpolant_->evaluate(x, period_);
}

double PeriodicCoefficient::min() const { return *std::min_element(samples_.begin(), samples_.end()); }
double PeriodicCoefficient::max() const { return *std::max_element(samples_.begin(), samples_.end()); }

std::vector<double> PeriodicCoefficient::midpoint_samples() const {
  const std::size_t n = samples_.size();
  std::vector<double> out(n);
  if (eval_) {
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = eval_((static_cast<double>(j) + 0.5) * period_ / static_cast<double>(n));
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) out[j] = 0.5 * (samples_[j] + samples_[(j + 1) % n]);
  }
  return out;
}

std::vector<double> PeriodicCoefficient::derivative_samples() const {
  if (eval_) return spectral::differentiate(samples_, period_);
  const std::size_t n = samples_.size();
  const double h = spacing();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = (samples_[(j + 1) % n] - samples_[(j + n - 1) % n]) / (2.0 * h);
  }
  return out;
}

PeriodicCoefficient PeriodicCoefficient::resampled(std::size_t grid_size) const {
  if (grid_size == samples_.size()) return *this;
  if (eval_) return from_function(kind_, description_, eval_, period_, grid_size);
  check_grid(period_, grid_size);
  std::vector<double> values(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    values[j] = interpolant_->evaluate(node(j, period_, grid_size), period_);
  }
  return from_samples(std::move(values), period_);
}

ConstraintSet::ConstraintSet(double alpha, double period) : alpha(alpha), period(period) {
  if (!(alpha > 0.0)) throw PreconditionError("alpha must be positive");
  if (!(period > 0.0)) throw PreconditionError("period must be positive");
}

bool ConstraintSet::contains(const PeriodicCoefficient& r, double tolerance) const {
  return r.period() == period && std::abs(arithmetic_mean(r) - alpha) <= tolerance;
}

PeriodicCoefficient parse_coefficient(std::string_view spec, double period, std::size_t grid_size) {
  check_grid(period, grid_size);
  const std::string_view body = trim(spec);
  const std::size_t lead = static_cast<std::size_t>(body.data() - spec.data());
  constexpr std::string_view kFourier = "fourier:";
  constexpr std::string_view kReciprocal = "reciprocal_fourier:";

  if (body.starts_with(kFourier) || body.starts_with(kReciprocal)) {
    const bool reciprocal = body.starts_with(kReciprocal);
    const std::size_t skip = reciprocal ? kReciprocal.size() : kFourier.size();
    auto rec = std::make_shared<const FourierRecord>(
        parse_fourier_payload(body.substr(skip), lead + skip));
    if (reciprocal) {
      return PeriodicCoefficient::from_function(
          SourceKind::ReciprocalFourier,
          "reciprocal_fourier: " + format_fourier_payload(*rec),
          [rec, period](double x) {
            const double den = rec->evaluate(x, period);
            if (den == 0.0) {
              throw PreconditionError(fmt::format("division by zero at x = {:.17g}", x));
            }
            return 1.0 / den;
          },
          period, grid_size);
    }
    return PeriodicCoefficient::from_function(
        SourceKind::Fourier, "fourier: " + format_fourier_payload(*rec),
        [rec, period](double x) { return rec->evaluate(x, period); }, period, grid_size);
  }

  Expression expr = Expression::parse(spec);
  return PeriodicCoefficient::from_function(SourceKind::Expression, std::string(body),
                                            [expr](double x) { return expr(x); }, period,
                                            grid_size);
}

double arithmetic_mean(const PeriodicCoefficient& c) { return average(c.samples()); }

MeanSummary means(const PeriodicCoefficient& c) {
  MeanSummary m;
  m.arithmetic_mean = arithmetic_mean(c);
  if (c.min() > 0.0) {
    const double inv = compensated_sum(c.samples(), [](double v) { return 1.0 / v; });
    m.harmonic_mean = static_cast<double>(c.grid_size()) / inv;
  }
  return m;
}

double harmonic_mean(const PeriodicCoefficient& c) {
  const MeanSummary m = means(c);
  if (!m.harmonic_mean) {
    throw PreconditionError("harmonic mean requires a strictly positive coefficient");
  }
  return *m.harmonic_mean;
}

PeriodicCoefficient rescale_period(const PeriodicCoefficient& c, double new_period) {
  if (!(new_period > 0.0)) throw PreconditionError("rescaled period must be positive");
  if (new_period == c.period()) return c;
  if (!c.has_exact_evaluator()) {
    // x_j = j L' / N maps to j L / N: the samples are unchanged.
    return PeriodicCoefficient::from_samples(std::vector<double>(c.samples().begin(), c.samples().end()),
                                             new_period);
  }
  const double ratio = c.period() / new_period;
  return PeriodicCoefficient::from_function(
      SourceKind::Derived, fmt::format("rescale({}, {:.17g})", c.description(), new_period),
      [c, ratio](double x) { return c(x * ratio); }, new_period, c.grid_size());
}

PeriodicCoefficient scaled(const PeriodicCoefficient& c, double factor) {
  if (!c.has_exact_evaluator()) {
    std::vector<double> v(c.samples().begin(), c.samples().end());
    for (double& s : v) s *= factor;
    return PeriodicCoefficient::from_samples(std::move(v), c.period());
  }
  return PeriodicCoefficient::from_function(
      SourceKind::Derived, fmt::format("{:.17g}*({})", factor, c.description()),
      [c, factor](double x) { return factor * c(x); }, c.period(), c.grid_size());
}

PeriodicCoefficient linear_combination(const PeriodicCoefficient& a, double weight,
                                       const PeriodicCoefficient& b) {
  require_compatible(a, b);
  if (!a.has_exact_evaluator() || !b.has_exact_evaluator()) {
    std::vector<double> v(a.grid_size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = a.samples()[j] + weight * b.samples()[j];
    return PeriodicCoefficient::from_samples(std::move(v), a.period());
  }
  return PeriodicCoefficient::from_function(
      SourceKind::Derived,
      fmt::format("({}) + {:.17g}*({})", a.description(), weight, b.description()),
      [a, b, weight](double x) { return a(x) + weight * b(x); }, a.period(), a.grid_size());
}

void require_positive(const PeriodicCoefficient& c, std::string_view role) {
  if (!(c.min() > 0.0)) {
    throw PreconditionError(fmt::format("{} must be strictly positive (min sample {:.6g})", role, c.min()));
  }
  if (c.has_exact_evaluator()) {
    const std::size_t n = 2 * c.grid_size();
    for (std::size_t j = 1; j < n; j += 2) {
      const double x = node(j, c.period(), n);
      if (!(c(x) > 0.0)) {
        throw PreconditionError(
            fmt::format("{} is not positive at x = {:.17g} on the refined grid", role, x));
      }
    }
  }
}

void require_compatible(const PeriodicCoefficient& a, const PeriodicCoefficient& b) {
  if (a.grid_size() != b.grid_size()) {
    throw PreconditionError(
        fmt::format("grid size mismatch: {} vs {}", a.grid_size(), b.grid_size()));
  }
  if (a.period() != b.period()) {
    throw PreconditionError(fmt::format("period mismatch: {:.17g} vs {:.17g}", a.period(), b.period()));
  }
}

}  // namespace kpp
