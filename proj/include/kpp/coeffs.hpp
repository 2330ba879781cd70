#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpp/expression.hpp"

namespace kpp {

inline constexpr std::size_t kDefaultGridSize = 256;
inline constexpr std::size_t kMinGridSize = 16;

enum class SourceKind { Expression, Fourier, ReciprocalFourier, Samples, Derived };

const char* to_string(SourceKind kind);

bool is_power_of_two(std::size_t n);

// A period-L real function sampled on the uniform grid x_j = j L / N.
//
// Coefficients built from an expression, a Fourier record, or a combination
// of those keep an exact point evaluator; midpoint values and resampling use
// it. Raw-sample coefficients fall back to trigonometric interpolation.
// Instances are immutable and safe to share between threads.
class PeriodicCoefficient {
 public:
  using Evaluator = std::function<double(double)>;

  // Samples `f` at the grid nodes. Throws PreconditionError for a bad period
  // or grid size, or when `f` returns a non-finite value at a node.
  static PeriodicCoefficient from_function(SourceKind kind, std::string description, Evaluator f,
                                           double period, std::size_t grid_size);
  static PeriodicCoefficient from_samples(std::vector<double> samples, double period);
  static PeriodicCoefficient constant(double value, double period,
                                      std::size_t grid_size = kDefaultGridSize);

  double period() const noexcept { return period_; }
  std::size_t grid_size() const noexcept { return samples_.size(); }
  double spacing() const noexcept { return period_ / static_cast<double>(samples_.size()); }
  std::span<const double> samples() const noexcept { return samples_; }
  SourceKind source() const noexcept { return kind_; }
  const std::string& description() const noexcept { return description_; }
  bool has_exact_evaluator() const noexcept { return static_cast<bool>(eval_); }

  // Value at arbitrary x (exact evaluator or trigonometric interpolant).
  double operator()(double x) const;

  double min() const;
  double max() const;

  // Relative change of the trapezoid mean when sampled at 2N instead of N.
  double resolution_change() const noexcept { return resolution_change_; }

  // Values at x_{j+1/2}: exact for function sources, two-point averages for
  // raw samples.
  std::vector<double> midpoint_samples() const;

  // c'(x_j): spectral differentiation for function sources, centered
  // differences for raw samples.
  std::vector<double> derivative_samples() const;

  PeriodicCoefficient resampled(std::size_t grid_size) const;

 private:
  PeriodicCoefficient() = default;

  double period_ = 1.0;
  SourceKind kind_ = SourceKind::Samples;
  std::string description_;
  Evaluator eval_;
  std::vector<double> samples_;
  double resolution_change_ = 0.0;
  // Fourier coefficients of the samples; only populated for raw samples.
  std::shared_ptr<const FourierRecord> interpolant_;
};

struct MeanSummary {
  double arithmetic_mean = 0.0;
  std::optional<double> harmonic_mean;  // absent when any sample <= 0
};

struct ConstraintSet {
  double alpha;
  double period;

  ConstraintSet(double alpha, double period);
  bool contains(const PeriodicCoefficient& r, double tolerance = 1e-10) const;
};

// Builds a coefficient from an expression, `fourier: ...`, or
// `reciprocal_fourier: ...` text.
PeriodicCoefficient parse_coefficient(std::string_view spec, double period,
                                      std::size_t grid_size = kDefaultGridSize);

MeanSummary means(const PeriodicCoefficient& c);
double arithmetic_mean(const PeriodicCoefficient& c);
// Throws PreconditionError if the coefficient is not strictly positive.
double harmonic_mean(const PeriodicCoefficient& c);

// x -> c(x * c.period / new_period), with period new_period.
PeriodicCoefficient rescale_period(const PeriodicCoefficient& c, double new_period);

// x -> factor * c(x)
PeriodicCoefficient scaled(const PeriodicCoefficient& c, double factor);

// x -> a(x) + weight * b(x); a and b must share period and grid size.
PeriodicCoefficient linear_combination(const PeriodicCoefficient& a, double weight,
                                       const PeriodicCoefficient& b);

// Throws PreconditionError unless min(samples) > 0, re-checked on the 2N grid
// for coefficients with an exact evaluator. `role` names the coefficient in
// the message.
void require_positive(const PeriodicCoefficient& c, std::string_view role);

void require_compatible(const PeriodicCoefficient& a, const PeriodicCoefficient& b);

}  // namespace kpp
