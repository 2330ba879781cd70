#pragma once

#include <span>
#include <vector>

#include "kpp/expression.hpp"

namespace kpp::spectral {

// Derivative of the trigonometric interpolant of periodic samples over
// `period`. The Nyquist mode is dropped for even N.
std::vector<double> differentiate(std::span<const double> samples, double period);

// Real Fourier series (a0, a_k, b_k) of the trigonometric interpolant.
// For even N the Nyquist cosine term is halved so the series evaluates the
// interpolant symmetrically.
FourierRecord fourier_series(std::span<const double> samples);

}  // namespace kpp::spectral
