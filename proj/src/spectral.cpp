#include "kpp/spectral.hpp"

#include <complex>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace kpp::spectral {

namespace {

// FFTW's planner is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffers {
  explicit FftwBuffers(std::size_t n)
      : n(n),
        real(fftw_alloc_real(n)),
        spec(fftw_alloc_complex(n / 2 + 1)) {
    std::lock_guard lock(planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spec, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real, FFTW_ESTIMATE);
  }
  ~FftwBuffers() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spec);
  }
  FftwBuffers(const FftwBuffers&) = delete;
  FftwBuffers& operator=(const FftwBuffers&) = delete;

  std::size_t n;
  double* real;
  fftw_complex* spec;
  fftw_plan forward;
  fftw_plan backward;
};

}  // namespace

std::vector<double> differentiate(std::span<const double> samples, double period) {
  const std::size_t n = samples.size();
  FftwBuffers buf(n);
  std::copy(samples.begin(), samples.end(), buf.real);
  fftw_execute(buf.forward);
  const double base = 2.0 * std::numbers::pi / period;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    if (n % 2 == 0 && k == n / 2) {
      buf.spec[k][0] = 0.0;
      buf.spec[k][1] = 0.0;
      continue;
    }
    const double w = base * static_cast<double>(k);
    const double re = buf.spec[k][0];
    const double im = buf.spec[k][1];
    buf.spec[k][0] = -w * im;
    buf.spec[k][1] = w * re;
  }
  fftw_execute(buf.backward);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = buf.real[j] / static_cast<double>(n);
  return out;
}

FourierRecord fourier_series(std::span<const double> samples) {
  const std::size_t n = samples.size();
  FftwBuffers buf(n);
  std::copy(samples.begin(), samples.end(), buf.real);
  fftw_execute(buf.forward);
  const double inv_n = 1.0 / static_cast<double>(n);
  FourierRecord rec;
  rec.a0 = buf.spec[0][0] * inv_n;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const bool nyquist = (n % 2 == 0 && k == n / 2);
    const double scale = nyquist ? inv_n : 2.0 * inv_n;
    rec.cos_coeffs.push_back(scale * buf.spec[k][0]);
    rec.sin_coeffs.push_back(nyquist ? 0.0 : -scale * buf.spec[k][1]);
  }
  return rec;
}

}  // namespace kpp::spectral
