#pragma once

// Real-to-complex FFT on a periodic grid (FFTW backed) and the spectral
// multipliers used by the KdV solver.

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace fputkdv {

using Complex = std::complex<double>;

namespace detail {
// FFTW's planner is not thread safe.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Unnormalized forward r2c and normalized inverse c2r of length n.
/// Instances are not shareable across threads; make one per thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n), modes_(n / 2 + 1) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("RealFft: length must be even and >= 2");
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_));
    spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * modes_));
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec_, real_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(inverse_);
    fftw_destroy_plan(forward_);
    fftw_free(spec_);
    fftw_free(real_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t modes() const noexcept { return modes_; }

  void forward(std::span<const double> in, std::span<Complex> out) {
    std::memcpy(real_, in.data(), sizeof(double) * n_);
    fftw_execute(forward_);
    std::memcpy(static_cast<void*>(out.data()), spec_, sizeof(fftw_complex) * modes_);
  }

  void inverse(std::span<const Complex> in, std::span<double> out) {
    std::memcpy(spec_, static_cast<const void*>(in.data()), sizeof(fftw_complex) * modes_);
    fftw_execute(inverse_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
  }

 private:
  std::size_t n_;
  std::size_t modes_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

/// Angular wavenumbers 2πm/L for the r2c half spectrum m = 0..n/2.
inline std::vector<double> wavenumbers(std::size_t n, double length) {
  std::vector<double> k(n / 2 + 1);
  for (std::size_t m = 0; m < k.size(); ++m) k[m] = 2.0 * std::numbers::pi * static_cast<double>(m) / length;
  return k;
}

/// Multiply a half spectrum by (ik)^order. Odd orders zero the Nyquist mode
/// so the result stays real.
inline void apply_derivative(std::span<Complex> spec, std::span<const double> k, int order) {
  const std::size_t nyq = spec.size() - 1;
  for (std::size_t m = 0; m < spec.size(); ++m) {
    if (order % 2 == 1 && m == nyq) {
      spec[m] = 0.0;
      continue;
    }
    Complex factor(1.0, 0.0);
    for (int i = 0; i < order; ++i) factor *= Complex(0.0, k[m]);
    spec[m] *= factor;
  }
}

/// Periodic antiderivative of the zero-mean part: Ĝ = û/(ik), Ĝ₀ = 0.
inline void apply_antiderivative(std::span<Complex> spec, std::span<const double> k) {
  const std::size_t nyq = spec.size() - 1;
  spec[0] = 0.0;
  for (std::size_t m = 1; m < spec.size(); ++m) spec[m] = m == nyq ? Complex(0.0) : spec[m] / Complex(0.0, k[m]);
}

}  // namespace fputkdv
