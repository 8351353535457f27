#pragma once

// KdV effective dynamics.
//
// A(w, T) solves 2A_T + c A_www + (A²)_w = 0 and B(l, T) solves
// 2B_T − c B_lll − (B²)_l = 0 with c = 1/12 + 2σ². Both are carried as
// "sides" of a WaveFamily, either in closed form (sech² solitary waves) or on
// a periodic Fourier grid evolved with an integrating-factor RK4 scheme.
// Time derivatives are never differenced: they come from the equation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "fputkdv/errors.hpp"
#include "fputkdv/spectral.hpp"

namespace fputkdv {

/// Value, first three derivatives and the antiderivative based at 0.
struct Jet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  double anti = 0.0;
};

/// right: A(w, T), (KdVA).  left: B(l, T), (KdVB).
enum class Direction { right, left };

/// Dispersion coefficient 1/12 + 2σ².
constexpr double kdv_dispersion(double sigma2) noexcept { return 1.0 / 12.0 + 2.0 * sigma2; }

/// ∂_T of a side, read off its KdV equation.
constexpr double kdv_time_derivative(const Jet& j, double sigma2, Direction dir) noexcept {
  const double flux = 0.5 * (kdv_dispersion(sigma2) * j.d3 + 2.0 * j.v * j.d1);
  return dir == Direction::right ? -flux : flux;
}

// ---------------------------------------------------------------------------
// Profiles and grids

/// A closed-form profile with derivatives (and antiderivative when known).
using ProfileFn = std::function<Jet(double)>;

/// Samples values[i] = F(x0 + i h).
struct GridProfile {
  double x0 = 0.0;
  double h = 1.0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double x(std::size_t i) const noexcept { return x0 + h * static_cast<double>(i); }
  double length() const noexcept { return h * static_cast<double>(values.size()); }
};

/// Sample F on the periodic grid x_i = −L/2 + i L/n, i = 0..n−1.
inline GridProfile sample_periodic(const std::function<double(double)>& f, double length, std::size_t n) {
  if (n < 2 || !(length > 0.0)) throw std::invalid_argument("sample_periodic: bad grid");
  GridProfile g{-0.5 * length, length / static_cast<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) g.values[i] = f(g.x(i));
  return g;
}

struct SplitData {
  ProfileFn a0;
  ProfileFn b0;
};

/// A(·,0) = (Φ − Ψ)/2, B(·,0) = (Φ + Ψ)/2.
inline SplitData split_initial_data(ProfileFn phi, ProfileFn psi) {
  auto combine = [](const ProfileFn& f, const ProfileFn& g, double sign) {
    return [f, g, sign](double x) {
      const Jet a = f(x);
      const Jet b = g(x);
      return Jet{0.5 * (a.v + sign * b.v), 0.5 * (a.d1 + sign * b.d1), 0.5 * (a.d2 + sign * b.d2),
                 0.5 * (a.d3 + sign * b.d3), 0.5 * (a.anti + sign * b.anti)};
    };
  };
  return {combine(phi, psi, -1.0), combine(phi, psi, 1.0)};
}

struct SplitGrid {
  GridProfile a0;
  GridProfile b0;
};

inline SplitGrid split_initial_data(const GridProfile& phi, const GridProfile& psi) {
  if (phi.size() != psi.size() || phi.x0 != psi.x0 || phi.h != psi.h) {
    throw std::invalid_argument("split_initial_data: profiles must share a grid");
  }
  SplitGrid s{phi, phi};
  for (std::size_t i = 0; i < phi.size(); ++i) {
    s.a0.values[i] = 0.5 * (phi.values[i] - psi.values[i]);
    s.b0.values[i] = 0.5 * (phi.values[i] + psi.values[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Closed-form solitary wave

/// 3 sech²(k(w − T)) (right) or 3 sech²(k(l + T)) (left), k = √(6/(1 + 24σ²)).
struct SolitonWave {
  double k = 0.0;
  Direction dir = Direction::right;

  static SolitonWave make(double sigma2, Direction dir = Direction::right) {
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("soliton: sigma2 must be >= 0");
    return {std::sqrt(6.0 / (1.0 + 24.0 * sigma2)), dir};
  }

  Jet eval(double x, double T) const noexcept {
    const double shift = dir == Direction::right ? -T : T;
    const double z = k * (x + shift);
    // sech² and tanh from a single exponential of −2|z|.
    const double e = std::exp(-2.0 * std::abs(z));
    const double th = std::copysign((1.0 - e) / (1.0 + e), z);
    const double s = 4.0 * e / ((1.0 + e) * (1.0 + e));
    const double k2 = k * k;
    Jet j;
    j.v = 3.0 * s;
    j.d1 = 3.0 * k * (-2.0 * s * th);
    j.d2 = 3.0 * k2 * (4.0 * s - 6.0 * s * s);
    j.d3 = 3.0 * k2 * k * (-8.0 * s * th + 24.0 * s * s * th);
    j.anti = (3.0 / k) * (th - std::tanh(k * shift));
    return j;
  }
};

// ---------------------------------------------------------------------------
// Spectral grid representation

/// Derivative arrays of one side at one time, with 8-point Lagrange
/// interpolation between nodes. Outside the periodic window the profile is
/// treated as fully decayed: zero, with the antiderivative held at its edge
/// value.
class GridSlice {
 public:
  GridSlice(double x0, double h, double mean, std::vector<double> v, std::vector<double> d1, std::vector<double> d2,
            std::vector<double> d3, std::vector<double> g)
      : x0_(x0), h_(h), mean_(mean), v_(std::move(v)), d1_(std::move(d1)), d2_(std::move(d2)), d3_(std::move(d3)),
        g_(std::move(g)) {
    const double g_at_zero = interpolate_raw(0.0).anti;  // G(0)
    g0_ = g_at_zero;
    anti_left_ = mean_ * x0_ + g_.front() - g0_;
    anti_right_ = mean_ * (x0_ + length()) + g_.front() - g0_;
  }

  double x0() const noexcept { return x0_; }
  double h() const noexcept { return h_; }
  double length() const noexcept { return h_ * static_cast<double>(v_.size()); }
  std::size_t size() const noexcept { return v_.size(); }
  std::span<const double> values() const noexcept { return v_; }
  std::span<const double> d1() const noexcept { return d1_; }
  std::span<const double> d2() const noexcept { return d2_; }
  std::span<const double> d3() const noexcept { return d3_; }
  /// ∫ over the window (h Σ u).
  double mass() const noexcept { return mean_ * length(); }

  Jet eval(double x) const noexcept {
    if (x < x0_) return Jet{0, 0, 0, 0, anti_left_};
    if (x >= x0_ + length()) return Jet{0, 0, 0, 0, anti_right_};
    Jet j = interpolate_raw(x);
    j.anti = mean_ * x + j.anti - g0_;
    return j;
  }

 private:
  // Interpolates all arrays; the `anti` slot carries the periodic G(x).
  Jet interpolate_raw(double x) const noexcept {
    constexpr int stencil = 8;
    constexpr double binom[stencil] = {1, 7, 21, 35, 35, 21, 7, 1};
    const auto n = static_cast<long>(v_.size());
    const double s = (x - x0_) / h_;
    const long i0 = static_cast<long>(std::floor(s)) - 3;
    auto wrap = [n](long i) { return static_cast<std::size_t>(((i % n) + n) % n); };
    double w[stencil];
    double wsum = 0.0;
    for (int m = 0; m < stencil; ++m) {
      const double d = s - static_cast<double>(i0 + m);
      if (d == 0.0) {
        const std::size_t i = wrap(i0 + m);
        return Jet{v_[i], d1_[i], d2_[i], d3_[i], g_[i]};
      }
      w[m] = ((m % 2 == 0) ? 1.0 : -1.0) * binom[m] / d;
      wsum += w[m];
    }
    Jet j;
    for (int m = 0; m < stencil; ++m) {
      const std::size_t i = wrap(i0 + m);
      const double c = w[m] / wsum;
      j.v += c * v_[i];
      j.d1 += c * d1_[i];
      j.d2 += c * d2_[i];
      j.d3 += c * d3_[i];
      j.anti += c * g_[i];
    }
    return j;
  }

  double x0_, h_, mean_;
  std::vector<double> v_, d1_, d2_, d3_, g_;
  double g0_ = 0.0, anti_left_ = 0.0, anti_right_ = 0.0;
};

struct KdvGridParams {
  /// Number of stored snapshots, uniform on [0, T_end] (at least 2).
  int snapshots = 65;
  /// Upper bound for the time step; 0 picks min(1e-2, 0.5/(k_max max|u|)).
  double dt_max = 0.0;
};

/// One side evolved on a periodic Fourier grid. Immutable once built;
/// slices at arbitrary T are produced by a short integrating-factor RK4 hop
/// from the nearest stored snapshot.
class GridKdv {
 public:
  GridKdv(const GridProfile& u0, double sigma2, Direction dir, double t_end, const KdvGridParams& params)
      : n_(u0.size()), x0_(u0.x0), h_(u0.h), sigma2_(sigma2), dir_(dir), t_end_(t_end) {
    if (n_ < 16 || n_ % 2 != 0) throw std::invalid_argument("kdv_evolve: grid size must be even and >= 16");
    if (!(t_end >= 0.0)) throw std::invalid_argument("kdv_evolve: T_end must be >= 0");
    if (std::abs(x0_ + 0.5 * length()) > 1e-9 * length()) throw std::invalid_argument("kdv_evolve: grid must be centred on 0");
    if (std::abs(u0.values.front()) > 1e-10 || std::abs(u0.values.back()) > 1e-10) {
      throw std::invalid_argument("kdv_evolve: initial profile has not decayed at the domain edges");
    }
    k_ = wavenumbers(n_, length());
    RealFft fft(n_);
    std::vector<Complex> spec(fft.modes());
    fft.forward(u0.values, spec);
    double umax = 0.0;
    for (double v : u0.values) {
      if (!std::isfinite(v)) throw NonFiniteError("kdv_evolve: non-finite initial profile", 0.0);
      umax = std::max(umax, std::abs(v));
    }
    const double kmax = k_.back();
    dt_ = params.dt_max > 0.0 ? params.dt_max : 1e-2;
    if (umax > 0.0) dt_ = std::min(dt_, 0.5 / (kmax * umax));
    if (params.dt_max > 0.0) dt_ = std::min(dt_, params.dt_max);
    check_resolved(spec, 0.0);

    const int count = std::max(2, params.snapshots);
    snapshots_.push_back({0.0, spec});
    double t = 0.0;
    for (int s = 1; s < count && t_end > 0.0; ++s) {
      const double target = t_end * s / (count - 1);
      spec = advance(fft, std::move(spec), target - t);
      t = target;
      check_resolved(spec, t);
      snapshots_.push_back({t, spec});
    }
  }

  double length() const noexcept { return h_ * static_cast<double>(n_); }
  double x0() const noexcept { return x0_; }
  std::size_t size() const noexcept { return n_; }
  double t_end() const noexcept { return t_end_; }
  double dt() const noexcept { return dt_; }
  Direction direction() const noexcept { return dir_; }
  double sigma2() const noexcept { return sigma2_; }

  /// Slack allowed beyond [0, T_end] for centred time differences.
  static constexpr double time_margin = 1e-3;

  std::shared_ptr<const GridSlice> slice(double T) const {
    if (T < -time_margin || T > t_end_ + time_margin) {
      throw DomainExceeded("grid KdV family evaluated at T = " + std::to_string(T) + " outside [0, " + std::to_string(t_end_) + "]");
    }
    const auto nearest = std::min_element(snapshots_.begin(), snapshots_.end(), [T](const auto& a, const auto& b) {
      return std::abs(a.first - T) < std::abs(b.first - T);
    });
    RealFft fft(n_);
    std::vector<Complex> spec = nearest->second;
    if (T != nearest->first) spec = advance(fft, std::move(spec), T - nearest->first);
    return make_slice(fft, spec, T);
  }

 private:
  std::vector<Complex> nonlinear(RealFft& fft, std::span<const Complex> spec) const {
    std::vector<double> u(n_);
    fft.inverse(spec, u);
    for (double& x : u) x *= x;
    std::vector<Complex> out(fft.modes());
    fft.forward(u, out);
    // N(û) = −s (ik/2) FFT(u²), Nyquist dropped.
    const double s = dir_ == Direction::right ? 1.0 : -1.0;
    for (std::size_t m = 0; m < out.size(); ++m) {
      out[m] = m + 1 == out.size() ? Complex(0.0) : -s * Complex(0.0, 0.5 * k_[m]) * out[m];
    }
    return out;
  }

  // Lawson integrating-factor RK4 over a signed interval, uniform substeps.
  std::vector<Complex> advance(RealFft& fft, std::vector<Complex> u, double span_t) const {
    if (span_t == 0.0) return u;
    const auto steps = static_cast<long>(std::ceil(std::abs(span_t) / dt_ - 1e-12));
    const double dt = span_t / static_cast<double>(std::max(1L, steps));
    const double s = dir_ == Direction::right ? 1.0 : -1.0;
    const double c = kdv_dispersion(sigma2_);
    const std::size_t modes = u.size();
    std::vector<Complex> e_half(modes), e_full(modes);
    for (std::size_t m = 0; m < modes; ++m) {
      const double km = m + 1 == modes ? 0.0 : k_[m];
      const double omega = s * 0.5 * c * km * km * km;  // L = i ω
      e_half[m] = std::exp(Complex(0.0, 0.5 * dt * omega));
      e_full[m] = std::exp(Complex(0.0, dt * omega));
    }
    std::vector<Complex> tmp(modes);
    for (long step = 0; step < std::max(1L, steps); ++step) {
      const auto k1 = nonlinear(fft, u);
      for (std::size_t m = 0; m < modes; ++m) tmp[m] = e_half[m] * (u[m] + 0.5 * dt * k1[m]);
      const auto k2 = nonlinear(fft, tmp);
      for (std::size_t m = 0; m < modes; ++m) tmp[m] = e_half[m] * u[m] + 0.5 * dt * k2[m];
      const auto k3 = nonlinear(fft, tmp);
      for (std::size_t m = 0; m < modes; ++m) tmp[m] = e_full[m] * u[m] + dt * e_half[m] * k3[m];
      const auto k4 = nonlinear(fft, tmp);
      for (std::size_t m = 0; m < modes; ++m) {
        u[m] = e_full[m] * u[m] + dt / 6.0 * (e_full[m] * k1[m] + 2.0 * e_half[m] * (k2[m] + k3[m]) + k4[m]);
      }
    }
    for (const Complex& z : u) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw NonFiniteError("kdv_evolve: spectral solution blew up", span_t);
    }
    return u;
  }

  void check_resolved(std::span<const Complex> spec, double T) const {
    double peak = 0.0;
    for (const Complex& z : spec) peak = std::max(peak, std::abs(z));
    if (peak == 0.0) return;
    double top = 0.0;
    for (std::size_t m = n_ / 3 + 1; m < spec.size(); ++m) top = std::max(top, std::abs(spec[m]));
    if (top > 1e-8 * peak) {
      throw AliasingDetected("kdv_evolve: top third of the spectrum holds " + std::to_string(top / peak) +
                             " of the peak modulus at T = " + std::to_string(T) + "; refine the grid");
    }
  }

  std::shared_ptr<const GridSlice> make_slice(RealFft& fft, std::span<const Complex> spec, double T) const {
    auto derivative = [&](int order) {
      std::vector<Complex> s(spec.begin(), spec.end());
      apply_derivative(s, k_, order);
      std::vector<double> out(n_);
      fft.inverse(s, out);
      return out;
    };
    std::vector<double> v = derivative(0);
    std::vector<Complex> gs(spec.begin(), spec.end());
    apply_antiderivative(gs, k_);
    std::vector<double> g(n_);
    fft.inverse(gs, g);
    const double mean = spec[0].real() / static_cast<double>(n_);
    for (double x : v) {
      if (!std::isfinite(x)) throw NonFiniteError("kdv_evolve: non-finite slice", T);
    }
    return std::make_shared<const GridSlice>(x0_, h_, mean, std::move(v), derivative(1), derivative(2), derivative(3),
                                             std::move(g));
  }

  std::size_t n_;
  double x0_, h_, sigma2_;
  Direction dir_;
  double t_end_;
  double dt_ = 0.0;
  std::vector<double> k_;
  std::vector<std::pair<double, std::vector<Complex>>> snapshots_;
};

// ---------------------------------------------------------------------------
// Sides and families

/// One side of a wave family at a fixed T.
class SideSlice {
 public:
  SideSlice() = default;
  SideSlice(SolitonWave s, double T) : rep_(std::pair{s, T}) {}
  explicit SideSlice(std::shared_ptr<const GridSlice> g) : rep_(std::move(g)) {}

  bool is_zero() const noexcept { return std::holds_alternative<std::monostate>(rep_); }

  Jet eval(double x) const noexcept {
    if (const auto* s = std::get_if<std::pair<SolitonWave, double>>(&rep_)) return s->first.eval(x, s->second);
    if (const auto* g = std::get_if<std::shared_ptr<const GridSlice>>(&rep_)) return (*g)->eval(x);
    return Jet{};
  }

 private:
  std::variant<std::monostate, std::pair<SolitonWave, double>, std::shared_ptr<const GridSlice>> rep_;
};

/// One side of a wave family over time: zero, closed form, or spectral grid.
class SideWave {
 public:
  SideWave() = default;
  static SideWave zero() { return {}; }
  static SideWave soliton(double sigma2, Direction dir) {
    SideWave s;
    s.rep_ = SolitonWave::make(sigma2, dir);
    return s;
  }
  static SideWave grid(std::shared_ptr<const GridKdv> g) {
    SideWave s;
    s.rep_ = std::move(g);
    return s;
  }

  bool is_zero() const noexcept { return std::holds_alternative<std::monostate>(rep_); }
  bool is_grid() const noexcept { return std::holds_alternative<std::shared_ptr<const GridKdv>>(rep_); }
  const GridKdv* grid_solver() const noexcept {
    const auto* g = std::get_if<std::shared_ptr<const GridKdv>>(&rep_);
    return g ? g->get() : nullptr;
  }

  SideSlice at(double T) const {
    if (const auto* s = std::get_if<SolitonWave>(&rep_)) return SideSlice(*s, T);
    if (const auto* g = std::get_if<std::shared_ptr<const GridKdv>>(&rep_)) return SideSlice((*g)->slice(T));
    return {};
  }

 private:
  std::variant<std::monostate, SolitonWave, std::shared_ptr<const GridKdv>> rep_;
};

enum class Representation { closed_form_soliton, grid_spectral, zero };

/// The pair (A, B) with the σ² that sets their dispersion.
class WaveFamily {
 public:
  struct Slice {
    SideSlice a;
    SideSlice b;
  };

  WaveFamily() = default;
  WaveFamily(SideWave a, SideWave b, double sigma2) : a_(std::move(a)), b_(std::move(b)), sigma2_(sigma2) {}

  static WaveFamily zero(double sigma2 = 0.0) { return WaveFamily({}, {}, sigma2); }

  double sigma2() const noexcept { return sigma2_; }
  const SideWave& a() const noexcept { return a_; }
  const SideWave& b() const noexcept { return b_; }
  bool is_zero() const noexcept { return a_.is_zero() && b_.is_zero(); }

  Representation representation() const noexcept {
    if (a_.is_grid() || b_.is_grid()) return Representation::grid_spectral;
    if (is_zero()) return Representation::zero;
    return Representation::closed_form_soliton;
  }

  Slice at(double T) const { return {a_.at(T), b_.at(T)}; }

 private:
  SideWave a_;
  SideWave b_;
  double sigma2_ = 0.0;
};

/// Closed-form right-moving solitary wave with B ≡ 0.
inline WaveFamily soliton(double sigma2) { return WaveFamily(SideWave::soliton(sigma2, Direction::right), {}, sigma2); }

/// Evolve grid initial data for A (KdVA) and B (KdVB) to T_end.
inline WaveFamily kdv_evolve(const GridProfile& a0, const GridProfile& b0, double sigma2, double t_end,
                             const KdvGridParams& params = {}) {
  auto is_zero = [](const GridProfile& g) {
    return std::all_of(g.values.begin(), g.values.end(), [](double v) { return v == 0.0; });
  };
  SideWave a = is_zero(a0) ? SideWave::zero()
                           : SideWave::grid(std::make_shared<const GridKdv>(a0, sigma2, Direction::right, t_end, params));
  SideWave b = is_zero(b0) ? SideWave::zero()
                           : SideWave::grid(std::make_shared<const GridKdv>(b0, sigma2, Direction::left, t_end, params));
  return WaveFamily(std::move(a), std::move(b), sigma2);
}

/// Single-side convenience: B ≡ 0.
inline WaveFamily kdv_evolve(const GridProfile& a0, double sigma2, double t_end, const KdvGridParams& params = {}) {
  GridProfile zero = a0;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  return kdv_evolve(a0, zero, sigma2, t_end, params);
}

// ---------------------------------------------------------------------------
// Antiderivatives

/// ∫₀ˣ F on the sample grid, fourth-order composite quadrature (cubic
/// Lagrange on each cell, one-sided at the ends). The base point 0 must lie
/// inside the grid.
inline GridProfile antiderivative(const GridProfile& f) {
  const std::size_t n = f.size();
  if (n < 4) throw std::invalid_argument("antiderivative: need at least 4 samples");
  const double xlast = f.x(n - 1);
  if (0.0 < f.x0 || 0.0 > xlast) throw std::invalid_argument("antiderivative: base point 0 outside the grid");
  const auto& y = f.values;
  const double h = f.h;

  // Exact integral of the cubic through y[i0..i0+3] over [x_{i0} + a h, x_{i0} + b h].
  auto cubic_integral = [&](std::size_t i0, double a, double b) {
    // Lagrange basis integrated on [a, b] in local coordinates s (nodes 0..3) by 2-point Gauss-Legendre
    // twice over (exact for cubics).
    const double gp = 1.0 / std::sqrt(3.0);
    double total = 0.0;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (double g : {-gp, gp}) {
      const double s = mid + half * g;
      const double l0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
      const double l1 = s * (s - 2) * (s - 3) / 2.0;
      const double l2 = -s * (s - 1) * (s - 3) / 2.0;
      const double l3 = s * (s - 1) * (s - 2) / 6.0;
      total += half * (l0 * y[i0] + l1 * y[i0 + 1] + l2 * y[i0 + 2] + l3 * y[i0 + 3]);
    }
    return total * h;
  };
  // Stencil start for the cell [x_i, x_{i+1}]: centred where possible.
  auto stencil = [n](std::size_t i) -> std::size_t {
    if (i == 0) return 0;
    if (i + 2 >= n) return n - 4;
    return i - 1;
  };

  std::vector<double> cum(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t s0 = stencil(i);
    const double off = static_cast<double>(i - s0);
    cum[i + 1] = cum[i] + cubic_integral(s0, off, off + 1.0);
  }
  // Cumulative value at x = 0.
  const double s = -f.x0 / h;
  auto cell = static_cast<std::size_t>(std::floor(s));
  if (cell >= n - 1) cell = n - 2;
  const std::size_t s0 = stencil(cell);
  const double off = static_cast<double>(cell - s0);
  const double at_zero = cum[cell] + cubic_integral(s0, off, off + (s - static_cast<double>(cell)));

  GridProfile out = f;
  for (std::size_t i = 0; i < n; ++i) out.values[i] = cum[i] - at_zero;
  return out;
}

// ---------------------------------------------------------------------------
// Second-order correctors

struct Correctors {
  double A2 = 0.0;
  double B2 = 0.0;
};

/// A₂ = ¼[(¼ − 2σ²)∂_l²B − (2∂_wA ℬ + 2AB + B²)],
/// B₂ = ¼[(¼ − 2σ²)∂_w²A − (A² + 2AB + 2𝒜∂_lB)].
constexpr Correctors correctors(const Jet& a, const Jet& b, double sigma2) noexcept {
  const double e = 0.25 - 2.0 * sigma2;
  return {0.25 * (e * b.d2 - (2.0 * a.d1 * b.anti + 2.0 * a.v * b.v + b.v * b.v)),
          0.25 * (e * a.d2 - (a.v * a.v + 2.0 * a.v * b.v + 2.0 * a.anti * b.d1))};
}

inline Correctors correctors(const WaveFamily& family, double w, double l, double T) {
  const auto s = family.at(T);
  return correctors(s.a.eval(w), s.b.eval(l), family.sigma2());
}

// ---------------------------------------------------------------------------
// Debug output

/// CSV with columns w, A, A_w, A_ww, A_www.
inline void write_profile_csv(std::ostream& os, const SideSlice& side, std::span<const double> xs) {
  os << "w,A,A_w,A_ww,A_www\n";
  char buf[256];
  for (double x : xs) {
    const Jet j = side.eval(x);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", x, j.v, j.d1, j.d2, j.d3);
    os << buf;
  }
}

}  // namespace fputkdv
