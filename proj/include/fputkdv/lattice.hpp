#pragma once

// Periodic lattice operators, disorder generators, the FPUT vector field and
// the modified energy used by the approximation estimates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fputkdv/rng.hpp"

namespace fputkdv {

using Index = std::int64_t;

/// Inclusive index range [lo, hi].
struct IndexRange {
  Index lo = 0;
  Index hi = -1;
  constexpr Index size() const noexcept { return hi >= lo ? hi - lo + 1 : 0; }
  constexpr bool contains(Index j) const noexcept { return j >= lo && j <= hi; }
};

// ---------------------------------------------------------------------------
// Shift and difference operators (periodic)

enum class ShiftOp { forward_diff, backward_diff, shift_plus, shift_minus };

/// δ⁺, δ⁻, S⁺ or S⁻ applied to a periodic sequence.
inline std::vector<double> shift_ops(std::span<const double> f, ShiftOp which) {
  if (f.empty()) throw std::invalid_argument("shift_ops: empty sequence");
  const std::size_t n = f.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double next = f[i + 1 == n ? 0 : i + 1];
    const double prev = f[i == 0 ? n - 1 : i - 1];
    switch (which) {
      case ShiftOp::forward_diff: out[i] = next - f[i]; break;
      case ShiftOp::backward_diff: out[i] = f[i] - prev; break;
      case ShiftOp::shift_plus: out[i] = next; break;
      case ShiftOp::shift_minus: out[i] = prev; break;
    }
  }
  return out;
}

inline std::vector<double> forward_diff(std::span<const double> f) { return shift_ops(f, ShiftOp::forward_diff); }
inline std::vector<double> backward_diff(std::span<const double> f) { return shift_ops(f, ShiftOp::backward_diff); }

// ---------------------------------------------------------------------------
// Spring law

/// 𝒱(q) = q²/2 + q³/3.
constexpr double spring_potential(double q) noexcept { return 0.5 * q * q + q * q * q / 3.0; }

/// 𝒱′(q) = q + q².
constexpr double spring_force(double q) noexcept { return q + q * q; }

/// `linear` drops the quadratic term; used for convergence tests where an
/// exact reference is easier to reason about.
enum class SpringLaw { fput, linear };

constexpr double spring_force(double q, SpringLaw law) noexcept {
  return law == SpringLaw::fput ? spring_force(q) : q;
}

// ---------------------------------------------------------------------------
// Noise

enum class Distribution { uniform };

/// i.i.d. samples ζ(j) on an index window together with their distribution
/// metadata. Values are immutable after construction.
class NoiseSequence {
 public:
  NoiseSequence() = default;

  /// Explicit values starting at index `first`. Used by tests and by callers
  /// that bring their own realization; every |ζ(j)| must be below 1/4.
  static NoiseSequence from_values(Index first, std::vector<double> values, double sigma2,
                                   double support_bound = 0.25) {
    if (sigma2 < 0.0) throw std::invalid_argument("NoiseSequence: sigma2 must be >= 0");
    for (double v : values) {
      if (!(std::abs(v) < 0.25)) throw std::invalid_argument("NoiseSequence: |zeta| must be < 1/4");
    }
    NoiseSequence n;
    n.first_ = first;
    n.values_ = std::move(values);
    n.sigma2_ = sigma2;
    n.support_bound_ = support_bound;
    return n;
  }

  Index first() const noexcept { return first_; }
  Index last() const noexcept { return first_ + static_cast<Index>(values_.size()) - 1; }
  IndexRange window() const noexcept { return {first(), last()}; }
  bool covers(IndexRange r) const noexcept { return r.size() == 0 || (r.lo >= first() && r.hi <= last()); }

  double operator()(Index j) const {
    if (j < first() || j > last()) throw std::out_of_range("NoiseSequence: index " + std::to_string(j) + " outside window");
    return values_[static_cast<std::size_t>(j - first_)];
  }
  /// Unchecked access.
  double at_unchecked(Index j) const noexcept { return values_[static_cast<std::size_t>(j - first_)]; }

  std::span<const double> values() const noexcept { return values_; }
  double sigma2() const noexcept { return sigma2_; }
  double support_bound() const noexcept { return support_bound_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t realization() const noexcept { return realization_; }
  Distribution distribution() const noexcept { return Distribution::uniform; }

  /// True when all values vanish (degenerate realizations used by tests).
  bool is_zero() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  }

 private:
  friend NoiseSequence sample_noise(Distribution, double, std::uint64_t, IndexRange, std::uint64_t);

  Index first_ = 0;
  std::vector<double> values_;
  double sigma2_ = 0.0;
  double support_bound_ = 0.25;
  std::uint64_t seed_ = 0;
  std::uint64_t realization_ = 0;
};

/// Draw ζ(j) ~ uniform(−a, a), a = support_bound, on `window`. Deterministic
/// in (seed, realization); the value at j does not depend on the window.
inline NoiseSequence sample_noise(Distribution /*distribution*/, double support_bound, std::uint64_t seed,
                                  IndexRange window, std::uint64_t realization = 0) {
  if (!(support_bound > 0.0 && support_bound < 0.25)) {
    throw std::invalid_argument("sample_noise: support bound must lie in (0, 1/4), got " + std::to_string(support_bound));
  }
  if (window.size() <= 0) throw std::invalid_argument("sample_noise: empty window");
  const CounterRng rng(seed, StreamPurpose::zeta, realization);
  NoiseSequence n;
  n.first_ = window.lo;
  n.values_.resize(static_cast<std::size_t>(window.size()));
  for (Index j = window.lo; j <= window.hi; ++j) {
    n.values_[static_cast<std::size_t>(j - window.lo)] = rng.uniform(-support_bound, support_bound, j);
  }
  n.sigma2_ = support_bound * support_bound / 3.0;
  n.support_bound_ = support_bound;
  n.seed_ = seed;
  n.realization_ = realization;
  return n;
}

/// Window a noise sequence needs to support a lattice of half-width M.
constexpr IndexRange noise_window(Index M) noexcept { return {-M - 2, M + 2}; }

// ---------------------------------------------------------------------------
// Masses

enum class MassModel { constant, periodic, transparent, iid, translucent };

inline std::string to_string(MassModel m) {
  switch (m) {
    case MassModel::constant: return "constant";
    case MassModel::periodic: return "periodic";
    case MassModel::transparent: return "transparent";
    case MassModel::iid: return "iid";
    case MassModel::translucent: return "translucent";
  }
  return "unknown";
}

inline MassModel mass_model_from_string(const std::string& s) {
  if (s == "constant") return MassModel::constant;
  if (s == "periodic") return MassModel::periodic;
  if (s == "transparent") return MassModel::transparent;
  if (s == "iid") return MassModel::iid;
  if (s == "translucent") return MassModel::translucent;
  throw std::invalid_argument("unknown mass model '" + s + "'");
}

struct MassParams {
  // periodic(N): m(j) = 1 + amplitude * cos(2πj/N); N = 2 gives 1 + (−1)^j/4.
  int period = 2;
  double periodic_amplitude = 0.25;
  // iid: independent uniform draws on [iid_lo, iid_hi].
  double iid_lo = 0.5;
  double iid_hi = 1.5;
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;
};

/// Positive mass coefficients m(j), j ∈ [−M, M].
class MassProfile {
 public:
  MassProfile() = default;
  MassProfile(MassModel model, Index M, std::vector<double> values) : model_(model), M_(M), values_(std::move(values)) {
    if (static_cast<Index>(values_.size()) != 2 * M + 1) throw std::invalid_argument("MassProfile: size must be 2M+1");
    for (double m : values_) {
      if (!(m > 0.0) || !std::isfinite(m)) throw std::domain_error("MassProfile: nonpositive or non-finite mass");
    }
  }

  MassModel model() const noexcept { return model_; }
  Index half_width() const noexcept { return M_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator()(Index j) const { return values_.at(static_cast<std::size_t>(j + M_)); }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }

 private:
  MassModel model_ = MassModel::constant;
  Index M_ = 0;
  std::vector<double> values_;
};

/// Build a mass profile on [−M, M]. Transparent and translucent models read
/// ζ on [−M, M] and wrap it periodically, so the differences are the ring's
/// own δ± and Σ(m − 1) telescopes to zero.
inline MassProfile make_mass(MassModel model, const MassParams& params, const NoiseSequence* noise, Index M) {
  if (M < 1) throw std::invalid_argument("make_mass: M must be >= 1");
  const std::size_t n = static_cast<std::size_t>(2 * M + 1);
  std::vector<double> m(n, 1.0);
  auto zeta_ring = [&](Index j) {
    if (j > M) j -= 2 * M + 1;
    if (j < -M) j += 2 * M + 1;
    return (*noise)(j);
  };
  switch (model) {
    case MassModel::constant: break;
    case MassModel::periodic: {
      if (params.period < 1) throw std::invalid_argument("make_mass: period must be >= 1");
      for (Index j = -M; j <= M; ++j) {
        // Exact for N = 2 (cos(πj) = ±1) so the alternating profile is bit-exact.
        const double c = params.period == 2 ? ((j % 2 == 0) ? 1.0 : -1.0)
                                            : std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / params.period);
        m[static_cast<std::size_t>(j + M)] = 1.0 + params.periodic_amplitude * c;
      }
      break;
    }
    case MassModel::transparent:
    case MassModel::translucent: {
      if (noise == nullptr) throw std::invalid_argument("make_mass: transparent/translucent model needs noise");
      if (!noise->covers({-M, M})) throw std::invalid_argument("make_mass: noise window does not cover [-M, M]");
      for (Index j = -M; j <= M; ++j) {
        const double z = zeta_ring(j);
        const double dd = model == MassModel::transparent ? zeta_ring(j + 1) - 2.0 * z + zeta_ring(j - 1)
                                                          : z - zeta_ring(j - 1);
        m[static_cast<std::size_t>(j + M)] = 1.0 + dd;
      }
      break;
    }
    case MassModel::iid: {
      if (!(params.iid_lo > 0.0 && params.iid_hi >= params.iid_lo)) {
        throw std::invalid_argument("make_mass: iid range must be positive");
      }
      const CounterRng rng(params.seed, StreamPurpose::iid_mass, params.realization);
      for (Index j = -M; j <= M; ++j) m[static_cast<std::size_t>(j + M)] = rng.uniform(params.iid_lo, params.iid_hi, j);
      break;
    }
  }
  return MassProfile(model, M, std::move(m));
}

// ---------------------------------------------------------------------------
// Lattice state

/// (q, p) on the periodic window j ∈ [−M, M] at time t. Storage is one flat
/// buffer [q | p] so the time stepper can treat it as a single vector.
class LatticeState {
 public:
  LatticeState() = default;
  explicit LatticeState(Index M, double t = 0.0)
      : M_(M), t_(t), data_(2 * static_cast<std::size_t>(2 * M + 1), 0.0) {
    if (M < 0) throw std::invalid_argument("LatticeState: M must be >= 0");
  }
  LatticeState(Index M, std::span<const double> q, std::span<const double> p, double t = 0.0) : LatticeState(M, t) {
    if (q.size() != size() || p.size() != size()) throw std::invalid_argument("LatticeState: q and p must have length 2M+1");
    std::copy(q.begin(), q.end(), data_.begin());
    std::copy(p.begin(), p.end(), data_.begin() + static_cast<std::ptrdiff_t>(size()));
  }

  Index half_width() const noexcept { return M_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(2 * M_ + 1); }
  double t() const noexcept { return t_; }
  void set_t(double t) noexcept { t_ = t; }

  std::span<double> q() noexcept { return {data_.data(), size()}; }
  std::span<double> p() noexcept { return {data_.data() + size(), size()}; }
  std::span<const double> q() const noexcept { return {data_.data(), size()}; }
  std::span<const double> p() const noexcept { return {data_.data() + size(), size()}; }

  double q(Index j) const { return data_.at(static_cast<std::size_t>(j + M_)); }
  double p(Index j) const { return data_.at(size() + static_cast<std::size_t>(j + M_)); }

  std::vector<double>& flat() noexcept { return data_; }
  const std::vector<double>& flat() const noexcept { return data_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  Index M_ = 0;
  double t_ = 0.0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// FPUT right-hand side

/// dq = δ⁺p, dp = δ⁻[𝒱′(q)] / m on the periodic window. Spans must all have
/// length 2M+1.
inline void fput_rhs(std::span<const double> q, std::span<const double> p, std::span<const double> mass,
                     std::span<double> dq, std::span<double> dp, SpringLaw law = SpringLaw::fput) {
  const std::size_t n = q.size();
  if (p.size() != n || mass.size() != n || dq.size() != n || dp.size() != n) {
    throw std::invalid_argument("fput_rhs: length mismatch");
  }
  if (n == 0) return;
  for (std::size_t i = 0; i + 1 < n; ++i) dq[i] = p[i + 1] - p[i];
  dq[n - 1] = p[0] - p[n - 1];

  double prev = spring_force(q[n - 1], law);
  for (std::size_t i = 0; i < n; ++i) {
    const double cur = spring_force(q[i], law);
    dp[i] = (cur - prev) / mass[i];
    prev = cur;
  }
}

struct LatticeRhs {
  std::vector<double> dq;
  std::vector<double> dp;
};

inline LatticeRhs fput_rhs(const LatticeState& state, const MassProfile& mass, SpringLaw law = SpringLaw::fput) {
  if (mass.half_width() != state.half_width()) throw std::invalid_argument("fput_rhs: state and mass disagree on M");
  LatticeRhs r{std::vector<double>(state.size()), std::vector<double>(state.size())};
  fput_rhs(state.q(), state.p(), mass.values(), r.dq, r.dp, law);
  return r;
}

// ---------------------------------------------------------------------------
// Energy and norms

/// Σ_j [½ m(j) v(j)² + 𝒲(u(j), b(j))] with 𝒲(a, b) = ½(1 + 2b)a² + ⅓a³.
inline double energy_H(std::span<const double> u, std::span<const double> v, std::span<const double> background,
                       std::span<const double> mass) {
  const std::size_t n = u.size();
  if (v.size() != n || background.size() != n || mass.size() != n) throw std::invalid_argument("energy_H: length mismatch");
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u[i];
    h += 0.5 * mass[i] * v[i] * v[i] + 0.5 * (1.0 + 2.0 * background[i]) * a * a + a * a * a / 3.0;
  }
  return h;
}

inline double energy_H(std::span<const double> u, std::span<const double> v, std::span<const double> background,
                       const MassProfile& mass) {
  return energy_H(u, v, background, mass.values());
}

/// The lattice Hamiltonian Σ ½ m p² + 𝒱(q) (energy_H with zero background).
inline double lattice_hamiltonian(const LatticeState& s, const MassProfile& mass) {
  const std::vector<double> zero(s.size(), 0.0);
  return energy_H(s.q(), s.p(), zero, mass);
}

struct Norms {
  double l2 = 0.0;
  double linf = 0.0;
};

inline Norms norms(std::span<const double> f) {
  Norms n;
  double ss = 0.0;
  for (double x : f) {
    ss += x * x;
    n.linf = std::max(n.linf, std::abs(x));
  }
  n.l2 = std::sqrt(ss);
  return n;
}

/// Pair convention ‖f, g‖ = ‖f‖ + ‖g‖ for both norms.
inline Norms norms(std::span<const double> f, std::span<const double> g) {
  const Norms a = norms(f);
  const Norms b = norms(g);
  return {a.l2 + b.l2, a.linf + b.linf};
}

inline Norms norms(const LatticeState& s) { return norms(s.q(), s.p()); }

}  // namespace fputkdv
