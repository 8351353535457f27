#pragma once

// Extended KdV approximators on the lattice, the AR(1) correction processes
// that keep the microscale correctors from random-walking, and the residual
// diagnostics that measure how well an approximator solves the lattice.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fputkdv/errors.hpp"
#include "fputkdv/kdv.hpp"
#include "fputkdv/lattice.hpp"

namespace fputkdv {

// ---------------------------------------------------------------------------
// AR(1) processes

/// γ₁, γ₂ on j ∈ [−M, M] with γ(0) = 0.
///
///   δ⁺γ₁ = −ε sgn(j) γ₁ − (ζ + S⁺ζ)
///   δ⁻γ₂ = −ε sgn(j) γ₂ + (ζ + S⁻ζ + ζ δ⁺δ⁻ζ + 2σ²)
///
/// Each is iterated outward from 0 in the direction in which the recursion
/// contracts by θ = 1/(1+ε), except γ₁ for j > 0, whose forward step
/// multiplies by ϑ = 1 − ε.
struct GammaProcesses {
  Index M = 0;
  double epsilon = 0.0;
  double theta = 0.0;     // 1/(1+ε)
  double vartheta = 0.0;  // 1−ε
  double sigma2 = 0.0;
  std::vector<double> gamma1;
  std::vector<double> gamma2;

  double g1(Index j) const { return gamma1.at(static_cast<std::size_t>(j + M)); }
  double g2(Index j) const { return gamma2.at(static_cast<std::size_t>(j + M)); }
};

namespace detail {

inline void check_ar_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("gamma_build: epsilon must lie in (0, 1], got " + std::to_string(epsilon));
  }
}

/// Driver of the γ₂ recursion at j.
template <class Zeta>
inline double gamma2_driver(const Zeta& zeta, Index j, double sigma2) {
  const double zm = zeta(j - 1), z0 = zeta(j), zp = zeta(j + 1);
  return z0 + zm + z0 * (zp - 2.0 * z0 + zm) + 2.0 * sigma2;
}

}  // namespace detail

/// Run both recursions outward from j = 0, calling visit(j, γ₁(j), γ₂(j))
/// for j = 0, 1, ..., M and then j = −1, ..., −M. `zeta(j)` must be defined on
/// [−M, M+1].
template <class Zeta, class Visit>
void gamma_sweep(const Zeta& zeta, double sigma2, double epsilon, Index M, Visit&& visit) {
  detail::check_ar_epsilon(epsilon);
  const double theta = 1.0 / (1.0 + epsilon);
  const double vartheta = 1.0 - epsilon;
  double g1 = 0.0, g2 = 0.0;
  visit(Index{0}, g1, g2);
  for (Index j = 1; j <= M; ++j) {
    g1 = (j == 1 ? 1.0 : vartheta) * g1 - (zeta(j - 1) + zeta(j));
    g2 = theta * (g2 + detail::gamma2_driver(zeta, j, sigma2));
    visit(j, g1, g2);
  }
  g1 = 0.0;
  g2 = 0.0;
  for (Index j = -1; j >= -M; --j) {
    g1 = theta * (g1 + zeta(j) + zeta(j + 1));
    g2 = (j == -1 ? 1.0 : vartheta) * g2 - detail::gamma2_driver(zeta, j + 1, sigma2);
    visit(j, g1, g2);
  }
}

inline GammaProcesses gamma_build(const NoiseSequence& noise, double epsilon, Index M) {
  detail::check_ar_epsilon(epsilon);
  if (M < 0) throw std::invalid_argument("gamma_build: M must be >= 0");
  if (!noise.covers({-M, M + 1})) throw std::invalid_argument("gamma_build: noise window does not cover [-M, M+1]");
  GammaProcesses g;
  g.M = M;
  g.epsilon = epsilon;
  g.theta = 1.0 / (1.0 + epsilon);
  g.vartheta = 1.0 - epsilon;
  g.sigma2 = noise.sigma2();
  g.gamma1.assign(static_cast<std::size_t>(2 * M + 1), 0.0);
  g.gamma2.assign(static_cast<std::size_t>(2 * M + 1), 0.0);
  auto zeta = [&noise](Index j) { return noise.at_unchecked(j); };
  gamma_sweep(zeta, noise.sigma2(), epsilon, M, [&](Index j, double a, double b) {
    g.gamma1[static_cast<std::size_t>(j + M)] = a;
    g.gamma2[static_cast<std::size_t>(j + M)] = b;
  });
  return g;
}

/// Explicit AR(1) sum χ(n) = Σ_{k=0}^{n−1} θᵏ z(n−k), n = 0..size−1
/// (χ(0) = 0, z(0) unused). Quadratic cost; meant as an oracle.
inline std::vector<double> ar1_reference(std::span<const double> z, double theta) {
  if (!(theta > -1.0 && theta < 1.0)) throw std::invalid_argument("ar1_reference: theta must lie in (-1, 1)");
  std::vector<double> chi(z.size(), 0.0);
  for (std::size_t n = 1; n < z.size(); ++n) {
    double sum = 0.0;
    double power = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      sum += power * z[n - k];
      power *= theta;
    }
    chi[n] = sum;
  }
  return chi;
}

/// χ(n) = θ χ(n−1) + z(n), χ(0) = 0.
inline std::vector<double> ar1_recursive(std::span<const double> z, double theta) {
  std::vector<double> chi(z.size(), 0.0);
  for (std::size_t n = 1; n < z.size(); ++n) chi[n] = theta * chi[n - 1] + z[n];
  return chi;
}

/// Running tracker of sup |x(j)| / √ln(e + |j|).
class LogNormalizedSup {
 public:
  void add(Index j, double x) {
    const double a = std::abs(x);
    // The normalizer is ≥ 1, so values below the current best cannot win.
    if (a <= best_) return;
    const double v = a / std::sqrt(std::log(std::numbers::e + static_cast<double>(j < 0 ? -j : j)));
    if (v > best_) best_ = v;
  }
  double value() const noexcept { return best_; }

 private:
  double best_ = 0.0;
};

/// sup_n |χ(n)|/√ln(e+n) for the recursion driven by z(1..length), streaming.
template <class Driver>
double ar1_normalized_sup(const Driver& z, double theta, Index length) {
  LogNormalizedSup sup;
  double chi = 0.0;
  for (Index n = 1; n <= length; ++n) {
    chi = theta * chi + z(n);
    sup.add(n, chi);
  }
  return sup.value();
}

struct GammaSup {
  double gamma2 = 0.0;  // sup |γ₂(j)|/√ln(e+|j|)
  double sum = 0.0;     // sup (|γ₁(j)| + |γ₂(j)|)/√ln(e+|j|)
};

/// Normalized suprema over |j| ≤ M without storing the processes.
template <class Zeta>
GammaSup gamma_normalized_sup(const Zeta& zeta, double sigma2, double epsilon, Index M) {
  LogNormalizedSup s2, s12;
  gamma_sweep(zeta, sigma2, epsilon, M, [&](Index j, double a, double b) {
    s2.add(j, b);
    s12.add(j, std::abs(a) + std::abs(b));
  });
  return {s2.value(), s12.value()};
}

// ---------------------------------------------------------------------------
// Approximator

enum class ApproxOrder { leading, extended };

struct ApproximatorConfig {
  double epsilon = 0.25;
  double T0 = 3.0;
  ApproxOrder order = ApproxOrder::extended;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("ApproximatorConfig: epsilon must lie in (0, 1)");
    if (!(T0 > 0.0)) throw std::invalid_argument("ApproximatorConfig: T0 must be > 0");
  }
};

/// ∂_w and ∂_l of the correctors A₂(w, l, T), B₂(w, l, T).
struct CorrectorPartials {
  double A2_w = 0.0, A2_l = 0.0, B2_w = 0.0, B2_l = 0.0;
};

constexpr CorrectorPartials corrector_partials(const Jet& a, const Jet& b, double sigma2) noexcept {
  const double e = 0.25 - 2.0 * sigma2;
  return {0.25 * -(2.0 * a.d2 * b.anti + 2.0 * a.d1 * b.v),
          0.25 * (e * b.d3 - (2.0 * a.d1 * b.v + 2.0 * a.v * b.d1 + 2.0 * b.v * b.d1)),
          0.25 * (e * a.d3 - (2.0 * a.v * a.d1 + 2.0 * a.d1 * b.v + 2.0 * a.v * b.d1)),
          0.25 * -(2.0 * a.v * b.d1 + 2.0 * a.anti * b.d2)};
}

/// The profiles Q₀..Q₃, P₀..P₃ at one site.
struct SiteTerms {
  double Q0 = 0, Q1 = 0, Q2 = 0, Q3 = 0;
  double P0 = 0, P1 = 0, P2 = 0, P3 = 0;
};

/// Terms at one site given the jets of A at w and B at l, the local noise
/// ζ(j), ζ(j+1) and the AR values γ₁(j), γ₂(j).
constexpr SiteTerms site_terms(const Jet& a, const Jet& b, double sigma2, double zeta, double zeta_next, double g1,
                               double g2) noexcept {
  SiteTerms s;
  s.Q0 = a.v + b.v;
  s.P0 = -a.v + b.v;
  const double dz = zeta_next - zeta;
  const double dX_Q0 = a.d1 + b.d1;
  const double dtau_P0 = a.d1 + b.d1;
  s.Q1 = 0.5 * dX_Q0 + dz * dtau_P0;
  const Correctors c = correctors(a, b, sigma2);
  s.Q2 = c.A2 + c.B2 - zeta * (a.d2 + b.d2);
  s.P2 = -c.A2 + c.B2 + zeta * (-a.d2 + b.d2);
  const double dT_P0 = -kdv_time_derivative(a, sigma2, Direction::right) + kdv_time_derivative(b, sigma2, Direction::left);
  const CorrectorPartials d = corrector_partials(a, b, sigma2);
  const double dtau_A2 = -d.A2_w + d.A2_l;
  const double dtau_B2 = -d.B2_w + d.B2_l;
  s.Q3 = (g2 + 0.5 * zeta) * (a.d3 + b.d3) - dz * 2.0 * s.Q0 * dX_Q0 + dz * (dT_P0 - dtau_A2 + dtau_B2);
  s.P3 = g1 * (-a.d3 + b.d3);
  return s;
}

struct ApproxFields {
  double t = 0.0;
  IndexRange range;
  std::vector<double> q;
  std::vector<double> p;
};

/// q̃ = Σ εⁿ⁺² Qₙ(j, εj, εt, ε³t), p̃ likewise, on `range`. Leading order
/// keeps only ε²(Q₀, P₀). Missing noise means ζ ≡ 0; missing gammas mean
/// γ ≡ 0 and is only accepted when the noise is absent or zero. t may pass
/// the horizon T0/ε³ by one lattice time unit so centred differences at the
/// last sample stay valid; grid families still enforce their own range.
inline ApproxFields evaluate(const ApproximatorConfig& config, const WaveFamily& family, const NoiseSequence* noise,
                             const GammaProcesses* gammas, IndexRange range, double t) {
  config.validate();
  const double eps = config.epsilon;
  const double T = eps * eps * eps * t;
  if (std::abs(t) > config.T0 / (eps * eps * eps) + 1.0 && std::abs(T) > config.T0 + GridKdv::time_margin) {
    throw DomainExceeded("evaluate: t = " + std::to_string(t) + " beyond the horizon T0/eps^3");
  }
  const bool extended = config.order == ApproxOrder::extended;
  if (extended) {
    if (noise != nullptr && !noise->covers({range.lo, range.hi + 1})) {
      throw std::invalid_argument("evaluate: noise window does not cover the lattice range");
    }
    if (gammas == nullptr && noise != nullptr && !noise->is_zero()) {
      throw std::invalid_argument("evaluate: extended order with nonzero noise needs the AR processes");
    }
    if (gammas != nullptr && (range.lo < -gammas->M || range.hi > gammas->M)) {
      throw std::invalid_argument("evaluate: AR processes do not cover the lattice range");
    }
  }
  ApproxFields out{t, range, std::vector<double>(static_cast<std::size_t>(range.size()), 0.0),
                   std::vector<double>(static_cast<std::size_t>(range.size()), 0.0)};
  if (family.is_zero()) return out;

  const auto slice = family.at(T);
  const double sigma2 = family.sigma2();
  const double e2 = eps * eps, e3 = e2 * eps, e4 = e3 * eps, e5 = e4 * eps;
  const double tau = eps * t;
  for (Index j = range.lo; j <= range.hi; ++j) {
    const double X = eps * static_cast<double>(j);
    const Jet a = slice.a.eval(X - tau);
    const Jet b = slice.b.eval(X + tau);
    const auto i = static_cast<std::size_t>(j - range.lo);
    if (!extended) {
      out.q[i] = e2 * (a.v + b.v);
      out.p[i] = e2 * (-a.v + b.v);
      continue;
    }
    const double z = noise ? noise->at_unchecked(j) : 0.0;
    const double zn = noise ? noise->at_unchecked(j + 1) : 0.0;
    const double g1 = gammas ? gammas->gamma1[static_cast<std::size_t>(j + gammas->M)] : 0.0;
    const double g2 = gammas ? gammas->gamma2[static_cast<std::size_t>(j + gammas->M)] : 0.0;
    const SiteTerms s = site_terms(a, b, sigma2, z, zn, g1, g2);
    out.q[i] = e2 * s.Q0 + e3 * s.Q1 + e4 * s.Q2 + e5 * s.Q3;
    out.p[i] = e2 * s.P0 + e3 * s.P1 + e4 * s.P2 + e5 * s.P3;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residuals and α/β diagnostics

struct ResidualNorms {
  double res1_l2 = 0.0;
  double res2_l2 = 0.0;
};

/// Trajectory: any callable t ↦ (q, p) on the mass window.
using Trajectory = std::function<std::pair<std::vector<double>, std::vector<double>>(double)>;

/// Res₁ = δ⁺p̃ − ∂_t q̃, Res₂ = δ⁻[𝒱′(q̃)]/m − ∂_t p̃, with ∂_t by centred
/// difference of step h. Periodic wrap on the mass window.
inline ResidualNorms residual_norms(const Trajectory& traj, const MassProfile& mass, double t, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("residual_norms: h must be > 0");
  const auto [q, p] = traj(t);
  const auto [qp, pp] = traj(t + h);
  const auto [qm, pm] = traj(t - h);
  const std::size_t n = mass.size();
  if (q.size() != n || p.size() != n) throw std::invalid_argument("residual_norms: trajectory and mass disagree on size");
  std::vector<double> dq(n), dp(n);
  fput_rhs(q, p, mass.values(), dq, dp, SpringLaw::fput);
  const double inv = 1.0 / (2.0 * h);
  double r1 = 0.0, r2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = dq[i] - (qp[i] - qm[i]) * inv;
    const double b = dp[i] - (pp[i] - pm[i]) * inv;
    r1 += a * a;
    r2 += b * b;
  }
  return {std::sqrt(r1), std::sqrt(r2)};
}

/// Approximator trajectory on the full mass window [−M, M].
inline Trajectory approximator_trajectory(const ApproximatorConfig& config, const WaveFamily& family,
                                          const NoiseSequence* noise, const GammaProcesses* gammas, Index M) {
  return [=, &family](double t) {
    auto f = evaluate(config, family, noise, gammas, {-M, M}, t);
    return std::pair{std::move(f.q), std::move(f.p)};
  };
}

inline ResidualNorms residual_norms(const ApproximatorConfig& config, const WaveFamily& family,
                                    const NoiseSequence* noise, const GammaProcesses* gammas, const MassProfile& mass,
                                    double t, double h = 1e-2) {
  return residual_norms(approximator_trajectory(config, family, noise, gammas, mass.half_width()), mass, t, h);
}

struct AlphaBeta {
  double alpha1 = 0.0;  // sup ‖q̃, p̃‖_ℓ²
  double alpha2 = 0.0;  // sup ‖∂_t q̃‖_ℓ∞
  double alpha3 = 0.0;  // sup ‖Res₁‖ + ‖Res₂‖
  double beta1 = 0.0;   // inf ‖q̃, p̃‖_ℓ²
};

/// Discrete suprema (and infimum) over the given sample times.
inline AlphaBeta alpha_beta(const ApproximatorConfig& config, const WaveFamily& family, const NoiseSequence* noise,
                            const GammaProcesses* gammas, const MassProfile& mass, std::span<const double> times,
                            double h = 1e-2) {
  if (times.empty()) throw std::invalid_argument("alpha_beta: no sample times");
  const Index M = mass.half_width();
  const double horizon = config.T0 / (config.epsilon * config.epsilon * config.epsilon);
  const Trajectory traj = approximator_trajectory(config, family, noise, gammas, M);
  AlphaBeta ab;
  ab.beta1 = std::numeric_limits<double>::infinity();
  std::vector<double> dq(mass.size()), dp(mass.size());
  for (double t : times) {
    if (std::abs(t) > horizon * (1.0 + 1e-12)) throw DomainExceeded("alpha_beta: sample time beyond T0/eps^3");
    const auto [q, p] = traj(t);
    const auto [qp, pp] = traj(t + h);
    const auto [qm, pm] = traj(t - h);
    const double size = norms(q, p).l2;
    ab.alpha1 = std::max(ab.alpha1, size);
    ab.beta1 = std::min(ab.beta1, size);
    fput_rhs(q, p, mass.values(), dq, dp, SpringLaw::fput);
    const double inv = 1.0 / (2.0 * h);
    double r1 = 0.0, r2 = 0.0, qt = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double dqt = (qp[i] - qm[i]) * inv;
      const double dpt = (pp[i] - pm[i]) * inv;
      qt = std::max(qt, std::abs(dqt));
      r1 += (dq[i] - dqt) * (dq[i] - dqt);
      r2 += (dp[i] - dpt) * (dp[i] - dpt);
    }
    ab.alpha2 = std::max(ab.alpha2, qt);
    ab.alpha3 = std::max(ab.alpha3, std::sqrt(r1) + std::sqrt(r2));
  }
  return ab;
}

// ---------------------------------------------------------------------------
// Long-wave ℓ² scaling

struct LwaRow {
  double epsilon = 0.0;
  double scaled_l2 = 0.0;     // ε^{1/2} ‖f(·) F(ε·)‖_ℓ²
  double scaled_e0_l2 = 0.0;  // ε^{1/2} ‖E₀⁺ u‖_ℓ², εE₀⁺ = (full δ⁺) − (δ⁺ in j only)
};

struct LwaResult {
  std::vector<LwaRow> rows;
  double spread = 0.0;     // max/min of scaled_l2 (1 when all rows vanish)
  double e0_spread = 0.0;  // same for scaled_e0_l2
};

/// Tabulate the ε^{1/2}-scaled ℓ² norms of u(j) = f(j)F(εj) for each ε,
/// summing |j| ≤ ceil(cutoff/ε).
inline LwaResult lwa_scaling_check(const std::function<double(Index)>& f, const std::function<double(double)>& F,
                                   std::span<const double> epsilons, double cutoff = 40.0) {
  LwaResult r;
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw std::invalid_argument("lwa_scaling_check: epsilon must be > 0");
    const auto J = static_cast<Index>(std::ceil(cutoff / eps));
    double s = 0.0, s0 = 0.0;
    for (Index j = -J; j <= J; ++j) {
      const double Fj = F(eps * static_cast<double>(j));
      const double Fn = F(eps * static_cast<double>(j + 1));
      const double fj = f(j), fn = f(j + 1);
      const double u = fj * Fj;
      // Full forward difference minus the j-only difference, over ε.
      const double e0 = ((fn * Fn - u) - (fn - fj) * Fj) / eps;
      s += u * u;
      s0 += e0 * e0;
    }
    r.rows.push_back({eps, std::sqrt(eps * s), std::sqrt(eps * s0)});
  }
  auto spread = [&](auto member) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& row : r.rows) {
      lo = std::min(lo, row.*member);
      hi = std::max(hi, row.*member);
    }
    return hi == 0.0 ? 1.0 : hi / lo;
  };
  r.spread = spread(&LwaRow::scaled_l2);
  r.e0_spread = spread(&LwaRow::scaled_e0_l2);
  return r;
}

}  // namespace fputkdv
