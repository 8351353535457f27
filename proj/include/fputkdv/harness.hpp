#pragma once

// Experiment runner behind the fput_kdv command line tool. Each experiment
// fans out independent (parameter, realization) cells to a worker pool and
// gathers the rows in a fixed order, so output never depends on scheduling.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fputkdv/approximator.hpp"
#include "fputkdv/errors.hpp"
#include "fputkdv/fit.hpp"
#include "fputkdv/integrator.hpp"
#include "fputkdv/kdv.hpp"
#include "fputkdv/lattice.hpp"
#include "fputkdv/rng.hpp"

namespace fputkdv {

enum class ExperimentKind { amplitude, error_sweep, gamma_bound, ar_bound, scaling_check, residual_check, simulate };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::amplitude: return "amplitude";
    case ExperimentKind::error_sweep: return "error_sweep";
    case ExperimentKind::gamma_bound: return "gamma_bound";
    case ExperimentKind::ar_bound: return "ar_bound";
    case ExperimentKind::scaling_check: return "scaling_check";
    case ExperimentKind::residual_check: return "residual_check";
    case ExperimentKind::simulate: return "simulate";
  }
  return "unknown";
}

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::error_sweep;
  std::vector<double> epsilons;
  double T0 = 3.0;
  std::string mass = "transparent";  // a mass model name, or "all" (amplitude only)
  int realizations = 1;
  std::uint64_t seed = 42;
  double dt = 0.0;            // 0: default_dt(mass)
  Index lattice_size = 0;     // 0: default_half_width(ε, T0), or 10/ε³ for gamma_bound
  int samples = 200;          // sample times per run
  std::string out;

  double support_bound = 0.125;          // ζ ~ uniform(−a, a); 0 gives ζ ≡ 0 where allowed
  std::vector<double> thetas{0.5, 0.9, 0.99};  // ar_bound
  Index length = 100000;                 // ar_bound
  double spread_ratio = 10.0;            // residual_check flag threshold
  double h = 1e-2;                       // centred time difference step
  std::string wave = "soliton";          // residual_check: soliton | zero
  double amplitude = 2.0;                // simulate: Φ(X) = amplitude · exp(−X²)
  double psi_ratio = 0.0;                // simulate: Ψ = psi_ratio · Φ
  std::size_t kdv_modes = 4096;          // simulate: Fourier modes of the KdV grid
  bool record_runtime = false;
  bool plot = false;

  std::string invocation;
  std::string version = "unknown";

  void validate() const {
    if (epsilons.empty() && kind != ExperimentKind::ar_bound) throw std::invalid_argument("no epsilon values given");
    for (double e : epsilons) {
      if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("epsilon values must lie in (0, 1)");
    }
    if (realizations < 1) throw std::invalid_argument("realizations must be >= 1");
    if (!(T0 > 0.0)) throw std::invalid_argument("t0 must be > 0");
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (dt < 0.0) throw std::invalid_argument("dt must be > 0");
    if (lattice_size < 0) throw std::invalid_argument("lattice size must be > 0");
    if (!(support_bound >= 0.0 && support_bound < 0.25)) throw std::invalid_argument("support bound must lie in [0, 1/4)");
    if (!(h > 0.0)) throw std::invalid_argument("h must be > 0");
    if (length < 1) throw std::invalid_argument("length must be >= 1");
    for (double t : thetas) {
      if (!(t > -1.0 && t < 1.0)) throw std::invalid_argument("theta values must lie in (-1, 1)");
    }
  }
};

/// Defaults for each experiment at desk scale.
inline ExperimentSpec default_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  const std::vector<double> dyadic{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  switch (kind) {
    case ExperimentKind::amplitude:
      s.epsilons = {0.5, 0.25, 0.125};
      s.mass = "all";
      s.samples = 61;
      break;
    case ExperimentKind::error_sweep:
      s.epsilons = {0.5, 0.25, 0.125};
      s.realizations = 3;
      break;
    case ExperimentKind::gamma_bound:
      s.epsilons = dyadic;
      s.realizations = 200;
      break;
    case ExperimentKind::ar_bound:
      s.realizations = 500;
      break;
    case ExperimentKind::scaling_check: s.epsilons = dyadic; break;
    case ExperimentKind::residual_check: s.epsilons = {0.25, 0.125, 0.0625}; break;
    case ExperimentKind::simulate: s.epsilons = {0.5, 0.25, 0.125}; break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Worker pool

/// FPUT_KDV_THREADS, or the hardware concurrency when unset or 0.
inline unsigned worker_count() {
  unsigned n = 0;
  if (const char* env = std::getenv("FPUT_KDV_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0) throw std::invalid_argument("FPUT_KDV_THREADS must be a non-negative integer");
    n = static_cast<unsigned>(v);
  }
  if (n == 0) n = std::max(1U, std::thread::hardware_concurrency());
  return n;
}

/// Run fn(i) for i in [0, n) on the pool; per-cell exceptions are returned,
/// not thrown.
template <class Fn>
std::vector<std::exception_ptr> parallel_cells(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(worker_count(), n);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return errors;
}

/// Numerical aborts become failure messages (completed cells are kept);
/// anything else is rethrown, lowest cell first.
inline std::vector<std::string> collect_failures(const std::vector<std::exception_ptr>& errors) {
  std::vector<std::string> failures;
  for (const auto& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const NonFiniteError& ex) {
      failures.emplace_back(ex.what());
    } catch (const AliasingDetected& ex) {
      failures.emplace_back(ex.what());
    }
  }
  return failures;
}

// ---------------------------------------------------------------------------
// Shared pieces

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline double sech2(double z) {
  const double e = std::exp(-2.0 * std::abs(z));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

inline Index half_width_for(const ExperimentSpec& spec, double eps) {
  return spec.lattice_size > 0 ? spec.lattice_size : default_half_width(eps, spec.T0);
}

/// Noise realization on the window a lattice of half-width M needs.
inline NoiseSequence noise_for(const ExperimentSpec& spec, Index M, std::uint64_t realization) {
  if (spec.support_bound == 0.0) {
    const IndexRange w = noise_window(M);
    return NoiseSequence::from_values(w.lo, std::vector<double>(static_cast<std::size_t>(w.size()), 0.0), 0.0);
  }
  return sample_noise(Distribution::uniform, spec.support_bound, spec.seed, noise_window(M), realization);
}

struct Medium {
  std::optional<NoiseSequence> noise;
  MassProfile mass;
  double sigma2 = 0.0;
};

inline Medium medium_for(const ExperimentSpec& spec, MassModel model, Index M, std::uint64_t realization) {
  Medium m;
  if (model == MassModel::transparent || model == MassModel::translucent) {
    m.noise = noise_for(spec, M, realization);
    m.sigma2 = m.noise->sigma2();
  }
  MassParams params;
  params.seed = spec.seed;
  params.realization = realization;
  m.mass = make_mass(model, params, m.noise ? &*m.noise : nullptr, M);
  return m;
}

inline double dt_for(const ExperimentSpec& spec, const MassProfile& mass) {
  return spec.dt > 0.0 ? spec.dt : default_dt(mass);
}

inline bool is_random(MassModel m) { return m == MassModel::transparent || m == MassModel::iid || m == MassModel::translucent; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Amplitude attenuation

struct AmplitudeSeries {
  MassModel model = MassModel::constant;
  double epsilon = 0.0;
  std::uint64_t realization = 0;
  std::vector<double> T;
  std::vector<double> scaled_sum;  // (‖q‖_ℓ∞ + ‖p‖_ℓ∞)/ε²
  std::vector<double> scaled_max;  // max(‖q‖_ℓ∞, ‖p‖_ℓ∞)/ε²
};

struct AmplitudeResult {
  std::vector<AmplitudeSeries> series;
  std::vector<std::string> failures;
};

inline std::vector<MassModel> amplitude_models(const std::string& mass) {
  if (mass == "all") return {MassModel::constant, MassModel::periodic, MassModel::transparent, MassModel::iid};
  return {mass_model_from_string(mass)};
}

/// Long-wave data q = 3ε² sech²(√6 εj), p = −q, integrated to T0/ε³, with
/// the scaled ℓ∞ amplitude recorded on a uniform grid of macroscopic times.
inline AmplitudeResult run_amplitude(const ExperimentSpec& spec) {
  spec.validate();
  struct Cell {
    MassModel model;
    double eps;
    std::uint64_t r;
  };
  std::vector<Cell> cells;
  for (MassModel m : amplitude_models(spec.mass)) {
    for (double e : spec.epsilons) {
      const int reps = detail::is_random(m) ? spec.realizations : 1;
      for (int r = 0; r < reps; ++r) cells.push_back({m, e, static_cast<std::uint64_t>(r)});
    }
  }
  AmplitudeResult result;
  result.series.resize(cells.size());
  const auto errors = parallel_cells(cells.size(), [&](std::size_t i) {
    const Cell& c = cells[i];
    AmplitudeSeries& s = result.series[i];
    s.model = c.model;
    s.epsilon = c.eps;
    s.realization = c.r;
    const Index M = detail::half_width_for(spec, c.eps);
    const auto medium = detail::medium_for(spec, c.model, M, c.r);
    const double e2 = c.eps * c.eps, e3 = e2 * c.eps;
    LatticeState state(M, 0.0);
    for (Index j = -M; j <= M; ++j) {
      const double v = 3.0 * e2 * detail::sech2(std::sqrt(6.0) * c.eps * static_cast<double>(j));
      state.q()[static_cast<std::size_t>(j + M)] = v;
      state.p()[static_cast<std::size_t>(j + M)] = -v;
    }
    const auto plan = IntegrationPlan::uniform(detail::dt_for(spec, medium.mass), spec.T0 / e3, spec.samples);
    integrate(std::move(state), medium.mass, plan, [&](double t, const LatticeState& st) {
      const double nq = norms(st.q()).linf, np = norms(st.p()).linf;
      s.T.push_back(t * e3);
      s.scaled_sum.push_back((nq + np) / e2);
      s.scaled_max.push_back(std::max(nq, np) / e2);
    });
  });
  result.failures = collect_failures(errors);
  return result;
}

// ---------------------------------------------------------------------------
// Error sweep

struct ErrorRow {
  double epsilon = 0.0;
  double E_eps = 0.0;
  double E_q = 0.0;  // sup of the q part
  double E_p = 0.0;  // sup of the p part
  double runtime_s = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t realization = 0;
  bool completed = false;
};

struct RealizationFit {
  std::uint64_t realization = 0;
  SlopeFit fit;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  std::vector<RealizationFit> fits;  // one per realization
  SlopeFit pooled;                   // all completed rows together
  std::vector<std::string> failures;
};

/// Distance from the lattice solution with sech² data to the moving
/// solitary wave 3ε² sech²(kε(j − t − ε²t)), k = √(6/(1 + 24σ²)):
/// E = sup_t ‖q − wave‖_ℓ² + sup_t ‖p + wave‖_ℓ².
inline ErrorRow error_sweep_cell(const ExperimentSpec& spec, double eps, std::uint64_t realization) {
  const auto start = std::chrono::steady_clock::now();
  const Index M = detail::half_width_for(spec, eps);
  const auto medium = detail::medium_for(spec, mass_model_from_string(spec.mass), M, realization);
  const double k = std::sqrt(6.0 / (1.0 + 24.0 * medium.sigma2));
  const double e2 = eps * eps;
  LatticeState state(M, 0.0);
  for (Index j = -M; j <= M; ++j) {
    const double v = 3.0 * e2 * detail::sech2(k * eps * static_cast<double>(j));
    state.q()[static_cast<std::size_t>(j + M)] = v;
    state.p()[static_cast<std::size_t>(j + M)] = -v;
  }
  ErrorRow row;
  row.epsilon = eps;
  row.seed = spec.seed;
  row.realization = realization;
  const auto plan = IntegrationPlan::uniform(detail::dt_for(spec, medium.mass), spec.T0 / (e2 * eps), spec.samples);
  integrate(std::move(state), medium.mass, plan, [&](double t, const LatticeState& st) {
    double sq = 0.0, sp = 0.0;
    for (Index j = -M; j <= M; ++j) {
      const auto i = static_cast<std::size_t>(j + M);
      const double wave = 3.0 * e2 * detail::sech2(k * eps * (static_cast<double>(j) - t - e2 * t));
      sq += (st.q()[i] - wave) * (st.q()[i] - wave);
      sp += (st.p()[i] + wave) * (st.p()[i] + wave);
    }
    row.E_q = std::max(row.E_q, std::sqrt(sq));
    row.E_p = std::max(row.E_p, std::sqrt(sp));
  });
  row.E_eps = row.E_q + row.E_p;
  const double elapsed = detail::seconds_since(start);
  row.runtime_s = spec.record_runtime ? elapsed : 0.0;
  row.completed = true;
  return row;
}

inline ErrorReport run_error_sweep(const ExperimentSpec& spec) {
  spec.validate();
  ErrorReport report;
  // Realization-major so each realization's ε ladder is contiguous.
  for (int r = 0; r < spec.realizations; ++r) {
    for (double e : spec.epsilons) {
      ErrorRow row;
      row.epsilon = e;
      row.seed = spec.seed;
      row.realization = static_cast<std::uint64_t>(r);
      report.rows.push_back(row);
    }
  }
  const auto errors = parallel_cells(report.rows.size(), [&](std::size_t i) {
    report.rows[i] = error_sweep_cell(spec, report.rows[i].epsilon, report.rows[i].realization);
  });
  report.failures = collect_failures(errors);

  std::vector<std::pair<double, double>> pooled;
  for (int r = 0; r < spec.realizations; ++r) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : report.rows) {
      if (row.completed && row.realization == static_cast<std::uint64_t>(r) && row.E_eps > 0.0) {
        pts.emplace_back(row.epsilon, row.E_eps);
      }
    }
    pooled.insert(pooled.end(), pts.begin(), pts.end());
    if (pts.size() >= 2) report.fits.push_back({static_cast<std::uint64_t>(r), fit_slope(pts)});
  }
  if (pooled.size() >= 2 && spec.epsilons.size() >= 2) report.pooled = fit_slope(pooled);
  return report;
}

// ---------------------------------------------------------------------------
// Normalized-supremum bounds (AR processes)

struct BoundRow {
  double param = 0.0;
  std::uint64_t realization = 0;
  double max_normalized = 0.0;
  double extra = 0.0;  // gamma: sup (|γ₁|+|γ₂|)/√ln; ar: max_normalized·√(1−θ²)
};

struct BoundReport {
  std::vector<BoundRow> rows;
  std::vector<double> params;
  std::vector<double> medians;        // median of max_normalized per param
  std::vector<double> extra_medians;  // median of extra per param
  std::optional<SlopeFit> fit;        // ln(median) vs ln(1/ε) or ln(1/(1−θ²))
};

namespace detail {

inline void summarize_bounds(BoundReport& rep, const std::function<double(double)>& abscissa) {
  std::vector<std::pair<double, double>> pts;
  bool positive = true;
  for (double p : rep.params) {
    std::vector<double> v, x;
    for (const auto& row : rep.rows) {
      if (row.param == p) {
        v.push_back(row.max_normalized);
        x.push_back(row.extra);
      }
    }
    rep.medians.push_back(median(v));
    rep.extra_medians.push_back(median(x));
    positive &= rep.medians.back() > 0.0;
    pts.emplace_back(abscissa(p), rep.medians.back());
  }
  if (positive && pts.size() >= 2) rep.fit = fit_slope(pts);
}

}  // namespace detail

/// sup_{|j| ≤ M} |γ₂(j)|/√ln(e+|j|) per (ε, realization), M = 10/ε³ unless
/// overridden.
inline BoundReport run_gamma_bound(const ExperimentSpec& spec) {
  spec.validate();
  BoundReport rep;
  rep.params = spec.epsilons;
  for (double e : spec.epsilons) {
    for (int r = 0; r < spec.realizations; ++r) rep.rows.push_back({e, static_cast<std::uint64_t>(r), 0.0, 0.0});
  }
  const double a = spec.support_bound;
  const auto errors = parallel_cells(rep.rows.size(), [&](std::size_t i) {
    BoundRow& row = rep.rows[i];
    const double eps = row.param;
    const Index M = spec.lattice_size > 0 ? spec.lattice_size : static_cast<Index>(std::ceil(10.0 / (eps * eps * eps)));
    const CounterRng rng(spec.seed, StreamPurpose::zeta, row.realization);
    // Same values sample_noise would produce for this realization.
    auto zeta = [&](Index j) { return a == 0.0 ? 0.0 : rng.uniform(-a, a, j); };
    const GammaSup s = gamma_normalized_sup(zeta, a * a / 3.0, eps, M);
    row.max_normalized = s.gamma2;
    row.extra = s.sum;
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  detail::summarize_bounds(rep, [](double eps) { return 1.0 / eps; });
  return rep;
}

/// sup_n |χ(n)|/√ln(e+n) for χ(n) = θχ(n−1) + z(n), z ~ uniform(−a, a),
/// n = 1..length, per (θ, realization).
inline BoundReport run_ar_bound(const ExperimentSpec& spec) {
  spec.validate();
  BoundReport rep;
  rep.params = spec.thetas;
  for (double th : spec.thetas) {
    for (int r = 0; r < spec.realizations; ++r) rep.rows.push_back({th, static_cast<std::uint64_t>(r), 0.0, 0.0});
  }
  const double a = spec.support_bound;
  const auto errors = parallel_cells(rep.rows.size(), [&](std::size_t i) {
    BoundRow& row = rep.rows[i];
    const CounterRng rng(spec.seed, StreamPurpose::ar_driver, row.realization);
    auto z = [&](Index n) { return a == 0.0 ? 0.0 : rng.uniform(-a, a, n); };
    row.max_normalized = ar1_normalized_sup(z, row.param, spec.length);
    row.extra = row.max_normalized * std::sqrt(1.0 - row.param * row.param);
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  detail::summarize_bounds(rep, [](double th) { return 1.0 / (1.0 - th * th); });
  return rep;
}

// ---------------------------------------------------------------------------
// Residual diagnostics

struct ResidualRow {
  double epsilon = 0.0;
  std::uint64_t realization = 0;
  AlphaBeta ab;
  double a1n = 0.0;  // α₁/ε^{3/2}
  double a2n = 0.0;  // α₂/ε³
  double a3n = 0.0;  // α₃/(ε⁵√|ln ε|)
  double b1n = 0.0;  // β₁ ε^{−3/2}
  double a3_plain = 0.0;  // α₃/ε⁵
};

struct ResidualReport {
  std::vector<ResidualRow> rows;
  // Spread (max/min over rows) of a1n, a2n, a3n, b1n and whether it exceeds
  // the configured ratio.
  std::array<double, 4> spreads{1.0, 1.0, 1.0, 1.0};
  std::array<bool, 4> flags{false, false, false, false};
  std::vector<std::string> failures;
};

inline const std::array<const char*, 4>& residual_columns() {
  static const std::array<const char*, 4> names{"a1n", "a2n", "a3n", "b1n"};
  return names;
}

/// α/β diagnostics of the extended approximator built on the closed-form
/// solitary wave (or the zero family), normalized by their expected ε-orders.
inline ResidualReport run_residual_check(const ExperimentSpec& spec) {
  spec.validate();
  const MassModel model = mass_model_from_string(spec.mass);
  if (model != MassModel::transparent && model != MassModel::constant) {
    throw std::invalid_argument("residual_check supports the transparent and constant mass models");
  }
  if (spec.wave != "soliton" && spec.wave != "zero") throw std::invalid_argument("residual_check: wave must be soliton or zero");
  ResidualReport rep;
  for (double e : spec.epsilons) {
    for (int r = 0; r < spec.realizations; ++r) {
      ResidualRow row;
      row.epsilon = e;
      row.realization = static_cast<std::uint64_t>(r);
      rep.rows.push_back(row);
    }
  }
  const auto errors = parallel_cells(rep.rows.size(), [&](std::size_t i) {
    ResidualRow& row = rep.rows[i];
    const double eps = row.epsilon;
    const Index M = detail::half_width_for(spec, eps);
    const auto medium = detail::medium_for(spec, model, M, row.realization);
    const WaveFamily family = spec.wave == "zero" ? WaveFamily::zero(medium.sigma2) : soliton(medium.sigma2);
    std::optional<GammaProcesses> gammas;
    if (medium.noise) gammas = gamma_build(*medium.noise, eps, M);
    const ApproximatorConfig cfg{eps, spec.T0, ApproxOrder::extended};
    std::vector<double> times;
    const double horizon = spec.T0 / (eps * eps * eps);
    for (int s = 0; s < spec.samples; ++s) times.push_back(spec.samples == 1 ? 0.0 : horizon * s / (spec.samples - 1));
    row.ab = alpha_beta(cfg, family, medium.noise ? &*medium.noise : nullptr, gammas ? &*gammas : nullptr, medium.mass,
                        times, spec.h);
    const double e32 = std::pow(eps, 1.5), e3 = eps * eps * eps, e5 = e3 * eps * eps;
    row.a1n = row.ab.alpha1 / e32;
    row.a2n = row.ab.alpha2 / e3;
    row.a3n = row.ab.alpha3 / (e5 * std::sqrt(std::abs(std::log(eps))));
    row.b1n = row.ab.beta1 / e32;
    row.a3_plain = row.ab.alpha3 / e5;
  });
  rep.failures = collect_failures(errors);
  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<double> col;
    for (const auto& row : rep.rows) col.push_back(c == 0 ? row.a1n : c == 1 ? row.a2n : c == 2 ? row.a3n : row.b1n);
    rep.spreads[c] = spread(col);
    rep.flags[c] = rep.spreads[c] > spec.spread_ratio;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Long-wave scaling

struct ScalingReport {
  struct Entry {
    std::string profile;
    std::uint64_t realization = 0;
    LwaResult result;
  };
  std::vector<Entry> entries;
};

/// ε^{1/2}‖f(·)F(ε·)‖_ℓ² for f ≡ 1 with a Gaussian F, and for f = δ⁺ζ with
/// F = sech², one entry per noise realization.
inline ScalingReport run_scaling_check(const ExperimentSpec& spec) {
  spec.validate();
  ScalingReport rep;
  rep.entries.push_back({"gaussian_unit", 0, {}});
  for (int r = 0; r < spec.realizations; ++r) rep.entries.push_back({"sech2_noise", static_cast<std::uint64_t>(r), {}});
  const double a = spec.support_bound;
  const auto errors = parallel_cells(rep.entries.size(), [&](std::size_t i) {
    auto& entry = rep.entries[i];
    if (entry.profile == "gaussian_unit") {
      entry.result = lwa_scaling_check([](Index) { return 1.0; }, [](double x) { return std::exp(-x * x); }, spec.epsilons);
      return;
    }
    const CounterRng rng(spec.seed, StreamPurpose::zeta, entry.realization);
    auto zeta = [&](Index j) { return a == 0.0 ? 0.0 : rng.uniform(-a, a, j); };
    entry.result = lwa_scaling_check([&](Index j) { return zeta(j + 1) - zeta(j); },
                                     [](double x) { return detail::sech2(x); }, spec.epsilons);
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// General long-wave data

struct SimulateRow {
  double epsilon = 0.0;
  std::uint64_t realization = 0;
  double t = 0.0;
  double err_leading = 0.0;   // ‖q − q̃, p − p̃‖_ℓ², leading order
  double err_extended = 0.0;  // same, extended approximator
};

struct SimulateReport {
  std::vector<SimulateRow> rows;
  struct Sup {
    double epsilon = 0.0;
    std::uint64_t realization = 0;
    double leading = 0.0;
    double extended = 0.0;
  };
  std::vector<Sup> sups;
  std::optional<SlopeFit> fit_leading;
  std::optional<SlopeFit> fit_extended;
  std::vector<std::string> failures;
};

/// Lattice data q = ε²Φ(εj), p = ε²Ψ(εj) with Φ(X) = amplitude·exp(−X²) and
/// Ψ = psi_ratio·Φ, compared against approximators built on the numerically
/// evolved KdV pair.
inline SimulateReport run_simulate(const ExperimentSpec& spec) {
  spec.validate();
  const MassModel model = mass_model_from_string(spec.mass);
  if (model != MassModel::transparent && model != MassModel::constant) {
    throw std::invalid_argument("simulate supports the transparent and constant mass models");
  }
  struct Cell {
    double eps;
    std::uint64_t r;
    std::vector<SimulateRow> rows;
  };
  std::vector<Cell> cells;
  for (double e : spec.epsilons) {
    const int reps = model == MassModel::constant ? 1 : spec.realizations;
    for (int r = 0; r < reps; ++r) cells.push_back({e, static_cast<std::uint64_t>(r), {}});
  }
  const auto errors = parallel_cells(cells.size(), [&](std::size_t i) {
    Cell& c = cells[i];
    const double eps = c.eps, e2 = eps * eps, e3 = e2 * eps;
    const Index M = detail::half_width_for(spec, eps);
    const auto medium = detail::medium_for(spec, model, M, c.r);
    const double amp = spec.amplitude, ratio = spec.psi_ratio;
    auto phi = [amp](double x) { return amp * std::exp(-x * x); };
    const double length = 16.0 / eps;
    const GridProfile phi_grid = sample_periodic(phi, length, spec.kdv_modes);
    const GridProfile psi_grid = sample_periodic([&](double x) { return ratio * phi(x); }, length, spec.kdv_modes);
    const auto split = split_initial_data(phi_grid, psi_grid);
    const WaveFamily family = kdv_evolve(split.a0, split.b0, medium.sigma2, spec.T0);
    const NoiseSequence* noise = medium.noise ? &*medium.noise : nullptr;
    std::optional<GammaProcesses> gammas;
    if (noise) gammas = gamma_build(*noise, eps, M);

    LatticeState state(M, 0.0);
    for (Index j = -M; j <= M; ++j) {
      const double v = e2 * phi(eps * static_cast<double>(j));
      state.q()[static_cast<std::size_t>(j + M)] = v;
      state.p()[static_cast<std::size_t>(j + M)] = ratio * v;
    }
    const ApproximatorConfig lead{eps, spec.T0, ApproxOrder::leading};
    const ApproximatorConfig ext{eps, spec.T0, ApproxOrder::extended};
    const auto plan = IntegrationPlan::uniform(detail::dt_for(spec, medium.mass), spec.T0 / e3, spec.samples);
    integrate(std::move(state), medium.mass, plan, [&](double t, const LatticeState& st) {
      auto distance = [&](const ApproxFields& f) {
        double sq = 0.0, sp = 0.0;
        for (std::size_t k = 0; k < f.q.size(); ++k) {
          sq += (st.q()[k] - f.q[k]) * (st.q()[k] - f.q[k]);
          sp += (st.p()[k] - f.p[k]) * (st.p()[k] - f.p[k]);
        }
        return std::sqrt(sq) + std::sqrt(sp);
      };
      SimulateRow row;
      row.epsilon = eps;
      row.realization = c.r;
      row.t = t;
      row.err_leading = distance(evaluate(lead, family, nullptr, nullptr, {-M, M}, t));
      row.err_extended = distance(evaluate(ext, family, noise, gammas ? &*gammas : nullptr, {-M, M}, t));
      c.rows.push_back(row);
    });
  });
  SimulateReport rep;
  rep.failures = collect_failures(errors);
  std::vector<std::pair<double, double>> lead_pts, ext_pts;
  for (const auto& c : cells) {
    if (c.rows.empty()) continue;
    rep.rows.insert(rep.rows.end(), c.rows.begin(), c.rows.end());
    SimulateReport::Sup s{c.eps, c.r, 0.0, 0.0};
    for (const auto& row : c.rows) {
      s.leading = std::max(s.leading, row.err_leading);
      s.extended = std::max(s.extended, row.err_extended);
    }
    rep.sups.push_back(s);
    if (s.leading > 0.0) lead_pts.emplace_back(c.eps, s.leading);
    if (s.extended > 0.0) ext_pts.emplace_back(c.eps, s.extended);
  }
  auto distinct = [](const std::vector<std::pair<double, double>>& p) {
    return std::any_of(p.begin(), p.end(), [&](const auto& q) { return q.first != p.front().first; });
  };
  if (lead_pts.size() >= 2 && distinct(lead_pts)) rep.fit_leading = fit_slope(lead_pts);
  if (ext_pts.size() >= 2 && distinct(ext_pts)) rep.fit_extended = fit_slope(ext_pts);
  return rep;
}

// ---------------------------------------------------------------------------
// CSV output

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// One output file; `tag` is inserted before the extension of the base path
/// ("" for the base path itself).
struct OutputFile {
  std::string tag;
  Table table;
  // Columns (1-based) a plot script should draw, x then y.
  int plot_x = 1;
  int plot_y = 2;
  bool plot_loglog = false;
};

struct RunOutput {
  std::vector<OutputFile> files;
  std::vector<std::string> failures;
  std::vector<std::string> notes;  // printed to stderr
};

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

inline std::string tagged_path(const std::string& base, const std::string& tag) {
  if (tag.empty()) return base;
  const std::filesystem::path p(base);
  std::filesystem::path out = p;
  out.replace_filename(p.stem().string() + "." + tag + (p.has_extension() ? p.extension().string() : std::string(".csv")));
  return out.string();
}

inline RunOutput to_output(const ExperimentSpec& spec, const AmplitudeResult& r) {
  RunOutput out;
  out.failures = r.failures;
  const auto models = amplitude_models(spec.mass);
  for (MassModel m : models) {
    OutputFile f;
    f.tag = models.size() == 1 ? "" : to_string(m);
    f.table.columns = {"T", "scaled_amplitude", "epsilon", "mass_model", "seed", "realization", "scaled_amplitude_max"};
    for (const auto& s : r.series) {
      if (s.model != m) continue;
      for (std::size_t i = 0; i < s.T.size(); ++i) {
        f.table.rows.push_back({fmt(s.T[i]), fmt(s.scaled_sum[i]), fmt(s.epsilon), to_string(m), fmt(spec.seed),
                                fmt(s.realization), fmt(s.scaled_max[i])});
      }
    }
    out.files.push_back(std::move(f));
  }
  return out;
}

inline RunOutput to_output(const ExperimentSpec& spec, const ErrorReport& r) {
  RunOutput out;
  out.failures = r.failures;
  OutputFile main;
  main.table.columns = {"epsilon", "E_eps", "runtime_s", "seed", "realization", "E_q", "E_p"};
  main.plot_loglog = true;
  for (const auto& row : r.rows) {
    if (!row.completed) continue;
    main.table.rows.push_back({fmt(row.epsilon), fmt(row.E_eps), fmt(row.runtime_s), fmt(row.seed), fmt(row.realization),
                               fmt(row.E_q), fmt(row.E_p)});
  }
  OutputFile fit;
  fit.tag = "fit";
  fit.table.columns = {"realization", "slope", "intercept", "residual", "seed"};
  for (const auto& f : r.fits) {
    fit.table.rows.push_back({fmt(f.realization), fmt(f.fit.slope), fmt(f.fit.intercept), fmt(f.fit.residual), fmt(spec.seed)});
    out.notes.push_back("realization " + std::to_string(f.realization) + ": slope " + fmt(f.fit.slope));
  }
  out.files.push_back(std::move(main));
  out.files.push_back(std::move(fit));
  return out;
}

inline RunOutput to_output(const ExperimentSpec& spec, const BoundReport& r, const std::string& extra_name) {
  RunOutput out;
  OutputFile main;
  main.table.columns = {"param", "realization", "max_normalized", "seed", extra_name};
  main.plot_loglog = true;
  main.plot_x = 1;
  main.plot_y = 3;
  for (const auto& row : r.rows) {
    main.table.rows.push_back({fmt(row.param), fmt(row.realization), fmt(row.max_normalized), fmt(spec.seed), fmt(row.extra)});
  }
  OutputFile fit;
  fit.tag = "fit";
  fit.table.columns = {"param", "median_max_normalized", "median_" + extra_name, "slope", "intercept", "residual"};
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    fit.table.rows.push_back({fmt(r.params[i]), fmt(r.medians[i]), fmt(r.extra_medians[i]),
                              r.fit ? fmt(r.fit->slope) : "nan", r.fit ? fmt(r.fit->intercept) : "nan",
                              r.fit ? fmt(r.fit->residual) : "nan"});
  }
  if (r.fit) out.notes.push_back("slope of ln(median) " + fmt(r.fit->slope));
  out.files.push_back(std::move(main));
  out.files.push_back(std::move(fit));
  return out;
}

inline RunOutput to_output(const ExperimentSpec& spec, const ResidualReport& r) {
  RunOutput out;
  out.failures = r.failures;
  OutputFile main;
  main.table.columns = {"epsilon", "a1n", "a2n", "a3n", "b1n", "seed", "realization",
                        "alpha1", "alpha2", "alpha3", "beta1", "a3_without_log"};
  main.plot_loglog = true;
  main.plot_x = 1;
  main.plot_y = 4;
  for (const auto& row : r.rows) {
    main.table.rows.push_back({fmt(row.epsilon), fmt(row.a1n), fmt(row.a2n), fmt(row.a3n), fmt(row.b1n), fmt(spec.seed),
                               fmt(row.realization), fmt(row.ab.alpha1), fmt(row.ab.alpha2), fmt(row.ab.alpha3),
                               fmt(row.ab.beta1), fmt(row.a3_plain)});
  }
  OutputFile flags;
  flags.tag = "fit";
  flags.table.columns = {"column", "spread", "flagged", "ratio"};
  for (std::size_t c = 0; c < 4; ++c) {
    flags.table.rows.push_back({residual_columns()[c], fmt(r.spreads[c]), r.flags[c] ? "1" : "0", fmt(spec.spread_ratio)});
    if (r.flags[c]) out.notes.push_back(std::string("column ") + residual_columns()[c] + " spread " + fmt(r.spreads[c]));
  }
  out.files.push_back(std::move(main));
  out.files.push_back(std::move(flags));
  return out;
}

inline RunOutput to_output(const ExperimentSpec& spec, const ScalingReport& r) {
  RunOutput out;
  OutputFile main;
  main.table.columns = {"profile", "epsilon", "scaled_l2", "scaled_e0_l2", "seed", "realization"};
  OutputFile fit;
  fit.tag = "fit";
  fit.table.columns = {"profile", "realization", "spread", "e0_spread"};
  for (const auto& e : r.entries) {
    for (const auto& row : e.result.rows) {
      main.table.rows.push_back({e.profile, fmt(row.epsilon), fmt(row.scaled_l2), fmt(row.scaled_e0_l2), fmt(spec.seed),
                                 fmt(e.realization)});
    }
    fit.table.rows.push_back({e.profile, fmt(e.realization), fmt(e.result.spread), fmt(e.result.e0_spread)});
  }
  main.plot_x = 2;
  main.plot_y = 3;
  out.files.push_back(std::move(main));
  out.files.push_back(std::move(fit));
  return out;
}

inline RunOutput to_output(const ExperimentSpec& spec, const SimulateReport& r) {
  RunOutput out;
  out.failures = r.failures;
  OutputFile main;
  main.table.columns = {"epsilon", "t", "T", "err_leading", "err_extended", "seed", "realization"};
  for (const auto& row : r.rows) {
    const double e3 = row.epsilon * row.epsilon * row.epsilon;
    main.table.rows.push_back({fmt(row.epsilon), fmt(row.t), fmt(row.t * e3), fmt(row.err_leading), fmt(row.err_extended),
                               fmt(spec.seed), fmt(row.realization)});
  }
  main.plot_x = 3;
  main.plot_y = 4;
  OutputFile fit;
  fit.tag = "fit";
  fit.table.columns = {"epsilon", "realization", "sup_err_leading", "sup_err_extended", "slope_leading", "slope_extended"};
  for (const auto& s : r.sups) {
    fit.table.rows.push_back({fmt(s.epsilon), fmt(s.realization), fmt(s.leading), fmt(s.extended),
                              r.fit_leading ? fmt(r.fit_leading->slope) : "nan",
                              r.fit_extended ? fmt(r.fit_extended->slope) : "nan"});
  }
  out.files.push_back(std::move(main));
  out.files.push_back(std::move(fit));
  return out;
}

inline void write_table(const std::string& path, const Table& t, const std::string& comment) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "# " << comment << '\n';
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << '\n';
  }
  if (!os) throw std::runtime_error("failed writing " + path);
}

inline void write_plot_script(const std::string& csv_path, const OutputFile& f) {
  std::ofstream os(csv_path + ".gp", std::ios::trunc);
  os << "set datafile separator ','\n";
  os << "set key autotitle columnhead\n";
  if (f.plot_loglog) os << "set logscale xy\n";
  os << "set xlabel '" << f.table.columns.at(static_cast<std::size_t>(f.plot_x - 1)) << "'\n";
  os << "set ylabel '" << f.table.columns.at(static_cast<std::size_t>(f.plot_y - 1)) << "'\n";
  os << "plot '" << std::filesystem::path(csv_path).filename().string() << "' every ::1 using " << f.plot_x << ':'
     << f.plot_y << " with points\n";
}

/// Write every table of `out` next to spec.out.
inline std::vector<std::string> write_output(const ExperimentSpec& spec, const RunOutput& out) {
  const std::string comment = "fput_kdv " + spec.invocation + " | version " + spec.version;
  std::vector<std::string> paths;
  for (const auto& f : out.files) {
    const std::string path = tagged_path(spec.out, f.tag);
    write_table(path, f.table, comment);
    if (spec.plot && f.tag != "fit") write_plot_script(path, f);
    paths.push_back(path);
  }
  return paths;
}

/// Run the experiment named by spec.kind and return its tables.
inline RunOutput run_experiment(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::amplitude: return to_output(spec, run_amplitude(spec));
    case ExperimentKind::error_sweep: return to_output(spec, run_error_sweep(spec));
    case ExperimentKind::gamma_bound: return to_output(spec, run_gamma_bound(spec), "max_normalized_sum");
    case ExperimentKind::ar_bound: return to_output(spec, run_ar_bound(spec), "scaled_by_contraction");
    case ExperimentKind::scaling_check: return to_output(spec, run_scaling_check(spec));
    case ExperimentKind::residual_check: return to_output(spec, run_residual_check(spec));
    case ExperimentKind::simulate: return to_output(spec, run_simulate(spec));
  }
  throw std::invalid_argument("unknown experiment");
}

}  // namespace fputkdv
