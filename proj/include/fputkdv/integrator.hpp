#pragma once

// Fixed-step classical RK4 for the truncated lattice.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fputkdv/errors.hpp"
#include "fputkdv/lattice.hpp"

namespace fputkdv {

/// Scratch buffers for one RK4 step on a vector of length n.
struct Rk4Workspace {
  std::vector<double> k1, k2, k3, k4, tmp;
  void resize(std::size_t n) {
    for (auto* v : {&k1, &k2, &k3, &k4, &tmp}) v->resize(n);
  }
};

/// One classical RK4 step y ← y + dt/6 (k1 + 2k2 + 2k3 + k4) for the
/// autonomous or time-dependent field rhs(t, y, dy). The combination order is
/// fixed so results are bitwise reproducible.
template <class Rhs>
void rk4_kernel(Rhs&& rhs, std::span<double> y, double t, double dt, Rk4Workspace& ws) {
  const std::size_t n = y.size();
  ws.resize(n);
  const double half = 0.5 * dt;
  rhs(t, std::span<const double>(y), std::span<double>(ws.k1));
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + half * ws.k1[i];
  rhs(t + half, std::span<const double>(ws.tmp), std::span<double>(ws.k2));
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + half * ws.k2[i];
  rhs(t + half, std::span<const double>(ws.tmp), std::span<double>(ws.k3));
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + dt * ws.k3[i];
  rhs(t + dt, std::span<const double>(ws.tmp), std::span<double>(ws.k4));
  const double sixth = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) y[i] += sixth * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
}

/// Lattice vector field on the flat [q | p] layout. `sign = -1` gives the
/// time-reversed field.
struct LatticeField {
  std::span<const double> mass;
  SpringLaw law = SpringLaw::fput;
  double sign = 1.0;

  void operator()(double /*t*/, std::span<const double> y, std::span<double> dy) const {
    const std::size_t n = mass.size();
    fput_rhs(y.first(n), y.subspan(n, n), mass, dy.first(n), dy.subspan(n, n), law);
    if (sign != 1.0) {
      for (double& v : dy) v *= sign;
    }
  }
};

struct StepOptions {
  SpringLaw law = SpringLaw::fput;
  bool reverse_time = false;
};

inline LatticeState rk4_step(const LatticeState& state, const MassProfile& mass, double dt, StepOptions opts = {}) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
  if (mass.half_width() != state.half_width()) throw std::invalid_argument("rk4_step: state and mass disagree on M");
  LatticeState next = state;
  Rk4Workspace ws;
  rk4_kernel(LatticeField{mass.values(), opts.law, opts.reverse_time ? -1.0 : 1.0}, next.flat(), state.t(), dt, ws);
  next.set_t(state.t() + (opts.reverse_time ? -dt : dt));
  if (!next.all_finite()) throw NonFiniteError("rk4_step: non-finite state", next.t());
  return next;
}

/// Stability-motivated default: min(0.1, ½·√(min m)).
inline double default_dt(const MassProfile& mass) { return std::min(0.1, 0.5 * std::sqrt(mass.min())); }

/// Default half-width so the wave never approaches the window edges over
/// |t| ≤ T0/ε³: M = ceil(8 (T0/ε³ + 1/ε)).
inline Index default_half_width(double epsilon, double T0) {
  return static_cast<Index>(std::ceil(8.0 * (T0 / (epsilon * epsilon * epsilon) + 1.0 / epsilon)));
}

/// Fixed-step schedule. The requested dt is shrunk (never grown) so that
/// t_end is an exact multiple; sample times are snapped to the nearest step.
class IntegrationPlan {
 public:
  IntegrationPlan(double dt, double t_end, std::vector<double> sample_times = {})
      : t_end_(t_end), requested_(std::move(sample_times)) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("IntegrationPlan: dt must be > 0");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("IntegrationPlan: t_end must be >= 0");
    steps_ = t_end == 0.0 ? 0 : static_cast<Index>(std::ceil(t_end / dt - 1e-9));
    dt_ = steps_ == 0 ? dt : t_end / static_cast<double>(steps_);
    for (std::size_t i = 0; i < requested_.size(); ++i) {
      const double s = requested_[i];
      if (s < -1e-12 || s > t_end * (1.0 + 1e-12) + 1e-12) throw std::invalid_argument("IntegrationPlan: sample time outside [0, t_end]");
      if (i > 0 && s < requested_[i - 1]) throw std::invalid_argument("IntegrationPlan: sample times must ascend");
      const Index k = std::clamp<Index>(static_cast<Index>(std::llround(s / dt_)), 0, steps_);
      if (sample_steps_.empty() || sample_steps_.back() != k) sample_steps_.push_back(k);
    }
  }

  /// Uniform samples 0, t_end/(count-1), ..., t_end.
  static IntegrationPlan uniform(double dt, double t_end, int count) {
    std::vector<double> s;
    if (count == 1) s.push_back(0.0);
    for (int i = 0; i < count && count > 1; ++i) s.push_back(t_end * i / (count - 1));
    return IntegrationPlan(dt, t_end, std::move(s));
  }

  double dt() const noexcept { return dt_; }
  double t_end() const noexcept { return t_end_; }
  Index steps() const noexcept { return steps_; }
  /// Step indices at which the observer fires (deduplicated, ascending).
  const std::vector<Index>& sample_steps() const noexcept { return sample_steps_; }
  /// Snapped sample times as reported to the observer.
  std::vector<double> snapped_times() const {
    std::vector<double> out;
    for (Index k : sample_steps_) out.push_back(static_cast<double>(k) * dt_);
    return out;
  }

 private:
  double dt_ = 0.0;
  double t_end_ = 0.0;
  Index steps_ = 0;
  std::vector<double> requested_;
  std::vector<Index> sample_steps_;
};

using Observer = std::function<void(double t, const LatticeState& state)>;

/// Advance from state.t() by plan.steps() fixed steps, calling `observer` at
/// every snapped sample time (relative to the start). With t_end = 0 and a
/// sample at 0 the observer fires once and the state is returned unchanged.
inline LatticeState integrate(LatticeState state, const MassProfile& mass, const IntegrationPlan& plan,
                              const Observer& observer = {}, StepOptions opts = {}) {
  if (mass.half_width() != state.half_width()) throw std::invalid_argument("integrate: state and mass disagree on M");
  if (!state.all_finite()) throw NonFiniteError("integrate: non-finite initial state", state.t());
  const double t0 = state.t();
  const double dir = opts.reverse_time ? -1.0 : 1.0;
  const LatticeField field{mass.values(), opts.law, dir};
  Rk4Workspace ws;
  ws.resize(state.flat().size());

  const auto& samples = plan.sample_steps();
  std::size_t next_sample = 0;
  auto fire = [&](Index k) {
    while (next_sample < samples.size() && samples[next_sample] == k) {
      if (observer) observer(state.t(), state);
      ++next_sample;
    }
  };

  fire(0);
  for (Index k = 1; k <= plan.steps(); ++k) {
    rk4_kernel(field, std::span<double>(state.flat()), state.t(), plan.dt(), ws);
    state.set_t(t0 + dir * static_cast<double>(k) * plan.dt());
    bool finite = true;
    for (double v : state.flat()) finite &= std::isfinite(v);
    if (!finite) throw NonFiniteError("integrate: lattice state blew up", state.t());
    fire(k);
  }
  return state;
}

}  // namespace fputkdv
