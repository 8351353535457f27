#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fputkdv/integrator.hpp"

using namespace fputkdv;

namespace {

LatticeState smooth_state(Index M, double amp, double width) {
  LatticeState s(M);
  for (Index j = -M; j <= M; ++j) {
    const double x = static_cast<double>(j) / width;
    s.q()[static_cast<std::size_t>(j + M)] = amp * std::exp(-x * x);
    s.p()[static_cast<std::size_t>(j + M)] = -0.5 * amp * std::exp(-x * x) * x;
  }
  return s;
}

double max_diff(const LatticeState& a, const LatticeState& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.flat().size(); ++i) d = std::max(d, std::abs(a.flat()[i] - b.flat()[i]));
  return d;
}

LatticeState run(const LatticeState& s0, const MassProfile& m, double dt, double t_end, StepOptions opts = {}) {
  return integrate(s0, m, IntegrationPlan(dt, t_end), {}, opts);
}

}  // namespace

TEST(Rk4Kernel, ScalarExponentialStep) {
  std::vector<double> y{1.0};
  Rk4Workspace ws;
  rk4_kernel([](double, std::span<const double> x, std::span<double> dx) { dx[0] = x[0]; }, std::span<double>(y), 0.0,
             0.1, ws);
  const double taylor = 1 + 0.1 + 0.005 + 1.0 / 6000 + 1.0 / 240000;
  EXPECT_NEAR(y[0], taylor, 1e-15);
  EXPECT_NEAR(y[0], 1.1051708333333333, 1e-15);
}

TEST(Rk4Kernel, TimeDependentFieldIsFourthOrder) {
  // y' = cos t, exact y = sin t.
  auto err = [](int n) {
    std::vector<double> y{0.0};
    Rk4Workspace ws;
    const double dt = 1.0 / n;
    for (int k = 0; k < n; ++k) {
      rk4_kernel([](double t, std::span<const double>, std::span<double> dx) { dx[0] = std::cos(t); },
                 std::span<double>(y), k * dt, dt, ws);
    }
    return std::abs(y[0] - std::sin(1.0));
  };
  const double r = err(10) / err(20);
  EXPECT_GT(r, 12.0);
  EXPECT_LT(r, 20.0);
}

TEST(Rk4Step, ZeroStateStaysZero) {
  const auto m = make_mass(MassModel::periodic, {}, nullptr, 8);
  const auto s = rk4_step(LatticeState(8), m, 0.1);
  for (double v : s.flat()) EXPECT_EQ(v, 0.0);
  EXPECT_DOUBLE_EQ(s.t(), 0.1);
}

TEST(Rk4Step, ConstantStrainUnchanged) {
  const Index M = 6;
  const std::vector<double> q(2 * M + 1, -0.2), p(2 * M + 1, 0.0);
  const auto m = make_mass(MassModel::periodic, {}, nullptr, M);
  const auto s = rk4_step(LatticeState(M, q, p), m, 0.05);
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_EQ(s.q()[i], -0.2);
    EXPECT_EQ(s.p()[i], 0.0);
  }
}

TEST(Rk4Step, RejectsBadStepAndBlowUp) {
  const auto m = make_mass(MassModel::constant, {}, nullptr, 3);
  EXPECT_THROW(rk4_step(LatticeState(3), m, 0.0), std::invalid_argument);
  LatticeState s(3);
  s.q()[2] = 1e200;
  EXPECT_THROW(rk4_step(s, m, 0.1), NonFiniteError);
}

TEST(Integrate, ZeroHorizonFiresObserverOnce) {
  const auto m = make_mass(MassModel::constant, {}, nullptr, 10);
  const auto s0 = smooth_state(10, 0.1, 3);
  int calls = 0;
  const auto s = integrate(s0, m, IntegrationPlan(0.1, 0.0, {0.0}), [&](double t, const LatticeState&) {
    ++calls;
    EXPECT_EQ(t, 0.0);
  });
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(max_diff(s, s0), 0.0);
}

TEST(Integrate, ObserverFiresAtSnappedSamples) {
  const auto m = make_mass(MassModel::constant, {}, nullptr, 10);
  const IntegrationPlan plan(0.1, 1.0, {0.0, 0.33, 0.5, 1.0});
  std::vector<double> seen;
  integrate(smooth_state(10, 0.1, 3), m, plan, [&](double t, const LatticeState&) { seen.push_back(t); });
  const auto expected = plan.snapped_times();
  ASSERT_EQ(seen.size(), expected.size());
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_NEAR(seen[i], expected[i], 1e-12);
  EXPECT_NEAR(expected[1], 0.3, 1e-12);
}

TEST(IntegrationPlanTest, ShrinksStepToHitEnd) {
  const IntegrationPlan plan(0.3, 1.0);
  EXPECT_EQ(plan.steps(), 4);
  EXPECT_DOUBLE_EQ(plan.dt(), 0.25);
  EXPECT_THROW(IntegrationPlan(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(IntegrationPlan(0.1, -1.0), std::invalid_argument);
  EXPECT_THROW(IntegrationPlan(0.1, 1.0, {2.0}), std::invalid_argument);
  EXPECT_THROW(IntegrationPlan(0.1, 1.0, {0.5, 0.2}), std::invalid_argument);
}

TEST(IntegrationPlanTest, UniformSamplesCoverEnds) {
  const auto plan = IntegrationPlan::uniform(0.1, 2.0, 5);
  const auto t = plan.snapped_times();
  ASSERT_EQ(t.size(), 5u);
  EXPECT_EQ(t.front(), 0.0);
  EXPECT_NEAR(t.back(), 2.0, 1e-12);
}

TEST(Integrate, RepeatedRunsAreBitIdentical) {
  const Index M = 40;
  const auto z = sample_noise(Distribution::uniform, 0.125, 3, noise_window(M));
  const auto m = make_mass(MassModel::transparent, {}, &z, M);
  const auto s0 = smooth_state(M, 0.2, 6);
  const auto a = run(s0, m, 0.05, 5.0), b = run(s0, m, 0.05, 5.0);
  for (std::size_t i = 0; i < a.flat().size(); ++i) EXPECT_EQ(a.flat()[i], b.flat()[i]);
}

TEST(Integrate, LinearLatticeRichardsonRatio) {
  const Index M = 20;
  const auto m = make_mass(MassModel::constant, {}, nullptr, M);
  const auto s0 = smooth_state(M, 0.5, 3);
  const StepOptions lin{SpringLaw::linear, false};
  const double T = 10.0;
  const auto ref = run(s0, m, 0.2 / 64, T, lin);
  const double e1 = max_diff(run(s0, m, 0.2, T, lin), ref);
  const double e2 = max_diff(run(s0, m, 0.1, T, lin), ref);
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(Integrate, NonlinearVariableMassFourthOrder) {
  const Index M = 30;
  const auto z = sample_noise(Distribution::uniform, 0.125, 12, noise_window(M));
  const auto m = make_mass(MassModel::transparent, {}, &z, M);
  const auto s0 = smooth_state(M, 0.3, 4);
  const double T = 8.0;
  const auto ref = run(s0, m, 0.1 / 64, T);
  const double e1 = max_diff(run(s0, m, 0.2, T), ref);
  const double e2 = max_diff(run(s0, m, 0.1, T), ref);
  EXPECT_GT(e1 / e2, 12.0);
  EXPECT_LT(e1 / e2, 20.0);
}

TEST(Integrate, TimeReversalRecoversInitialState) {
  const Index M = 30;
  const auto z = sample_noise(Distribution::uniform, 0.125, 2, noise_window(M));
  const auto m = make_mass(MassModel::transparent, {}, &z, M);
  const auto s0 = smooth_state(M, 0.2, 4);
  double prev = 0;
  for (double dt : {0.1, 0.05}) {
    const auto fwd = run(s0, m, dt, 4.0);
    auto back = run(fwd, m, dt, 4.0, {SpringLaw::fput, true});
    EXPECT_NEAR(back.t(), 0.0, 1e-12);
    const double err = max_diff(back, s0);
    EXPECT_LT(err, 1e-4);
    if (prev > 0) {
      EXPECT_GT(prev / err, 10.0);
    }
    prev = err;
  }
}

TEST(Integrate, EnergyDriftOnAmplitudeConfiguration) {
  const double eps = 0.25, T0 = 3.0;
  const Index M = default_half_width(eps, T0);
  const auto m = make_mass(MassModel::constant, {}, nullptr, M);
  LatticeState s(M);
  for (Index j = -M; j <= M; ++j) {
    const double c = std::cosh(std::sqrt(6.0) * eps * static_cast<double>(j));
    s.q()[static_cast<std::size_t>(j + M)] = 3 * eps * eps / (c * c);
    s.p()[static_cast<std::size_t>(j + M)] = -3 * eps * eps / (c * c);
  }
  const double dt = default_dt(m), t_end = T0 / (eps * eps * eps);
  EXPECT_EQ(dt, 0.1);
  const double e0 = lattice_hamiltonian(s, m);
  double drift = 0;
  integrate(s, m, IntegrationPlan::uniform(dt, t_end, 50),
            [&](double, const LatticeState& st) { drift = std::max(drift, std::abs(lattice_hamiltonian(st, m) - e0)); });
  EXPECT_LT(drift, 10 * std::pow(dt, 4) * t_end * e0);
}

TEST(Defaults, StepAndHalfWidth) {
  const auto m = make_mass(MassModel::periodic, {}, nullptr, 4);
  EXPECT_DOUBLE_EQ(default_dt(m), std::min(0.1, 0.5 * std::sqrt(0.75)));
  MassParams p;
  p.periodic_amplitude = 0.99;
  EXPECT_DOUBLE_EQ(default_dt(make_mass(MassModel::periodic, p, nullptr, 4)), 0.05);
  EXPECT_EQ(default_half_width(0.5, 3.0), 8 * (24 + 2));
  EXPECT_EQ(default_half_width(0.125, 3.0), 8 * (1536 + 8));
}
