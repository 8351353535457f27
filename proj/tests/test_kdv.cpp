#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "fputkdv/kdv.hpp"
#include "fputkdv/rng.hpp"

using namespace fputkdv;

namespace {

constexpr double kSigma2 = 1.0 / 192.0;

double sech2(double z) {
  const double c = std::cosh(z);
  return 1.0 / (c * c);
}

// Periodic grid of length L with n nodes; w = 1 falls on a node when L/n divides 1.
GridProfile soliton_grid(double k, double L, std::size_t n, double shift = 0.0) {
  return sample_periodic([&](double x) { return 3.0 * sech2(k * (x - shift)); }, L, n);
}

double grid_l2(const GridSlice& s, const std::function<double(double)>& exact) {
  double ss = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s.x0() + s.h() * static_cast<double>(i);
    const double e = s.values()[i] - exact(x);
    ss += e * e;
  }
  return std::sqrt(ss * s.h());
}

// Truncated Taylor arithmetic in one variable, used as an independent
// differentiation oracle for the corrector values.
struct Taylor {
  static constexpr int N = 4;
  std::array<double, N> c{};

  static Taylor variable(double x0) {
    Taylor t;
    t.c[0] = x0;
    t.c[1] = 1.0;
    return t;
  }
  static Taylor constant(double v) {
    Taylor t;
    t.c[0] = v;
    return t;
  }
  friend Taylor operator+(Taylor a, const Taylor& b) {
    for (int i = 0; i < N; ++i) a.c[i] += b.c[i];
    return a;
  }
  friend Taylor operator*(double s, Taylor a) {
    for (double& v : a.c) v *= s;
    return a;
  }
  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (int i = 0; i < N; ++i)
      for (int j = 0; i + j < N; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
  }
  Taylor reciprocal() const {
    Taylor r;
    r.c[0] = 1.0 / c[0];
    for (int n = 1; n < N; ++n) {
      double s = 0;
      for (int k = 1; k <= n; ++k) s += c[k] * r.c[n - k];
      r.c[n] = -s / c[0];
    }
    return r;
  }
  Taylor exp() const {
    Taylor r;
    r.c[0] = std::exp(c[0]);
    for (int n = 1; n < N; ++n) {
      double s = 0;
      for (int k = 1; k <= n; ++k) s += k * c[k] * r.c[n - k];
      r.c[n] = s / n;
    }
    return r;
  }
  double derivative(int order) const {
    double f = 1;
    for (int i = 2; i <= order; ++i) f *= i;
    return c[order] * f;
  }
};

Taylor taylor_soliton(double k, double x0) {
  const Taylor kx = k * Taylor::variable(x0);
  const Taylor cosh = 0.5 * (kx.exp() + ((-1.0) * kx).exp());
  return 3.0 * (cosh * cosh).reciprocal();
}

}  // namespace

TEST(KdvBasics, DispersionAndTimeDerivativeSigns) {
  EXPECT_DOUBLE_EQ(kdv_dispersion(0.0), 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(kdv_dispersion(kSigma2), 3.0 / 32.0);
  const Jet j{2.0, 0.5, 0.0, 4.0, 0.0};
  const double flux = 0.5 * (kdv_dispersion(kSigma2) * 4.0 + 2.0 * 2.0 * 0.5);
  EXPECT_DOUBLE_EQ(kdv_time_derivative(j, kSigma2, Direction::right), -flux);
  EXPECT_DOUBLE_EQ(kdv_time_derivative(j, kSigma2, Direction::left), flux);
}

TEST(Split, PureRightMover) {
  auto phi = [](double x) { return Jet{std::exp(-x * x), -2 * x * std::exp(-x * x), 0, 0, 0}; };
  auto neg = [&](double x) {
    Jet j = phi(x);
    return Jet{-j.v, -j.d1, -j.d2, -j.d3, -j.anti};
  };
  const auto s = split_initial_data(phi, neg);
  for (double x : {-1.0, 0.0, 0.3, 2.0}) {
    EXPECT_DOUBLE_EQ(s.a0(x).v, phi(x).v);
    EXPECT_DOUBLE_EQ(s.a0(x).d1, phi(x).d1);
    EXPECT_EQ(s.b0(x).v, 0.0);
  }
  const auto t = split_initial_data(phi, phi);
  for (double x : {-1.0, 0.5}) {
    EXPECT_EQ(t.a0(x).v, 0.0);
    EXPECT_DOUBLE_EQ(t.b0(x).v, phi(x).v);
  }
}

TEST(Split, GridHalvesSumAndDifference) {
  const auto phi = sample_periodic([](double x) { return std::exp(-x * x); }, 20, 64);
  const auto psi = sample_periodic([](double x) { return 0.3 * x * std::exp(-x * x); }, 20, 64);
  const auto s = split_initial_data(phi, psi);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    EXPECT_DOUBLE_EQ(s.a0.values[i], 0.5 * (phi.values[i] - psi.values[i]));
    EXPECT_DOUBLE_EQ(s.b0.values[i], 0.5 * (phi.values[i] + psi.values[i]));
  }
  const auto zero = sample_periodic([](double) { return 0.0; }, 20, 64);
  const auto z = split_initial_data(zero, zero);
  for (double v : z.a0.values) EXPECT_EQ(v, 0.0);
  for (double v : z.b0.values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(split_initial_data(phi, sample_periodic([](double) { return 0.0; }, 20, 32)), std::invalid_argument);
}

TEST(Soliton, PeakWidthAndDecay) {
  const auto w = SolitonWave::make(kSigma2);
  EXPECT_NEAR(w.k, std::sqrt(16.0 / 3.0), 1e-15);
  EXPECT_NEAR(w.k, 2.309401, 1e-6);
  for (double T : {0.0, 0.7, 2.5}) EXPECT_DOUBLE_EQ(w.eval(T, T).v, 3.0);
  EXPECT_LT(w.eval(40.0, 0.0).v, 1e-30);
  EXPECT_LT(w.eval(-40.0, 0.0).v, 1e-30);
  EXPECT_EQ(soliton(kSigma2).representation(), Representation::closed_form_soliton);
  EXPECT_TRUE(soliton(kSigma2).b().is_zero());
}

TEST(Soliton, LeftMoverIsMirrored) {
  const auto r = SolitonWave::make(kSigma2, Direction::right);
  const auto l = SolitonWave::make(kSigma2, Direction::left);
  for (double x : {-1.3, 0.0, 0.4}) {
    const Jet a = r.eval(x, 0.8), b = l.eval(x - 1.6, 0.8);
    EXPECT_NEAR(a.v, b.v, 1e-14);
    EXPECT_NEAR(a.d1, b.d1, 1e-13);
  }
  EXPECT_DOUBLE_EQ(l.eval(-1.2, 1.2).v, 3.0);
}

TEST(Soliton, AnalyticDerivativesMatchFiniteDifferences) {
  const auto w = SolitonWave::make(kSigma2);
  const double h = 5e-3;
  const std::array<double, 3> c1{3.0 / 4, -3.0 / 20, 1.0 / 60};
  const std::array<double, 4> c3{-61.0 / 30, 169.0 / 120, -3.0 / 10, 7.0 / 240};
  for (double x = -4.0; x <= 4.0; x += 0.137) {
    auto v = [&](double y) { return w.eval(y, 0.3).v; };
    double d1 = 0, d3 = 0;
    for (int i = 1; i <= 3; ++i) d1 += c1[i - 1] * (v(x + i * h) - v(x - i * h));
    for (int i = 1; i <= 4; ++i) d3 += c3[i - 1] * (v(x + i * h) - v(x - i * h));
    d1 /= h;
    d3 /= h * h * h;
    const double d2 = (-v(x + 2 * h) + 16 * v(x + h) - 30 * v(x) + 16 * v(x - h) - v(x - 2 * h)) / (12 * h * h);
    const Jet j = w.eval(x, 0.3);
    EXPECT_NEAR(j.d1, d1, 1e-8);
    EXPECT_NEAR(j.d2, d2, 1e-6);
    EXPECT_NEAR(j.d3, d3, 1e-5);
  }
}

TEST(Soliton, FiniteDifferenceKdvResidual) {
  // 2A_T + c A_www + (A²)_w by sixth-order centred differences of the values.
  const auto w = SolitonWave::make(kSigma2);
  const double c = kdv_dispersion(kSigma2), h = 5e-3;
  const std::array<double, 3> c1{3.0 / 4, -3.0 / 20, 1.0 / 60};
  const std::array<double, 4> c3{-61.0 / 30, 169.0 / 120, -3.0 / 10, 7.0 / 240};
  double worst = 0;
  for (double T : {0.0, 1.0, 2.5}) {
    for (double x = T - 5; x <= T + 5; x += 0.05) {
      auto v = [&](double y, double s) { return w.eval(y, s).v; };
      double at = 0, ax = 0, a3 = 0;
      for (int i = 1; i <= 3; ++i) {
        at += c1[i - 1] * (v(x, T + i * h) - v(x, T - i * h));
        ax += c1[i - 1] * (v(x + i * h, T) * v(x + i * h, T) - v(x - i * h, T) * v(x - i * h, T));
      }
      for (int i = 1; i <= 4; ++i) a3 += c3[i - 1] * (v(x + i * h, T) - v(x - i * h, T));
      const double res = 2 * at / h + c * a3 / (h * h * h) + ax / h;
      worst = std::max(worst, std::abs(res));
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Soliton, AnalyticJetSolvesKdvExactly) {
  // Speed-one travelling wave: A_T = −A_w, which the equation must reproduce.
  for (auto dir : {Direction::right, Direction::left}) {
    const auto w = SolitonWave::make(kSigma2, dir);
    const double sign = dir == Direction::right ? -1.0 : 1.0;
    for (double x = -5; x <= 5; x += 0.1) {
      const Jet j = w.eval(x, 0.4);
      EXPECT_NEAR(kdv_time_derivative(j, kSigma2, dir), sign * j.d1, 1e-12);
    }
  }
}

TEST(Antiderivative, SolitonClosedFormMass) {
  const auto w = SolitonWave::make(kSigma2);
  EXPECT_EQ(w.eval(0.0, 0.0).anti, 0.0);
  EXPECT_NEAR(w.eval(60.0, 0.0).anti, 3.0 / w.k, 1e-14);
  EXPECT_NEAR(w.eval(60.0, 0.0).anti - w.eval(-60.0, 0.0).anti, 6.0 / w.k, 1e-14);
  // Based at 0 for every T.
  EXPECT_NEAR(w.eval(0.0, 1.7).anti, 0.0, 1e-15);
  // Derivative of the antiderivative is the profile.
  const double h = 1e-4;
  for (double x : {-1.0, 0.3, 2.0}) {
    EXPECT_NEAR((w.eval(x + h, 1.0).anti - w.eval(x - h, 1.0).anti) / (2 * h), w.eval(x, 1.0).v, 1e-7);
  }
}

TEST(Antiderivative, GridQuadratureMatchesSolitonMass) {
  const double k = std::sqrt(16.0 / 3.0);
  const auto g = soliton_grid(k, 40, 5120);
  const auto a = antiderivative(g);
  EXPECT_NEAR(a.values.back() - a.values.front(), 6.0 / k, 1e-9);
  for (std::size_t i = 0; i < g.size(); i += 37) {
    EXPECT_NEAR(a.values[i], (3.0 / k) * std::tanh(k * g.x(i)), 2e-8);
  }
}

TEST(Antiderivative, ZeroProfileAndErrors) {
  const auto z = antiderivative(sample_periodic([](double) { return 0.0; }, 10, 32));
  for (double v : z.values) EXPECT_EQ(v, 0.0);
  GridProfile off{1.0, 0.1, std::vector<double>(20, 1.0)};
  EXPECT_THROW(antiderivative(off), std::invalid_argument);
  GridProfile tiny{-0.1, 0.1, std::vector<double>(3, 1.0)};
  EXPECT_THROW(antiderivative(tiny), std::invalid_argument);
}

TEST(Antiderivative, FourthOrderConvergence) {
  auto f = [](double x) { return std::exp(-x * x) * (1 + 0.5 * std::sin(3 * x)); };
  auto err = [&](std::size_t n) {
    const auto a = antiderivative(sample_periodic(f, 12, n));
    // Exact ∫₀ˣ by fine Simpson.
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); i += n / 16) {
      const double x = a.x(i);
      const int m = 4000;
      double s = f(0) + f(x);
      for (int q = 1; q < m; ++q) s += (q % 2 ? 4 : 2) * f(x * q / m);
      worst = std::max(worst, std::abs(a.values[i] - s * x / (3 * m)));
    }
    return worst;
  };
  const double ratio = err(96) / err(192);
  EXPECT_GT(ratio, 12.0);
}

TEST(AntiderivativeProperty, WeightedCauchySchwarzBound) {
  const CounterRng rng(77, StreamPurpose::test);
  std::int64_t k = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int bumps = 1 + static_cast<int>(rng.uniform01(k++) * 4);
    std::vector<std::array<double, 3>> p;
    for (int b = 0; b < bumps; ++b) {
      p.push_back({rng.uniform(-2, 2, k), rng.uniform(-6, 6, k + 1), rng.uniform(0.3, 2.0, k + 2)});
      k += 3;
    }
    auto F = [&](double x) {
      double s = 0;
      for (const auto& [amp, c, wdt] : p) s += amp * std::exp(-((x - c) / wdt) * ((x - c) / wdt));
      return s;
    };
    const auto g = sample_periodic(F, 60, 2400);
    const auto a = antiderivative(g);
    double sup = 0, weighted = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      sup = std::max(sup, std::abs(a.values[i]));
      weighted += (1 + g.x(i) * g.x(i)) * g.values[i] * g.values[i] * g.h;
    }
    EXPECT_LE(sup, std::sqrt(std::numbers::pi * weighted)) << "trial " << trial;
  }
}

TEST(KdvEvolve, TracksClosedFormSoliton) {
  const double k = std::sqrt(16.0 / 3.0), L = 64;
  const std::size_t n = 2048;
  const auto fam = kdv_evolve(soliton_grid(k, L, n), kSigma2, 1.0);
  EXPECT_EQ(fam.representation(), Representation::grid_spectral);
  const auto sl = fam.a().grid_solver()->slice(1.0);
  const double err = grid_l2(*sl, [&](double x) { return 3.0 * sech2(k * (x - 1.0)); });
  EXPECT_LT(err, 1e-3);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < sl->size(); ++i) {
    if (sl->values()[i] > sl->values()[peak]) peak = i;
  }
  const double h = L / static_cast<double>(n);
  EXPECT_NEAR(sl->x0() + h * static_cast<double>(peak), 1.0, h);
  EXPECT_NEAR(sl->values()[peak], 3.0, 1e-3);
  EXPECT_NEAR(fam.at(1.0).a.eval(1.0).v, 3.0, 1e-3);
}

TEST(KdvEvolve, LeftMoverTracksMirroredSoliton) {
  const double k = std::sqrt(16.0 / 3.0);
  const auto b0 = soliton_grid(k, 64, 2048);
  auto zero = b0;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  const auto fam = kdv_evolve(zero, b0, kSigma2, 1.0);
  EXPECT_TRUE(fam.a().is_zero());
  const auto closed = SolitonWave::make(kSigma2, Direction::left);
  const auto sl = fam.b().grid_solver()->slice(1.0);
  EXPECT_LT(grid_l2(*sl, [&](double x) { return closed.eval(x, 1.0).v; }), 1e-3);
}

TEST(KdvEvolve, SliceDerivativesAndAntiderivativeMatchClosedForm) {
  const double k = std::sqrt(16.0 / 3.0);
  const auto fam = kdv_evolve(soliton_grid(k, 64, 2048), kSigma2, 0.5);
  const auto closed = SolitonWave::make(kSigma2);
  const auto s = fam.at(0.5).a;
  for (double x = -3.0; x <= 4.0; x += 0.173) {
    const Jet g = s.eval(x), c = closed.eval(x, 0.5);
    EXPECT_NEAR(g.v, c.v, 1e-5);
    EXPECT_NEAR(g.d1, c.d1, 1e-4);
    EXPECT_NEAR(g.d2, c.d2, 1e-3);
    EXPECT_NEAR(g.d3, c.d3, 1e-2);
    EXPECT_NEAR(g.anti, c.anti, 1e-5);
  }
  EXPECT_EQ(s.eval(0.0).anti, 0.0);
  // Outside the window: decayed, antiderivative frozen at the edge.
  EXPECT_EQ(s.eval(1000.0).v, 0.0);
  EXPECT_NEAR(s.eval(1000.0).anti, closed.eval(1000.0, 0.5).anti, 1e-5);
  EXPECT_NEAR(s.eval(-1000.0).anti, closed.eval(-1000.0, 0.5).anti, 1e-5);
}

TEST(KdvEvolve, TimeDerivativeFromEquationMatchesSnapshots) {
  const double k = std::sqrt(16.0 / 3.0);
  const auto fam = kdv_evolve(sample_periodic([](double x) { return 1.5 * std::exp(-x * x / 2); }, 64, 1024), kSigma2, 1.0);
  const double d = 1e-3;
  for (double x = -3; x <= 3; x += 0.25) {
    const double fd = (fam.at(0.5 + d).a.eval(x).v - fam.at(0.5 - d).a.eval(x).v) / (2 * d);
    const double eq = kdv_time_derivative(fam.at(0.5).a.eval(x), kSigma2, Direction::right);
    EXPECT_NEAR(fd, eq, 1e-5);
  }
  (void)k;
}

TEST(KdvEvolve, SpectralDerivativeAgreesWithCentredDifferences) {
  const auto fam = kdv_evolve(sample_periodic([](double x) { return std::exp(-x * x / 4); }, 64, 1024), kSigma2, 0.2);
  const auto sl = fam.a().grid_solver()->slice(0.2);
  double prev = 0;
  for (double h : {0.1, 0.05}) {
    double worst = 0;
    for (double x = -4; x <= 4; x += 0.25) {
      const double fd = (sl->eval(x + h).v - sl->eval(x - h).v) / (2 * h);
      worst = std::max(worst, std::abs(fd - sl->eval(x).d1));
    }
    if (prev > 0) {
      EXPECT_NEAR(prev / worst, 4.0, 0.5);
    }
    prev = worst;
  }
}

TEST(KdvEvolve, ConservesMassAndL2) {
  const auto a0 = sample_periodic([](double x) { return 2.0 * std::exp(-x * x); }, 64, 2048);
  const auto fam = kdv_evolve(a0, kSigma2, 3.0);
  const auto* g = fam.a().grid_solver();
  const auto s0 = g->slice(0.0);
  auto l2sq = [](const GridSlice& s) {
    double ss = 0;
    for (double v : s.values()) ss += v * v;
    return ss * s.h();
  };
  const double m0 = s0->mass(), e0 = l2sq(*s0);
  for (double T : {0.75, 1.5, 3.0}) {
    const auto s = g->slice(T);
    EXPECT_NEAR(s->mass(), m0, 1e-10 * std::abs(m0));
    EXPECT_NEAR(l2sq(*s), e0, 1e-8 * e0);
  }
}

TEST(KdvEvolve, ZeroDataGivesZeroFamily) {
  const auto z = sample_periodic([](double) { return 0.0; }, 32, 64);
  const auto fam = kdv_evolve(z, z, kSigma2, 1.0);
  EXPECT_TRUE(fam.is_zero());
  EXPECT_EQ(fam.representation(), Representation::zero);
  const auto c = correctors(fam, 0.3, -0.2, 0.5);
  EXPECT_EQ(c.A2, 0.0);
  EXPECT_EQ(c.B2, 0.0);
}

TEST(KdvEvolve, RejectsBadInput) {
  const double k = std::sqrt(16.0 / 3.0);
  EXPECT_THROW(kdv_evolve(soliton_grid(k, 8, 256), kSigma2, 1.0), std::invalid_argument);  // not decayed
  EXPECT_THROW(kdv_evolve(soliton_grid(k, 64, 2047), kSigma2, 1.0), std::invalid_argument);
  GridProfile shifted = soliton_grid(k, 64, 2048);
  shifted.x0 += 3.0;
  EXPECT_THROW(kdv_evolve(shifted, kSigma2, 1.0), std::invalid_argument);
  EXPECT_THROW(kdv_evolve(soliton_grid(k, 64, 2048), kSigma2, -1.0), std::invalid_argument);
}

TEST(KdvEvolve, UnderResolvedDataRaisesAliasing) {
  // A narrow bump on a coarse grid keeps energy in the top third of the spectrum.
  const auto a0 = sample_periodic([](double x) { return 3.0 * sech2(6.0 * x); }, 64, 128);
  EXPECT_THROW(kdv_evolve(a0, kSigma2, 0.5), AliasingDetected);
}

TEST(KdvEvolve, EvaluationOutsideHorizonThrows) {
  const double k = std::sqrt(16.0 / 3.0);
  const auto fam = kdv_evolve(soliton_grid(k, 64, 2048), kSigma2, 1.0, {9, 0});
  EXPECT_NO_THROW(fam.at(1.0 + 0.5 * GridKdv::time_margin));
  EXPECT_THROW(fam.at(1.1), DomainExceeded);
  EXPECT_THROW(fam.at(-0.1), DomainExceeded);
}

TEST(Correctors, PureRightMoverFormula) {
  const Jet a{1.2, -0.4, 0.7, 0.1, 0.5};
  const auto c = correctors(a, Jet{}, kSigma2);
  EXPECT_EQ(c.A2, 0.0);
  EXPECT_DOUBLE_EQ(c.B2, 0.25 * ((0.25 - 2 * kSigma2) * 0.7 - 1.2 * 1.2));
  const auto z = correctors(Jet{}, Jet{}, kSigma2);
  EXPECT_EQ(z.A2, 0.0);
  EXPECT_EQ(z.B2, 0.0);
}

TEST(Correctors, MixedTermsFromBothSides) {
  const Jet a{1.0, 0.5, -0.2, 0.0, 0.3}, b{0.4, -0.6, 0.8, 0.0, -0.7};
  const double e = 0.25 - 2 * kSigma2;
  const auto c = correctors(a, b, kSigma2);
  EXPECT_DOUBLE_EQ(c.A2, 0.25 * (e * 0.8 - (2 * 0.5 * -0.7 + 2 * 1.0 * 0.4 + 0.4 * 0.4)));
  EXPECT_DOUBLE_EQ(c.B2, 0.25 * (e * -0.2 - (1.0 + 2 * 1.0 * 0.4 + 2 * 0.3 * -0.6)));
}

TEST(Correctors, SolitonPeakValueAgainstTaylorOracle) {
  const double k = std::sqrt(16.0 / 3.0);
  const Taylor t = taylor_soliton(k, 0.0);
  EXPECT_NEAR(t.derivative(0), 3.0, 1e-14);
  EXPECT_NEAR(t.derivative(2), -32.0, 1e-12);
  const double oracle = 0.25 * ((0.25 - 2 * kSigma2) * t.derivative(2) - t.derivative(0) * t.derivative(0));
  EXPECT_NEAR(oracle, -25.0 / 6.0, 1e-12);
  const auto c = correctors(soliton(kSigma2), 0.8, 0.8, 0.8);
  EXPECT_NEAR(c.B2, oracle, 1e-12);
  EXPECT_NEAR(c.B2, -4.1667, 1e-4);
  EXPECT_EQ(c.A2, 0.0);
  // Off-peak values agree with the oracle too.
  for (double x : {-0.9, 0.35, 1.4}) {
    const Taylor tx = taylor_soliton(k, x);
    const Jet j = SolitonWave::make(kSigma2).eval(x, 0.0);
    EXPECT_NEAR(j.d1, tx.derivative(1), 1e-11);
    EXPECT_NEAR(j.d2, tx.derivative(2), 1e-11);
    EXPECT_NEAR(j.d3, tx.derivative(3), 1e-10);
  }
}

TEST(ProfileCsv, HeaderAndRoundTrip) {
  const SideSlice s(SolitonWave::make(kSigma2), 0.0);
  const std::vector<double> xs{-1.0, 0.0, 0.123456789};
  std::ostringstream os;
  write_profile_csv(os, s, xs);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "w,A,A_w,A_ww,A_www");
  for (double x : xs) {
    ASSERT_TRUE(std::getline(is, line));
    std::vector<double> cols;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cols.push_back(std::stod(cell));
    ASSERT_EQ(cols.size(), 5u);
    const Jet j = s.eval(x);
    EXPECT_EQ(cols[0], x);
    EXPECT_EQ(cols[1], j.v);
    EXPECT_EQ(cols[2], j.d1);
    EXPECT_EQ(cols[3], j.d2);
    EXPECT_EQ(cols[4], j.d3);
  }
}
