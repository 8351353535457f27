// Launch a sech² pulse into a transparent random lattice and compare it with
// the extended KdV approximator and with the bare moving solitary wave.

#include <cmath>
#include <cstdio>

#include "fputkdv/approximator.hpp"
#include "fputkdv/integrator.hpp"
#include "fputkdv/kdv.hpp"
#include "fputkdv/lattice.hpp"

int main() {
  using namespace fputkdv;
  const double eps = 0.125, T0 = 1.0;
  const Index M = default_half_width(eps, T0);

  const NoiseSequence zeta = sample_noise(Distribution::uniform, 0.125, 7, noise_window(M));
  const MassProfile mass = make_mass(MassModel::transparent, {}, &zeta, M);
  const WaveFamily wave = soliton(zeta.sigma2());
  const GammaProcesses gammas = gamma_build(zeta, eps, M);
  const ApproximatorConfig cfg{eps, T0, ApproxOrder::extended};
  const ApproximatorConfig bare{eps, T0, ApproxOrder::leading};

  const ApproxFields start = evaluate(cfg, wave, &zeta, &gammas, {-M, M}, 0.0);
  LatticeState state(M, start.q, start.p, 0.0);

  const auto plan = IntegrationPlan::uniform(default_dt(mass), T0 / (eps * eps * eps), 5);
  std::printf("%10s %14s %14s %14s\n", "t", "|q,p|_l2", "err_leading", "err_extended");
  integrate(state, mass, plan, [&](double t, const LatticeState& s) {
    auto distance = [&](const ApproxFields& a) {
      double eq = 0.0, ep = 0.0;
      for (std::size_t i = 0; i < a.q.size(); ++i) {
        eq += (s.q()[i] - a.q[i]) * (s.q()[i] - a.q[i]);
        ep += (s.p()[i] - a.p[i]) * (s.p()[i] - a.p[i]);
      }
      return std::sqrt(eq) + std::sqrt(ep);
    };
    const double lead = distance(evaluate(bare, wave, nullptr, nullptr, {-M, M}, t));
    const double ext = distance(evaluate(cfg, wave, &zeta, &gammas, {-M, M}, t));
    std::printf("%10.3f %14.6e %14.6e %14.6e\n", t, norms(s).l2, lead, ext);
  });
  return 0;
}
