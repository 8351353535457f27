// fput_kdv: command line front end for the lattice / KdV experiments.
//
//   fput_kdv <subcommand> --epsilon 0.25[,0.125,...] --t0 3 --mass transparent
//            --seed 42 --realizations 3 --out path.csv
//            [--dt X --lattice-size M --samples 200]
//
// Exit codes: 0 success, 2 bad flags, 3 numerical abort (partial output is
// still written).

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fputkdv/harness.hpp"

#ifndef FPUT_KDV_VERSION
#define FPUT_KDV_VERSION "unknown"
#endif

namespace {

constexpr int exit_flags = 2;
constexpr int exit_numerical = 3;

/// Parse "0.25,1/8,0.0625" into doubles; fractions p/q are allowed.
std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw std::invalid_argument(flag + ": empty list entry");
    std::size_t used = 0;
    double value = 0.0;
    try {
      const auto slash = item.find('/');
      if (slash == std::string::npos) {
        value = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("");
      } else {
        const std::string num = item.substr(0, slash), den = item.substr(slash + 1);
        std::size_t u1 = 0, u2 = 0;
        const double a = std::stod(num, &u1), b = std::stod(den, &u2);
        if (u1 != num.size() || u2 != den.size() || b == 0.0) throw std::invalid_argument("");
        value = a / b;
      }
    } catch (const std::exception&) {
      throw std::invalid_argument(flag + ": cannot parse '" + item + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) throw std::invalid_argument(flag + ": empty list");
  return out;
}

struct Flags {
  std::string epsilon, theta;
  double t0 = 0, dt = 0, support_bound = 0, spread_ratio = 0, h = 0, amplitude = 0, psi_ratio = 0;
  std::string mass, out, wave;
  std::uint64_t seed = 0;
  int realizations = 0, samples = 0;
  long long lattice_size = 0, length = 0;
  std::size_t kdv_modes = 0;
  bool record_runtime = false, plot = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-mass FPUT lattice and KdV approximation experiments"};
  app.set_version_flag("--version", std::string(FPUT_KDV_VERSION));
  app.require_subcommand(1);

  Flags f;
  struct Sub {
    fputkdv::ExperimentKind kind;
    const char* help;
    CLI::App* app = nullptr;
  };
  std::vector<Sub> subs{
      {fputkdv::ExperimentKind::amplitude, "scaled l-infinity amplitude vs scaled time per mass model"},
      {fputkdv::ExperimentKind::error_sweep, "error against the moving solitary wave, slope vs epsilon"},
      {fputkdv::ExperimentKind::gamma_bound, "normalized suprema of the AR correction processes vs epsilon"},
      {fputkdv::ExperimentKind::ar_bound, "normalized suprema of a generic AR(1) process vs contraction"},
      {fputkdv::ExperimentKind::scaling_check, "epsilon^(1/2)-scaled l2 norms of long-wave products"},
      {fputkdv::ExperimentKind::residual_check, "alpha/beta residual diagnostics of the extended approximator"},
      {fputkdv::ExperimentKind::simulate, "Gaussian long-wave data vs leading and extended approximators"},
  };
  for (auto& s : subs) {
    auto* sub = app.add_subcommand(fputkdv::to_string(s.kind), s.help);
    s.app = sub;
    sub->add_option("--epsilon", f.epsilon, "comma-separated epsilon values (fractions allowed)");
    sub->add_option("--t0", f.t0, "macroscopic horizon T0 (runs to T0/eps^3)");
    sub->add_option("--mass", f.mass, "constant | periodic | transparent | iid | translucent (amplitude: also all)");
    sub->add_option("--seed", f.seed, "64-bit seed");
    sub->add_option("--realizations", f.realizations, "noise realizations per parameter");
    sub->add_option("--out", f.out, "output CSV path")->required();
    sub->add_option("--dt", f.dt, "RK4 step (default min(0.1, 0.5 sqrt(min m)))");
    sub->add_option("--lattice-size", f.lattice_size, "half-width M of the periodic window");
    sub->add_option("--samples", f.samples, "sample times per run");
    sub->add_option("--support-bound", f.support_bound, "noise drawn uniform on (-a, a)");
    sub->add_flag("--record-runtime", f.record_runtime, "fill runtime_s (makes output run-dependent)");
    sub->add_flag("--plot", f.plot, "write a gnuplot script next to each CSV");
    switch (s.kind) {
      case fputkdv::ExperimentKind::ar_bound:
        sub->add_option("--theta", f.theta, "comma-separated contraction factors");
        sub->add_option("--length", f.length, "process length");
        break;
      case fputkdv::ExperimentKind::residual_check:
        sub->add_option("--spread-ratio", f.spread_ratio, "flag columns whose spread exceeds this");
        sub->add_option("--fd-step", f.h, "centred time difference step");
        sub->add_option("--wave", f.wave, "soliton | zero");
        break;
      case fputkdv::ExperimentKind::simulate:
        sub->add_option("--amplitude", f.amplitude, "Phi(X) = amplitude exp(-X^2)");
        sub->add_option("--psi-ratio", f.psi_ratio, "Psi = ratio * Phi");
        sub->add_option("--kdv-modes", f.kdv_modes, "Fourier modes of the KdV grid");
        break;
      default: break;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_flags;
  }

  const Sub* chosen = nullptr;
  for (const auto& s : subs) {
    if (s.app->parsed()) chosen = &s;
  }
  CLI::App& sub = *chosen->app;

  fputkdv::ExperimentSpec spec = fputkdv::default_spec(chosen->kind);
  try {
    auto given = [&](const char* name) {
      const CLI::Option* opt = sub.get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (given("--epsilon")) spec.epsilons = parse_list(f.epsilon, "--epsilon");
    if (given("--theta")) spec.thetas = parse_list(f.theta, "--theta");
    if (given("--t0")) spec.T0 = f.t0;
    if (given("--mass")) {
      if (f.mass != "all") (void)fputkdv::mass_model_from_string(f.mass);
      else if (chosen->kind != fputkdv::ExperimentKind::amplitude) throw std::invalid_argument("--mass all is only valid for amplitude");
      spec.mass = f.mass;
    }
    if (given("--seed")) spec.seed = f.seed;
    if (given("--realizations")) spec.realizations = f.realizations;
    if (given("--dt")) {
      if (!(f.dt > 0.0)) throw std::invalid_argument("--dt must be > 0");
      spec.dt = f.dt;
    }
    if (given("--lattice-size")) {
      if (f.lattice_size < 1) throw std::invalid_argument("--lattice-size must be >= 1");
      spec.lattice_size = f.lattice_size;
    }
    if (given("--samples")) spec.samples = f.samples;
    if (given("--support-bound")) spec.support_bound = f.support_bound;
    if (given("--length")) spec.length = f.length;
    if (given("--spread-ratio")) spec.spread_ratio = f.spread_ratio;
    if (given("--fd-step")) spec.h = f.h;
    if (given("--wave")) spec.wave = f.wave;
    if (given("--amplitude")) spec.amplitude = f.amplitude;
    if (given("--psi-ratio")) spec.psi_ratio = f.psi_ratio;
    if (given("--kdv-modes")) spec.kdv_modes = f.kdv_modes;
    spec.record_runtime = f.record_runtime;
    spec.plot = f.plot;
    spec.out = f.out;
    spec.version = FPUT_KDV_VERSION;
    for (int i = 1; i < argc; ++i) spec.invocation += (i > 1 ? " " : "") + std::string(argv[i]);
    spec.validate();
    (void)fputkdv::worker_count();
  } catch (const std::exception& e) {
    std::cerr << "fput_kdv: " << e.what() << '\n';
    return exit_flags;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    const fputkdv::RunOutput out = fputkdv::run_experiment(spec);
    const auto paths = fputkdv::write_output(spec, out);
    for (const auto& n : out.notes) std::cerr << fputkdv::to_string(spec.kind) << ": " << n << '\n';
    for (const auto& p : paths) std::cerr << "wrote " << p << '\n';
    std::cerr << fputkdv::to_string(spec.kind) << ": " << fputkdv::detail::seconds_since(start) << " s\n";
    if (!out.failures.empty()) {
      for (const auto& msg : out.failures) std::cerr << "fput_kdv: numerical abort: " << msg << '\n';
      return exit_numerical;
    }
  } catch (const fputkdv::NonFiniteError& e) {
    std::cerr << "fput_kdv: numerical abort: " << e.what() << '\n';
    return exit_numerical;
  } catch (const fputkdv::AliasingDetected& e) {
    std::cerr << "fput_kdv: numerical abort: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "fput_kdv: " << e.what() << '\n';
    return exit_flags;
  } catch (const std::exception& e) {
    std::cerr << "fput_kdv: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
