#pragma once

#include <complex>
#include <optional>
#include <variant>

#include "lasernoise/analytic.hpp"
#include "lasernoise/spectra.hpp"
#include "lasernoise/synth.hpp"

namespace lasernoise {

struct OnePhotonDrive {
  double omega0 = 0;  // rad/s
  void validate() const;
};

// Ladder g -> e -> r with lasers detuned by Delta1, Delta2 from the two legs;
// delta = Delta1 - Delta2, Delta = Delta1 + Delta2, Omega_eff = O1 O2/delta.
struct TwoPhotonLadderDrive {
  double omega1 = 0, omega2 = 0;  // rad/s
  double delta1 = 0, delta2 = 0;  // rad/s
  double delta_small() const { return delta1 - delta2; }
  double delta_big() const { return delta1 + delta2; }
  double omega_eff() const { return omega1 * omega2 / delta_small(); }
  void validate() const;  // resonance condition + |delta| >= 10 Omega_eff
};

// Lambda configuration: both sidebands couple g and e through the common
// detuned level p; complex Rabi rates carry the rotation-axis phases.
// Effective two-photon Rabi rate Omega_R = O1 O2^*/(2 Delta).
struct LambdaDrive {
  std::complex<double> omega1, omega2;  // rad/s
  double delta = 0;                     // rad/s (detuning of p)
  bool correlated_phase = true;
  std::complex<double> omega_eff() const { return omega1 * std::conj(omega2) / (2.0 * delta); }
  void validate() const;
};

using DriveConfig = std::variant<OnePhotonDrive, TwoPhotonLadderDrive, LambdaDrive>;

enum class InitialState { XPlus, YPlus, ZPlus };

// Gate defined either by the rotation multiple N (t = 2 pi N / Omega) or by
// an explicit duration; exactly one of the two must be set.
struct GateSpec {
  double n = 0;
  double t_g = 0;
  InitialState initial_state = InitialState::XPlus;
  void validate() const;
  double gate_time(double omega_eff) const;
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-10;
  double max_step = 0;  // 0 = derived from the fastest timescale of the problem
  void validate() const;
};

struct OnePhotonResult {
  std::complex<double> cg, ce;
  double norm_drift = 0;
  std::size_t steps = 0;
};

struct ThreeLevelResult {
  std::complex<double> cg, ce, cr;
  double max_intermediate_pop = 0;
  bool intermediate_pop_warning = false;  // max |c_e|^2 > 0.01
  double norm_drift = 0;
  std::size_t steps = 0;
};

// Laboratory-frame one-photon propagation of eq. of motion
//   cg' = -i (Omega(t)/2) e^{-i phi} ce,  ce' = -i (Omega(t)/2) e^{+i phi} cg
// from (cg, ce) = (1, 0), with Omega(t) = Omega0 (1 + alpha_I(t)/2) when an
// intensity trace is supplied.
OnePhotonResult propagate_one_photon(double omega0, const NoiseTrace* phase_trace,
                                     const NoiseTrace* intensity_trace, double t_final,
                                     const IntegratorConfig& icfg);

// Same equations with arbitrary callables phi(t) and alpha_I(t) (either may
// be null); used for deterministic-drive oracles.
OnePhotonResult propagate_one_photon_fn(double omega0,
                                        const std::function<double(double)>& phase_fn,
                                        const std::function<double(double)>& intensity_fn,
                                        double t_final, const IntegratorConfig& icfg);

// Fluctuating-frame propagation, H = (Omega0/2) sigma_x - pi dnu(t) sigma_z,
// from an arbitrary initial 2-vector.
OnePhotonResult propagate_one_photon_fluctuating(double omega0,
                                                 const NoiseTrace& frequency_trace,
                                                 std::complex<double> cg0,
                                                 std::complex<double> ce0, double t_final,
                                                 const IntegratorConfig& icfg);

ThreeLevelResult propagate_two_photon(const TwoPhotonLadderDrive& drive,
                                      const NoiseTrace* phi1, const NoiseTrace* phi2,
                                      const NoiseTrace* alpha1, const NoiseTrace* alpha2,
                                      double t_final, const IntegratorConfig& icfg);

// Lambda propagation from |g>; with correlated_phase the same trace drives
// both sidebands, otherwise pass two independent traces.
ThreeLevelResult propagate_lambda(const LambdaDrive& drive, const NoiseTrace* phase1,
                                  const NoiseTrace* phase2, double t_final,
                                  const IntegratorConfig& icfg);

// Per-laser noise models; absent channels are noiseless.
struct NoiseChannels {
  std::optional<NoiseModel> phase1;
  std::optional<NoiseModel> phase2;
  std::optional<NoiseModel> intensity1;
  std::optional<NoiseModel> intensity2;
};

struct MonteCarloResult {
  ErrorEstimate estimate;
  std::vector<double> per_trial_error;
  double max_intermediate_pop = 0;  // two-photon / lambda only
};

// Trial i synthesizes traces with seed mix(base_seed, i) (channel seeds
// mix(trial_seed, channel)), propagates, and scores
// e_i = 1 - Tr[rho_i rho_ideal]. Aggregation is an index-ordered reduction:
// results are bitwise reproducible for fixed (config, base_seed) regardless
// of thread scheduling. std_error comes from sqrt(n) batch means.
MonteCarloResult monte_carlo_error(const DriveConfig& drive, const GateSpec& gate,
                                   const NoiseChannels& noise, std::size_t n_trials,
                                   std::uint64_t base_seed, const IntegratorConfig& icfg,
                                   const SynthesisConfig& scfg, int n_threads = 0);

}  // namespace lasernoise
