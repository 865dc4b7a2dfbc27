#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lasernoise/spectra.hpp"

namespace lasernoise {

// Truncated Fourier synthesis grid. The trace is a sum over harmonics
// f_j = j/T for j = 1..M/2; M is derived from (T, bandwidth) and rounded up
// to the next even integer so that bandwidth_actual = (M/2)/T >= bandwidth.
struct SynthesisConfig {
  double duration_s = 5e-5;     // T; with the default bandwidth gives M = 1000
  double bandwidth_hz = 1e7;    // f_{M/2}
  std::uint64_t base_seed = 0;

  std::size_t num_samples() const;   // M (even, >= 2)
  double delta_f() const { return 1.0 / duration_s; }
  double actual_bandwidth() const;   // (M/2) * delta_f
  void validate() const;
};

enum class TraceKind { Phase, FrequencyDeviation, RelativeIntensity };

// One realization of a noise process, represented by its closed Fourier sum
//   Phase / RelativeIntensity:  X(t) = sum_j a_j cos(2 pi f_j t + phi_j)
//   FrequencyDeviation:         X(t) = sum_j a_j sin(2 pi f_j t + phi_j)
// value(t) is exact at any t (no interpolation), which is what the ODE
// steppers query. The uniform sample grid t_k = k T/M is materialized on
// demand for CSV export and spectral tests.
class NoiseTrace {
 public:
  NoiseTrace(TraceKind kind, NoiseModel model, SynthesisConfig cfg,
             std::uint64_t seed, std::vector<double> amplitudes,
             std::vector<double> phases);

  double value(double t) const;

  std::vector<double> sample_times() const;
  std::vector<double> sample_values() const;

  TraceKind kind() const { return kind_; }
  const NoiseModel& model() const { return model_; }
  const SynthesisConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& amplitudes() const { return amp_; }
  const std::vector<double>& phases() const { return phase_; }
  static const char* generator_name() { return "splitmix64"; }

  // sum_j |a_j|: hard amplitude bound on |X(t)|
  double amplitude_bound() const;

  friend std::pair<double, double> evaluate_pair(const NoiseTrace& a, const NoiseTrace& b,
                                                 double t);

 private:
  TraceKind kind_;
  NoiseModel model_;
  SynthesisConfig cfg_;
  std::uint64_t seed_;
  double delta_omega_;
  std::vector<double> amp_;
  std::vector<double> phase_;
  // Horner coefficients b_j = a_j exp(i phi_j), evaluated against
  // z = exp(i delta_omega t); four interleaved chains for throughput.
  std::vector<double> re_, im_;
};

// phi(t_k) = sum_j 2 sqrt(S_phi(f_j) df) cos(2 pi f_j t + phi_j),
// phi_j i.i.d. uniform [0, 2pi) from splitmix64(seed).
NoiseTrace synth_phase_trace(const NoiseModel& model, const SynthesisConfig& cfg);

// dnu(t) = sum_j dnu_j sin(2 pi f_j t + phi_j), dnu_j = -2 sqrt(S_dnu df);
// same phi_j stream as the phase trace for the same seed, so that
// dnu = (1/2pi) dphi/dt holds term by term.
NoiseTrace synth_frequency_trace(const NoiseModel& model, const SynthesisConfig& cfg);

// alpha_I(t) = sum_j 2 sqrt(S_alpha(f_j) df) cos(2 pi f_j t + phi_j); the
// model is interpreted as S_alpha(f) (units 1/Hz).
NoiseTrace synth_intensity_trace(const NoiseModel& model, const SynthesisConfig& cfg);

void write_trace_csv(const NoiseTrace& trace, const std::string& path);
nlohmann::json trace_sidecar(const NoiseTrace& trace);

// Evaluate two traces sharing the same harmonic grid at the same time with
// one shared phasor; equivalent to {a.value(t), b.value(t)} but cheaper in
// the inner loop of the two-laser propagators.
std::pair<double, double> evaluate_pair(const NoiseTrace& a, const NoiseTrace& b, double t);

}  // namespace lasernoise
