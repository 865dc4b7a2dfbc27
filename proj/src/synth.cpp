#include "lasernoise/synth.hpp"

#include <cmath>
#include <complex>
#include <fstream>

#include "lasernoise/errors.hpp"
#include "lasernoise/rng.hpp"

namespace lasernoise {

std::size_t SynthesisConfig::num_samples() const {
  const double half = duration_s * bandwidth_hz;
  auto m_half = static_cast<std::size_t>(std::ceil(half - 1e-9));
  if (m_half < 1) m_half = 1;
  return 2 * m_half;
}

double SynthesisConfig::actual_bandwidth() const {
  return static_cast<double>(num_samples() / 2) * delta_f();
}

void SynthesisConfig::validate() const {
  if (!(duration_s > 0)) throw validation_error("SynthesisConfig: duration must be > 0");
  if (!(bandwidth_hz > 0)) throw validation_error("SynthesisConfig: bandwidth must be > 0");
  if (num_samples() < 2) throw validation_error("SynthesisConfig: M must be >= 2");
  if (!(bandwidth_hz > delta_f())) {
    throw validation_error("SynthesisConfig: bandwidth must exceed delta_f = 1/T");
  }
}

NoiseTrace::NoiseTrace(TraceKind kind, NoiseModel model, SynthesisConfig cfg,
                       std::uint64_t seed, std::vector<double> amplitudes,
                       std::vector<double> phases)
    : kind_(kind),
      model_(std::move(model)),
      cfg_(cfg),
      seed_(seed),
      delta_omega_(2.0 * M_PI * cfg.delta_f()),
      amp_(std::move(amplitudes)),
      phase_(std::move(phases)) {
  // Sine traces are folded into the cosine evaluator through a phase shift:
  // sin(x) = cos(x - pi/2).
  const double shift = (kind_ == TraceKind::FrequencyDeviation) ? -M_PI / 2 : 0.0;
  re_.resize(amp_.size());
  im_.resize(amp_.size());
  for (std::size_t j = 0; j < amp_.size(); ++j) {
    re_[j] = amp_[j] * std::cos(phase_[j] + shift);
    im_[j] = amp_[j] * std::sin(phase_[j] + shift);
  }
}

double NoiseTrace::value(double t) const {
  // X(t) = Re sum_{j=1}^{J} b_j z^j with z = exp(i delta_omega t).
  // Horner from the top coefficient; four interleaved chains in w = z^4 run
  // on plain doubles so the k-loops vectorize.
  const std::size_t n = re_.size();
  if (n == 0) return 0.0;
  const double c = std::cos(delta_omega_ * t);
  const double s = std::sin(delta_omega_ * t);
  const double wr = (c - s) * (c + s);  // Re z^2... combined below
  const double wi = 2.0 * c * s;
  const double w2r = (wr - wi) * (wr + wi);  // Re z^4
  const double w2i = 2.0 * wr * wi;

  double ar[4] = {0, 0, 0, 0}, ai[4] = {0, 0, 0, 0};
  std::size_t j = n;
  while (j >= 4) {
    const double* re = re_.data() + (j - 4);
    const double* im = im_.data() + (j - 4);
    for (int k = 0; k < 4; ++k) {
      const double tr = ar[k] * w2r - ai[k] * w2i + re[k];
      ai[k] = ar[k] * w2i + ai[k] * w2r + im[k];
      ar[k] = tr;
    }
    j -= 4;
  }
  // fold the four chains: poly = ((a3 z + a2) z + a1) z + a0
  double pr = ar[3], pi = ai[3];
  for (int k = 2; k >= 0; --k) {
    const double tr = pr * c - pi * s + ar[k];
    pi = pr * s + pi * c + ai[k];
    pr = tr;
  }
  while (j > 0) {
    const double tr = pr * c - pi * s + re_[j - 1];
    pi = pr * s + pi * c + im_[j - 1];
    pr = tr;
    --j;
  }
  return pr * c - pi * s;  // times z: lowest harmonic is j = 1
}

std::vector<double> NoiseTrace::sample_times() const {
  const std::size_t m = cfg_.num_samples();
  std::vector<double> t(m);
  for (std::size_t k = 0; k < m; ++k) t[k] = cfg_.duration_s * static_cast<double>(k) / static_cast<double>(m);
  return t;
}

std::vector<double> NoiseTrace::sample_values() const {
  const std::size_t m = cfg_.num_samples();
  std::vector<double> v(m);
  for (std::size_t k = 0; k < m; ++k) {
    v[k] = value(cfg_.duration_s * static_cast<double>(k) / static_cast<double>(m));
  }
  return v;
}

double NoiseTrace::amplitude_bound() const {
  double b = 0.0;
  for (double a : amp_) b += std::abs(a);
  return b;
}

std::pair<double, double> evaluate_pair(const NoiseTrace& a, const NoiseTrace& b, double t) {
  if (a.delta_omega_ != b.delta_omega_ || a.re_.size() != b.re_.size()) {
    return {a.value(t), b.value(t)};
  }
  const std::size_t n = a.re_.size();
  if (n == 0) return {0.0, 0.0};
  const double c = std::cos(a.delta_omega_ * t);
  const double s = std::sin(a.delta_omega_ * t);
  const double wr = (c - s) * (c + s);
  const double wi = 2.0 * c * s;
  const double w2r = (wr - wi) * (wr + wi);
  const double w2i = 2.0 * wr * wi;

  double ar[8] = {0, 0, 0, 0, 0, 0, 0, 0}, ai[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t j = n;
  while (j >= 4) {
    const std::size_t base = j - 4;
    for (int k = 0; k < 4; ++k) {
      const double t1 = ar[k] * w2r - ai[k] * w2i + a.re_[base + k];
      ai[k] = ar[k] * w2i + ai[k] * w2r + a.im_[base + k];
      ar[k] = t1;
      const double t2 = ar[4 + k] * w2r - ai[4 + k] * w2i + b.re_[base + k];
      ai[4 + k] = ar[4 + k] * w2i + ai[4 + k] * w2r + b.im_[base + k];
      ar[4 + k] = t2;
    }
    j -= 4;
  }
  double pra = ar[3], pia = ai[3], prb = ar[7], pib = ai[7];
  for (int k = 2; k >= 0; --k) {
    const double t1 = pra * c - pia * s + ar[k];
    pia = pra * s + pia * c + ai[k];
    pra = t1;
    const double t2 = prb * c - pib * s + ar[4 + k];
    pib = prb * s + pib * c + ai[4 + k];
    prb = t2;
  }
  while (j > 0) {
    const double t1 = pra * c - pia * s + a.re_[j - 1];
    pia = pra * s + pia * c + a.im_[j - 1];
    pra = t1;
    const double t2 = prb * c - pib * s + b.re_[j - 1];
    pib = prb * s + pib * c + b.im_[j - 1];
    prb = t2;
    --j;
  }
  return {pra * c - pia * s, prb * c - pib * s};
}

namespace {

std::vector<double> draw_phases(std::uint64_t seed, std::size_t count) {
  SplitMix64 gen(seed);
  std::vector<double> phi(count);
  for (auto& p : phi) p = 2.0 * M_PI * gen.next_double();
  return phi;
}

NoiseTrace build_trace(TraceKind kind, const NoiseModel& model,
                       const SynthesisConfig& cfg) {
  cfg.validate();
  const std::size_t half = cfg.num_samples() / 2;
  const double df = cfg.delta_f();
  std::vector<double> amp(half);
  for (std::size_t j = 1; j <= half; ++j) {
    const double fj = static_cast<double>(j) * df;
    double a = 0.0;
    switch (kind) {
      case TraceKind::Phase:
        a = 2.0 * std::sqrt(psd_phi(model, fj) * df);
        break;
      case TraceKind::FrequencyDeviation:
        a = -2.0 * std::sqrt(psd_delta_nu(model, fj) * df);
        break;
      case TraceKind::RelativeIntensity:
        a = 2.0 * std::sqrt(psd_delta_nu(model, fj) * df);
        break;
    }
    if (!std::isfinite(a)) throw numerical_error("synth: non-finite amplitude at f_j");
    amp[j - 1] = a;
  }
  return NoiseTrace(kind, model, cfg, cfg.base_seed, std::move(amp),
                    draw_phases(cfg.base_seed, half));
}

}  // namespace

NoiseTrace synth_phase_trace(const NoiseModel& model, const SynthesisConfig& cfg) {
  return build_trace(TraceKind::Phase, model, cfg);
}

NoiseTrace synth_frequency_trace(const NoiseModel& model, const SynthesisConfig& cfg) {
  return build_trace(TraceKind::FrequencyDeviation, model, cfg);
}

NoiseTrace synth_intensity_trace(const NoiseModel& model, const SynthesisConfig& cfg) {
  return build_trace(TraceKind::RelativeIntensity, model, cfg);
}

void write_trace_csv(const NoiseTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("write_trace_csv: cannot open " + path);
  out.precision(17);
  out << "time_s,value\n";
  const auto t = trace.sample_times();
  const auto v = trace.sample_values();
  for (std::size_t k = 0; k < t.size(); ++k) out << t[k] << ',' << v[k] << '\n';
  if (!out) throw io_error("write_trace_csv: write failed for " + path);
}

nlohmann::json trace_sidecar(const NoiseTrace& trace) {
  nlohmann::json j;
  switch (trace.kind()) {
    case TraceKind::Phase: j["kind"] = "phase"; break;
    case TraceKind::FrequencyDeviation: j["kind"] = "frequency_deviation"; break;
    case TraceKind::RelativeIntensity: j["kind"] = "relative_intensity"; break;
  }
  j["model"] = trace.model().to_json();
  j["seed"] = trace.seed();
  j["generator"] = NoiseTrace::generator_name();
  j["duration_s"] = trace.config().duration_s;
  j["bandwidth_hz"] = trace.config().actual_bandwidth();
  j["num_samples"] = trace.config().num_samples();
  return j;
}

}  // namespace lasernoise
