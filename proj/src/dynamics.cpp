#include "lasernoise/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <tuple>
#include <mutex>
#include <numeric>
#include <thread>

#include "lasernoise/errors.hpp"
#include "lasernoise/rng.hpp"

namespace lasernoise {

namespace {
using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};
}  // namespace

void OnePhotonDrive::validate() const {
  if (!(omega0 > 0)) throw validation_error("OnePhotonDrive: omega0 must be > 0");
}

void TwoPhotonLadderDrive::validate() const {
  if (!(omega1 > 0) || !(omega2 > 0)) {
    throw validation_error("TwoPhotonLadderDrive: omega1, omega2 must be > 0");
  }
  const double delta = delta_small();
  if (delta == 0) throw validation_error("TwoPhotonLadderDrive: delta1 - delta2 must be nonzero");
  if (std::abs(delta) < 10.0 * std::abs(omega_eff())) {
    throw validation_error("TwoPhotonLadderDrive: |delta1 - delta2| must be >= 10 |omega_eff| for adiabatic elimination");
  }
  // resonance condition: Delta = Delta1 (1 - sqrt(1 + (O1^2 - O2^2)/(2 Delta1^2)))
  const double required =
      delta1 * (1.0 - std::sqrt(1.0 + (omega1 * omega1 - omega2 * omega2) /
                                          (2.0 * delta1 * delta1)));
  if (std::abs(delta_big() - required) > 1e-6 * std::abs(delta)) {
    throw validation_error("TwoPhotonLadderDrive: detunings violate the two-photon resonance condition");
  }
}

void LambdaDrive::validate() const {
  if (!(std::abs(omega1) > 0) || !(std::abs(omega2) > 0)) {
    throw validation_error("LambdaDrive: omega1, omega2 must be nonzero");
  }
  if (delta == 0) throw validation_error("LambdaDrive: delta must be nonzero");
  if (std::abs(delta) < 10.0 * std::abs(omega_eff())) {
    throw validation_error("LambdaDrive: |delta| must be >= 10 |omega_eff|");
  }
}

void GateSpec::validate() const {
  const bool has_n = n > 0, has_t = t_g > 0;
  if (has_n == has_t) throw validation_error("GateSpec: set exactly one of N or t_g");
  if (has_n && !is_half_integer(n)) {
    throw validation_error("GateSpec: N must be a positive multiple of 1/2");
  }
}

double GateSpec::gate_time(double omega_eff) const {
  validate();
  return n > 0 ? 2.0 * M_PI * n / omega_eff : t_g;
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0) || rel_tol > 1e-3 || !(abs_tol > 0) || abs_tol > 1e-3) {
    throw validation_error("IntegratorConfig: tolerances must lie in (0, 1e-3]");
  }
  if (max_step < 0) throw validation_error("IntegratorConfig: max_step must be >= 0");
}

namespace {

// Dormand-Prince 5(4) adaptive stepper on a fixed-size complex state.
template <std::size_t K, typename Rhs, typename Observer>
std::size_t rk45(Rhs&& rhs, std::array<cplx, K>& y, double t0, double t1, double rel_tol,
                 double abs_tol, double max_step, Observer&& observe) {
  using State = std::array<cplx, K>;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  auto axpy = [](State& out, const State& base, std::initializer_list<std::pair<double, const State*>> terms,
                 double h) {
    for (std::size_t i = 0; i < K; ++i) {
      cplx acc = 0.0;
      for (const auto& [a, k] : terms) acc += a * (*k)[i];
      out[i] = base[i] + h * acc;
    }
  };

  double t = t0;
  double h = std::min(max_step, (t1 - t0) / 16.0);
  State k1, k2, k3, k4, k5, k6, k7, ytmp, y5, y4;
  std::size_t steps = 0;
  const std::size_t max_steps = 200000000;

  while (t < t1) {
    if (t + h > t1) h = t1 - t;
    rhs(t, y, k1);
    axpy(ytmp, y, {{1.0 / 5, &k1}}, h);
    rhs(t + c2 * h, ytmp, k2);
    axpy(ytmp, y, {{3.0 / 40, &k1}, {9.0 / 40, &k2}}, h);
    rhs(t + c3 * h, ytmp, k3);
    axpy(ytmp, y, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}}, h);
    rhs(t + c4 * h, ytmp, k4);
    axpy(ytmp, y,
         {{19372.0 / 6561, &k1}, {-25360.0 / 2187, &k2}, {64448.0 / 6561, &k3}, {-212.0 / 729, &k4}},
         h);
    rhs(t + c5 * h, ytmp, k5);
    axpy(ytmp, y,
         {{9017.0 / 3168, &k1}, {-355.0 / 33, &k2}, {46732.0 / 5247, &k3}, {49.0 / 176, &k4}, {-5103.0 / 18656, &k5}},
         h);
    rhs(t + h, ytmp, k6);
    axpy(y5, y,
         {{35.0 / 384, &k1}, {500.0 / 1113, &k3}, {125.0 / 192, &k4}, {-2187.0 / 6784, &k5}, {11.0 / 84, &k6}},
         h);
    rhs(t + h, y5, k7);
    axpy(y4, y,
         {{5179.0 / 57600, &k1}, {7571.0 / 16695, &k3}, {393.0 / 640, &k4}, {-92097.0 / 339200, &k5}, {187.0 / 2100, &k6}, {1.0 / 40, &k7}},
         h);

    double err2 = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      const double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      const double e = std::abs(y5[i] - y4[i]) / scale;
      err2 += e * e;
    }
    const double err = std::sqrt(err2 / K);

    if (err <= 1.0) {
      t += h;
      y = y5;
      observe(t, y);
      if (++steps > max_steps) throw numerical_error("rk45: step budget exceeded");
    }
    const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    h = std::min(h * fac, max_step);
    if (!(h > 1e-30 * std::max(1.0, std::abs(t1)))) {
      throw numerical_error("rk45: step size underflow");
    }
  }
  return steps;
}

double trace_bandwidth(const NoiseTrace* tr) {
  return tr ? tr->config().actual_bandwidth() : 0.0;
}

void require_cover(const NoiseTrace* tr, double t_final, const char* what) {
  if (tr && tr->config().duration_s < t_final * (1.0 - 1e-12)) {
    throw validation_error(std::string("propagate: ") + what + " trace does not cover [0, t_final]");
  }
}

double norm_of(const cplx* y, std::size_t k) {
  double n2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) n2 += std::norm(y[i]);
  return std::sqrt(n2);
}

void check_norm(double norm, double abs_tol, const char* where) {
  if (std::abs(norm - 1.0) > 10.0 * abs_tol) {
    throw numerical_error(std::string(where) + ": state norm drifted beyond 10*abs_tol");
  }
}

}  // namespace

namespace {

template <typename PhaseFn, typename IntensityFn>
OnePhotonResult propagate_1p_impl(double omega0, PhaseFn&& phase, IntensityFn&& intensity,
                                  bool has_phase, bool has_intensity, double t_final,
                                  const IntegratorConfig& icfg, double max_step) {
  std::array<cplx, 2> y{1.0, 0.0};
  auto rhs = [&](double t, const std::array<cplx, 2>& s, std::array<cplx, 2>& ds) {
    const double phi = has_phase ? phase(t) : 0.0;
    double om = omega0;
    if (has_intensity) om *= 1.0 + 0.5 * intensity(t);
    const cplx e_min = std::polar(1.0, -phi);
    ds[0] = -kI * (0.5 * om) * e_min * s[1];
    ds[1] = -kI * (0.5 * om) * std::conj(e_min) * s[0];
  };
  OnePhotonResult r;
  r.steps = rk45<2>(rhs, y, 0.0, t_final, icfg.rel_tol, icfg.abs_tol, max_step,
                    [](double, const std::array<cplx, 2>&) {});
  r.cg = y[0];
  r.ce = y[1];
  r.norm_drift = std::abs(norm_of(y.data(), 2) - 1.0);
  check_norm(norm_of(y.data(), 2), icfg.abs_tol, "propagate_one_photon");
  return r;
}

}  // namespace

OnePhotonResult propagate_one_photon(double omega0, const NoiseTrace* phase_trace,
                                     const NoiseTrace* intensity_trace, double t_final,
                                     const IntegratorConfig& icfg) {
  if (!(omega0 > 0)) throw validation_error("propagate_one_photon: omega0 must be > 0");
  if (!(t_final > 0)) throw validation_error("propagate_one_photon: t_final must be > 0");
  icfg.validate();
  require_cover(phase_trace, t_final, "phase");
  require_cover(intensity_trace, t_final, "intensity");

  double max_step = icfg.max_step;
  if (max_step == 0) {
    const double bw = std::max(trace_bandwidth(phase_trace), trace_bandwidth(intensity_trace));
    max_step = 1.0 / (20.0 * omega0);
    if (bw > 0) max_step = std::min(max_step, 1.0 / (20.0 * M_PI * bw));
  }
  return propagate_1p_impl(
      omega0, [&](double t) { return phase_trace->value(t); },
      [&](double t) { return intensity_trace->value(t); }, phase_trace != nullptr,
      intensity_trace != nullptr, t_final, icfg, max_step);
}

OnePhotonResult propagate_one_photon_fn(double omega0,
                                        const std::function<double(double)>& phase_fn,
                                        const std::function<double(double)>& intensity_fn,
                                        double t_final, const IntegratorConfig& icfg) {
  if (!(omega0 > 0)) throw validation_error("propagate_one_photon_fn: omega0 must be > 0");
  if (!(t_final > 0)) throw validation_error("propagate_one_photon_fn: t_final must be > 0");
  icfg.validate();
  const double max_step = icfg.max_step > 0 ? icfg.max_step : 1.0 / (20.0 * omega0);
  return propagate_1p_impl(
      omega0, [&](double t) { return phase_fn(t); }, [&](double t) { return intensity_fn(t); },
      static_cast<bool>(phase_fn), static_cast<bool>(intensity_fn), t_final, icfg, max_step);
}

OnePhotonResult propagate_one_photon_fluctuating(double omega0,
                                                 const NoiseTrace& frequency_trace,
                                                 cplx cg0, cplx ce0, double t_final,
                                                 const IntegratorConfig& icfg) {
  if (!(omega0 > 0)) throw validation_error("propagate_one_photon_fluctuating: omega0 must be > 0");
  if (frequency_trace.kind() != TraceKind::FrequencyDeviation) {
    throw validation_error("propagate_one_photon_fluctuating: needs a frequency-deviation trace");
  }
  icfg.validate();
  require_cover(&frequency_trace, t_final, "frequency");

  double max_step = icfg.max_step;
  if (max_step == 0) {
    max_step = std::min(1.0 / (20.0 * omega0),
                        1.0 / (20.0 * M_PI * frequency_trace.config().actual_bandwidth()));
  }

  std::array<cplx, 2> y{cg0, ce0};
  auto rhs = [&](double t, const std::array<cplx, 2>& s, std::array<cplx, 2>& ds) {
    const double z = M_PI * frequency_trace.value(t);  // (2 pi dnu)/2
    ds[0] = -kI * (-z * s[0] + 0.5 * omega0 * s[1]);
    ds[1] = -kI * (0.5 * omega0 * s[0] + z * s[1]);
  };
  OnePhotonResult r;
  r.steps = rk45<2>(rhs, y, 0.0, t_final, icfg.rel_tol, icfg.abs_tol, max_step,
                    [](double, const std::array<cplx, 2>&) {});
  r.cg = y[0];
  r.ce = y[1];
  r.norm_drift = std::abs(norm_of(y.data(), 2) - 1.0);
  check_norm(norm_of(y.data(), 2), icfg.abs_tol, "propagate_one_photon_fluctuating");
  return r;
}

ThreeLevelResult propagate_two_photon(const TwoPhotonLadderDrive& drive,
                                      const NoiseTrace* phi1, const NoiseTrace* phi2,
                                      const NoiseTrace* alpha1, const NoiseTrace* alpha2,
                                      double t_final, const IntegratorConfig& icfg) {
  drive.validate();
  icfg.validate();
  if (!(t_final > 0)) throw validation_error("propagate_two_photon: t_final must be > 0");
  require_cover(phi1, t_final, "phi1");
  require_cover(phi2, t_final, "phi2");
  require_cover(alpha1, t_final, "alpha1");
  require_cover(alpha2, t_final, "alpha2");

  double max_step = icfg.max_step;
  if (max_step == 0) {
    max_step = 1.0 / (20.0 * std::max(std::abs(drive.delta1), std::abs(drive.delta2)));
    const double bw = std::max({trace_bandwidth(phi1), trace_bandwidth(phi2),
                                trace_bandwidth(alpha1), trace_bandwidth(alpha2)});
    if (bw > 0) max_step = std::min(max_step, 1.0 / (20.0 * M_PI * bw));
  }

  std::array<cplx, 3> y{1.0, 0.0, 0.0};
  double max_ce2 = 0.0;
  const bool paired = phi1 && phi2;
  auto rhs = [&](double t, const std::array<cplx, 3>& s, std::array<cplx, 3>& ds) {
    double p1 = 0.0, p2 = 0.0;
    if (paired) {
      std::tie(p1, p2) = evaluate_pair(*phi1, *phi2, t);
    } else {
      if (phi1) p1 = phi1->value(t);
      if (phi2) p2 = phi2->value(t);
    }
    double o1 = drive.omega1, o2 = drive.omega2;
    if (alpha1) o1 *= 1.0 + 0.5 * alpha1->value(t);
    if (alpha2) o2 *= 1.0 + 0.5 * alpha2->value(t);
    const cplx f1 = std::polar(0.5 * o1, p1 + drive.delta1 * t);   // (O1/2) e^{i(phi1 + D1 t)}
    const cplx f2 = std::polar(0.5 * o2, p2 + drive.delta2 * t);
    ds[0] = -kI * f1 * s[1];
    ds[1] = -kI * (std::conj(f1) * s[0] + f2 * s[2]);
    ds[2] = -kI * std::conj(f2) * s[1];
  };
  ThreeLevelResult r;
  r.steps = rk45<3>(rhs, y, 0.0, t_final, icfg.rel_tol, icfg.abs_tol, max_step,
                    [&](double, const std::array<cplx, 3>& s) {
                      max_ce2 = std::max(max_ce2, std::norm(s[1]));
                    });
  r.cg = y[0];
  r.ce = y[1];
  r.cr = y[2];
  r.max_intermediate_pop = max_ce2;
  r.intermediate_pop_warning = max_ce2 > 0.01;
  r.norm_drift = std::abs(norm_of(y.data(), 3) - 1.0);
  check_norm(norm_of(y.data(), 3), icfg.abs_tol, "propagate_two_photon");
  return r;
}

ThreeLevelResult propagate_lambda(const LambdaDrive& drive, const NoiseTrace* phase1,
                                  const NoiseTrace* phase2, double t_final,
                                  const IntegratorConfig& icfg) {
  drive.validate();
  icfg.validate();
  if (!(t_final > 0)) throw validation_error("propagate_lambda: t_final must be > 0");
  const NoiseTrace* p2 = drive.correlated_phase ? phase1 : phase2;
  require_cover(phase1, t_final, "phase1");
  require_cover(p2, t_final, "phase2");

  double max_step = icfg.max_step;
  if (max_step == 0) {
    max_step = 1.0 / (20.0 * std::abs(drive.delta));
    const double bw = std::max(trace_bandwidth(phase1), trace_bandwidth(p2));
    if (bw > 0) max_step = std::min(max_step, 1.0 / (20.0 * M_PI * bw));
  }

  // state (a_g, a_e, b_p) with a_p = b_p exp(-i Delta t)
  std::array<cplx, 3> y{1.0, 0.0, 0.0};
  double max_p2 = 0.0;
  const bool paired = phase1 && p2 && p2 != phase1;
  auto rhs = [&](double t, const std::array<cplx, 3>& s, std::array<cplx, 3>& ds) {
    double ph1 = 0.0, ph2 = 0.0;
    if (paired) {
      std::tie(ph1, ph2) = evaluate_pair(*phase1, *p2, t);
    } else {
      if (phase1) ph1 = phase1->value(t);
      ph2 = (p2 == phase1) ? ph1 : (p2 ? p2->value(t) : 0.0);
    }
    const cplx g1 = 0.5 * drive.omega1 * std::polar(1.0, ph1);
    const cplx g2 = 0.5 * drive.omega2 * std::polar(1.0, ph2);
    const cplx rot = std::polar(1.0, drive.delta * t);  // e^{i Delta t}
    ds[0] = -kI * std::conj(g1) * std::conj(rot) * s[2];
    ds[1] = -kI * std::conj(g2) * std::conj(rot) * s[2];
    ds[2] = -kI * rot * (g1 * s[0] + g2 * s[1]);
  };
  ThreeLevelResult r;
  r.steps = rk45<3>(rhs, y, 0.0, t_final, icfg.rel_tol, icfg.abs_tol, max_step,
                    [&](double, const std::array<cplx, 3>& s) {
                      max_p2 = std::max(max_p2, std::norm(s[2]));
                    });
  r.cg = y[0];
  r.ce = y[1];
  r.cr = y[2];  // population left in the detuned level p
  r.max_intermediate_pop = max_p2;
  r.intermediate_pop_warning = max_p2 > 0.01;
  r.norm_drift = std::abs(norm_of(y.data(), 3) - 1.0);
  check_norm(norm_of(y.data(), 3), icfg.abs_tol, "propagate_lambda");
  return r;
}

// --- Monte Carlo ------------------------------------------------------------

namespace {

NoiseTrace make_trace(TraceKind kind, const NoiseModel& model, SynthesisConfig scfg,
                      std::uint64_t seed) {
  scfg.base_seed = seed;
  switch (kind) {
    case TraceKind::Phase: return synth_phase_trace(model, scfg);
    case TraceKind::FrequencyDeviation: return synth_frequency_trace(model, scfg);
    case TraceKind::RelativeIntensity: return synth_intensity_trace(model, scfg);
  }
  throw validation_error("make_trace: bad kind");
}

enum Channel : std::uint64_t { kPhase1 = 0, kPhase2 = 1, kIntensity1 = 2, kIntensity2 = 3 };

std::array<cplx, 2> initial_vector(InitialState s) {
  // Fluctuating-frame initial states; XPlus is the computational basis state.
  const double r = 1.0 / std::sqrt(2.0);
  switch (s) {
    case InitialState::XPlus: return {1.0, 0.0};
    case InitialState::YPlus: return {r, cplx(0.0, r)};
    case InitialState::ZPlus: return {r, -r};
  }
  return {1.0, 0.0};
}

std::array<cplx, 2> rotate_about_x(const std::array<cplx, 2>& v, double angle) {
  // exp(-i angle sigma_x / 2)
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return {c * v[0] - kI * s * v[1], c * v[1] - kI * s * v[0]};
}

double overlap2(const std::array<cplx, 2>& a, const std::array<cplx, 2>& b) {
  return std::norm(std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1]);
}

}  // namespace

MonteCarloResult monte_carlo_error(const DriveConfig& drive, const GateSpec& gate,
                                   const NoiseChannels& noise, std::size_t n_trials,
                                   std::uint64_t base_seed, const IntegratorConfig& icfg,
                                   const SynthesisConfig& scfg, int n_threads) {
  if (n_trials < 2) throw validation_error("monte_carlo_error: n_trials must be >= 2");
  gate.validate();
  icfg.validate();

  std::function<double(std::size_t, double*)> run_trial;

  if (const auto* d1 = std::get_if<OnePhotonDrive>(&drive)) {
    d1->validate();
    const double t_final = gate.gate_time(d1->omega0);
    const double two_n = d1->omega0 * t_final / M_PI;
    const bool gate_multiple = std::abs(two_n - std::round(two_n)) < 1e-6;
    const long m2 = std::lround(two_n);

    if (gate.initial_state == InitialState::XPlus) {
      run_trial = [=](std::size_t trial, double*) {
        const std::uint64_t ts = mix_seed(base_seed, trial);
        std::optional<NoiseTrace> phase, intensity;
        if (noise.phase1 && !noise.phase1->is_zero()) {
          phase = make_trace(TraceKind::Phase, *noise.phase1, scfg, mix_seed(ts, kPhase1));
        }
        if (noise.intensity1 && !noise.intensity1->is_zero()) {
          intensity = make_trace(TraceKind::RelativeIntensity, *noise.intensity1, scfg,
                                 mix_seed(ts, kIntensity1));
        }
        const auto res = propagate_one_photon(d1->omega0, phase ? &*phase : nullptr,
                                              intensity ? &*intensity : nullptr, t_final, icfg);
        if (gate_multiple) {
          // ideal final state is a population state
          return (m2 % 2 != 0) ? 1.0 - std::norm(res.ce) : 1.0 - std::norm(res.cg);
        }
        // fluctuating-frame fidelity at arbitrary gate time
        const double phi_t = phase ? phase->value(t_final) : 0.0;
        const std::array<cplx, 2> psi{std::polar(1.0, 0.5 * phi_t) * res.cg,
                                      std::polar(1.0, -0.5 * phi_t) * res.ce};
        const auto ideal = rotate_about_x({1.0, 0.0}, d1->omega0 * t_final);
        return 1.0 - overlap2(ideal, psi);
      };
    } else {
      if (noise.intensity1 && !noise.intensity1->is_zero()) {
        throw validation_error("monte_carlo_error: YPlus/ZPlus initial states support phase noise only");
      }
      const NoiseModel model = noise.phase1 ? *noise.phase1 : NoiseModel::white(0.0);
      run_trial = [=](std::size_t trial, double*) {
        const std::uint64_t ts = mix_seed(base_seed, trial);
        const NoiseTrace freq =
            make_trace(TraceKind::FrequencyDeviation, model, scfg, mix_seed(ts, kPhase1));
        const auto v0 = initial_vector(gate.initial_state);
        const auto res =
            propagate_one_photon_fluctuating(d1->omega0, freq, v0[0], v0[1], t_final, icfg);
        const auto ideal = rotate_about_x(v0, d1->omega0 * t_final);
        return 1.0 - overlap2(ideal, {res.cg, res.ce});
      };
    }
  } else if (const auto* d2 = std::get_if<TwoPhotonLadderDrive>(&drive)) {
    d2->validate();
    if (gate.initial_state != InitialState::XPlus) {
      throw validation_error("monte_carlo_error: two-photon drive starts from the ground state (XPlus)");
    }
    const double t_final = gate.gate_time(d2->omega_eff());
    const double two_n = d2->omega_eff() * t_final / M_PI;
    if (std::abs(two_n - std::round(two_n)) > 1e-6) {
      throw validation_error("monte_carlo_error: two-photon gates require t_g = 2 pi N / omega_eff");
    }
    const long m2 = std::lround(two_n);
    run_trial = [=](std::size_t trial, double* max_pop) {
      const std::uint64_t ts = mix_seed(base_seed, trial);
      std::optional<NoiseTrace> p1, p2, a1, a2;
      if (noise.phase1 && !noise.phase1->is_zero())
        p1 = make_trace(TraceKind::Phase, *noise.phase1, scfg, mix_seed(ts, kPhase1));
      if (noise.phase2 && !noise.phase2->is_zero())
        p2 = make_trace(TraceKind::Phase, *noise.phase2, scfg, mix_seed(ts, kPhase2));
      if (noise.intensity1 && !noise.intensity1->is_zero())
        a1 = make_trace(TraceKind::RelativeIntensity, *noise.intensity1, scfg,
                        mix_seed(ts, kIntensity1));
      if (noise.intensity2 && !noise.intensity2->is_zero())
        a2 = make_trace(TraceKind::RelativeIntensity, *noise.intensity2, scfg,
                        mix_seed(ts, kIntensity2));
      const auto res = propagate_two_photon(*d2, p1 ? &*p1 : nullptr, p2 ? &*p2 : nullptr,
                                            a1 ? &*a1 : nullptr, a2 ? &*a2 : nullptr,
                                            t_final, icfg);
      if (max_pop) *max_pop = std::max(*max_pop, res.max_intermediate_pop);
      return (m2 % 2 != 0) ? 1.0 - std::norm(res.cr) : 1.0 - std::norm(res.cg);
    };
  } else {
    const auto* dl = std::get_if<LambdaDrive>(&drive);
    dl->validate();
    if (gate.initial_state != InitialState::XPlus) {
      throw validation_error("monte_carlo_error: lambda drive starts from the ground state (XPlus)");
    }
    const double t_final = gate.gate_time(std::abs(dl->omega_eff()));
    // Noise-induced infidelity is scored against the noiseless propagated
    // state: the adiabatic-elimination residuals (~|omega/2 delta|^2) cancel
    // out of the comparison and the global phase drops from the overlap.
    const auto base = propagate_lambda(*dl, nullptr, nullptr, t_final, icfg);
    const std::array<cplx, 3> psi_base{base.cg, base.ce, base.cr};
    run_trial = [=](std::size_t trial, double* max_pop) {
      const std::uint64_t ts = mix_seed(base_seed, trial);
      std::optional<NoiseTrace> p1, p2;
      if (noise.phase1 && !noise.phase1->is_zero())
        p1 = make_trace(TraceKind::Phase, *noise.phase1, scfg, mix_seed(ts, kPhase1));
      if (!dl->correlated_phase) {
        const NoiseModel& m2 = noise.phase2 ? *noise.phase2
                                            : (noise.phase1 ? *noise.phase1 : NoiseModel::white(0.0));
        if (!m2.is_zero())
          p2 = make_trace(TraceKind::Phase, m2, scfg, mix_seed(ts, kPhase2));
      }
      const auto res = propagate_lambda(*dl, p1 ? &*p1 : nullptr, p2 ? &*p2 : nullptr,
                                        t_final, icfg);
      if (max_pop) *max_pop = std::max(*max_pop, res.max_intermediate_pop);
      const cplx ov = std::conj(psi_base[0]) * res.cg + std::conj(psi_base[1]) * res.ce +
                      std::conj(psi_base[2]) * res.cr;
      return 1.0 - std::norm(ov);
    };
  }

  MonteCarloResult out;
  out.per_trial_error.assign(n_trials, 0.0);
  std::vector<double> max_pops;

  int threads = n_threads > 0 ? n_threads : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min<int>(threads, static_cast<int>(n_trials));
  max_pops.assign(threads, 0.0);

  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < n_trials; i += threads) {
          out.per_trial_error[i] = run_trial(i, &max_pops[w]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  for (double p : max_pops) out.max_intermediate_pop = std::max(out.max_intermediate_pop, p);

  const double mean =
      std::accumulate(out.per_trial_error.begin(), out.per_trial_error.end(), 0.0) /
      static_cast<double>(n_trials);

  // batch means with sqrt(n) batches
  const std::size_t n_batches = std::max<std::size_t>(2, static_cast<std::size_t>(std::sqrt(double(n_trials))));
  const std::size_t batch = n_trials / n_batches;
  double var_acc = 0.0;
  double grand = 0.0;
  std::vector<double> bm(n_batches, 0.0);
  for (std::size_t b = 0; b < n_batches; ++b) {
    const std::size_t lo = b * batch;
    const std::size_t hi = (b + 1 == n_batches) ? n_trials : lo + batch;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += out.per_trial_error[i];
    bm[b] = s / static_cast<double>(hi - lo);
    grand += bm[b];
  }
  grand /= static_cast<double>(n_batches);
  for (double v : bm) var_acc += (v - grand) * (v - grand);
  const double std_error =
      std::sqrt(var_acc / (static_cast<double>(n_batches) * (static_cast<double>(n_batches) - 1.0)));

  out.estimate.mean_error = mean;
  out.estimate.std_error = std_error;
  out.estimate.n_trials = n_trials;
  out.estimate.method = ErrorMethod::MonteCarlo;
  return out;
}

}  // namespace lasernoise
