#pragma once

#include <array>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "lasernoise/spectra.hpp"

namespace lasernoise {

enum class Averaging { InitialX, StateAveraged };

enum class ErrorMethod { Analytic, MonteCarlo, Quadrature };

// Gate-error value. std_error is zero for analytic/quadrature results.
struct ErrorEstimate {
  double mean_error = 0;
  double std_error = 0;
  std::size_t n_trials = 0;
  ErrorMethod method = ErrorMethod::Analytic;
};

struct AnalyticError {
  double value = 0;
  bool weak_noise_warning = false;
  bool validity_warning = false;
};

// N must be a positive multiple of 1/2.
bool is_half_integer(double n);

// One-photon gates at t = 2 pi N / Omega0.
// White noise:   E = pi^3 h0 N / Omega0   (InitialX),  4/3 of that state-averaged.
AnalyticError error_white_1p(double h0, double n, double omega0, Averaging avg);

// Gaussian servo bump of integrated phase power s_g centered at fg; switches
// to the resonant limit s_g (pi N)^2/4 (or /3) within |2 pi fg - Omega0| <
// 1e-6 Omega0.
AnalyticError error_servo_1p(double sg, double fg, double n, double omega0, Averaging avg);

// Two-photon ladder gates at t = 2 pi N / Omega_tilde0: contributions from
// the two lasers are additive.
AnalyticError error_white_2p(double h1, double h2, double n, double omega_tilde0, Averaging avg);
AnalyticError error_servo_2p(double sg1, double fg1, double sg2, double fg2, double n,
                             double omega_tilde0, Averaging avg);

// Band-limited white noise, exact Si/Ci closed form, y = 2 pi fc / Omega0.
// validity_warning marks the known breakdown for integer N when
// fc < 1.43 h0 (and fc below the Rabi frequency).
AnalyticError error_bandlimited_1p(double h0, double fc, double n, double omega0,
                                   Averaging avg);

// Quasistatic (Gaussian-distributed static detuning) gate errors.
AnalyticError error_quasistatic_1p(double h0, double fc, double n, double omega0,
                                   Averaging avg);
AnalyticError error_quasistatic_2p(double h1, double fc1, double h2, double fc2, double n,
                                   double omega_tilde0, Averaging avg);

// Quasistatic intensity noise: E = (pi N)^2 sum(sigma^2)/4, independent of
// the Rabi frequency. One variance per laser.
AnalyticError error_intensity(const std::vector<double>& sigma2_list, double n);

// --- Appendix-style general machinery -------------------------------------

struct GeneralErrorResult {
  double value = 0;
  ErrorMethod method = ErrorMethod::Quadrature;
  bool smoothness_warning = false;  // set for caller-supplied tabulated spectra
};

using PsdFn = std::function<double(double)>;

// Gate error for arbitrary gate time t_g by numerical quadrature of the
// weak-noise density-matrix integrals. At t_g = 2 pi N/Omega0 this evaluates
// the dedicated gate-time integral (InitialX or StateAveraged); at other
// times only InitialX is defined. The 2 pi f = Omega0 point is removable and
// is crossed by symmetric excision plus the analytic even-part correction.
GeneralErrorResult error_general(const PsdFn& psd, double omega0, double t_g,
                                 Averaging avg, bool tabulated_psd = false);
// Overload that exploits model structure (quadrature breakpoints at bump
// and cutoff features).
GeneralErrorResult error_general(const NoiseModel& model, double omega0, double t_g,
                                 Averaging avg);

// sigma_x / sigma_y Bloch coefficients of <rho(t)> for the initial state
// (1+sigma_x)/2 under weak noise. Zero psd gives (cos(Omega0 t)/2, sin/2).
std::pair<double, double> rho_evolution_weak_noise(const PsdFn& psd, double omega0,
                                                   double t);

// --- Fidelity measures ------------------------------------------------------

using Unitary2 = std::array<std::complex<double>, 4>;  // row-major 2x2

enum class FidelityMeasure { Standard, TraceOverlap };

// Standard: (n + |Tr(U0^dag U)|^2)/(n(n+1)) with n = 2.
// TraceOverlap: |Tr(U0^dag U)|^2/4.
// Inputs must be unitary to 1e-10 (validation_error otherwise).
double fidelity_operator(const Unitary2& u0, const Unitary2& u, FidelityMeasure measure);

}  // namespace lasernoise
