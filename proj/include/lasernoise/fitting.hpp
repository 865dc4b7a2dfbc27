#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lasernoise/heterodyne.hpp"
#include "lasernoise/spectra.hpp"

namespace lasernoise {

// Measured (or synthetic) self-heterodyne spectrum after ingestion:
// frequency axis recentered on the dominant peak.
struct SpectrumRecord {
  std::vector<double> frequencies_hz;  // strictly increasing, centered
  std::vector<double> psd;             // >= 0; analyzer units until normalized
  double rbw_hz = 0;
  double delay_td_s = 0;
  double center_found_hz = 0;
  bool normalization_applied = false;
};

// Central-peak model S = s_p sigma^(2a-1) / (f^2 + pi^2 sigma^2)^a.
struct PeakFit {
  double alpha = 0;   // > 1/2
  double sigma = 0;   // Hz
  double s_p = 0;
  double fwhm = 0;    // 2 pi sigma sqrt(2^(1/alpha) - 1)
};

// Analytic frequency integral of the peak model (independent of sigma):
// s_p pi^(3/2 - 2 alpha) Gamma(alpha - 1/2)/Gamma(alpha).
double peak_integrated_power(const PeakFit& fit);

struct FittedBump {
  double hg = 0;       // Hz^2/Hz
  double sigma_g = 0;  // Hz
  double fg = 0;       // Hz
  double s_g = 0;      // recomputed from (hg, sigma_g, fg), never fit directly
};

struct NoiseFit {
  double h0 = 0;
  std::vector<FittedBump> bumps;  // sorted by fg
  double residual_norm = 0;       // rms log residual
  std::vector<double> covariance; // row-major over (h0, then hg/sigma_g/fg per bump)
  bool degenerate_bump_warning = false;

  NoiseModel to_noise_model() const;
};

// Raw tabular input: locates the dominant peak (parabolic interpolation of
// the log psd around the maximum) and recenters the frequency axis.
SpectrumRecord ingest_spectrum(const std::vector<double>& freq_hz,
                               const std::vector<double>& psd, double rbw_hz,
                               double td_s);

// Least-squares fit of the central peak on log scale over |f| <= window.
PeakFit fit_peak(const SpectrumRecord& record, double window_hz = 25e3);

// Rescales the record so that peak power (analytic) + wing power (trapezoid
// outside the peak window) equals 1.
void normalize_record(SpectrumRecord* record, const PeakFit& peak, double window_hz = 25e3);

// Nonlinear least squares of the white + n-bump self-heterodyne model on
// log psd, excluding |f| < peak_exclude_hz. Multi-start over bump-center
// candidates from the smoothed residual above the white floor.
NoiseFit fit_noise_model(const SpectrumRecord& record, std::size_t n_bumps,
                         double peak_exclude_hz = 25e3);

struct BumpBudget {
  double fg = 0;
  double s_g = 0;
  double error = 0;   // InitialX gate error of this bump alone
  bool flagged = false;  // s_g >= 4 pi h0 / (N Omega0)
};

struct ErrorBudget {
  double white_error = 0;
  double sg_threshold = 0;
  std::vector<BumpBudget> bumps;
  // Rabi-frequency (Omega0/2pi) intervals to avoid, one per bump.
  std::vector<std::pair<double, double>> avoid_rabi_hz;
};

// Gate-error budget of a fitted noise model for a 2 pi N rotation at omega0.
ErrorBudget error_budget(const NoiseFit& fit, double omega0, double n);

}  // namespace lasernoise
