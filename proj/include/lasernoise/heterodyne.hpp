#pragma once

#include <vector>

#include "lasernoise/spectra.hpp"

namespace lasernoise {

struct HeterodyneConfig {
  double delay_td_s = 0;
  double shift_nu_s_hz = 0;  // beat-note shift; spectra are recentered, kept as metadata
  std::vector<double> freq_grid_hz;
  double tau_max_s = 0;  // 0 = choose automatically from the envelope criterion
  double quad_tolerance = 1e-10;
  void validate() const;
};

enum class SpectrumNormalization { UnitIntegral, CarrierOmitted, Raw };

// Continuous spectrum samples plus an optional symbolic delta at f = 0.
// Deltas are never rendered as tall bins.
struct SpectrumCurve {
  std::vector<double> frequencies_hz;
  std::vector<double> values;
  SpectrumNormalization normalization = SpectrumNormalization::UnitIntegral;
  bool has_delta_at_zero = false;
  double delta_weight = 0.0;
};

// L(u) = 2 int_-inf^inf S_dnu(f) sin^2(pi f u)/f^2 df = 2[R_phi(0)-R_phi(u)].
// Closed forms for white / band-limited white; Gauss-Kronrod for bumps.
double phase_structure(const NoiseModel& model, double u);
// Fully numeric evaluation (oscillation-aware cell quadrature); used to
// validate the closed-form paths.
double phase_structure_quadrature(const NoiseModel& model, double u);
// u -> inf limit (finite only when the model has no white-like component).
// Second output reports whether the limit is finite.
struct PhaseStructureLimit {
  double value;
  bool finite;
};
PhaseStructureLimit phase_structure_limit(const NoiseModel& model);

// R_E(tau)/(|E0|^2/2) = exp(-L(tau)), carrier factor removed (nu0 = 0).
double autocorr_RE(const NoiseModel& model, double tau);

// R_i(tau) = exp(-[2L(tau) + 2L(td) - L(|tau-td|) - L(tau+td)]),
// normalized so R_i(0) = 1.
double self_het_autocorr(const NoiseModel& model, double tau, double td);

enum class LineshapeMode { Exact, Approximate };
enum class HetMode { Exact, WeakNoise };

// Laser lineshape 2 S_E(f)/|E0|^2 (unit integral). Exact mode transforms
// R_E numerically; Approximate mode uses the white-noise Lorentzian /
// white+bump composite closed forms where they exist.
SpectrumCurve lineshape_SE(const NoiseModel& model, const HeterodyneConfig& cfg,
                           LineshapeMode mode = LineshapeMode::Exact);

// Self-heterodyne spectrum S_i(f) (unit integral including the delta term).
SpectrumCurve self_het_spectrum(const NoiseModel& model, const HeterodyneConfig& cfg,
                                HetMode mode);

// Point evaluators used by tests and by the grid-based wrappers above.
class SelfHetEvaluator {
 public:
  SelfHetEvaluator(const NoiseModel& model, const HeterodyneConfig& cfg);
  double continuous(double f) const;
  double delta_weight() const { return delta_weight_; }
  double tau_max() const { return tau_max_; }

 private:
  struct Segment {
    double a, h;
    std::vector<double> p;
  };
  std::vector<Segment> segments_;
  double delta_weight_;
  double tau_max_;
};

class LineshapeEvaluator {
 public:
  LineshapeEvaluator(const NoiseModel& model, const HeterodyneConfig& cfg);
  double continuous(double f) const;
  double delta_weight() const { return delta_weight_; }
  double tau_max() const { return tau_max_; }

 private:
  double a_, h_;
  std::vector<double> p_;
  double delta_weight_;
  double tau_max_;
};

// Continuous part of the white-noise self-heterodyne closed form; the
// delta term carries weight exp(-4 pi^2 h0 td) and is accounted separately.
double si_white_continuous(double h0, double td, double f);

// White + Gaussian-bump composite fitting form (continuous part): white
// closed form plus 4 hg/f^2 sin^2(pi f td) Gaussians at +-fg per bump.
struct BumpParams {
  double hg, sigma_g, fg;
};
double si_composite_model(double h0, const std::vector<BumpParams>& bumps,
                          double td, double f);

struct QuasistaticSpectra {
  double se;  // 2 S_E(f)/|E0|^2 convention? No: S_E with |E0|^2 = 1
  double si;
};
// Compressed-regime Gaussian forms; requires fc < pi^2 h0 / (8 ln 2),
// otherwise throws numerical_error (use the white-noise forms instead).
QuasistaticSpectra quasistatic_spectra(double h0, double fc, double td, double f);

}  // namespace lasernoise
