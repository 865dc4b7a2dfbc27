#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace lasernoise {

// All power spectral densities in this library are two-sided. One-sided
// conventions differ by a factor of 2; the conversion is never applied
// silently anywhere.
enum class SpectralConvention { TwoSided };

enum class NoiseKind { White, BandLimitedWhite, ServoBump, Composite };

// Parametric model of the frequency-noise PSD S_dnu(f) [Hz^2/Hz]:
//   White            S = h0
//   BandLimitedWhite S = h0 for |f| <= fc, else 0
//   ServoBump        S = hg exp(-(f-fg)^2/2 sg^2) + hg exp(-(f+fg)^2/2 sg^2)
//   Composite        sum of terms
// The same type doubles as a relative-intensity PSD S_alpha(f) [1/Hz] for
// intensity-noise synthesis (h0 then carries units of seconds).
class NoiseModel {
 public:
  static NoiseModel white(double h0);
  static NoiseModel band_limited_white(double h0, double fc);
  static NoiseModel servo_bump(double hg, double sigma_g, double fg);
  static NoiseModel composite(std::vector<NoiseModel> terms);

  NoiseKind kind() const { return kind_; }
  double h0() const { return h0_; }
  double fc() const { return fc_; }
  double hg() const { return hg_; }
  double sigma_g() const { return sigma_g_; }
  double fg() const { return fg_; }
  const std::vector<NoiseModel>& terms() const { return terms_; }

  bool is_zero() const;

  nlohmann::json to_json() const;
  static NoiseModel from_json(const nlohmann::json& j);

 private:
  NoiseModel() = default;
  NoiseKind kind_ = NoiseKind::White;
  double h0_ = 0, fc_ = 0, hg_ = 0, sigma_g_ = 0, fg_ = 0;
  std::vector<NoiseModel> terms_;
};

// S_dnu(f); even in f, total on any valid model.
double psd_delta_nu(const NoiseModel& model, double f);

// S_phi(f) = S_dnu(f)/f^2; singular at f = 0 (throws validation_error).
double psd_phi(const NoiseModel& model, double f);

// Integrated dimensionless phase power of one servo-bump pair,
// s_g = sqrt(8 pi) sigma_g h_g / f_g^2.  Valid for narrow bumps; the flag is
// set when sigma_g > fg/3, where the f^2 -> fg^2 replacement degrades.
struct ServoBumpPower {
  double value;
  bool narrow_bump_warning;
};
ServoBumpPower servo_bump_power(double hg, double sigma_g, double fg);

// Crossover frequency f_x solving 2 int_{fx}^inf S_dnu(f)/f^2 df = 1/2.
// Pure white noise returns the closed form 4 h0 exactly; everything else is
// solved by bisection (crossover_fx_bisection exposes that path directly).
// Throws numerical_error if the criterion is unreachable.
double crossover_fx(const NoiseModel& model);
double crossover_fx_bisection(const NoiseModel& model);

// Two-sided tail integral 2 int_{fx}^inf S_dnu(f)/f^2 df.
double phase_power_above(const NoiseModel& model, double fx);

// sigma_dnu^2 = int_-inf^inf S_dnu(f) df. Unbounded white noise diverges
// (numerical_error); BandLimitedWhite is exactly 2 h0 fc.
double variance_delta_nu(const NoiseModel& model);

}  // namespace lasernoise
