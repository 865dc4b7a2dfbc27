#include "lasernoise/heterodyne.hpp"

#include <algorithm>
#include <cmath>

#include "lasernoise/errors.hpp"
#include "lasernoise/quad.hpp"
#include "lasernoise/special.hpp"

namespace lasernoise {

void HeterodyneConfig::validate() const {
  if (!(delay_td_s > 0)) throw validation_error("HeterodyneConfig: delay_td must be > 0");
  if (!(quad_tolerance > 0)) throw validation_error("HeterodyneConfig: quad_tolerance must be > 0");
  if (tau_max_s < 0) throw validation_error("HeterodyneConfig: tau_max must be >= 0");
}

namespace {

constexpr double kEnvelopeTol = 1e-6;

void flatten(const NoiseModel& m, std::vector<NoiseModel>* out) {
  if (m.kind() == NoiseKind::Composite) {
    for (const auto& t : m.terms()) flatten(t, out);
  } else {
    out->push_back(m);
  }
}

// sin^2(pi f u)/f^2, finite limit (pi u)^2 at f -> 0.
double sin2_over_f2(double f, double u) {
  const double x = M_PI * f * u;
  if (std::abs(x) < 1e-8) {
    const double pu = M_PI * u;
    return pu * pu * (1.0 - x * x / 3.0);
  }
  const double s = std::sin(x);
  return s * s / (f * f);
}

// Oscillation-aware integral of g(f) * sin^2(pi f u) style integrands over
// [a, b]: split at half-period boundaries k/(2u) plus the supplied feature
// boundaries so adaptive GK never sees more than one oscillation per cell
// and never skips narrow spectral features.
double integrate_cells(const std::function<double(double)>& g, double a, double b,
                       double u, double rel_tol,
                       const std::vector<double>& features = {}) {
  if (b <= a) return 0.0;
  const double period = (u > 0) ? 1.0 / (2.0 * std::abs(u)) : (b - a);
  std::vector<double> bounds{a, b};
  for (double x = a + period; x < b; x += period) bounds.push_back(x);
  for (double fb : features) {
    if (fb > a && fb < b) bounds.push_back(fb);
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  double tot = 0.0;
  const double min_width = 1e-12 * (b - a);
  double prev = bounds.front();
  for (std::size_t i = 1; i < bounds.size(); ++i) {
    if (bounds[i] - prev < min_width) continue;  // merge near-coincident bounds
    tot += integrate(g, prev, bounds[i], rel_tol);
    prev = bounds[i];
  }
  return tot;
}

// Quadrature breakpoints covering the structure of a (possibly composite)
// model: cutoffs and bump cores/edges.
std::vector<double> model_feature_bounds(const NoiseModel& m) {
  std::vector<double> b;
  std::function<void(const NoiseModel&)> walk = [&](const NoiseModel& x) {
    switch (x.kind()) {
      case NoiseKind::BandLimitedWhite:
        b.push_back(0.5 * x.fc());
        b.push_back(x.fc());
        break;
      case NoiseKind::ServoBump:
        for (double k : {-15.0, -5.0, -1.5, 0.0, 1.5, 5.0, 15.0}) {
          const double f = x.fg() + k * x.sigma_g();
          if (f > 0) b.push_back(f);
        }
        break;
      case NoiseKind::Composite:
        for (const auto& t : x.terms()) walk(t);
        break;
      default:
        break;
    }
  };
  walk(m);
  return b;
}

// L for one Gaussian servo-bump pair: 4 int_0^inf S_b sin^2(pi f u)/f^2 df.
double bump_structure(const NoiseModel& b, double u) {
  u = std::abs(u);
  if (u == 0.0 || b.hg() == 0.0) return 0.0;
  const double lo = std::max(0.0, b.fg() - 15.0 * b.sigma_g());
  const double hi = b.fg() + 15.0 * b.sigma_g();
  auto g = [&](double f) { return psd_delta_nu(b, f) * sin2_over_f2(f, u); };
  return 4.0 * integrate_cells(g, lo, hi, u, 1e-12, model_feature_bounds(b));
}

double bump_structure_limit(const NoiseModel& b) {
  // L_inf = 2 int_0^inf S_b/f^2 df; requires the bump to be clear of f = 0.
  if (b.hg() == 0.0) return 0.0;
  if (b.fg() - 8.0 * b.sigma_g() <= 0.0) {
    throw numerical_error("phase_structure_limit: bump reaches f = 0; tail power diverges");
  }
  const double lo = std::max(1e-12 * b.fg(), b.fg() - 15.0 * b.sigma_g());
  const double hi = b.fg() + 15.0 * b.sigma_g();
  auto g = [&](double f) { return psd_delta_nu(b, f) / (f * f); };
  return 2.0 * integrate(g, lo, hi, 1e-12);
}

double blw_structure(double h0, double fc, double u) {
  u = std::abs(u);
  if (u == 0.0 || h0 == 0.0) return 0.0;
  const double x = M_PI * fc * u;
  const double s = std::sin(x);
  return 4.0 * h0 * (M_PI * u * sine_integral(2.0 * x) - s * s / fc);
}

}  // namespace

double phase_structure(const NoiseModel& model, double u) {
  u = std::abs(u);
  if (u == 0.0) return 0.0;
  switch (model.kind()) {
    case NoiseKind::White:
      return 2.0 * M_PI * M_PI * model.h0() * u;
    case NoiseKind::BandLimitedWhite:
      return blw_structure(model.h0(), model.fc(), u);
    case NoiseKind::ServoBump:
      return bump_structure(model, u);
    case NoiseKind::Composite: {
      double tot = 0.0;
      for (const auto& t : model.terms()) tot += phase_structure(t, u);
      return tot;
    }
  }
  return 0.0;
}

double phase_structure_quadrature(const NoiseModel& model, double u) {
  u = std::abs(u);
  if (u == 0.0) return 0.0;
  // support end beyond which only pure-white terms remain
  std::vector<NoiseModel> comps;
  flatten(model, &comps);
  double support_end = 0.0, h0_white = 0.0;
  for (const auto& c : comps) {
    switch (c.kind()) {
      case NoiseKind::White: h0_white += c.h0(); break;
      case NoiseKind::BandLimitedWhite: support_end = std::max(support_end, c.fc()); break;
      case NoiseKind::ServoBump:
        support_end = std::max(support_end, c.fg() + 15.0 * c.sigma_g());
        break;
      default: break;
    }
  }
  const double f_end = std::max(support_end, 40.0 / u);
  auto g = [&](double f) { return psd_delta_nu(model, f) * sin2_over_f2(f, u); };
  double val = 4.0 * integrate_cells(g, 0.0, f_end, u, 1e-13, model_feature_bounds(model));
  if (h0_white > 0.0) {
    // analytic white tail: 4 h0 int_F^inf sin^2(pi f u)/f^2 df
    const double b = 2.0 * M_PI * u;
    const double cos_tail = std::cos(b * f_end) / f_end -
                            b * (M_PI / 2 - sine_integral(b * f_end));
    val += 2.0 * h0_white * (1.0 / f_end - cos_tail);
  }
  return val;
}

PhaseStructureLimit phase_structure_limit(const NoiseModel& model) {
  switch (model.kind()) {
    case NoiseKind::White:
      return {0.0, model.h0() == 0.0};
    case NoiseKind::BandLimitedWhite:
      return {0.0, model.h0() == 0.0};
    case NoiseKind::ServoBump:
      return {bump_structure_limit(model), true};
    case NoiseKind::Composite: {
      double tot = 0.0;
      bool finite = true;
      for (const auto& t : model.terms()) {
        const auto r = phase_structure_limit(t);
        finite = finite && r.finite;
        if (r.finite) tot += r.value;
      }
      return {tot, finite};
    }
  }
  return {0.0, true};
}

double autocorr_RE(const NoiseModel& model, double tau) {
  return std::exp(-phase_structure(model, tau));
}

double self_het_autocorr(const NoiseModel& model, double tau, double td) {
  if (!(td > 0)) throw validation_error("self_het_autocorr: td must be > 0");
  tau = std::abs(tau);
  const double d = 2.0 * phase_structure(model, tau) + 2.0 * phase_structure(model, td) -
                   phase_structure(model, std::abs(tau - td)) -
                   phase_structure(model, tau + td);
  return std::exp(-d);
}

namespace {

// Decay margins after which the transformable part of the envelope has
// settled below kEnvelopeTol, per model component.
double settle_margin(const NoiseModel& model, bool self_het) {
  std::vector<NoiseModel> comps;
  flatten(model, &comps);
  double margin = 0.0;
  for (const auto& c : comps) {
    switch (c.kind()) {
      case NoiseKind::White:
        break;  // S_E decays exponentially; S_i settles exactly at td
      case NoiseKind::BandLimitedWhite:
        if (self_het && c.h0() > 0) {
          // residual oscillation amplitude ~ 4 h0/(pi fc^2 u)
          margin = std::max(margin, 4.0 * c.h0() / (M_PI * kEnvelopeTol * c.fc() * c.fc()));
          margin = std::max(margin, 4.0 / c.fc());
        }
        break;
      case NoiseKind::ServoBump:
        if (c.hg() > 0) margin = std::max(margin, 1.3 / c.sigma_g());
        break;
      default:
        break;
    }
  }
  return margin;
}

double white_h0_total(const NoiseModel& model) {
  std::vector<NoiseModel> comps;
  flatten(model, &comps);
  double h0 = 0.0;
  for (const auto& c : comps)
    if (c.kind() == NoiseKind::White) h0 += c.h0();
  return h0;
}

std::vector<double> sample_uniform(const std::function<double(double)>& f, double a,
                                   double b, std::size_t n_panels) {
  // n_panels even; returns n_panels+1 samples
  std::vector<double> p(n_panels + 1);
  const double h = (b - a) / static_cast<double>(n_panels);
  for (std::size_t k = 0; k <= n_panels; ++k) p[k] = f(a + h * static_cast<double>(k));
  return p;
}

constexpr std::size_t kPanels = 4096;

}  // namespace

LineshapeEvaluator::LineshapeEvaluator(const NoiseModel& model,
                                       const HeterodyneConfig& cfg) {
  cfg.validate();
  const auto lim = phase_structure_limit(model);
  delta_weight_ = lim.finite ? std::exp(-lim.value) : 0.0;

  double tau_max = cfg.tau_max_s;
  if (tau_max == 0.0) {
    const double decay_target = -std::log(0.1 * kEnvelopeTol);
    const double h0 = white_h0_total(model);
    double t_white = 0.0;
    if (h0 > 0) t_white = decay_target / (2.0 * M_PI * M_PI * h0);
    // band-limited white decays at the same exponential rate once u >> 1/fc
    std::vector<NoiseModel> comps;
    flatten(model, &comps);
    for (const auto& c : comps) {
      if (c.kind() == NoiseKind::BandLimitedWhite && c.h0() > 0) {
        t_white = std::max(t_white, decay_target / (2.0 * M_PI * M_PI * c.h0()) + 2.0 / c.fc());
      }
    }
    tau_max = t_white + settle_margin(model, false);
    if (tau_max == 0.0) tau_max = 1e-6;  // zero spectrum: pure carrier
  }
  if (std::abs(autocorr_RE(model, tau_max) - delta_weight_) > kEnvelopeTol) {
    throw numerical_error("lineshape_SE: autocorrelation envelope above the carrier remnant exceeds 1e-6 at tau_max");
  }
  tau_max_ = tau_max;
  a_ = 0.0;
  h_ = tau_max / static_cast<double>(kPanels);
  p_ = sample_uniform([&](double t) { return autocorr_RE(model, t) - delta_weight_; },
                      0.0, tau_max, kPanels);
}

double LineshapeEvaluator::continuous(double f) const {
  FilonCosineTransform tr(a_, h_, p_);
  return 2.0 * tr.at(f);
}

SelfHetEvaluator::SelfHetEvaluator(const NoiseModel& model,
                                   const HeterodyneConfig& cfg) {
  cfg.validate();
  const double td = cfg.delay_td_s;
  delta_weight_ = std::exp(-2.0 * phase_structure(model, td));

  double tau_max = cfg.tau_max_s;
  if (tau_max == 0.0) {
    double margin = settle_margin(model, true);
    tau_max = td + margin;
    for (int tries = 0; tries < 4; ++tries) {
      if (std::abs(self_het_autocorr(model, tau_max, td) - delta_weight_) <= kEnvelopeTol)
        break;
      margin = std::max(margin, td) * 2.0;
      tau_max = td + margin;
    }
  }
  if (std::abs(self_het_autocorr(model, tau_max, td) - delta_weight_) > kEnvelopeTol) {
    throw numerical_error("self_het_spectrum: autocorrelation envelope exceeds 1e-6 at tau_max");
  }
  tau_max_ = tau_max;

  // Grid nodes pinned to the kink at tau = td (|tau - td| enters R_i).
  auto env = [&](double t) { return self_het_autocorr(model, t, td) - delta_weight_; };
  const double first_end = std::min(td, tau_max);
  segments_.push_back({0.0, first_end / kPanels,
                       sample_uniform(env, 0.0, first_end, kPanels)});
  if (tau_max > td * (1.0 + 1e-12)) {
    segments_.push_back({td, (tau_max - td) / kPanels,
                         sample_uniform(env, td, tau_max, kPanels)});
  }
}

double SelfHetEvaluator::continuous(double f) const {
  double tot = 0.0;
  for (const auto& s : segments_) {
    FilonCosineTransform tr(s.a, s.h, s.p);
    tot += tr.at(f);
  }
  return 2.0 * tot;
}

namespace {

SpectrumCurve curve_from(const std::vector<double>& grid,
                         const std::function<double(double)>& value, bool has_delta,
                         double delta_weight) {
  SpectrumCurve c;
  c.frequencies_hz = grid;
  c.values.reserve(grid.size());
  for (double f : grid) c.values.push_back(std::max(0.0, value(f)));
  c.normalization = SpectrumNormalization::UnitIntegral;
  c.has_delta_at_zero = has_delta;
  c.delta_weight = delta_weight;
  return c;
}

}  // namespace

SpectrumCurve lineshape_SE(const NoiseModel& model, const HeterodyneConfig& cfg,
                           LineshapeMode mode) {
  cfg.validate();
  if (cfg.freq_grid_hz.empty()) throw validation_error("lineshape_SE: empty frequency grid");

  if (mode == LineshapeMode::Approximate) {
    std::vector<NoiseModel> comps;
    flatten(model, &comps);
    double h0 = 0.0, sg_total = 0.0;
    std::vector<NoiseModel> bumps;
    for (const auto& c : comps) {
      if (c.kind() == NoiseKind::White) {
        h0 += c.h0();
      } else if (c.kind() == NoiseKind::ServoBump) {
        bumps.push_back(c);
        sg_total += servo_bump_power(c.hg(), c.sigma_g(), c.fg()).value;
      } else if (!c.is_zero()) {
        throw validation_error("lineshape_SE: approximate mode supports white + servo bumps only");
      }
    }
    auto value = [&](double f) {
      double v = 0.0;
      if (h0 > 0) v += h0 / (f * f + M_PI * M_PI * h0 * h0);
      for (const auto& b : bumps) {
        v += psd_delta_nu(b, f) / (b.fg() * b.fg());
      }
      return v;
    };
    const bool has_delta = (h0 == 0.0);
    return curve_from(cfg.freq_grid_hz, value, has_delta,
                      has_delta ? std::max(0.0, 1.0 - sg_total) : 0.0);
  }

  LineshapeEvaluator ev(model, cfg);
  const bool has_delta = ev.delta_weight() > 1e-300;
  return curve_from(cfg.freq_grid_hz, [&](double f) { return ev.continuous(f); },
                    has_delta, has_delta ? ev.delta_weight() : 0.0);
}

double si_white_continuous(double h0, double td, double f) {
  if (h0 <= 0.0) return 0.0;
  const double w = std::exp(-4.0 * M_PI * M_PI * h0 * td);
  const double lorentz = 2.0 * h0 / (f * f + std::pow(2.0 * M_PI * h0, 2));
  double ratio;  // (2 pi h0 / f) sin(2 pi f td), finite at f = 0
  const double x = 2.0 * M_PI * f * td;
  if (std::abs(x) < 1e-6) {
    ratio = 4.0 * M_PI * M_PI * h0 * td * (1.0 - x * x / 6.0);
  } else {
    ratio = (2.0 * M_PI * h0 / f) * std::sin(x);
  }
  return lorentz * (1.0 - w * (std::cos(x) + ratio));
}

double si_composite_model(double h0, const std::vector<BumpParams>& bumps,
                          double td, double f) {
  double v = si_white_continuous(h0, td, f);
  const double st = std::sin(M_PI * f * td);
  for (const auto& b : bumps) {
    const double am = (f - b.fg) / b.sigma_g, ap = (f + b.fg) / b.sigma_g;
    v += 4.0 * b.hg / (b.fg * b.fg) * st * st *
         (std::exp(-0.5 * am * am) + std::exp(-0.5 * ap * ap));
  }
  return v;
}

SpectrumCurve self_het_spectrum(const NoiseModel& model, const HeterodyneConfig& cfg,
                                HetMode mode) {
  cfg.validate();
  if (cfg.freq_grid_hz.empty()) throw validation_error("self_het_spectrum: empty frequency grid");
  const double td = cfg.delay_td_s;

  if (mode == HetMode::WeakNoise) {
    std::vector<NoiseModel> comps;
    flatten(model, &comps);
    double h0 = 0.0, l_rest = 0.0;
    std::vector<NoiseModel> rest;
    for (const auto& c : comps) {
      if (c.kind() == NoiseKind::White) {
        h0 += c.h0();
      } else if (!c.is_zero()) {
        rest.push_back(c);
        l_rest += phase_structure(c, td);
      }
    }
    const double weight =
        std::exp(-4.0 * M_PI * M_PI * h0 * td) * std::max(0.0, 1.0 - 2.0 * l_rest);
    auto value = [&](double f) {
      double v = si_white_continuous(h0, td, f);
      const double st = std::sin(M_PI * f * td);
      for (const auto& c : rest) {
        if (c.kind() == NoiseKind::ServoBump) {
          // fitting form: S_phi approximated by S/fg^2 across the bump
          v += 4.0 * st * st * psd_delta_nu(c, f) / (c.fg() * c.fg());
        } else if (f != 0.0) {
          v += 4.0 * st * st * psd_delta_nu(c, f) / (f * f);
        }
      }
      return v;
    };
    return curve_from(cfg.freq_grid_hz, value, true, weight);
  }

  SelfHetEvaluator ev(model, cfg);
  return curve_from(cfg.freq_grid_hz, [&](double f) { return ev.continuous(f); }, true,
                    ev.delta_weight());
}

QuasistaticSpectra quasistatic_spectra(double h0, double fc, double td, double f) {
  if (!(h0 > 0) || !(fc > 0) || !(td > 0)) {
    throw validation_error("quasistatic_spectra: h0, fc, td must be > 0");
  }
  const double fc_threshold = M_PI * M_PI * h0 / (8.0 * std::log(2.0));
  if (fc >= fc_threshold) {
    throw numerical_error("quasistatic_spectra: fc above the compressed-regime threshold pi^2 h0/(8 ln 2); use the white-noise forms");
  }
  QuasistaticSpectra out;
  out.se = std::exp(-f * f / (4.0 * h0 * fc)) / std::sqrt(16.0 * M_PI * h0 * fc);
  const double denom = 16.0 * M_PI * M_PI * M_PI * h0 * td * td * fc * fc * fc;
  out.si = std::sqrt(3.0 / denom) *
           std::exp(-3.0 * f * f / (16.0 * M_PI * M_PI * h0 * td * td * fc * fc * fc));
  return out;
}

}  // namespace lasernoise
