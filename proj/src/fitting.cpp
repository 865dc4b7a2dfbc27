#include "lasernoise/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lasernoise/analytic.hpp"
#include "lasernoise/errors.hpp"
#include "lasernoise/lm.hpp"

namespace lasernoise {

double peak_integrated_power(const PeakFit& fit) {
  return fit.s_p * std::pow(M_PI, 1.5 - 2.0 * fit.alpha) *
         std::tgamma(fit.alpha - 0.5) / std::tgamma(fit.alpha);
}

NoiseModel NoiseFit::to_noise_model() const {
  std::vector<NoiseModel> terms;
  terms.push_back(NoiseModel::white(h0));
  for (const auto& b : bumps) terms.push_back(NoiseModel::servo_bump(b.hg, b.sigma_g, b.fg));
  return NoiseModel::composite(std::move(terms));
}

namespace {

double safe_log(double v) { return std::log(std::max(v, 1e-300)); }

}  // namespace

SpectrumRecord ingest_spectrum(const std::vector<double>& freq_hz,
                               const std::vector<double>& psd, double rbw_hz,
                               double td_s) {
  if (freq_hz.size() != psd.size()) throw validation_error("ingest_spectrum: column length mismatch");
  if (freq_hz.size() < 50) throw validation_error("ingest_spectrum: need at least 50 rows");
  if (!(td_s > 0)) throw validation_error("ingest_spectrum: delay td must be > 0");
  for (std::size_t i = 0; i < freq_hz.size(); ++i) {
    if (i > 0 && !(freq_hz[i] > freq_hz[i - 1])) {
      throw validation_error("ingest_spectrum: frequencies must be strictly increasing");
    }
    if (!(psd[i] >= 0) || !std::isfinite(psd[i])) {
      throw validation_error("ingest_spectrum: psd values must be finite and >= 0");
    }
  }

  const std::size_t n = psd.size();
  const std::size_t imax = static_cast<std::size_t>(
      std::max_element(psd.begin(), psd.end()) - psd.begin());
  if (imax < 2 || imax + 2 >= n) {
    throw numerical_error("ingest_spectrum: no dominant interior peak");
  }
  // prominence check against the window edges
  const double edge = std::max(psd.front(), psd.back());
  if (!(psd[imax] > 2.0 * std::max(edge, 1e-300))) {
    throw numerical_error("ingest_spectrum: no dominant interior peak");
  }

  // parabolic interpolation of log psd around the maximum
  const double l0 = safe_log(psd[imax - 1]), l1 = safe_log(psd[imax]), l2 = safe_log(psd[imax + 1]);
  const double denom = l0 - 2.0 * l1 + l2;
  double shift = 0.0;
  if (denom < 0) shift = 0.5 * (l0 - l2) / denom;
  shift = std::clamp(shift, -1.0, 1.0);
  const double h_local = 0.5 * (freq_hz[imax + 1] - freq_hz[imax - 1]);
  const double center = freq_hz[imax] + shift * h_local;

  SpectrumRecord rec;
  rec.frequencies_hz.reserve(n);
  for (double f : freq_hz) rec.frequencies_hz.push_back(f - center);
  rec.psd = psd;
  rec.rbw_hz = rbw_hz;
  rec.delay_td_s = td_s;
  rec.center_found_hz = center;
  return rec;
}

PeakFit fit_peak(const SpectrumRecord& record, double window_hz) {
  std::vector<double> f, y;
  double peak_val = 0.0;
  for (std::size_t i = 0; i < record.frequencies_hz.size(); ++i) {
    if (std::abs(record.frequencies_hz[i]) <= window_hz && record.psd[i] > 0) {
      f.push_back(record.frequencies_hz[i]);
      y.push_back(std::log(record.psd[i]));
      peak_val = std::max(peak_val, record.psd[i]);
    }
  }
  if (f.size() < 10) throw validation_error("fit_peak: too few points inside the window");

  // initial width from the half-maximum crossing; flat data has none
  double half_width = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (std::exp(y[i]) >= 0.5 * peak_val) half_width = std::max(half_width, std::abs(f[i]));
  }
  if (!(half_width > 0) || half_width >= window_hz * 0.999) {
    throw numerical_error("fit_peak: no resolved peak inside the window");
  }

  // params: (ln s_p, ln sigma, ln(alpha - 1/2)); model on log scale
  auto model_log = [](const std::vector<double>& p, double fi) {
    const double sp = std::exp(p[0]), sigma = std::exp(p[1]);
    const double alpha = 0.5 + std::exp(p[2]);
    return std::log(sp) + (2.0 * alpha - 1.0) * std::log(sigma) -
           alpha * std::log(fi * fi + M_PI * M_PI * sigma * sigma);
  };
  auto residuals = [&](const std::vector<double>& p) {
    std::vector<double> r(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) r[i] = model_log(p, f[i]) - y[i];
    return r;
  };

  const double alpha0 = 1.0;
  const double sigma0 = std::max(2.0 * half_width / (2.0 * M_PI), 1e-3);
  const double sp0 = std::max(peak_val * std::pow(M_PI, 2.0 * alpha0) * sigma0, 1e-300);
  LmResult best;
  bool have = false;
  for (double a_try : {1.0, 2.5, 5.0}) {
    std::vector<double> p0 = {std::log(sp0), std::log(sigma0), std::log(a_try - 0.5)};
    LmResult res = levenberg_marquardt(residuals, p0);
    if (res.converged && (!have || res.cost < best.cost)) {
      best = res;
      have = true;
    }
  }
  if (!have) throw numerical_error("fit_peak: did not converge");

  PeakFit out;
  out.s_p = std::exp(best.params[0]);
  out.sigma = std::exp(best.params[1]);
  out.alpha = 0.5 + std::exp(best.params[2]);
  out.fwhm = 2.0 * M_PI * out.sigma * std::sqrt(std::pow(2.0, 1.0 / out.alpha) - 1.0);
  return out;
}

void normalize_record(SpectrumRecord* record, const PeakFit& peak, double window_hz) {
  if (!record) throw validation_error("normalize_record: null record");
  double wings = 0.0;
  const auto& f = record->frequencies_hz;
  const auto& p = record->psd;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) {
    const double fm = 0.5 * (f[i] + f[i + 1]);
    if (std::abs(fm) > window_hz) wings += 0.5 * (p[i] + p[i + 1]) * (f[i + 1] - f[i]);
  }
  const double total = peak_integrated_power(peak) + wings;
  if (!(total > 0)) throw numerical_error("normalize_record: nonpositive total power");
  for (auto& v : record->psd) v /= total;
  record->normalization_applied = true;
}

namespace {

struct FitData {
  std::vector<double> f, logp;
  double td;
};

double composite_log_model(const std::vector<double>& p, std::size_t n_bumps, double td,
                           double f) {
  const double h0 = std::exp(p[0]);
  std::vector<BumpParams> bumps(n_bumps);
  for (std::size_t b = 0; b < n_bumps; ++b) {
    bumps[b] = {std::exp(p[1 + 3 * b]), std::exp(p[2 + 3 * b]), std::exp(p[3 + 3 * b])};
  }
  return safe_log(si_composite_model(h0, bumps, td, f));
}

struct BumpSeed {
  double fg, sigma, hg, strength;
};

std::vector<BumpSeed> bump_candidates(const FitData& d, double h0_init) {
  // smoothed excess over the white floor, positive frequencies
  std::vector<double> fpos, excess;
  for (std::size_t i = 0; i < d.f.size(); ++i) {
    if (d.f[i] <= 0) continue;
    const double white = safe_log(si_white_continuous(h0_init, d.td, d.f[i]));
    fpos.push_back(d.f[i]);
    excess.push_back(d.logp[i] - white);
  }
  const std::size_t n = fpos.size();
  std::vector<double> sm(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    int cnt = 0;
    for (int k = -2; k <= 2; ++k) {
      const long j = static_cast<long>(i) + k;
      if (j >= 0 && j < static_cast<long>(n)) {
        s += excess[j];
        ++cnt;
      }
    }
    sm[i] = s / cnt;
  }
  std::vector<BumpSeed> seeds;
  for (std::size_t i = 3; i + 3 < n; ++i) {
    if (sm[i] > sm[i - 1] && sm[i] >= sm[i + 1] && sm[i] > sm[i - 3] && sm[i] > sm[i + 3] &&
        sm[i] > 0.5) {
      // half-width of the excess region around the candidate
      const double half = sm[i] - std::log(2.0);
      double lo = fpos[i], hi = fpos[i];
      for (std::size_t j = i; j-- > 0 && sm[j] > half;) lo = fpos[j];
      for (std::size_t j = i + 1; j < n && sm[j] > half; ++j) hi = fpos[j];
      const double width = std::max(hi - lo, 2.0 * (fpos[1] - fpos[0]));
      BumpSeed s;
      s.fg = fpos[i];
      s.sigma = std::clamp(width / 2.355, fpos[1] - fpos[0], fpos[i] / 2.0);
      const double st2 = std::pow(std::sin(M_PI * s.fg * d.td), 2);
      const double scallop = std::max(st2, 0.05);
      s.hg = std::exp(d.logp[std::lower_bound(d.f.begin(), d.f.end(), s.fg) - d.f.begin()]) *
             s.fg * s.fg / (4.0 * scallop);
      s.strength = sm[i];
      seeds.push_back(s);
    }
  }
  std::sort(seeds.begin(), seeds.end(),
            [](const BumpSeed& a, const BumpSeed& b) { return a.strength > b.strength; });
  // drop near-duplicates
  std::vector<BumpSeed> uniq;
  for (const auto& s : seeds) {
    bool dup = false;
    for (const auto& u : uniq) {
      if (std::abs(u.fg - s.fg) < 3.0 * std::max(u.sigma, s.sigma)) dup = true;
    }
    if (!dup) uniq.push_back(s);
  }
  return uniq;
}

}  // namespace

NoiseFit fit_noise_model(const SpectrumRecord& record, std::size_t n_bumps,
                         double peak_exclude_hz) {
  if (!record.normalization_applied) {
    throw validation_error("fit_noise_model: record must be normalized first");
  }
  if (!(record.delay_td_s > 0)) throw validation_error("fit_noise_model: record lacks delay td");
  FitData d;
  d.td = record.delay_td_s;
  for (std::size_t i = 0; i < record.frequencies_hz.size(); ++i) {
    if (std::abs(record.frequencies_hz[i]) >= peak_exclude_hz && record.psd[i] > 0) {
      d.f.push_back(record.frequencies_hz[i]);
      d.logp.push_back(std::log(record.psd[i]));
    }
  }
  if (d.f.size() < 3 * (1 + 3 * n_bumps)) {
    throw validation_error("fit_noise_model: too few points outside the peak window");
  }

  // white floor estimate: median of psd f^2 / 2
  std::vector<double> floors;
  floors.reserve(d.f.size());
  for (std::size_t i = 0; i < d.f.size(); ++i) {
    floors.push_back(std::exp(d.logp[i]) * d.f[i] * d.f[i] / 2.0);
  }
  std::nth_element(floors.begin(), floors.begin() + floors.size() / 2, floors.end());
  const double h0_init = std::max(floors[floors.size() / 2], 1e-6);

  auto residuals_for = [&](std::size_t nb) {
    return [&d, nb](const std::vector<double>& p) {
      std::vector<double> r(d.f.size());
      for (std::size_t i = 0; i < d.f.size(); ++i) {
        r[i] = composite_log_model(p, nb, d.td, d.f[i]) - d.logp[i];
      }
      return r;
    };
  };

  LmResult best;
  bool have = false;
  if (n_bumps == 0) {
    best = levenberg_marquardt(residuals_for(0), {std::log(h0_init)});
    have = best.converged;
  } else {
    auto seeds = bump_candidates(d, h0_init);
    if (seeds.size() < n_bumps) {
      // pad with scaled copies of the strongest seed or defaults
      while (seeds.size() < n_bumps) {
        BumpSeed s;
        const double fmax = *std::max_element(d.f.begin(), d.f.end());
        s.fg = fmax * (0.3 + 0.2 * seeds.size());
        s.sigma = s.fg / 20.0;
        s.hg = h0_init * 10.0;
        s.strength = 0.0;
        seeds.push_back(s);
      }
    }
    // multi-start: top-n seeds, then width perturbations
    std::vector<std::vector<BumpSeed>> starts;
    std::vector<BumpSeed> top(seeds.begin(), seeds.begin() + n_bumps);
    starts.push_back(top);
    for (double fac : {3.0, 1.0 / 3.0}) {
      auto alt = top;
      for (auto& s : alt) s.sigma *= fac;
      starts.push_back(alt);
    }
    if (seeds.size() > n_bumps) {
      std::vector<BumpSeed> shifted(seeds.begin() + 1, seeds.begin() + 1 + n_bumps);
      starts.push_back(shifted);
    }
    for (const auto& st : starts) {
      std::vector<double> p0 = {std::log(h0_init)};
      for (const auto& s : st) {
        p0.push_back(std::log(std::max(s.hg, 1e-9)));
        p0.push_back(std::log(s.sigma));
        p0.push_back(std::log(s.fg));
      }
      LmResult res = levenberg_marquardt(residuals_for(n_bumps), p0);
      if (res.converged && (!have || res.cost < best.cost)) {
        best = res;
        have = true;
      }
    }
  }
  if (!have) throw numerical_error("fit_noise_model: did not converge");

  NoiseFit out;
  out.h0 = std::exp(best.params[0]);
  for (std::size_t b = 0; b < n_bumps; ++b) {
    FittedBump fb;
    fb.hg = std::exp(best.params[1 + 3 * b]);
    fb.sigma_g = std::exp(best.params[2 + 3 * b]);
    fb.fg = std::exp(best.params[3 + 3 * b]);
    fb.s_g = servo_bump_power(fb.hg, fb.sigma_g, fb.fg).value;
    out.bumps.push_back(fb);
  }
  std::sort(out.bumps.begin(), out.bumps.end(),
            [](const FittedBump& a, const FittedBump& b) { return a.fg < b.fg; });
  for (std::size_t i = 0; i + 1 < out.bumps.size(); ++i) {
    if (std::abs(out.bumps[i + 1].fg - out.bumps[i].fg) <
        2.0 * std::max(out.bumps[i].sigma_g, out.bumps[i + 1].sigma_g)) {
      out.degenerate_bump_warning = true;
    }
  }
  out.residual_norm = std::sqrt(best.cost / static_cast<double>(d.f.size()));

  // delta-method transform of the log-parameter covariance to linear params
  const std::size_t np = best.params.size();
  out.covariance.assign(np * np, 0.0);
  std::vector<double> scale(np);
  for (std::size_t i = 0; i < np; ++i) scale[i] = std::exp(best.params[i]);
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < np; ++j) {
      out.covariance[i * np + j] = scale[i] * scale[j] * best.covariance[i * np + j];
    }
  }
  return out;
}

ErrorBudget error_budget(const NoiseFit& fit, double omega0, double n) {
  if (!(omega0 > 0)) throw validation_error("error_budget: omega0 must be > 0");
  ErrorBudget out;
  out.white_error = error_white_1p(fit.h0, n, omega0, Averaging::InitialX).value;
  out.sg_threshold = 4.0 * M_PI * fit.h0 / (n * omega0);
  for (const auto& b : fit.bumps) {
    BumpBudget bb;
    bb.fg = b.fg;
    bb.s_g = b.s_g;
    bb.error = error_servo_1p(b.s_g, b.fg, n, omega0, Averaging::InitialX).value;
    bb.flagged = b.s_g >= out.sg_threshold;
    out.bumps.push_back(bb);
    out.avoid_rabi_hz.emplace_back(b.fg / 1.5, b.fg * 1.5);
  }
  return out;
}

}  // namespace lasernoise
