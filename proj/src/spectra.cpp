#include "lasernoise/spectra.hpp"

#include <cmath>

#include "lasernoise/errors.hpp"
#include "lasernoise/quad.hpp"

namespace lasernoise {

NoiseModel NoiseModel::white(double h0) {
  if (!(h0 >= 0)) throw validation_error("white: h0 must be >= 0");
  NoiseModel m;
  m.kind_ = NoiseKind::White;
  m.h0_ = h0;
  return m;
}

NoiseModel NoiseModel::band_limited_white(double h0, double fc) {
  if (!(h0 >= 0)) throw validation_error("band_limited_white: h0 must be >= 0");
  if (!(fc > 0)) throw validation_error("band_limited_white: fc must be > 0");
  NoiseModel m;
  m.kind_ = NoiseKind::BandLimitedWhite;
  m.h0_ = h0;
  m.fc_ = fc;
  return m;
}

NoiseModel NoiseModel::servo_bump(double hg, double sigma_g, double fg) {
  if (!(hg >= 0)) throw validation_error("servo_bump: hg must be >= 0");
  if (!(sigma_g > 0)) throw validation_error("servo_bump: sigma_g must be > 0");
  if (!(fg > 0)) throw validation_error("servo_bump: fg must be > 0");
  NoiseModel m;
  m.kind_ = NoiseKind::ServoBump;
  m.hg_ = hg;
  m.sigma_g_ = sigma_g;
  m.fg_ = fg;
  return m;
}

NoiseModel NoiseModel::composite(std::vector<NoiseModel> terms) {
  NoiseModel m;
  m.kind_ = NoiseKind::Composite;
  m.terms_ = std::move(terms);
  return m;
}

bool NoiseModel::is_zero() const {
  switch (kind_) {
    case NoiseKind::White:
    case NoiseKind::BandLimitedWhite:
      return h0_ == 0;
    case NoiseKind::ServoBump:
      return hg_ == 0;
    case NoiseKind::Composite:
      for (const auto& t : terms_)
        if (!t.is_zero()) return false;
      return true;
  }
  return false;
}

nlohmann::json NoiseModel::to_json() const {
  nlohmann::json j;
  switch (kind_) {
    case NoiseKind::White:
      j["kind"] = "white";
      j["h0_hz2_per_hz"] = h0_;
      break;
    case NoiseKind::BandLimitedWhite:
      j["kind"] = "band_limited_white";
      j["h0_hz2_per_hz"] = h0_;
      j["fc_hz"] = fc_;
      break;
    case NoiseKind::ServoBump:
      j["kind"] = "servo_bump";
      j["hg_hz2_per_hz"] = hg_;
      j["sigma_g_hz"] = sigma_g_;
      j["fg_hz"] = fg_;
      break;
    case NoiseKind::Composite: {
      j["kind"] = "composite";
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& t : terms_) arr.push_back(t.to_json());
      j["terms"] = arr;
      break;
    }
  }
  return j;
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) {
    throw validation_error("NoiseModel: missing \"kind\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  auto num = [&](const char* field) {
    if (!j.contains(field) || !j.at(field).is_number()) {
      throw validation_error(std::string("NoiseModel: missing or non-numeric field \"") + field + "\"");
    }
    return j.at(field).get<double>();
  };
  if (kind == "white") return white(num("h0_hz2_per_hz"));
  if (kind == "band_limited_white")
    return band_limited_white(num("h0_hz2_per_hz"), num("fc_hz"));
  if (kind == "servo_bump")
    return servo_bump(num("hg_hz2_per_hz"), num("sigma_g_hz"), num("fg_hz"));
  if (kind == "composite") {
    if (!j.contains("terms") || !j.at("terms").is_array()) {
      throw validation_error("NoiseModel: composite requires \"terms\" array");
    }
    std::vector<NoiseModel> terms;
    for (const auto& t : j.at("terms")) terms.push_back(from_json(t));
    return composite(std::move(terms));
  }
  throw validation_error("NoiseModel: unknown kind \"" + kind + "\"");
}

double psd_delta_nu(const NoiseModel& model, double f) {
  switch (model.kind()) {
    case NoiseKind::White:
      return model.h0();
    case NoiseKind::BandLimitedWhite:
      return std::abs(f) <= model.fc() ? model.h0() : 0.0;
    case NoiseKind::ServoBump: {
      const double s = model.sigma_g(), fg = model.fg(), hg = model.hg();
      const double am = (f - fg) / s, ap = (f + fg) / s;
      return hg * (std::exp(-0.5 * am * am) + std::exp(-0.5 * ap * ap));
    }
    case NoiseKind::Composite: {
      double tot = 0.0;
      for (const auto& t : model.terms()) tot += psd_delta_nu(t, f);
      return tot;
    }
  }
  return 0.0;
}

double psd_phi(const NoiseModel& model, double f) {
  if (f == 0.0) throw validation_error("psd_phi: singular at f = 0");
  return psd_delta_nu(model, f) / (f * f);
}

ServoBumpPower servo_bump_power(double hg, double sigma_g, double fg) {
  if (!(hg >= 0) || !(sigma_g > 0) || !(fg > 0)) {
    throw validation_error("servo_bump_power: requires hg >= 0, sigma_g > 0, fg > 0");
  }
  ServoBumpPower r;
  r.value = std::sqrt(8.0 * M_PI) * sigma_g * hg / (fg * fg);
  r.narrow_bump_warning = sigma_g > fg / 3.0;
  return r;
}

namespace {

// 2 int_{fx}^inf S/f^2 df for a single non-composite component.
double tail_component(const NoiseModel& m, double fx) {
  switch (m.kind()) {
    case NoiseKind::White:
      return 2.0 * m.h0() / fx;
    case NoiseKind::BandLimitedWhite:
      return fx < m.fc() ? 2.0 * m.h0() * (1.0 / fx - 1.0 / m.fc()) : 0.0;
    case NoiseKind::ServoBump: {
      const double hi = m.fg() + 15.0 * m.sigma_g();
      if (fx >= hi) return 0.0;
      auto integrand = [&](double f) { return psd_delta_nu(m, f) / (f * f); };
      return 2.0 * integrate(integrand, fx, hi, 1e-12);
    }
    case NoiseKind::Composite:
      break;
  }
  throw validation_error("tail_component: composite not expected here");
}

void flatten(const NoiseModel& m, std::vector<NoiseModel>* out) {
  if (m.kind() == NoiseKind::Composite) {
    for (const auto& t : m.terms()) flatten(t, out);
  } else {
    out->push_back(m);
  }
}

}  // namespace

double phase_power_above(const NoiseModel& model, double fx) {
  if (!(fx > 0)) throw validation_error("phase_power_above: fx must be > 0");
  std::vector<NoiseModel> comps;
  flatten(model, &comps);
  double tot = 0.0;
  for (const auto& c : comps) tot += tail_component(c, fx);
  return tot;
}

double crossover_fx_bisection(const NoiseModel& model) {
  // g(fx) = tail(fx) - 1/2 is decreasing in fx; bracket then bisect.
  const double target = 0.5;
  double hi = 1.0;
  while (phase_power_above(model, hi) > target) {
    hi *= 4.0;
    if (hi > 1e30) throw numerical_error("crossover_fx: no upper bracket");
  }
  double lo = hi;
  int shrink = 0;
  while (phase_power_above(model, lo) < target) {
    lo /= 4.0;
    if (++shrink > 120) {
      throw numerical_error("crossover_fx: criterion unreachable (total tail power < 1/2)");
    }
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double g = phase_power_above(model, mid);
    if (std::abs(g - target) < 1e-6 && (hi - lo) < 1e-11 * mid) return mid;
    (g > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double crossover_fx(const NoiseModel& model) {
  if (model.kind() == NoiseKind::White) {
    if (model.h0() == 0) throw numerical_error("crossover_fx: zero spectrum");
    return 4.0 * model.h0();
  }
  if (model.is_zero()) throw numerical_error("crossover_fx: zero spectrum");
  return crossover_fx_bisection(model);
}

double variance_delta_nu(const NoiseModel& model) {
  switch (model.kind()) {
    case NoiseKind::White:
      throw numerical_error("variance_delta_nu: unbounded white noise diverges");
    case NoiseKind::BandLimitedWhite:
      return 2.0 * model.h0() * model.fc();
    case NoiseKind::ServoBump:
      // two Gaussians, each integrating to hg sigma sqrt(2 pi)
      return 2.0 * model.hg() * model.sigma_g() * std::sqrt(2.0 * M_PI);
    case NoiseKind::Composite: {
      double tot = 0.0;
      for (const auto& t : model.terms()) tot += variance_delta_nu(t);
      return tot;
    }
  }
  return 0.0;
}

}  // namespace lasernoise
