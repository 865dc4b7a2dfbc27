#include "lasernoise/analytic.hpp"

#include <algorithm>
#include <cmath>

#include "lasernoise/errors.hpp"
#include "lasernoise/quad.hpp"
#include "lasernoise/special.hpp"

namespace lasernoise {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

int gate_parity_sign(double n) {
  // (-1)^(2N) for N a multiple of 1/2
  const long m = std::lround(2.0 * n);
  return (m % 2 == 0) ? 1 : -1;
}

void require_half_integer(double n, const char* where) {
  if (!is_half_integer(n)) {
    throw validation_error(std::string(where) + ": N must be a positive multiple of 1/2");
  }
}

void require_positive_omega(double omega0, const char* where) {
  if (!(omega0 > 0)) throw validation_error(std::string(where) + ": omega0 must be > 0");
}

}  // namespace

bool is_half_integer(double n) {
  if (!(n > 0)) return false;
  const double two_n = 2.0 * n;
  return std::abs(two_n - std::round(two_n)) < 1e-9 * std::max(1.0, two_n);
}

AnalyticError error_white_1p(double h0, double n, double omega0, Averaging avg) {
  require_half_integer(n, "error_white_1p");
  require_positive_omega(omega0, "error_white_1p");
  if (!(h0 >= 0)) throw validation_error("error_white_1p: h0 must be >= 0");
  AnalyticError r;
  r.value = std::pow(M_PI, 3) * h0 * n / omega0;
  if (avg == Averaging::StateAveraged) r.value *= 4.0 / 3.0;
  r.weak_noise_warning = (M_PI * h0 / omega0) > 0.01;
  return r;
}

AnalyticError error_servo_1p(double sg, double fg, double n, double omega0, Averaging avg) {
  require_half_integer(n, "error_servo_1p");
  require_positive_omega(omega0, "error_servo_1p");
  if (!(sg >= 0) || !(fg > 0)) throw validation_error("error_servo_1p: requires sg >= 0, fg > 0");
  AnalyticError r;
  const double wg = 2.0 * M_PI * fg;
  if (std::abs(wg - omega0) < 1e-6 * omega0) {
    const double pn2 = M_PI * M_PI * n * n;
    r.value = (avg == Averaging::InitialX) ? sg * pn2 / 4.0 : sg * pn2 / 3.0;
    return r;
  }
  const int s = gate_parity_sign(n);
  const double bracket = 1.0 - s * std::cos(4.0 * M_PI * M_PI * n * fg / omega0);
  const double den = std::pow(omega0 * omega0 - wg * wg, 2);
  if (avg == Averaging::InitialX) {
    r.value = 2.0 * sg * std::pow(M_PI * fg * omega0, 2) * bracket / den;
  } else {
    r.value = 4.0 * M_PI * M_PI * sg * fg * fg * (omega0 * omega0 + wg * wg) * bracket /
              (3.0 * den);
  }
  return r;
}

AnalyticError error_white_2p(double h1, double h2, double n, double omega_tilde0,
                             Averaging avg) {
  auto r = error_white_1p(h1 + h2, n, omega_tilde0, avg);
  return r;
}

AnalyticError error_servo_2p(double sg1, double fg1, double sg2, double fg2, double n,
                             double omega_tilde0, Averaging avg) {
  AnalyticError r;
  const auto a = error_servo_1p(sg1, fg1, n, omega_tilde0, avg);
  const auto b = error_servo_1p(sg2, fg2, n, omega_tilde0, avg);
  r.value = a.value + b.value;
  return r;
}

AnalyticError error_bandlimited_1p(double h0, double fc, double n, double omega0,
                                   Averaging avg) {
  require_half_integer(n, "error_bandlimited_1p");
  require_positive_omega(omega0, "error_bandlimited_1p");
  if (!(h0 >= 0) || !(fc > 0)) throw validation_error("error_bandlimited_1p: requires h0 >= 0, fc > 0");
  AnalyticError r;
  const long m = std::lround(2.0 * n);
  const bool integer_n = (m % 2 == 0);
  r.validity_warning = integer_n && fc < 1.43 * h0 && fc < omega0 / (2.0 * M_PI);
  if (h0 == 0) return r;

  const double y = 2.0 * M_PI * fc / omega0;
  const int s = gate_parity_sign(n);
  const double two_pi_n = 2.0 * M_PI * n;

  if (avg == Averaging::StateAveraged) {
    double lead;
    if (std::abs(y - 1.0) < 1e-8) {
      lead = 0.0;  // y [1 - s cos(2 pi N y)]/(1-y^2) -> 0 at y = 1
    } else {
      lead = y * (1.0 - s * std::cos(two_pi_n * y)) / (1.0 - y * y);
    }
    const double val = lead - M_PI * n * sine_integral(two_pi_n * (1.0 - y)) +
                       M_PI * n * sine_integral(two_pi_n * (1.0 + y));
    r.value = (4.0 * M_PI * h0 / (3.0 * omega0)) * val;
    return r;
  }

  double val;
  if (std::abs(y - 1.0) < 1e-8) {
    val = kEulerGamma + std::log(4.0 * M_PI * n) - cosine_integral(4.0 * M_PI * n) +
          two_pi_n * sine_integral(4.0 * M_PI * n);
  } else {
    const double lead = 2.0 * y * (1.0 - s * std::cos(two_pi_n * y)) / (1.0 - y * y);
    double atanh_term, ci_minus;
    const double si_minus = sine_integral(two_pi_n * (1.0 - y));  // odd; fine for y > 1
    if (y < 1.0) {
      atanh_term = 2.0 * std::atanh(y);
      ci_minus = cosine_integral(two_pi_n * (1.0 - y));
    } else {
      // real part of the analytic continuation across y = 1
      atanh_term = std::log((1.0 + y) / (y - 1.0));
      ci_minus = cosine_integral(two_pi_n * (y - 1.0));
    }
    val = lead + atanh_term + ci_minus - cosine_integral(two_pi_n * (1.0 + y)) -
          two_pi_n * si_minus + two_pi_n * sine_integral(two_pi_n * (1.0 + y));
  }
  r.value = (M_PI * h0 / (2.0 * omega0)) * val;
  return r;
}

AnalyticError error_quasistatic_1p(double h0, double fc, double n, double omega0,
                                   Averaging avg) {
  return error_quasistatic_2p(h0, fc, 0.0, fc, n, omega0, avg);
}

AnalyticError error_quasistatic_2p(double h1, double fc1, double h2, double fc2, double n,
                                   double omega_tilde0, Averaging avg) {
  require_half_integer(n, "error_quasistatic");
  require_positive_omega(omega_tilde0, "error_quasistatic");
  if (!(h1 >= 0) || !(h2 >= 0) || !(fc1 > 0) || !(fc2 > 0)) {
    throw validation_error("error_quasistatic: requires h >= 0, fc > 0");
  }
  AnalyticError r;
  const double f0 = omega_tilde0 / (2.0 * M_PI);
  r.weak_noise_warning = std::max(fc1, fc2) > f0 / 10.0;  // fc above Omega0/(20 pi)

  const double hfc = h1 * fc1 + h2 * fc2;
  const long m = std::lround(2.0 * n);
  const bool integer_n = (m % 2 == 0);
  const double om2 = omega_tilde0 * omega_tilde0;
  if (!integer_n) {
    r.value = 8.0 * M_PI * M_PI * hfc / om2;
    if (avg == Averaging::StateAveraged) r.value *= 2.0 / 3.0;
  } else {
    const double pi6 = std::pow(M_PI, 6);
    if (avg == Averaging::InitialX) {
      r.value = 48.0 * pi6 * hfc * hfc * n * n / (om2 * om2);
    } else {
      r.value = 32.0 * pi6 * hfc * hfc * n * n / (om2 * om2);
    }
  }
  return r;
}

AnalyticError error_intensity(const std::vector<double>& sigma2_list, double n) {
  require_half_integer(n, "error_intensity");
  AnalyticError r;
  double tot = 0.0;
  for (double s2 : sigma2_list) {
    if (!(s2 >= 0)) throw validation_error("error_intensity: variances must be >= 0");
    if (s2 > 0.25) r.weak_noise_warning = true;
    tot += s2;
  }
  r.value = std::pow(M_PI * n, 2) * tot / 4.0;
  return r;
}

// --- general quadrature -----------------------------------------------------

namespace {

enum class Kernel { GateX, GateAvg, RhoX, RhoY };

struct KernelSpec {
  Kernel kind;
  double omega0;
  double n = 0;     // gate kernels
  double tg = 0;    // rho kernels
};

double kernel_value(const KernelSpec& k, double f) {
  const double om = k.omega0;
  const double w = 2.0 * M_PI * f;
  const double den = std::pow(om * om - w * w, 2);
  switch (k.kind) {
    case Kernel::GateX: {
      const int s = gate_parity_sign(k.n);
      return om * om * (1.0 - s * std::cos(4.0 * M_PI * M_PI * k.n * f / om)) / den;
    }
    case Kernel::GateAvg: {
      const int s = gate_parity_sign(k.n);
      return (om * om + w * w) * (1.0 - s * std::cos(4.0 * M_PI * M_PI * k.n * f / om)) / den;
    }
    case Kernel::RhoX: {
      const double c = std::cos(om * k.tg), s = std::sin(om * k.tg);
      const double num = 2.0 * c - 2.0 * std::cos(w * k.tg) + (om * om - w * w) * (k.tg / om) * s;
      return num / den;
    }
    case Kernel::RhoY: {
      const double c = std::cos(om * k.tg), s = std::sin(om * k.tg);
      const double num = (1.0 + (w * w) / (om * om)) * s -
                         2.0 * (w / om) * std::sin(w * k.tg) -
                         (om * om - w * w) * (k.tg / om) * c;
      return num / den;
    }
  }
  return 0.0;
}

// Finite limit of the kernel at 2 pi f = Omega0 (removable point).
double kernel_limit(const KernelSpec& k) {
  const double om = k.omega0;
  switch (k.kind) {
    case Kernel::GateX:
      return M_PI * M_PI * k.n * k.n / (2.0 * om * om);
    case Kernel::GateAvg:
      return M_PI * M_PI * k.n * k.n / (om * om);
    case Kernel::RhoX: {
      const double c = std::cos(om * k.tg), s = std::sin(om * k.tg);
      return (k.tg * k.tg * c - (k.tg / om) * s) / (4.0 * om * om);
    }
    case Kernel::RhoY: {
      const double c = std::cos(om * k.tg), s = std::sin(om * k.tg);
      return ((1.0 / (om * om) + k.tg * k.tg) * s - (k.tg / om) * c) / (4.0 * om * om);
    }
  }
  return 0.0;
}

// Analytic tail beyond fmax assuming psd ~ const = s_end there. Returns the
// estimate and a bound on the neglected oscillatory/higher-order parts.
struct Tail {
  double estimate;
  double bound;
};

Tail kernel_tail(const KernelSpec& k, double s_end, double fmax) {
  const double om = k.omega0;
  const double F = fmax;
  Tail t{0.0, 0.0};
  const double f4_int = 1.0 / (3.0 * F * F * F) / std::pow(2.0 * M_PI, 4);  // int (2pi f)^-4
  switch (k.kind) {
    case Kernel::GateX:
      t.estimate = s_end * om * om * f4_int;
      t.bound = 2.0 * s_end * om * om * f4_int;
      break;
    case Kernel::GateAvg: {
      // leading (1 - s cos(beta f))/(2 pi f)^2 piece, cos part Si-exact
      const int sgn = gate_parity_sign(k.n);
      const double beta = 4.0 * M_PI * M_PI * k.n / om;
      const double cos_int = std::cos(beta * F) / F - beta * (M_PI / 2 - sine_integral(beta * F));
      t.estimate = s_end * (1.0 / F - sgn * cos_int) / (4.0 * M_PI * M_PI);
      t.bound = 4.0 * s_end * om * om * f4_int;
      break;
    }
    case Kernel::RhoX: {
      const double c = std::cos(om * k.tg), s = std::sin(om * k.tg);
      const double log_piece =
          (1.0 / (4.0 * M_PI * om)) * std::log((2.0 * M_PI * F + om) / (2.0 * M_PI * F - om));
      t.estimate = s_end * (-(k.tg / om) * s * log_piece + 2.0 * c * f4_int);
      t.bound = s_end * (2.0 * f4_int + 2.0 / (std::pow(2.0 * M_PI, 4) * 3.0 * F * F * F));
      break;
    }
    case Kernel::RhoY: {
      const double c = std::cos(om * k.tg), s = std::sin(om * k.tg);
      const double log_piece =
          (1.0 / (4.0 * M_PI * om)) * std::log((2.0 * M_PI * F + om) / (2.0 * M_PI * F - om));
      t.estimate = s_end * (s / (4.0 * M_PI * M_PI * om * om * F) + (k.tg / om) * c * log_piece);
      t.bound = s_end * (1.0 / (4.0 * M_PI * M_PI * M_PI * om * F * F) + 4.0 * om * om * f4_int);
      break;
    }
  }
  return t;
}

// Integral of psd(f) * kernel(f) over [0, inf) with the removable point at
// f0 = Omega0/2pi crossed by symmetric excision + analytic limit correction.
double kernel_integral(const PsdFn& psd, const KernelSpec& k,
                       const std::vector<double>& extra_breaks, double excision_frac) {
  const double f0 = k.omega0 / (2.0 * M_PI);
  const double w = excision_frac * f0;
  auto g = [&](double f) { return psd(f) * kernel_value(k, f); };

  std::vector<double> breaks = {0.0,      f0 / 4,   f0 / 2,   3 * f0 / 4, 0.9 * f0,
                                0.99 * f0, f0 - w,  f0 + w,   1.01 * f0,  1.1 * f0,
                                1.5 * f0, 2 * f0,   4 * f0,   10 * f0,    30 * f0};
  double fmax = 100.0 * f0;
  for (double b : extra_breaks) {
    if (b > 0 && b < fmax) breaks.push_back(b);
  }
  breaks.push_back(fmax);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    if (a >= f0 - w * (1 + 1e-12) && b <= f0 + w * (1 + 1e-12)) {
      continue;  // excised window, handled analytically below
    }
    total += integrate(g, a, b, 1e-11);
  }
  // even-part correction over the excised window
  total += 2.0 * w * psd(f0) * kernel_limit(k);

  // analytic tail, extending fmax if the neglected part is not negligible
  for (int tries = 0;; ++tries) {
    const Tail tail = kernel_tail(k, psd(fmax), fmax);
    if (tail.bound <= 1e-6 * (std::abs(total + tail.estimate) + 1e-300) || tries >= 6) {
      total += tail.estimate;
      break;
    }
    const double fmax2 = 2.0 * fmax;
    total += integrate(g, fmax, fmax2, 1e-11);
    fmax = fmax2;
  }
  return total;
}

std::vector<double> model_breakpoints(const NoiseModel& m) {
  std::vector<double> b;
  std::function<void(const NoiseModel&)> walk = [&](const NoiseModel& x) {
    switch (x.kind()) {
      case NoiseKind::BandLimitedWhite:
        b.push_back(x.fc());
        break;
      case NoiseKind::ServoBump:
        b.push_back(std::max(0.0, x.fg() - 10.0 * x.sigma_g()));
        b.push_back(x.fg());
        b.push_back(x.fg() + 10.0 * x.sigma_g());
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

GeneralErrorResult error_general_impl(const PsdFn& psd, double omega0, double t_g,
                                      Averaging avg, bool tabulated,
                                      const std::vector<double>& breaks) {
  if (!(omega0 > 0)) throw validation_error("error_general: omega0 must be > 0");
  if (!(t_g > 0)) throw validation_error("error_general: t_g must be > 0");
  GeneralErrorResult out;
  out.smoothness_warning = tabulated;

  const double two_n = omega0 * t_g / M_PI;
  const bool gate_multiple = std::abs(two_n - std::round(two_n)) < 1e-9 * std::max(1.0, two_n);

  if (gate_multiple) {
    const double n = std::round(two_n) / 2.0;
    KernelSpec k{avg == Averaging::InitialX ? Kernel::GateX : Kernel::GateAvg, omega0, n, t_g};
    const double pref = (avg == Averaging::InitialX) ? 4.0 * M_PI * M_PI : 8.0 * M_PI * M_PI / 3.0;
    out.value = pref * kernel_integral(psd, k, breaks, 1e-5);
    return out;
  }

  if (avg == Averaging::StateAveraged) {
    throw validation_error("error_general: state-averaged error requires t_g = 2 pi N/Omega0");
  }
  KernelSpec kx{Kernel::RhoX, omega0, 0, t_g};
  KernelSpec ky{Kernel::RhoY, omega0, 0, t_g};
  const double ix = kernel_integral(psd, kx, breaks, 1e-5);
  const double iy = kernel_integral(psd, ky, breaks, 1e-6);
  const double pref = 2.0 * M_PI * M_PI * omega0 * omega0;
  out.value = std::cos(omega0 * t_g) * (pref * ix) + std::sin(omega0 * t_g) * (pref * iy);
  return out;
}

}  // namespace

GeneralErrorResult error_general(const PsdFn& psd, double omega0, double t_g,
                                 Averaging avg, bool tabulated_psd) {
  return error_general_impl(psd, omega0, t_g, avg, tabulated_psd, {});
}

GeneralErrorResult error_general(const NoiseModel& model, double omega0, double t_g,
                                 Averaging avg) {
  auto psd = [&model](double f) { return psd_delta_nu(model, f); };
  return error_general_impl(psd, omega0, t_g, avg, false, model_breakpoints(model));
}

std::pair<double, double> rho_evolution_weak_noise(const PsdFn& psd, double omega0,
                                                   double t) {
  if (!(omega0 > 0) || !(t > 0)) {
    throw validation_error("rho_evolution_weak_noise: omega0 and t must be > 0");
  }
  KernelSpec kx{Kernel::RhoX, omega0, 0, t};
  KernelSpec ky{Kernel::RhoY, omega0, 0, t};
  const double pref = 2.0 * M_PI * M_PI * omega0 * omega0;
  const double dx = pref * kernel_integral(psd, kx, {}, 1e-5);
  const double dy = pref * kernel_integral(psd, ky, {}, 1e-6);
  return {0.5 * std::cos(omega0 * t) - dx, 0.5 * std::sin(omega0 * t) - dy};
}

double fidelity_operator(const Unitary2& u0, const Unitary2& u, FidelityMeasure measure) {
  auto check_unitary = [](const Unitary2& m, const char* name) {
    // U U^dag = 1 to 1e-10
    const std::complex<double> a = m[0], b = m[1], c = m[2], d = m[3];
    const std::complex<double> e00 = a * std::conj(a) + b * std::conj(b) - 1.0;
    const std::complex<double> e01 = a * std::conj(c) + b * std::conj(d);
    const std::complex<double> e11 = c * std::conj(c) + d * std::conj(d) - 1.0;
    const double err = std::max({std::abs(e00), std::abs(e01), std::abs(e11)});
    if (err > 1e-10) {
      throw validation_error(std::string("fidelity_operator: ") + name + " is not unitary");
    }
  };
  check_unitary(u0, "U0");
  check_unitary(u, "U");
  // Tr(U0^dag U)
  const std::complex<double> tr = std::conj(u0[0]) * u[0] + std::conj(u0[2]) * u[2] +
                                  std::conj(u0[1]) * u[1] + std::conj(u0[3]) * u[3];
  const double t2 = std::norm(tr);
  if (measure == FidelityMeasure::Standard) return (2.0 + t2) / 6.0;
  return t2 / 4.0;
}

}  // namespace lasernoise
