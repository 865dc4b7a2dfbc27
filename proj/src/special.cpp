#include "lasernoise/special.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "lasernoise/errors.hpp"

namespace lasernoise {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Series: Si(x) = sum (-1)^k x^(2k+1) / ((2k+1)(2k+1)!)
//         Cin(x) = sum_{k>=1} (-1)^(k+1) x^(2k) / ((2k)(2k)!),  Ci = gamma + ln x - Cin
SiCi si_ci_series(double x) {
  const double x2 = x * x;
  double term = x;  // k = 0 term of Si series before the 1/(2k+1) weight
  double si = x;
  double cin = 0.0;
  double cterm = 1.0;
  for (int k = 1; k < 60; ++k) {
    // cosine series term: (-1)^(k+1) x^(2k)/(2k)!
    cterm *= -x2 / ((2 * k - 1) * (2 * k));
    cin += -cterm / (2 * k);
    // sine series term: (-1)^k x^(2k+1)/(2k+1)!
    term *= -x2 / ((2 * k) * (2 * k + 1));
    const double si_inc = term / (2 * k + 1);
    si += si_inc;
    if (std::abs(si_inc) < 1e-18 * std::abs(si) && std::abs(cterm) < 1e-18) break;
  }
  return {si, kEulerGamma + std::log(x) - cin};
}

// E1(ix) by modified Lentz continued fraction; valid and fast for x >= ~4.
// E1(ix) = -Ci(x) - i (pi/2 - Si(x)).
SiCi si_ci_continued_fraction(double x) {
  const std::complex<double> z(0.0, x);
  const double tiny = 1e-300;
  std::complex<double> b = z + 1.0;
  std::complex<double> c = 1.0 / tiny;
  std::complex<double> d = 1.0 / b;
  std::complex<double> h = d;
  for (int i = 1; i <= 300; ++i) {
    const double a = -static_cast<double>(i) * static_cast<double>(i);
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const std::complex<double> del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  const std::complex<double> e1 = h * std::exp(-z);
  const double ci = -e1.real();
  const double si = M_PI / 2 + e1.imag();
  return {si, ci};
}

}  // namespace

SiCi si_ci(double x) {
  if (!(x >= 0.0)) throw validation_error("si_ci: x must be >= 0");
  if (x == 0.0) return {0.0, -std::numeric_limits<double>::infinity()};
  if (x < 4.0) return si_ci_series(x);
  return si_ci_continued_fraction(x);
}

double sine_integral(double x) {
  if (x < 0.0) return -si_ci(-x).si;
  return si_ci(x).si;
}

double cosine_integral(double x) {
  if (!(x > 0.0)) throw validation_error("cosine_integral: x must be > 0");
  return si_ci(x).ci;
}

}  // namespace lasernoise
