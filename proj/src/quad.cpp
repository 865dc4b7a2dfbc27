#include "lasernoise/quad.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>

#include "lasernoise/errors.hpp"

namespace lasernoise {

namespace {
using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
  double err = 0.0, l1 = 0.0;
  const double v = GK::integrate(f, a, b, 15, rel_tol, &err, &l1);
  if (!(std::isfinite(v))) throw numerical_error("integrate: non-finite result");
  // The reported Gauss-Kronrod error estimate is very conservative for
  // smooth integrands; treat only gross failures as errors. Accuracy of the
  // quadrature-backed operations is pinned by closed-form validation tests.
  if (err > 0.1 * (std::abs(v) + l1) && err > 1e-250) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "integrate: quadrature failed to converge (err=%.3e, scale=%.3e, a=%.6e, b=%.6e)",
                  err, std::abs(v) + l1, a, b);
    throw numerical_error(buf);
  }
  return v;
}

double integrate_to_inf(const std::function<double(double)>& f, double a,
                        double rel_tol) {
  double err = 0.0, l1 = 0.0;
  const double v = GK::integrate(f, a, std::numeric_limits<double>::infinity(),
                                 15, rel_tol, &err, &l1);
  if (!(std::isfinite(v))) throw numerical_error("integrate_to_inf: non-finite result");
  return v;
}

FilonCosineTransform::FilonCosineTransform(double a, double h,
                                           std::vector<double> samples)
    : a_(a), h_(h), p_(std::move(samples)) {
  if (p_.size() < 3 || p_.size() % 2 == 0) {
    throw validation_error("FilonCosineTransform: need odd sample count >= 3 (even panel count)");
  }
  if (!(h > 0.0)) throw validation_error("FilonCosineTransform: step must be > 0");
}

namespace {

// Filon weights alpha(theta), beta(theta), gamma(theta); series expansions
// below theta = 1/6 to avoid cancellation.
void filon_weights(double th, double* alpha, double* beta, double* gamma) {
  if (std::abs(th) < 1.0 / 6.0) {
    const double t2 = th * th;
    *alpha = th * t2 * (2.0 / 45.0 + t2 * (-2.0 / 315.0 + t2 * (2.0 / 4725.0)));
    *beta = 2.0 / 3.0 + t2 * (2.0 / 15.0 + t2 * (-4.0 / 105.0 + t2 * (2.0 / 567.0)));
    *gamma = 4.0 / 3.0 + t2 * (-2.0 / 15.0 + t2 * (1.0 / 210.0 + t2 * (-1.0 / 11340.0)));
    return;
  }
  const double s = std::sin(th), c = std::cos(th);
  const double t3 = th * th * th;
  *alpha = (th * th + th * s * c - 2.0 * s * s) / t3;
  *beta = 2.0 * (th * (1.0 + c * c) - 2.0 * s * c) / t3;
  *gamma = 4.0 * (s - th * c) / t3;
}

}  // namespace

double FilonCosineTransform::at(double freq_hz) const {
  const double w = 2.0 * M_PI * freq_hz;
  const double th = w * h_;
  double alpha, beta, gamma;
  filon_weights(th, &alpha, &beta, &gamma);

  const std::size_t n = p_.size() - 1;  // even panel count
  double c_even = 0.0, c_odd = 0.0;
  for (std::size_t k = 0; k <= n; k += 2) {
    double v = p_[k] * std::cos(w * (a_ + k * h_));
    if (k == 0 || k == n) v *= 0.5;
    c_even += v;
  }
  for (std::size_t k = 1; k < n; k += 2) {
    c_odd += p_[k] * std::cos(w * (a_ + k * h_));
  }
  const double sin_term =
      p_[n] * std::sin(w * (a_ + n * h_)) - p_[0] * std::sin(w * a_);
  return h_ * (alpha * sin_term + beta * c_even + gamma * c_odd);
}

double PiecewiseFilon::at(double freq_hz) const {
  double tot = 0.0;
  for (const auto& s : segments_) tot += s.at(freq_hz);
  return tot;
}

}  // namespace lasernoise
