#pragma once

#include <functional>
#include <vector>

namespace lasernoise {

// Adaptive Gauss-Kronrod integration (boost.math behind the scenes).
// Throws numerical_error if the error estimate stays above the tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10);

// Semi-infinite upper limit.
double integrate_to_inf(const std::function<double(double)>& f, double a,
                        double rel_tol = 1e-10);

// Filon-type quadrature for I(nu) = int_a^b p(tau) cos(2 pi nu tau) dtau with
// p sampled on the uniform grid tau_k = a + k h, k = 0..n (n even). The
// oscillation is integrated exactly against a piecewise-quadratic
// interpolant of p, so accuracy is O(h^4 p'''') independent of nu.
class FilonCosineTransform {
 public:
  FilonCosineTransform(double a, double h, std::vector<double> samples);

  double at(double freq_hz) const;

  double grid_start() const { return a_; }
  double grid_step() const { return h_; }
  const std::vector<double>& samples() const { return p_; }

 private:
  double a_;
  double h_;
  std::vector<double> p_;
};

// Sum of transforms over contiguous segments (used to keep grid nodes on
// kinks of the integrand, e.g. tau = t_d in the self-heterodyne envelope).
class PiecewiseFilon {
 public:
  void add_segment(FilonCosineTransform seg) { segments_.push_back(std::move(seg)); }
  double at(double freq_hz) const;

 private:
  std::vector<FilonCosineTransform> segments_;
};

}  // namespace lasernoise
