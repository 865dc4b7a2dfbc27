#pragma once

#include <functional>
#include <vector>

namespace lasernoise {

// Dense Levenberg-Marquardt with forward-difference Jacobian. Small problems
// only (the spectrum fits have <= 10 parameters).
struct LmOptions {
  int max_iterations = 300;
  double ftol = 1e-13;
  double xtol = 1e-13;
  double lambda0 = 1e-3;
};

struct LmResult {
  std::vector<double> params;
  double cost = 0;                  // sum of squared residuals
  std::vector<double> covariance;   // row-major n x n, sigma^2 (J^T J)^-1
  bool converged = false;
  int iterations = 0;
};

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

LmResult levenberg_marquardt(const ResidualFn& residuals, std::vector<double> p0,
                             const LmOptions& opts = {});

}  // namespace lasernoise
