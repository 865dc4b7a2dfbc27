#include "lasernoise/lm.hpp"

#include <cmath>

#include "lasernoise/errors.hpp"

namespace lasernoise {

namespace {

// Solve A x = b in place (A row-major n x n), Gaussian elimination with
// partial pivoting. Returns false on singular systems.
bool solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n,
                 std::vector<double>* x) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  x->assign(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * (*x)[c];
    (*x)[ri] = s / a[ri * n + ri];
  }
  return true;
}

double cost_of(const std::vector<double>& r) {
  double c = 0.0;
  for (double v : r) c += v * v;
  return c;
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& residuals, std::vector<double> p,
                             const LmOptions& opts) {
  const std::size_t n = p.size();
  LmResult out;
  std::vector<double> r = residuals(p);
  const std::size_t m = r.size();
  if (m < n) throw validation_error("levenberg_marquardt: fewer residuals than parameters");
  double cost = cost_of(r);
  double lambda = opts.lambda0;

  std::vector<double> jac(m * n), jtj(n * n), jtr(n), step, p_try;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    out.iterations = iter + 1;
    // forward-difference Jacobian
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(p[j]));
      std::vector<double> pj = p;
      pj[j] += h;
      const std::vector<double> rj = residuals(pj);
      for (std::size_t i = 0; i < m; ++i) jac[i * n + j] = (rj[i] - r[i]) / h;
    }
    for (std::size_t a = 0; a < n; ++a) {
      jtr[a] = 0.0;
      for (std::size_t b = a; b < n; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += jac[i * n + a] * jac[i * n + b];
        jtj[a * n + b] = s;
        jtj[b * n + a] = s;
      }
      for (std::size_t i = 0; i < m; ++i) jtr[a] += jac[i * n + a] * r[i];
    }

    bool improved = false;
    for (int damp = 0; damp < 40; ++damp) {
      std::vector<double> a = jtj;
      for (std::size_t d = 0; d < n; ++d) {
        a[d * n + d] += lambda * std::max(jtj[d * n + d], 1e-12);
      }
      std::vector<double> neg_jtr(n);
      for (std::size_t d = 0; d < n; ++d) neg_jtr[d] = -jtr[d];
      if (!solve_dense(a, neg_jtr, n, &step)) {
        lambda *= 10.0;
        continue;
      }
      p_try = p;
      for (std::size_t d = 0; d < n; ++d) p_try[d] += step[d];
      std::vector<double> r_try = residuals(p_try);
      const double cost_try = cost_of(r_try);
      if (std::isfinite(cost_try) && cost_try < cost) {
        double max_rel_step = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
          max_rel_step = std::max(max_rel_step,
                                  std::abs(step[d]) / (std::abs(p[d]) + opts.xtol));
        }
        const double dcost = cost - cost_try;
        p = p_try;
        r = std::move(r_try);
        cost = cost_try;
        lambda = std::max(lambda / 3.0, 1e-14);
        improved = true;
        if (dcost < opts.ftol * std::max(cost, 1e-300) || max_rel_step < opts.xtol) {
          out.converged = true;
        }
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (!improved) {
      // no downhill step found: converged if the gradient is already tiny
      double gnorm = 0.0;
      for (double g : jtr) gnorm = std::max(gnorm, std::abs(g));
      out.converged = gnorm < 1e-10 * std::max(1.0, cost);
      break;
    }
    if (out.converged) break;
  }

  // covariance = sigma^2 (J^T J)^-1 via column solves
  out.covariance.assign(n * n, 0.0);
  if (m > n) {
    const double sigma2 = cost / static_cast<double>(m - n);
    for (std::size_t c = 0; c < n; ++c) {
      std::vector<double> e(n, 0.0);
      e[c] = 1.0;
      std::vector<double> col;
      if (solve_dense(jtj, e, n, &col)) {
        for (std::size_t rw = 0; rw < n; ++rw) out.covariance[rw * n + c] = sigma2 * col[rw];
      }
    }
  }
  out.params = std::move(p);
  out.cost = cost;
  return out;
}

}  // namespace lasernoise
