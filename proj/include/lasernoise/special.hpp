#pragma once

namespace lasernoise {

struct SiCi {
  double si;
  double ci;
};

// Sine and cosine integrals, Si(x) = int_0^x sin(t)/t dt and
// Ci(x) = -int_x^inf cos(t)/t dt, for x > 0 (Si also defined at x = 0).
// Power series below x = 4, continued fraction for E1(ix) above.
// Accuracy target 1e-12 on [1e-3, 1e3]; the band-limited error formulas
// involve near-cancellations, so this is load-bearing.
SiCi si_ci(double x);

double sine_integral(double x);    // odd extension for x < 0
double cosine_integral(double x);  // requires x > 0

}  // namespace lasernoise
