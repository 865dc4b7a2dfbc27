#include <doctest.h>

#include <cmath>

#include "lasernoise/analytic.hpp"
#include "lasernoise/errors.hpp"
#include "lasernoise/rng.hpp"
#include "lasernoise/spectra.hpp"

using namespace lasernoise;

namespace {
const double kOmega0 = 2.0 * M_PI * 1e6;
}

TEST_CASE("white-noise one-photon closed form") {
  const auto r = error_white_1p(40.0, 0.5, kOmega0, Averaging::InitialX);
  CHECK(r.value == doctest::Approx(9.87e-5).epsilon(1e-3));
  CHECK(r.value == doctest::Approx(std::pow(M_PI, 3) * 40.0 * 0.5 / kOmega0).epsilon(1e-15));
  CHECK(error_white_1p(0.0, 1.0, kOmega0, Averaging::InitialX).value == 0.0);
  // state-averaged / initial-x ratio is exactly 4/3
  const double ratio = error_white_1p(40.0, 0.5, kOmega0, Averaging::StateAveraged).value /
                       error_white_1p(40.0, 0.5, kOmega0, Averaging::InitialX).value;
  CHECK(ratio == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK_FALSE(r.weak_noise_warning);
  CHECK(error_white_1p(1e5, 0.5, kOmega0, Averaging::InitialX).weak_noise_warning);
}

TEST_CASE("white-noise monotonicity in h0, N, omega0") {
  SplitMix64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const double h0 = 1.0 + 100.0 * rng.next_double();
    const double n = 0.5 * (1 + (rng.next() % 6));
    const double om = kOmega0 * (0.5 + rng.next_double());
    const double base = error_white_1p(h0, n, om, Averaging::InitialX).value;
    CHECK(error_white_1p(h0 * 1.5, n, om, Averaging::InitialX).value > base);
    CHECK(error_white_1p(h0, n + 0.5, om, Averaging::InitialX).value > base);
    CHECK(error_white_1p(h0, n, om * 1.5, Averaging::InitialX).value < base);
  }
}

TEST_CASE("servo-bump closed form: resonant limit and suppression zero") {
  const double sg = 2.75e-4;
  // exactly resonant: E = sg pi^2 N^2/4 -> sg pi^2/16 for N=1/2
  const double fg_res = kOmega0 / (2.0 * M_PI);
  CHECK(error_servo_1p(sg, fg_res, 0.5, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(sg * M_PI * M_PI / 16.0).epsilon(1e-12));
  CHECK(error_servo_1p(sg, fg_res, 0.5, kOmega0, Averaging::StateAveraged).value ==
        doctest::Approx(sg * M_PI * M_PI / 12.0).epsilon(1e-12));
  // fg = 2 Omega0/2pi with integer N: cosine term cancels exactly
  CHECK(error_servo_1p(sg, 2.0 * fg_res, 1.0, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(0.0));
  // benchmark: sg = 1.6e-4 resonant pi pulse -> 9.9e-5
  CHECK(error_servo_1p(1.6e-4, fg_res, 0.5, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(9.87e-5).epsilon(2e-3));
}

TEST_CASE("servo-bump closed form approaches the resonant limit continuously") {
  const double sg = 1e-4;
  const double fg_res = kOmega0 / (2.0 * M_PI);
  const double lim = error_servo_1p(sg, fg_res, 0.5, kOmega0, Averaging::InitialX).value;
  const double near = error_servo_1p(sg, fg_res * (1.0 + 1e-4), 0.5, kOmega0,
                                     Averaging::InitialX).value;
  CHECK(near == doctest::Approx(lim).epsilon(2e-3));
}

TEST_CASE("two-photon white and servo errors are additive") {
  CHECK(error_white_2p(40.0, 40.0, 0.5, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(1.974e-4).epsilon(1e-3));
  CHECK(error_white_2p(40.0, 0.0, 0.5, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(error_white_1p(40.0, 0.5, kOmega0, Averaging::InitialX).value)
            .epsilon(1e-14));
  CHECK(error_white_2p(25.0, 55.0, 0.5, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(error_white_2p(55.0, 25.0, 0.5, kOmega0, Averaging::InitialX).value)
            .epsilon(1e-14));

  const double sg = 1.3e-4, fg = 130e3;
  CHECK(error_servo_2p(sg, fg, sg, fg, 1.0, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(2.0 * error_servo_1p(sg, fg, 1.0, kOmega0, Averaging::InitialX).value)
            .epsilon(1e-14));
  CHECK(error_servo_2p(sg, fg, 0.0, 200e3, 1.0, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(error_servo_1p(sg, fg, 1.0, kOmega0, Averaging::InitialX).value)
            .epsilon(1e-14));
  const double fres = kOmega0 / (2 * M_PI);
  CHECK(error_servo_2p(1e-4, fres, 3e-4, fres, 0.5, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(4e-4 * M_PI * M_PI / 16.0).epsilon(1e-12));
}

TEST_CASE("band-limited closed form: white and quasistatic limits") {
  const double h0 = 3180.0;
  // y = 100: approaches the unbounded-white result within 1%
  const double f100 = 100.0 * kOmega0 / (2.0 * M_PI);
  for (double n : {0.5, 1.0}) {
    const double bl = error_bandlimited_1p(h0, f100, n, kOmega0, Averaging::InitialX).value;
    const double wh = error_white_1p(h0, n, kOmega0, Averaging::InitialX).value;
    CHECK(bl == doctest::Approx(wh).epsilon(0.01));
  }
  // y = 0.01, N = 1/2: approaches 8 pi^2 h0 fc/Omega0^2 within 2%
  const double f001 = 0.01 * kOmega0 / (2.0 * M_PI);
  const double bl = error_bandlimited_1p(h0, f001, 0.5, kOmega0, Averaging::InitialX).value;
  CHECK(bl == doctest::Approx(8.0 * M_PI * M_PI * h0 * f001 / (kOmega0 * kOmega0)).epsilon(0.02));
  CHECK(error_bandlimited_1p(0.0, 1e3, 0.5, kOmega0, Averaging::InitialX).value == 0.0);
}

TEST_CASE("band-limited closed form is continuous across y = 1") {
  const double h0 = 500.0;
  const double fc1 = kOmega0 / (2.0 * M_PI);
  for (double n : {0.5, 1.0, 1.5}) {
    for (auto avg : {Averaging::InitialX, Averaging::StateAveraged}) {
      const double at = error_bandlimited_1p(h0, fc1, n, kOmega0, avg).value;
      const double below = error_bandlimited_1p(h0, fc1 * (1 - 1e-7), n, kOmega0, avg).value;
      const double above = error_bandlimited_1p(h0, fc1 * (1 + 1e-7), n, kOmega0, avg).value;
      CHECK(below == doctest::Approx(at).epsilon(1e-5));
      CHECK(above == doctest::Approx(at).epsilon(1e-5));
    }
  }
}

TEST_CASE("band-limited validity flag marks the integer-N breakdown region") {
  const double h0 = 3180.0;
  CHECK(error_bandlimited_1p(h0, 1.2 * h0, 1.0, kOmega0, Averaging::InitialX).validity_warning);
  CHECK_FALSE(error_bandlimited_1p(h0, 2.0 * h0, 1.0, kOmega0, Averaging::InitialX).validity_warning);
  CHECK_FALSE(error_bandlimited_1p(h0, 1.2 * h0, 0.5, kOmega0, Averaging::InitialX).validity_warning);
}

TEST_CASE("band-limited closed form equals the general quadrature (oracle chain)") {
  const double h0 = 3180.0;
  for (double fc : {1e3, 5e4, 159154.9, 5e5}) {
    const auto model = NoiseModel::band_limited_white(h0, fc);
    for (double n : {0.5, 1.0}) {
      const double closed = error_bandlimited_1p(h0, fc, n, kOmega0, Averaging::InitialX).value;
      const double quad =
          error_general(model, kOmega0, 2.0 * M_PI * n / kOmega0, Averaging::InitialX).value;
      CHECK(quad == doctest::Approx(closed).epsilon(1e-4));
    }
  }
}

TEST_CASE("quasistatic closed forms") {
  const double h0 = 3180.0, fc = 100.0;
  CHECK(error_quasistatic_1p(h0, fc, 0.5, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(6.36e-7).epsilon(1e-3));
  CHECK(error_quasistatic_1p(h0, fc, 0.5, kOmega0, Averaging::StateAveraged).value ==
        doctest::Approx(16.0 * M_PI * M_PI * h0 * fc / (3.0 * kOmega0 * kOmega0)).epsilon(1e-14));
  // half-integer N agrees with the band-limited limit
  CHECK(error_quasistatic_1p(h0, fc, 0.5, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(error_bandlimited_1p(h0, fc, 0.5, kOmega0, Averaging::InitialX).value)
            .epsilon(2e-4));
  // integer N scales as (h0 fc)^2: doubling h0 quadruples the error
  const double e1 = error_quasistatic_1p(h0, fc, 1.0, kOmega0, Averaging::InitialX).value;
  const double e2 = error_quasistatic_1p(2 * h0, fc, 1.0, kOmega0, Averaging::InitialX).value;
  CHECK(e2 == doctest::Approx(4.0 * e1).epsilon(1e-12));
  // two-photon replaces h0 fc -> h1 fc1 + h2 fc2 (squared for integer N)
  CHECK(error_quasistatic_2p(h0, fc, h0, fc, 1.0, kOmega0, Averaging::InitialX).value ==
        doctest::Approx(4.0 * e1).epsilon(1e-12));
}

TEST_CASE("quasistatic closed form vs Gaussian-average brute-force oracle") {
  // sample dnu ~ N(0, 2 h0 fc), evolve the exact static solution, average
  const double h0 = 200.0, fc = 300.0;
  const double sigma = std::sqrt(2.0 * h0 * fc);
  for (double n : {0.5, 1.0}) {
    const double t = 2.0 * M_PI * n / kOmega0;
    SplitMix64 rng(99);
    const int draws = 100000;
    double acc_x = 0.0;
    for (int i = 0; i < draws; ++i) {
      // Box-Muller
      const double u1 = rng.next_double(), u2 = rng.next_double();
      const double z = std::sqrt(-2.0 * std::log(u1 + 1e-300)) * std::cos(2.0 * M_PI * u2);
      const double dnu = sigma * z;
      const double eps = 2.0 * M_PI * dnu / kOmega0;
      const double omp = kOmega0 * std::sqrt(1.0 + eps * eps);
      acc_x += eps * eps / (2.0 * (1.0 + eps * eps)) +
               std::cos(omp * t) / (2.0 * (1.0 + eps * eps));
    }
    const int sgn = (std::lround(2 * n) % 2 == 0) ? 1 : -1;
    const double mc = 0.5 - sgn * (acc_x / draws);
    const double closed = error_quasistatic_1p(h0, fc, n, kOmega0, Averaging::InitialX).value;
    CHECK(mc == doctest::Approx(closed).epsilon(n == 0.5 ? 0.02 : 0.1));
  }
}

TEST_CASE("intensity-noise closed form") {
  CHECK(error_intensity({3.7e-6}, 0.5).value == doctest::Approx(2.28e-6).epsilon(2e-3));
  CHECK(error_intensity({8e-5, 8e-5}, 0.5).value == doctest::Approx(9.87e-5).epsilon(1e-3));
  CHECK(error_intensity({0.0}, 1.0).value == 0.0);
}

TEST_CASE("error_general reproduces the white closed form at gate times") {
  const double h0 = 40.0;
  const auto model = NoiseModel::white(h0);
  for (double n : {0.5, 1.0, 1.5}) {
    const double tg = 2.0 * M_PI * n / kOmega0;
    const auto r = error_general(model, kOmega0, tg, Averaging::InitialX);
    CHECK(r.value ==
          doctest::Approx(error_white_1p(h0, n, kOmega0, Averaging::InitialX).value).epsilon(1e-4));
    const auto ra = error_general(model, kOmega0, tg, Averaging::StateAveraged);
    CHECK(ra.value ==
          doctest::Approx(error_white_1p(h0, n, kOmega0, Averaging::StateAveraged).value)
              .epsilon(1e-4));
  }
}

TEST_CASE("error_general matches the servo closed form for a narrow bump") {
  const double fg = 0.7 * kOmega0 / (2.0 * M_PI);
  const double sigma = 0.01 * fg;
  const double hg = 500.0;
  const auto model = NoiseModel::servo_bump(hg, sigma, fg);
  const double sg = servo_bump_power(hg, sigma, fg).value;
  const double tg = M_PI / kOmega0;
  const double quad = error_general(model, kOmega0, tg, Averaging::InitialX).value;
  const double closed = error_servo_1p(sg, fg, 0.5, kOmega0, Averaging::InitialX).value;
  CHECK(quad == doctest::Approx(closed).epsilon(0.02));
}

TEST_CASE("error_general: finite and continuous between gate multiples") {
  const auto model = NoiseModel::white(40.0);
  const double tg0 = 1.3 * M_PI / kOmega0;
  const double e0 = error_general(model, kOmega0, tg0, Averaging::InitialX).value;
  CHECK(std::isfinite(e0));
  CHECK(e0 > 0.0);
  for (double rel : {1e-3, -1e-3, 2e-3}) {
    const double e1 = error_general(model, kOmega0, tg0 * (1 + rel), Averaging::InitialX).value;
    CHECK(e1 == doctest::Approx(e0).epsilon(0.02));
  }
  // quadrature method tag and state-averaged restriction
  CHECK(error_general(model, kOmega0, tg0, Averaging::InitialX).method ==
        ErrorMethod::Quadrature);
  CHECK_THROWS_AS(error_general(model, kOmega0, tg0, Averaging::StateAveraged),
                  validation_error);
}

TEST_CASE("error_general quasistatic oracle at arbitrary gate time") {
  // for fc << Omega0 the error approaches sigma_eps^2 (1-cos(Omega0 t))^2/4
  const double h0 = 50.0, fc = 500.0;
  const auto model = NoiseModel::band_limited_white(h0, fc);
  const double sig_eps2 = std::pow(2.0 * M_PI / kOmega0, 2) * 2.0 * h0 * fc;
  for (double frac : {0.7, 1.3, 2.4}) {
    const double tg = frac * M_PI / kOmega0;
    const double expect = sig_eps2 * std::pow(1.0 - std::cos(kOmega0 * tg), 2) / 4.0;
    const double got = error_general(model, kOmega0, tg, Averaging::InitialX).value;
    CHECK(got == doctest::Approx(expect).epsilon(0.01));
  }
}

TEST_CASE("rho_evolution_weak_noise") {
  auto zero_psd = [](double) { return 0.0; };
  const double t = 0.37 * M_PI / kOmega0;
  const auto [x0, y0] = rho_evolution_weak_noise(zero_psd, kOmega0, t);
  CHECK(x0 == doctest::Approx(0.5 * std::cos(kOmega0 * t)).epsilon(1e-12));
  CHECK(y0 == doctest::Approx(0.5 * std::sin(kOmega0 * t)).epsilon(1e-12));

  const double h0 = 40.0;
  auto white = [h0](double) { return h0; };
  // at gate times the sigma_y correction vanishes by symmetry (white noise)
  for (double n : {0.5, 1.0}) {
    const double tg = 2.0 * M_PI * n / kOmega0;
    const auto [x, y] = rho_evolution_weak_noise(white, kOmega0, tg);
    const double e_closed = error_white_1p(h0, n, kOmega0, Averaging::InitialX).value;
    const int sgn = (std::lround(2 * n) % 2 == 0) ? 1 : -1;
    CHECK(x == doctest::Approx(sgn * (0.5 - e_closed)).epsilon(2e-4));
    CHECK(std::abs(y) < 1e-3 * e_closed);  // 4 orders below the sigma_x correction
  }

  // internal consistency with error_general to 1e-10
  const double tg = 1.3 * M_PI / kOmega0;
  const auto [x, y] = rho_evolution_weak_noise(white, kOmega0, tg);
  const double f = 0.5 + 2.0 * x * 0.5 * std::cos(kOmega0 * tg) +
                   2.0 * y * 0.5 * std::sin(kOmega0 * tg);
  const double via_rho = 1.0 - f;
  const double direct = error_general(white, kOmega0, tg, Averaging::InitialX).value;
  CHECK(std::abs(via_rho - direct) < 1e-10);
}

TEST_CASE("nonnegativity of closed forms for random nonnegative spectra") {
  SplitMix64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const double h0 = 100.0 * rng.next_double();
    const double n = 0.5 * (1 + (rng.next() % 4));
    const double sg = 1e-3 * rng.next_double();
    const double fg = 2e6 * (0.05 + rng.next_double());
    CHECK(error_white_1p(h0, n, kOmega0, Averaging::InitialX).value >= 0.0);
    CHECK(error_white_1p(h0, n, kOmega0, Averaging::StateAveraged).value >= 0.0);
    CHECK(error_servo_1p(sg, fg, n, kOmega0, Averaging::InitialX).value >= 0.0);
    CHECK(error_servo_1p(sg, fg, n, kOmega0, Averaging::StateAveraged).value >= 0.0);
  }
}

TEST_CASE("fidelity measures for x rotations") {
  auto rx = [](double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return Unitary2{std::complex<double>(c, 0), std::complex<double>(0, -s),
                    std::complex<double>(0, -s), std::complex<double>(c, 0)};
  };
  const auto u0 = rx(0.77);
  CHECK(fidelity_operator(u0, u0, FidelityMeasure::Standard) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fidelity_operator(u0, u0, FidelityMeasure::TraceOverlap) == doctest::Approx(1.0).epsilon(1e-15));
  for (int i = 0; i <= 20; ++i) {
    const double delta = M_PI * i / 20.0;
    const double f_std = fidelity_operator(rx(0.4), rx(0.4 + delta), FidelityMeasure::Standard);
    const double f_alt = fidelity_operator(rx(0.4), rx(0.4 + delta), FidelityMeasure::TraceOverlap);
    const double c2 = std::pow(std::cos(delta / 2), 2);
    CHECK(std::abs(f_std - (1.0 / 3.0 + 2.0 / 3.0 * c2)) < 1e-12);
    CHECK(std::abs(f_alt - c2) < 1e-12);
  }
  const Unitary2 not_unitary{2.0, 0.0, 0.0, 1.0};
  CHECK_THROWS_AS(fidelity_operator(u0, not_unitary, FidelityMeasure::Standard), validation_error);
}

TEST_CASE("input validation of the closed forms") {
  CHECK_THROWS_AS(error_white_1p(40.0, 0.3, kOmega0, Averaging::InitialX), validation_error);
  CHECK_THROWS_AS(error_white_1p(40.0, 0.5, 0.0, Averaging::InitialX), validation_error);
  CHECK_THROWS_AS(error_intensity({-1.0}, 0.5), validation_error);
  CHECK(is_half_integer(1.5));
  CHECK_FALSE(is_half_integer(0.75));
}
