#include <doctest.h>

#include <cmath>

#include "lasernoise/errors.hpp"
#include "lasernoise/rng.hpp"
#include "lasernoise/spectra.hpp"

using namespace lasernoise;

TEST_CASE("psd_delta_nu: flat white spectrum") {
  const auto m = NoiseModel::white(100.0);
  CHECK(psd_delta_nu(m, 1e3) == 100.0);
  CHECK(psd_delta_nu(m, 0.0) == 100.0);
}

TEST_CASE("psd_delta_nu: servo bump includes both +-fg Gaussians") {
  // at f = fg the mirrored Gaussian adds exp(-(2 fg)^2/(2 sigma^2)) ~ 0 here
  const auto m = NoiseModel::servo_bump(2000.0, 1.5e3, 234e3);
  const double expected = 2000.0 * (1.0 + std::exp(-0.5 * std::pow(468e3 / 1.5e3, 2)));
  CHECK(psd_delta_nu(m, 234e3) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(psd_delta_nu(m, 234e3) == doctest::Approx(2000.0).epsilon(1e-6));
}

TEST_CASE("psd_delta_nu: band-limited white vanishes above the cutoff") {
  const auto m = NoiseModel::band_limited_white(3180.0, 1e3);
  CHECK(psd_delta_nu(m, 2e3) == 0.0);
  CHECK(psd_delta_nu(m, 999.0) == 3180.0);
}

TEST_CASE("psd evenness over random models and frequencies") {
  SplitMix64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    const double h0 = 200.0 * rng.next_double();
    const double hg = 3000.0 * rng.next_double();
    const double sg = 1e3 + 2e4 * rng.next_double();
    const double fg = 5e4 + 4e5 * rng.next_double();
    const double fc = 1e2 + 1e6 * rng.next_double();
    const auto m = NoiseModel::composite({NoiseModel::white(h0),
                                          NoiseModel::band_limited_white(h0 + 1.0, fc),
                                          NoiseModel::servo_bump(hg, sg, fg)});
    const double f = (rng.next_double() - 0.5) * 2e6;
    CHECK(psd_delta_nu(m, f) == psd_delta_nu(m, -f));
  }
}

TEST_CASE("psd_phi equals S_dnu/f^2 and is singular at f = 0") {
  const auto m = NoiseModel::white(100.0);
  CHECK(psd_phi(m, 100.0) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK_THROWS_AS(psd_phi(m, 0.0), validation_error);

  const auto bump = NoiseModel::servo_bump(25.0, 18e3, 130e3);
  CHECK(psd_phi(bump, 130e3) == doctest::Approx(25.0 / (130e3 * 130e3)).epsilon(1e-4));

  SplitMix64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const double f = 1.0 + 5e5 * rng.next_double();
    CHECK(psd_phi(bump, f) * f * f == doctest::Approx(psd_delta_nu(bump, f)).epsilon(1e-14));
  }
}

TEST_CASE("servo_bump_power values") {
  CHECK(servo_bump_power(2000.0, 1.5e3, 234e3).value == doctest::Approx(2.75e-4).epsilon(2e-3));
  CHECK(servo_bump_power(25.0, 18e3, 130e3).value == doctest::Approx(1.33e-4).epsilon(3e-3));
  CHECK(servo_bump_power(0.0, 1e3, 1e5).value == 0.0);
  CHECK_FALSE(servo_bump_power(2000.0, 1.5e3, 234e3).narrow_bump_warning);
  CHECK(servo_bump_power(25.0, 50e3, 130e3).narrow_bump_warning);
}

TEST_CASE("crossover_fx: white closed form and bisection agree") {
  const auto m = NoiseModel::white(100.0);
  CHECK(crossover_fx(m) == 400.0);
  CHECK(std::abs(crossover_fx_bisection(m) - 400.0) < 1e-10 * 400.0);
  CHECK(crossover_fx(NoiseModel::white(13.0)) == doctest::Approx(52.0));
}

TEST_CASE("crossover_fx: band-limited white solves the criterion") {
  // 2 h0 (1/fx - 1/fc) = 1/2  ->  fx = 4 h0 fc/(fc + 4 h0)
  const double h0 = 50.0, fc = 1e3;
  const double expected = 4 * h0 * fc / (fc + 4 * h0);
  CHECK(crossover_fx(NoiseModel::band_limited_white(h0, fc)) ==
        doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("crossover_fx: criterion unreachable for a weak pure bump") {
  // total phase power ~ s_g ~ 1e-4 << 1/2
  const auto m = NoiseModel::servo_bump(25.0, 18e3, 130e3);
  CHECK_THROWS_AS(crossover_fx(m), numerical_error);
}

TEST_CASE("variance_delta_nu") {
  CHECK(variance_delta_nu(NoiseModel::band_limited_white(3180.0, 1e3)) ==
        doctest::Approx(6.36e6).epsilon(1e-12));
  CHECK_THROWS_AS(variance_delta_nu(NoiseModel::white(100.0)), numerical_error);
  const auto comp = NoiseModel::composite({NoiseModel::band_limited_white(1.0, 1.0),
                                           NoiseModel::band_limited_white(2.0, 1.0)});
  CHECK(variance_delta_nu(comp) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("variance additivity on random composites") {
  SplitMix64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto a = NoiseModel::band_limited_white(10.0 * rng.next_double(), 1e3 * (0.1 + rng.next_double()));
    const auto b = NoiseModel::servo_bump(100.0 * rng.next_double(), 1e3 * (0.1 + rng.next_double()),
                                          1e5 * (0.1 + rng.next_double()));
    const auto comp = NoiseModel::composite({a, b});
    const double lhs = variance_delta_nu(comp);
    const double rhs = variance_delta_nu(a) + variance_delta_nu(b);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("NoiseModel JSON round trip") {
  const auto m = NoiseModel::composite(
      {NoiseModel::white(13.0), NoiseModel::servo_bump(25.0, 18e3, 130e3),
       NoiseModel::band_limited_white(5.0, 2e4)});
  const auto back = NoiseModel::from_json(m.to_json());
  CHECK(back.kind() == NoiseKind::Composite);
  for (double f : {0.0, 1e3, 1.3e5, 5e5}) {
    CHECK(psd_delta_nu(back, f) == psd_delta_nu(m, f));
  }
  CHECK_THROWS_AS(NoiseModel::from_json(nlohmann::json{{"kind", "pink"}}), validation_error);
  CHECK_THROWS_AS(NoiseModel::from_json(nlohmann::json{{"kind", "white"}}), validation_error);
}

TEST_CASE("model validation rejects bad parameters") {
  CHECK_THROWS_AS(NoiseModel::white(-1.0), validation_error);
  CHECK_THROWS_AS(NoiseModel::band_limited_white(1.0, 0.0), validation_error);
  CHECK_THROWS_AS(NoiseModel::servo_bump(1.0, -1.0, 1e5), validation_error);
  CHECK_THROWS_AS(NoiseModel::servo_bump(1.0, 1e3, 0.0), validation_error);
}
