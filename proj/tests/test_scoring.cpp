#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssmvb/rng.hpp"
#include "ssmvb/scoring.hpp"
#include "ssmvb/stats.hpp"

using namespace ssmvb;

namespace {

pred::PredictiveDensity gaussian_pd(double m, double s) {
  pred::PredictiveDensity pd;
  pd.mean = {m};
  pd.sd = {s};
  return pd;
}

pred::PredictiveDensity test_mixture() {
  pred::PredictiveDensity pd;
  pd.mean = {-1.0, 0.2, 0.8, 2.5};
  pd.sd = {0.5, 1.2, 0.3, 0.9};
  return pd;
}

// Closed-form CRPS of a single Gaussian, reported as a nonpositive penalty.
double crps_gaussian(double m, double s, double y) {
  const double z = (y - m) / s;
  return -s * (z * (2.0 * norm_cdf(z) - 1.0) + 2.0 * norm_pdf(z) -
               1.0 / std::sqrt(M_PI));
}

// Quantile-decomposition oracle: -int 2 (1{q_a >= y} - a)(q_a - y) w(a) da
// with exact bisection quantiles, split at the cdf kink.
double pinball_oracle(const pred::PredictiveDensity& pd, double y,
                      bool weighted) {
  const auto f = [&](double a) {
    const double qa = pd.quantile(a);
    const double ind = qa >= y ? 1.0 : 0.0;
    const double w = weighted ? (1.0 - a) * (1.0 - a) : 1.0;
    return 2.0 * (ind - a) * (qa - y) * w;
  };
  const double eps = 1e-7;
  const double split = std::clamp(pd.cdf(y), 2.0 * eps, 1.0 - 2.0 * eps);
  return -(integrate(f, eps, split, 1e-9) +
           integrate(f, split, 1.0 - eps, 1e-9));
}

}  // namespace

TEST_CASE("continuous ranked probability score matches the gaussian formula") {
  for (double m : {-0.7, 0.0, 1.4}) {
    for (double s : {0.4, 1.0, 2.3}) {
      for (double y : {-2.0, -0.1, 0.0, 0.9, 3.5}) {
        const auto pd = gaussian_pd(m, s);
        CHECK(std::abs(score::crps(pd, y) - crps_gaussian(m, s, y)) < 1e-6);
      }
    }
  }
  // A near-point-mass at the observation scores near zero.
  const auto tight = gaussian_pd(0.3, 1e-6);
  CHECK(std::abs(score::crps(tight, 0.3)) < 1e-5);
}

TEST_CASE("crps agrees with its quantile decomposition and the mc auditor") {
  const auto pd = test_mixture();
  for (double y : {-1.5, 0.4, 2.0}) {
    CHECK(score::crps(pd, y) ==
          doctest::Approx(pinball_oracle(pd, y, false)).epsilon(1e-5));
  }

  const double exact = score::crps(pd, 0.4);
  const int reps = 10, n = 100000;
  double s1 = 0.0, s2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    Rng rng(1000 + r);
    const double est = score::crps_sample(pd, 0.4, n, rng);
    s1 += est;
    s2 += est * est;
  }
  const double mean = s1 / reps;
  const double sd = std::sqrt((s2 / reps - mean * mean) * reps / (reps - 1));
  CHECK(std::abs(mean - exact) < 4.5 * sd / std::sqrt(double(reps)));
  Rng rng(1);
  CHECK_THROWS(score::crps_sample(pd, 0.4, 0, rng));
}

TEST_CASE("tail-weighted crps converges in the grid and the table") {
  const auto pd = test_mixture();
  for (double y : {-1.2, 0.4, 2.8}) {
    const double oracle = pinball_oracle(pd, y, true);
    const double exact_fine = score::twcrps(pd, y, 8001, false);
    const double exact_coarse = score::twcrps(pd, y, 2001, false);
    const double fast_coarse = score::twcrps(pd, y, 2001, true);
    CHECK(std::abs(exact_fine - oracle) < 1e-5);
    CHECK(std::abs(exact_coarse - exact_fine) < 1e-4);
    CHECK(std::abs(fast_coarse - exact_coarse) < 2e-3);
  }
  CHECK_THROWS(score::twcrps(pd, 0.0, 2));
}

TEST_CASE("interval score reproduces hand-computed standard normal cases") {
  const auto pd = gaussian_pd(0.0, 1.0);
  // u = Phi^{-1}(0.975), l = -u; inside pays the width, outside adds
  // (2 / 0.05) times the exceedance.
  CHECK(std::abs(score::interval_score(pd, 0.0, 0.05) -
                 (-3.919927969080108)) < 1e-6);
  CHECK(std::abs(score::interval_score(pd, 3.0, 0.05) -
                 (-45.52136858747795)) < 1e-6);
  CHECK_THROWS(score::interval_score(pd, 0.0, 0.0));
  CHECK_THROWS(score::interval_score(pd, 0.0, 1.0));
}

TEST_CASE("censored scores equal the log of the quadrature region mass") {
  const auto pd = test_mixture();
  double lo = -14.0, hi = 14.0;  // beyond every component's 10-sd bracket

  const score::Region low{score::Region::Kind::kLowerTail, -0.8};
  const score::Region up{score::Region::Kind::kUpperTail, 1.9};

  // Observation inside the region: plain log density.
  CHECK(score::censored_score(pd, -1.3, low) == pd.log_pdf(-1.3));
  CHECK(score::censored_score(pd, -0.8, low) == pd.log_pdf(-0.8));
  CHECK(score::censored_score(pd, 2.4, up) == pd.log_pdf(2.4));
  CHECK(score::censored_score(pd, 1.9, up) == pd.log_pdf(1.9));

  // Outside: log mass of the complement region, checked by quadrature.
  const double mass_above =
      integrate([&](double z) { return pd.pdf(z); }, -0.8, hi, 1e-11);
  CHECK(score::censored_score(pd, 0.3, low) ==
        doctest::Approx(std::log(mass_above)).epsilon(1e-6));
  const double mass_below =
      integrate([&](double z) { return pd.pdf(z); }, lo, 1.9, 1e-11);
  CHECK(score::censored_score(pd, 0.3, up) ==
        doctest::Approx(std::log(mass_below)).epsilon(1e-6));
}

TEST_CASE("log score records tail underflow as negative infinity") {
  const auto pd = test_mixture();
  CHECK(score::log_score(pd, 0.4) == pd.log_pdf(0.4));
  const double far = score::log_score(pd, 1e300);
  CHECK(std::isinf(far));
  CHECK(far < 0.0);
}

TEST_CASE("empirical quantiles interpolate the order statistics") {
  const std::vector<double> sample{3.0, 1.0, 4.0, 2.0};
  CHECK(score::empirical_quantile(sample, 0.0) == 1.0);
  CHECK(score::empirical_quantile(sample, 1.0) == 4.0);
  CHECK(score::empirical_quantile(sample, 0.5) == doctest::Approx(2.5));
  CHECK(score::empirical_quantile(sample, 0.25) == doctest::Approx(1.75));
  CHECK_THROWS(score::empirical_quantile({}, 0.5));
  CHECK_THROWS(score::empirical_quantile(sample, -0.1));
  CHECK_THROWS(score::empirical_quantile(sample, 1.1));
}

TEST_CASE("the combined record wires every measure with the window knobs") {
  const auto pd = test_mixture();
  std::vector<double> window(100);
  for (int i = 0; i < 100; ++i) window[i] = double((i * 37) % 100 + 1);
  const double y = 0.5;

  const auto r = score::score_all(pd, y, window, "qnk", 42, 501, 0.2, false);
  CHECK(r.method == "qnk");
  CHECK(r.t == 42);
  CHECK(r.ls == score::log_score(pd, y));
  CHECK(r.crps == score::crps(pd, y));
  CHECK(r.twcrps == score::twcrps(pd, y, 501, false));
  CHECK(r.is == score::interval_score(pd, y, 0.2));

  // Thresholds are the 10/20/80/90% window quantiles (here 1..100).
  CHECK(r.cs10 == score::censored_score(
                      pd, y, {score::Region::Kind::kLowerTail, 10.9}));
  CHECK(r.cs20 == score::censored_score(
                      pd, y, {score::Region::Kind::kLowerTail, 20.8}));
  CHECK(r.cs80 == score::censored_score(
                      pd, y, {score::Region::Kind::kUpperTail, 80.2}));
  CHECK(r.cs90 == score::censored_score(
                      pd, y, {score::Region::Kind::kUpperTail, 90.1}));
}

TEST_CASE("the true model outscores a shifted rival on average") {
  const auto f = gaussian_pd(0.5, 1.0);
  const auto g = gaussian_pd(0.0, 1.0);
  Rng rng(77);
  const int n = 3000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = rng.normal();
    const double d = score::crps(f, y) - score::crps(g, y);
    s1 += d;
    s2 += d * d;
  }
  const double mean = s1 / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(mean < -3.0 * se);
}
