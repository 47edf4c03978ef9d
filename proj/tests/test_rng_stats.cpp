#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "ssmvb/rng.hpp"
#include "ssmvb/stats.hpp"

using namespace ssmvb;

TEST_CASE("rng streams are deterministic and seed-sensitive") {
  Rng a(123), b(123), c(124);
  bool same = true, differ = false;
  for (int i = 0; i < 100; ++i) {
    const auto ua = a.next_u64();
    same = same && (ua == b.next_u64());
    differ = differ || (ua != c.next_u64());
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("derive_seed separates windows and methods") {
  std::set<std::uint64_t> seen;
  for (int w = 0; w < 50; ++w)
    for (int m = 0; m < 5; ++m) seen.insert(derive_seed(99, w, m));
  CHECK(seen.size() == 250);
  CHECK(derive_seed(99, 3, 1) == derive_seed(99, 3, 1));
  CHECK(derive_seed(99, 3, 1) != derive_seed(100, 3, 1));
}

TEST_CASE("uniform lies in (0,1) with the right moments") {
  Rng rng(7);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  // SE(mean) ~ 1/sqrt(12 n) ~ 6.5e-4
  CHECK(std::abs(mean - 0.5) < 4e-3);
  CHECK(std::abs(var - 1.0 / 12.0) < 2e-3);
}

TEST_CASE("normal moments up to kurtosis") {
  Rng rng(11);
  const int n = 400000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    m1 += z;
    m2 += z * z;
    m3 += z * z * z;
    m4 += z * z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  // SE(mean)=1/sqrt(n)~1.6e-3, SE(m2)=sqrt(2/n)~2.2e-3,
  // SE(m3)=sqrt(15/n)~6e-3, SE(m4)=sqrt(96/n)~1.5e-2.
  CHECK(std::abs(m1) < 8e-3);
  CHECK(std::abs(m2 - 1.0) < 1.2e-2);
  CHECK(std::abs(m3) < 3e-2);
  CHECK(std::abs(m4 - 3.0) < 8e-2);
}

TEST_CASE("gamma and inverse-gamma moments") {
  Rng rng(13);
  const int n = 300000;
  for (double shape : {0.6, 1.0, 2.5, 8.0}) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape);
      REQUIRE(g > 0.0);
      s += g;
      s2 += g * g;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    // Gamma(shape, 1): mean = var = shape.
    CHECK(std::abs(mean - shape) < 6.0 * std::sqrt(shape / n));
    CHECK(std::abs(var - shape) < 0.05 * std::max(1.0, shape));
  }
  // InvGamma(a, b): mean b/(a-1).
  const double a = 4.0, b = 3.0;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += rng.inv_gamma(a, b);
  CHECK(std::abs(s / n - b / (a - 1.0)) < 2e-2);
}

TEST_CASE("categorical sampling matches weights") {
  Rng rng(17);
  const double w[4] = {0.1, 0.4, 0.25, 0.25};
  int counts[4] = {0, 0, 0, 0};
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++counts[rng.categorical(w, 4, 1.0)];
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(counts[k] / static_cast<double>(n) - w[k]) < 5e-3);
}

TEST_CASE("normal cdf and quantile invert each other") {
  for (double p = 1e-8; p < 1.0; p += 0.0097) {
    const double x = norm_quantile(p);
    CHECK(std::abs(norm_cdf(x) - p) < 1e-9);
  }
  CHECK(norm_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  // Hand values: Phi^{-1}(0.975) = 1.959963984540054.
  CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK(norm_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
}

TEST_CASE("normal pdf differentiates the cdf") {
  for (double x : {-2.3, -0.7, 0.0, 0.9, 1.8}) {
    const double h = 1e-5;
    const double fd = (norm_cdf(x + h) - norm_cdf(x - h)) / (2.0 * h);
    CHECK(norm_pdf(x) == doctest::Approx(fd).epsilon(1e-8));
  }
  CHECK(norm_pdf(1.3, 0.5, 2.0) ==
        doctest::Approx(norm_pdf(0.4) / 2.0).epsilon(1e-14));
  CHECK(std::exp(norm_logpdf(1.3, 0.5, 2.0)) ==
        doctest::Approx(norm_pdf(1.3, 0.5, 2.0)).epsilon(1e-13));
}

TEST_CASE("digamma matches known values and the recurrence") {
  const double euler = 0.57721566490153286;
  CHECK(digamma(1.0) == doctest::Approx(-euler).epsilon(1e-11));
  CHECK(digamma(2.0) == doctest::Approx(1.0 - euler).epsilon(1e-11));
  CHECK(digamma(0.5) ==
        doctest::Approx(-euler - 2.0 * std::log(2.0)).epsilon(1e-11));
  Rng rng(19);
  for (int i = 0; i < 20; ++i) {
    const double x = 0.1 + 10.0 * rng.uniform();
    CHECK(digamma(x + 1.0) == doctest::Approx(digamma(x) + 1.0 / x).epsilon(1e-10));
  }
}

TEST_CASE("logsumexp is shift-stable and exact on small inputs") {
  const std::vector<double> v{0.3, -1.2, 2.0};
  double direct = 0.0;
  for (double x : v) direct += std::exp(x);
  CHECK(logsumexp(v) == doctest::Approx(std::log(direct)).epsilon(1e-14));
  std::vector<double> shifted = v;
  for (double& x : shifted) x += 700.0;  // direct exp would overflow
  CHECK(logsumexp(shifted) == doctest::Approx(logsumexp(v) + 700.0).epsilon(1e-13));
  CHECK(std::isinf(logsumexp({-INFINITY, -INFINITY})));
}

TEST_CASE("adaptive quadrature hits analytic integrals") {
  const auto sq = [](double x) { return x * x; };
  CHECK(integrate(sq, 0.0, 1.0, 1e-12) == doctest::Approx(1.0 / 3.0).epsilon(1e-11));
  const auto phi = [](double x) { return norm_pdf(x); };
  CHECK(integrate(phi, -8.0, 8.0, 1e-12) == doctest::Approx(1.0).epsilon(1e-10));
  const auto osc = [](double x) { return std::sin(3.0 * x); };
  const double exact = (1.0 - std::cos(6.0)) / 3.0;
  CHECK(integrate(osc, 0.0, 2.0, 1e-12) == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("batch means standard error is calibrated on iid draws") {
  Rng rng(23);
  std::vector<double> x(40000);
  for (auto& v : x) v = rng.normal();
  const auto ms = batch_mean_se(x);
  CHECK(std::abs(ms.mean) < 5.0 * ms.se);
  // For iid draws the batch-means SE should approximate 1/sqrt(n).
  const double iid_se = 1.0 / std::sqrt(static_cast<double>(x.size()));
  CHECK(ms.se > 0.5 * iid_se);
  CHECK(ms.se < 2.0 * iid_se);
}
