#pragma once
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ssmvb {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;
inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;

inline double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) * 0.39894228040143267793994605993438;
}

inline double norm_pdf(double x, double mean, double sd) {
  return norm_pdf((x - mean) / sd) / sd;
}

inline double norm_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * kLog2Pi - std::log(sd) - 0.5 * z * z;
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// Wichura's AS 241 (PPND16): inverse standard-normal cdf, ~1e-15 accuracy.
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("norm_quantile: p outside (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

// Digamma by upward recurrence + asymptotic series; enough accuracy for
// entropy and expectation formulas.
inline double digamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("digamma: x must be > 0");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic series through x^-12; truncation error < 1e-14 at x >= 10.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 -
                            inv2 * (1.0 / 252.0 -
                                    inv2 * (1.0 / 240.0 -
                                            inv2 * (1.0 / 132.0 -
                                                    inv2 * 691.0 / 32760.0)))));
  return result;
}

inline double logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v)
    if (x > m) m = x;
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

namespace detail {
inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Adaptive Simpson on [a,b] to absolute tolerance tol.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-10, int max_depth = 48) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Mean and a batch-means standard error for a possibly autocorrelated scalar
// sequence; used by sampler validation tests.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe batch_mean_se(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  if (n < 4) throw std::invalid_argument("batch_mean_se: too few samples");
  const int nb = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  const int bs = n / nb;
  double grand = 0.0;
  for (int i = 0; i < nb * bs; ++i) grand += x[i];
  grand /= static_cast<double>(nb * bs);
  double v = 0.0;
  for (int b = 0; b < nb; ++b) {
    double bm = 0.0;
    for (int i = 0; i < bs; ++i) bm += x[b * bs + i];
    bm /= bs;
    v += (bm - grand) * (bm - grand);
  }
  v /= (nb - 1.0);
  return {grand, std::sqrt(v / nb)};
}

}  // namespace ssmvb
