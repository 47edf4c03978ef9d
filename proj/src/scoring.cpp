#include "ssmvb/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ssmvb/stats.hpp"

namespace ssmvb::score {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void mixture_bracket(const pred::PredictiveDensity& pd, double& lo,
                     double& hi) {
  lo = pd.mean[0] - 10.0 * pd.sd[0];
  hi = pd.mean[0] + 10.0 * pd.sd[0];
  for (int j = 1; j < pd.size(); ++j) {
    lo = std::min(lo, pd.mean[j] - 10.0 * pd.sd[j]);
    hi = std::max(hi, pd.mean[j] + 10.0 * pd.sd[j]);
  }
}
}  // namespace

double log_score(const pred::PredictiveDensity& pd, double y_obs) {
  return pd.log_pdf(y_obs);
}

double censored_score(const pred::PredictiveDensity& pd, double y_obs,
                      const Region& region) {
  const bool in_region = (region.kind == Region::Kind::kLowerTail)
                             ? (y_obs <= region.threshold)
                             : (y_obs >= region.threshold);
  if (in_region) return pd.log_pdf(y_obs);
  // Mass outside the region, through the mixture cdf.
  const double cdf_thr = pd.cdf(region.threshold);
  const double complement = (region.kind == Region::Kind::kLowerTail)
                                ? 1.0 - cdf_thr
                                : cdf_thr;
  return complement > 0.0 ? std::log(complement) : kNegInf;
}

double crps(const pred::PredictiveDensity& pd, double y_obs) {
  double lo, hi;
  mixture_bracket(pd, lo, hi);
  lo = std::min(lo, y_obs - 1.0);
  hi = std::max(hi, y_obs + 1.0);
  const auto below = [&pd](double z) {
    const double c = pd.cdf(z);
    return c * c;
  };
  const auto above = [&pd](double z) {
    const double c = pd.cdf(z) - 1.0;
    return c * c;
  };
  return -(integrate(below, lo, y_obs, 1e-9) +
           integrate(above, y_obs, hi, 1e-9));
}

double crps_sample(const pred::PredictiveDensity& pd, double y_obs,
                   int n_draws, Rng& rng) {
  if (n_draws < 1) throw std::invalid_argument("crps_sample: n_draws < 1");
  const int J = pd.size();
  double e_abs = 0.0, e_pair = 0.0;
  for (int i = 0; i < n_draws; ++i) {
    const int a = static_cast<int>(rng.uniform() * J);
    const int b = static_cast<int>(rng.uniform() * J);
    const double ya = rng.normal(pd.mean[a], pd.sd[a]);
    const double yb = rng.normal(pd.mean[b], pd.sd[b]);
    e_abs += 0.5 * (std::abs(ya - y_obs) + std::abs(yb - y_obs));
    e_pair += std::abs(ya - yb);
  }
  return -(e_abs / n_draws - 0.5 * e_pair / n_draws);
}

namespace {

// Quantiles of the mixture on an interpolated cdf table; accurate to the
// table resolution, which the grid-convergence test bounds.
class QuantileTable {
 public:
  QuantileTable(const pred::PredictiveDensity& pd, int table_n) {
    double lo, hi;
    mixture_bracket(pd, lo, hi);
    x_.resize(table_n);
    c_.resize(table_n);
    const double step = (hi - lo) / (table_n - 1);
    for (int i = 0; i < table_n; ++i) {
      x_[i] = lo + step * i;
      c_[i] = pd.cdf(x_[i]);
    }
    // cdf is monotone; guard against flat stretches for the interpolation.
    for (int i = 1; i < table_n; ++i) c_[i] = std::max(c_[i], c_[i - 1]);
  }

  double operator()(double u) const {
    const auto it = std::lower_bound(c_.begin(), c_.end(), u);
    if (it == c_.begin()) return x_.front();
    if (it == c_.end()) return x_.back();
    const size_t k = it - c_.begin();
    const double c0 = c_[k - 1], c1 = c_[k];
    const double w = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.5;
    return x_[k - 1] + w * (x_[k] - x_[k - 1]);
  }

 private:
  std::vector<double> x_, c_;
};

}  // namespace

double twcrps(const pred::PredictiveDensity& pd, double y_obs, int grid_n,
              bool fast_table) {
  if (grid_n < 3) throw std::invalid_argument("twcrps: grid too small");
  // Midpoint composite rule on alpha_i = (i + 1/2) / grid_n, i = 0..grid_n-1.
  const double step = 1.0 / grid_n;
  double acc = 0.0;
  if (fast_table) {
    const QuantileTable table(pd, 2048);
    for (int i = 0; i < grid_n; ++i) {
      const double a = (i + 0.5) * step;
      const double qa = table(a);
      const double ind = qa >= y_obs ? 1.0 : 0.0;
      const double w = (1.0 - a) * (1.0 - a);
      acc += 2.0 * (ind - a) * (qa - y_obs) * w;
    }
  } else {
    for (int i = 0; i < grid_n; ++i) {
      const double a = (i + 0.5) * step;
      const double qa = pd.quantile(a);
      const double ind = qa >= y_obs ? 1.0 : 0.0;
      const double w = (1.0 - a) * (1.0 - a);
      acc += 2.0 * (ind - a) * (qa - y_obs) * w;
    }
  }
  return -acc * step;
}

double interval_score(const pred::PredictiveDensity& pd, double y_obs,
                      double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("interval_score: alpha outside (0,1)");
  const double l = pd.quantile(0.5 * alpha);
  const double u = pd.quantile(1.0 - 0.5 * alpha);
  double penalty = u - l;
  if (y_obs < l) penalty += (2.0 / alpha) * (l - y_obs);
  if (y_obs > u) penalty += (2.0 / alpha) * (y_obs - u);
  return -penalty;
}

double empirical_quantile(std::vector<double> sample, double p) {
  if (sample.empty())
    throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("empirical_quantile: level outside [0,1]");
  std::sort(sample.begin(), sample.end());
  const double pos = p * (sample.size() - 1);
  const size_t k = static_cast<size_t>(pos);
  if (k + 1 >= sample.size()) return sample.back();
  const double w = pos - k;
  return sample[k] + w * (sample[k + 1] - sample[k]);
}

ScoreRecord score_all(const pred::PredictiveDensity& pd, double y_obs,
                      const std::vector<double>& window, std::string method,
                      int t, int twcrps_grid, double is_alpha,
                      bool fast_table) {
  ScoreRecord r;
  r.method = std::move(method);
  r.t = t;
  r.ls = log_score(pd, y_obs);
  std::vector<double> sorted(window);
  std::sort(sorted.begin(), sorted.end());
  const auto sorted_quantile = [&sorted](double p) {
    const double pos = p * (sorted.size() - 1);
    const size_t k = static_cast<size_t>(pos);
    if (k + 1 >= sorted.size()) return sorted.back();
    return sorted[k] + (pos - k) * (sorted[k + 1] - sorted[k]);
  };
  const double q10 = sorted_quantile(0.10);
  const double q20 = sorted_quantile(0.20);
  const double q80 = sorted_quantile(0.80);
  const double q90 = sorted_quantile(0.90);
  r.cs10 = censored_score(pd, y_obs, {Region::Kind::kLowerTail, q10});
  r.cs20 = censored_score(pd, y_obs, {Region::Kind::kLowerTail, q20});
  r.cs80 = censored_score(pd, y_obs, {Region::Kind::kUpperTail, q80});
  r.cs90 = censored_score(pd, y_obs, {Region::Kind::kUpperTail, q90});
  r.crps = crps(pd, y_obs);
  r.twcrps = twcrps(pd, y_obs, twcrps_grid, fast_table);
  r.is = interval_score(pd, y_obs, is_alpha);
  return r;
}

}  // namespace ssmvb::score
