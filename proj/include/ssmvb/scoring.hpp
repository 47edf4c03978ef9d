#pragma once

// Forecast accuracy measures, all positively oriented (higher is better):
// log score, censored log scores on tail regions, CRPS, left-tail-weighted
// CRPS, and the central interval score. CRPS-family values are reported as
// nonpositive penalties.

#include <string>
#include <vector>

#include "ssmvb/predictive.hpp"
#include "ssmvb/rng.hpp"

namespace ssmvb::score {

struct Region {
  enum class Kind { kLowerTail, kUpperTail };
  Kind kind = Kind::kLowerTail;
  double threshold = 0.0;
};

struct ScoreRecord {
  std::string method;
  int t = 0;  // index of the predicted observation
  double ls = 0.0;
  double cs10 = 0.0;
  double cs20 = 0.0;
  double cs80 = 0.0;
  double cs90 = 0.0;
  double crps = 0.0;
  double twcrps = 0.0;
  double is = 0.0;
};

// log p(y_obs); -inf when the mixture pdf underflows (recorded, not thrown).
double log_score(const pred::PredictiveDensity& pd, double y_obs);

// log pdf inside the region, log complement mass outside.
double censored_score(const pred::PredictiveDensity& pd, double y_obs,
                      const Region& region);

// -integral of [P(z) - 1{z >= y_obs}]^2 dz by adaptive quadrature split at
// y_obs. Exact for the mixture cdf up to the quadrature tolerance.
double crps(const pred::PredictiveDensity& pd, double y_obs);

// MC audit estimator -(E|Y - y| - E|Y - Y'| / 2) over n_draws pairs.
double crps_sample(const pred::PredictiveDensity& pd, double y_obs,
                   int n_draws, Rng& rng);

// -int_0^1 2 [1{P^{-1}(a) >= y} - a][P^{-1}(a) - y](1-a)^2 da on a midpoint
// grid of size grid_n (endpoints avoided by construction). fast_table swaps
// exact per-point bisection for inversion of an interpolated cdf table,
// which is what the backtest uses.
double twcrps(const pred::PredictiveDensity& pd, double y_obs,
              int grid_n = 2001, bool fast_table = true);

// -{(u - l) + (2/alpha)(l - y)1{y < l} + (2/alpha)(y - u)1{y > u}} with
// l, u the alpha/2 and 1 - alpha/2 predictive quantiles.
double interval_score(const pred::PredictiveDensity& pd, double y_obs,
                      double alpha = 0.05);

// Linear-interpolation empirical quantile of a sample (index p*(n-1)).
double empirical_quantile(std::vector<double> sample, double p);

// All eight measures of one record; thresholds are the 10/20/80/90%
// empirical quantiles of the estimation window.
ScoreRecord score_all(const pred::PredictiveDensity& pd, double y_obs,
                      const std::vector<double>& window, std::string method,
                      int t, int twcrps_grid = 2001, double is_alpha = 0.05,
                      bool fast_table = true);

}  // namespace ssmvb::score
