#pragma once

// One-step-ahead predictive densities. Every method ends in the same
// representation: an equal-weight Gaussian mixture over simulated
// (mu_{n+1}, h_{n+1}) pairs, with component mean mu_{n+1} and component
// sd exp(h_{n+1}/2) (the measurement error is integrated out analytically).
// Two construction routes exist and deliberately share no state-draw code:
//  - approx: parameters and current states drawn from fitted variational
//    objects, then pushed through the state transition;
//  - sim: parameters drawn from a posterior sample (or fixed), current
//    states redrawn from their exact conditional by warm-started sweeps.

#include <cstdint>
#include <vector>

#include "ssmvb/rng.hpp"
#include "ssmvb/ucsv.hpp"
#include "ssmvb/vb.hpp"
#include "ssmvb/vb_methods.hpp"

namespace ssmvb::pred {

struct PredictiveDensity {
  std::vector<double> mean;  // per component
  std::vector<double> sd;    // per component, > 0
  int size() const { return static_cast<int>(mean.size()); }

  double pdf(double y) const;
  double log_pdf(double y) const;  // logsumexp over components
  double cdf(double y) const;
  // Inverse cdf by bracketed bisection to an interval of width 1e-10.
  double quantile(double u) const;
  double mixture_mean() const;
};

// Persistent conditional-sampler state threaded through consecutive windows
// so each new window's sweeps start warm.
struct SimChain {
  ucsv::LatentPaths paths;
  std::vector<int> indicators;
  bool initialized = false;
};

// Approximation route: theta ~ q_theta and x_n ~ q_x (joint fit), or the
// inverse-gamma/Gaussian blocks of the coordinate-ascent fit. Requires a fit
// carrying a state representation.
PredictiveDensity predict_approx(const vbm::FitResult& fit, int J, Rng& rng);

// Simulation route with a posterior parameter sample: component j uses
// theta_draws[(j * draws) / J] (evenly strided), one exact conditional state
// sweep of the current window per component. A single-element draw vector
// gives the fixed-parameter predictive. warmup extra sweeps run first when
// the chain is cold.
PredictiveDensity predict_sim(const std::vector<ucsv::Params>& theta_draws,
                              const std::vector<double>& y, int J,
                              SimChain& chain, Rng& rng, int warmup = 50);

// Simulation route with theta ~ q_theta (parameter-only variational fit).
PredictiveDensity predict_sim(const vb::GaussianFactorVariational& q_theta,
                              const std::vector<double>& y, int J,
                              SimChain& chain, Rng& rng, int warmup = 50);

// Kernel-density audit mode: draws one y from each component and smooths
// with a normal kernel (Silverman bandwidth). Same mixture machinery.
PredictiveDensity to_kde(const PredictiveDensity& pd, Rng& rng);

}  // namespace ssmvb::pred
