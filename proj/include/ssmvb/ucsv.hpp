#pragma once
#include <array>
#include <cstdint>
#include <vector>

#include "ssmvb/rng.hpp"

namespace ssmvb::ucsv {

// Unobserved-components model with stochastic volatility:
//   mu_t = mu_bar + rho_mu (mu_{t-1} - mu_bar) + sigma_mu e_t
//   h_t  = h_bar  + rho_h  (h_{t-1}  - h_bar)  + sigma_h  n_t
//   y_t  = mu_t + exp(h_t / 2) u_t
// with stationary initialization of both latent AR(1) processes.
struct Params {
  double mu_bar = 0.0;
  double rho_mu = 0.0;
  double sigma_mu = 0.0;
  double h_bar = 0.0;
  double rho_h = 0.0;
  double sigma_h = 0.0;
};

// Simulation configs allow the AR coefficients on [0,1) and zero innovation
// scales (degenerate volatility); the prior support is the open interior.
void validate(const Params& p);

struct LatentPaths {
  std::vector<double> mu;
  std::vector<double> h;
};

struct DgpConfig {
  Params params;
  int T = 0;
  std::uint64_t seed = 0;
};

// Presets 1-3 used throughout the experiments.
DgpConfig dgp_preset(int which, int T, std::uint64_t seed);

struct SimulationResult {
  std::vector<double> y;
  LatentPaths paths;
};

SimulationResult simulate(const DgpConfig& config);

// Latent paths given the parameters (stationary init), then observations
// given paths; split out so samplers and validation tests can re-simulate
// conditionally.
LatentPaths simulate_paths(const Params& p, int T, Rng& rng);
std::vector<double> simulate_obs(const Params& p, const LatentPaths& paths,
                                 Rng& rng);

// Prior hyperparameters, shared by the level and volatility blocks:
// locations ~ N(0, loc_var), AR coefficients ~ U(0,1), innovation variances
// ~ InvGamma(ig_shape, ig_scale).
struct PriorHyper {
  double loc_var = 1000.0;
  double ig_shape = 1.001;
  double ig_scale = 1.001;
};

double log_prior(const Params& p, const PriorHyper& hyper = {});

// Unconstrained parameterization eta = (mu_bar, logit rho_mu, log sigma_mu^2,
// h_bar, logit rho_h, log sigma_h^2).
using Unconstrained = std::array<double, 6>;

Unconstrained to_unconstrained(const Params& p);

struct FromUnconstrained {
  Params params;
  double log_jacobian = 0.0;
};

FromUnconstrained from_unconstrained(const Unconstrained& eta);

// Joint log-density of latents and data given parameters (stationary init).
double complete_data_loglik(const Params& p, const LatentPaths& paths,
                            const std::vector<double>& y);

// log p(y, paths | from(eta)) + log prior(from(eta)) + log|Jacobian(eta)|,
// the target driving both joint-family and parameter-only variational fits.
double log_joint_unconstrained(const Unconstrained& eta,
                               const LatentPaths& paths,
                               const std::vector<double>& y,
                               const PriorHyper& hyper = {});

// Analytic gradient of log_joint_unconstrained in eta.
Unconstrained log_joint_grad_unconstrained(const Unconstrained& eta,
                                           const LatentPaths& paths,
                                           const std::vector<double>& y,
                                           const PriorHyper& hyper = {});

// Gradient of complete_data_loglik in the latent paths (measurement plus
// both AR chains), written into grad_mu / grad_h.
void complete_data_grad_states(const Params& p, const LatentPaths& paths,
                               const std::vector<double>& y,
                               std::vector<double>& grad_mu,
                               std::vector<double>& grad_h);

}  // namespace ssmvb::ucsv
