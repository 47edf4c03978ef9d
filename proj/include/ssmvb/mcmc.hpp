#pragma once

// Exact-conditional Gibbs machinery for the unobserved components
// stochastic volatility model: forward-filter backward-sample updates for
// both latent blocks, a 7-component normal mixture approximation to the
// log chi-square(1) measurement error, and conjugate / random-walk
// Metropolis updates for the static parameters.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ssmvb/rng.hpp"
#include "ssmvb/ucsv.hpp"

namespace ssmvb::mcmc {

// Scalar AR(1) state equation x_t = m + rho (x_{t-1} - m) + sigma eps_t,
// initialized from its stationary law. Observations z_t = x_t + sqrt(v_t) u_t
// with per-step variance v_t > 0 supplied by the caller.
struct Ar1Spec {
  double m = 0.0;
  double rho = 0.0;
  double sigma = 1.0;
};

// Draws one path from p(x | z) by Carter-Kohn forward filtering and backward
// sampling. sigma == 0 collapses the prior to the point mass at m and the
// sampled path is the constant m. x is resized to z.size().
void ar1_ffbs(const Ar1Spec& spec, const std::vector<double>& z,
              const std::vector<double>& obs_var, std::vector<double>& x,
              Rng& rng);

struct SmootherResult {
  std::vector<double> mean;  // E[x_t | z_{1:T}]
  std::vector<double> var;   // Var[x_t | z_{1:T}]
  double loglik = 0.0;       // log p(z_{1:T})
};

// Rauch-Tung-Striebel smoother for the same model; reference moments for
// validating the sampler and a marginal likelihood for diagnostics.
SmootherResult ar1_kalman_smoother(const Ar1Spec& spec,
                                   const std::vector<double>& z,
                                   const std::vector<double>& obs_var);

// Normal mixture approximation of the log chi-square(1) distribution
// (Kim-Shephard-Chib constants). Component means are centered; the actual
// log eps^2 mean enters through kKscOffset.
struct KscComponent {
  double weight, mean, var;
};
inline constexpr std::array<KscComponent, 7> kKsc = {{
    {0.00730, -10.12999, 5.79596},
    {0.10556, -3.97281, 2.61369},
    {0.00002, -8.56686, 5.17950},
    {0.04395, 2.77786, 0.16735},
    {0.34001, 0.61942, 0.64009},
    {0.24566, 1.79518, 0.34023},
    {0.25750, -1.08819, 1.26261},
}};
inline constexpr double kKscOffset = -1.2704;

// Squashing constant inside log((y - mu)^2 + eps) guarding exact zeros.
inline constexpr double kLogSquashEps = 1e-4;

// Samples mixture indicators s_t given zstar_t = log((y_t - mu_t)^2 + eps)
// and the current volatility path.
void sample_indicators(const std::vector<double>& zstar,
                       const std::vector<double>& h, std::vector<int>& s,
                       Rng& rng);

// One full pass over the latent blocks at fixed theta: mu | h, then mixture
// indicators, then h | indicators. paths holds the current state and is
// updated in place; indicators is resized on first use.
void state_sweep(const ucsv::Params& p, const std::vector<double>& y,
                 ucsv::LatentPaths& paths, std::vector<int>& indicators,
                 Rng& rng);

// Adaptive random-walk step size state for one Metropolis-Hastings block.
// Robbins-Monro on the log step with gain k^{-0.6} toward target acceptance;
// freeze() stops adaptation (done at the end of burn-in).
struct RwAdapt {
  double log_step;
  double target = 0.3;
  int k = 0;
  bool frozen = false;
  long long proposals = 0;
  long long accepts = 0;

  explicit RwAdapt(double init_step = 0.1, double target_rate = 0.3)
      : log_step(std::log(init_step)), target(target_rate) {}
  double step() const { return std::exp(log_step); }
  void freeze() { frozen = true; }
  void update(double accept_prob);
  double accept_rate() const {
    return proposals > 0 ? static_cast<double>(accepts) / proposals : 0.0;
  }
};

// One conjugate/MH sweep over (mu_bar, rho_mu, sigma_mu, h_bar, rho_h,
// sigma_h) given the latent paths. The conditionals do not involve y.
void sample_theta_given_paths(ucsv::Params& p, const ucsv::LatentPaths& paths,
                              const ucsv::PriorHyper& hyper, RwAdapt& adapt_mu,
                              RwAdapt& adapt_h, Rng& rng);

struct McmcConfig {
  int n_iter = 15000;  // total iterations including burn-in
  int n_burn = 5000;
  int thin = 1;        // applies to stored theta draws only
  bool fix_theta = false;
  ucsv::Params init;   // starting (or fixed) parameter values
  ucsv::PriorHyper hyper;
  std::uint64_t seed = 1;
  double rw_init_step = 0.1;
  double rw_target = 0.3;
};

struct McmcResult {
  std::vector<ucsv::Params> draws;      // post-burn, thinned
  std::vector<double> mean_mu;          // E[mu_t | y], all post-burn sweeps
  std::vector<double> mean_h;           // E[h_t | y]
  std::vector<double> mean_exp_half_h;  // E[exp(h_t / 2) | y]
  ucsv::LatentPaths last_paths;         // for warm-started continuation
  std::vector<int> last_indicators;
  double accept_rho_mu = 0.0;
  double accept_rho_h = 0.0;
  int n_kept = 0;
};

// Full Gibbs run. init_paths, when non-null, warm-starts the latent blocks
// (sizes must match y); otherwise the paths start from data-driven defaults.
McmcResult run_mcmc(const std::vector<double>& y, const McmcConfig& cfg,
                    const ucsv::LatentPaths* init_paths = nullptr);

}  // namespace ssmvb::mcmc
