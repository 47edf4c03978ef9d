#pragma once

// The three approximate posteriors compared against exact MCMC:
//  - qnk:  joint Gaussian variational family over parameters and states,
//          with a banded Cholesky factor for the state block;
//  - lsnd: Gaussian variational family over parameters only, with exact
//          conditional state draws supplying unbiased ELBO gradients;
//  - cy:   coordinate-ascent variational inference for a misspecified
//          random-walk stochastic volatility model.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssmvb/mcmc.hpp"
#include "ssmvb/rng.hpp"
#include "ssmvb/tridiag.hpp"
#include "ssmvb/ucsv.hpp"
#include "ssmvb/vb.hpp"

namespace ssmvb::vbm {

// Gaussian q(x) = N(state_mean, CC') over the interleaved state vector
// x = (mu_1, h_1, mu_2, h_2, ...), with C lower triangular holding the main
// diagonal and three sub-diagonals. Diagonal entries stay strictly positive.
struct JointStateVariational {
  int nx = 0;  // 2n
  vb::Vec state_mean;
  vb::Vec diag;  // C(i, i), length nx
  vb::Vec sub1;  // C(i+1, i), length nx-1
  vb::Vec sub2;  // C(i+2, i), length nx-2
  vb::Vec sub3;  // C(i+3, i), length nx-3

  static JointStateVariational make(int nx, double init_sd);

  int lambda_size() const { return 5 * nx - 6; }
  // Flat order: (state_mean, diag, sub1, sub2, sub3); diagonal raw (not log).
  void pack_into(vb::Vec& lambda, int offset) const;
  void unpack_from(const vb::Vec& lambda, int offset);

  void multiply(const vb::Vec& xi, vb::Vec& out) const;  // out = C xi
  void sample(Rng& rng, vb::Vec& x, vb::Vec& xi) const;  // x = mean + C xi
  vb::Vec solve_lower(const vb::Vec& rhs) const;         // C z = rhs
  double logdet_cov() const;                             // log |CC'|
  double entropy() const;
  double marginal_var(int i) const;  // (CC')_ii

  // Reparameterization gradient of E[g(x)] at x = mean + C xi, plus the
  // entropy gradient (1/C_ii on the diagonal), into the flat layout.
  void add_grads(const vb::Vec& g_x, const vb::Vec& xi, vb::Vec& lambda_grad,
                 int offset) const;
};

// CAVI blocks for the random-walk volatility model: inverse-gamma innovation
// variance, Gaussian initial level, Gaussian path with tridiagonal precision.
struct CyVariational {
  double ig_shape = 0.0;  // nu
  double ig_scale = 0.0;  // S
  double h0_mean = 0.0;
  double h0_var = 0.0;
  std::vector<double> h_mean;
  Tridiag h_precision;              // K
  std::vector<double> h_var_diag;   // (K^{-1})_tt
  std::vector<double> h_cov_off;    // (K^{-1})_{t,t+1}
  std::vector<double> sweep_elbo;   // one entry per completed sweep
};

struct FitResult {
  std::string method;  // "qnk", "lsnd" or "cy"
  vb::GaussianFactorVariational q_theta;        // unused for cy (p == 0)
  std::optional<JointStateVariational> q_states;  // qnk only
  std::optional<CyVariational> q_cy;              // cy only
  vb::ElboTrace elbo_trace;
  double wall_time = 0.0;  // seconds
  int n_iters = 0;
};

struct VbFitConfig {
  vb::SgaConfig sga;
  ucsv::PriorHyper hyper;
  // Starting point for q_theta's mean (mapped to the unconstrained scale).
  ucsv::Params init_params{0.0, 0.5, 0.3, 0.0, 0.5, 0.3};
  int theta_factors = 1;       // k
  double init_theta_sd = 0.1;
  double init_state_sd = 0.1;  // initial C diagonal
  int lsnd_warm_sweeps = 10;   // conditional sweeps before the first step
  int cy_max_sweeps = 500;
  double cy_tol = 1e-8;        // absolute ELBO change per sweep
};

// Joint parameter-and-state fit by stochastic gradient ascent on the ELBO of
// the full posterior. A step that drives any C diagonal entry nonpositive is
// rejected and the state-block learning rate halves.
FitResult fit_qnk(const std::vector<double>& y, const VbFitConfig& cfg,
                  const FitResult* warm = nullptr);

// Parameter-only fit: each gradient step draws the latent paths from their
// exact conditional given the sampled theta (one warm-started sweep), which
// yields an unbiased gradient of the marginal-posterior ELBO.
FitResult fit_lsnd(const std::vector<double>& y, const VbFitConfig& cfg,
                   const FitResult* warm = nullptr);

// Coordinate-ascent fit of the random-walk volatility model to raw y. Each
// sweep applies the closed-form inverse-gamma and initial-level updates and
// one guarded Newton update of the path block; the exact ELBO is evaluated
// after every sweep and is non-decreasing by construction.
FitResult fit_cy(const std::vector<double>& y, const VbFitConfig& cfg,
                 const FitResult* warm = nullptr);

// Per-time posterior summaries of the latent trend and volatility scale.
struct StateSummary {
  std::vector<double> mu_mean;
  std::vector<double> h_mean;
  std::vector<double> exp_half_h_mean;  // E[exp(h_t / 2)]
};

// For qnk/cy the summaries are analytic Gaussian marginals (lognormal moment
// formula for exp(h/2)); for lsnd they average exact conditional state draws
// under theta ~ q_theta, which needs the data and a sweep budget.
StateSummary state_marginals(const FitResult& fit, const std::vector<double>& y,
                             int n_sweeps, std::uint64_t seed);

}  // namespace ssmvb::vbm
