#pragma once

// Stochastic-gradient variational machinery: a Gaussian factor family
// (mean + rank-k loadings + diagonal), reparameterized ELBO gradients with
// analytic entropy, and an adaptive-moment SGA loop with windowed
// convergence monitoring. Shared by the joint-state and hybrid fits.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ssmvb/rng.hpp"

namespace ssmvb::vb {

using Vec = std::vector<double>;

// q(theta) = N(mean, factors factors' + diag(diag^2)). factors is p x k,
// column-major. diag entries stay strictly positive; the optimizer moves
// them on the log scale.
struct GaussianFactorVariational {
  int p = 0;
  int k = 1;
  Vec mean;     // nu, length p
  Vec factors;  // B, p*k column-major
  Vec diag;     // d, length p, > 0

  static GaussianFactorVariational make(int p, int k, double init_sd);

  int lambda_size() const { return p + p * k + p; }
  // Flat parameter order: (nu, vec(B), log d).
  void pack(Vec& lambda) const;
  void unpack(const Vec& lambda);

  // theta = nu + B zeta + d .* eps with zeta, eps standard normal.
  void sample_reparam(Rng& rng, Vec& theta, Vec& zeta, Vec& eps) const;

  // Differential entropy of the family, computed via the rank-k determinant
  // identity (no dense p x p factorization).
  double entropy() const;
  // Adds dH/d(nu, vec B, log d) into the flat gradient.
  void add_entropy_grad(Vec& grad) const;
  // Adds the reparameterization gradient of E_q[log g]: given
  // g_theta = d log g / d theta at the sampled point, accumulates
  // contributions to (nu, vec B, log d) with the given weight.
  void add_reparam_grad(const Vec& g_theta, const Vec& zeta, const Vec& eps,
                        double weight, Vec& grad) const;

  // Dense covariance (p x p, row-major) and density, for tests and reports.
  Vec covariance() const;
  double log_pdf(const Vec& theta) const;
};

enum class SgaStatus { kConverged, kMaxIters, kDiverged, kAborted };

struct SgaConfig {
  int max_iters = 10000;
  int mc_samples = 1;           // S
  double learning_rate = 0.01;  // adaptive-moment base rate
  double beta1 = 0.9;
  double beta2 = 0.99;
  double adam_eps = 1e-8;
  int window = 200;      // smoothing window for convergence checks
  double tol = 1e-3;     // relative change of the windowed ELBO mean
  int max_decreasing_windows = 5;
  std::uint64_t seed = 1;
};

struct ElboTrace {
  std::vector<double> noisy;         // one entry per iteration
  std::vector<double> smoothed;      // trailing window average
  std::vector<double> window_means;  // one entry per completed window
  SgaStatus status = SgaStatus::kMaxIters;
  int n_resampled = 0;       // non-finite draws that were redrawn
  int n_rejected_steps = 0;  // steps vetoed by the feasibility guard
  // CSV columns: iteration, noisy_elbo, smoothed_elbo.
  void write_csv(std::ostream& os) const;
};

// Generic driver over a flat variational parameter vector. eval returns one
// noisy ELBO estimate and fills grad (same length as lambda), drawing any
// needed randomness from rng. feasible, when set, vetoes a proposed iterate;
// a veto rejects the step and halves the learning rate of coordinates in
// [guard_begin, guard_end).
struct SgaProblem {
  std::function<double(const Vec& lambda, Vec& grad, Rng& rng)> eval;
  std::function<bool(const Vec& lambda)> feasible;
  int guard_begin = 0;
  int guard_end = 0;
};

struct SgaResult {
  Vec lambda;  // iterate averaged over the best-scoring window
  // Average over the most recent completed window (the final raw iterate
  // when no window completed). Preferred by callers whose value channel is
  // only a trend-biased proxy of the objective, where "best scoring" would
  // systematically pick early iterates.
  Vec last_window_lambda;
  ElboTrace trace;
  int n_iters = 0;
};

SgaResult sga_optimize(const SgaProblem& problem, Vec lambda0,
                       const SgaConfig& cfg);

// Convenience wrapper for parameter-only fits: maximizes
// E_q[log_target(theta)] + H(q). log_target fills grad_theta and may itself
// be stochastic (fresh draws from rng each call).
using ThetaTarget =
    std::function<double(const Vec& theta, Vec& grad_theta, Rng& rng)>;

struct FitQResult {
  GaussianFactorVariational q;       // best-scoring window average
  GaussianFactorVariational q_last;  // most recent completed window average
  ElboTrace trace;
  int n_iters = 0;
};

FitQResult fit_gaussian_factor(const GaussianFactorVariational& q0,
                               const ThetaTarget& log_target,
                               const SgaConfig& cfg);

}  // namespace ssmvb::vb
