#pragma once
#include <vector>

#include "ssmvb/rng.hpp"
#include "ssmvb/tridiag.hpp"

namespace ssmvb::lgssm {

// Scalar linear-Gaussian state-space model
//   X_{t+1} = rho X_t + sigma0 e_t,  X_1 ~ N(0, sigma0^2),
//   Y_t     = alpha X_t + sigma0 u_t,
// used for the closed-form accuracy diagnostics.
struct Params {
  double rho = 0.0;
  double alpha = 0.0;
  double sigma0 = 1.0;
};

void validate(const Params& p);

// Search box for the population-criterion argmax.
struct ParamBox {
  double rho_lo = 0.05;
  double rho_hi = 0.95;
  double alpha_lo = 0.0;
  double alpha_hi = 2.0;
};

// AR(1)-correlated Gaussian variational family for the states: covariance
// nu(lambda) * Phi_n(lambda) with Phi_n(lambda)_{ij} = lambda^{|i-j|} and
// nu(lambda) = sigma0^2 / (1 - lambda^2).
struct VariationalParam {
  double lambda = 0.0;
  double sigma0 = 1.0;

  double nu() const { return sigma0 * sigma0 / (1.0 - lambda * lambda); }
};

// Determinant of the n x n Toeplitz tridiagonal matrix with constant
// diagonal a, subdiagonal b, superdiagonal c, by the closed-form root
// formula; the repeated-root branch a^2 = 4bc returns (n+1)(a/2)^n.
double tridiag_det(double a, double b, double c, int n);

// Same matrix except the last diagonal entry is 1 instead of a; this is the
// corner variant whose determinant is g_{n-1} - bc g_{n-2} in terms of the
// pure Toeplitz determinants g_k.
double tridiag_det_unit_corner(double a, double b, double c, int n);

// Precision-like matrix of the observed-data likelihood: tridiagonal with
// diagonal 1 + rho^2 + alpha^2 except the last entry 1 + alpha^2, and
// off-diagonal -rho.
Tridiag omega_matrix(const Params& p, int n);

// log det Omega_n via the stable LDL^T pivots; valid for any n >= 1.
double omega_logdet(const Params& p, int n);

// Closed-form det Omega_n = (1+alpha^2) g_{n-1} - rho^2 g_{n-2}; exact for
// small n (overflow-prone for large n, tests only).
double omega_det_closed_form(const Params& p, int n);

// Dense lambda^{|i-j|} correlation matrix as a flat row-major array (test
// support); its log-determinant is (n-1) log(1 - lambda^2).
std::vector<double> phi_matrix(double lambda, int n);
double phi_logdet(double lambda, int n);

// Population variational criterion, (theta, lambda)-dependent part only:
//   -(nu(lambda)/2) (1 + alpha^2 + rho^2 - rho lambda).
// The data-entropy and -log 2pi terms are additive constants and are carried
// separately by callers that need absolute levels.
double limit_criterion(const Params& p, double lambda);

// Unique maximizer of limit_criterion in lambda for rho > 0:
//   lambda(theta) = rho / (c + sqrt(c^2 - rho^2)),  c = 1 + alpha^2 + rho^2.
double optimal_lambda(const Params& p);

// limit_criterion profiled at lambda(theta).
double concentrated_objective(const Params& p);

struct ThetaStar {
  Params params;
  double value = 0.0;
};

// Grid argmax of the concentrated objective over the box; ties broken toward
// the smaller (rho, alpha) in scan order.
ThetaStar find_theta_star(const ParamBox& box, double grid_step,
                          double sigma0 = 1.0);

// Closed-form gap between the observed-data log-likelihood and its
// variational lower bound at the given parameter point (state family fixed
// at lambda = rho):
//   -1/2 log|Omega_n| + (1/2 s0^2)[a^2 y'Omega^{-1}y + n a^2 s0^2]
//   - n/2 - (n/2) log(1-r^2) + (n/2)(1-r^2).
double jensen_gap(const Params& p, const std::vector<double>& y);

// Large-n per-observation limits of jensen_gap / n.
double jensen_case1_limit(double alpha0);  // rho0 = 0
double jensen_case2_limit(double rho0);    // alpha0 = 0

struct KalmanState {
  std::vector<double> filt_mean;
  std::vector<double> filt_var;
  std::vector<double> pred_mean;
  std::vector<double> pred_var;
  double loglik = 0.0;
};

// Exact filter for the scalar model above, initialized at X_1 ~ N(0, s0^2).
KalmanState kalman_filter(const Params& p, const std::vector<double>& y);

// KL[ pi(x_n | y, theta0) || q_{lambda}(x_n) ] where the exact marginal is
// N(filtered mean, filtered var) and the variational marginal is
// N(0, nu(lambda)).
double kl_state_marginal(const Params& p0, double lambda_star,
                         const std::vector<double>& y);

// Simulates one path of length n from the model (test and CLI support).
std::vector<double> simulate(const Params& p, int n, Rng& rng);

}  // namespace ssmvb::lgssm
