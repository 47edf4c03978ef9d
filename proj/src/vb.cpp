#include "ssmvb/vb.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ssmvb/stats.hpp"

namespace ssmvb::vb {

namespace {

// M = I_k + B' D^{-2} B, the small matrix in the rank-k determinant and
// Woodbury identities for Sigma = BB' + D^2.
Eigen::MatrixXd capacitance(const GaussianFactorVariational& q) {
  Eigen::Map<const Eigen::MatrixXd> B(q.factors.data(), q.p, q.k);
  Eigen::VectorXd di2(q.p);
  for (int i = 0; i < q.p; ++i) di2[i] = 1.0 / (q.diag[i] * q.diag[i]);
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(q.k, q.k);
  M.noalias() += B.transpose() * di2.asDiagonal() * B;
  return M;
}

}  // namespace

GaussianFactorVariational GaussianFactorVariational::make(int p, int k,
                                                          double init_sd) {
  if (p < 1 || k < 1 || k > p || init_sd <= 0.0)
    throw std::invalid_argument("GaussianFactorVariational::make: bad shape");
  GaussianFactorVariational q;
  q.p = p;
  q.k = k;
  q.mean.assign(p, 0.0);
  q.factors.assign(static_cast<size_t>(p) * k, 0.0);
  q.diag.assign(p, init_sd);
  return q;
}

void GaussianFactorVariational::pack(Vec& lambda) const {
  lambda.resize(lambda_size());
  std::copy(mean.begin(), mean.end(), lambda.begin());
  std::copy(factors.begin(), factors.end(), lambda.begin() + p);
  for (int i = 0; i < p; ++i) lambda[p + p * k + i] = std::log(diag[i]);
}

void GaussianFactorVariational::unpack(const Vec& lambda) {
  if (static_cast<int>(lambda.size()) != lambda_size())
    throw std::invalid_argument("GaussianFactorVariational::unpack: bad size");
  std::copy(lambda.begin(), lambda.begin() + p, mean.begin());
  std::copy(lambda.begin() + p, lambda.begin() + p + p * k, factors.begin());
  for (int i = 0; i < p; ++i) diag[i] = std::exp(lambda[p + p * k + i]);
}

void GaussianFactorVariational::sample_reparam(Rng& rng, Vec& theta, Vec& zeta,
                                               Vec& eps) const {
  theta.resize(p);
  zeta.resize(k);
  eps.resize(p);
  for (int j = 0; j < k; ++j) zeta[j] = rng.normal();
  for (int i = 0; i < p; ++i) eps[i] = rng.normal();
  for (int i = 0; i < p; ++i) {
    double v = mean[i] + diag[i] * eps[i];
    for (int j = 0; j < k; ++j) v += factors[i + j * p] * zeta[j];
    theta[i] = v;
  }
}

double GaussianFactorVariational::entropy() const {
  double logdet = 0.0;
  for (int i = 0; i < p; ++i) logdet += 2.0 * std::log(diag[i]);
  logdet += std::log(capacitance(*this).llt().matrixL().determinant()) * 2.0;
  return 0.5 * p * (kLog2Pi + 1.0) + 0.5 * logdet;
}

void GaussianFactorVariational::add_entropy_grad(Vec& grad) const {
  // dH/dB = Sigma^{-1} B = D^{-2} B M^{-1}; dH/d(log d_i) = (Sigma^{-1})_ii d_i^2.
  Eigen::Map<const Eigen::MatrixXd> B(factors.data(), p, k);
  Eigen::VectorXd di2(p);
  for (int i = 0; i < p; ++i) di2[i] = 1.0 / (diag[i] * diag[i]);
  const Eigen::MatrixXd Minv = capacitance(*this).llt().solve(
      Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd DB = di2.asDiagonal() * B;     // D^{-2} B
  const Eigen::MatrixXd GB = DB * Minv;                // Sigma^{-1} B
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < p; ++i) grad[p + j * p + i] += GB(i, j);
  // (Sigma^{-1})_ii = 1/d_i^2 - [DB Minv DB']_ii
  for (int i = 0; i < p; ++i) {
    double s = di2[i];
    for (int j = 0; j < k; ++j) s -= GB(i, j) * DB(i, j);
    grad[p + p * k + i] += s * diag[i] * diag[i];
  }
}

void GaussianFactorVariational::add_reparam_grad(const Vec& g_theta,
                                                 const Vec& zeta,
                                                 const Vec& eps, double weight,
                                                 Vec& grad) const {
  for (int i = 0; i < p; ++i) grad[i] += weight * g_theta[i];
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < p; ++i)
      grad[p + j * p + i] += weight * g_theta[i] * zeta[j];
  // log-d chain rule: d theta_i / d log d_i = d_i eps_i.
  for (int i = 0; i < p; ++i)
    grad[p + p * k + i] += weight * g_theta[i] * diag[i] * eps[i];
}

Vec GaussianFactorVariational::covariance() const {
  Vec cov(static_cast<size_t>(p) * p, 0.0);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      double v = (i == j) ? diag[i] * diag[i] : 0.0;
      for (int c = 0; c < k; ++c) v += factors[i + c * p] * factors[j + c * p];
      cov[static_cast<size_t>(i) * p + j] = v;
    }
  }
  return cov;
}

double GaussianFactorVariational::log_pdf(const Vec& theta) const {
  Eigen::Map<const Eigen::MatrixXd> B(factors.data(), p, k);
  Eigen::VectorXd r(p), di2(p);
  for (int i = 0; i < p; ++i) {
    r[i] = theta[i] - mean[i];
    di2[i] = 1.0 / (diag[i] * diag[i]);
  }
  const Eigen::MatrixXd M = capacitance(*this);
  const auto llt = M.llt();
  double logdet = 2.0 * std::log(llt.matrixL().determinant());
  for (int i = 0; i < p; ++i) logdet += 2.0 * std::log(diag[i]);
  // Sigma^{-1} r by Woodbury.
  const Eigen::VectorXd u = di2.asDiagonal() * r;
  const Eigen::VectorXd w = llt.solve(B.transpose() * u);
  const Eigen::VectorXd sr = u - di2.asDiagonal() * (B * w);
  return -0.5 * p * kLog2Pi - 0.5 * logdet - 0.5 * r.dot(sr);
}

void ElboTrace::write_csv(std::ostream& os) const {
  os << "iteration,noisy_elbo,smoothed_elbo\n";
  for (size_t i = 0; i < noisy.size(); ++i)
    os << i << ',' << noisy[i] << ',' << smoothed[i] << '\n';
}

SgaResult sga_optimize(const SgaProblem& problem, Vec lambda0,
                       const SgaConfig& cfg) {
  if (!problem.eval) throw std::invalid_argument("sga_optimize: missing eval");
  if (cfg.window < 1 || cfg.max_iters < 1 || cfg.tol <= 0.0 ||
      cfg.mc_samples < 1)
    throw std::invalid_argument("sga_optimize: bad config");
  const int n = static_cast<int>(lambda0.size());
  Rng rng(cfg.seed);

  Vec lambda = std::move(lambda0);
  Vec m(n, 0.0), v(n, 0.0);           // adaptive-moment accumulators
  Vec lr_scale(n, 1.0);               // halved per guard-block rejection
  Vec grad(n), grad_sample(n), cand(n);

  SgaResult out;
  out.trace.status = SgaStatus::kMaxIters;

  // Windowed bookkeeping.
  Vec window_lambda_sum(n, 0.0);
  double window_elbo_sum = 0.0;
  int window_count = 0;
  double best_window_mean = -std::numeric_limits<double>::infinity();
  Vec best_lambda = lambda;
  Vec last_window = lambda;
  bool have_best = false, have_last = false;
  int decreasing = 0;
  double running_sum = 0.0;  // trailing sum over the smoothing window

  long long attempts = 0, resamples = 0;
  int t_adam = 0;

  for (int it = 0; it < cfg.max_iters; ++it) {
    // One S-averaged stochastic ELBO value and gradient; non-finite draws
    // are redrawn, aborting once redraws dominate.
    double elbo = 0.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    int got = 0;
    while (got < cfg.mc_samples) {
      ++attempts;
      std::fill(grad_sample.begin(), grad_sample.end(), 0.0);
      const double val = problem.eval(lambda, grad_sample, rng);
      bool ok = std::isfinite(val);
      for (int i = 0; ok && i < n; ++i) ok = std::isfinite(grad_sample[i]);
      if (!ok) {
        ++resamples;
        ++out.trace.n_resampled;
        if (attempts >= 16 && 2 * resamples > attempts) {
          out.trace.status = SgaStatus::kAborted;
          out.lambda = have_best ? best_lambda : lambda;
          out.last_window_lambda = have_last ? last_window : lambda;
          out.n_iters = it;
          return out;
        }
        continue;
      }
      ++got;
      elbo += val;
      for (int i = 0; i < n; ++i) grad[i] += grad_sample[i];
    }
    elbo /= cfg.mc_samples;
    const double inv_s = 1.0 / cfg.mc_samples;

    // Adaptive-moment ascent step with bias correction.
    ++t_adam;
    const double bc1 = 1.0 - std::pow(cfg.beta1, t_adam);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t_adam);
    for (int i = 0; i < n; ++i) {
      const double g = grad[i] * inv_s;
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double step = cfg.learning_rate * lr_scale[i] * (m[i] / bc1) /
                          (std::sqrt(v[i] / bc2) + cfg.adam_eps);
      cand[i] = lambda[i] + step;
    }
    if (problem.feasible && !problem.feasible(cand)) {
      ++out.trace.n_rejected_steps;
      for (int i = problem.guard_begin; i < problem.guard_end; ++i)
        lr_scale[i] *= 0.5;
    } else {
      lambda.swap(cand);
    }

    // Trace and window accounting.
    out.trace.noisy.push_back(elbo);
    running_sum += elbo;
    const int tail = static_cast<int>(out.trace.noisy.size()) - cfg.window - 1;
    if (tail >= 0) running_sum -= out.trace.noisy[tail];
    const int span = std::min<int>(cfg.window, out.trace.noisy.size());
    out.trace.smoothed.push_back(running_sum / span);

    window_elbo_sum += elbo;
    for (int i = 0; i < n; ++i) window_lambda_sum[i] += lambda[i];
    ++window_count;
    if (window_count == cfg.window) {
      const double mean_w = window_elbo_sum / cfg.window;
      for (int i = 0; i < n; ++i)
        last_window[i] = window_lambda_sum[i] / cfg.window;
      have_last = true;
      if (mean_w > best_window_mean) {
        best_window_mean = mean_w;
        best_lambda = last_window;
        have_best = true;
      }
      if (!out.trace.window_means.empty()) {
        const double prev = out.trace.window_means.back();
        decreasing = (mean_w < prev) ? decreasing + 1 : 0;
        const double scale = std::max(1.0, std::abs(prev));
        if (std::abs(mean_w - prev) <= cfg.tol * scale) {
          out.trace.window_means.push_back(mean_w);
          out.trace.status = SgaStatus::kConverged;
          out.lambda = best_lambda;
          out.last_window_lambda = last_window;
          out.n_iters = it + 1;
          return out;
        }
        if (decreasing >= cfg.max_decreasing_windows) {
          out.trace.window_means.push_back(mean_w);
          out.trace.status = SgaStatus::kDiverged;
          out.lambda = best_lambda;
          out.last_window_lambda = last_window;
          out.n_iters = it + 1;
          return out;
        }
      }
      out.trace.window_means.push_back(mean_w);
      window_elbo_sum = 0.0;
      std::fill(window_lambda_sum.begin(), window_lambda_sum.end(), 0.0);
      window_count = 0;
    }
  }
  out.lambda = have_best ? best_lambda : lambda;
  out.last_window_lambda = have_last ? last_window : lambda;
  out.n_iters = cfg.max_iters;
  return out;
}

FitQResult fit_gaussian_factor(const GaussianFactorVariational& q0,
                               const ThetaTarget& log_target,
                               const SgaConfig& cfg) {
  GaussianFactorVariational q = q0;
  Vec lambda0;
  q.pack(lambda0);

  // Scratch shared across eval calls; the loop is sequential.
  Vec theta, zeta, eps, g_theta(q0.p);
  SgaProblem prob;
  prob.eval = [&q, &log_target, &theta, &zeta, &eps, &g_theta](
                  const Vec& lambda, Vec& grad, Rng& rng) -> double {
    q.unpack(lambda);
    q.sample_reparam(rng, theta, zeta, eps);
    std::fill(g_theta.begin(), g_theta.end(), 0.0);
    const double val = log_target(theta, g_theta, rng);
    if (!std::isfinite(val)) return val;
    q.add_reparam_grad(g_theta, zeta, eps, 1.0, grad);
    q.add_entropy_grad(grad);
    return val + q.entropy();
  };

  SgaResult r = sga_optimize(prob, std::move(lambda0), cfg);
  FitQResult out;
  out.q = q0;
  out.q.unpack(r.lambda);
  out.q_last = q0;
  out.q_last.unpack(r.last_window_lambda);
  out.trace = std::move(r.trace);
  out.n_iters = r.n_iters;
  return out;
}

}  // namespace ssmvb::vb
