#include "ssmvb/vb_methods.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ssmvb/stats.hpp"

namespace ssmvb::vbm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

ucsv::Unconstrained to_eta(const vb::Vec& theta) {
  return {theta[0], theta[1], theta[2], theta[3], theta[4], theta[5]};
}

vb::GaussianFactorVariational init_q_theta(const VbFitConfig& cfg) {
  auto q = vb::GaussianFactorVariational::make(6, cfg.theta_factors,
                                               cfg.init_theta_sd);
  const auto eta0 = ucsv::to_unconstrained(cfg.init_params);
  std::copy(eta0.begin(), eta0.end(), q.mean.begin());
  // Zero loadings are a stationary point of the factor gradient; nudge off.
  std::fill(q.factors.begin(), q.factors.end(), 0.01);
  return q;
}

void data_driven_paths(const std::vector<double>& y, ucsv::LatentPaths& paths) {
  const int T = static_cast<int>(y.size());
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / T;
  double v = 0.0;
  for (double yi : y) v += (yi - ybar) * (yi - ybar);
  v = std::max(v / T, 1e-4);
  paths.mu.assign(T, ybar);
  paths.h.assign(T, std::log(v));
}

}  // namespace

JointStateVariational JointStateVariational::make(int nx, double init_sd) {
  if (nx < 4 || init_sd <= 0.0)
    throw std::invalid_argument("JointStateVariational::make: bad shape");
  JointStateVariational q;
  q.nx = nx;
  q.state_mean.assign(nx, 0.0);
  q.diag.assign(nx, init_sd);
  q.sub1.assign(nx - 1, 0.0);
  q.sub2.assign(nx - 2, 0.0);
  q.sub3.assign(nx - 3, 0.0);
  return q;
}

void JointStateVariational::pack_into(vb::Vec& lambda, int offset) const {
  double* out = lambda.data() + offset;
  out = std::copy(state_mean.begin(), state_mean.end(), out);
  out = std::copy(diag.begin(), diag.end(), out);
  out = std::copy(sub1.begin(), sub1.end(), out);
  out = std::copy(sub2.begin(), sub2.end(), out);
  std::copy(sub3.begin(), sub3.end(), out);
}

void JointStateVariational::unpack_from(const vb::Vec& lambda, int offset) {
  const double* in = lambda.data() + offset;
  std::copy(in, in + nx, state_mean.begin());
  in += nx;
  std::copy(in, in + nx, diag.begin());
  in += nx;
  std::copy(in, in + nx - 1, sub1.begin());
  in += nx - 1;
  std::copy(in, in + nx - 2, sub2.begin());
  in += nx - 2;
  std::copy(in, in + nx - 3, sub3.begin());
}

void JointStateVariational::multiply(const vb::Vec& xi, vb::Vec& out) const {
  out.resize(nx);
  for (int i = 0; i < nx; ++i) {
    double v = diag[i] * xi[i];
    if (i >= 1) v += sub1[i - 1] * xi[i - 1];
    if (i >= 2) v += sub2[i - 2] * xi[i - 2];
    if (i >= 3) v += sub3[i - 3] * xi[i - 3];
    out[i] = v;
  }
}

void JointStateVariational::sample(Rng& rng, vb::Vec& x, vb::Vec& xi) const {
  xi.resize(nx);
  for (int i = 0; i < nx; ++i) xi[i] = rng.normal();
  multiply(xi, x);
  for (int i = 0; i < nx; ++i) x[i] += state_mean[i];
}

vb::Vec JointStateVariational::solve_lower(const vb::Vec& rhs) const {
  vb::Vec z(nx);
  for (int i = 0; i < nx; ++i) {
    double v = rhs[i];
    if (i >= 1) v -= sub1[i - 1] * z[i - 1];
    if (i >= 2) v -= sub2[i - 2] * z[i - 2];
    if (i >= 3) v -= sub3[i - 3] * z[i - 3];
    z[i] = v / diag[i];
  }
  return z;
}

double JointStateVariational::logdet_cov() const {
  double s = 0.0;
  for (int i = 0; i < nx; ++i) s += std::log(diag[i]);
  return 2.0 * s;
}

double JointStateVariational::entropy() const {
  return 0.5 * nx * (kLog2Pi + 1.0) + 0.5 * logdet_cov();
}

double JointStateVariational::marginal_var(int i) const {
  double v = diag[i] * diag[i];
  if (i >= 1) v += sub1[i - 1] * sub1[i - 1];
  if (i >= 2) v += sub2[i - 2] * sub2[i - 2];
  if (i >= 3) v += sub3[i - 3] * sub3[i - 3];
  return v;
}

void JointStateVariational::add_grads(const vb::Vec& g_x, const vb::Vec& xi,
                                      vb::Vec& lambda_grad, int offset) const {
  double* gm = lambda_grad.data() + offset;
  double* gd = gm + nx;
  double* g1 = gd + nx;
  double* g2 = g1 + (nx - 1);
  double* g3 = g2 + (nx - 2);
  for (int i = 0; i < nx; ++i) {
    gm[i] += g_x[i];
    // dx_i / dC(i, j) = xi_j; entropy contributes 1/C_ii on the diagonal.
    gd[i] += g_x[i] * xi[i] + 1.0 / diag[i];
    if (i >= 1) g1[i - 1] += g_x[i] * xi[i - 1];
    if (i >= 2) g2[i - 2] += g_x[i] * xi[i - 2];
    if (i >= 3) g3[i - 3] += g_x[i] * xi[i - 3];
  }
}

FitResult fit_qnk(const std::vector<double>& y, const VbFitConfig& cfg,
                  const FitResult* warm) {
  const int n = static_cast<int>(y.size());
  if (n < 10) throw std::invalid_argument("fit_qnk: need y length >= 10");
  const double t0 = now_seconds();
  const int nx = 2 * n;

  vb::GaussianFactorVariational q_theta =
      (warm != nullptr) ? warm->q_theta : init_q_theta(cfg);
  JointStateVariational q_x = JointStateVariational::make(nx, cfg.init_state_sd);
  if (warm != nullptr && warm->q_states.has_value()) {
    const JointStateVariational& w = *warm->q_states;
    const int keep = std::min(w.nx, nx);
    std::copy_n(w.state_mean.begin(), keep, q_x.state_mean.begin());
    std::copy_n(w.diag.begin(), keep, q_x.diag.begin());
    std::copy_n(w.sub1.begin(), std::min<int>(w.sub1.size(), nx - 1),
                q_x.sub1.begin());
    std::copy_n(w.sub2.begin(), std::min<int>(w.sub2.size(), nx - 2),
                q_x.sub2.begin());
    std::copy_n(w.sub3.begin(), std::min<int>(w.sub3.size(), nx - 3),
                q_x.sub3.begin());
    // New time points inherit the last fitted state pair.
    for (int i = keep; i < nx; ++i)
      q_x.state_mean[i] = w.state_mean[w.nx - 2 + ((i - keep) & 1)];
  } else {
    ucsv::LatentPaths init;
    data_driven_paths(y, init);
    for (int t = 0; t < n; ++t) {
      q_x.state_mean[2 * t] = init.mu[t];
      q_x.state_mean[2 * t + 1] = init.h[t];
    }
  }

  const int ltheta = q_theta.lambda_size();
  const int lx = q_x.lambda_size();
  vb::Vec lambda0(ltheta + lx);
  {
    vb::Vec tmp;
    q_theta.pack(tmp);
    std::copy(tmp.begin(), tmp.end(), lambda0.begin());
    q_x.pack_into(lambda0, ltheta);
  }

  // Scratch reused across sequential eval calls.
  vb::Vec theta, zeta, eps, x, xi, theta_lambda(ltheta), g_x(nx), g_theta(6);
  ucsv::LatentPaths paths;
  paths.mu.resize(n);
  paths.h.resize(n);
  std::vector<double> grad_mu, grad_h;

  vb::SgaProblem prob;
  prob.eval = [&](const vb::Vec& lambda, vb::Vec& grad, Rng& rng) -> double {
    std::copy(lambda.begin(), lambda.begin() + ltheta, theta_lambda.begin());
    q_theta.unpack(theta_lambda);
    q_x.unpack_from(lambda, ltheta);

    q_theta.sample_reparam(rng, theta, zeta, eps);
    q_x.sample(rng, x, xi);
    for (int t = 0; t < n; ++t) {
      paths.mu[t] = x[2 * t];
      paths.h[t] = x[2 * t + 1];
    }
    const auto eta = to_eta(theta);
    const double val = ucsv::log_joint_unconstrained(eta, paths, y, cfg.hyper);
    if (!std::isfinite(val)) return val;

    const auto g_eta =
        ucsv::log_joint_grad_unconstrained(eta, paths, y, cfg.hyper);
    std::copy(g_eta.begin(), g_eta.end(), g_theta.begin());
    q_theta.add_reparam_grad(g_theta, zeta, eps, 1.0, grad);
    q_theta.add_entropy_grad(grad);

    const auto fu = ucsv::from_unconstrained(eta);
    ucsv::complete_data_grad_states(fu.params, paths, y, grad_mu, grad_h);
    for (int t = 0; t < n; ++t) {
      g_x[2 * t] = grad_mu[t];
      g_x[2 * t + 1] = grad_h[t];
    }
    q_x.add_grads(g_x, xi, grad, ltheta);
    return val + q_theta.entropy() + q_x.entropy();
  };
  // Positivity of the banded Cholesky diagonal; on violation the whole state
  // block slows down.
  const int diag_begin = ltheta + nx;
  const int diag_end = diag_begin + nx;
  prob.feasible = [diag_begin, diag_end](const vb::Vec& lambda) {
    for (int i = diag_begin; i < diag_end; ++i)
      if (!(lambda[i] > 0.0)) return false;
    return true;
  };
  prob.guard_begin = ltheta;
  prob.guard_end = ltheta + lx;

  vb::SgaResult r = vb::sga_optimize(prob, std::move(lambda0), cfg.sga);

  FitResult out;
  out.method = "qnk";
  std::copy(r.lambda.begin(), r.lambda.begin() + ltheta, theta_lambda.begin());
  q_theta.unpack(theta_lambda);
  q_x.unpack_from(r.lambda, ltheta);
  out.q_theta = q_theta;
  out.q_states = std::move(q_x);
  out.elbo_trace = std::move(r.trace);
  out.n_iters = r.n_iters;
  out.wall_time = now_seconds() - t0;
  return out;
}

FitResult fit_lsnd(const std::vector<double>& y, const VbFitConfig& cfg,
                   const FitResult* warm) {
  const int n = static_cast<int>(y.size());
  if (n < 10) throw std::invalid_argument("fit_lsnd: need y length >= 10");
  const double t0 = now_seconds();

  vb::GaussianFactorVariational q0 =
      (warm != nullptr) ? warm->q_theta : init_q_theta(cfg);

  ucsv::LatentPaths paths;
  data_driven_paths(y, paths);
  std::vector<int> indicators;
  {
    // Settle the conditional sampler before the first gradient step.
    Rng warm_rng(cfg.sga.seed ^ 0x9e3779b97f4a7c15ULL);
    ucsv::Params p0 = cfg.init_params;
    if (warm != nullptr) {
      const auto fu = ucsv::from_unconstrained(to_eta(warm->q_theta.mean));
      p0 = fu.params;
    }
    for (int i = 0; i < cfg.lsnd_warm_sweeps; ++i)
      mcmc::state_sweep(p0, y, paths, indicators, warm_rng);
  }

  ucsv::LatentPaths backup;
  vb::ThetaTarget target = [&](const vb::Vec& theta, vb::Vec& grad,
                               Rng& rng) -> double {
    const auto eta = to_eta(theta);
    const auto fu = ucsv::from_unconstrained(eta);
    const ucsv::Params& p = fu.params;
    if (!(p.rho_mu > 0.0 && p.rho_mu < 1.0 && p.rho_h > 0.0 && p.rho_h < 1.0 &&
          p.sigma_mu > 0.0 && p.sigma_h > 0.0 && std::isfinite(p.sigma_mu) &&
          std::isfinite(p.sigma_h) && std::isfinite(p.mu_bar) &&
          std::isfinite(p.h_bar)))
      return kNegInf;
    // One exact conditional draw of the latent paths given theta supplies an
    // unbiased gradient of the marginal-posterior ELBO. Keep the warm path
    // intact if the sweep degenerates.
    backup = paths;
    mcmc::state_sweep(p, y, paths, indicators, rng);
    bool ok = true;
    for (int t = 0; ok && t < n; ++t)
      ok = std::isfinite(paths.mu[t]) && std::isfinite(paths.h[t]);
    if (!ok) {
      paths = backup;
      return kNegInf;
    }
    const double val = ucsv::log_joint_unconstrained(eta, paths, y, cfg.hyper);
    if (!std::isfinite(val)) {
      paths = backup;
      return val;
    }
    const auto g = ucsv::log_joint_grad_unconstrained(eta, paths, y, cfg.hyper);
    std::copy(g.begin(), g.end(), grad.begin());
    return val;
  };

  vb::FitQResult r = vb::fit_gaussian_factor(q0, target, cfg.sga);
  FitResult out;
  out.method = "lsnd";
  // The value channel here is log p(y, x*, theta) with a fresh conditional
  // path draw: an unbiased gradient source but only a trend-biased proxy of
  // the marginal ELBO, so the trailing window beats the "best-scoring" one.
  out.q_theta = std::move(r.q_last);
  out.elbo_trace = std::move(r.trace);
  out.n_iters = r.n_iters;
  out.wall_time = now_seconds() - t0;
  return out;
}

namespace {

// Precision of the random-walk path block pinned at the initial level:
// quadratic sum_{t=1..n} (h_t - h_{t-1})^2 in (h_1..h_n) with h_0 external.
Tridiag rw_precision(int n) {
  Tridiag L;
  L.diag.assign(n, 2.0);
  L.diag[n - 1] = 1.0;
  L.off.assign(n - 1, -1.0);
  return L;
}

// Exact evidence lower bound of the random-walk volatility CAVI blocks.
double cy_elbo(const std::vector<double>& y2, const CyVariational& q,
               const ucsv::PriorHyper& hyper) {
  const int n = static_cast<int>(y2.size());
  const double a = hyper.ig_shape, b = hyper.ig_scale, v0 = hyper.loc_var;
  const double nu = q.ig_shape, S = q.ig_scale;
  const double tau = nu / S;
  const double elog_s2 = std::log(S) - digamma(nu);

  double term_y = 0.0;
  for (int t = 0; t < n; ++t)
    term_y += -0.5 * kLog2Pi - 0.5 * q.h_mean[t] -
              0.5 * y2[t] * std::exp(-q.h_mean[t] + 0.5 * q.h_var_diag[t]);

  double quad = (q.h_mean[0] - q.h0_mean) * (q.h_mean[0] - q.h0_mean) +
                q.h_var_diag[0] + q.h0_var;
  for (int t = 1; t < n; ++t) {
    const double d = q.h_mean[t] - q.h_mean[t - 1];
    quad += d * d + q.h_var_diag[t] + q.h_var_diag[t - 1] -
            2.0 * q.h_cov_off[t - 1];
  }
  const double term_h =
      -0.5 * n * kLog2Pi - 0.5 * n * elog_s2 - 0.5 * tau * quad;
  const double term_h0 = -0.5 * (kLog2Pi + std::log(v0)) -
                         0.5 * (q.h0_mean * q.h0_mean + q.h0_var) / v0;
  const double term_s2 =
      a * std::log(b) - std::lgamma(a) - (a + 1.0) * elog_s2 - b * tau;

  const double logdet_k = ldl_logdet(ldl_factor(q.h_precision));
  const double ent_h = 0.5 * n * (kLog2Pi + 1.0) - 0.5 * logdet_k;
  const double ent_h0 = 0.5 * (kLog2Pi + 1.0) + 0.5 * std::log(q.h0_var);
  const double ent_s2 =
      nu + std::log(S) + std::lgamma(nu) - (1.0 + nu) * digamma(nu);
  return term_y + term_h + term_h0 + term_s2 + ent_h + ent_h0 + ent_s2;
}

// K = diag(0.5 y_t^2 exp(-m_t + V_tt / 2)) + tau L, the fixed-point
// precision of the Gaussian path block.
Tridiag cy_precision(const std::vector<double>& y2,
                     const std::vector<double>& m,
                     const std::vector<double>& v_diag, double tau) {
  const int n = static_cast<int>(y2.size());
  Tridiag k = rw_precision(n);
  for (int t = 0; t < n; ++t) {
    k.diag[t] = tau * k.diag[t] + 0.5 * y2[t] * std::exp(-m[t] + 0.5 * v_diag[t]);
  }
  for (int t = 0; t + 1 < n; ++t) k.off[t] *= tau;
  return k;
}

void cy_refresh_bands(CyVariational& q) {
  const TridiagLdl f = ldl_factor(q.h_precision);
  ldl_inverse_band(f, q.h_var_diag, q.h_cov_off);
}

}  // namespace

FitResult fit_cy(const std::vector<double>& y, const VbFitConfig& cfg,
                 const FitResult* warm) {
  const int n = static_cast<int>(y.size());
  if (n < 10) throw std::invalid_argument("fit_cy: need y length >= 10");
  const double t0 = now_seconds();
  const double a = cfg.hyper.ig_shape, b = cfg.hyper.ig_scale;
  const double v0 = cfg.hyper.loc_var;

  std::vector<double> y2(n);
  for (int t = 0; t < n; ++t) y2[t] = y[t] * y[t];

  CyVariational q;
  q.h_mean.resize(n);
  if (warm != nullptr && warm->q_cy.has_value()) {
    const auto& w = *warm->q_cy;
    const int keep = std::min<int>(w.h_mean.size(), n);
    std::copy_n(w.h_mean.begin(), keep, q.h_mean.begin());
    for (int t = keep; t < n; ++t) q.h_mean[t] = w.h_mean.back();
  } else {
    for (int t = 0; t < n; ++t) q.h_mean[t] = std::log(y2[t] + 1e-4);
  }
  q.h0_mean = q.h_mean[0];
  q.h0_var = 1.0;
  q.ig_shape = a + 0.5 * n;
  {
    double quad = 0.0;
    for (int t = 1; t < n; ++t) {
      const double d = q.h_mean[t] - q.h_mean[t - 1];
      quad += d * d;
    }
    q.ig_scale = b + 0.5 * std::max(quad, 1e-3);
  }
  q.h_precision = cy_precision(y2, q.h_mean, std::vector<double>(n, 0.0),
                               q.ig_shape / q.ig_scale);
  cy_refresh_bands(q);

  std::vector<double> elbo_per_sweep;
  double prev_elbo = kNegInf;
  for (int sweep = 0; sweep < cfg.cy_max_sweeps; ++sweep) {
    // Innovation variance block: exact conditional is inverse gamma.
    {
      double quad = (q.h_mean[0] - q.h0_mean) * (q.h_mean[0] - q.h0_mean) +
                    q.h_var_diag[0] + q.h0_var;
      for (int t = 1; t < n; ++t) {
        const double d = q.h_mean[t] - q.h_mean[t - 1];
        quad += d * d + q.h_var_diag[t] + q.h_var_diag[t - 1] -
                2.0 * q.h_cov_off[t - 1];
      }
      q.ig_shape = a + 0.5 * n;
      q.ig_scale = b + 0.5 * quad;
    }
    const double tau = q.ig_shape / q.ig_scale;

    // Initial level block: Gaussian with closed-form moments.
    {
      const double prec = tau + 1.0 / v0;
      q.h0_mean = tau * q.h_mean[0] / prec;
      q.h0_var = 1.0 / prec;
    }

    // Path block: one guarded Newton step on the ELBO as a function of the
    // mean, precision refreshed by its fixed-point formula. Backtracking on
    // the exact ELBO keeps every sweep monotone.
    const double elbo_ab = cy_elbo(y2, q, cfg.hyper);
    {
      std::vector<double> g(n);
      for (int t = 0; t < n; ++t) {
        const double like =
            -0.5 + 0.5 * y2[t] * std::exp(-q.h_mean[t] + 0.5 * q.h_var_diag[t]);
        const double left = (t == 0) ? q.h0_mean : q.h_mean[t - 1];
        double walk = q.h_mean[t] - left;
        if (t + 1 < n) walk += q.h_mean[t] - q.h_mean[t + 1];
        g[t] = like - tau * walk;
      }
      const Tridiag k_cur = cy_precision(y2, q.h_mean, q.h_var_diag, tau);
      const std::vector<double> dir = ldl_solve(ldl_factor(k_cur), g);

      CyVariational best = q;
      double best_elbo = elbo_ab;
      bool improved = false;
      double step = 1.0;
      for (int tries = 0; tries < 30; ++tries, step *= 0.5) {
        CyVariational cand = q;
        for (int t = 0; t < n; ++t) cand.h_mean[t] = q.h_mean[t] + step * dir[t];
        cand.h_precision = cy_precision(y2, cand.h_mean, q.h_var_diag, tau);
        cy_refresh_bands(cand);
        const double e = cy_elbo(y2, cand, cfg.hyper);
        if (std::isfinite(e) && e > best_elbo) {
          best = std::move(cand);
          best_elbo = e;
          improved = true;
          break;
        }
      }
      if (improved) q = std::move(best);
    }

    const double elbo = cy_elbo(y2, q, cfg.hyper);
    elbo_per_sweep.push_back(elbo);
    if (sweep > 0 && std::abs(elbo - prev_elbo) < cfg.cy_tol) {
      prev_elbo = elbo;
      break;
    }
    prev_elbo = elbo;
  }

  q.sweep_elbo = elbo_per_sweep;
  FitResult out;
  out.method = "cy";
  out.q_cy = std::move(q);
  out.elbo_trace.noisy = elbo_per_sweep;
  out.elbo_trace.smoothed = elbo_per_sweep;
  out.elbo_trace.status = static_cast<int>(elbo_per_sweep.size()) < cfg.cy_max_sweeps
                              ? vb::SgaStatus::kConverged
                              : vb::SgaStatus::kMaxIters;
  out.n_iters = static_cast<int>(elbo_per_sweep.size());
  out.wall_time = now_seconds() - t0;
  return out;
}

StateSummary state_marginals(const FitResult& fit, const std::vector<double>& y,
                             int n_sweeps, std::uint64_t seed) {
  StateSummary s;
  if (fit.method == "qnk") {
    const JointStateVariational& qx = *fit.q_states;
    const int n = qx.nx / 2;
    s.mu_mean.resize(n);
    s.h_mean.resize(n);
    s.exp_half_h_mean.resize(n);
    for (int t = 0; t < n; ++t) {
      s.mu_mean[t] = qx.state_mean[2 * t];
      const double m = qx.state_mean[2 * t + 1];
      const double v = qx.marginal_var(2 * t + 1);
      s.h_mean[t] = m;
      s.exp_half_h_mean[t] = std::exp(0.5 * m + 0.125 * v);
    }
    return s;
  }
  if (fit.method == "cy") {
    const CyVariational& q = *fit.q_cy;
    const int n = static_cast<int>(q.h_mean.size());
    s.mu_mean.assign(n, 0.0);  // the random-walk model has no trend component
    s.h_mean = q.h_mean;
    s.exp_half_h_mean.resize(n);
    for (int t = 0; t < n; ++t)
      s.exp_half_h_mean[t] =
          std::exp(0.5 * q.h_mean[t] + 0.125 * q.h_var_diag[t]);
    return s;
  }
  if (fit.method != "lsnd")
    throw std::invalid_argument("state_marginals: unknown method " + fit.method);

  // Average exact conditional draws under theta ~ q_theta.
  const int n = static_cast<int>(y.size());
  if (n_sweeps < 1)
    throw std::invalid_argument("state_marginals: need n_sweeps >= 1");
  Rng rng(seed);
  ucsv::LatentPaths paths;
  data_driven_paths(y, paths);
  std::vector<int> indicators;
  vb::Vec theta, zeta, eps;
  {
    const auto fu = ucsv::from_unconstrained(to_eta(fit.q_theta.mean));
    for (int i = 0; i < 10; ++i)
      mcmc::state_sweep(fu.params, y, paths, indicators, rng);
  }
  s.mu_mean.assign(n, 0.0);
  s.h_mean.assign(n, 0.0);
  s.exp_half_h_mean.assign(n, 0.0);
  for (int j = 0; j < n_sweeps; ++j) {
    fit.q_theta.sample_reparam(rng, theta, zeta, eps);
    const auto fu = ucsv::from_unconstrained(to_eta(theta));
    mcmc::state_sweep(fu.params, y, paths, indicators, rng);
    for (int t = 0; t < n; ++t) {
      s.mu_mean[t] += paths.mu[t];
      s.h_mean[t] += paths.h[t];
      s.exp_half_h_mean[t] += std::exp(0.5 * paths.h[t]);
    }
  }
  for (int t = 0; t < n; ++t) {
    s.mu_mean[t] /= n_sweeps;
    s.h_mean[t] /= n_sweeps;
    s.exp_half_h_mean[t] /= n_sweeps;
  }
  return s;
}

}  // namespace ssmvb::vbm
