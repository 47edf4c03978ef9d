#include "ssmvb/predictive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ssmvb/mcmc.hpp"
#include "ssmvb/stats.hpp"

namespace ssmvb::pred {

double PredictiveDensity::pdf(double y) const {
  const int J = size();
  double s = 0.0;
  for (int j = 0; j < J; ++j) s += norm_pdf(y, mean[j], sd[j]);
  return s / J;
}

double PredictiveDensity::log_pdf(double y) const {
  const int J = size();
  std::vector<double> lp(J);
  for (int j = 0; j < J; ++j) lp[j] = norm_logpdf(y, mean[j], sd[j]);
  return logsumexp(lp) - std::log(static_cast<double>(J));
}

double PredictiveDensity::cdf(double y) const {
  const int J = size();
  double s = 0.0;
  for (int j = 0; j < J; ++j) s += norm_cdf((y - mean[j]) / sd[j]);
  return s / J;
}

double PredictiveDensity::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("quantile: level outside (0,1)");
  const int J = size();
  double lo = mean[0] - 10.0 * sd[0], hi = mean[0] + 10.0 * sd[0];
  for (int j = 1; j < J; ++j) {
    lo = std::min(lo, mean[j] - 10.0 * sd[j]);
    hi = std::max(hi, mean[j] + 10.0 * sd[j]);
  }
  while (cdf(lo) > u) lo -= (hi - lo);
  while (cdf(hi) < u) hi += (hi - lo);
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;  // interval at floating-point limit
    if (cdf(mid) < u)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double PredictiveDensity::mixture_mean() const {
  double s = 0.0;
  for (double m : mean) s += m;
  return s / size();
}

namespace {

void propagate(const ucsv::Params& p, double mu_n, double h_n, Rng& rng,
               PredictiveDensity& out) {
  const double mu_next =
      p.mu_bar + p.rho_mu * (mu_n - p.mu_bar) + p.sigma_mu * rng.normal();
  const double h_next =
      p.h_bar + p.rho_h * (h_n - p.h_bar) + p.sigma_h * rng.normal();
  out.mean.push_back(mu_next);
  out.sd.push_back(std::exp(0.5 * h_next));
}

}  // namespace

PredictiveDensity predict_approx(const vbm::FitResult& fit, int J, Rng& rng) {
  if (J < 1) throw std::invalid_argument("predict_approx: J < 1");
  PredictiveDensity out;
  out.mean.reserve(J);
  out.sd.reserve(J);

  if (fit.method == "qnk") {
    const vbm::JointStateVariational& qx = *fit.q_states;
    const int nx = qx.nx;
    // Joint marginal of the final (mu_n, h_n) pair: 2x2 block of CC'.
    const double v_mm = qx.marginal_var(nx - 2);
    const double v_hh = qx.marginal_var(nx - 1);
    double v_mh = qx.diag[nx - 2] * qx.sub1[nx - 2];
    if (nx >= 3) v_mh += qx.sub1[nx - 3] * qx.sub2[nx - 3];
    if (nx >= 4) v_mh += qx.sub2[nx - 4] * qx.sub3[nx - 4];
    const double l11 = std::sqrt(v_mm);
    const double l21 = v_mh / l11;
    const double l22 = std::sqrt(std::max(v_hh - l21 * l21, 1e-300));

    vb::Vec theta, zeta, eps;
    for (int j = 0; j < J; ++j) {
      fit.q_theta.sample_reparam(rng, theta, zeta, eps);
      const auto fu = ucsv::from_unconstrained(
          {theta[0], theta[1], theta[2], theta[3], theta[4], theta[5]});
      const double z1 = rng.normal(), z2 = rng.normal();
      const double mu_n = qx.state_mean[nx - 2] + l11 * z1;
      const double h_n = qx.state_mean[nx - 1] + l21 * z1 + l22 * z2;
      propagate(fu.params, mu_n, h_n, rng, out);
    }
    return out;
  }
  if (fit.method == "cy") {
    const vbm::CyVariational& q = *fit.q_cy;
    const int n = static_cast<int>(q.h_mean.size());
    const double m_n = q.h_mean[n - 1];
    const double sd_n = std::sqrt(q.h_var_diag[n - 1]);
    for (int j = 0; j < J; ++j) {
      const double s2 = rng.inv_gamma(q.ig_shape, q.ig_scale);
      const double h_n = rng.normal(m_n, sd_n);
      const double h_next = h_n + std::sqrt(s2) * rng.normal();
      out.mean.push_back(0.0);  // the random-walk model carries no trend
      out.sd.push_back(std::exp(0.5 * h_next));
    }
    return out;
  }
  throw std::invalid_argument(
      "predict_approx: fit carries no state representation");
}

namespace {

void ensure_chain(const std::vector<double>& y, SimChain& chain) {
  const int n = static_cast<int>(y.size());
  const int have = static_cast<int>(chain.paths.mu.size());
  if (!chain.initialized || have == 0) {
    double ybar = 0.0;
    for (double yi : y) ybar += yi;
    ybar /= n;
    double v = 0.0;
    for (double yi : y) v += (yi - ybar) * (yi - ybar);
    v = std::max(v / n, 1e-4);
    chain.paths.mu.assign(n, ybar);
    chain.paths.h.assign(n, std::log(v));
    chain.initialized = false;  // caller-visible flag set after warmup
    return;
  }
  if (have < n) {
    // Window grew: new points inherit the last latent values.
    chain.paths.mu.resize(n, chain.paths.mu.back());
    chain.paths.h.resize(n, chain.paths.h.back());
  } else if (have > n) {
    chain.paths.mu.resize(n);
    chain.paths.h.resize(n);
  }
}

template <typename NextParams>
PredictiveDensity sim_core(NextParams&& next_params,
                           const std::vector<double>& y, int J,
                           SimChain& chain, Rng& rng, int warmup) {
  if (J < 1) throw std::invalid_argument("predict_sim: J < 1");
  const int n = static_cast<int>(y.size());
  if (n < 2) throw std::invalid_argument("predict_sim: window too short");
  const bool cold = !chain.initialized || chain.paths.mu.empty();
  ensure_chain(y, chain);
  if (cold) {
    const ucsv::Params p0 = next_params(0);
    for (int i = 0; i < warmup; ++i)
      mcmc::state_sweep(p0, y, chain.paths, chain.indicators, rng);
    chain.initialized = true;
  }
  PredictiveDensity out;
  out.mean.reserve(J);
  out.sd.reserve(J);
  for (int j = 0; j < J; ++j) {
    const ucsv::Params p = next_params(j);
    mcmc::state_sweep(p, y, chain.paths, chain.indicators, rng);
    propagate(p, chain.paths.mu[n - 1], chain.paths.h[n - 1], rng, out);
  }
  return out;
}

}  // namespace

PredictiveDensity predict_sim(const std::vector<ucsv::Params>& theta_draws,
                              const std::vector<double>& y, int J,
                              SimChain& chain, Rng& rng, int warmup) {
  if (theta_draws.empty())
    throw std::invalid_argument("predict_sim: empty parameter sample");
  const auto n_draws = theta_draws.size();
  return sim_core(
      [&theta_draws, n_draws, J](int j) {
        return theta_draws[(static_cast<size_t>(j) * n_draws) / J];
      },
      y, J, chain, rng, warmup);
}

PredictiveDensity predict_sim(const vb::GaussianFactorVariational& q_theta,
                              const std::vector<double>& y, int J,
                              SimChain& chain, Rng& rng, int warmup) {
  vb::Vec theta, zeta, eps;
  return sim_core(
      [&](int) {
        q_theta.sample_reparam(rng, theta, zeta, eps);
        const auto fu = ucsv::from_unconstrained(
            {theta[0], theta[1], theta[2], theta[3], theta[4], theta[5]});
        ucsv::Params p = fu.params;
        // Transform saturation at a stray draw would poison the sweep; clamp
        // to the open support instead.
        p.rho_mu = std::clamp(p.rho_mu, 1e-12, 1.0 - 1e-12);
        p.rho_h = std::clamp(p.rho_h, 1e-12, 1.0 - 1e-12);
        p.sigma_mu = std::max(p.sigma_mu, 1e-12);
        p.sigma_h = std::max(p.sigma_h, 1e-12);
        return p;
      },
      y, J, chain, rng, warmup);
}

PredictiveDensity to_kde(const PredictiveDensity& pd, Rng& rng) {
  const int J = pd.size();
  PredictiveDensity out;
  out.mean.resize(J);
  out.sd.resize(J);
  double s1 = 0.0, s2 = 0.0;
  for (int j = 0; j < J; ++j) {
    out.mean[j] = rng.normal(pd.mean[j], pd.sd[j]);
    s1 += out.mean[j];
    s2 += out.mean[j] * out.mean[j];
  }
  const double var = std::max(s2 / J - (s1 / J) * (s1 / J), 0.0);
  const double bw = std::max(
      1.06 * std::sqrt(var) * std::pow(static_cast<double>(J), -0.2), 1e-12);
  std::fill(out.sd.begin(), out.sd.end(), bw);
  return out;
}

}  // namespace ssmvb::pred
