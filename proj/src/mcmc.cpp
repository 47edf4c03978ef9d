#include "ssmvb/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ssmvb/stats.hpp"

namespace ssmvb::mcmc {

namespace {

struct FilterStorage {
  std::vector<double> filt_mean, filt_var, pred_mean, pred_var;
  double loglik = 0.0;
};

// Kalman filter for the scalar AR(1) model with stationary initialization
// and time-varying observation variance.
void ar1_filter(const Ar1Spec& spec, const std::vector<double>& z,
                const std::vector<double>& obs_var, FilterStorage& st) {
  const int T = static_cast<int>(z.size());
  st.filt_mean.resize(T);
  st.filt_var.resize(T);
  st.pred_mean.resize(T);
  st.pred_var.resize(T);
  st.loglik = 0.0;
  const double s2 = spec.sigma * spec.sigma;
  double a = spec.m;
  double r = s2 / (1.0 - spec.rho * spec.rho);
  for (int t = 0; t < T; ++t) {
    if (t > 0) {
      a = spec.m + spec.rho * (st.filt_mean[t - 1] - spec.m);
      r = spec.rho * spec.rho * st.filt_var[t - 1] + s2;
    }
    st.pred_mean[t] = a;
    st.pred_var[t] = r;
    const double f = r + obs_var[t];
    st.loglik += norm_logpdf(z[t], a, std::sqrt(f));
    const double k = r / f;
    st.filt_mean[t] = a + k * (z[t] - a);
    st.filt_var[t] = r * obs_var[t] / f;
  }
}

}  // namespace

void ar1_ffbs(const Ar1Spec& spec, const std::vector<double>& z,
              const std::vector<double>& obs_var, std::vector<double>& x,
              Rng& rng) {
  const int T = static_cast<int>(z.size());
  if (static_cast<int>(obs_var.size()) != T || T < 1)
    throw std::invalid_argument("ar1_ffbs: size mismatch");
  x.resize(T);
  if (spec.sigma == 0.0) {
    std::fill(x.begin(), x.end(), spec.m);
    return;
  }
  FilterStorage st;
  ar1_filter(spec, z, obs_var, st);
  const double s2 = spec.sigma * spec.sigma;
  x[T - 1] = rng.normal(st.filt_mean[T - 1], std::sqrt(st.filt_var[T - 1]));
  for (int t = T - 2; t >= 0; --t) {
    const double r_next = spec.rho * spec.rho * st.filt_var[t] + s2;
    const double gain = st.filt_var[t] * spec.rho / r_next;
    const double innov =
        x[t + 1] - (spec.m + spec.rho * (st.filt_mean[t] - spec.m));
    const double cm = st.filt_mean[t] + gain * innov;
    const double cv = st.filt_var[t] * (1.0 - gain * spec.rho);
    x[t] = rng.normal(cm, std::sqrt(std::max(cv, 0.0)));
  }
}

SmootherResult ar1_kalman_smoother(const Ar1Spec& spec,
                                   const std::vector<double>& z,
                                   const std::vector<double>& obs_var) {
  const int T = static_cast<int>(z.size());
  if (static_cast<int>(obs_var.size()) != T || T < 1)
    throw std::invalid_argument("ar1_kalman_smoother: size mismatch");
  SmootherResult out;
  out.mean.resize(T);
  out.var.resize(T);
  if (spec.sigma == 0.0) {
    std::fill(out.mean.begin(), out.mean.end(), spec.m);
    std::fill(out.var.begin(), out.var.end(), 0.0);
    for (int t = 0; t < T; ++t)
      out.loglik += norm_logpdf(z[t], spec.m, std::sqrt(obs_var[t]));
    return out;
  }
  FilterStorage st;
  ar1_filter(spec, z, obs_var, st);
  out.loglik = st.loglik;
  out.mean[T - 1] = st.filt_mean[T - 1];
  out.var[T - 1] = st.filt_var[T - 1];
  for (int t = T - 2; t >= 0; --t) {
    const double j = st.filt_var[t] * spec.rho / st.pred_var[t + 1];
    out.mean[t] = st.filt_mean[t] + j * (out.mean[t + 1] - st.pred_mean[t + 1]);
    out.var[t] = st.filt_var[t] + j * j * (out.var[t + 1] - st.pred_var[t + 1]);
  }
  return out;
}

void sample_indicators(const std::vector<double>& zstar,
                       const std::vector<double>& h, std::vector<int>& s,
                       Rng& rng) {
  const int T = static_cast<int>(zstar.size());
  s.resize(T);
  std::array<double, 7> logp;
  std::array<double, 7> p;
  for (int t = 0; t < T; ++t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < 7; ++j) {
      const double mu_j = h[t] + kKsc[j].mean + kKscOffset;
      const double d = zstar[t] - mu_j;
      logp[j] = std::log(kKsc[j].weight) -
                0.5 * (std::log(kKsc[j].var) + d * d / kKsc[j].var);
      mx = std::max(mx, logp[j]);
    }
    double total = 0.0;
    for (int j = 0; j < 7; ++j) {
      p[j] = std::exp(logp[j] - mx);
      total += p[j];
    }
    s[t] = rng.categorical(p.data(), 7, total);
  }
}

void state_sweep(const ucsv::Params& p, const std::vector<double>& y,
                 ucsv::LatentPaths& paths, std::vector<int>& indicators,
                 Rng& rng) {
  const int T = static_cast<int>(y.size());
  if (static_cast<int>(paths.mu.size()) != T ||
      static_cast<int>(paths.h.size()) != T)
    throw std::invalid_argument("state_sweep: path size mismatch");
  // mu | h: Gaussian observation with variance exp(h_t).
  std::vector<double> vobs(T);
  for (int t = 0; t < T; ++t) vobs[t] = std::exp(paths.h[t]);
  ar1_ffbs({p.mu_bar, p.rho_mu, p.sigma_mu}, y, vobs, paths.mu, rng);

  // Mixture indicators given the residuals, then h | indicators.
  std::vector<double> zstar(T);
  for (int t = 0; t < T; ++t) {
    const double r = y[t] - paths.mu[t];
    zstar[t] = std::log(r * r + kLogSquashEps);
  }
  sample_indicators(zstar, paths.h, indicators, rng);
  std::vector<double> zh(T);
  for (int t = 0; t < T; ++t) {
    zh[t] = zstar[t] - kKsc[indicators[t]].mean - kKscOffset;
    vobs[t] = kKsc[indicators[t]].var;
  }
  ar1_ffbs({p.h_bar, p.rho_h, p.sigma_h}, zh, vobs, paths.h, rng);
}

void RwAdapt::update(double accept_prob) {
  ++proposals;
  if (!frozen) {
    ++k;
    log_step += std::pow(static_cast<double>(k), -0.6) * (accept_prob - target);
    log_step = std::clamp(log_step, std::log(1e-6), std::log(10.0));
  }
}

namespace {

// Log conditional density of rho given the path (location and variance
// fixed): stationary-init AR(1) likelihood terms that involve rho, flat
// prior on (0,1).
double rho_log_target(double rho, const std::vector<double>& x, double m,
                      double s2) {
  if (rho <= 0.0 || rho >= 1.0) return -std::numeric_limits<double>::infinity();
  const int T = static_cast<int>(x.size());
  const double om = 1.0 - rho * rho;
  double q = om * (x[0] - m) * (x[0] - m);
  for (int t = 1; t < T; ++t) {
    const double e = (x[t] - m) - rho * (x[t - 1] - m);
    q += e * e;
  }
  return 0.5 * std::log(om) - 0.5 * q / s2;
}

void sample_block(double& loc, double& rho, double& sigma,
                  const std::vector<double>& x, const ucsv::PriorHyper& hyper,
                  RwAdapt& adapt, Rng& rng) {
  const int T = static_cast<int>(x.size());
  double s2 = sigma * sigma;

  // Location: Gaussian conditional from the stationary-init quadratic form.
  {
    const double om = 1.0 - rho * rho;
    double sum_e = 0.0;
    for (int t = 1; t < T; ++t) sum_e += x[t] - rho * x[t - 1];
    const double prec =
        (om + (T - 1) * (1.0 - rho) * (1.0 - rho)) / s2 + 1.0 / hyper.loc_var;
    const double lin = (om * x[0] + (1.0 - rho) * sum_e) / s2;
    loc = rng.normal(lin / prec, std::sqrt(1.0 / prec));
  }

  // Innovation variance: conjugate inverse gamma.
  {
    const double om = 1.0 - rho * rho;
    double q = om * (x[0] - loc) * (x[0] - loc);
    for (int t = 1; t < T; ++t) {
      const double e = (x[t] - loc) - rho * (x[t - 1] - loc);
      q += e * e;
    }
    s2 = rng.inv_gamma(hyper.ig_shape + 0.5 * T, hyper.ig_scale + 0.5 * q);
    sigma = std::sqrt(s2);
  }

  // AR coefficient: Gaussian random-walk Metropolis on rho itself.
  {
    const double cur = rho_log_target(rho, x, loc, s2);
    const double prop = rho + adapt.step() * rng.normal();
    const double cand = rho_log_target(prop, x, loc, s2);
    const double a = std::min(1.0, std::exp(cand - cur));
    if (rng.uniform() < a) {
      rho = prop;
      ++adapt.accepts;
    }
    adapt.update(a);
  }
}

}  // namespace

void sample_theta_given_paths(ucsv::Params& p, const ucsv::LatentPaths& paths,
                              const ucsv::PriorHyper& hyper, RwAdapt& adapt_mu,
                              RwAdapt& adapt_h, Rng& rng) {
  sample_block(p.mu_bar, p.rho_mu, p.sigma_mu, paths.mu, hyper, adapt_mu, rng);
  sample_block(p.h_bar, p.rho_h, p.sigma_h, paths.h, hyper, adapt_h, rng);
}

McmcResult run_mcmc(const std::vector<double>& y, const McmcConfig& cfg,
                    const ucsv::LatentPaths* init_paths) {
  const int T = static_cast<int>(y.size());
  if (T < 2) throw std::invalid_argument("run_mcmc: need at least 2 points");
  if (cfg.n_burn >= cfg.n_iter || cfg.n_burn < 0 || cfg.thin < 1)
    throw std::invalid_argument("run_mcmc: bad iteration plan");
  Rng rng(cfg.seed);

  ucsv::Params p = cfg.init;
  ucsv::validate(p);
  ucsv::LatentPaths paths;
  if (init_paths != nullptr) {
    if (static_cast<int>(init_paths->mu.size()) != T ||
        static_cast<int>(init_paths->h.size()) != T)
      throw std::invalid_argument("run_mcmc: warm-start size mismatch");
    paths = *init_paths;
  } else {
    const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / T;
    double v = 0.0;
    for (double yi : y) v += (yi - ybar) * (yi - ybar);
    v = std::max(v / T, 1e-4);
    paths.mu.assign(T, ybar);
    paths.h.assign(T, std::log(v));
  }

  RwAdapt adapt_mu(cfg.rw_init_step, cfg.rw_target);
  RwAdapt adapt_h(cfg.rw_init_step, cfg.rw_target);
  std::vector<int> indicators;

  McmcResult out;
  out.mean_mu.assign(T, 0.0);
  out.mean_h.assign(T, 0.0);
  out.mean_exp_half_h.assign(T, 0.0);
  const int n_keep_sweeps = cfg.n_iter - cfg.n_burn;
  out.draws.reserve((n_keep_sweeps + cfg.thin - 1) / cfg.thin);

  for (int it = 0; it < cfg.n_iter; ++it) {
    if (it == cfg.n_burn) {
      adapt_mu.freeze();
      adapt_h.freeze();
    }
    state_sweep(p, y, paths, indicators, rng);
    if (!cfg.fix_theta)
      sample_theta_given_paths(p, paths, cfg.hyper, adapt_mu, adapt_h, rng);
    if (it >= cfg.n_burn) {
      for (int t = 0; t < T; ++t) {
        out.mean_mu[t] += paths.mu[t];
        out.mean_h[t] += paths.h[t];
        out.mean_exp_half_h[t] += std::exp(0.5 * paths.h[t]);
      }
      if ((it - cfg.n_burn) % cfg.thin == 0) {
        out.draws.push_back(p);
        ++out.n_kept;
      }
    }
  }
  for (int t = 0; t < T; ++t) {
    out.mean_mu[t] /= n_keep_sweeps;
    out.mean_h[t] /= n_keep_sweeps;
    out.mean_exp_half_h[t] /= n_keep_sweeps;
  }
  out.last_paths = std::move(paths);
  out.last_indicators = std::move(indicators);
  out.accept_rho_mu = adapt_mu.accept_rate();
  out.accept_rho_h = adapt_h.accept_rate();
  return out;
}

}  // namespace ssmvb::mcmc
