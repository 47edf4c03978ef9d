#include "ssmvb/ucsv.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ssmvb/stats.hpp"

namespace ssmvb::ucsv {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double expit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Log-density pieces of one stationary AR(1) block with location m,
// coefficient rho in [0,1), innovation variance s2 > 0.
struct ArBlock {
  double m, rho, s2;
};

double ar_loglik(const ArBlock& b, const std::vector<double>& x) {
  const int T = static_cast<int>(x.size());
  const double om = 1.0 - b.rho * b.rho;
  double q = om * (x[0] - b.m) * (x[0] - b.m);
  for (int t = 1; t < T; ++t) {
    const double e = (x[t] - b.m) - b.rho * (x[t - 1] - b.m);
    q += e * e;
  }
  return -0.5 * T * kLog2Pi - 0.5 * T * std::log(b.s2) + 0.5 * std::log(om) -
         0.5 * q / b.s2;
}

}  // namespace

void validate(const Params& p) {
  const bool ok = std::isfinite(p.mu_bar) && std::isfinite(p.h_bar) &&
                  p.rho_mu >= 0.0 && p.rho_mu < 1.0 && p.rho_h >= 0.0 &&
                  p.rho_h < 1.0 && p.sigma_mu >= 0.0 && p.sigma_h >= 0.0 &&
                  std::isfinite(p.sigma_mu) && std::isfinite(p.sigma_h);
  if (!ok) throw std::invalid_argument("ucsv: invalid parameter vector");
}

DgpConfig dgp_preset(int which, int T, std::uint64_t seed) {
  DgpConfig c;
  c.T = T;
  c.seed = seed;
  switch (which) {
    case 1: c.params = {0.0, 0.8, 0.5, -1.0, 0.0, 0.0}; break;
    case 2: c.params = {0.0, 0.0, 0.5, -1.3, 0.95, 0.3}; break;
    case 3: c.params = {0.0, 0.8, 0.5, -1.3, 0.95, 0.3}; break;
    default: throw std::invalid_argument("dgp_preset: which must be 1, 2 or 3");
  }
  return c;
}

LatentPaths simulate_paths(const Params& p, int T, Rng& rng) {
  validate(p);
  if (T < 1) throw std::invalid_argument("simulate_paths: T must be >= 1");
  LatentPaths paths;
  paths.mu.resize(T);
  paths.h.resize(T);
  const double sd_mu0 = p.sigma_mu / std::sqrt(1.0 - p.rho_mu * p.rho_mu);
  paths.mu[0] = p.mu_bar + sd_mu0 * rng.normal();
  for (int t = 1; t < T; ++t)
    paths.mu[t] = p.mu_bar + p.rho_mu * (paths.mu[t - 1] - p.mu_bar) +
                  p.sigma_mu * rng.normal();
  const double sd_h0 = p.sigma_h / std::sqrt(1.0 - p.rho_h * p.rho_h);
  paths.h[0] = p.h_bar + sd_h0 * rng.normal();
  for (int t = 1; t < T; ++t)
    paths.h[t] = p.h_bar + p.rho_h * (paths.h[t - 1] - p.h_bar) +
                 p.sigma_h * rng.normal();
  return paths;
}

std::vector<double> simulate_obs(const Params& p, const LatentPaths& paths,
                                 Rng& rng) {
  validate(p);
  const int T = static_cast<int>(paths.mu.size());
  std::vector<double> y(T);
  for (int t = 0; t < T; ++t)
    y[t] = paths.mu[t] + std::exp(0.5 * paths.h[t]) * rng.normal();
  return y;
}

SimulationResult simulate(const DgpConfig& config) {
  Rng rng(config.seed);
  SimulationResult r;
  r.paths = simulate_paths(config.params, config.T, rng);
  r.y = simulate_obs(config.params, r.paths, rng);
  return r;
}

double log_prior(const Params& p, const PriorHyper& hyper) {
  // Open support: boundary AR coefficients and zero variances are excluded.
  // Off-support inputs return -inf rather than throwing; variational draws
  // can land on the boundary through transform saturation.
  if (!(p.rho_mu > 0.0 && p.rho_mu < 1.0 && p.rho_h > 0.0 && p.rho_h < 1.0 &&
        p.sigma_mu > 0.0 && p.sigma_h > 0.0 && std::isfinite(p.sigma_mu) &&
        std::isfinite(p.sigma_h) && std::isfinite(p.mu_bar) &&
        std::isfinite(p.h_bar)))
    return kNegInf;
  const double a = hyper.ig_shape, b = hyper.ig_scale;
  const double ig_const = a * std::log(b) - std::lgamma(a);
  double lp = 0.0;
  for (double loc : {p.mu_bar, p.h_bar})
    lp += -0.5 * kLog2Pi - 0.5 * std::log(hyper.loc_var) -
          0.5 * loc * loc / hyper.loc_var;
  for (double sigma : {p.sigma_mu, p.sigma_h}) {
    const double s2 = sigma * sigma;
    lp += ig_const - (a + 1.0) * std::log(s2) - b / s2;
  }
  return lp;  // U(0,1) densities contribute log 1 = 0
}

Unconstrained to_unconstrained(const Params& p) {
  validate(p);
  if (p.rho_mu <= 0.0 || p.rho_h <= 0.0 || p.sigma_mu <= 0.0 || p.sigma_h <= 0.0)
    throw std::invalid_argument("to_unconstrained: boundary parameter");
  return {p.mu_bar,
          std::log(p.rho_mu / (1.0 - p.rho_mu)),
          2.0 * std::log(p.sigma_mu),
          p.h_bar,
          std::log(p.rho_h / (1.0 - p.rho_h)),
          2.0 * std::log(p.sigma_h)};
}

FromUnconstrained from_unconstrained(const Unconstrained& eta) {
  FromUnconstrained r;
  r.params.mu_bar = eta[0];
  r.params.rho_mu = expit(eta[1]);
  r.params.sigma_mu = std::exp(0.5 * eta[2]);
  r.params.h_bar = eta[3];
  r.params.rho_h = expit(eta[4]);
  r.params.sigma_h = std::exp(0.5 * eta[5]);
  r.log_jacobian = std::log(r.params.rho_mu) + std::log1p(-r.params.rho_mu) +
                   std::log(r.params.rho_h) + std::log1p(-r.params.rho_h) +
                   eta[2] + eta[5];
  return r;
}

double complete_data_loglik(const Params& p, const LatentPaths& paths,
                            const std::vector<double>& y) {
  const int T = static_cast<int>(y.size());
  if (static_cast<int>(paths.mu.size()) != T ||
      static_cast<int>(paths.h.size()) != T || T < 1)
    throw std::invalid_argument("complete_data_loglik: size mismatch");
  if (!(p.sigma_mu > 0.0 && p.sigma_h > 0.0 && p.rho_mu >= 0.0 &&
        p.rho_mu < 1.0 && p.rho_h >= 0.0 && p.rho_h < 1.0))
    return kNegInf;
  double ll = ar_loglik({p.mu_bar, p.rho_mu, p.sigma_mu * p.sigma_mu}, paths.mu) +
              ar_loglik({p.h_bar, p.rho_h, p.sigma_h * p.sigma_h}, paths.h);
  for (int t = 0; t < T; ++t) {
    const double r = y[t] - paths.mu[t];
    ll += -0.5 * kLog2Pi - 0.5 * paths.h[t] -
          0.5 * r * r * std::exp(-paths.h[t]);
  }
  return ll;
}

double log_joint_unconstrained(const Unconstrained& eta,
                               const LatentPaths& paths,
                               const std::vector<double>& y,
                               const PriorHyper& hyper) {
  const auto fu = from_unconstrained(eta);
  const double lp = log_prior(fu.params, hyper);
  if (!std::isfinite(lp)) return kNegInf;
  return complete_data_loglik(fu.params, paths, y) + lp + fu.log_jacobian;
}

namespace {

// d ar_loglik / d(m, rho, s2) for one block.
void ar_grad(const ArBlock& b, const std::vector<double>& x, double& gm,
             double& grho, double& gs2) {
  const int T = static_cast<int>(x.size());
  const double om = 1.0 - b.rho * b.rho;
  const double d0 = x[0] - b.m;
  double q = om * d0 * d0;
  double se = 0.0, sex = 0.0;
  for (int t = 1; t < T; ++t) {
    const double e = (x[t] - b.m) - b.rho * (x[t - 1] - b.m);
    q += e * e;
    se += e;
    sex += e * (x[t - 1] - b.m);
  }
  gm = (om * d0 + (1.0 - b.rho) * se) / b.s2;
  grho = -b.rho / om + (b.rho * d0 * d0 + sex) / b.s2;
  gs2 = -0.5 * T / b.s2 + 0.5 * q / (b.s2 * b.s2);
}

}  // namespace

Unconstrained log_joint_grad_unconstrained(const Unconstrained& eta,
                                           const LatentPaths& paths,
                                           const std::vector<double>& /*y*/,
                                           const PriorHyper& hyper) {
  const auto fu = from_unconstrained(eta);
  const Params& p = fu.params;
  const double a = hyper.ig_shape, b = hyper.ig_scale;
  Unconstrained g{};
  const double s2mu = p.sigma_mu * p.sigma_mu;
  const double s2h = p.sigma_h * p.sigma_h;

  double gm, grho, gs2;
  ar_grad({p.mu_bar, p.rho_mu, s2mu}, paths.mu, gm, grho, gs2);
  g[0] = gm - p.mu_bar / hyper.loc_var;
  g[1] = grho * p.rho_mu * (1.0 - p.rho_mu) + (1.0 - 2.0 * p.rho_mu);
  g[2] = (gs2 - (a + 1.0) / s2mu + b / (s2mu * s2mu)) * s2mu + 1.0;

  // Measurement term couples only to the latent states, not to theta.
  ar_grad({p.h_bar, p.rho_h, s2h}, paths.h, gm, grho, gs2);
  g[3] = gm - p.h_bar / hyper.loc_var;
  g[4] = grho * p.rho_h * (1.0 - p.rho_h) + (1.0 - 2.0 * p.rho_h);
  g[5] = (gs2 - (a + 1.0) / s2h + b / (s2h * s2h)) * s2h + 1.0;
  return g;
}

void complete_data_grad_states(const Params& p, const LatentPaths& paths,
                               const std::vector<double>& y,
                               std::vector<double>& grad_mu,
                               std::vector<double>& grad_h) {
  validate(p);
  const int T = static_cast<int>(y.size());
  grad_mu.assign(T, 0.0);
  grad_h.assign(T, 0.0);
  const double s2mu = p.sigma_mu * p.sigma_mu;
  const double s2h = p.sigma_h * p.sigma_h;

  auto chain_grad = [T](const std::vector<double>& x, double m, double rho,
                        double s2, std::vector<double>& g) {
    std::vector<double> e(T, 0.0);
    for (int t = 1; t < T; ++t)
      e[t] = (x[t] - m) - rho * (x[t - 1] - m);
    g[0] += (-(1.0 - rho * rho) * (x[0] - m) + (T > 1 ? rho * e[1] : 0.0)) / s2;
    for (int t = 1; t < T; ++t)
      g[t] += (-e[t] + (t + 1 < T ? rho * e[t + 1] : 0.0)) / s2;
  };
  chain_grad(paths.mu, p.mu_bar, p.rho_mu, s2mu, grad_mu);
  chain_grad(paths.h, p.h_bar, p.rho_h, s2h, grad_h);

  for (int t = 0; t < T; ++t) {
    const double r = y[t] - paths.mu[t];
    const double w = std::exp(-paths.h[t]);
    grad_mu[t] += r * w;
    grad_h[t] += -0.5 + 0.5 * r * r * w;
  }
}

}  // namespace ssmvb::ucsv
