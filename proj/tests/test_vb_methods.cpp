#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ssmvb/mcmc.hpp"
#include "ssmvb/rng.hpp"
#include "ssmvb/stats.hpp"
#include "ssmvb/tridiag.hpp"
#include "ssmvb/ucsv.hpp"
#include "ssmvb/vb_methods.hpp"

using namespace ssmvb;

namespace {

vbm::JointStateVariational random_joint(int nx, Rng& rng) {
  auto q = vbm::JointStateVariational::make(nx, 1.0);
  for (int i = 0; i < nx; ++i) {
    q.state_mean[i] = rng.normal(0.0, 1.0);
    q.diag[i] = rng.uniform(0.3, 1.4);
  }
  for (auto& v : q.sub1) v = rng.normal(0.0, 0.3);
  for (auto& v : q.sub2) v = rng.normal(0.0, 0.3);
  for (auto& v : q.sub3) v = rng.normal(0.0, 0.3);
  return q;
}

Eigen::MatrixXd dense_chol(const vbm::JointStateVariational& q) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(q.nx, q.nx);
  for (int i = 0; i < q.nx; ++i) {
    c(i, i) = q.diag[i];
    if (i + 1 < q.nx) c(i + 1, i) = q.sub1[i];
    if (i + 2 < q.nx) c(i + 2, i) = q.sub2[i];
    if (i + 3 < q.nx) c(i + 3, i) = q.sub3[i];
  }
  return c;
}

}  // namespace

TEST_CASE("banded cholesky family agrees with dense linear algebra") {
  Rng rng(3);
  for (int rep = 0; rep < 12; ++rep) {
    const int nx = 4 + static_cast<int>(rng.uniform() * 60);
    const auto q = random_joint(nx, rng);
    const Eigen::MatrixXd c = dense_chol(q);

    vb::Vec xi(nx), out;
    for (auto& v : xi) v = rng.normal(0.0, 1.0);
    q.multiply(xi, out);
    Eigen::VectorXd xe(nx);
    for (int i = 0; i < nx; ++i) xe(i) = xi[i];
    const Eigen::VectorXd want = c * xe;
    for (int i = 0; i < nx; ++i)
      CHECK(out[i] == doctest::Approx(want(i)).epsilon(1e-12));

    const auto z = q.solve_lower(out);
    for (int i = 0; i < nx; ++i)
      CHECK(z[i] == doctest::Approx(xi[i]).epsilon(1e-8));

    const Eigen::MatrixXd cov = c * c.transpose();
    double want_logdet = 0.0;
    for (int i = 0; i < nx; ++i) want_logdet += 2.0 * std::log(c(i, i));
    CHECK(q.logdet_cov() == doctest::Approx(want_logdet).epsilon(1e-10));
    const double want_h =
        0.5 * nx * (std::log(2.0 * M_PI) + 1.0) + 0.5 * want_logdet;
    CHECK(q.entropy() == doctest::Approx(want_h).epsilon(1e-10));
    for (int i = 0; i < nx; ++i)
      CHECK(q.marginal_var(i) == doctest::Approx(cov(i, i)).epsilon(1e-10));
  }
}

TEST_CASE("banded flat packing round-trips") {
  Rng rng(5);
  const auto q = random_joint(17, rng);
  vb::Vec lambda(q.lambda_size() + 4, 0.0);
  q.pack_into(lambda, 4);
  auto r = vbm::JointStateVariational::make(17, 1.0);
  r.unpack_from(lambda, 4);
  CHECK(r.state_mean == q.state_mean);
  CHECK(r.diag == q.diag);
  CHECK(r.sub1 == q.sub1);
  CHECK(r.sub2 == q.sub2);
  CHECK(r.sub3 == q.sub3);
  CHECK_THROWS(vbm::JointStateVariational::make(3, 1.0));
}

TEST_CASE("banded pathwise gradient is the per-sample derivative") {
  Rng rng(7);
  const int nx = 9;
  const auto q = random_joint(nx, rng);
  vb::Vec lambda(q.lambda_size(), 0.0);
  q.pack_into(lambda, 0);

  vb::Vec g_x(nx), xi(nx);
  for (auto& v : g_x) v = rng.normal(0.0, 1.0);
  for (auto& v : xi) v = rng.normal(0.0, 1.0);

  // f(lambda) = g_x' (mean + C xi) + entropy(lambda), matching the
  // reparameterized one-sample objective at frozen xi and linear g.
  const auto value_at = [&](const vb::Vec& lam) {
    auto qq = vbm::JointStateVariational::make(nx, 1.0);
    qq.unpack_from(lam, 0);
    vb::Vec x;
    qq.multiply(xi, x);
    double f = qq.entropy();
    for (int i = 0; i < nx; ++i) f += g_x[i] * (x[i] + qq.state_mean[i]);
    return f;
  };

  vb::Vec grad(lambda.size(), 0.0);
  q.add_grads(g_x, xi, grad, 0);
  const double h = 1e-6;
  for (size_t i = 0; i < lambda.size(); ++i) {
    auto lo = lambda, hi = lambda;
    lo[i] -= h;
    hi[i] += h;
    const double fd = (value_at(hi) - value_at(lo)) / (2.0 * h);
    CHECK(grad[i] == doctest::Approx(fd).epsilon(5e-5).scale(1.0));
  }
}

TEST_CASE("sampled states reconstruct from the returned standard normals") {
  Rng rng(12);
  const auto q = random_joint(11, rng);
  vb::Vec x, xi, rebuilt;
  for (int rep = 0; rep < 20; ++rep) {
    q.sample(rng, x, xi);
    q.multiply(xi, rebuilt);
    for (int i = 0; i < q.nx; ++i)
      CHECK(x[i] == rebuilt[i] + q.state_mean[i]);
  }
}

TEST_CASE("volatility coordinate ascent is monotone on all three presets") {
  for (int dgp : {1, 2, 3}) {
    const auto sim = ucsv::simulate(ucsv::dgp_preset(dgp, 300, 100 + dgp));
    vbm::VbFitConfig cfg;
    cfg.cy_max_sweeps = 200;
    const auto fit = vbm::fit_cy(sim.y, cfg);
    REQUIRE(fit.method == "cy");
    REQUIRE(fit.q_cy.has_value());
    const auto& tr = fit.q_cy->sweep_elbo;
    REQUIRE(tr.size() >= 2);
    for (size_t i = 1; i < tr.size(); ++i)
      CHECK(tr[i] >= tr[i - 1] - 1e-8);
    CHECK(fit.elbo_trace.noisy == tr);
    for (double v : fit.q_cy->h_var_diag) CHECK(v > 0.0);
  }
}

TEST_CASE("volatility coordinate ascent bound matches a monte carlo oracle") {
  // Reassemble E_q[log p - log q] by brute force: draw (sigma2, h0, h) from
  // the fitted blocks and average the exact complete model density minus the
  // variational density. Every analytic term of the bound is exercised.
  const auto sim = ucsv::simulate(ucsv::dgp_preset(2, 35, 77));
  vbm::VbFitConfig cfg;
  const auto fit = vbm::fit_cy(sim.y, cfg);
  const auto& q = *fit.q_cy;
  const int n = 35;
  const double bound = q.sweep_elbo.back();

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = q.h_precision.diag[i];
    if (i + 1 < n) K(i, i + 1) = K(i + 1, i) = q.h_precision.off[i];
  }
  const Eigen::MatrixXd cov = K.inverse();
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::MatrixXd L = llt.matrixL();
  double cov_logdet = 0.0;
  for (int i = 0; i < n; ++i) cov_logdet += 2.0 * std::log(L(i, i));

  const auto ig_logpdf = [](double x, double shape, double scale) {
    return shape * std::log(scale) - std::lgamma(shape) -
           (shape + 1.0) * std::log(x) - scale / x;
  };

  const ucsv::PriorHyper& hy = cfg.hyper;
  Rng rng(2025);
  double sum = 0.0, sum2 = 0.0;
  const int n_draws = 60000;
  Eigen::VectorXd zvec(n), hvec(n);
  for (int d = 0; d < n_draws; ++d) {
    const double s2 = rng.inv_gamma(q.ig_shape, q.ig_scale);
    const double h0 = rng.normal(q.h0_mean, std::sqrt(q.h0_var));
    for (int i = 0; i < n; ++i) zvec(i) = rng.normal();
    hvec = L * zvec;
    for (int i = 0; i < n; ++i) hvec(i) += q.h_mean[i];

    double logp = ig_logpdf(s2, hy.ig_shape, hy.ig_scale) +
                  norm_logpdf(h0, 0.0, std::sqrt(hy.loc_var));
    double prev = h0;
    for (int t = 0; t < n; ++t) {
      logp += norm_logpdf(hvec(t), prev, std::sqrt(s2));
      logp += norm_logpdf(sim.y[t], 0.0, std::exp(0.5 * hvec(t)));
      prev = hvec(t);
    }
    double logq = ig_logpdf(s2, q.ig_shape, q.ig_scale) +
                  norm_logpdf(h0, q.h0_mean, std::sqrt(q.h0_var));
    logq += -0.5 * (n * std::log(2.0 * M_PI) + cov_logdet + zvec.squaredNorm());
    const double e = logp - logq;
    sum += e;
    sum2 += e * e;
  }
  const double mc = sum / n_draws;
  const double se =
      std::sqrt((sum2 / n_draws - mc * mc) / n_draws);
  CHECK(std::abs(mc - bound) < 4.0 * se);
}

TEST_CASE("volatility fit warm start continues a longer series monotonically") {
  const auto sim = ucsv::simulate(ucsv::dgp_preset(2, 320, 9));
  const std::vector<double> head(sim.y.begin(), sim.y.begin() + 250);
  vbm::VbFitConfig cfg;
  const auto base = vbm::fit_cy(head, cfg);

  vbm::VbFitConfig topup = cfg;
  topup.cy_max_sweeps = 40;
  const auto cont = vbm::fit_cy(sim.y, topup, &base);
  REQUIRE(cont.q_cy.has_value());
  CHECK(static_cast<int>(cont.q_cy->h_mean.size()) == 320);
  const auto& tr = cont.q_cy->sweep_elbo;
  for (size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] >= tr[i - 1] - 1e-8);
}

TEST_CASE("joint family fit improves the bound and keeps the factor valid") {
  const auto sim = ucsv::simulate(ucsv::dgp_preset(3, 60, 21));
  vbm::VbFitConfig cfg;
  cfg.sga.max_iters = 1500;
  cfg.sga.window = 150;
  cfg.sga.seed = 5;
  const auto fit = vbm::fit_qnk(sim.y, cfg);
  REQUIRE(fit.method == "qnk");
  REQUIRE(fit.q_states.has_value());
  CHECK(fit.q_states->nx == 120);
  CHECK(fit.elbo_trace.status != vb::SgaStatus::kDiverged);
  CHECK(fit.elbo_trace.status != vb::SgaStatus::kAborted);
  for (double d : fit.q_states->diag) CHECK(d > 0.0);
  const auto& wm = fit.elbo_trace.window_means;
  REQUIRE(wm.size() >= 2);
  CHECK(*std::max_element(wm.begin(), wm.end()) > wm.front());

  // Warm refit on a longer series keeps running and widens the state block.
  vbm::VbFitConfig topup = cfg;
  topup.sga.max_iters = 300;
  const auto sim2 = ucsv::simulate(ucsv::dgp_preset(3, 70, 21));
  const auto cont = vbm::fit_qnk(sim2.y, topup, &fit);
  REQUIRE(cont.q_states.has_value());
  CHECK(cont.q_states->nx == 140);
  for (double d : cont.q_states->diag) CHECK(d > 0.0);
}

TEST_CASE("parameter-only fit is deterministic and lands near the posterior") {
  const auto sim = ucsv::simulate(ucsv::dgp_preset(1, 150, 33));
  vbm::VbFitConfig cfg;
  // Wide windows keep the plateau noise from faking a sustained descent.
  cfg.sga.max_iters = 1000;
  cfg.sga.window = 200;
  cfg.sga.mc_samples = 2;
  cfg.sga.learning_rate = 0.01;
  cfg.sga.seed = 11;
  const auto a = vbm::fit_lsnd(sim.y, cfg);
  const auto b = vbm::fit_lsnd(sim.y, cfg);
  REQUIRE(a.method == "lsnd");
  CHECK(a.q_theta.mean == b.q_theta.mean);
  CHECK(a.elbo_trace.noisy == b.elbo_trace.noisy);
  CHECK(a.elbo_trace.status != vb::SgaStatus::kDiverged);
  CHECK(a.elbo_trace.status != vb::SgaStatus::kAborted);
  for (double v : a.q_theta.mean) CHECK(std::isfinite(v));

  // The variational mean should map to an interior, finite parameter point.
  ucsv::Unconstrained eta;
  for (int i = 0; i < 6; ++i) eta[i] = a.q_theta.mean[i];
  const ucsv::Params p = ucsv::from_unconstrained(eta).params;
  CHECK(p.rho_mu > 0.0);
  CHECK(p.rho_mu < 1.0);
  CHECK(p.rho_h > 0.0);
  CHECK(p.rho_h < 1.0);
  CHECK(p.sigma_mu > 0.0);
  CHECK(p.sigma_h > 0.0);

  // Warm continuation on more data runs from the fitted factor.
  const auto sim2 = ucsv::simulate(ucsv::dgp_preset(1, 170, 33));
  vbm::VbFitConfig topup = cfg;
  topup.sga.max_iters = 200;
  const auto cont = vbm::fit_lsnd(sim2.y, topup, &a);
  CHECK(cont.q_theta.mean.size() == a.q_theta.mean.size());
}

TEST_CASE("joint family state summaries match the lognormal moment formula") {
  const auto sim = ucsv::simulate(ucsv::dgp_preset(2, 40, 55));
  vbm::VbFitConfig cfg;
  cfg.sga.max_iters = 600;
  cfg.sga.window = 100;
  cfg.sga.seed = 3;
  const auto fit = vbm::fit_qnk(sim.y, cfg);
  const auto sm = state_marginals(fit, sim.y, 0, 1);
  REQUIRE(sm.mu_mean.size() == 40);
  const auto& q = *fit.q_states;
  for (int t = 0; t < 40; ++t) {
    CHECK(sm.mu_mean[t] == q.state_mean[2 * t]);
    CHECK(sm.h_mean[t] == q.state_mean[2 * t + 1]);
    const double v = q.marginal_var(2 * t + 1);
    const double want = std::exp(0.5 * q.state_mean[2 * t + 1] + 0.125 * v);
    CHECK(sm.exp_half_h_mean[t] == doctest::Approx(want).epsilon(1e-12));
  }

  // Monte carlo cross-check of the lognormal formula from the fitted factor.
  Rng rng(99);
  vb::Vec x, xi;
  std::vector<double> acc(40, 0.0);
  const int n_draws = 40000;
  for (int d = 0; d < n_draws; ++d) {
    q.sample(rng, x, xi);
    for (int t = 0; t < 40; ++t) acc[t] += std::exp(0.5 * x[2 * t + 1]);
  }
  for (int t = 0; t < 40; ++t)
    CHECK(acc[t] / n_draws ==
          doctest::Approx(sm.exp_half_h_mean[t]).epsilon(0.05));
}

TEST_CASE("volatility model state summaries expose the path blocks") {
  const auto sim = ucsv::simulate(ucsv::dgp_preset(2, 60, 4));
  vbm::VbFitConfig cfg;
  const auto fit = vbm::fit_cy(sim.y, cfg);
  const auto sm = state_marginals(fit, sim.y, 0, 1);
  const auto& q = *fit.q_cy;
  REQUIRE(sm.h_mean.size() == 60);
  for (int t = 0; t < 60; ++t) {
    CHECK(sm.mu_mean[t] == 0.0);
    CHECK(sm.h_mean[t] == q.h_mean[t]);
    const double want =
        std::exp(0.5 * q.h_mean[t] + 0.125 * q.h_var_diag[t]);
    CHECK(sm.exp_half_h_mean[t] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("parameter-only summaries average exact conditional draws") {
  // With q_theta pinned (tiny spread) the summaries must approach the exact
  // smoothed states at that theta, which the Gibbs machinery provides.
  const auto sim = ucsv::simulate(ucsv::dgp_preset(1, 120, 17));
  vbm::FitResult fit;
  fit.method = "lsnd";
  const ucsv::Params theta{0.1, 0.7, 0.4, -1.2, 0.3, 0.1};
  fit.q_theta = vb::GaussianFactorVariational::make(6, 1, 1e-7);
  const auto eta = ucsv::to_unconstrained(theta);
  for (int i = 0; i < 6; ++i) fit.q_theta.mean[i] = eta[i];
  for (auto& v : fit.q_theta.factors) v = 0.0;

  const auto sm = state_marginals(fit, sim.y, 6000, 31);
  REQUIRE(sm.mu_mean.size() == 120);

  mcmc::McmcConfig mc;
  mc.n_iter = 6500;
  mc.n_burn = 500;
  mc.seed = 77;
  mc.fix_theta = true;
  mc.init = theta;
  const auto run = mcmc::run_mcmc(sim.y, mc);

  double err_mu = 0.0, err_vol = 0.0;
  for (int t = 0; t < 120; ++t) {
    const double dm = sm.mu_mean[t] - run.mean_mu[t];
    const double dv = sm.exp_half_h_mean[t] - run.mean_exp_half_h[t];
    err_mu += dm * dm;
    err_vol += dv * dv;
  }
  CHECK(std::sqrt(err_mu / 120.0) < 0.06);
  CHECK(std::sqrt(err_vol / 120.0) < 0.06);
}
