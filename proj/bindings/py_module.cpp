// Python bindings for the main operations: simulation, fitting, one-step
// predictive densities, scoring, and the closed-form analytic layer.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

#include "ssmvb/harness.hpp"
#include "ssmvb/lgssm.hpp"
#include "ssmvb/mcmc.hpp"
#include "ssmvb/predictive.hpp"
#include "ssmvb/scoring.hpp"
#include "ssmvb/ucsv.hpp"
#include "ssmvb/vb_methods.hpp"

namespace py = pybind11;
using namespace ssmvb;

namespace {

py::dict simulate_py(int dgp, int T, std::uint64_t seed) {
  const auto sim = ucsv::simulate(ucsv::dgp_preset(dgp, T, seed));
  py::dict d;
  d["y"] = sim.y;
  d["mu"] = sim.paths.mu;
  d["h"] = sim.paths.h;
  return d;
}

py::dict mcmc_fit_py(const std::vector<double>& y, int n_iter, int n_burn,
                     std::uint64_t seed) {
  mcmc::McmcConfig cfg;
  cfg.n_iter = n_iter;
  cfg.n_burn = n_burn;
  cfg.init = {0.0, 0.5, 0.3, 0.0, 0.5, 0.3};
  cfg.seed = seed;
  const auto fit = mcmc::run_mcmc(y, cfg);
  std::vector<double> theta_mean(6, 0.0);
  for (const auto& p : fit.draws) {
    theta_mean[0] += p.mu_bar;
    theta_mean[1] += p.rho_mu;
    theta_mean[2] += p.sigma_mu;
    theta_mean[3] += p.h_bar;
    theta_mean[4] += p.rho_h;
    theta_mean[5] += p.sigma_h;
  }
  for (auto& v : theta_mean) v /= fit.draws.size();
  py::dict d;
  d["theta_mean"] = theta_mean;
  d["mean_mu"] = fit.mean_mu;
  d["mean_h"] = fit.mean_h;
  d["mean_exp_half_h"] = fit.mean_exp_half_h;
  d["n_kept"] = fit.n_kept;
  d["accept_rho_mu"] = fit.accept_rho_mu;
  d["accept_rho_h"] = fit.accept_rho_h;
  return d;
}

const char* status_name(vb::SgaStatus s) {
  switch (s) {
    case vb::SgaStatus::kConverged: return "converged";
    case vb::SgaStatus::kMaxIters: return "max_iters";
    case vb::SgaStatus::kDiverged: return "diverged";
    case vb::SgaStatus::kAborted: return "aborted";
  }
  return "unknown";
}

vbm::FitResult fit_method(const std::vector<double>& y,
                          const std::string& method, int iters,
                          std::uint64_t seed) {
  vbm::VbFitConfig cfg;
  cfg.sga.max_iters = iters;
  cfg.sga.seed = seed;
  if (method == "lsnd") return vbm::fit_lsnd(y, cfg);
  if (method == "qnk") return vbm::fit_qnk(y, cfg);
  if (method == "cy") return vbm::fit_cy(y, cfg);
  throw std::runtime_error("method must be lsnd, qnk or cy");
}

py::dict vb_fit_py(const std::vector<double>& y, const std::string& method,
                   int iters, std::uint64_t seed) {
  const auto fit = fit_method(y, method, iters, seed);
  py::dict d;
  d["method"] = fit.method;
  d["status"] = status_name(fit.elbo_trace.status);
  d["n_iters"] = fit.n_iters;
  if (fit.q_theta.p > 0) {
    d["theta_mean_unconstrained"] = fit.q_theta.mean;
    ucsv::Unconstrained eta;
    for (int i = 0; i < 6; ++i) eta[i] = fit.q_theta.mean[i];
    const auto back = ucsv::from_unconstrained(eta);
    d["theta_mean"] = std::vector<double>{back.params.mu_bar, back.params.rho_mu,
                                          back.params.sigma_mu, back.params.h_bar,
                                          back.params.rho_h, back.params.sigma_h};
  }
  if (!fit.elbo_trace.window_means.empty())
    d["final_window_elbo"] = fit.elbo_trace.window_means.back();
  if (fit.q_cy && !fit.q_cy->sweep_elbo.empty())
    d["sweep_elbo"] = fit.q_cy->sweep_elbo;
  return d;
}

py::dict fit_predict_py(const std::vector<double>& y, const std::string& method,
                        int iters, int J, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 2, 0));
  pred::PredictiveDensity pd;
  if (method == "exact") {
    mcmc::McmcConfig cfg;
    cfg.n_iter = iters;
    cfg.n_burn = iters / 4;
    cfg.init = {0.0, 0.5, 0.3, 0.0, 0.5, 0.3};
    cfg.seed = derive_seed(seed, 1, 0);
    const auto fit = mcmc::run_mcmc(y, cfg);
    pred::SimChain chain;
    pd = pred::predict_sim(fit.draws, y, J, chain, rng);
  } else {
    const auto fit = fit_method(y, method, iters, derive_seed(seed, 1, 0));
    if (method == "lsnd") {
      pred::SimChain chain;
      pd = pred::predict_sim(fit.q_theta, y, J, chain, rng);
    } else {
      pd = pred::predict_approx(fit, J, rng);
    }
  }
  py::dict d;
  d["mean"] = pd.mean;
  d["sd"] = pd.sd;
  return d;
}

py::dict score_py(const std::vector<double>& mean, const std::vector<double>& sd,
                  double y_obs, const std::vector<double>& window) {
  pred::PredictiveDensity pd;
  pd.mean = mean;
  pd.sd = sd;
  const auto r = score::score_all(pd, y_obs, window, "py", 0);
  py::dict d;
  d["ls"] = r.ls;
  d["cs10"] = r.cs10;
  d["cs20"] = r.cs20;
  d["cs80"] = r.cs80;
  d["cs90"] = r.cs90;
  d["crps"] = r.crps;
  d["twcrps"] = r.twcrps;
  d["is"] = r.is;
  return d;
}

py::dict find_theta_star_py(double grid_step) {
  const auto star = lgssm::find_theta_star({}, grid_step);
  py::dict d;
  d["rho"] = star.params.rho;
  d["alpha"] = star.params.alpha;
  d["value"] = star.value;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ssmvb, m) {
  m.doc() = "state-space variational inference experiments";
  m.attr("__version__") = harness::kVersion;

  m.def("simulate", &simulate_py, py::arg("dgp"), py::arg("T"), py::arg("seed"),
        "Simulate one path from preset 1, 2 or 3; returns y, mu, h.");
  m.def("mcmc_fit", &mcmc_fit_py, py::arg("y"), py::arg("n_iter") = 15000,
        py::arg("n_burn") = 5000, py::arg("seed") = 1,
        "Exact Gibbs fit; returns parameter and state posterior means.");
  m.def("vb_fit", &vb_fit_py, py::arg("y"), py::arg("method"),
        py::arg("iters") = 10000, py::arg("seed") = 1,
        "Variational fit (lsnd, qnk or cy); returns a summary dict.");
  m.def("fit_predict", &fit_predict_py, py::arg("y"), py::arg("method"),
        py::arg("iters") = 2000, py::arg("J") = 500, py::arg("seed") = 1,
        "Fit then build the one-step-ahead predictive mixture.");
  m.def("score", &score_py, py::arg("mean"), py::arg("sd"), py::arg("y_obs"),
        py::arg("window"),
        "All eight scores of a Gaussian-mixture predictive.");

  m.def("optimal_lambda",
        [](double rho, double alpha) {
          return lgssm::optimal_lambda({rho, alpha, 1.0});
        },
        py::arg("rho"), py::arg("alpha"));
  m.def("limit_criterion",
        [](double rho, double alpha, double lambda) {
          return lgssm::limit_criterion({rho, alpha, 1.0}, lambda);
        },
        py::arg("rho"), py::arg("alpha"), py::arg("lambda"));
  m.def("find_theta_star", &find_theta_star_py, py::arg("grid_step") = 0.005);
  m.def("tridiag_det", &lgssm::tridiag_det, py::arg("a"), py::arg("b"),
        py::arg("c"), py::arg("n"));
  m.def("jensen_case1_limit", &lgssm::jensen_case1_limit, py::arg("alpha0"));
  m.def("jensen_case2_limit", &lgssm::jensen_case2_limit, py::arg("rho0"));
}
