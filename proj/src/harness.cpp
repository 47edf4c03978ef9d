#include "ssmvb/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ssmvb/mcmc.hpp"
#include "ssmvb/predictive.hpp"
#include "ssmvb/vb_methods.hpp"

namespace ssmvb::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int parse_int(const std::string& v) { return std::stoi(v); }
double parse_double(const std::string& v) { return std::stod(v); }
std::uint64_t parse_u64(const std::string& v) { return std::stoull(v); }

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw std::runtime_error("bad boolean value: " + v);
}

// Output ordering of methods in reports (reference row first).
int method_rank(const std::string& m) {
  if (m == "true_dgp") return 0;
  if (m == "exact") return 1;
  if (m == "lsnd") return 2;
  if (m == "cy") return 3;
  if (m == "qnk") return 4;
  return 5;
}

void ensure_parent_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void extend_paths(ucsv::LatentPaths& paths, int n) {
  if (paths.mu.empty() || paths.h.empty())
    throw std::runtime_error("cannot extend empty latent paths");
  paths.mu.resize(n, paths.mu.back());
  paths.h.resize(n, paths.h.back());
}

struct Accumulator {
  score::ScoreRecord sum;
  int n = 0;

  void add(const score::ScoreRecord& r) {
    sum.ls += r.ls;
    sum.cs10 += r.cs10;
    sum.cs20 += r.cs20;
    sum.cs80 += r.cs80;
    sum.cs90 += r.cs90;
    sum.crps += r.crps;
    sum.twcrps += r.twcrps;
    sum.is += r.is;
    ++n;
  }
  score::ScoreRecord mean() const {
    score::ScoreRecord m = sum;
    m.ls /= n;
    m.cs10 /= n;
    m.cs20 /= n;
    m.cs80 /= n;
    m.cs90 /= n;
    m.crps /= n;
    m.twcrps /= n;
    m.is /= n;
    return m;
  }
};

std::vector<MethodAverage> averages_in_order(
    const std::vector<score::ScoreRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, Accumulator> acc;
  for (const auto& r : records) {
    if (acc.find(r.method) == acc.end()) order.push_back(r.method);
    acc[r.method].add(r);
  }
  std::vector<MethodAverage> out;
  for (const auto& m : order) {
    MethodAverage avg;
    avg.method = m;
    avg.avg = acc[m].mean();
    avg.avg.method = m;
    avg.avg.t = 0;
    avg.n = acc[m].n;
    out.push_back(std::move(avg));
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int method_id(const std::string& method) {
  if (method == "exact") return 0;
  if (method == "lsnd") return 1;
  if (method == "qnk") return 2;
  if (method == "cy") return 3;
  if (method == "true_dgp") return 4;
  throw std::runtime_error("unknown method: " + method);
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void ExperimentConfig::apply(const std::string& key, const std::string& value) {
  if (key == "dgp") dgp = parse_int(value);
  else if (key == "T") T = parse_int(value);
  else if (key == "master_seed") master_seed = parse_u64(value);
  else if (key == "methods") methods = split_csv_list(value);
  else if (key == "window_start") window_start = parse_int(value);
  else if (key == "horizon_count") horizon_count = parse_int(value);
  else if (key == "refit_every") refit_every = parse_int(value);
  else if (key == "refit_full") refit_full = parse_bool(value);
  else if (key == "output_dir") output_dir = value;
  else if (key == "J") J = parse_int(value);
  else if (key == "mcmc_iters") mcmc_iters = parse_int(value);
  else if (key == "mcmc_burn") mcmc_burn = parse_int(value);
  else if (key == "mcmc_thin") mcmc_thin = parse_int(value);
  else if (key == "sga_iters") sga_iters = parse_int(value);
  else if (key == "refit_mcmc_iters") refit_mcmc_iters = parse_int(value);
  else if (key == "refit_mcmc_burn") refit_mcmc_burn = parse_int(value);
  else if (key == "refit_sga_iters") refit_sga_iters = parse_int(value);
  else if (key == "topup_iters") topup_iters = parse_int(value);
  else if (key == "cy_topup_sweeps") cy_topup_sweeps = parse_int(value);
  else if (key == "marginal_sweeps") marginal_sweeps = parse_int(value);
  else if (key == "is_alpha") is_alpha = parse_double(value);
  else if (key == "twcrps_grid") twcrps_grid = parse_int(value);
  else if (key == "kde") kde = parse_bool(value);
  else if (key == "sim_warmup") sim_warmup = parse_int(value);
  else throw std::runtime_error("unknown config key: " + key);
}

std::string ExperimentConfig::to_key_values() const {
  std::ostringstream os;
  os << "dgp = " << dgp << "\n";
  os << "T = " << T << "\n";
  os << "master_seed = " << master_seed << "\n";
  os << "methods = ";
  for (size_t i = 0; i < methods.size(); ++i)
    os << (i ? "," : "") << methods[i];
  os << "\n";
  os << "window_start = " << window_start << "\n";
  os << "horizon_count = " << horizon_count << "\n";
  os << "refit_every = " << refit_every << "\n";
  os << "refit_full = " << (refit_full ? 1 : 0) << "\n";
  os << "output_dir = " << output_dir << "\n";
  os << "J = " << J << "\n";
  os << "mcmc_iters = " << mcmc_iters << "\n";
  os << "mcmc_burn = " << mcmc_burn << "\n";
  os << "mcmc_thin = " << mcmc_thin << "\n";
  os << "sga_iters = " << sga_iters << "\n";
  os << "refit_mcmc_iters = " << refit_mcmc_iters << "\n";
  os << "refit_mcmc_burn = " << refit_mcmc_burn << "\n";
  os << "refit_sga_iters = " << refit_sga_iters << "\n";
  os << "topup_iters = " << topup_iters << "\n";
  os << "cy_topup_sweeps = " << cy_topup_sweeps << "\n";
  os << "marginal_sweeps = " << marginal_sweeps << "\n";
  os << "is_alpha = " << format_double(is_alpha) << "\n";
  os << "twcrps_grid = " << twcrps_grid << "\n";
  os << "kde = " << (kde ? 1 : 0) << "\n";
  os << "sim_warmup = " << sim_warmup << "\n";
  return os.str();
}

void ExperimentConfig::validate() const {
  if (dgp < 1 || dgp > 3) throw std::runtime_error("dgp must be 1, 2 or 3");
  if (T < 10) throw std::runtime_error("T too small");
  if (methods.empty()) throw std::runtime_error("no methods configured");
  for (const auto& m : methods) {
    method_id(m);  // throws on unknown names
    if (m == "true_dgp")
      throw std::runtime_error(
          "true_dgp is always included and cannot be listed");
    if (std::count(methods.begin(), methods.end(), m) != 1)
      throw std::runtime_error("duplicate method: " + m);
  }
  if (J < 1) throw std::runtime_error("J must be >= 1");
  if (mcmc_burn >= mcmc_iters || refit_mcmc_burn >= refit_mcmc_iters)
    throw std::runtime_error("burn-in must be below total iterations");
  if (twcrps_grid < 3) throw std::runtime_error("twcrps_grid too small");
  if (is_alpha <= 0.0 || is_alpha >= 1.0)
    throw std::runtime_error("is_alpha must lie in (0, 1)");
}

void ExperimentConfig::validate_backtest() const {
  validate();
  if (window_start < 10) throw std::runtime_error("window_start too small");
  if (horizon_count < 1) throw std::runtime_error("horizon_count must be >= 1");
  if (window_start + horizon_count > T)
    throw std::runtime_error("window_start + horizon_count exceeds T");
  if (refit_every < 1) throw std::runtime_error("refit_every must be >= 1");
}

namespace {

// Per-(window, method) seed plus fixed sub-streams so fitting, prediction
// and marginal summaries never share a generator.
struct SeedSet {
  std::uint64_t fit, predict, marginals;
};

SeedSet seeds_for(std::uint64_t master, int window_index,
                  const std::string& method) {
  const std::uint64_t base =
      derive_seed(master, static_cast<std::uint64_t>(window_index),
                  static_cast<std::uint64_t>(method_id(method)));
  return {derive_seed(base, 1, 0), derive_seed(base, 2, 0),
          derive_seed(base, 3, 0)};
}

ucsv::Params default_init() { return {0.0, 0.5, 0.3, 0.0, 0.5, 0.3}; }

mcmc::McmcConfig mcmc_config_for(const ExperimentConfig& cfg, bool warm,
                                 std::uint64_t seed) {
  mcmc::McmcConfig mc;
  mc.n_iter = warm ? cfg.refit_mcmc_iters : cfg.mcmc_iters;
  mc.n_burn = warm ? cfg.refit_mcmc_burn : cfg.mcmc_burn;
  mc.thin = cfg.mcmc_thin;
  mc.init = default_init();
  mc.seed = seed;
  return mc;
}

vbm::VbFitConfig vb_config_for(int iters, std::uint64_t seed) {
  vbm::VbFitConfig v;
  v.sga.max_iters = iters;
  v.sga.seed = seed;
  return v;
}

vb::SgaConfig sga_stage(int iters, double lr, int mc, std::uint64_t seed) {
  vb::SgaConfig s;
  s.max_iters = std::max(1, iters);
  s.learning_rate = lr;
  s.mc_samples = mc;
  // The experiment fits always spend their full budget: the windowed stop
  // rules react to plateau noise long before the parameters settle at these
  // sample sizes, and a fixed budget keeps reruns deterministic.
  s.tol = 1e-15;
  s.max_decreasing_windows = std::numeric_limits<int>::max();
  s.seed = seed;
  return s;
}

// Cold starts anneal the step size down and the gradient batch up (the
// stationary wander of adaptive-moment steps shrinks with both); warm
// continuations go straight to the polish regime.
vbm::FitResult fit_sga_method(const std::string& m,
                              const std::vector<double>& y, int total_iters,
                              std::uint64_t seed, const vbm::FitResult* warm) {
  const auto run = [&](const vb::SgaConfig& s, const vbm::FitResult* w) {
    vbm::VbFitConfig v;
    v.sga = s;
    return m == "lsnd" ? vbm::fit_lsnd(y, v, w) : vbm::fit_qnk(y, v, w);
  };
  if (warm)
    return run(sga_stage(total_iters, 1e-3, 2, derive_seed(seed, 9, 0)), warm);
  struct Stage {
    double frac, lr;
    int mc;
  };
  const Stage plan[] = {{0.5, 1e-2, 1}, {0.25, 3e-3, 2}, {0.25, 1e-3, 4}};
  vbm::FitResult fit;
  bool have = false;
  int k = 0;
  for (const auto& st : plan) {
    const auto s =
        sga_stage(static_cast<int>(total_iters * st.frac), st.lr, st.mc,
                  derive_seed(seed, 10 + static_cast<std::uint64_t>(k), 0));
    fit = run(s, have ? &fit : nullptr);
    have = true;
    ++k;
  }
  return fit;
}

}  // namespace

AccuracyReport run_state_accuracy(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto dc = ucsv::dgp_preset(cfg.dgp, cfg.T, cfg.master_seed);
  const auto sim = ucsv::simulate(dc);

  // Reference: conditional posterior means at the generating parameters.
  const auto ref_seeds = seeds_for(cfg.master_seed, 0, "true_dgp");
  mcmc::McmcConfig ref_cfg = mcmc_config_for(cfg, false, ref_seeds.fit);
  ref_cfg.fix_theta = true;
  ref_cfg.init = dc.params;
  const auto ref = mcmc::run_mcmc(sim.y, ref_cfg);

  const auto rmse_mae = [](const std::vector<double>& est,
                           const std::vector<double>& ref_seq) {
    double se = 0.0, ae = 0.0;
    for (size_t t = 0; t < ref_seq.size(); ++t) {
      const double d = est[t] - ref_seq[t];
      se += d * d;
      ae += std::abs(d);
    }
    const double n = static_cast<double>(ref_seq.size());
    return std::pair<double, double>(std::sqrt(se / n), ae / n);
  };

  AccuracyReport report;
  for (const auto& m : cfg.methods) {
    const auto t0 = Clock::now();
    const auto seeds = seeds_for(cfg.master_seed, 0, m);
    vbm::StateSummary summary;
    if (m == "exact") {
      const auto fit = mcmc::run_mcmc(sim.y, mcmc_config_for(cfg, false,
                                                             seeds.fit));
      summary.mu_mean = fit.mean_mu;
      summary.h_mean = fit.mean_h;
      summary.exp_half_h_mean = fit.mean_exp_half_h;
    } else {
      vbm::FitResult fit;
      if (m == "cy")
        fit = vbm::fit_cy(sim.y, vb_config_for(cfg.sga_iters, seeds.fit));
      else
        fit = fit_sga_method(m, sim.y, cfg.sga_iters, seeds.fit, nullptr);
      summary =
          vbm::state_marginals(fit, sim.y, cfg.marginal_sweeps, seeds.marginals);
    }
    AccuracyRow row;
    row.method = m;
    std::tie(row.rmse_mu, row.mae_mu) = rmse_mae(summary.mu_mean, ref.mean_mu);
    std::tie(row.rmse_eh, row.mae_eh) =
        rmse_mae(summary.exp_half_h_mean, ref.mean_exp_half_h);
    report.rows.push_back(std::move(row));
    report.wall_times.emplace_back(m, seconds_since(t0));
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const AccuracyRow& a, const AccuracyRow& b) {
              return method_rank(a.method) < method_rank(b.method);
            });
  return report;
}

namespace {

// Mutable per-method state carried across the expanding windows.
struct MethodState {
  std::string name;
  mcmc::McmcResult mfit;
  bool have_mfit = false;
  vbm::FitResult vfit;
  bool have_vfit = false;
  pred::SimChain chain;
  double wall = 0.0;
  int failures = 0;
};

}  // namespace

BacktestReport run_backtest(const ExperimentConfig& cfg) {
  cfg.validate_backtest();
  const auto dc = ucsv::dgp_preset(cfg.dgp, cfg.T, cfg.master_seed);
  const auto sim = ucsv::simulate(dc);

  std::vector<MethodState> states;
  {
    MethodState td;
    td.name = "true_dgp";
    states.push_back(std::move(td));
    for (const auto& m : cfg.methods) {
      MethodState s;
      s.name = m;
      states.push_back(std::move(s));
    }
    std::sort(states.begin(), states.end(),
              [](const MethodState& a, const MethodState& b) {
                return method_rank(a.name) < method_rank(b.name);
              });
  }

  BacktestReport report;
  report.n_planned = cfg.horizon_count * static_cast<int>(states.size());
  const std::vector<ucsv::Params> theta0{dc.params};

  std::vector<double> window;
  window.reserve(cfg.window_start + cfg.horizon_count);
  for (int i = 0; i < cfg.horizon_count; ++i) {
    const int n = cfg.window_start + i;
    window.assign(sim.y.begin(), sim.y.begin() + n);
    const bool block_start = cfg.refit_full || (i % cfg.refit_every == 0);

    for (auto& st : states) {
      const auto t0 = Clock::now();
      const auto seeds = seeds_for(cfg.master_seed, i, st.name);
      try {
        if (st.name == "exact") {
          if (block_start) {
            auto mc = mcmc_config_for(cfg, st.have_mfit, seeds.fit);
            const ucsv::LatentPaths* warm = nullptr;
            ucsv::LatentPaths warm_paths;
            if (st.have_mfit) {
              mc.init = st.mfit.draws.back();
              warm_paths = st.mfit.last_paths;
              extend_paths(warm_paths, n);
              warm = &warm_paths;
            }
            st.mfit = mcmc::run_mcmc(window, mc, warm);
            st.have_mfit = true;
          }
        } else if (st.name == "lsnd") {
          if (block_start) {
            st.vfit = fit_sga_method(
                st.name, window,
                st.have_vfit ? cfg.refit_sga_iters : cfg.sga_iters, seeds.fit,
                st.have_vfit ? &st.vfit : nullptr);
            st.have_vfit = true;
          }
        } else if (st.name == "qnk") {
          const int iters =
              !st.have_vfit ? cfg.sga_iters
                            : (block_start ? cfg.refit_sga_iters
                                           : cfg.topup_iters);
          st.vfit = fit_sga_method(st.name, window, iters, seeds.fit,
                                   st.have_vfit ? &st.vfit : nullptr);
          st.have_vfit = true;
        } else if (st.name == "cy") {
          auto vcfg = vb_config_for(cfg.sga_iters, seeds.fit);
          if (st.have_vfit && !block_start)
            vcfg.cy_max_sweeps = cfg.cy_topup_sweeps;
          st.vfit =
              vbm::fit_cy(window, vcfg, st.have_vfit ? &st.vfit : nullptr);
          st.have_vfit = true;
        }

        Rng rng(seeds.predict);
        pred::PredictiveDensity pd;
        if (st.name == "true_dgp") {
          pd = pred::predict_sim(theta0, window, cfg.J, st.chain, rng,
                                 cfg.sim_warmup);
        } else if (st.name == "exact") {
          pd = pred::predict_sim(st.mfit.draws, window, cfg.J, st.chain, rng,
                                 cfg.sim_warmup);
        } else if (st.name == "lsnd") {
          pd = pred::predict_sim(st.vfit.q_theta, window, cfg.J, st.chain, rng,
                                 cfg.sim_warmup);
        } else {
          pd = pred::predict_approx(st.vfit, cfg.J, rng);
        }
        if (cfg.kde) pd = pred::to_kde(pd, rng);

        report.records.push_back(score::score_all(pd, sim.y[n], window,
                                                  st.name, n, cfg.twcrps_grid,
                                                  cfg.is_alpha));
      } catch (const std::exception& e) {
        ++st.failures;
        ++report.n_failures;
        std::cerr << "window " << n << " method " << st.name
                  << " failed: " << e.what() << "\n";
      }
      st.wall += seconds_since(t0);
    }
  }

  if (100 * report.n_failures > report.n_planned)
    throw std::runtime_error("more than 1% of windows failed (" +
                             std::to_string(report.n_failures) + " of " +
                             std::to_string(report.n_planned) + ")");

  std::sort(report.records.begin(), report.records.end(),
            [](const score::ScoreRecord& a, const score::ScoreRecord& b) {
              const int ra = method_rank(a.method), rb = method_rank(b.method);
              return ra != rb ? ra < rb : a.t < b.t;
            });
  report.averages = averages_in_order(report.records);
  for (const auto& st : states) report.wall_times.emplace_back(st.name, st.wall);
  return report;
}

BacktestReport report_from_records(std::vector<score::ScoreRecord> records) {
  BacktestReport report;
  report.records = std::move(records);
  report.averages = averages_in_order(report.records);
  return report;
}

namespace {

void write_score_fields(std::ostream& os, const score::ScoreRecord& r) {
  os << format_double(r.ls) << ',' << format_double(r.cs10) << ','
     << format_double(r.cs20) << ',' << format_double(r.cs80) << ','
     << format_double(r.cs90) << ',' << format_double(r.crps) << ','
     << format_double(r.twcrps) << ',' << format_double(r.is);
}

}  // namespace

void write_scores_csv(const BacktestReport& report, const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "method,t,ls,cs10,cs20,cs80,cs90,crps,twcrps,is\n";
  for (const auto& r : report.records) {
    os << r.method << ',' << r.t << ',';
    write_score_fields(os, r);
    os << '\n';
  }
}

void write_summary_csv(const BacktestReport& report, const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "method,n_windows,ls,cs10,cs20,cs80,cs90,crps,twcrps,is\n";
  for (const auto& a : report.averages) {
    os << a.method << ',' << a.n << ',';
    write_score_fields(os, a.avg);
    os << '\n';
  }
}

void write_accuracy_csv(const AccuracyReport& report, const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "method,rmse_mu,mae_mu,rmse_exp_half_h,mae_exp_half_h\n";
  for (const auto& r : report.rows) {
    os << r.method << ',' << format_double(r.rmse_mu) << ','
       << format_double(r.mae_mu) << ',' << format_double(r.rmse_eh) << ','
       << format_double(r.mae_eh) << '\n';
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

double parse_field(const std::string& f) {
  return std::strtod(f.c_str(), nullptr);
}

}  // namespace

std::vector<score::ScoreRecord> read_scores_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "method,t,ls,cs10,cs20,cs80,cs90,crps,twcrps,is")
    throw std::runtime_error("unexpected scores header in " + path);
  std::vector<score::ScoreRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != 10)
      throw std::runtime_error("malformed scores row in " + path);
    score::ScoreRecord r;
    r.method = f[0];
    r.t = std::stoi(f[1]);
    r.ls = parse_field(f[2]);
    r.cs10 = parse_field(f[3]);
    r.cs20 = parse_field(f[4]);
    r.cs80 = parse_field(f[5]);
    r.cs90 = parse_field(f[6]);
    r.crps = parse_field(f[7]);
    r.twcrps = parse_field(f[8]);
    r.is = parse_field(f[9]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<AccuracyRow> read_accuracy_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "method,rmse_mu,mae_mu,rmse_exp_half_h,mae_exp_half_h")
    throw std::runtime_error("unexpected accuracy header in " + path);
  std::vector<AccuracyRow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != 5)
      throw std::runtime_error("malformed accuracy row in " + path);
    AccuracyRow r;
    r.method = f[0];
    r.rmse_mu = parse_field(f[1]);
    r.mae_mu = parse_field(f[2]);
    r.rmse_eh = parse_field(f[3]);
    r.mae_eh = parse_field(f[4]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_metadata(const ExperimentConfig& cfg,
                    const std::vector<std::pair<std::string, double>>& walls,
                    int n_failures, double total_wall,
                    const std::string& path) {
  ensure_parent_dir(path);
  nlohmann::json j;
  j["version"] = kVersion;
  j["compiler"] = __VERSION__;
  j["master_seed"] = cfg.master_seed;
  j["config"] = cfg.to_key_values();
  nlohmann::json w = nlohmann::json::object();
  for (const auto& [m, s] : walls) w[m] = s;
  j["wall_time_seconds"] = w;
  j["total_wall_seconds"] = total_wall;
  j["n_failures"] = n_failures;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << j.dump(2) << "\n";
}

}  // namespace ssmvb::harness
