#pragma once

// Experiment orchestration: data generation from the three presets, the
// state-accuracy study against a fixed-parameter reference, the expanding
// window backtest over all methods, and deterministic CSV reporting.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssmvb/scoring.hpp"
#include "ssmvb/ucsv.hpp"

namespace ssmvb::harness {

inline constexpr const char* kVersion = "1.0.0";

// Every field maps to one `key = value` line in the config file and can be
// overridden per key on the command line.
struct ExperimentConfig {
  int dgp = 2;
  int T = 3000;
  std::uint64_t master_seed = 1;
  std::vector<std::string> methods = {"exact", "lsnd", "qnk", "cy"};
  int window_start = 1000;   // n0
  int horizon_count = 500;   // evaluation windows n0 .. n0+horizon-1
  int refit_every = 10;      // block length; warm-started refits
  bool refit_full = false;   // refit every window
  std::string output_dir = "out";
  int J = 2000;              // predictive mixture components
  int mcmc_iters = 15000;
  int mcmc_burn = 5000;
  int mcmc_thin = 1;
  int sga_iters = 10000;
  int refit_mcmc_iters = 4000;  // warm-started block refits
  int refit_mcmc_burn = 1000;
  int refit_sga_iters = 2000;
  int topup_iters = 300;     // within-block continuation for the joint fit
  int cy_topup_sweeps = 20;
  int marginal_sweeps = 1000;
  double is_alpha = 0.05;
  int twcrps_grid = 2001;
  bool kde = false;          // kernel-density audit mode for predictives
  int sim_warmup = 50;

  static ExperimentConfig from_file(const std::string& path);
  // Applies one `key = value` override; unknown keys throw.
  void apply(const std::string& key, const std::string& value);
  // Echo of all keys in file format, for the metadata sidecar.
  std::string to_key_values() const;
  void validate() const;           // fields every run needs
  void validate_backtest() const;  // adds the window-schedule checks
};

// Stable method identifiers used in seed derivation.
// exact=0, lsnd=1, qnk=2, cy=3, true_dgp=4.
int method_id(const std::string& method);

struct AccuracyRow {
  std::string method;
  double rmse_mu = 0.0, mae_mu = 0.0;
  double rmse_eh = 0.0, mae_eh = 0.0;  // exp(h/2) scale
};

struct AccuracyReport {
  std::vector<AccuracyRow> rows;
  std::vector<std::pair<std::string, double>> wall_times;
};

struct MethodAverage {
  std::string method;
  score::ScoreRecord avg;  // t unused
  int n = 0;
};

struct BacktestReport {
  std::vector<score::ScoreRecord> records;  // ordered (method rank, t)
  std::vector<MethodAverage> averages;
  int n_failures = 0;
  int n_planned = 0;
  std::vector<std::pair<std::string, double>> wall_times;
};

// Full-sample fits for the configured methods, compared to the fixed-theta0
// conditional posterior means (the reference sequences).
AccuracyReport run_state_accuracy(const ExperimentConfig& cfg);

// Expanding-window one-step-ahead exercise. The fixed-theta0 predictive row
// ("true_dgp") is always included. A window failure is logged and skipped;
// more than 1% failures aborts the run.
BacktestReport run_backtest(const ExperimentConfig& cfg);

// Recompute averages from records (used by the report reader round trip).
BacktestReport report_from_records(std::vector<score::ScoreRecord> records);

// Deterministic CSV writers; doubles serialized with 17 significant digits
// so parse(write(x)) is bit-exact.
void write_scores_csv(const BacktestReport& report, const std::string& path);
void write_summary_csv(const BacktestReport& report, const std::string& path);
void write_accuracy_csv(const AccuracyReport& report, const std::string& path);
std::vector<score::ScoreRecord> read_scores_csv(const std::string& path);
std::vector<AccuracyRow> read_accuracy_csv(const std::string& path);

// Run-metadata sidecar (JSON): seeds, config echo, version, wall times.
// Wall times live here and never in the CSVs, which stay byte-deterministic.
void write_metadata(const ExperimentConfig& cfg,
                    const std::vector<std::pair<std::string, double>>& walls,
                    int n_failures, double total_wall,
                    const std::string& path);

std::string format_double(double v);  // %.17g, locale-independent

}  // namespace ssmvb::harness
