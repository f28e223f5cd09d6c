#pragma once

// Seeded multi-trial experiments over the solvers, with CSV/JSON output.
//
// Config files are JSON; see configs/ and the README for the schema.
// Trial k of an experiment uses seed derive_seed(base_seed, k) for every
// solver, so solvers are compared on identical instances.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "jsr/amp.hpp"
#include "jsr/metrics.hpp"
#include "jsr/model.hpp"
#include "jsr/rbp.hpp"

namespace jsr {

enum class SolverKind { kRbpEdgeDependent, kRbpEdgeIndependent, kAmp, kAmpFast };

std::string_view solver_name(SolverKind kind);
std::optional<SolverKind> parse_solver(std::string_view name);

/// Invalid or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ShrinkageSpec {
  double c = 0.1;
  double epsilon = 0.1;
  std::vector<int> snapshots{1, 3, 10, 100};
  double lo = 0.0;
  double hi = 0.6;
  double step = 0.005;
};

struct SeOverlaySpec {
  int iterations = 10;
  SolverKind solver = SolverKind::kAmpFast;
};

/// Noiseless (eps, delta) sweep at fixed N; Phi density d / M is held at
/// d_fraction. A cell succeeds when the terminal NSE is below success_nse_db.
struct PhaseSpec {
  std::vector<double> epsilons;
  std::vector<double> deltas;
  int N = 500;
  int J = 1;
  double d_fraction = 0.4;
  int trials = 5;
  double success_nse_db = -50.0;
  SolverKind solver = SolverKind::kAmp;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelConfig model;
  std::vector<SolverKind> solvers;
  RbpConfig rbp;
  AmpConfig amp;
  int trials = 50;
  std::uint64_t base_seed = 0;
  std::filesystem::path outputs = "out";
  std::set<std::string> emit{"trace", "summary"};
  int workers = 0;  // 0: hardware concurrency
  /// Wall-clock columns are written as 0 unless enabled, keeping trace.csv
  /// byte-reproducible.
  bool record_timing = false;
  double support_threshold = 0.5;
  ShrinkageSpec shrinkage;
  SeOverlaySpec se_overlay;
  std::optional<PhaseSpec> phase;

  /// Throws ConfigError.
  void validate() const;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t trial_seed(std::uint64_t base_seed, int trial_index);

/// The instance of trial `trial_index`.
Instance trial_instance(const ModelConfig& model, std::uint64_t base_seed, int trial_index);

SolveResult run_solver(SolverKind kind, const Instance& inst, const PriorParams& prior,
                       const RbpConfig& rbp, const AmpConfig& amp);

struct TrialResult {
  SolverKind solver = SolverKind::kAmp;
  int trial = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double final_nse_db = 0.0;
  double initial_mse = 0.0;  // |X|_F^2 / (N J), the error of the zero estimate
  int iterations = 0;
  bool converged = false;
  SupportMetrics support;
  std::vector<IterationRecord> trace;
};

/// Generates the trial instance and runs one solver on it. Solver exceptions
/// are caught and reported as a failed trial.
TrialResult run_trial(const ExperimentConfig& cfg, SolverKind solver, int trial_index);

struct SolverSummary {
  SolverKind solver = SolverKind::kAmp;
  int trials = 0;
  int failed = 0;
  double median_nse_db = 0.0;
  double q1_nse_db = 0.0;
  double q3_nse_db = 0.0;
  double mean_iterations = 0.0;
  double converged_fraction = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
};

/// Statistics over the successful trials of each solver, in trial order.
std::vector<SolverSummary> summarize(const std::vector<TrialResult>& results,
                                     const std::vector<SolverKind>& solvers);

struct SeOverlayRow {
  int iteration = 0;
  double c_predicted = 0.0;
  double mse_predicted = 0.0;
  double mse_empirical_mean = 0.0;
  double c_empirical = 0.0;  // sigma^2 + mse_empirical_mean / delta
  double relative_gap = 0.0; // |c_empirical - c_predicted| / c_predicted
};

/// Joins a scalar SE trace (c(1), ...) with per-iteration empirical MSE of
/// mu(1), mu(2), ... (mu(1) = 0). Truncates to the shorter input.
std::vector<SeOverlayRow> se_overlay(const std::vector<double>& c_predicted,
                                     const std::vector<double>& mse_empirical, double sigma2,
                                     double delta);

/// Mean MSE of mu(i) across trials of one solver, truncated to the shortest trace.
std::vector<double> empirical_mse_trace(const std::vector<TrialResult>& results, SolverKind solver);

struct PhaseCell {
  double epsilon = 0.0;
  double delta = 0.0;
  int trials = 0;
  int successes = 0;
  int failed = 0;
  double median_nse_db = 0.0;
};

std::vector<PhaseCell> run_phase_sweep(const PhaseSpec& spec, const AmpConfig& amp,
                                       const RbpConfig& rbp, std::uint64_t base_seed,
                                       int workers);

struct ExperimentReport {
  std::vector<TrialResult> results;  // solver-major, then trial order
  std::vector<SolverSummary> summaries;
  std::vector<SeOverlayRow> overlay;
  std::vector<PhaseCell> phase;
  int failed_trials = 0;
};

/// Runs every (solver, trial) cell on up to cfg.workers threads, then writes
/// the requested artifacts into cfg.outputs.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Runs `count` independent tasks on up to `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& task);

void write_trace_csv(std::ostream& out, const std::string& experiment_id,
                     const std::vector<TrialResult>& results, bool record_timing);
nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentReport& report);
void write_shrinkage_curve(std::ostream& out, const ShrinkageSpec& spec);
void write_se_overlay(std::ostream& out, const std::vector<SeOverlayRow>& rows);
void write_phase_csv(std::ostream& out, const std::vector<PhaseCell>& cells);

/// Median and quartiles (linear interpolation between order statistics).
double quantile(std::vector<double> values, double q);

}  // namespace jsr
