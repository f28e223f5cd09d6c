// jsr: command-line driver for the joint sparse recovery solvers.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure,
// 3 finished with failed trials.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "jsr/csv.hpp"
#include "jsr/experiment.hpp"
#include "jsr/instance_io.hpp"
#include "jsr/se.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitFailedTrials = 3;

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(jsr::parse_integer(item)));
  if (out.empty()) throw jsr::ConfigError("empty J list");
  return out;
}

void parse_grid(const std::string& text, jsr::ShrinkageSpec& spec) {
  const auto parts = [&] {
    std::vector<std::string> p;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) p.push_back(item);
    return p;
  }();
  if (parts.size() != 3) throw jsr::ConfigError("--grid expects LO:HI:STEP");
  spec.lo = jsr::parse_double(parts[0]);
  spec.hi = jsr::parse_double(parts[1]);
  spec.step = jsr::parse_double(parts[2]);
  if (!(spec.step > 0.0) || !(spec.hi >= spec.lo)) throw jsr::ConfigError("--grid needs STEP > 0 and HI >= LO");
}

// Writes to `path`, or stdout when empty.
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  fn(f);
}

void print_summary(const jsr::ExperimentConfig& cfg, const jsr::ExperimentReport& report) {
  std::printf("%-22s %7s %7s %12s %20s %10s %9s %9s\n", "solver", "trials", "failed", "median NSE",
              "IQR", "mean iter", "precision", "recall");
  for (const auto& s : report.summaries) {
    std::printf("%-22s %7d %7d %9.3f dB   [%7.3f, %7.3f] %10.1f %9.3f %9.3f\n",
                std::string(jsr::solver_name(s.solver)).c_str(), s.trials, s.failed, s.median_nse_db,
                s.q1_nse_db, s.q3_nse_db, s.mean_iterations, s.mean_precision, s.mean_recall);
  }
  if (!report.phase.empty()) {
    std::printf("phase sweep: %zu cells written to %s\n", report.phase.size(),
                (cfg.outputs / "phase.csv").string().c_str());
  }
  std::printf("outputs: %s\n", cfg.outputs.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint sparse recovery: relaxed BP, AMP and state evolution"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int trials = 0;
  int workers = -1;
  std::vector<std::string> solver_names;
  bool record_timing = false;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("config", config_path, "Config file")->required();
  auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides config)");
  auto* seed_opt = run->add_option("--seed", seed, "Base seed (overrides config)");
  auto* trials_opt = run->add_option("--trials", trials, "Trial count (overrides config)")->check(CLI::PositiveNumber);
  run->add_option("--solver", solver_names, "Solver to run; repeat for several (overrides config)");
  auto* workers_opt = run->add_option("--workers", workers, "Worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  run->add_flag("--record-timing", record_timing, "Write wall-clock times into trace.csv");

  double sh_c = 0.1;
  double sh_eps = 0.1;
  std::string sh_js = "1,3,10,100";
  std::string sh_grid = "0:0.6:0.005";
  std::string sh_out;
  auto* shrink = app.add_subcommand("shrinkage", "Tabulate the support weight t against |theta|^2/J");
  shrink->add_option("--c", sh_c, "Effective noise level c");
  shrink->add_option("--eps", sh_eps, "Support probability");
  shrink->add_option("--j", sh_js, "Comma-separated snapshot counts");
  shrink->add_option("--grid", sh_grid, "LO:HI:STEP grid on |theta|^2/J");
  shrink->add_option("--out", sh_out, "Output CSV (default stdout)");

  double se_eps = 0.1;
  double se_delta = 0.5;
  double se_sigma2 = 0.0;
  int se_iters = 20;
  double se_c1 = -1.0;
  std::string se_out;
  auto* se = app.add_subcommand("se", "Scalar state evolution trace c(1), c(2), ...");
  se->add_option("--eps", se_eps, "Support probability")->required();
  se->add_option("--delta", se_delta, "Undersampling ratio M/N")->required();
  se->add_option("--sigma2", se_sigma2, "Noise variance")->required();
  se->add_option("--iters", se_iters, "Number of iterations")->required()->check(CLI::PositiveNumber);
  se->add_option("--c1", se_c1, "Initial value (default sigma2 + eps/delta)");
  se->add_option("--out", se_out, "Output CSV (default stdout)");

  std::string dump_config;
  std::string dump_out = "instance";
  int dump_trial = 0;
  auto* dump = app.add_subcommand("dump-instance", "Write one trial instance as COO/CSV files");
  dump->add_option("config", dump_config, "Config file")->required();
  dump->add_option("--out", dump_out, "Output directory");
  dump->add_option("--trial", dump_trial, "Trial index")->check(CLI::NonNegativeNumber);
  auto* dump_seed_opt = dump->add_option("--seed", seed, "Base seed (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      jsr::ExperimentConfig cfg = jsr::load_config(config_path);
      if (*out_opt) cfg.outputs = out_dir;
      if (*seed_opt) cfg.base_seed = seed;
      if (*trials_opt) cfg.trials = trials;
      if (*workers_opt) cfg.workers = workers;
      if (record_timing) cfg.record_timing = true;
      if (!solver_names.empty()) {
        cfg.solvers.clear();
        for (const auto& name : solver_names) {
          const auto kind = jsr::parse_solver(name);
          if (!kind) throw jsr::ConfigError("unknown solver '" + name + "'");
          cfg.solvers.push_back(*kind);
        }
      }
      cfg.validate();
      const jsr::ExperimentReport report = jsr::run_experiment(cfg);
      print_summary(cfg, report);
      if (report.failed_trials > 0) {
        std::fprintf(stderr, "%d trial(s) failed; see summary.json\n", report.failed_trials);
        return kExitFailedTrials;
      }
      return kExitOk;
    }
    if (*shrink) {
      jsr::ShrinkageSpec spec;
      spec.c = sh_c;
      spec.epsilon = sh_eps;
      spec.snapshots = parse_int_list(sh_js);
      parse_grid(sh_grid, spec);
      if (!(spec.c > 0.0) || !(spec.epsilon > 0.0 && spec.epsilon <= 1.0)) {
        throw jsr::ConfigError("need c > 0 and 0 < eps <= 1");
      }
      for (int j : spec.snapshots) {
        if (j < 1) throw jsr::ConfigError("J values must be positive");
      }
      with_output(sh_out, [&](std::ostream& os) { jsr::write_shrinkage_curve(os, spec); });
      return kExitOk;
    }
    if (*se) {
      if (!(se_delta > 0.0) || !(se_sigma2 >= 0.0) || !(se_eps >= 0.0 && se_eps <= 1.0)) {
        throw jsr::ConfigError("need delta > 0, sigma2 >= 0 and 0 <= eps <= 1");
      }
      const double c1 = se_c1 >= 0.0 ? se_c1 : se_sigma2 + se_eps / se_delta;
      const auto trace = jsr::se_predict_trace_from(c1, se_eps, se_delta, se_sigma2, se_iters);
      with_output(se_out, [&](std::ostream& os) {
        jsr::write_csv_row(os, {"source", "iteration", "c"});
        for (std::size_t i = 0; i < trace.size(); ++i) {
          jsr::write_csv_row(os, {"se", std::to_string(i + 1), jsr::format_double(trace[i])});
        }
      });
      return kExitOk;
    }
    if (*dump) {
      jsr::ExperimentConfig cfg = jsr::load_config(dump_config);
      if (*dump_seed_opt) cfg.base_seed = seed;
      const jsr::Instance inst = jsr::trial_instance(cfg.model, cfg.base_seed, dump_trial);
      jsr::dump_instance(inst, dump_out);
      std::printf("wrote %s (M=%d N=%d nnz=%d sigma2=%g)\n", dump_out.c_str(), inst.phi.rows(),
                  inst.phi.cols(), inst.phi.nnz(), inst.meas.sigma2);
      return kExitOk;
    }
  } catch (const jsr::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
