#include "jsr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "jsr/csv.hpp"
#include "jsr/instance_io.hpp"
#include "jsr/random.hpp"
#include "jsr/se.hpp"

namespace jsr {

using nlohmann::json;

namespace {

constexpr std::string_view kSolverNames[] = {"rbp_edge_dependent", "rbp_edge_independent", "amp",
                                             "amp_fast"};
const std::set<std::string> kEmitKinds = {"trace", "summary", "instance_dump", "shrinkage_curve",
                                          "se_overlay", "phase"};

void require_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

SolverKind solver_from_json(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": solver names are strings");
  const auto kind = parse_solver(v.get<std::string>());
  if (!kind) throw ConfigError(where + ": unknown solver '" + v.get<std::string>() + "'");
  return *kind;
}

Eigen::MatrixXd lambda_from_json(const json& v, int J) {
  if (v.is_number()) return v.get<double>() * Eigen::MatrixXd::Identity(J, J);
  if (!v.is_array() || static_cast<int>(v.size()) != J) {
    throw ConfigError("model.lambda: expected a number or a J x J array");
  }
  Eigen::MatrixXd out(J, J);
  for (int i = 0; i < J; ++i) {
    const auto& row = v.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != J) {
      throw ConfigError("model.lambda: expected a number or a J x J array");
    }
    for (int j = 0; j < J; ++j) out(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return out;
}

ModelConfig model_from_json(const json& m) {
  const std::string w = "model";
  require_keys(m, w, {"N", "M", "J", "d", "epsilon", "lambda", "snr_db", "sigma2", "seed"});
  ModelConfig cfg;
  cfg.N = get_or(m, "N", cfg.N, w);
  cfg.M = get_or(m, "M", cfg.M, w);
  cfg.J = get_or(m, "J", cfg.J, w);
  cfg.d = get_or(m, "d", cfg.d, w);
  cfg.seed = get_or<std::uint64_t>(m, "seed", 0, w);
  if (cfg.J < 1) throw ConfigError("model.J must be positive");
  const double eps = get_or(m, "epsilon", 0.1, w);
  const Eigen::MatrixXd lambda =
      m.contains("lambda") ? lambda_from_json(m.at("lambda"), cfg.J) : Eigen::MatrixXd::Identity(cfg.J, cfg.J);
  try {
    cfg.prior = PriorParams(eps, lambda);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  if (m.contains("snr_db") && m.contains("sigma2")) {
    throw ConfigError("model: give either snr_db or sigma2, not both");
  }
  if (m.contains("sigma2")) {
    cfg.noise = NoiseVariance{get_or(m, "sigma2", 0.0, w)};
  } else {
    cfg.noise = SnrDb{get_or(m, "snr_db", 30.0, w)};
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

void amp_from_json(const json& a, AmpConfig& cfg) {
  const std::string w = "amp";
  require_keys(a, w, {"max_iter", "tol", "damping", "onsager", "fast_path_rank_one"});
  cfg.max_iter = get_or(a, "max_iter", cfg.max_iter, w);
  cfg.tol = get_or(a, "tol", cfg.tol, w);
  cfg.damping = get_or(a, "damping", cfg.damping, w);
  cfg.onsager = get_or(a, "onsager", cfg.onsager, w);
  cfg.fast_path_rank_one = get_or(a, "fast_path_rank_one", cfg.fast_path_rank_one, w);
}

void rbp_from_json(const json& r, RbpConfig& cfg) {
  const std::string w = "rbp";
  require_keys(r, w, {"max_iter", "tol", "damping", "exact_cavity_scale"});
  cfg.max_iter = get_or(r, "max_iter", cfg.max_iter, w);
  cfg.tol = get_or(r, "tol", cfg.tol, w);
  cfg.damping = get_or(r, "damping", cfg.damping, w);
  cfg.exact_cavity_scale = get_or(r, "exact_cavity_scale", cfg.exact_cavity_scale, w);
}

std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

}  // namespace

std::string_view solver_name(SolverKind kind) { return kSolverNames[static_cast<int>(kind)]; }

std::optional<SolverKind> parse_solver(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (kSolverNames[i] == name) return static_cast<SolverKind>(i);
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  try {
    model.validate();
    amp.validate();
    rbp.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(support_threshold > 0.0 && support_threshold < 1.0)) {
    throw ConfigError("support_threshold must lie in (0, 1)");
  }
  for (const auto& e : emit) {
    if (!kEmitKinds.count(e)) throw ConfigError("emit: unknown output '" + e + "'");
  }
  const bool solver_outputs = emit.count("trace") || emit.count("summary") || emit.count("se_overlay");
  if (solver_outputs && solvers.empty()) {
    throw ConfigError("solvers: at least one solver is required for trace, summary or se_overlay");
  }
  if (std::any_of(solvers.begin(), solvers.end(), [](SolverKind k) { return k == SolverKind::kAmpFast; }) &&
      !model.prior.unit_isotropic()) {
    throw ConfigError("amp_fast requires lambda = identity");
  }
  if (emit.count("se_overlay")) {
    if (std::find(solvers.begin(), solvers.end(), se_overlay.solver) == solvers.end()) {
      throw ConfigError("se_overlay.solver must be one of the configured solvers");
    }
    if (se_overlay.iterations < 1) throw ConfigError("se_overlay.iterations must be >= 1");
  }
  if (emit.count("shrinkage_curve")) {
    if (!(shrinkage.c > 0.0) || !(shrinkage.epsilon > 0.0 && shrinkage.epsilon <= 1.0)) {
      throw ConfigError("shrinkage: need c > 0 and 0 < epsilon <= 1");
    }
    if (!(shrinkage.step > 0.0) || !(shrinkage.hi >= shrinkage.lo) || shrinkage.snapshots.empty()) {
      throw ConfigError("shrinkage: need step > 0, hi >= lo and a nonempty J list");
    }
    for (int j : shrinkage.snapshots) {
      if (j < 1) throw ConfigError("shrinkage: J values must be positive");
    }
  }
  if (emit.count("phase")) {
    if (!phase) throw ConfigError("emit contains phase but no phase section is given");
    if (phase->epsilons.empty() || phase->deltas.empty()) throw ConfigError("phase: empty grid");
    if (phase->N < 2 || phase->J < 1 || phase->trials < 1) throw ConfigError("phase: need N >= 2, J >= 1, trials >= 1");
    if (!(phase->d_fraction > 0.0 && phase->d_fraction < 1.0)) throw ConfigError("phase: d_fraction must lie in (0, 1)");
    for (double e : phase->epsilons) {
      if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("phase: epsilon values must lie in [0, 1]");
    }
    for (double d : phase->deltas) {
      if (!(d > 0.0 && d <= 1.0)) throw ConfigError("phase: delta values must lie in (0, 1]");
    }
  }
}

ExperimentConfig parse_config(const json& doc) {
  require_keys(doc, "config",
               {"name", "model", "solvers", "rbp", "amp", "trials", "base_seed", "outputs", "emit",
                "workers", "record_timing", "support_threshold", "shrinkage", "se_overlay", "phase"});
  ExperimentConfig cfg;
  const std::string w = "config";
  cfg.name = get_or<std::string>(doc, "name", cfg.name, w);
  if (doc.contains("model")) cfg.model = model_from_json(doc.at("model"));
  if (doc.contains("solvers")) {
    const auto& s = doc.at("solvers");
    if (!s.is_array()) throw ConfigError("solvers: expected an array");
    for (const auto& v : s) cfg.solvers.push_back(solver_from_json(v, "solvers"));
  }
  if (doc.contains("rbp")) rbp_from_json(doc.at("rbp"), cfg.rbp);
  if (doc.contains("amp")) amp_from_json(doc.at("amp"), cfg.amp);
  cfg.trials = get_or(doc, "trials", cfg.trials, w);
  cfg.base_seed = get_or<std::uint64_t>(doc, "base_seed", cfg.base_seed, w);
  cfg.outputs = get_or<std::string>(doc, "outputs", cfg.outputs.string(), w);
  if (doc.contains("emit")) {
    cfg.emit = get_or<std::set<std::string>>(doc, "emit", {}, w);
  }
  cfg.workers = get_or(doc, "workers", cfg.workers, w);
  cfg.record_timing = get_or(doc, "record_timing", cfg.record_timing, w);
  cfg.support_threshold = get_or(doc, "support_threshold", cfg.support_threshold, w);
  if (doc.contains("shrinkage")) {
    const auto& s = doc.at("shrinkage");
    const std::string ws = "shrinkage";
    require_keys(s, ws, {"c", "epsilon", "J", "lo", "hi", "step"});
    cfg.shrinkage.c = get_or(s, "c", cfg.shrinkage.c, ws);
    cfg.shrinkage.epsilon = get_or(s, "epsilon", cfg.shrinkage.epsilon, ws);
    cfg.shrinkage.snapshots = get_or(s, "J", cfg.shrinkage.snapshots, ws);
    cfg.shrinkage.lo = get_or(s, "lo", cfg.shrinkage.lo, ws);
    cfg.shrinkage.hi = get_or(s, "hi", cfg.shrinkage.hi, ws);
    cfg.shrinkage.step = get_or(s, "step", cfg.shrinkage.step, ws);
  }
  if (doc.contains("se_overlay")) {
    const auto& s = doc.at("se_overlay");
    require_keys(s, "se_overlay", {"iterations", "solver"});
    cfg.se_overlay.iterations = get_or(s, "iterations", cfg.se_overlay.iterations, "se_overlay");
    if (s.contains("solver")) cfg.se_overlay.solver = solver_from_json(s.at("solver"), "se_overlay.solver");
  }
  if (doc.contains("phase")) {
    const auto& p = doc.at("phase");
    const std::string wp = "phase";
    require_keys(p, wp, {"epsilons", "deltas", "N", "J", "d_fraction", "trials", "success_nse_db", "solver"});
    PhaseSpec spec;
    spec.epsilons = get_or(p, "epsilons", spec.epsilons, wp);
    spec.deltas = get_or(p, "deltas", spec.deltas, wp);
    spec.N = get_or(p, "N", spec.N, wp);
    spec.J = get_or(p, "J", spec.J, wp);
    spec.d_fraction = get_or(p, "d_fraction", spec.d_fraction, wp);
    spec.trials = get_or(p, "trials", spec.trials, wp);
    spec.success_nse_db = get_or(p, "success_nse_db", spec.success_nse_db, wp);
    if (p.contains("solver")) spec.solver = solver_from_json(p.at("solver"), "phase.solver");
    cfg.phase = spec;
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(f, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

std::uint64_t trial_seed(std::uint64_t base_seed, int trial_index) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(trial_index));
}

Instance trial_instance(const ModelConfig& model, std::uint64_t base_seed, int trial_index) {
  ModelConfig m = model;
  m.seed = trial_seed(base_seed, trial_index);
  return generate_instance(m);
}

SolveResult run_solver(SolverKind kind, const Instance& inst, const PriorParams& prior,
                       const RbpConfig& rbp, const AmpConfig& amp) {
  const Eigen::MatrixXd* truth = &inst.signal.X;
  switch (kind) {
    case SolverKind::kRbpEdgeDependent:
    case SolverKind::kRbpEdgeIndependent: {
      RbpConfig c = rbp;
      c.variant = kind == SolverKind::kRbpEdgeDependent ? RbpVariant::kEdgeDependent
                                                        : RbpVariant::kEdgeIndependent;
      return rbp_solve(inst.phi, inst.meas, prior, c, truth);
    }
    case SolverKind::kAmp:
    case SolverKind::kAmpFast: {
      AmpConfig c = amp;
      c.fast_path = kind == SolverKind::kAmpFast;
      return amp_solve(inst.phi, inst.meas, prior, c, truth);
    }
  }
  throw std::logic_error("run_solver: unknown solver");
}

TrialResult run_trial(const ExperimentConfig& cfg, SolverKind solver, int trial_index) {
  TrialResult r;
  r.solver = solver;
  r.trial = trial_index;
  r.seed = trial_seed(cfg.base_seed, trial_index);
  try {
    const Instance inst = trial_instance(cfg.model, cfg.base_seed, trial_index);
    r.initial_mse = inst.signal.X.squaredNorm() / static_cast<double>(inst.signal.X.size());
    SolveResult s = run_solver(solver, inst, cfg.model.prior, cfg.rbp, cfg.amp);
    r.final_nse_db = nse_db(s.estimate, inst.signal.X).db;
    r.iterations = s.iterations;
    r.converged = s.converged;
    r.support = support_metrics(s.weights, inst.signal.support, cfg.support_threshold);
    r.trace = std::move(s.trace);
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
    r.trace.clear();
  }
  return r;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || values[lo] == values[hi]) return values[lo];  // also keeps inf - inf out
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<SolverSummary> summarize(const std::vector<TrialResult>& results,
                                     const std::vector<SolverKind>& solvers) {
  std::vector<SolverSummary> out;
  for (SolverKind kind : solvers) {
    SolverSummary s;
    s.solver = kind;
    std::vector<double> nse;
    double iters = 0.0;
    double conv = 0.0;
    double prec = 0.0;
    double rec = 0.0;
    for (const auto& r : results) {
      if (r.solver != kind) continue;
      ++s.trials;
      if (r.failed) {
        ++s.failed;
        continue;
      }
      nse.push_back(r.final_nse_db);
      iters += r.iterations;
      conv += r.converged ? 1.0 : 0.0;
      prec += r.support.precision;
      rec += r.support.recall;
    }
    const double ok = static_cast<double>(nse.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.median_nse_db = quantile(nse, 0.5);
    s.q1_nse_db = quantile(nse, 0.25);
    s.q3_nse_db = quantile(nse, 0.75);
    s.mean_iterations = ok > 0 ? iters / ok : nan;
    s.converged_fraction = ok > 0 ? conv / ok : nan;
    s.mean_precision = ok > 0 ? prec / ok : nan;
    s.mean_recall = ok > 0 ? rec / ok : nan;
    out.push_back(s);
  }
  return out;
}

std::vector<SeOverlayRow> se_overlay(const std::vector<double>& c_predicted,
                                     const std::vector<double>& mse_empirical, double sigma2,
                                     double delta) {
  std::vector<SeOverlayRow> rows;
  const std::size_t n = std::min(c_predicted.size(), mse_empirical.size());
  for (std::size_t i = 0; i < n; ++i) {
    SeOverlayRow r;
    r.iteration = static_cast<int>(i) + 1;
    r.c_predicted = c_predicted[i];
    r.mse_predicted = delta * (c_predicted[i] - sigma2);
    r.mse_empirical_mean = mse_empirical[i];
    r.c_empirical = sigma2 + mse_empirical[i] / delta;
    r.relative_gap = std::abs(r.c_empirical - r.c_predicted) / r.c_predicted;
    rows.push_back(r);
  }
  return rows;
}

std::vector<double> empirical_mse_trace(const std::vector<TrialResult>& results, SolverKind solver) {
  std::size_t len = std::numeric_limits<std::size_t>::max();
  int count = 0;
  for (const auto& r : results) {
    if (r.solver != solver || r.failed) continue;
    len = std::min(len, r.trace.size() + 1);
    ++count;
  }
  if (count == 0) return {};
  std::vector<double> mean(len, 0.0);
  for (const auto& r : results) {
    if (r.solver != solver || r.failed) continue;
    mean[0] += r.initial_mse;
    for (std::size_t i = 1; i < len; ++i) mean[i] += r.trace[i - 1].mse;
  }
  for (double& v : mean) v /= count;
  return mean;
}

void parallel_for(int count, int workers, const std::function<void(int)>& task) {
  if (count <= 0) return;
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<PhaseCell> run_phase_sweep(const PhaseSpec& spec, const AmpConfig& amp,
                                       const RbpConfig& rbp, std::uint64_t base_seed,
                                       int workers) {
  const int n_eps = static_cast<int>(spec.epsilons.size());
  const int n_cells = n_eps * static_cast<int>(spec.deltas.size());
  const int n_tasks = n_cells * spec.trials;
  std::vector<double> nse(static_cast<std::size_t>(n_tasks), 0.0);
  std::vector<char> failed(static_cast<std::size_t>(n_tasks), 0);

  auto cell_model = [&](int cell) {
    ModelConfig m;
    m.N = spec.N;
    m.J = spec.J;
    m.M = std::max(2, static_cast<int>(std::lround(spec.deltas[static_cast<std::size_t>(cell / n_eps)] * spec.N)));
    m.d = std::clamp(static_cast<int>(std::lround(spec.d_fraction * m.M)), 1, m.M - 1);
    m.prior = PriorParams::isotropic(spec.epsilons[static_cast<std::size_t>(cell % n_eps)], spec.J);
    m.noise = NoiseVariance{0.0};
    return m;
  };
  parallel_for(n_tasks, workers, [&](int task) {
    const int cell = task / spec.trials;
    const int trial = task % spec.trials;
    const ModelConfig m = cell_model(cell);
    const std::uint64_t cell_seed = derive_seed(base_seed, 0x9000 + static_cast<std::uint64_t>(cell));
    try {
      const Instance inst = trial_instance(m, cell_seed, trial);
      const SolveResult s = run_solver(spec.solver, inst, m.prior, rbp, amp);
      nse[static_cast<std::size_t>(task)] = nse_db(s.estimate, inst.signal.X).db;
    } catch (const std::exception&) {
      failed[static_cast<std::size_t>(task)] = 1;
    }
  });

  std::vector<PhaseCell> cells;
  for (int cell = 0; cell < n_cells; ++cell) {
    PhaseCell c;
    c.epsilon = spec.epsilons[static_cast<std::size_t>(cell % n_eps)];
    c.delta = spec.deltas[static_cast<std::size_t>(cell / n_eps)];
    c.trials = spec.trials;
    std::vector<double> ok;
    for (int t = 0; t < spec.trials; ++t) {
      const auto k = static_cast<std::size_t>(cell * spec.trials + t);
      if (failed[k]) {
        ++c.failed;
        continue;
      }
      ok.push_back(nse[k]);
      if (nse[k] < spec.success_nse_db) ++c.successes;
    }
    c.median_nse_db = quantile(ok, 0.5);
    cells.push_back(c);
  }
  return cells;
}

void write_trace_csv(std::ostream& out, const std::string& experiment_id,
                     const std::vector<TrialResult>& results, bool record_timing) {
  write_csv_row(out, {"experiment_id", "solver", "trial_seed", "iteration", "nse_db", "sigma_trace",
                      "gamma_trace", "wallclock_us"});
  for (const auto& r : results) {
    for (const auto& rec : r.trace) {
      write_csv_row(out, {experiment_id, std::string(solver_name(r.solver)), std::to_string(r.seed),
                          std::to_string(rec.iteration), format_double(rec.nse_db),
                          format_double(rec.sigma_trace), format_double(rec.gamma_trace),
                          std::to_string(record_timing ? rec.wallclock_us : 0)});
    }
  }
}

namespace {

// JSON has no inf/nan; those are written as the strings format_double gives.
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

json summary_json(const ExperimentConfig& cfg, const ExperimentReport& report) {
  json doc;
  doc["experiment"] = cfg.name;
  doc["trials"] = cfg.trials;
  doc["base_seed"] = cfg.base_seed;
  doc["support_threshold"] = cfg.support_threshold;
  json solvers = json::array();
  for (const auto& s : report.summaries) {
    solvers.push_back({{"solver", solver_name(s.solver)},
                       {"trials", s.trials},
                       {"failed", s.failed},
                       {"median_nse_db", number(s.median_nse_db)},
                       {"iqr_nse_db", {number(s.q1_nse_db), number(s.q3_nse_db)}},
                       {"mean_iterations", s.mean_iterations},
                       {"converged_fraction", s.converged_fraction},
                       {"precision", s.mean_precision},
                       {"recall", s.mean_recall}});
  }
  doc["solvers"] = solvers;
  json failures = json::array();
  for (const auto& r : report.results) {
    if (!r.failed) continue;
    failures.push_back({{"solver", solver_name(r.solver)},
                        {"trial", r.trial},
                        {"trial_seed", r.seed},
                        {"error", r.error}});
  }
  doc["failed_trials"] = failures;
  return doc;
}

void write_shrinkage_curve(std::ostream& out, const ShrinkageSpec& spec) {
  write_csv_row(out, {"J", "x", "t"});
  const long steps = std::lround(std::floor((spec.hi - spec.lo) / spec.step + 1e-9));
  for (int J : spec.snapshots) {
    for (long k = 0; k <= steps; ++k) {
      const double x = spec.lo + static_cast<double>(k) * spec.step;
      const double t = logistic_weight(scalar_log_odds(x * J, J, spec.c, spec.epsilon));
      write_csv_row(out, {std::to_string(J), format_double(x), format_double(t)});
    }
  }
}

void write_se_overlay(std::ostream& out, const std::vector<SeOverlayRow>& rows) {
  write_csv_row(out, {"iteration", "c_predicted", "mse_predicted", "mse_empirical_mean",
                      "c_empirical", "relative_gap"});
  for (const auto& r : rows) {
    write_csv_row(out, {std::to_string(r.iteration), format_double(r.c_predicted),
                        format_double(r.mse_predicted), format_double(r.mse_empirical_mean),
                        format_double(r.c_empirical), format_double(r.relative_gap)});
  }
}

void write_phase_csv(std::ostream& out, const std::vector<PhaseCell>& cells) {
  write_csv_row(out, {"epsilon", "delta", "trials", "successes", "failed", "success_rate",
                      "median_nse_db"});
  for (const auto& c : cells) {
    write_csv_row(out, {format_double(c.epsilon), format_double(c.delta), std::to_string(c.trials),
                        std::to_string(c.successes), std::to_string(c.failed),
                        format_double(static_cast<double>(c.successes) / c.trials),
                        format_double(c.median_nse_db)});
  }
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.emit.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.outputs, ec);
    const auto probe = cfg.outputs / ".write_probe";
    {
      std::ofstream f(probe);
      if (ec || !f) throw std::runtime_error("output directory is not writable: " + cfg.outputs.string());
    }
    std::filesystem::remove(probe, ec);
  }

  ExperimentReport report;
  const bool need_trials = cfg.emit.count("trace") || cfg.emit.count("summary") || cfg.emit.count("se_overlay");
  if (need_trials) {
    const int n_solvers = static_cast<int>(cfg.solvers.size());
    report.results.resize(static_cast<std::size_t>(n_solvers * cfg.trials));
    parallel_for(n_solvers * cfg.trials, cfg.workers, [&](int task) {
      const SolverKind kind = cfg.solvers[static_cast<std::size_t>(task / cfg.trials)];
      report.results[static_cast<std::size_t>(task)] = run_trial(cfg, kind, task % cfg.trials);
    });
    for (const auto& r : report.results) report.failed_trials += r.failed ? 1 : 0;
    report.summaries = summarize(report.results, cfg.solvers);
  }
  if (cfg.emit.count("se_overlay")) {
    const double sigma2 = noise_variance(cfg.model);
    const double delta = cfg.model.delta();
    const auto c = se_predict_trace_from(se_initial_c(cfg.model.prior, delta, sigma2),
                                         cfg.model.prior.epsilon(), delta, sigma2,
                                         cfg.se_overlay.iterations);
    report.overlay = se_overlay(c, empirical_mse_trace(report.results, cfg.se_overlay.solver), sigma2, delta);
  }
  if (cfg.emit.count("phase")) {
    report.phase = run_phase_sweep(*cfg.phase, cfg.amp, cfg.rbp, cfg.base_seed, cfg.workers);
  }

  if (cfg.emit.count("trace")) {
    auto f = open_output(cfg.outputs / "trace.csv");
    write_trace_csv(f, cfg.name, report.results, cfg.record_timing);
  }
  if (cfg.emit.count("summary")) {
    auto f = open_output(cfg.outputs / "summary.json");
    f << summary_json(cfg, report).dump(2) << '\n';
  }
  if (cfg.emit.count("shrinkage_curve")) {
    auto f = open_output(cfg.outputs / "shrinkage_curve.csv");
    write_shrinkage_curve(f, cfg.shrinkage);
  }
  if (cfg.emit.count("se_overlay")) {
    auto f = open_output(cfg.outputs / "se_overlay.csv");
    write_se_overlay(f, report.overlay);
  }
  if (cfg.emit.count("phase")) {
    auto f = open_output(cfg.outputs / "phase.csv");
    write_phase_csv(f, report.phase);
  }
  if (cfg.emit.count("instance_dump")) {
    for (int t = 0; t < cfg.trials; ++t) {
      dump_instance(trial_instance(cfg.model, cfg.base_seed, t),
                    cfg.outputs / "instances" / ("trial_" + std::to_string(t)));
    }
  }
  return report;
}

}  // namespace jsr
