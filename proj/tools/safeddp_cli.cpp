#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "safeddp/bench.hpp"
#include "safeddp/config.hpp"

namespace fs = std::filesystem;
using namespace safeddp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitSolverFailure = 2;
constexpr int kExitNormalizationUndefined = 3;

void apply_overrides(ExperimentConfig& cfg, const std::string& solver,
                     std::int64_t seed) {
  if (!solver.empty()) {
    cfg.solver = solver_from_string(solver);
  }
  if (seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

void print_trial(const TrialResult& r) {
  std::printf("solver outcome: %s\n", r.success ? "success" : "failure");
  if (!r.error.empty()) {
    std::printf("  error: %s\n", r.error.c_str());
  }
  std::printf("  cost: %.6g\n", r.cost);
  std::printf("  min_h: %.6g\n", r.min_h);
  std::printf("  safe: %s\n", r.safe ? "yes" : "no");
  std::printf("  converged: %s  (M.I. %d, C.I. %d)\n",
              r.converged ? "yes" : "no", r.mi, r.ci);
  std::printf("  min H_uu eigenvalue: %.6g\n", r.min_huu_eig);
  std::printf("  terminal distance: %.6g\n", r.terminal_distance);
  std::printf("  wall time: %.1f ms\n", r.wall_time_ms);
}

void print_summary(const SummaryTable& table) {
  std::printf("%s (seed %llu, %d trials)\n", table.experiment.c_str(),
              static_cast<unsigned long long>(table.seed), table.trials);
  std::printf("%-14s %8s %10s %10s %8s %8s\n", "solver", "succ%", "cost",
              "norm", "M.I.", "C.I.");
  for (const auto& row : table.rows) {
    std::printf("%-14s %8.1f %10.4g %9.2fx %8.2f %8.2f\n", row.solver.c_str(),
                100.0 * row.success_rate, row.mean_cost, row.normalized_cost,
                row.mean_mi, row.mean_ci);
  }
}

int cmd_solve(const ExperimentConfig& cfg, const std::string& out_dir) {
  TrialArtifacts run = run_trial_full(cfg, 0);
  print_trial(run.result);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_trajectory_csv((fs::path(out_dir) / "trajectory.csv").string(), run,
                         cfg.dt);
    const SummaryTable table = summarize(
        to_string(cfg.kind), cfg.seed, {{to_string(cfg.solver), {run.result}}});
    write_text(fs::path(out_dir) / "summary.json", summary_to_json(table));
    std::printf("wrote %s/trajectory.csv and %s/summary.json\n",
                out_dir.c_str(), out_dir.c_str());
  }
  return run.result.solver_error ? kExitSolverFailure : kExitOk;
}

int cmd_bench(const ExperimentConfig& cfg, int trials, int parallelism,
              const std::string& out_dir) {
  const std::vector<TrialResult> results = run_suite(cfg, trials, parallelism);
  const SummaryTable table = summarize(to_string(cfg.kind), cfg.seed,
                                       {{to_string(cfg.solver), results}});
  print_summary(table);
  const std::string json = summary_to_json(table);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "summary.json", json);
  } else {
    std::fputs(json.c_str(), stdout);
  }
  return kExitOk;
}

int cmd_compare(ExperimentConfig cfg, const std::string& solvers, int trials,
                int parallelism, const std::string& out_dir) {
  std::vector<std::pair<std::string, std::vector<TrialResult>>> per_solver;
  std::stringstream ss(solvers);
  std::string name;
  while (std::getline(ss, name, ',')) {
    cfg.solver = solver_from_string(name);
    per_solver.emplace_back(name, run_suite(cfg, trials, parallelism));
  }
  const SummaryTable table = summarize(to_string(cfg.kind), cfg.seed, per_solver);
  print_summary(table);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "summary.json", summary_to_json(table));
  }
  return kExitOk;
}

int cmd_trace(const ExperimentConfig& cfg, const std::string& out_dir) {
  TrialArtifacts run = run_trial_full(cfg, 0);
  print_trial(run.result);
  fs::create_directories(out_dir);
  write_iteration_trace((fs::path(out_dir) / "iterations.dat").string(), run);
  write_trajectory_csv((fs::path(out_dir) / "trajectory.csv").string(), run,
                       cfg.dt);
  std::printf("wrote %s/iterations.dat and %s/trajectory.csv\n",
              out_dir.c_str(), out_dir.c_str());
  return run.result.solver_error ? kExitSolverFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safety-embedded trajectory optimization benchmarks"};
  app.require_subcommand(1);

  std::string config_path, solver_override, solvers_list, out_dir;
  std::int64_t seed_override = -1;
  int trials = 100;
  int parallelism = static_cast<int>(std::thread::hardware_concurrency());

  auto add_common = [&](CLI::App* sub, bool with_solver = true) {
    sub->add_option("--config", config_path, "JSON experiment config")
        ->required();
    if (with_solver) {
      sub->add_option("--solver", solver_override,
                      "dbas | penalty | cbf | unconstrained");
    }
    sub->add_option("--seed", seed_override, "override the suite seed");
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "run a single problem");
  add_common(solve_cmd);
  solve_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* bench_cmd =
      app.add_subcommand("bench", "run a randomized Monte-Carlo suite");
  add_common(bench_cmd);
  bench_cmd->add_option("--trials", trials, "number of trials");
  bench_cmd->add_option("--parallel", parallelism, "worker threads");
  bench_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "run several solvers on one suite");
  add_common(compare_cmd, false);
  compare_cmd
      ->add_option("--solvers", solvers_list, "comma-separated solver list")
      ->required();
  compare_cmd->add_option("--trials", trials, "number of trials");
  compare_cmd->add_option("--parallel", parallelism, "worker threads");
  compare_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* trace_cmd =
      app.add_subcommand("trace", "emit per-iteration diagnostics");
  add_common(trace_cmd);
  trace_cmd->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    apply_overrides(cfg, solver_override, seed_override);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  }

  try {
    if (solve_cmd->parsed()) {
      return cmd_solve(cfg, out_dir);
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(cfg, trials, parallelism, out_dir);
    }
    if (compare_cmd->parsed()) {
      return cmd_compare(cfg, solvers_list, trials, parallelism, out_dir);
    }
    if (trace_cmd->parsed()) {
      return cmd_trace(cfg, out_dir);
    }
  } catch (const NormalizationUndefined& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNormalizationUndefined;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolverFailure;
  }
  return kExitOk;
}
