#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "safeddp/config.hpp"
#include "safeddp/solver.hpp"

namespace safeddp {

/// Deterministic per-trial random stream: the suite seed is mixed with the
/// trial index so trials are independent of execution order.
class TrialRng {
public:
  TrialRng(std::uint64_t seed, std::uint64_t trial_index);

  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);  // inclusive bounds
  double normal(double mean, double stddev);

private:
  std::mt19937_64 engine_;
};

struct Environment {
  std::vector<ObstacleSpec> obstacles;
  Vector start;
  Vector goal;
};

/// Deterministic function of (config.seed, trial_index). Obstacles are
/// resampled until they clear start and goal by radius + clearance.
Environment sample_environment(const ExperimentConfig& config,
                               std::uint64_t trial_index);

struct TrialResult {
  std::uint64_t trial = 0;
  bool success = false;
  bool safe = false;
  bool converged = false;
  bool solver_error = false;
  /// Task cost (state/control quadratics only, no barrier terms) so the
  /// number is comparable across solvers.
  double cost = std::numeric_limits<double>::infinity();
  double min_h = std::numeric_limits<double>::infinity();
  /// Minimum min_h over all accepted iterates, not just the final one.
  double min_iterate_h = std::numeric_limits<double>::infinity();
  double min_huu_eig = std::numeric_limits<double>::infinity();
  double terminal_distance = std::numeric_limits<double>::infinity();
  double mean_track_error = 0.0;
  double max_control = 0.0;
  int mi = -1;
  int ci = -1;
  double wall_time_ms = 0.0;
  std::string error;
};

/// Everything a single trial produced, for trajectory export and tracing.
struct TrialArtifacts {
  TrialResult result;
  std::vector<Vector> states;  // plant states (barrier coordinate stripped)
  std::vector<Vector> controls;
  std::vector<double> barrier_states;  // per step; zeros when not applicable
  std::vector<IterationRecord> iterations;
  std::vector<double> cost_history;
  BarrierStateSpec spec;  // constraints in effect (may be empty)
};

TrialArtifacts run_trial_full(const ExperimentConfig& config,
                              std::uint64_t trial_index);
TrialResult run_trial(const ExperimentConfig& config,
                      std::uint64_t trial_index);

/// Runs `trials` independent trials on a bounded worker pool. Results are
/// identical for any parallelism degree.
std::vector<TrialResult> run_suite(const ExperimentConfig& config, int trials,
                                   int parallelism);

struct SolverSummary {
  std::string solver;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  /// Means over successful trials only.
  double mean_cost = 0.0;
  double normalized_cost = 0.0;  // NaN when no dbas baseline exists
  double mean_mi = 0.0;
  double mean_ci = 0.0;
  double min_h = std::numeric_limits<double>::infinity();
};

struct SummaryTable {
  std::string experiment;
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<SolverSummary> rows;
};

/// Thrown when costs cannot be normalized because the dbas baseline has no
/// successful trial.
class NormalizationUndefined : public std::runtime_error {
public:
  explicit NormalizationUndefined(const std::string& what)
      : std::runtime_error(what) {}
};

SummaryTable summarize(
    const std::string& experiment, std::uint64_t seed,
    const std::vector<std::pair<std::string, std::vector<TrialResult>>>&
        per_solver);

/// Deterministic JSON rendering of a summary (no timing fields, so reruns
/// with the same seed are byte-identical).
std::string summary_to_json(const SummaryTable& table);

/// Trajectory CSV with columns k, t, state..., control..., w, min_h.
/// Doubles are printed with max_digits10 so a re-import is bit-exact.
void write_trajectory_csv(const std::string& path, const TrialArtifacts& run,
                          double dt);

struct TrajectoryCsv {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
};
TrajectoryCsv read_trajectory_csv(const std::string& path);

/// Whitespace-separated per-iteration diagnostics for external plotting.
void write_iteration_trace(const std::string& path, const TrialArtifacts& run);

}  // namespace safeddp
