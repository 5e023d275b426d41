#include "safeddp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "safeddp/baselines.hpp"

namespace safeddp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace

TrialRng::TrialRng(std::uint64_t seed, std::uint64_t trial_index)
    : engine_(splitmix64(seed ^ splitmix64(trial_index + 0x9E3779B97F4A7C15ULL))) {}

double TrialRng::uniform(double lo, double hi) {
  const double u = static_cast<double>(engine_() >> 11) *
                   (1.0 / 9007199254740992.0);  // [0, 1)
  return lo + u * (hi - lo);
}

int TrialRng::uniform_int(int lo, int hi) {
  return lo + static_cast<int>(engine_() %
                               static_cast<std::uint64_t>(hi - lo + 1));
}

double TrialRng::normal(double mean, double stddev) {
  const double u1 = std::max(uniform(0.0, 1.0), 1e-300);
  const double u2 = uniform(0.0, 1.0);
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                    std::cos(2.0 * M_PI * u2);
}

// ---------------------------------------------------------------------------
// Environment sampling
// ---------------------------------------------------------------------------

namespace {

bool clears(const Vector& center, double radius, double clearance,
            const Vector& point) {
  const int d = static_cast<int>(center.size());
  return (point.head(d) - center).norm() > radius + clearance;
}

}  // namespace

Environment sample_environment(const ExperimentConfig& config,
                               std::uint64_t trial_index) {
  TrialRng rng(config.seed, trial_index);
  Environment env;
  env.start = config.start;
  env.goal = config.goal;

  if (config.randomize_start_goal) {
    switch (config.kind) {
      case ExperimentKind::DiffDrive:
        env.start(0) += rng.uniform(-0.25, 0.25);
        env.start(1) += rng.uniform(-0.25, 0.25);
        env.start(2) = rng.uniform(-0.5, 0.5);
        env.goal(0) += rng.uniform(-0.25, 0.25);
        env.goal(1) += rng.uniform(-0.25, 0.25);
        env.goal(2) = rng.uniform(-0.5, 0.5);
        break;
      case ExperimentKind::QuadReach:
        for (int i = 0; i < 3; ++i) {
          env.start(i) += rng.uniform(-0.5, 0.5);
        }
        break;
      default:
        break;
    }
  }

  if (!config.randomize_obstacles) {
    env.obstacles = config.obstacles;
    return env;
  }

  const RandomObstacles& r = config.random;
  const int count = rng.uniform_int(r.count_min, r.count_max);
  for (int i = 0; i < count; ++i) {
    ObstacleSpec obs;
    obs.shape = "sphere";
    bool placed = false;
    for (int attempt = 0; attempt < r.max_resamples; ++attempt) {
      if (r.placement == "rotbox") {
        const double s1 = rng.uniform(-r.box_half_extents(0), r.box_half_extents(0));
        const double s2 = rng.uniform(-r.box_half_extents(1), r.box_half_extents(1));
        const Eigen::Vector2d d1(std::cos(r.box_angle), std::sin(r.box_angle));
        const Eigen::Vector2d d2(-std::sin(r.box_angle), std::cos(r.box_angle));
        const Eigen::Vector2d pos = r.box_center + s1 * d1 + s2 * d2;
        obs.center = Vector(2);
        obs.center << pos(0), pos(1);
      } else if (r.placement == "normal") {
        obs.center = Vector(2);
        obs.center << rng.normal(0.0, r.normal_std), rng.normal(0.0, r.normal_std);
      } else if (r.placement == "box3d") {
        obs.center = Vector(3);
        for (int d = 0; d < 3; ++d) {
          obs.center(d) = rng.uniform(r.box_min(d), r.box_max(d));
        }
      } else {
        throw std::runtime_error("unknown obstacle placement: " + r.placement);
      }
      obs.radius = rng.uniform(r.radius_min, r.radius_max);
      if (clears(obs.center, obs.radius, r.clearance, env.start) &&
          clears(obs.center, obs.radius, r.clearance, env.goal)) {
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw std::runtime_error(
          "environment generation: resample limit exceeded");
    }
    env.obstacles.push_back(obs);
  }
  return env;
}

// ---------------------------------------------------------------------------
// Trial execution
// ---------------------------------------------------------------------------

namespace {

std::shared_ptr<DynamicsModel> make_model(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::PointRobot:
      return make_point_robot(c.dt);
    case ExperimentKind::DiffDrive:
      return make_diff_drive(c.diffdrive, c.dt);
    case ExperimentKind::CartPole:
      return make_cart_pole(c.cartpole, c.dt);
    case ExperimentKind::QuadReach:
    case ExperimentKind::QuadTrack:
      return make_quadrotor(c.quad, c.dt);
  }
  throw std::logic_error("unreachable");
}

std::function<Vector(int)> tracking_schedule(const ExperimentConfig& c) {
  const double dt = c.dt;
  const int n = static_cast<int>(c.start.size());
  return [dt, n](int k) {
    Vector target = Vector::Zero(n);
    target.head(3) = figure_eight_reference(k * dt);
    return target;
  };
}

std::shared_ptr<QuadraticCost> make_task_cost(const ExperimentConfig& c,
                                              const Environment& env) {
  const Matrix q = Matrix(c.q_diag.asDiagonal());
  const Matrix r = Matrix(c.r_diag.asDiagonal());
  const Matrix s = Matrix(c.s_diag.asDiagonal());
  auto cost = std::make_shared<QuadraticCost>(q, r, s, env.goal);
  if (c.kind == ExperimentKind::QuadTrack) {
    cost->set_target_schedule(tracking_schedule(c), c.horizon);
  }
  if (c.control_target.size() > 0) {
    cost->set_control_target(c.control_target);
  }
  return cost;
}

std::shared_ptr<QuadraticCost> make_augmented_cost(const ExperimentConfig& c,
                                                   const Environment& env) {
  const Matrix q = Matrix(c.q_diag.asDiagonal());
  const Matrix r = Matrix(c.r_diag.asDiagonal());
  const Matrix s = Matrix(c.s_diag.asDiagonal());
  auto cost =
      QuadraticCost::over_augmented(q, r, s, env.goal, c.q_w, c.s_w);
  if (c.kind == ExperimentKind::QuadTrack) {
    cost->set_target_schedule(tracking_schedule(c), c.horizon);
  }
  if (c.control_target.size() > 0) {
    cost->set_control_target(c.control_target);
  }
  return cost;
}

SolverOptions make_options(const ExperimentConfig& c, const Environment& env) {
  SolverOptions opts;
  opts.horizon = c.horizon;
  opts.max_iterations = c.max_iterations;
  opts.convergence_tol = c.convergence_tol;
  opts.second_order_dynamics = c.second_order_dynamics;
  if (c.kind == ExperimentKind::CartPole) {
    opts.goal_position = Vector::Constant(1, c.goal(1));
    opts.goal_indices = {1};
    opts.goal_threshold = c.upright_tolerance;
  } else if (c.kind != ExperimentKind::QuadTrack && c.goal_dim > 0) {
    opts.goal_position = env.goal.head(c.goal_dim);
    opts.goal_indices.resize(c.goal_dim);
    for (int i = 0; i < c.goal_dim; ++i) opts.goal_indices[i] = i;
    opts.goal_threshold = c.success_threshold;
  }
  return opts;
}

double guarded_barrier_state(const BarrierStateSpec& spec, const Vector& x) {
  if (spec.constraints.empty()) {
    return 0.0;
  }
  try {
    return spec.barrier_state(x);
  } catch (const UnsafeEvaluation&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

TrialArtifacts run_trial_full(const ExperimentConfig& config,
                              std::uint64_t trial_index) {
  TrialArtifacts out;
  TrialResult& res = out.result;
  res.trial = trial_index;
  const auto t_begin = std::chrono::steady_clock::now();

  try {
    const Environment env = sample_environment(config, trial_index);
    auto plant = make_model(config);
    const int n = plant->state_dim();

    std::vector<std::shared_ptr<const SafetyFunction>> constraints;
    if (config.kind == ExperimentKind::CartPole) {
      constraints.push_back(
          std::make_shared<CoordinateBound>(0, config.cartpole_limit));
    }
    for (const auto& o : env.obstacles) {
      constraints.push_back(make_constraint(o));
    }

    BarrierStateSpec spec;
    spec.constraints = constraints;
    spec.barrier.kind = config.barrier;
    const bool tracking = config.kind == ExperimentKind::QuadTrack;
    if (config.shift && !tracking && !constraints.empty()) {
      spec.desired_state = env.goal;
      spec.shift = true;
    }
    out.spec = spec;

    auto task_cost = make_task_cost(config, env);
    SolverOptions opts = make_options(config, env);

    SolveResult sol;
    bool filter_ok = true;

    switch (config.solver) {
      case SolverChoice::Unconstrained: {
        if (!constraints.empty()) {
          opts.safety = &spec;
        }
        sol = solve(plant, task_cost, env.start, opts);
        out.states = sol.states;
        out.controls = sol.controls;
        break;
      }
      case SolverChoice::DBaS: {
        if (constraints.empty()) {
          opts.safety = nullptr;
          sol = solve(plant, task_cost, env.start, opts);
          out.states = sol.states;
          out.controls = sol.controls;
          break;
        }
        auto aug = augment(plant, spec);
        auto cost = make_augmented_cost(config, env);
        opts.safety = &aug->spec();
        const Vector x0 = aug->augment_state(env.start);
        sol = solve(aug, cost, x0, opts);
        out.states.reserve(sol.states.size());
        out.barrier_states.reserve(sol.states.size());
        for (const auto& xw : sol.states) {
          out.states.push_back(xw.head(n));
          out.barrier_states.push_back(xw(n));
        }
        out.controls = sol.controls;
        break;
      }
      case SolverChoice::Penalty: {
        auto pcost = std::make_shared<PenaltyCost>(task_cost, spec, config.q_w,
                                                   config.s_w);
        sol = penalty_solve(plant, pcost, env.start, opts);
        out.states = sol.states;
        out.controls = sol.controls;
        break;
      }
      case SolverChoice::CBF: {
        if (config.kind != ExperimentKind::PointRobot &&
            config.kind != ExperimentKind::CartPole) {
          throw std::runtime_error(
              "cbf baseline supports point_robot and cart_pole only");
        }
        sol = solve(plant, task_cost, env.start, opts);
        if (!sol.ok()) {
          throw std::runtime_error("unconstrained solve failed: " + sol.error);
        }
        CBFFilter filter = [&] {
          if (config.kind == ExperimentKind::PointRobot) {
            std::vector<std::shared_ptr<const SphericalObstacle>> spheres;
            for (const auto& o : env.obstacles) {
              if (o.shape != "sphere") {
                throw std::runtime_error("cbf filter needs spherical obstacles");
              }
              spheres.push_back(
                  std::make_shared<SphericalObstacle>(o.center, o.radius));
            }
            return CBFFilter::for_point_robot(std::move(spheres),
                                              config.cbf_alpha0,
                                              config.cbf_alpha1);
          }
          return CBFFilter::for_cart_pole(
              std::make_shared<CartPole>(config.cartpole),
              config.cartpole_limit, config.cbf_alpha0, config.cbf_alpha1);
        }();
        CBFRolloutResult roll = cbf_rollout(*plant, sol.states, sol.controls,
                                            sol.policy, filter, env.start);
        filter_ok = roll.filter_ok;
        out.states = std::move(roll.states);
        out.controls = std::move(roll.controls);
        break;
      }
    }

    out.iterations = sol.iterations;
    out.cost_history = sol.cost_history;
    res.converged = sol.converged;
    res.mi = sol.mi;
    res.ci = sol.ci;
    res.min_huu_eig = sol.min_huu_eig;
    if (!sol.ok()) {
      res.solver_error = true;
      res.error = sol.error;
    }

    if (out.barrier_states.empty()) {
      out.barrier_states.reserve(out.states.size());
      for (const auto& x : out.states) {
        out.barrier_states.push_back(guarded_barrier_state(spec, x));
      }
    }

    const SafetyReport report = safety_check(spec, out.states);
    res.safe = constraints.empty() ? true : report.safe;
    res.min_h = report.min_h;
    for (const auto& rec : out.iterations) {
      res.min_iterate_h = std::min(res.min_iterate_h, rec.min_h);
    }

    const bool complete =
        static_cast<int>(out.controls.size()) == config.horizon;
    if (complete) {
      res.cost = trajectory_cost(*task_cost, out.states, out.controls);
      for (const auto& u : out.controls) {
        res.max_control = std::max(res.max_control, u.cwiseAbs().maxCoeff());
      }
    }

    if (tracking) {
      double err = 0.0;
      for (int k = 0; k < static_cast<int>(out.states.size()); ++k) {
        err += (out.states[k].head(3) - figure_eight_reference(k * config.dt))
                   .norm();
      }
      res.mean_track_error = err / static_cast<double>(out.states.size());
      res.success = !res.solver_error && res.safe && complete;
    } else if (config.kind == ExperimentKind::CartPole) {
      res.terminal_distance =
          complete ? std::abs(out.states.back()(1) - config.goal(1)) : kInf;
      res.success = !res.solver_error && res.safe && complete &&
                    res.terminal_distance <= config.upright_tolerance;
    } else {
      if (complete) {
        res.terminal_distance = (out.states.back().head(config.goal_dim) -
                                 env.goal.head(config.goal_dim))
                                    .norm();
      }
      res.success = !res.solver_error && filter_ok && complete &&
                    res.terminal_distance <= config.success_threshold &&
                    (constraints.empty() || res.safe);
    }
  } catch (const std::exception& e) {
    res.solver_error = true;
    res.success = false;
    res.error = e.what();
  }

  const auto t_end = std::chrono::steady_clock::now();
  res.wall_time_ms =
      std::chrono::duration<double, std::milli>(t_end - t_begin).count();
  return out;
}

TrialResult run_trial(const ExperimentConfig& config,
                      std::uint64_t trial_index) {
  return run_trial_full(config, trial_index).result;
}

std::vector<TrialResult> run_suite(const ExperimentConfig& config, int trials,
                                   int parallelism) {
  std::vector<TrialResult> results(trials);
  const int workers = std::max(1, parallelism);
  std::atomic<int> next{0};
  auto work = [&]() {
    for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1)) {
      results[i] = run_trial(config, static_cast<std::uint64_t>(i));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) {
    pool.emplace_back(work);
  }
  work();
  for (auto& t : pool) {
    t.join();
  }
  return results;
}

// ---------------------------------------------------------------------------
// Summaries and export
// ---------------------------------------------------------------------------

SummaryTable summarize(
    const std::string& experiment, std::uint64_t seed,
    const std::vector<std::pair<std::string, std::vector<TrialResult>>>&
        per_solver) {
  double dbas_mean = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [name, results] : per_solver) {
    if (name != "dbas") {
      continue;
    }
    double sum = 0.0;
    int successes = 0;
    for (const auto& r : results) {
      if (r.success) {
        sum += r.cost;
        successes += 1;
      }
    }
    if (successes == 0) {
      throw NormalizationUndefined(
          "cost normalization undefined: dbas has no successful trial");
    }
    dbas_mean = sum / successes;
  }

  SummaryTable table;
  table.experiment = experiment;
  table.seed = seed;
  for (const auto& [name, results] : per_solver) {
    SolverSummary s;
    s.solver = name;
    s.trials = static_cast<int>(results.size());
    table.trials = std::max(table.trials, s.trials);
    double cost_sum = 0.0, mi_sum = 0.0, ci_sum = 0.0;
    int mi_count = 0;
    for (const auto& r : results) {
      s.min_h = std::min(s.min_h, r.min_h);
      if (!r.success) {
        continue;
      }
      s.successes += 1;
      cost_sum += r.cost;
      ci_sum += r.ci;
      if (r.mi >= 0) {
        mi_sum += r.mi;
        mi_count += 1;
      }
    }
    s.success_rate =
        s.trials > 0 ? static_cast<double>(s.successes) / s.trials : 0.0;
    if (s.successes > 0) {
      s.mean_cost = cost_sum / s.successes;
      s.mean_ci = ci_sum / s.successes;
      s.mean_mi = mi_count > 0 ? mi_sum / mi_count : 0.0;
      s.normalized_cost = s.mean_cost / dbas_mean;
    } else {
      s.mean_cost = std::numeric_limits<double>::quiet_NaN();
      s.normalized_cost = std::numeric_limits<double>::quiet_NaN();
    }
    table.rows.push_back(std::move(s));
  }
  return table;
}

std::string summary_to_json(const SummaryTable& table) {
  nlohmann::json j;
  j["experiment"] = table.experiment;
  j["seed"] = table.seed;
  j["trials"] = table.trials;
  j["solvers"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r;
    r["solver"] = row.solver;
    r["trials"] = row.trials;
    r["successes"] = row.successes;
    r["success_rate"] = row.success_rate;
    r["mean_cost"] = row.mean_cost;
    r["normalized_cost"] = row.normalized_cost;
    r["mean_mi"] = row.mean_mi;
    r["mean_ci"] = row.mean_ci;
    r["min_h"] = std::isfinite(row.min_h) ? nlohmann::json(row.min_h)
                                          : nlohmann::json();
    j["solvers"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

namespace {
void print_double(std::FILE* f, double v) {
  std::fprintf(f, "%.17g", v);
}
}  // namespace

void write_trajectory_csv(const std::string& path, const TrialArtifacts& run,
                          double dt) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) {
    throw std::runtime_error("cannot write " + path);
  }
  const int n = run.states.empty() ? 0 : static_cast<int>(run.states[0].size());
  const int m =
      run.controls.empty() ? 0 : static_cast<int>(run.controls[0].size());
  std::fprintf(f, "k,t");
  for (int i = 0; i < n; ++i) std::fprintf(f, ",x%d", i);
  for (int i = 0; i < m; ++i) std::fprintf(f, ",u%d", i);
  std::fprintf(f, ",w,min_h\n");
  for (size_t k = 0; k < run.states.size(); ++k) {
    std::fprintf(f, "%zu,", k);
    print_double(f, static_cast<double>(k) * dt);
    for (int i = 0; i < n; ++i) {
      std::fputc(',', f);
      print_double(f, run.states[k](i));
    }
    for (int i = 0; i < m; ++i) {
      std::fputc(',', f);
      print_double(f, k < run.controls.size() ? run.controls[k](i) : 0.0);
    }
    std::fputc(',', f);
    print_double(f, k < run.barrier_states.size() ? run.barrier_states[k] : 0.0);
    std::fputc(',', f);
    print_double(f, run.spec.constraints.empty()
                        ? std::numeric_limits<double>::infinity()
                        : run.spec.min_h(run.states[k]));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

TrajectoryCsv read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  TrajectoryCsv csv;
  std::string line;
  if (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      csv.header.push_back(field);
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      row.push_back(std::strtod(field.c_str(), nullptr));
    }
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

void write_iteration_trace(const std::string& path, const TrialArtifacts& run) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) {
    throw std::runtime_error("cannot write " + path);
  }
  std::fprintf(f, "# iter cost eps min_huu_eig mu goal_dist min_h\n");
  for (size_t i = 0; i < run.iterations.size(); ++i) {
    const IterationRecord& r = run.iterations[i];
    std::fprintf(f, "%zu ", i + 1);
    print_double(f, r.cost);
    std::fputc(' ', f);
    print_double(f, r.eps);
    std::fputc(' ', f);
    print_double(f, r.min_huu_eig);
    std::fputc(' ', f);
    print_double(f, r.mu);
    std::fputc(' ', f);
    print_double(f, r.goal_distance);
    std::fputc(' ', f);
    print_double(f, r.min_h);
    std::fputc('\n', f);
  }
  std::fclose(f);
}

}  // namespace safeddp
