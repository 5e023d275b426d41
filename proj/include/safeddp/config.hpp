#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "safeddp/dynamics.hpp"
#include "safeddp/safety.hpp"
#include "safeddp/solver.hpp"

namespace safeddp {

enum class ExperimentKind { PointRobot, DiffDrive, CartPole, QuadReach, QuadTrack };
enum class SolverChoice { DBaS, Penalty, CBF, Unconstrained };

std::string to_string(ExperimentKind kind);
std::string to_string(SolverChoice solver);
ExperimentKind experiment_from_string(const std::string& name);
SolverChoice solver_from_string(const std::string& name);
BarrierKind barrier_from_string(const std::string& name);

/// One obstacle as declared in a config file.
struct ObstacleSpec {
  std::string shape = "sphere";  // sphere | ellipse | cardioid | diamond | square
  Vector center;
  double radius = 1.0;  // sphere radius, or the level constant of a shape
  double ax = 1.0, ay = 1.0, a = 1.0;
};

std::shared_ptr<const SafetyFunction> make_constraint(const ObstacleSpec& spec);

/// Randomized-environment protocol parameters.
struct RandomObstacles {
  int count_min = 1;
  int count_max = 10;
  std::string placement = "rotbox";  // rotbox | normal | box3d
  // rotbox: rectangle centered at box_center, rotated by box_angle, with the
  // given half extents (the point-robot sampling region)
  Eigen::Vector2d box_center{1.5, 1.5};
  double box_angle = M_PI / 4.0;
  Eigen::Vector2d box_half_extents{M_SQRT2, 5.0 / M_SQRT2};
  // normal: N(0, normal_std) per coordinate (diff-drive protocol)
  double normal_std = 1.0;
  // box3d: axis-aligned box for the randomized quadrotor environment
  Eigen::Vector3d box_min{-1.5, -1.5, 0.2};
  Eigen::Vector3d box_max{1.5, 1.5, 2.2};
  double radius_min = 0.2;
  double radius_max = 1.0;
  /// Obstacles are resampled until they clear start and goal by
  /// radius + clearance.
  double clearance = 0.2;
  int max_resamples = 200;
};

/// Full description of one benchmark problem; built from per-experiment
/// defaults and overridden by the JSON config file.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::PointRobot;
  SolverChoice solver = SolverChoice::DBaS;
  double dt = 0.02;
  int horizon = 150;
  std::uint64_t seed = 0;

  Vector start;
  Vector goal;
  std::vector<ObstacleSpec> obstacles;
  bool randomize_obstacles = false;
  RandomObstacles random;
  bool randomize_start_goal = false;

  BarrierKind barrier = BarrierKind::Inverse;
  bool shift = true;

  Vector q_diag;
  Vector r_diag;
  Vector s_diag;
  double q_w = 1e-3;
  double s_w = 1e-3;
  Vector control_target;  // empty = zero

  int max_iterations = 500;
  double convergence_tol = 1e-3;
  bool second_order_dynamics = false;

  double success_threshold = 0.3;
  int goal_dim = 2;  // position coordinates entering success / M.I. checks

  double cbf_alpha0 = 4.0;
  double cbf_alpha1 = 4.0;

  CartPoleParams cartpole;
  double cartpole_limit = 1.5;
  double upright_tolerance = 0.05;
  QuadrotorParams quad;
  DiffDriveParams diffdrive;

  double track_position_weight = 50.0;
};

ExperimentConfig default_config(ExperimentKind kind);

/// Parse a JSON config file. Unknown keys are rejected so typos do not
/// silently fall back to defaults. Throws std::runtime_error with a
/// human-readable message on any problem.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

}  // namespace safeddp
