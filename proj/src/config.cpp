#include "safeddp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace safeddp {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::PointRobot: return "point_robot";
    case ExperimentKind::DiffDrive: return "diff_drive";
    case ExperimentKind::CartPole: return "cart_pole";
    case ExperimentKind::QuadReach: return "quad_reach";
    case ExperimentKind::QuadTrack: return "quad_track";
  }
  return "?";
}

std::string to_string(SolverChoice solver) {
  switch (solver) {
    case SolverChoice::DBaS: return "dbas";
    case SolverChoice::Penalty: return "penalty";
    case SolverChoice::CBF: return "cbf";
    case SolverChoice::Unconstrained: return "unconstrained";
  }
  return "?";
}

ExperimentKind experiment_from_string(const std::string& name) {
  if (name == "point_robot") return ExperimentKind::PointRobot;
  if (name == "diff_drive") return ExperimentKind::DiffDrive;
  if (name == "cart_pole") return ExperimentKind::CartPole;
  if (name == "quad_reach") return ExperimentKind::QuadReach;
  if (name == "quad_track") return ExperimentKind::QuadTrack;
  throw std::runtime_error("unknown experiment kind: " + name);
}

SolverChoice solver_from_string(const std::string& name) {
  if (name == "dbas") return SolverChoice::DBaS;
  if (name == "penalty") return SolverChoice::Penalty;
  if (name == "cbf") return SolverChoice::CBF;
  if (name == "unconstrained") return SolverChoice::Unconstrained;
  throw std::runtime_error("unknown solver: " + name);
}

BarrierKind barrier_from_string(const std::string& name) {
  if (name == "inverse") return BarrierKind::Inverse;
  if (name == "log") return BarrierKind::Log;
  if (name == "shifted_log") return BarrierKind::ShiftedLog;
  throw std::runtime_error("unknown barrier kind: " + name);
}

std::shared_ptr<const SafetyFunction> make_constraint(const ObstacleSpec& spec) {
  if (spec.shape == "sphere") {
    return std::make_shared<SphericalObstacle>(spec.center, spec.radius);
  }
  ShapeKind kind;
  if (spec.shape == "ellipse") {
    kind = ShapeKind::Ellipse;
  } else if (spec.shape == "cardioid") {
    kind = ShapeKind::Cardioid;
  } else if (spec.shape == "diamond") {
    kind = ShapeKind::Diamond;
  } else if (spec.shape == "square") {
    kind = ShapeKind::Square;
  } else {
    throw std::runtime_error("unknown obstacle shape: " + spec.shape);
  }
  ShapeParams params;
  params.ax = spec.ax;
  params.ay = spec.ay;
  params.r = spec.radius;
  params.a = spec.a;
  return std::make_shared<ShapeConstraint>(
      kind, Eigen::Vector2d(spec.center(0), spec.center(1)), params);
}

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Vector constant_vec(int n, double value) {
  return Vector::Constant(n, value);
}

}  // namespace

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::PointRobot:
      c.horizon = 150;
      c.start = vec({0, 0, 0, 0});
      c.goal = vec({3, 3, 0, 0});
      c.q_diag = constant_vec(4, 0.0);
      c.r_diag = constant_vec(2, 0.005);
      c.s_diag = vec({4000, 4000, 400, 400});
      c.success_threshold = 0.3;
      c.goal_dim = 2;
      c.randomize_obstacles = true;
      c.random.placement = "rotbox";
      c.cbf_alpha0 = 4.0;
      c.cbf_alpha1 = 4.0;
      break;
    case ExperimentKind::DiffDrive:
      c.horizon = 250;
      c.start = vec({3, 0, 0});
      c.goal = vec({-3, 0, 0});
      c.q_diag = constant_vec(3, 0.0);
      c.r_diag = constant_vec(2, 0.005);
      c.s_diag = constant_vec(3, 100.0);
      c.success_threshold = 0.1;
      c.goal_dim = 2;
      c.randomize_obstacles = true;
      c.randomize_start_goal = true;
      c.random.placement = "normal";
      c.random.radius_min = 0.01;
      c.random.radius_max = 1.0;
      break;
    case ExperimentKind::CartPole:
      c.horizon = 150;
      c.start = vec({0, 0, 0, 0});
      c.goal = vec({0, M_PI, 0, 0});
      c.q_diag = constant_vec(4, 0.0);
      c.r_diag = constant_vec(1, 0.05);
      c.s_diag = vec({50, 800, 10, 10});
      c.goal_dim = 0;  // success is measured on the pole angle
      c.cbf_alpha0 = 100.0;
      c.cbf_alpha1 = 200.0;
      break;
    case ExperimentKind::QuadReach: {
      c.horizon = 200;
      c.start = Vector::Zero(12);
      c.start.head(3) = Eigen::Vector3d(-2, -2, 1);
      c.goal = Vector::Zero(12);
      c.goal.head(3) = Eigen::Vector3d(2, 2, 1);
      c.q_diag = constant_vec(12, 0.0);
      c.r_diag = constant_vec(4, 0.005);
      c.s_diag = constant_vec(12, 50.0);
      c.s_diag.head(3).setConstant(500.0);
      c.s_diag.tail(3).setConstant(5.0);
      c.success_threshold = 0.3;
      c.goal_dim = 3;
      ObstacleSpec obs;
      obs.center = vec({0, 0, 1});
      obs.radius = 1.0;
      c.obstacles = {obs};
      c.random.placement = "box3d";
      c.random.radius_min = 0.15;
      c.random.radius_max = 0.4;
      break;
    }
    case ExperimentKind::QuadTrack: {
      c.horizon = 3000;
      c.start = Vector::Zero(12);
      c.start.head(3) = Eigen::Vector3d(0, 1, 0);
      c.goal = Vector::Zero(12);  // replaced by the reference schedule
      c.q_diag = constant_vec(12, 0.0);
      c.q_diag.head(3).setConstant(c.track_position_weight);
      c.r_diag = constant_vec(4, 0.005);
      c.s_diag = c.q_diag;
      c.shift = false;
      c.goal_dim = 3;
      ObstacleSpec obs;
      obs.center = vec({0, 0, 0});
      obs.radius = 0.3;
      c.obstacles = {obs};
      break;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// JSON parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("config: " + msg);
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& item : j.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      fail("unknown key '" + item.key() + "' in " + where);
    }
  }
}

Vector parse_vector(const json& j, const std::string& where) {
  if (!j.is_array()) {
    fail(where + " must be an array of numbers");
  }
  Vector v(static_cast<int>(j.size()));
  for (int i = 0; i < static_cast<int>(j.size()); ++i) {
    v(i) = j[i].get<double>();
  }
  return v;
}

/// A weight entry is either a scalar (uniform diagonal) or a full diagonal.
Vector parse_weight(const json& j, int dim, const std::string& where) {
  if (j.is_number()) {
    return Vector::Constant(dim, j.get<double>());
  }
  Vector v = parse_vector(j, where);
  if (v.size() != dim) {
    fail(where + " must have " + std::to_string(dim) + " entries");
  }
  return v;
}

ObstacleSpec parse_obstacle(const json& j) {
  check_keys(j, {"shape", "center", "radius", "ax", "ay", "a"}, "obstacle");
  ObstacleSpec o;
  o.shape = j.value("shape", std::string("sphere"));
  if (!j.contains("center")) {
    fail("obstacle needs a center");
  }
  o.center = parse_vector(j.at("center"), "obstacle center");
  o.radius = j.value("radius", 1.0);
  o.ax = j.value("ax", 1.0);
  o.ay = j.value("ay", 1.0);
  o.a = j.value("a", 1.0);
  return o;
}

void parse_random(const json& j, RandomObstacles& r) {
  check_keys(j,
             {"count_min", "count_max", "placement", "box_center", "box_angle",
              "box_half_extents", "normal_std", "box_min", "box_max",
              "radius_min", "radius_max", "clearance", "max_resamples"},
             "random");
  r.count_min = j.value("count_min", r.count_min);
  r.count_max = j.value("count_max", r.count_max);
  r.placement = j.value("placement", r.placement);
  if (j.contains("box_center")) {
    const Vector v = parse_vector(j.at("box_center"), "random.box_center");
    r.box_center = Eigen::Vector2d(v(0), v(1));
  }
  r.box_angle = j.value("box_angle", r.box_angle);
  if (j.contains("box_half_extents")) {
    const Vector v =
        parse_vector(j.at("box_half_extents"), "random.box_half_extents");
    r.box_half_extents = Eigen::Vector2d(v(0), v(1));
  }
  r.normal_std = j.value("normal_std", r.normal_std);
  if (j.contains("box_min")) {
    const Vector v = parse_vector(j.at("box_min"), "random.box_min");
    r.box_min = Eigen::Vector3d(v(0), v(1), v(2));
  }
  if (j.contains("box_max")) {
    const Vector v = parse_vector(j.at("box_max"), "random.box_max");
    r.box_max = Eigen::Vector3d(v(0), v(1), v(2));
  }
  r.radius_min = j.value("radius_min", r.radius_min);
  r.radius_max = j.value("radius_max", r.radius_max);
  r.clearance = j.value("clearance", r.clearance);
  r.max_resamples = j.value("max_resamples", r.max_resamples);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.contains("experiment")) {
    fail("missing required key 'experiment'");
  }
  check_keys(j,
             {"experiment", "solver", "dt", "horizon", "seed", "start", "goal",
              "obstacles", "randomize_obstacles", "random",
              "randomize_start_goal", "barrier", "shift", "weights",
              "max_iterations", "tol", "second_order_dynamics",
              "success_threshold", "goal_dim", "cbf_alpha", "cartpole", "quad",
              "diffdrive", "track_position_weight", "upright_tolerance",
              "cartpole_limit"},
             "config");

  ExperimentConfig c =
      default_config(experiment_from_string(j.at("experiment").get<std::string>()));

  if (j.contains("solver")) {
    c.solver = solver_from_string(j.at("solver").get<std::string>());
  }
  c.dt = j.value("dt", c.dt);
  c.horizon = j.value("horizon", c.horizon);
  c.seed = j.value("seed", c.seed);
  if (j.contains("start")) c.start = parse_vector(j.at("start"), "start");
  if (j.contains("goal")) c.goal = parse_vector(j.at("goal"), "goal");
  if (j.contains("obstacles")) {
    c.obstacles.clear();
    for (const auto& jo : j.at("obstacles")) {
      c.obstacles.push_back(parse_obstacle(jo));
    }
  }
  c.randomize_obstacles = j.value("randomize_obstacles", c.randomize_obstacles);
  if (j.contains("random")) parse_random(j.at("random"), c.random);
  c.randomize_start_goal =
      j.value("randomize_start_goal", c.randomize_start_goal);
  if (j.contains("barrier")) {
    c.barrier = barrier_from_string(j.at("barrier").get<std::string>());
  }
  c.shift = j.value("shift", c.shift);

  if (j.contains("weights")) {
    const json& w = j.at("weights");
    check_keys(w, {"q", "r", "s", "q_w", "s_w", "control_target"}, "weights");
    const int n = static_cast<int>(c.q_diag.size());
    const int m = static_cast<int>(c.r_diag.size());
    if (w.contains("q")) c.q_diag = parse_weight(w.at("q"), n, "weights.q");
    if (w.contains("r")) c.r_diag = parse_weight(w.at("r"), m, "weights.r");
    if (w.contains("s")) c.s_diag = parse_weight(w.at("s"), n, "weights.s");
    c.q_w = w.value("q_w", c.q_w);
    c.s_w = w.value("s_w", c.q_w);  // default s_w follows q_w
    if (w.contains("control_target")) {
      c.control_target = parse_vector(w.at("control_target"), "control_target");
    }
  } else {
    c.s_w = c.q_w;
  }

  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.convergence_tol = j.value("tol", c.convergence_tol);
  c.second_order_dynamics =
      j.value("second_order_dynamics", c.second_order_dynamics);
  c.success_threshold = j.value("success_threshold", c.success_threshold);
  c.goal_dim = j.value("goal_dim", c.goal_dim);
  if (j.contains("cbf_alpha")) {
    const Vector a = parse_vector(j.at("cbf_alpha"), "cbf_alpha");
    if (a.size() != 2) fail("cbf_alpha must be [alpha0, alpha1]");
    c.cbf_alpha0 = a(0);
    c.cbf_alpha1 = a(1);
  }
  if (j.contains("cartpole")) {
    const json& p = j.at("cartpole");
    check_keys(p, {"cart_mass", "pole_mass", "pole_length", "gravity"},
               "cartpole");
    c.cartpole.cart_mass = p.value("cart_mass", c.cartpole.cart_mass);
    c.cartpole.pole_mass = p.value("pole_mass", c.cartpole.pole_mass);
    c.cartpole.pole_length = p.value("pole_length", c.cartpole.pole_length);
    c.cartpole.gravity = p.value("gravity", c.cartpole.gravity);
  }
  if (j.contains("quad")) {
    const json& p = j.at("quad");
    check_keys(p, {"mass", "gravity", "inertia"}, "quad");
    c.quad.mass = p.value("mass", c.quad.mass);
    c.quad.gravity = p.value("gravity", c.quad.gravity);
    if (p.contains("inertia")) {
      const Vector v = parse_vector(p.at("inertia"), "quad.inertia");
      c.quad.inertia = Eigen::Vector3d(v(0), v(1), v(2));
    }
  }
  if (j.contains("diffdrive")) {
    const json& p = j.at("diffdrive");
    check_keys(p, {"wheel_radius", "half_width"}, "diffdrive");
    c.diffdrive.wheel_radius = p.value("wheel_radius", c.diffdrive.wheel_radius);
    c.diffdrive.half_width = p.value("half_width", c.diffdrive.half_width);
  }
  c.track_position_weight =
      j.value("track_position_weight", c.track_position_weight);
  c.upright_tolerance = j.value("upright_tolerance", c.upright_tolerance);
  c.cartpole_limit = j.value("cartpole_limit", c.cartpole_limit);

  if (c.kind == ExperimentKind::QuadTrack && j.contains("track_position_weight")) {
    c.q_diag.head(3).setConstant(c.track_position_weight);
    c.s_diag = c.q_diag;
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace safeddp
