#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace safeddp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when a dynamics step produces a non-finite state or leaves the
/// model's valid domain (e.g. quadrotor pitch singularity).
class ModelBlowup : public std::runtime_error {
public:
  explicit ModelBlowup(const std::string& what) : std::runtime_error(what) {}
};

/// Continuous-time control system xdot = f(x, u) with analytic Jacobians.
class ContinuousDynamics {
public:
  virtual ~ContinuousDynamics() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual Vector deriv(const Vector& x, const Vector& u) const = 0;
  virtual Matrix deriv_jac_x(const Vector& x, const Vector& u) const = 0;
  virtual Matrix deriv_jac_u(const Vector& x, const Vector& u) const = 0;

  /// Control input that holds the system at rest (zero unless overridden).
  virtual Vector steady_control() const { return Vector::Zero(control_dim()); }
};

/// Discrete-time model: step map x(k+1) = f(x(k), u(k)) plus analytic
/// first-order Jacobians of the step map.
class DynamicsModel {
public:
  virtual ~DynamicsModel() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual double dt() const = 0;
  virtual Vector step(const Vector& x, const Vector& u) const = 0;
  virtual Matrix jac_x(const Vector& x, const Vector& u) const = 0;
  virtual Matrix jac_u(const Vector& x, const Vector& u) const = 0;
  virtual Vector steady_control() const { return Vector::Zero(control_dim()); }
  virtual std::string name() const = 0;
};

/// One explicit Euler step x + dt * xdot(x, u). Throws ModelBlowup if the
/// result is non-finite.
Vector euler_step(const ContinuousDynamics& model, const Vector& x,
                  const Vector& u, double dt);

/// Euler discretization of a continuous model. jac_x = I + dt * A,
/// jac_u = dt * B with (A, B) the continuous-time Jacobians.
class EulerModel : public DynamicsModel {
public:
  EulerModel(std::shared_ptr<const ContinuousDynamics> plant, double dt,
             std::string name);

  int state_dim() const override { return plant_->state_dim(); }
  int control_dim() const override { return plant_->control_dim(); }
  double dt() const override { return dt_; }
  Vector step(const Vector& x, const Vector& u) const override;
  Matrix jac_x(const Vector& x, const Vector& u) const override;
  Matrix jac_u(const Vector& x, const Vector& u) const override;
  Vector steady_control() const override { return plant_->steady_control(); }
  std::string name() const override { return name_; }

  const ContinuousDynamics& plant() const { return *plant_; }

private:
  std::shared_ptr<const ContinuousDynamics> plant_;
  double dt_;
  std::string name_;
};

/// Central-difference Jacobians of the discrete step map; test oracle for
/// the analytic ones.
std::pair<Matrix, Matrix> fd_jacobian(const DynamicsModel& model,
                                      const Vector& x, const Vector& u,
                                      double eps = 1e-6);

// ---------------------------------------------------------------------------
// Benchmark plants
// ---------------------------------------------------------------------------

/// Planar double integrator. States (x, y, vx, vy), controls (ax, ay).
class PointRobot2D : public ContinuousDynamics {
public:
  int state_dim() const override { return 4; }
  int control_dim() const override { return 2; }
  Vector deriv(const Vector& x, const Vector& u) const override;
  Matrix deriv_jac_x(const Vector& x, const Vector& u) const override;
  Matrix deriv_jac_u(const Vector& x, const Vector& u) const override;
};

struct CartPoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_length = 0.5;
  double gravity = 9.81;
};

/// Cart-pole. States (cart position, pole angle, cart velocity, angular
/// rate), control is horizontal force on the cart. Angle convention:
/// theta = 0 hanging down, theta = pi upright.
class CartPole : public ContinuousDynamics {
public:
  explicit CartPole(const CartPoleParams& params = {}) : p_(params) {}

  int state_dim() const override { return 4; }
  int control_dim() const override { return 1; }
  Vector deriv(const Vector& x, const Vector& u) const override;
  Matrix deriv_jac_x(const Vector& x, const Vector& u) const override;
  Matrix deriv_jac_u(const Vector& x, const Vector& u) const override;

  const CartPoleParams& params() const { return p_; }

  /// Cart acceleration split as xddot = c0(x) + c1(x) * F; used by the
  /// CBF baseline which needs the control-affine form.
  void accel_affine(const Vector& x, double& c0, double& c1) const;

private:
  CartPoleParams p_;
};

struct DiffDriveParams {
  double wheel_radius = 0.2;
  double half_width = 0.2;
};

/// Differential-drive robot. States (x, y, heading), controls are right and
/// left wheel speeds.
class DiffDrive : public ContinuousDynamics {
public:
  explicit DiffDrive(const DiffDriveParams& params = {}) : p_(params) {}

  int state_dim() const override { return 3; }
  int control_dim() const override { return 2; }
  Vector deriv(const Vector& x, const Vector& u) const override;
  Matrix deriv_jac_x(const Vector& x, const Vector& u) const override;
  Matrix deriv_jac_u(const Vector& x, const Vector& u) const override;

  const DiffDriveParams& params() const { return p_; }

private:
  DiffDriveParams p_;
};

struct QuadrotorParams {
  double mass = 1.0;
  Eigen::Vector3d inertia = Eigen::Vector3d::Ones();
  double gravity = 9.81;
};

/// 12-state quadrotor with Euler-angle attitude. States are position (3),
/// roll/pitch/yaw (3), world-frame linear velocity (3) and body rates (3);
/// controls are total thrust and three body torques. The pitch singularity
/// |cos(pitch)| -> 0 is outside the tested envelope and raises ModelBlowup.
class Quadrotor12 : public ContinuousDynamics {
public:
  explicit Quadrotor12(const QuadrotorParams& params = {}) : p_(params) {}

  int state_dim() const override { return 12; }
  int control_dim() const override { return 4; }
  Vector deriv(const Vector& x, const Vector& u) const override;
  Matrix deriv_jac_x(const Vector& x, const Vector& u) const override;
  Matrix deriv_jac_u(const Vector& x, const Vector& u) const override;
  Vector steady_control() const override;

  const QuadrotorParams& params() const { return p_; }

private:
  QuadrotorParams p_;
};

// Discrete benchmark models (Euler, default dt = 0.02 s).
std::shared_ptr<DynamicsModel> make_point_robot(double dt = 0.02);
std::shared_ptr<DynamicsModel> make_cart_pole(const CartPoleParams& params = {},
                                              double dt = 0.02);
std::shared_ptr<DynamicsModel> make_diff_drive(const DiffDriveParams& params = {},
                                               double dt = 0.02);
std::shared_ptr<DynamicsModel> make_quadrotor(const QuadrotorParams& params = {},
                                              double dt = 0.02);

}  // namespace safeddp
