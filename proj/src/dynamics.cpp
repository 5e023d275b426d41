#include "safeddp/dynamics.hpp"

#include <cmath>

namespace safeddp {

Vector euler_step(const ContinuousDynamics& model, const Vector& x,
                  const Vector& u, double dt) {
  Vector next = x + dt * model.deriv(x, u);
  if (!next.allFinite()) {
    throw ModelBlowup("euler_step produced a non-finite state");
  }
  return next;
}

EulerModel::EulerModel(std::shared_ptr<const ContinuousDynamics> plant,
                       double dt, std::string name)
    : plant_(std::move(plant)), dt_(dt), name_(std::move(name)) {
  if (dt_ <= 0.0) {
    throw std::invalid_argument("EulerModel: dt must be positive");
  }
}

Vector EulerModel::step(const Vector& x, const Vector& u) const {
  return euler_step(*plant_, x, u, dt_);
}

Matrix EulerModel::jac_x(const Vector& x, const Vector& u) const {
  const int n = plant_->state_dim();
  return Matrix::Identity(n, n) + dt_ * plant_->deriv_jac_x(x, u);
}

Matrix EulerModel::jac_u(const Vector& x, const Vector& u) const {
  return dt_ * plant_->deriv_jac_u(x, u);
}

std::pair<Matrix, Matrix> fd_jacobian(const DynamicsModel& model,
                                      const Vector& x, const Vector& u,
                                      double eps) {
  const int n = model.state_dim();
  const int m = model.control_dim();
  Matrix fx(n, n), fu(n, m);
  for (int i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp(i) += eps;
    xm(i) -= eps;
    fx.col(i) = (model.step(xp, u) - model.step(xm, u)) / (2.0 * eps);
  }
  for (int j = 0; j < m; ++j) {
    Vector up = u, um = u;
    up(j) += eps;
    um(j) -= eps;
    fu.col(j) = (model.step(x, up) - model.step(x, um)) / (2.0 * eps);
  }
  return {fx, fu};
}

// ---------------------------------------------------------------------------
// Planar double integrator
// ---------------------------------------------------------------------------

Vector PointRobot2D::deriv(const Vector& x, const Vector& u) const {
  Vector d(4);
  d << x(2), x(3), u(0), u(1);
  return d;
}

Matrix PointRobot2D::deriv_jac_x(const Vector&, const Vector&) const {
  Matrix a = Matrix::Zero(4, 4);
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  return a;
}

Matrix PointRobot2D::deriv_jac_u(const Vector&, const Vector&) const {
  Matrix b = Matrix::Zero(4, 2);
  b(2, 0) = 1.0;
  b(3, 1) = 1.0;
  return b;
}

// ---------------------------------------------------------------------------
// Cart-pole
// ---------------------------------------------------------------------------

void CartPole::accel_affine(const Vector& x, double& c0, double& c1) const {
  const double s = std::sin(x(1));
  const double c = std::cos(x(1));
  const double td = x(3);
  const double den = p_.cart_mass + p_.pole_mass * s * s;
  c1 = 1.0 / den;
  c0 = p_.pole_mass * s * (p_.pole_length * td * td + p_.gravity * c) * c1;
}

Vector CartPole::deriv(const Vector& x, const Vector& u) const {
  const double s = std::sin(x(1));
  const double c = std::cos(x(1));
  const double td = x(3);
  const double f = u(0);
  const double mc = p_.cart_mass, mp = p_.pole_mass;
  const double l = p_.pole_length, g = p_.gravity;
  const double den = mc + mp * s * s;

  Vector d(4);
  d(0) = x(2);
  d(1) = td;
  d(2) = (f + mp * s * (l * td * td + g * c)) / den;
  d(3) = (-f * c - mp * l * td * td * c * s - (mc + mp) * g * s) / (l * den);
  return d;
}

Matrix CartPole::deriv_jac_x(const Vector& x, const Vector& u) const {
  const double s = std::sin(x(1));
  const double c = std::cos(x(1));
  const double td = x(3);
  const double f = u(0);
  const double mc = p_.cart_mass, mp = p_.pole_mass;
  const double l = p_.pole_length, g = p_.gravity;
  const double den = mc + mp * s * s;
  const double dden = 2.0 * mp * s * c;

  const double n1 = f + mp * s * (l * td * td + g * c);
  const double dn1_dth = mp * c * l * td * td + mp * g * (c * c - s * s);
  const double n2 = -f * c - mp * l * td * td * c * s - (mc + mp) * g * s;
  const double dn2_dth = f * s - mp * l * td * td * (c * c - s * s) - (mc + mp) * g * c;

  Matrix a = Matrix::Zero(4, 4);
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  a(2, 1) = (dn1_dth * den - n1 * dden) / (den * den);
  a(2, 3) = 2.0 * mp * s * l * td / den;
  a(3, 1) = (dn2_dth * den - n2 * dden) / (l * den * den);
  a(3, 3) = -2.0 * mp * td * c * s / den;
  return a;
}

Matrix CartPole::deriv_jac_u(const Vector& x, const Vector&) const {
  const double s = std::sin(x(1));
  const double c = std::cos(x(1));
  const double den = p_.cart_mass + p_.pole_mass * s * s;

  Matrix b = Matrix::Zero(4, 1);
  b(2, 0) = 1.0 / den;
  b(3, 0) = -c / (p_.pole_length * den);
  return b;
}

// ---------------------------------------------------------------------------
// Differential drive
// ---------------------------------------------------------------------------

Vector DiffDrive::deriv(const Vector& x, const Vector& u) const {
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  const double r = p_.wheel_radius;
  const double sum = u(0) + u(1);

  Vector d(3);
  d(0) = 0.5 * r * c * sum;
  d(1) = 0.5 * r * s * sum;
  d(2) = r / (2.0 * p_.half_width) * (u(0) - u(1));
  return d;
}

Matrix DiffDrive::deriv_jac_x(const Vector& x, const Vector& u) const {
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  const double r = p_.wheel_radius;
  const double sum = u(0) + u(1);

  Matrix a = Matrix::Zero(3, 3);
  a(0, 2) = -0.5 * r * s * sum;
  a(1, 2) = 0.5 * r * c * sum;
  return a;
}

Matrix DiffDrive::deriv_jac_u(const Vector& x, const Vector&) const {
  const double c = std::cos(x(2));
  const double s = std::sin(x(2));
  const double r = p_.wheel_radius;
  const double w = r / (2.0 * p_.half_width);

  Matrix b(3, 2);
  b << 0.5 * r * c, 0.5 * r * c,
       0.5 * r * s, 0.5 * r * s,
       w, -w;
  return b;
}

// ---------------------------------------------------------------------------
// Quadrotor
// ---------------------------------------------------------------------------

namespace {
constexpr double kPitchSingularity = 1e-6;
}

Vector Quadrotor12::deriv(const Vector& x, const Vector& u) const {
  const double cph = std::cos(x(3)), sph = std::sin(x(3));
  const double cth = std::cos(x(4)), sth = std::sin(x(4));
  const double cps = std::cos(x(5)), sps = std::sin(x(5));
  if (std::abs(cth) < kPitchSingularity) {
    throw ModelBlowup("quadrotor pitch reached the Euler-angle singularity");
  }
  const double tth = sth / cth;
  const double p = x(9), q = x(10), r = x(11);
  const double thrust = u(0);
  const double m = p_.mass, g = p_.gravity;
  const Eigen::Vector3d& in = p_.inertia;

  Vector d(12);
  d.segment<3>(0) = x.segment<3>(6);
  d(3) = p + sph * tth * q + cph * tth * r;
  d(4) = cph * q - sph * r;
  d(5) = (sph * q + cph * r) / cth;
  d(6) = thrust / m * (cph * sth * cps + sph * sps);
  d(7) = thrust / m * (cph * sth * sps - sph * cps);
  d(8) = thrust / m * (cph * cth) - g;
  d(9) = (in(1) - in(2)) / in(0) * q * r + u(1) / in(0);
  d(10) = (in(2) - in(0)) / in(1) * p * r + u(2) / in(1);
  d(11) = (in(0) - in(1)) / in(2) * p * q + u(3) / in(2);
  return d;
}

Matrix Quadrotor12::deriv_jac_x(const Vector& x, const Vector& u) const {
  const double cph = std::cos(x(3)), sph = std::sin(x(3));
  const double cth = std::cos(x(4)), sth = std::sin(x(4));
  const double cps = std::cos(x(5)), sps = std::sin(x(5));
  if (std::abs(cth) < kPitchSingularity) {
    throw ModelBlowup("quadrotor pitch reached the Euler-angle singularity");
  }
  const double tth = sth / cth;
  const double sec2 = 1.0 / (cth * cth);
  const double p = x(9), q = x(10), r = x(11);
  const double tm = u(0) / p_.mass;
  const Eigen::Vector3d& in = p_.inertia;

  Matrix a = Matrix::Zero(12, 12);
  a.block<3, 3>(0, 6).setIdentity();

  // attitude kinematics
  a(3, 3) = cph * tth * q - sph * tth * r;
  a(3, 4) = (sph * q + cph * r) * sec2;
  a(3, 9) = 1.0;
  a(3, 10) = sph * tth;
  a(3, 11) = cph * tth;
  a(4, 3) = -sph * q - cph * r;
  a(4, 10) = cph;
  a(4, 11) = -sph;
  a(5, 3) = (cph * q - sph * r) / cth;
  a(5, 4) = (sph * q + cph * r) * tth / cth;
  a(5, 10) = sph / cth;
  a(5, 11) = cph / cth;

  // translational acceleration from thrust direction
  a(6, 3) = tm * (-sph * sth * cps + cph * sps);
  a(6, 4) = tm * (cph * cth * cps);
  a(6, 5) = tm * (-cph * sth * sps + sph * cps);
  a(7, 3) = tm * (-sph * sth * sps - cph * cps);
  a(7, 4) = tm * (cph * cth * sps);
  a(7, 5) = tm * (cph * sth * cps + sph * sps);
  a(8, 3) = -tm * sph * cth;
  a(8, 4) = -tm * cph * sth;

  // gyroscopic coupling
  a(9, 10) = (in(1) - in(2)) / in(0) * r;
  a(9, 11) = (in(1) - in(2)) / in(0) * q;
  a(10, 9) = (in(2) - in(0)) / in(1) * r;
  a(10, 11) = (in(2) - in(0)) / in(1) * p;
  a(11, 9) = (in(0) - in(1)) / in(2) * q;
  a(11, 10) = (in(0) - in(1)) / in(2) * p;
  return a;
}

Matrix Quadrotor12::deriv_jac_u(const Vector& x, const Vector&) const {
  const double cph = std::cos(x(3)), sph = std::sin(x(3));
  const double cth = std::cos(x(4)), sth = std::sin(x(4));
  const double cps = std::cos(x(5)), sps = std::sin(x(5));
  const Eigen::Vector3d& in = p_.inertia;

  Matrix b = Matrix::Zero(12, 4);
  b(6, 0) = (cph * sth * cps + sph * sps) / p_.mass;
  b(7, 0) = (cph * sth * sps - sph * cps) / p_.mass;
  b(8, 0) = cph * cth / p_.mass;
  b(9, 1) = 1.0 / in(0);
  b(10, 2) = 1.0 / in(1);
  b(11, 3) = 1.0 / in(2);
  return b;
}

Vector Quadrotor12::steady_control() const {
  Vector u = Vector::Zero(4);
  u(0) = p_.mass * p_.gravity;
  return u;
}

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

std::shared_ptr<DynamicsModel> make_point_robot(double dt) {
  return std::make_shared<EulerModel>(std::make_shared<PointRobot2D>(), dt,
                                      "point_robot");
}

std::shared_ptr<DynamicsModel> make_cart_pole(const CartPoleParams& params,
                                              double dt) {
  return std::make_shared<EulerModel>(std::make_shared<CartPole>(params), dt,
                                      "cart_pole");
}

std::shared_ptr<DynamicsModel> make_diff_drive(const DiffDriveParams& params,
                                               double dt) {
  return std::make_shared<EulerModel>(std::make_shared<DiffDrive>(params), dt,
                                      "diff_drive");
}

std::shared_ptr<DynamicsModel> make_quadrotor(const QuadrotorParams& params,
                                              double dt) {
  return std::make_shared<EulerModel>(std::make_shared<Quadrotor12>(params), dt,
                                      "quadrotor");
}

}  // namespace safeddp
