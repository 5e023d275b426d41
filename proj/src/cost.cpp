#include "safeddp/cost.hpp"

#include <cmath>

namespace safeddp {

Eigen::Vector3d figure_eight_reference(double t) {
  const double a = M_PI * t / 25.0;
  const double s = a * a / (a + 1.0);
  return {std::sin(2.0 * s), std::cos(s), 0.0};
}

// ---------------------------------------------------------------------------
// QuadraticCost
// ---------------------------------------------------------------------------

QuadraticCost::QuadraticCost(Matrix q, Matrix r, Matrix s, Vector target)
    : q_(std::move(q)), r_(std::move(r)), s_(std::move(s)),
      target_(std::move(target)),
      control_target_(Vector::Zero(r_.rows())) {}

std::shared_ptr<QuadraticCost> QuadraticCost::over_augmented(
    Matrix q, Matrix r, Matrix s, Vector target, double q_w, double s_w) {
  auto cost = std::make_shared<QuadraticCost>(std::move(q), std::move(r),
                                              std::move(s), std::move(target));
  cost->has_barrier_ = true;
  cost->qw_ = q_w;
  cost->sw_ = s_w;
  return cost;
}

void QuadraticCost::set_target_schedule(std::function<Vector(int)> target_of,
                                        int horizon) {
  target_of_ = std::move(target_of);
  horizon_ = horizon;
}

void QuadraticCost::set_control_target(Vector u_ref) {
  control_target_ = std::move(u_ref);
}

int QuadraticCost::state_dim() const {
  return static_cast<int>(q_.rows()) + (has_barrier_ ? 1 : 0);
}

Vector QuadraticCost::target_at(int k) const {
  return target_of_ ? target_of_(k) : target_;
}

double QuadraticCost::stage(const Vector& x, const Vector& u, int k) const {
  const int n = static_cast<int>(q_.rows());
  const Vector dx = x.head(n) - target_at(k);
  const Vector du = u - control_target_;
  double c = dx.dot(q_ * dx) + du.dot(r_ * du);
  if (has_barrier_) {
    const double w = x(n);
    c += qw_ * w * w;
  }
  return c;
}

double QuadraticCost::terminal(const Vector& x) const {
  const int n = static_cast<int>(q_.rows());
  const Vector dx = x.head(n) - target_at(horizon_);
  double c = dx.dot(s_ * dx);
  if (has_barrier_) {
    const double w = x(n);
    c += sw_ * w * w;
  }
  return c;
}

QuadExpansion QuadraticCost::expand_stage(const Vector& x, const Vector& u,
                                          int k) const {
  const int n = static_cast<int>(q_.rows());
  const int nx = state_dim();
  const int m = control_dim();
  const Vector dx = x.head(n) - target_at(k);
  const Vector du = u - control_target_;

  QuadExpansion e;
  e.l = stage(x, u, k);
  e.lx = Vector::Zero(nx);
  e.lx.head(n) = 2.0 * q_ * dx;
  e.lxx = Matrix::Zero(nx, nx);
  e.lxx.topLeftCorner(n, n) = 2.0 * q_;
  if (has_barrier_) {
    e.lx(n) = 2.0 * qw_ * x(n);
    e.lxx(n, n) = 2.0 * qw_;
  }
  e.lu = 2.0 * r_ * du;
  e.luu = 2.0 * r_;
  e.lxu = Matrix::Zero(nx, m);
  return e;
}

QuadExpansion QuadraticCost::expand_terminal(const Vector& x) const {
  const int n = static_cast<int>(q_.rows());
  const int nx = state_dim();
  const Vector dx = x.head(n) - target_at(horizon_);

  QuadExpansion e;
  e.l = terminal(x);
  e.lx = Vector::Zero(nx);
  e.lx.head(n) = 2.0 * s_ * dx;
  e.lxx = Matrix::Zero(nx, nx);
  e.lxx.topLeftCorner(n, n) = 2.0 * s_;
  if (has_barrier_) {
    e.lx(n) = 2.0 * sw_ * x(n);
    e.lxx(n, n) = 2.0 * sw_;
  }
  return e;
}

// ---------------------------------------------------------------------------
// PenaltyCost
// ---------------------------------------------------------------------------

PenaltyCost::PenaltyCost(std::shared_ptr<const QuadraticCost> task,
                         BarrierStateSpec spec, double q_w, double s_w)
    : task_(std::move(task)), spec_(std::move(spec)), qw_(q_w), sw_(s_w) {
  if (task_->has_barrier_state()) {
    throw std::invalid_argument("PenaltyCost: task cost must be plant-space");
  }
}

double PenaltyCost::stage(const Vector& x, const Vector& u, int k) const {
  const double beta = spec_.barrier_state(x);
  return task_->stage(x, u, k) + qw_ * beta * beta;
}

double PenaltyCost::terminal(const Vector& x) const {
  const double beta = spec_.barrier_state(x);
  return task_->terminal(x) + sw_ * beta * beta;
}

QuadExpansion PenaltyCost::expand_stage(const Vector& x, const Vector& u,
                                        int k) const {
  QuadExpansion e = task_->expand_stage(x, u, k);
  const double beta = spec_.barrier_state(x);
  const Vector g = spec_.barrier_state_gradient(x);
  const Matrix h = spec_.barrier_state_hessian(x);
  e.l += qw_ * beta * beta;
  e.lx += 2.0 * qw_ * beta * g;
  e.lxx += 2.0 * qw_ * (g * g.transpose() + beta * h);
  return e;
}

QuadExpansion PenaltyCost::expand_terminal(const Vector& x) const {
  QuadExpansion e = task_->expand_terminal(x);
  const double beta = spec_.barrier_state(x);
  const Vector g = spec_.barrier_state_gradient(x);
  const Matrix h = spec_.barrier_state_hessian(x);
  e.l += sw_ * beta * beta;
  e.lx += 2.0 * sw_ * beta * g;
  e.lxx += 2.0 * sw_ * (g * g.transpose() + beta * h);
  return e;
}

double trajectory_cost(const CostFunction& cost, const std::vector<Vector>& xs,
                       const std::vector<Vector>& us) {
  double total = 0.0;
  for (size_t k = 0; k < us.size(); ++k) {
    total += cost.stage(xs[k], us[k], static_cast<int>(k));
  }
  total += cost.terminal(xs.back());
  return total;
}

}  // namespace safeddp
