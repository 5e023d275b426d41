#pragma once

#include <functional>
#include <memory>

#include "safeddp/dynamics.hpp"
#include "safeddp/safety.hpp"

namespace safeddp {

/// Stage-wise first/second-order expansion of a cost term at (x, u).
struct QuadExpansion {
  double l = 0.0;
  Vector lx, lu;
  Matrix lxx, luu, lxu;
};

class CostFunction {
public:
  virtual ~CostFunction() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual double stage(const Vector& x, const Vector& u, int k) const = 0;
  virtual double terminal(const Vector& x) const = 0;
  virtual QuadExpansion expand_stage(const Vector& x, const Vector& u,
                                     int k) const = 0;
  /// lu/luu/lxu of the result are unused for the terminal expansion.
  virtual QuadExpansion expand_terminal(const Vector& x) const = 0;
};

/// Position reference over time, e.g. the figure eight of the tracking task.
using TrackingReference = std::function<Eigen::Vector3d(double)>;

/// Figure-eight reference (sin 2s, cos s, 0) with the rational schedule
/// s(t) = (pi t / 25)^2 / (pi t / 25 + 1).
Eigen::Vector3d figure_eight_reference(double t);

/// Quadratic cost over a plant or barrier-augmented state. Uses the
/// unnormalized convention J = sum dx'Q dx + q_w w^2 + du'R du with terminal
/// dx'S dx + s_w w^2, so gradients carry a factor 2. Cross terms between the
/// barrier state and (x, u) are identically zero.
class QuadraticCost : public CostFunction {
public:
  /// Plant-space cost (no barrier state coordinate).
  QuadraticCost(Matrix q, Matrix r, Matrix s, Vector target);

  /// Cost over [x; w] with barrier-state weights q_w (stage) and s_w
  /// (terminal).
  static std::shared_ptr<QuadraticCost> over_augmented(Matrix q, Matrix r,
                                                       Matrix s, Vector target,
                                                       double q_w, double s_w);

  /// Time-varying target for tracking tasks: target_of(k) is the full plant
  /// target at stage k; the terminal target is target_of(horizon).
  void set_target_schedule(std::function<Vector(int)> target_of, int horizon);
  void set_control_target(Vector u_ref);

  int state_dim() const override;
  int control_dim() const override { return static_cast<int>(r_.rows()); }
  double stage(const Vector& x, const Vector& u, int k) const override;
  double terminal(const Vector& x) const override;
  QuadExpansion expand_stage(const Vector& x, const Vector& u,
                             int k) const override;
  QuadExpansion expand_terminal(const Vector& x) const override;

  bool has_barrier_state() const { return has_barrier_; }
  const Matrix& Q() const { return q_; }
  const Matrix& R() const { return r_; }
  const Matrix& S() const { return s_; }
  double q_w() const { return qw_; }
  double s_w() const { return sw_; }

private:
  Vector target_at(int k) const;

  Matrix q_, r_, s_;
  Vector target_;
  Vector control_target_;
  double qw_ = 0.0, sw_ = 0.0;
  bool has_barrier_ = false;
  std::function<Vector(int)> target_of_;
  int horizon_ = 0;
};

/// Penalty-method cost: the plant-space task cost plus q_w * beta(x)^2 per
/// stage and s_w * beta(x_N)^2 at the end, with beta the same barrier
/// composition a barrier state would use. No barrier state appears in the
/// dynamics; the barrier enters through the (locally non-convex) cost.
class PenaltyCost : public CostFunction {
public:
  PenaltyCost(std::shared_ptr<const QuadraticCost> task, BarrierStateSpec spec,
              double q_w, double s_w);

  int state_dim() const override { return task_->state_dim(); }
  int control_dim() const override { return task_->control_dim(); }
  double stage(const Vector& x, const Vector& u, int k) const override;
  double terminal(const Vector& x) const override;
  QuadExpansion expand_stage(const Vector& x, const Vector& u,
                             int k) const override;
  QuadExpansion expand_terminal(const Vector& x) const override;

  const BarrierStateSpec& spec() const { return spec_; }

private:
  std::shared_ptr<const QuadraticCost> task_;  // plant-space, no barrier state
  BarrierStateSpec spec_;
  double qw_, sw_;
};

/// Total trajectory cost under a cost function (stages 0..N-1 plus terminal).
double trajectory_cost(const CostFunction& cost, const std::vector<Vector>& xs,
                       const std::vector<Vector>& us);

}  // namespace safeddp
