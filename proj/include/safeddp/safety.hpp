#pragma once

#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "safeddp/dynamics.hpp"

namespace safeddp {

/// Thrown when a barrier is evaluated at h <= 0. The line search treats any
/// rollout that raises this as having infinite cost.
class UnsafeEvaluation : public std::runtime_error {
public:
  explicit UnsafeEvaluation(const std::string& what)
      : std::runtime_error(what) {}
};

/// Scalar safety function h whose strict superlevel set {h > 0} is the safe
/// region. Constraints only read the leading plant coordinates, so they can
/// be evaluated on augmented states as well.
class SafetyFunction {
public:
  virtual ~SafetyFunction() = default;

  virtual double value(const Vector& x) const = 0;
  /// Gradient with respect to x; same length as x, zero outside the
  /// coordinates the constraint depends on.
  virtual Vector gradient(const Vector& x) const = 0;
  /// Hessian; the default is central differences of the gradient.
  virtual Matrix hessian(const Vector& x) const;
  virtual std::string describe() const = 0;
};

/// h(x) = ||pos(x) - center||^2 - radius^2 over the leading position
/// coordinates.
class SphericalObstacle : public SafetyFunction {
public:
  SphericalObstacle(Vector center, double radius);

  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;
  std::string describe() const override;

  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

private:
  Vector center_;
  double radius_;
};

/// h(x) = limit^2 - x(index)^2, a symmetric bound on one coordinate.
class CoordinateBound : public SafetyFunction {
public:
  CoordinateBound(int index, double limit) : index_(index), limit_(limit) {}

  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;
  std::string describe() const override;

  int index() const { return index_; }
  double limit() const { return limit_; }

private:
  int index_;
  double limit_;
};

enum class ShapeKind { Ellipse, Cardioid, Diamond, Square };

struct ShapeParams {
  double ax = 1.0;
  double ay = 1.0;
  double r = 1.0;
  double a = 1.0;
  /// Corner smoothing for the |.| terms of the diamond and square:
  /// |z| ~ sqrt(z^2 + eps^2).
  double smooth_eps = 1e-3;
};

/// Planar obstacle with one of the closed-form shape functions, evaluated on
/// (x - cx, y - cy). Diamond and square use smoothed absolute values so the
/// gradient exists everywhere.
class ShapeConstraint : public SafetyFunction {
public:
  ShapeConstraint(ShapeKind kind, Eigen::Vector2d center,
                  const ShapeParams& params = {});

  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  std::string describe() const override;

  ShapeKind kind() const { return kind_; }

private:
  double eval2d(double px, double py) const;
  Eigen::Vector2d grad2d(double px, double py) const;

  ShapeKind kind_;
  Eigen::Vector2d center_;
  ShapeParams p_;
};

enum class BarrierKind { Inverse, Log, ShiftedLog };

/// Barrier B(h) on h > 0, diverging as h -> 0+. value/deriv/second_deriv
/// throw UnsafeEvaluation for h <= 0.
struct BarrierFunction {
  BarrierKind kind = BarrierKind::Inverse;

  double value(double h) const;
  double deriv(double h) const;
  double second_deriv(double h) const;
};

/// Specification of a single barrier state composing q >= 1 constraints:
/// w(x) = sum_i B(h_i(x)) - shift, with shift = sum_i B(h_i(x_desired)) when
/// shifting is enabled so that w(x_desired) = 0.
struct BarrierStateSpec {
  std::vector<std::shared_ptr<const SafetyFunction>> constraints;
  BarrierFunction barrier;
  Vector desired_state;  // empty when no set point exists
  bool shift = false;

  double shift_value() const;
  /// Barrier-state value at a plant state; throws UnsafeEvaluation when any
  /// constraint is violated.
  double barrier_state(const Vector& x) const;
  /// Gradient of barrier_state with respect to the plant state.
  Vector barrier_state_gradient(const Vector& x) const;
  /// Exact Hessian of barrier_state; the penalty baseline's cost expansion
  /// needs it (this is where the non-convexity lives).
  Matrix barrier_state_hessian(const Vector& x) const;
  double min_h(const Vector& x) const;
};

/// Next barrier-state value w(k+1) = sum_i B(h_i(f(x, u))) - shift. Depends
/// on (x, u) only, never on the current w.
double dbas_next(const BarrierStateSpec& spec, const DynamicsModel& model,
                 const Vector& x, const Vector& u);

struct SafetyReport {
  bool safe = false;
  double min_h = std::numeric_limits<double>::infinity();
  int worst_step = -1;
  int worst_constraint = -1;
};

/// Strict forward-invariance check: safe iff h_i(x_k) > 0 for every
/// constraint at every step. States may be plant or augmented.
SafetyReport safety_check(const BarrierStateSpec& spec,
                          const std::vector<Vector>& trajectory);

/// Plant dynamics with the barrier state appended as the last coordinate.
/// The first n output rows are the base step; the last obeys the barrier
/// recursion, with d w(k+1) / d w(k) = 0.
class AugmentedModel : public DynamicsModel {
public:
  AugmentedModel(std::shared_ptr<const DynamicsModel> base,
                 BarrierStateSpec spec);

  int state_dim() const override { return base_->state_dim() + 1; }
  int control_dim() const override { return base_->control_dim(); }
  double dt() const override { return base_->dt(); }
  Vector step(const Vector& xw, const Vector& u) const override;
  Matrix jac_x(const Vector& xw, const Vector& u) const override;
  Matrix jac_u(const Vector& xw, const Vector& u) const override;
  Vector steady_control() const override { return base_->steady_control(); }
  std::string name() const override { return base_->name() + "+dbas"; }

  /// [x; w(x)] for a plant state, the consistent initial augmented state.
  Vector augment_state(const Vector& x) const;

  const DynamicsModel& base() const { return *base_; }
  const BarrierStateSpec& spec() const { return spec_; }

private:
  std::shared_ptr<const DynamicsModel> base_;
  BarrierStateSpec spec_;
};

std::shared_ptr<AugmentedModel> augment(std::shared_ptr<const DynamicsModel> base,
                                        BarrierStateSpec spec);

}  // namespace safeddp
