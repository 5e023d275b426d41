#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "safeddp/cost.hpp"
#include "safeddp/dynamics.hpp"
#include "safeddp/safety.hpp"
#include "safeddp/solver.hpp"

namespace safeddp {

/// One half-space constraint on the control, a' u >= b.
struct LinearInequality {
  Vector a;
  double b = 0.0;
};

/// Exponential/higher-order CBF condition hdd + a1 * hd + a0 * h >= 0 for a
/// spherical obstacle under double-integrator dynamics (relative degree 2).
/// State layout (x, y, vx, vy) or (x, y, z, vx, vy, vz); controls are the
/// accelerations.
LinearInequality ecbf_sphere_double_integrator(const Vector& center,
                                               double radius, double a0,
                                               double a1, const Vector& x);

/// Same condition for the cart-position bound |x| < limit of the cart-pole;
/// the control coefficient vanishes at x = 0 (the ill-conditioned
/// relative-degree case), which shows up as a near-zero row a.
LinearInequality ecbf_cartpole_bound(const CartPole& plant, double limit,
                                     double a0, double a1, const Vector& x);

/// Per-step control filter built from exponential CBF rows. Implemented for
/// the two plants with relative-degree-2 position constraints: the planar
/// double integrator and the cart-pole rail bound.
class CBFFilter {
public:
  static CBFFilter for_point_robot(
      std::vector<std::shared_ptr<const SphericalObstacle>> obstacles,
      double a0, double a1);
  static CBFFilter for_cart_pole(std::shared_ptr<const CartPole> plant,
                                 double limit, double a0, double a1);

  std::vector<LinearInequality> constraints_at(const Vector& x) const;

private:
  std::vector<std::function<LinearInequality(const Vector&)>> rows_;
};

struct FilterResult {
  Vector u;
  bool feasible = false;
};

/// Minimum-norm modification of u_nom subject to a' u >= b rows: a tiny
/// dense active-set QP (identity Hessian). Infeasible sets are flagged, not
/// thrown.
FilterResult cbf_filter_step(const Vector& u_nom,
                             const std::vector<LinearInequality>& constraints);

struct CBFRolloutResult {
  std::vector<Vector> states;
  std::vector<Vector> controls;
  bool filter_ok = true;
  int failure_step = -1;
};

/// Closed-loop rollout of a DDP policy with the CBF filter applied to every
/// commanded control.
CBFRolloutResult cbf_rollout(const DynamicsModel& model,
                             const std::vector<Vector>& nominal_states,
                             const std::vector<Vector>& nominal_controls,
                             const Policy& policy, const CBFFilter& filter,
                             const Vector& x0);

/// Penalty-method DDP: plain plant dynamics, barrier-squared cost, Levenberg
/// regularization on. The raw minimum H_uu eigenvalue is recorded before the
/// shift is applied.
SolveResult penalty_solve(std::shared_ptr<const DynamicsModel> plant,
                          std::shared_ptr<const PenaltyCost> cost,
                          const Vector& x0, SolverOptions opts);

}  // namespace safeddp
