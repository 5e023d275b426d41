#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "safeddp/cost.hpp"
#include "safeddp/dynamics.hpp"
#include "safeddp/safety.hpp"

namespace safeddp {

/// Smallest eigenvalue of a symmetric matrix.
double min_eig_symmetric(const Matrix& m);

enum class Regularization { None, Levenberg };

struct SolverOptions {
  int horizon = 100;
  int max_iterations = 500;
  /// Convergence fires when an accepted iteration improves the cost by less
  /// than this.
  double convergence_tol = 1e-3;

  // backtracking schedule for the feedforward scaling
  double line_search_init = 1.0;
  double line_search_factor = 0.5;
  double line_search_min = 1e-6;

  /// Levenberg regularization (H_uu + mu I) for the penalty baseline; the
  /// barrier-state solver runs without it.
  Regularization regularization = Regularization::None;
  double mu_init = 1e-6;
  double mu_factor = 10.0;
  double mu_shrink = 0.5;
  double mu_max = 1e10;

  /// Off = iLQR (second-order dynamics tensors dropped). On adds the tensor
  /// contractions through finite differences of the analytic Jacobians.
  bool second_order_dynamics = false;

  // goal accounting for M.I. (disabled while goal_position is empty)
  Vector goal_position;
  std::vector<int> goal_indices;
  double goal_threshold = 0.0;

  /// Optional instrumentation: when set, the minimum safety margin of every
  /// accepted trajectory is recorded.
  const BarrierStateSpec* safety = nullptr;
};

/// Time-indexed feedforward/feedback policy: du = eps * k + K * dx.
struct Policy {
  std::vector<Vector> k;
  std::vector<Matrix> K;
};

struct IterationRecord {
  double cost = 0.0;
  double eps = 0.0;
  double min_huu_eig = std::numeric_limits<double>::infinity();
  double mu = 0.0;
  double goal_distance = std::numeric_limits<double>::infinity();
  double min_h = std::numeric_limits<double>::infinity();
};

struct SolveResult {
  std::vector<Vector> states;
  std::vector<Vector> controls;
  Policy policy;
  /// Initial cost followed by the cost of every accepted iteration.
  std::vector<double> cost_history;
  std::vector<IterationRecord> iterations;
  int mi = -1;  // first accepted iteration whose terminal state meets the goal
  int ci = -1;  // iterations needed to achieve convergence
  int accepted_iterations = 0;
  double min_huu_eig = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool safe = true;
  std::string error;  // nonempty when the solve failed

  bool ok() const { return error.empty(); }
};

struct BackwardPassResult {
  Policy policy;
  double min_huu_eig = std::numeric_limits<double>::infinity();
  double expected_improvement = 0.0;
  bool success = false;
};

struct RolloutResult {
  std::vector<Vector> states;
  std::vector<Vector> controls;
  double cost = std::numeric_limits<double>::infinity();
};

/// DDP/iLQR over an arbitrary (plain or barrier-augmented) discrete model.
/// A solver instance owns no mutable state across solves; concurrent solves
/// on separate instances or the same instance are safe.
class DDPSolver {
public:
  DDPSolver(std::shared_ptr<const DynamicsModel> model,
            std::shared_ptr<const CostFunction> cost, SolverOptions opts);

  /// Full solve from an initial (augmented, when applicable) state. The
  /// initial nominal trajectory applies the model's steady control.
  SolveResult solve(const Vector& x0) const;

  /// Open-loop rollout; unsafe or non-finite evaluations yield infinite cost.
  RolloutResult rollout(const Vector& x0, const std::vector<Vector>& us) const;

  /// One backward Riccati sweep along a nominal trajectory. mu is the
  /// Levenberg shift added to H_uu (0 when regularization is off). The raw
  /// (unshifted) minimum H_uu eigenvalue is always reported.
  BackwardPassResult backward_pass(const std::vector<Vector>& xs,
                                   const std::vector<Vector>& us,
                                   double mu) const;

  /// Closed-loop rollout u = u_nom + eps*k + K*(x - x_nom) through the true
  /// nonlinear dynamics; crossing a barrier makes the cost infinite.
  RolloutResult forward_pass(const std::vector<Vector>& xs,
                             const std::vector<Vector>& us,
                             const Policy& policy, double eps) const;

  /// First eps in the backtracking schedule that yields a finite, strictly
  /// lower cost. Returns eps = 0 when the schedule is exhausted.
  RolloutResult line_search(const std::vector<Vector>& xs,
                            const std::vector<Vector>& us,
                            const Policy& policy, double current_cost,
                            double* eps_accepted) const;

  const SolverOptions& options() const { return opts_; }

private:
  std::shared_ptr<const DynamicsModel> model_;
  std::shared_ptr<const CostFunction> cost_;
  SolverOptions opts_;
};

/// Convenience wrapper: build a solver and run it.
SolveResult solve(std::shared_ptr<const DynamicsModel> model,
                  std::shared_ptr<const CostFunction> cost, const Vector& x0,
                  const SolverOptions& opts);

}  // namespace safeddp
