#include "safeddp/solver.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace safeddp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double min_eig_symmetric(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

DDPSolver::DDPSolver(std::shared_ptr<const DynamicsModel> model,
                     std::shared_ptr<const CostFunction> cost,
                     SolverOptions opts)
    : model_(std::move(model)), cost_(std::move(cost)), opts_(std::move(opts)) {
  if (model_->state_dim() != cost_->state_dim() ||
      model_->control_dim() != cost_->control_dim()) {
    throw std::invalid_argument("DDPSolver: model/cost dimension mismatch");
  }
  if (opts_.horizon < 1) {
    throw std::invalid_argument("DDPSolver: horizon must be at least 1");
  }
}

RolloutResult DDPSolver::rollout(const Vector& x0,
                                 const std::vector<Vector>& us) const {
  RolloutResult r;
  r.states.reserve(us.size() + 1);
  r.states.push_back(x0);
  r.controls = us;
  double cost = 0.0;
  try {
    for (size_t k = 0; k < us.size(); ++k) {
      cost += cost_->stage(r.states.back(), us[k], static_cast<int>(k));
      r.states.push_back(model_->step(r.states.back(), us[k]));
    }
    cost += cost_->terminal(r.states.back());
  } catch (const UnsafeEvaluation&) {
    r.cost = kInf;
    return r;
  } catch (const ModelBlowup&) {
    r.cost = kInf;
    return r;
  }
  r.cost = std::isfinite(cost) ? cost : kInf;
  return r;
}

RolloutResult DDPSolver::forward_pass(const std::vector<Vector>& xs,
                                      const std::vector<Vector>& us,
                                      const Policy& policy, double eps) const {
  const int n = static_cast<int>(us.size());
  RolloutResult r;
  r.states.reserve(n + 1);
  r.controls.reserve(n);
  r.states.push_back(xs[0]);
  double cost = 0.0;
  try {
    for (int k = 0; k < n; ++k) {
      const Vector u =
          us[k] + eps * policy.k[k] + policy.K[k] * (r.states.back() - xs[k]);
      r.controls.push_back(u);
      cost += cost_->stage(r.states.back(), u, k);
      r.states.push_back(model_->step(r.states.back(), u));
    }
    cost += cost_->terminal(r.states.back());
  } catch (const UnsafeEvaluation&) {
    r.cost = kInf;
    return r;
  } catch (const ModelBlowup&) {
    r.cost = kInf;
    return r;
  }
  r.cost = std::isfinite(cost) ? cost : kInf;
  return r;
}

namespace {

// d(jac)/dx_i via central differences, used only in full-DDP mode to add the
// second-order dynamics contractions.
Matrix jac_x_partial(const DynamicsModel& model, const Vector& x,
                     const Vector& u, int i, bool wrt_state, double eps) {
  Vector xp = x, xm = x;
  Vector up = u, um = u;
  if (wrt_state) {
    xp(i) += eps;
    xm(i) -= eps;
  } else {
    up(i) += eps;
    um(i) -= eps;
  }
  return (model.jac_x(xp, up) - model.jac_x(xm, um)) / (2.0 * eps);
}

Matrix jac_u_partial(const DynamicsModel& model, const Vector& x,
                     const Vector& u, int i, bool wrt_state, double eps) {
  Vector xp = x, xm = x;
  Vector up = u, um = u;
  if (wrt_state) {
    xp(i) += eps;
    xm(i) -= eps;
  } else {
    up(i) += eps;
    um(i) -= eps;
  }
  return (model.jac_u(xp, up) - model.jac_u(xm, um)) / (2.0 * eps);
}

}  // namespace

BackwardPassResult DDPSolver::backward_pass(const std::vector<Vector>& xs,
                                            const std::vector<Vector>& us,
                                            double mu) const {
  const int n = model_->state_dim();
  const int m = model_->control_dim();
  const int horizon = static_cast<int>(us.size());

  BackwardPassResult result;
  result.policy.k.assign(horizon, Vector::Zero(m));
  result.policy.K.assign(horizon, Matrix::Zero(m, n));

  QuadExpansion term = cost_->expand_terminal(xs[horizon]);
  Vector vx = term.lx;
  Matrix vxx = term.lxx;

  for (int k = horizon - 1; k >= 0; --k) {
    const Matrix a = model_->jac_x(xs[k], us[k]);
    const Matrix b = model_->jac_u(xs[k], us[k]);
    const QuadExpansion e = cost_->expand_stage(xs[k], us[k], k);

    const Vector hx_grad = e.lx + a.transpose() * vx;
    const Vector hu_grad = e.lu + b.transpose() * vx;
    Matrix hxx = e.lxx + a.transpose() * vxx * a;
    Matrix huu = e.luu + b.transpose() * vxx * b;
    Matrix hxu = e.lxu + a.transpose() * vxx * b;

    if (opts_.second_order_dynamics) {
      const double fd_eps = 1e-5;
      for (int i = 0; i < n; ++i) {
        hxx.row(i) += vx.transpose() * jac_x_partial(*model_, xs[k], us[k], i,
                                                     true, fd_eps);
        hxu.row(i) += vx.transpose() * jac_u_partial(*model_, xs[k], us[k], i,
                                                     true, fd_eps);
      }
      for (int i = 0; i < m; ++i) {
        huu.row(i) += vx.transpose() * jac_u_partial(*model_, xs[k], us[k], i,
                                                     false, fd_eps);
      }
      hxx = 0.5 * (hxx + hxx.transpose());
      huu = 0.5 * (huu + huu.transpose());
    }

    result.min_huu_eig = std::min(result.min_huu_eig, min_eig_symmetric(huu));

    Matrix huu_eff = huu;
    if (mu > 0.0) {
      huu_eff += mu * Matrix::Identity(m, m);
    }
    Eigen::LLT<Matrix> llt(0.5 * (huu_eff + huu_eff.transpose()));
    if (llt.info() != Eigen::Success) {
      return result;  // success stays false: H_uu not positive definite
    }

    const Vector kff = -llt.solve(hu_grad);
    const Matrix kfb = -llt.solve(hxu.transpose());
    result.policy.k[k] = kff;
    result.policy.K[k] = kfb;
    result.expected_improvement += -kff.dot(hu_grad) -
                                   0.5 * kff.dot(huu_eff * kff);

    // value recursion; the expected-cost drop -1/2 Hu' Huu^-1 Hu only enters
    // the scalar term, which the gains never read
    vx = hx_grad + kfb.transpose() * hu_grad;
    vxx = hxx + hxu * kfb;
    vxx = 0.5 * (vxx + vxx.transpose());
  }

  result.success = true;
  return result;
}

RolloutResult DDPSolver::line_search(const std::vector<Vector>& xs,
                                     const std::vector<Vector>& us,
                                     const Policy& policy, double current_cost,
                                     double* eps_accepted) const {
  for (double eps = opts_.line_search_init; eps >= opts_.line_search_min;
       eps *= opts_.line_search_factor) {
    RolloutResult trial = forward_pass(xs, us, policy, eps);
    if (trial.cost < current_cost) {
      if (eps_accepted != nullptr) {
        *eps_accepted = eps;
      }
      return trial;
    }
  }
  if (eps_accepted != nullptr) {
    *eps_accepted = 0.0;
  }
  RolloutResult none;
  none.cost = kInf;
  return none;
}

SolveResult DDPSolver::solve(const Vector& x0) const {
  SolveResult result;
  if (x0.size() != model_->state_dim()) {
    result.error = "initial state dimension mismatch";
    return result;
  }

  std::vector<Vector> us(opts_.horizon, model_->steady_control());
  RolloutResult nominal = rollout(x0, us);
  if (!std::isfinite(nominal.cost)) {
    result.error = "initial nominal trajectory is unsafe or diverges";
    return result;
  }

  result.cost_history.push_back(nominal.cost);
  double mu =
      opts_.regularization == Regularization::Levenberg ? opts_.mu_init : 0.0;

  for (int iter = 1; iter <= opts_.max_iterations; ++iter) {
    BackwardPassResult bp =
        backward_pass(nominal.states, nominal.controls, mu);
    result.min_huu_eig = std::min(result.min_huu_eig, bp.min_huu_eig);
    while (!bp.success &&
           opts_.regularization == Regularization::Levenberg &&
           mu < opts_.mu_max) {
      mu = std::max(mu, opts_.mu_init) * opts_.mu_factor;
      bp = backward_pass(nominal.states, nominal.controls, mu);
      result.min_huu_eig = std::min(result.min_huu_eig, bp.min_huu_eig);
    }
    if (!bp.success) {
      result.states = std::move(nominal.states);
      result.controls = std::move(nominal.controls);
      result.error = "backward pass failed: H_uu not positive definite";
      result.ci = result.accepted_iterations;
      return result;
    }

    double eps = 0.0;
    RolloutResult next =
        line_search(nominal.states, nominal.controls, bp.policy, nominal.cost,
                    &eps);
    if (eps == 0.0) {
      // no improving step exists; the nominal trajectory is converged
      result.policy = std::move(bp.policy);
      result.converged = true;
      result.ci = std::max(result.accepted_iterations, 1);
      break;
    }

    const double drop = nominal.cost - next.cost;
    nominal = std::move(next);
    result.accepted_iterations += 1;
    result.cost_history.push_back(nominal.cost);
    result.policy = bp.policy;

    IterationRecord rec;
    rec.cost = nominal.cost;
    rec.eps = eps;
    rec.min_huu_eig = bp.min_huu_eig;
    rec.mu = mu;
    if (opts_.goal_position.size() > 0) {
      const Vector& xn = nominal.states.back();
      double sq = 0.0;
      for (size_t i = 0; i < opts_.goal_indices.size(); ++i) {
        const double d = xn(opts_.goal_indices[i]) - opts_.goal_position(i);
        sq += d * d;
      }
      rec.goal_distance = std::sqrt(sq);
      if (result.mi < 0 && rec.goal_distance <= opts_.goal_threshold) {
        result.mi = result.accepted_iterations;
      }
    }
    if (opts_.safety != nullptr) {
      rec.min_h = safety_check(*opts_.safety, nominal.states).min_h;
    }
    result.iterations.push_back(rec);

    if (opts_.regularization == Regularization::Levenberg) {
      mu = std::max(mu * opts_.mu_shrink, opts_.mu_init);
    }

    if (drop < opts_.convergence_tol) {
      // the previous iterate was already within tolerance of this one
      result.converged = true;
      result.ci = std::max(result.accepted_iterations - 1, 1);
      break;
    }
  }

  if (!result.converged && result.ci < 0) {
    result.ci = result.accepted_iterations;
  }
  result.states = std::move(nominal.states);
  result.controls = std::move(nominal.controls);
  if (opts_.safety != nullptr) {
    result.safe = safety_check(*opts_.safety, result.states).safe;
  }
  return result;
}

SolveResult solve(std::shared_ptr<const DynamicsModel> model,
                  std::shared_ptr<const CostFunction> cost, const Vector& x0,
                  const SolverOptions& opts) {
  return DDPSolver(std::move(model), std::move(cost), opts).solve(x0);
}

}  // namespace safeddp
