#include "safeddp/baselines.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace safeddp {

LinearInequality ecbf_sphere_double_integrator(const Vector& center,
                                               double radius, double a0,
                                               double a1, const Vector& x) {
  const int d = static_cast<int>(center.size());
  const Vector p = x.head(d);
  const Vector v = x.segment(d, d);
  const Vector rel = p - center;
  const double h = rel.squaredNorm() - radius * radius;
  const double hd = 2.0 * rel.dot(v);

  LinearInequality row;
  row.a = 2.0 * rel;
  row.b = -2.0 * v.squaredNorm() - a1 * hd - a0 * h;
  return row;
}

LinearInequality ecbf_cartpole_bound(const CartPole& plant, double limit,
                                     double a0, double a1, const Vector& x) {
  const double pos = x(0);
  const double vel = x(2);
  const double h = limit * limit - pos * pos;
  double c0 = 0.0, c1 = 0.0;
  plant.accel_affine(x, c0, c1);

  LinearInequality row;
  row.a = Vector::Constant(1, -2.0 * pos * c1);
  row.b = 2.0 * vel * vel + 2.0 * pos * c0 + 2.0 * a1 * pos * vel - a0 * h;
  return row;
}

CBFFilter CBFFilter::for_point_robot(
    std::vector<std::shared_ptr<const SphericalObstacle>> obstacles, double a0,
    double a1) {
  CBFFilter filter;
  for (auto& obs : obstacles) {
    filter.rows_.push_back([obs, a0, a1](const Vector& x) {
      return ecbf_sphere_double_integrator(obs->center(), obs->radius(), a0,
                                           a1, x);
    });
  }
  return filter;
}

CBFFilter CBFFilter::for_cart_pole(std::shared_ptr<const CartPole> plant,
                                   double limit, double a0, double a1) {
  CBFFilter filter;
  filter.rows_.push_back([plant, limit, a0, a1](const Vector& x) {
    return ecbf_cartpole_bound(*plant, limit, a0, a1, x);
  });
  return filter;
}

std::vector<LinearInequality> CBFFilter::constraints_at(const Vector& x) const {
  std::vector<LinearInequality> rows;
  rows.reserve(rows_.size());
  for (const auto& fn : rows_) {
    rows.push_back(fn(x));
  }
  return rows;
}

FilterResult cbf_filter_step(const Vector& u_nom,
                             const std::vector<LinearInequality>& constraints) {
  constexpr double kTol = 1e-10;
  FilterResult result;
  result.u = u_nom;

  // drop degenerate rows; a ~ 0 with b > 0 cannot be satisfied by any u
  std::vector<const LinearInequality*> rows;
  for (const auto& c : constraints) {
    if (c.a.norm() < 1e-12) {
      if (c.b > kTol) {
        return result;  // infeasible
      }
      continue;
    }
    rows.push_back(&c);
  }

  const int m = static_cast<int>(u_nom.size());
  const int nc = static_cast<int>(rows.size());
  std::vector<int> active;
  Vector u = u_nom;
  Vector lambda;

  const int max_iter = 4 * nc + 8;
  for (int iter = 0; iter <= max_iter; ++iter) {
    // projection onto the active equalities: u = u_nom + A' lambda
    if (active.empty()) {
      u = u_nom;
      lambda.resize(0);
    } else {
      const int na = static_cast<int>(active.size());
      Matrix a_act(na, m);
      Vector rhs(na);
      for (int i = 0; i < na; ++i) {
        a_act.row(i) = rows[active[i]]->a.transpose();
        rhs(i) = rows[active[i]]->b - rows[active[i]]->a.dot(u_nom);
      }
      const Matrix gram = a_act * a_act.transpose();
      lambda = gram.ldlt().solve(rhs);
      if ((gram * lambda - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) {
        return result;  // dependent active rows with inconsistent targets
      }
      u = u_nom + a_act.transpose() * lambda;
    }

    // drop the most negative multiplier first
    int drop = -1;
    double most_negative = -kTol;
    for (int i = 0; i < static_cast<int>(active.size()); ++i) {
      if (lambda(i) < most_negative) {
        most_negative = lambda(i);
        drop = i;
      }
    }
    if (drop >= 0) {
      active.erase(active.begin() + drop);
      continue;
    }

    // add the most violated inactive constraint
    int add = -1;
    double worst = kTol;
    for (int i = 0; i < nc; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) {
        continue;
      }
      const double violation = rows[i]->b - rows[i]->a.dot(u);
      if (violation > worst) {
        worst = violation;
        add = i;
      }
    }
    if (add < 0) {
      result.u = u;
      result.feasible = true;
      return result;
    }
    if (static_cast<int>(active.size()) == m) {
      // cannot activate more independent rows than controls
      return result;
    }
    active.push_back(add);
  }
  return result;  // iteration cap: treat as filter failure
}

CBFRolloutResult cbf_rollout(const DynamicsModel& model,
                             const std::vector<Vector>& nominal_states,
                             const std::vector<Vector>& nominal_controls,
                             const Policy& policy, const CBFFilter& filter,
                             const Vector& x0) {
  CBFRolloutResult out;
  out.states.push_back(x0);
  const int horizon = static_cast<int>(nominal_controls.size());
  for (int k = 0; k < horizon; ++k) {
    const Vector u_nom = nominal_controls[k] + policy.k[k] +
                         policy.K[k] * (out.states.back() - nominal_states[k]);
    FilterResult f = cbf_filter_step(u_nom, filter.constraints_at(out.states.back()));
    if (!f.feasible) {
      out.filter_ok = false;
      out.failure_step = k;
      return out;
    }
    out.controls.push_back(f.u);
    try {
      out.states.push_back(model.step(out.states.back(), f.u));
    } catch (const ModelBlowup&) {
      out.filter_ok = false;
      out.failure_step = k;
      return out;
    }
  }
  return out;
}

SolveResult penalty_solve(std::shared_ptr<const DynamicsModel> plant,
                          std::shared_ptr<const PenaltyCost> cost,
                          const Vector& x0, SolverOptions opts) {
  opts.regularization = Regularization::Levenberg;
  opts.safety = &cost->spec();
  DDPSolver solver(std::move(plant), cost, opts);
  return solver.solve(x0);
}

}  // namespace safeddp
