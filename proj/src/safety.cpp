#include "safeddp/safety.hpp"

#include <cmath>
#include <sstream>

namespace safeddp {

Matrix SafetyFunction::hessian(const Vector& x) const {
  const double eps = 1e-6;
  const int n = static_cast<int>(x.size());
  Matrix h(n, n);
  for (int i = 0; i < n; ++i) {
    Vector xp = x, xm = x;
    xp(i) += eps;
    xm(i) -= eps;
    h.col(i) = (gradient(xp) - gradient(xm)) / (2.0 * eps);
  }
  return 0.5 * (h + h.transpose());
}

// ---------------------------------------------------------------------------
// Constraints
// ---------------------------------------------------------------------------

SphericalObstacle::SphericalObstacle(Vector center, double radius)
    : center_(std::move(center)), radius_(radius) {
  if (radius_ <= 0.0) {
    throw std::invalid_argument("SphericalObstacle: radius must be positive");
  }
}

double SphericalObstacle::value(const Vector& x) const {
  const int d = static_cast<int>(center_.size());
  return (x.head(d) - center_).squaredNorm() - radius_ * radius_;
}

Vector SphericalObstacle::gradient(const Vector& x) const {
  const int d = static_cast<int>(center_.size());
  Vector g = Vector::Zero(x.size());
  g.head(d) = 2.0 * (x.head(d) - center_);
  return g;
}

Matrix SphericalObstacle::hessian(const Vector& x) const {
  const int d = static_cast<int>(center_.size());
  Matrix h = Matrix::Zero(x.size(), x.size());
  h.topLeftCorner(d, d) = 2.0 * Matrix::Identity(d, d);
  return h;
}

std::string SphericalObstacle::describe() const {
  std::ostringstream os;
  os << "sphere r=" << radius_ << " at (" << center_.transpose() << ")";
  return os.str();
}

double CoordinateBound::value(const Vector& x) const {
  return limit_ * limit_ - x(index_) * x(index_);
}

Vector CoordinateBound::gradient(const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  g(index_) = -2.0 * x(index_);
  return g;
}

Matrix CoordinateBound::hessian(const Vector& x) const {
  Matrix h = Matrix::Zero(x.size(), x.size());
  h(index_, index_) = -2.0;
  return h;
}

std::string CoordinateBound::describe() const {
  std::ostringstream os;
  os << "|x[" << index_ << "]| < " << limit_;
  return os.str();
}

namespace {
double sabs(double z, double eps) { return std::sqrt(z * z + eps * eps); }
double dsabs(double z, double eps) { return z / std::sqrt(z * z + eps * eps); }
}  // namespace

ShapeConstraint::ShapeConstraint(ShapeKind kind, Eigen::Vector2d center,
                                 const ShapeParams& params)
    : kind_(kind), center_(std::move(center)), p_(params) {}

double ShapeConstraint::eval2d(double px, double py) const {
  const double ax = p_.ax, ay = p_.ay;
  switch (kind_) {
    case ShapeKind::Ellipse:
      return ax * px * px + ay * py * py - p_.r * p_.r;
    case ShapeKind::Cardioid: {
      const double e = ax * px * px + ay * py * py - 1.0;
      const double u = ax * px, v = ay * py;
      return e * e * e - p_.a * u * u * v * v * v;
    }
    case ShapeKind::Diamond:
      return sabs(px, p_.smooth_eps) + sabs(py, p_.smooth_eps) - p_.r;
    case ShapeKind::Square:
      return sabs(px + py, p_.smooth_eps) + sabs(px - py, p_.smooth_eps) - p_.r;
  }
  return 0.0;
}

Eigen::Vector2d ShapeConstraint::grad2d(double px, double py) const {
  const double ax = p_.ax, ay = p_.ay;
  switch (kind_) {
    case ShapeKind::Ellipse:
      return {2.0 * ax * px, 2.0 * ay * py};
    case ShapeKind::Cardioid: {
      const double e = ax * px * px + ay * py * py - 1.0;
      const double gx = 6.0 * ax * px * e * e -
                        2.0 * p_.a * ax * ax * ay * ay * ay * px * py * py * py;
      const double gy = 6.0 * ay * py * e * e -
                        3.0 * p_.a * ax * ax * ay * ay * ay * px * px * py * py;
      return {gx, gy};
    }
    case ShapeKind::Diamond:
      return {dsabs(px, p_.smooth_eps), dsabs(py, p_.smooth_eps)};
    case ShapeKind::Square: {
      const double dp = dsabs(px + py, p_.smooth_eps);
      const double dm = dsabs(px - py, p_.smooth_eps);
      return {dp + dm, dp - dm};
    }
  }
  return Eigen::Vector2d::Zero();
}

double ShapeConstraint::value(const Vector& x) const {
  return eval2d(x(0) - center_(0), x(1) - center_(1));
}

Vector ShapeConstraint::gradient(const Vector& x) const {
  const Eigen::Vector2d g = grad2d(x(0) - center_(0), x(1) - center_(1));
  Vector out = Vector::Zero(x.size());
  out(0) = g(0);
  out(1) = g(1);
  return out;
}

std::string ShapeConstraint::describe() const {
  const char* names[] = {"ellipse", "cardioid", "diamond", "square"};
  std::ostringstream os;
  os << names[static_cast<int>(kind_)] << " at (" << center_.transpose() << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// Barrier functions
// ---------------------------------------------------------------------------

namespace {
void require_safe(double h) {
  if (h <= 0.0) {
    std::ostringstream os;
    os << "barrier evaluated at h = " << h << " <= 0";
    throw UnsafeEvaluation(os.str());
  }
}
}  // namespace

double BarrierFunction::value(double h) const {
  require_safe(h);
  switch (kind) {
    case BarrierKind::Inverse:
      return 1.0 / h;
    case BarrierKind::Log:
      return -std::log(h);
    case BarrierKind::ShiftedLog:
      return std::log1p(h) - std::log(h);
  }
  return 0.0;
}

double BarrierFunction::deriv(double h) const {
  require_safe(h);
  switch (kind) {
    case BarrierKind::Inverse:
      return -1.0 / (h * h);
    case BarrierKind::Log:
      return -1.0 / h;
    case BarrierKind::ShiftedLog:
      return -1.0 / (h * (1.0 + h));
  }
  return 0.0;
}

double BarrierFunction::second_deriv(double h) const {
  require_safe(h);
  switch (kind) {
    case BarrierKind::Inverse:
      return 2.0 / (h * h * h);
    case BarrierKind::Log:
      return 1.0 / (h * h);
    case BarrierKind::ShiftedLog: {
      const double s = h * (1.0 + h);
      return (1.0 + 2.0 * h) / (s * s);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Barrier state
// ---------------------------------------------------------------------------

double BarrierStateSpec::shift_value() const {
  if (!shift || desired_state.size() == 0) {
    return 0.0;
  }
  double beta = 0.0;
  for (const auto& c : constraints) {
    beta += barrier.value(c->value(desired_state));
  }
  return beta;
}

double BarrierStateSpec::barrier_state(const Vector& x) const {
  double beta = 0.0;
  for (const auto& c : constraints) {
    beta += barrier.value(c->value(x));
  }
  return beta - shift_value();
}

Vector BarrierStateSpec::barrier_state_gradient(const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  for (const auto& c : constraints) {
    g += barrier.deriv(c->value(x)) * c->gradient(x);
  }
  return g;
}

Matrix BarrierStateSpec::barrier_state_hessian(const Vector& x) const {
  Matrix h = Matrix::Zero(x.size(), x.size());
  for (const auto& c : constraints) {
    const double hv = c->value(x);
    const Vector g = c->gradient(x);
    h += barrier.second_deriv(hv) * g * g.transpose() +
         barrier.deriv(hv) * c->hessian(x);
  }
  return h;
}

double BarrierStateSpec::min_h(const Vector& x) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) {
    m = std::min(m, c->value(x));
  }
  return m;
}

double dbas_next(const BarrierStateSpec& spec, const DynamicsModel& model,
                 const Vector& x, const Vector& u) {
  return spec.barrier_state(model.step(x, u));
}

SafetyReport safety_check(const BarrierStateSpec& spec,
                          const std::vector<Vector>& trajectory) {
  SafetyReport report;
  for (int k = 0; k < static_cast<int>(trajectory.size()); ++k) {
    for (int i = 0; i < static_cast<int>(spec.constraints.size()); ++i) {
      const double h = spec.constraints[i]->value(trajectory[k]);
      if (h < report.min_h) {
        report.min_h = h;
        report.worst_step = k;
        report.worst_constraint = i;
      }
    }
  }
  report.safe = report.min_h > 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// Augmented model
// ---------------------------------------------------------------------------

AugmentedModel::AugmentedModel(std::shared_ptr<const DynamicsModel> base,
                               BarrierStateSpec spec)
    : base_(std::move(base)), spec_(std::move(spec)) {
  if (spec_.constraints.empty()) {
    throw std::invalid_argument("AugmentedModel: needs at least one constraint");
  }
  if (spec_.shift && spec_.desired_state.size() > 0 &&
      spec_.min_h(spec_.desired_state) <= 0.0) {
    throw std::invalid_argument(
        "AugmentedModel: shifted barrier requires a strictly safe desired state");
  }
}

Vector AugmentedModel::augment_state(const Vector& x) const {
  Vector xw(x.size() + 1);
  xw.head(x.size()) = x;
  xw(x.size()) = spec_.barrier_state(x);
  return xw;
}

Vector AugmentedModel::step(const Vector& xw, const Vector& u) const {
  const int n = base_->state_dim();
  const Vector xn = base_->step(xw.head(n), u);
  Vector out(n + 1);
  out.head(n) = xn;
  out(n) = spec_.barrier_state(xn);
  return out;
}

Matrix AugmentedModel::jac_x(const Vector& xw, const Vector& u) const {
  const int n = base_->state_dim();
  const Vector x = xw.head(n);
  const Vector xn = base_->step(x, u);
  const Matrix fx = base_->jac_x(x, u);

  Matrix j = Matrix::Zero(n + 1, n + 1);
  j.topLeftCorner(n, n) = fx;
  j.bottomLeftCorner(1, n) =
      spec_.barrier_state_gradient(xn).transpose() * fx;
  // last column stays zero: the recursion has no w(k) dependence
  return j;
}

Matrix AugmentedModel::jac_u(const Vector& xw, const Vector& u) const {
  const int n = base_->state_dim();
  const Vector x = xw.head(n);
  const Vector xn = base_->step(x, u);
  const Matrix fu = base_->jac_u(x, u);

  Matrix j(n + 1, fu.cols());
  j.topRows(n) = fu;
  j.bottomRows(1) = spec_.barrier_state_gradient(xn).transpose() * fu;
  return j;
}

std::shared_ptr<AugmentedModel> augment(std::shared_ptr<const DynamicsModel> base,
                                        BarrierStateSpec spec) {
  return std::make_shared<AugmentedModel>(std::move(base), std::move(spec));
}

}  // namespace safeddp
