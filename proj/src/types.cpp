#include "ccdc/types.hpp"

#include <cmath>

namespace ccdc {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

void require_finite(const VectorXd& x, const char* what) {
  if (!x.allFinite()) throw std::invalid_argument(what);
}

}  // namespace

ScenarioModel::ScenarioModel(MatrixXd samples, std::vector<AffineMap> maps)
    : samples_(std::move(samples)), maps_(std::move(maps)) {
  N_ = static_cast<int>(samples_.rows());
  d_ = static_cast<int>(samples_.cols());
  require(N_ >= 2, "ScenarioModel: need at least 2 scenarios");
  require(!maps_.empty(), "ScenarioModel: need at least one constraint map");
  require(samples_.allFinite(), "ScenarioModel: samples must be finite");
  n_ = static_cast<int>(maps_.front().a.size());
  for (const AffineMap& map : maps_) {
    require(map.a.size() == n_, "ScenarioModel: inconsistent map dimension");
    require(map.b.size() == d_, "ScenarioModel: map b incompatible with sample dim");
    if (map.has_bilinear())
      require(map.B.rows() == n_ && map.B.cols() == d_,
              "ScenarioModel: bilinear term must be n x d");
  }
  xi_off_.reserve(maps_.size());
  for (const AffineMap& map : maps_)
    xi_off_.push_back((samples_ * map.b).array() + map.offset);
  m_ = static_cast<int>(maps_.size());
}

VectorXd ScenarioModel::evaluate(const VectorXd& x) const {
  VectorXi piece;
  return evaluate_with_argmax(x, piece);
}

VectorXd ScenarioModel::evaluate_with_argmax(const VectorXd& x, VectorXi& piece) const {
  require(x.size() == n_, "ScenarioModel::evaluate: x has wrong dimension");
  require_finite(x, "ScenarioModel::evaluate: x must be finite");
  VectorXd values = VectorXd::Constant(N_, -std::numeric_limits<double>::infinity());
  piece = VectorXi::Zero(N_);
  for (int j = 0; j < m_; ++j) {
    const double ax = maps_[j].a.dot(x);
    VectorXd vj = xi_off_[j].array() + ax;
    if (maps_[j].has_bilinear()) vj += samples_ * (maps_[j].B.transpose() * x);
    for (int i = 0; i < N_; ++i) {
      if (vj(i) > values(i)) {  // strict: keeps the smallest attaining index
        values(i) = vj(i);
        piece(i) = j;
      }
    }
  }
  return values;
}

VectorXd ScenarioModel::map_gradient(int scenario, int map) const {
  const AffineMap& m = maps_[map];
  if (!m.has_bilinear()) return m.a;
  return m.a + m.B * samples_.row(scenario).transpose();
}

VectorXd evaluate_scenarios(const ScenarioModel& model, const VectorXd& x) {
  return model.evaluate(x);
}

double in_sample_probability(const ScenarioModel& model, const VectorXd& x,
                             double tol) {
  const VectorXd values = model.evaluate(x);
  const auto satisfied = (values.array() <= tol).count();
  return static_cast<double>(satisfied) / model.num_scenarios();
}

ConvexFunction ConvexFunction::zero(int n) {
  ConvexFunction f;
  f.kind_ = Kind::zero;
  f.n_ = n;
  return f;
}

ConvexFunction ConvexFunction::linear(VectorXd a0) {
  ConvexFunction f;
  f.kind_ = Kind::linear;
  f.n_ = static_cast<int>(a0.size());
  f.a0_ = std::move(a0);
  require_finite(f.a0_, "ConvexFunction::linear: coefficients must be finite");
  return f;
}

ConvexFunction ConvexFunction::quadratic(MatrixXd A, VectorXd a0) {
  ConvexFunction f;
  f.kind_ = Kind::quadratic;
  f.n_ = static_cast<int>(a0.size());
  require(A.rows() == f.n_ && A.cols() == f.n_,
          "ConvexFunction::quadratic: A must be n x n");
  require(A.allFinite() && a0.allFinite(),
          "ConvexFunction::quadratic: data must be finite");
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12 * (1.0 + A.cwiseAbs().maxCoeff()),
          "ConvexFunction::quadratic: A must be symmetric");
  f.A_ = 0.5 * (A + A.transpose());
  f.a0_ = std::move(a0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(f.A_, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  require(lmin >= -1e-8 * (1.0 + f.A_.cwiseAbs().maxCoeff()),
          "ConvexFunction::quadratic: A must be positive semidefinite");
  f.rho_ = std::max(0.0, 2.0 * lmin);
  return f;
}

double ConvexFunction::eval(const VectorXd& x) const {
  require(x.size() == n_, "ConvexFunction::eval: x has wrong dimension");
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::linear: return a0_.dot(x);
    case Kind::quadratic: return x.dot(A_ * x) + a0_.dot(x);
  }
  return 0.0;
}

VectorXd ConvexFunction::subgradient(const VectorXd& x) const {
  require(x.size() == n_, "ConvexFunction::subgradient: x has wrong dimension");
  switch (kind_) {
    case Kind::zero: return VectorXd::Zero(n_);
    case Kind::linear: return a0_;
    case Kind::quadratic: return 2.0 * (A_ * x) + a0_;
  }
  return VectorXd::Zero(n_);
}

ConvexFunction ConvexFunction::lifted(int new_dim) const {
  require(new_dim >= n_, "ConvexFunction::lifted: cannot shrink dimension");
  switch (kind_) {
    case Kind::zero: return zero(new_dim);
    case Kind::linear: {
      VectorXd a = VectorXd::Zero(new_dim);
      a.head(n_) = a0_;
      return linear(std::move(a));
    }
    case Kind::quadratic: {
      MatrixXd A = MatrixXd::Zero(new_dim, new_dim);
      A.topLeftCorner(n_, n_) = A_;
      VectorXd a = VectorXd::Zero(new_dim);
      a.head(n_) = a0_;
      return quadratic(std::move(A), std::move(a));
    }
  }
  return zero(new_dim);
}

double objective_value(const DcObjective& obj, const VectorXd& x) {
  return obj.value(x);
}

std::pair<VectorXd, VectorXd> objective_subgradients(const DcObjective& obj,
                                                     const VectorXd& x) {
  return {obj.g.subgradient(x), obj.h.subgradient(x)};
}

Polyhedron Polyhedron::box(const VectorXd& lo, const VectorXd& hi) {
  require(lo.size() == hi.size(), "Polyhedron::box: bound sizes differ");
  const int n = static_cast<int>(lo.size());
  Polyhedron p;
  p.Aeq.resize(0, n);
  p.beq.resize(0);
  p.Gineq.resize(2 * n, n);
  p.hineq.resize(2 * n);
  p.Gineq.topRows(n) = MatrixXd::Identity(n, n);
  p.hineq.head(n) = hi;
  p.Gineq.bottomRows(n) = -MatrixXd::Identity(n, n);
  p.hineq.tail(n) = -lo;
  return p;
}

Polyhedron Polyhedron::free_space(int n) {
  Polyhedron p;
  p.Aeq.resize(0, n);
  p.beq.resize(0);
  p.Gineq.resize(0, n);
  p.hineq.resize(0);
  return p;
}

int Polyhedron::dim() const {
  return static_cast<int>(Aeq.rows() > 0 ? Aeq.cols() : Gineq.cols());
}

void Polyhedron::validate() const {
  require(Aeq.rows() == beq.size(), "Polyhedron: Aeq/beq row mismatch");
  require(Gineq.rows() == hineq.size(), "Polyhedron: Gineq/hineq row mismatch");
  if (Aeq.rows() > 0 && Gineq.rows() > 0)
    require(Aeq.cols() == Gineq.cols(), "Polyhedron: Aeq/Gineq column mismatch");
}

double Polyhedron::eq_residual(const VectorXd& x) const {
  if (Aeq.rows() == 0) return 0.0;
  return (Aeq * x - beq).cwiseAbs().maxCoeff();
}

double Polyhedron::ineq_residual(const VectorXd& x) const {
  if (Gineq.rows() == 0) return 0.0;
  return std::max(0.0, (Gineq * x - hineq).maxCoeff());
}

bool Polyhedron::contains(const VectorXd& x, double tol) const {
  return eq_residual(x) <= tol && ineq_residual(x) <= tol;
}

void ChanceProblem::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("ChanceProblem: alpha must lie in (0,1)");
  domain.validate();
  require(objective.g.dim() == scenarios.dim_x() &&
              objective.h.dim() == scenarios.dim_x(),
          "ChanceProblem: objective dimension mismatch");
  require(domain.dim() == scenarios.dim_x() ||
              (domain.num_eq() == 0 && domain.num_ineq() == 0),
          "ChanceProblem: domain dimension mismatch");
  if (weights) {
    require(weights->size() == scenarios.num_scenarios(),
            "ChanceProblem: weights must have one entry per scenario");
    require(weights->minCoeff() >= 0.0 && weights->maxCoeff() <= 1.0,
            "ChanceProblem: weights must lie in [0,1]");
    require(std::abs(weights->sum() - 1.0) <= 1e-10,
            "ChanceProblem: weights must sum to one");
  }
}

}  // namespace ccdc
