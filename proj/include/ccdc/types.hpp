#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

// Core problem data: scenario constraint models, convex function atoms,
// DC objectives, polyhedral domains, and the chance-constrained program
// container. All types are immutable after construction and safe to share
// across threads.

namespace ccdc {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Feasibility tolerance used everywhere a "<= 0" test appears.
inline constexpr double kFeasTol = 1e-8;

/// One affine constraint map c(x, xi) = a.x + x'B xi + b.xi + d.
/// B (n x d) is the optional bilinear coupling; an empty matrix means no
/// coupling, which covers constraints whose x-slope does not depend on the
/// sample (e.g. transportation demands). Portfolio-style constraints
/// R - xi.x use a = 0, B = -I.
struct AffineMap {
  VectorXd a;        // length n
  VectorXd b;        // length d
  double offset = 0; // scalar d_j in the instance schema
  MatrixXd B;        // n x d or empty

  bool has_bilinear() const { return B.size() > 0; }
};

/// N scenario samples plus m affine-in-x constraint maps. Evaluates
/// C(x, xi_i) = max_j c_j(x, xi_i) for every scenario at once.
class ScenarioModel {
 public:
  ScenarioModel(MatrixXd samples, std::vector<AffineMap> maps);

  int dim_x() const { return n_; }
  int num_maps() const { return m_; }
  int num_scenarios() const { return N_; }
  int dim_xi() const { return d_; }
  const MatrixXd& samples() const { return samples_; }
  const std::vector<AffineMap>& maps() const { return maps_; }

  /// Per-scenario worst-case values C(x, xi_i), i = 0..N-1.
  VectorXd evaluate(const VectorXd& x) const;

  /// Same as evaluate() but also records, per scenario, the smallest map
  /// index attaining the max (deterministic tie-break).
  VectorXd evaluate_with_argmax(const VectorXd& x, VectorXi& piece) const;

  /// Gradient in x of map j at scenario i: a_j + B_j xi_i.
  VectorXd map_gradient(int scenario, int map) const;

  /// Constant part of map j at scenario i: b_j.xi_i + d_j.
  double map_offset(int scenario, int map) const { return xi_off_[map](scenario); }

 private:
  MatrixXd samples_;
  std::vector<AffineMap> maps_;
  std::vector<VectorXd> xi_off_; // per map: samples * b_j + d_j, length N
  int n_, m_, N_, d_;
};

VectorXd evaluate_scenarios(const ScenarioModel& model, const VectorXd& x);

/// Fraction of scenarios with C(x, xi_i) <= tol.
double in_sample_probability(const ScenarioModel& model, const VectorXd& x,
                             double tol = kFeasTol);

/// Convex function over R^n, one of: zero, linear a0.x, or quadratic
/// x'Ax + a0.x with A symmetric PSD. rho is a certified strong-convexity
/// modulus (2*lambda_min(A) for the quadratic kind, 0 otherwise), computed
/// once at construction.
class ConvexFunction {
 public:
  enum class Kind { zero, linear, quadratic };

  static ConvexFunction zero(int n);
  static ConvexFunction linear(VectorXd a0);
  static ConvexFunction quadratic(MatrixXd A, VectorXd a0);

  Kind kind() const { return kind_; }
  int dim() const { return n_; }
  double rho() const { return rho_; }
  const MatrixXd& A() const { return A_; }
  const VectorXd& a0() const { return a0_; }
  bool is_zero() const { return kind_ == Kind::zero; }

  double eval(const VectorXd& x) const;
  VectorXd subgradient(const VectorXd& x) const;

  /// Same function on a larger space, extended by zeros on the new
  /// trailing coordinates.
  ConvexFunction lifted(int new_dim) const;

 private:
  ConvexFunction() = default;
  Kind kind_ = Kind::zero;
  int n_ = 0;
  double rho_ = 0;
  MatrixXd A_;  // quadratic only
  VectorXd a0_; // linear and quadratic
};

/// DC objective f = g - h with both parts convex.
struct DcObjective {
  ConvexFunction g;
  ConvexFunction h;

  double value(const VectorXd& x) const { return g.eval(x) - h.eval(x); }
  double rho() const { return g.rho(); }
  int dim() const { return g.dim(); }
};

double objective_value(const DcObjective& obj, const VectorXd& x);
std::pair<VectorXd, VectorXd> objective_subgradients(const DcObjective& obj,
                                                     const VectorXd& x);

/// Polyhedral domain {x : Aeq x = beq, Gineq x <= hineq}. Bounds are
/// ordinary inequality rows.
struct Polyhedron {
  MatrixXd Aeq;    // me x n (me may be 0)
  VectorXd beq;
  MatrixXd Gineq;  // mi x n
  VectorXd hineq;

  static Polyhedron box(const VectorXd& lo, const VectorXd& hi);
  static Polyhedron free_space(int n);

  int dim() const;
  int num_eq() const { return static_cast<int>(beq.size()); }
  int num_ineq() const { return static_cast<int>(hineq.size()); }

  void validate() const;
  double eq_residual(const VectorXd& x) const;
  double ineq_residual(const VectorXd& x) const;
  bool contains(const VectorXd& x, double tol = kFeasTol) const;
};

/// The sample-based chance constrained program: min f(x) subject to
/// x in domain and at least (1 - alpha) of the scenarios satisfied.
/// Optional simplex weights switch the quantile to an L-estimator.
struct ChanceProblem {
  DcObjective objective;
  Polyhedron domain;
  ScenarioModel scenarios;
  double alpha = 0.1;
  std::optional<VectorXd> weights;

  void validate() const;
  int dim() const { return scenarios.dim_x(); }
};

}  // namespace ccdc
