#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ccdc/types.hpp"

// Self-contained primal-dual interior-point solver for dense convex
// quadratic programs with linear equalities and inequalities:
//
//   min 1/2 x'Px + q'x   s.t.  Aeq x = beq,  Gineq x <= hineq.
//
// Mehrotra-style predictor-corrector on the condensed symmetric
// quasi-definite KKT system, factored by an unpivoted LDL' with static
// regularization and refactorization retries, one step of iterative
// refinement per direction, and an active-set polish of the final iterate.
// A solver run is single-threaded and deterministic.

namespace ccdc {

struct QuadraticProgram {
  MatrixXd P;      // nv x nv symmetric PSD (may be zero)
  VectorXd q;
  MatrixXd Aeq;    // me x nv
  VectorXd beq;
  MatrixXd Gineq;  // mi x nv
  VectorXd hineq;

  int nv() const { return static_cast<int>(q.size()); }
  int num_eq() const { return static_cast<int>(beq.size()); }
  int num_ineq() const { return static_cast<int>(hineq.size()); }

  double objective(const VectorXd& x) const {
    return 0.5 * x.dot(P * x) + q.dot(x);
  }
  void validate() const;
};

enum class QpStatus { optimal, infeasible, unbounded, max_iter, numerical };

const char* to_string(QpStatus status);

struct QpSolution {
  VectorXd x;
  VectorXd y_eq;    // equality multipliers
  VectorXd z_ineq;  // inequality multipliers, >= 0
  QpStatus status = QpStatus::numerical;
  double primal_res = 0;
  double dual_res = 0;
  double gap = 0;
  int iters = 0;
  bool polished = false;
  std::vector<double> merit_history;  // residual merit per accepted iterate
};

struct QpConfig {
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  int max_iter = 200;
  double reg = 1e-9;   // static regularization of the KKT factorization
  int retries = 3;     // refactorization retries at 10x regularization
  bool polish = true;
  std::optional<VectorXd> warm_start;  // primal shift for nearby solves
};

QpSolution qp_solve(const QuadraticProgram& qp, const QpConfig& config = {});

QpSolution lp_solve(const VectorXd& q, const MatrixXd& Aeq, const VectorXd& beq,
                    const MatrixXd& Gineq, const VectorXd& hineq,
                    const QpConfig& config = {});

/// Unpivoted LDL' factorization for symmetric quasi-definite matrices.
/// Fails (returns false) on a vanishing pivot; the caller bumps the
/// regularization and refactors.
class LdltQuasiDefinite {
 public:
  bool factorize(const MatrixXd& K);
  VectorXd solve(const VectorXd& rhs) const;

 private:
  MatrixXd L_;
  VectorXd D_;
  int n_ = 0;
};

}  // namespace ccdc
