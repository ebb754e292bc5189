#pragma once

#include <vector>

#include "ccdc/errors.hpp"
#include "ccdc/qp.hpp"
#include "ccdc/types.hpp"

// CVaR convex approximation (initializer and conservative baseline) and the
// exact brute-force scenario-subset oracle for desk-scale global optima.

namespace ccdc {

struct CvarResult {
  VectorXd x0;
  QpStatus status = QpStatus::numerical;
  double objective = 0;  // g(x0); the concave part is dropped
};

/// Epigraph CVaR program over (x, t, u):
///   min g(x)  s.t.  x in X,  t + (1/(alpha N)) sum_i u_i <= 0,
///                   u_i >= c_j(x, xi_i) - t,  u_i >= 0.
/// Any CVaR-feasible point satisfies the quantile constraint; this is
/// verified before returning. For DC objectives the concave part h is
/// dropped so the initializer stays convex.
CvarResult cvar_solve(const ChanceProblem& problem, const QpConfig& config = {});

struct OracleResult {
  VectorXd x_star;
  double f_star = 0;
  std::vector<int> subset;  // enforced scenario indices, ascending
  int solves = 0;
};

/// Exact solver of the sample quantile problem by enumeration: one convex
/// solve per size-M scenario subset, best feasible optimum wins (ties by
/// lexicographic subset). Requires h = 0 and C(N, M) <= cap.
OracleResult saa_oracle(const ChanceProblem& problem, long long cap = 5000,
                        const QpConfig& config = {});

/// Binomial count clipped at limit+1 to keep the budget check cheap.
long long subset_count(int N, int M, long long limit);

}  // namespace ccdc
