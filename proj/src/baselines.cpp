#include "ccdc/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "ccdc/quantile.hpp"

namespace ccdc {

CvarResult cvar_solve(const ChanceProblem& problem, const QpConfig& config) {
  problem.validate();
  const ScenarioModel& model = problem.scenarios;
  const int n = model.dim_x();
  const int N = model.num_scenarios();
  const int m = model.num_maps();
  const int nv = n + 1 + N;  // (x, t, u)
  const int it = n;
  const int iu = n + 1;

  QuadraticProgram qp;
  qp.P = MatrixXd::Zero(nv, nv);
  qp.q = VectorXd::Zero(nv);
  const ConvexFunction& g = problem.objective.g;
  if (g.kind() == ConvexFunction::Kind::quadratic)
    qp.P.topLeftCorner(n, n) = 2.0 * g.A();
  if (g.kind() != ConvexFunction::Kind::zero) qp.q.head(n) = g.a0();

  const int me = problem.domain.num_eq();
  const int mi = problem.domain.num_ineq();
  qp.Aeq = MatrixXd::Zero(me, nv);
  qp.Aeq.leftCols(n) = problem.domain.Aeq;
  qp.beq = problem.domain.beq;

  const int rows = mi + 1 + N * m + N;
  qp.Gineq = MatrixXd::Zero(rows, nv);
  qp.hineq = VectorXd::Zero(rows);
  qp.Gineq.topLeftCorner(mi, n) = problem.domain.Gineq;
  qp.hineq.head(mi) = problem.domain.hineq;
  int row = mi;

  // t + (1/(alpha N)) sum u <= 0
  qp.Gineq(row, it) = 1.0;
  qp.Gineq.row(row).segment(iu, N).setConstant(1.0 / (problem.alpha * N));
  ++row;
  // c_j(x, xi_i) - t - u_i <= 0
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < m; ++j) {
      qp.Gineq.row(row).head(n) = model.map_gradient(i, j).transpose();
      qp.Gineq(row, it) = -1.0;
      qp.Gineq(row, iu + i) = -1.0;
      qp.hineq(row) = -model.map_offset(i, j);
      ++row;
    }
  }
  // u >= 0
  for (int i = 0; i < N; ++i) {
    qp.Gineq(row, iu + i) = -1.0;
    ++row;
  }

  const QpSolution sol = qp_solve(qp, config);
  if (sol.status == QpStatus::infeasible)
    throw SolveFailure(SolveFailure::Reason::no_feasible_start,
                       "cvar_solve: CVaR approximation is infeasible");
  if (sol.status != QpStatus::optimal)
    throw SolveFailure(SolveFailure::Reason::numerical,
                       std::string("cvar_solve: solver status ") +
                           to_string(sol.status));

  CvarResult result;
  result.x0 = sol.x.head(n);
  result.status = sol.status;
  result.objective = g.eval(result.x0);

  // CVaR dominates the empirical quantile; verify before handing the point
  // to the DC pipeline.
  const int M = compute_M(problem.alpha, N);
  const double var = kth_smallest(model.evaluate(result.x0), M);
  if (var > kFeasTol)
    throw SolveFailure(SolveFailure::Reason::numerical,
                       "cvar_solve: returned point violates the quantile "
                       "constraint (VaR = " +
                           std::to_string(var) + ")");
  return result;
}

long long subset_count(int N, int M, long long limit) {
  M = std::min(M, N - M);
  if (M < 0) return 0;
  long long count = 1;
  for (int i = 1; i <= M; ++i) {
    count = count * (N - M + i) / i;  // exact: product of i consecutive ints
    if (count > limit) return limit + 1;
  }
  return count;
}

OracleResult saa_oracle(const ChanceProblem& problem, long long cap,
                        const QpConfig& config) {
  problem.validate();
  if (!problem.objective.h.is_zero())
    throw std::invalid_argument("saa_oracle: requires a convex objective (h = 0)");
  const ScenarioModel& model = problem.scenarios;
  const int n = model.dim_x();
  const int N = model.num_scenarios();
  const int m = model.num_maps();
  const int M = compute_M(problem.alpha, N);
  if (subset_count(N, M, cap) > cap)
    throw SolveFailure(SolveFailure::Reason::budget_exceeded,
                       "saa_oracle: C(N, M) exceeds the enumeration budget");

  QuadraticProgram qp;
  const int mi = problem.domain.num_ineq();
  qp.P = MatrixXd::Zero(n, n);
  qp.q = VectorXd::Zero(n);
  const ConvexFunction& g = problem.objective.g;
  if (g.kind() == ConvexFunction::Kind::quadratic) qp.P = 2.0 * g.A();
  if (g.kind() != ConvexFunction::Kind::zero) qp.q = g.a0();
  qp.Aeq = problem.domain.Aeq;
  qp.beq = problem.domain.beq;
  qp.Gineq = MatrixXd::Zero(mi + M * m, n);
  qp.hineq = VectorXd::Zero(mi + M * m);
  qp.Gineq.topRows(mi) = problem.domain.Gineq;
  qp.hineq.head(mi) = problem.domain.hineq;

  OracleResult best;
  best.f_star = std::numeric_limits<double>::infinity();
  std::vector<int> subset(M);
  for (int i = 0; i < M; ++i) subset[i] = i;

  while (true) {
    int row = mi;
    for (int idx : subset) {
      for (int j = 0; j < m; ++j) {
        qp.Gineq.row(row) = model.map_gradient(idx, j).transpose();
        qp.hineq(row) = -model.map_offset(idx, j);
        ++row;
      }
    }
    const QpSolution sol = qp_solve(qp, config);
    ++best.solves;
    if (sol.status == QpStatus::optimal) {
      const double f = problem.objective.value(sol.x);
      if (f < best.f_star) {
        best.f_star = f;
        best.x_star = sol.x;
        best.subset = subset;
      }
    }

    // next lexicographic combination
    int pos = M - 1;
    while (pos >= 0 && subset[pos] == N - M + pos) --pos;
    if (pos < 0) break;
    ++subset[pos];
    for (int i = pos + 1; i < M; ++i) subset[i] = subset[i - 1] + 1;
  }

  if (!best.x_star.size())
    throw SolveFailure(SolveFailure::Reason::infeasible_problem,
                       "saa_oracle: every scenario subset is infeasible");
  return best;
}

}  // namespace ccdc
