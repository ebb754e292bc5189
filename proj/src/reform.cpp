#include "ccdc/reform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ccdc {

std::pair<double, double> constraint_gh(const DcConstraint& c, const VectorXd& x) {
  if (const auto* sc = std::get_if<ScenarioDcConstraint>(&c))
    return gh_values(sc->split, sc->scenarios.evaluate(x));
  const auto& gc = std::get<GenericDcConstraint>(c);
  return {gc.G.eval(x), gc.H.eval(x)};
}

VectorXd constraint_subgrad_H(const DcConstraint& c, const VectorXd& x) {
  if (const auto* sc = std::get_if<ScenarioDcConstraint>(&c))
    return subgrad_H(sc->scenarios, sc->split, x);
  return std::get<GenericDcConstraint>(c).H.subgradient(x);
}

DcProgram reformulate_chance(const ChanceProblem& problem) {
  problem.validate();
  const int N = problem.scenarios.num_scenarios();
  const int M = compute_M(problem.alpha, N);
  DcSplit split = problem.weights
                      ? DcSplit::weighted(M, N, *problem.weights)
                      : DcSplit::plain(M, N);
  DcProgram program;
  program.objective = problem.objective;
  program.domain = problem.domain;
  program.n = problem.dim();
  program.constraints.push_back(
      ScenarioDcConstraint{problem.scenarios, std::move(split)});
  return program;
}

namespace {

// Coordinate bounds implied by singleton rows of the domain.
void extract_box(const Polyhedron& domain, int n, VectorXd& lo, VectorXd& hi) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  lo = VectorXd::Constant(n, -inf);
  hi = VectorXd::Constant(n, inf);
  for (int r = 0; r < domain.Gineq.rows(); ++r) {
    int nz = -1;
    bool singleton = true;
    for (int j = 0; j < n; ++j) {
      if (domain.Gineq(r, j) != 0.0) {
        if (nz >= 0) {
          singleton = false;
          break;
        }
        nz = j;
      }
    }
    if (!singleton || nz < 0) continue;
    const double coef = domain.Gineq(r, nz);
    const double bound = domain.hineq(r) / coef;
    if (coef > 0)
      hi(nz) = std::min(hi(nz), bound);
    else
      lo(nz) = std::max(lo(nz), bound);
  }
  for (int r = 0; r < domain.Aeq.rows(); ++r) {
    int nz = -1;
    bool singleton = true;
    for (int j = 0; j < n; ++j) {
      if (domain.Aeq(r, j) != 0.0) {
        if (nz >= 0) {
          singleton = false;
          break;
        }
        nz = j;
      }
    }
    if (!singleton || nz < 0) continue;
    const double value = domain.beq(r) / domain.Aeq(r, nz);
    lo(nz) = std::max(lo(nz), value);
    hi(nz) = std::min(hi(nz), value);
  }
}

}  // namespace

DcProgram reformulate_cardinality(const DcObjective& objective,
                                  const Polyhedron& domain, int K) {
  const int n = objective.dim();
  if (K < 1 || K > n - 1)
    throw std::invalid_argument("reformulate_cardinality: need 1 <= K <= n-1");
  domain.validate();

  VectorXd lo, hi;
  extract_box(domain, n, lo, hi);
  if (!lo.allFinite() || !hi.allFinite())
    throw std::invalid_argument(
        "reformulate_cardinality: domain must bound every coordinate");
  const VectorXd zmax = lo.cwiseAbs().cwiseMax(hi.cwiseAbs());

  const int nl = 2 * n;  // lifted variable (x, z)
  DcProgram program;
  program.n = nl;
  program.objective =
      DcObjective{objective.g.lifted(nl), objective.h.lifted(nl)};

  Polyhedron lifted;
  const int me = domain.num_eq();
  const int mi = domain.num_ineq();
  lifted.Aeq = MatrixXd::Zero(me, nl);
  lifted.Aeq.leftCols(n) = domain.Aeq;
  lifted.beq = domain.beq;
  lifted.Gineq = MatrixXd::Zero(mi + 3 * n, nl);
  lifted.hineq = VectorXd::Zero(mi + 3 * n);
  lifted.Gineq.topLeftCorner(mi, n) = domain.Gineq;
  lifted.hineq.head(mi) = domain.hineq;
  for (int i = 0; i < n; ++i) {
    lifted.Gineq(mi + i, i) = 1.0;             //  x_i - z_i <= 0
    lifted.Gineq(mi + i, n + i) = -1.0;
    lifted.Gineq(mi + n + i, i) = -1.0;        // -x_i - z_i <= 0
    lifted.Gineq(mi + n + i, n + i) = -1.0;
    lifted.Gineq(mi + 2 * n + i, n + i) = 1.0; //  z_i <= zmax_i
    lifted.hineq(mi + 2 * n + i) = zmax(i);
  }
  program.domain = std::move(lifted);

  // z_[n-K] <= 0 expressed over the coordinates of z: one map whose
  // bilinear part selects z_i for the i-th "scenario".
  AffineMap map;
  map.a = VectorXd::Zero(nl);
  map.b = VectorXd::Zero(n);
  map.offset = 0.0;
  map.B = MatrixXd::Zero(nl, n);
  map.B.bottomRows(n) = MatrixXd::Identity(n, n);
  ScenarioModel selector(MatrixXd::Identity(n, n), {std::move(map)});
  program.constraints.push_back(
      ScenarioDcConstraint{std::move(selector), DcSplit::plain(n - K, n)});
  return program;
}

FeasibilityReport check_feasibility(const DcProgram& program, const VectorXd& x,
                                    double tol) {
  FeasibilityReport report;
  report.constraint_values.reserve(program.constraints.size());
  bool ok = true;
  for (const DcConstraint& c : program.constraints) {
    const auto [G, H] = constraint_gh(c, x);
    report.constraint_values.push_back(G - H);
    ok = ok && (G - H <= tol);
  }
  report.eq_residual = program.domain.eq_residual(x);
  report.ineq_residual = program.domain.ineq_residual(x);
  report.feasible =
      ok && report.eq_residual <= tol && report.ineq_residual <= tol;
  return report;
}

AssembledSubproblem assemble_subproblem(const DcProgram& program,
                                        const VectorXd& x_k,
                                        const VectorXd& s_h,
                                        const std::vector<VectorXd>& s_H,
                                        double beta) {
  const int n = program.n;
  if (x_k.size() != n || s_h.size() != n)
    throw std::invalid_argument("assemble_subproblem: dimension mismatch");
  if (s_H.size() != program.constraints.size())
    throw std::invalid_argument(
        "assemble_subproblem: one concave-side subgradient per constraint");
  if (beta < 0) throw std::invalid_argument("assemble_subproblem: beta >= 0");

  AssembledSubproblem sub;
  sub.layout.n = n;

  // Variable layout and row count.
  int nv = n;
  int rows = program.domain.num_ineq();
  for (const DcConstraint& c : program.constraints) {
    rows += 1;  // linearized DC row
    if (const auto* sc = std::get_if<ScenarioDcConstraint>(&c)) {
      const int N = sc->scenarios.num_scenarios();
      const int m = sc->scenarios.num_maps();
      const int blocks = static_cast<int>(sc->split.support().size());
      nv += blocks * (N + 1);
      rows += blocks * (N * m + N);
    } else {
      const auto& gc = std::get<GenericDcConstraint>(c);
      if (gc.G.kind() == ConvexFunction::Kind::quadratic)
        throw std::invalid_argument(
            "assemble_subproblem: quadratic convex side of a generic DC "
            "constraint does not fit a QP subproblem");
    }
  }

  QuadraticProgram& qp = sub.qp;
  qp.P = MatrixXd::Zero(nv, nv);
  qp.q = VectorXd::Zero(nv);

  const ConvexFunction& g = program.objective.g;
  if (g.kind() == ConvexFunction::Kind::quadratic)
    qp.P.topLeftCorner(n, n) = 2.0 * g.A();
  if (g.kind() != ConvexFunction::Kind::zero) qp.q.head(n) = g.a0();
  qp.P.topLeftCorner(n, n).diagonal().array() += beta;
  qp.q.head(n) -= s_h + beta * x_k;

  const int me = program.domain.num_eq();
  qp.Aeq = MatrixXd::Zero(me, nv);
  qp.Aeq.leftCols(n) = program.domain.Aeq;
  qp.beq = program.domain.beq;

  qp.Gineq = MatrixXd::Zero(rows, nv);
  qp.hineq = VectorXd::Zero(rows);
  int row = 0;
  const int mi = program.domain.num_ineq();
  qp.Gineq.topLeftCorner(mi, n) = program.domain.Gineq;
  qp.hineq.head(mi) = program.domain.hineq;
  row += mi;

  int var = n;
  for (size_t c = 0; c < program.constraints.size(); ++c) {
    SubproblemLayout::Constraint lay;
    const VectorXd& sH = s_H[c];
    if (sH.size() != n)
      throw std::invalid_argument("assemble_subproblem: s_H dimension");
    const double H_k = constraint_gh(program.constraints[c], x_k).second;

    if (const auto* sc = std::get_if<ScenarioDcConstraint>(&program.constraints[c])) {
      const ScenarioModel& model = sc->scenarios;
      const int N = model.num_scenarios();
      const int m = model.num_maps();
      lay.dc_row = row;
      qp.Gineq.row(row).head(n) = -sH.transpose();
      qp.hineq(row) = H_k - sH.dot(x_k);
      for (const auto& [pos, w] : sc->split.support()) {
        SubproblemLayout::Block block;
        block.lambda_offset = var;
        block.mu_offset = var + N;
        block.top_count = N - pos + 1;
        block.weight = w;
        qp.Gineq.row(lay.dc_row).segment(var, N).setConstant(w);
        qp.Gineq(lay.dc_row, block.mu_offset) = w * block.top_count;
        var += N + 1;
        lay.blocks.push_back(block);
      }
      ++row;
      for (const auto& block : lay.blocks) {
        for (int i = 0; i < N; ++i) {
          for (int j = 0; j < m; ++j) {
            qp.Gineq.row(row).head(n) = model.map_gradient(i, j).transpose();
            qp.Gineq(row, block.lambda_offset + i) = -1.0;
            qp.Gineq(row, block.mu_offset) = -1.0;
            qp.hineq(row) = -model.map_offset(i, j);
            ++row;
          }
        }
        for (int i = 0; i < N; ++i) {
          qp.Gineq(row, block.lambda_offset + i) = -1.0;
          qp.hineq(row) = 0.0;
          ++row;
        }
      }
    } else {
      const auto& gc = std::get<GenericDcConstraint>(program.constraints[c]);
      lay.dc_row = row;
      VectorXd coef = -sH;
      if (gc.G.kind() == ConvexFunction::Kind::linear) coef += gc.G.a0();
      qp.Gineq.row(row).head(n) = coef.transpose();
      qp.hineq(row) = H_k - sH.dot(x_k);
      ++row;
    }
    sub.layout.constraints.push_back(std::move(lay));
  }
  return sub;
}

VectorXd subproblem_feasible_point(const AssembledSubproblem& sub,
                                   const DcProgram& program,
                                   const VectorXd& x_k) {
  VectorXd v = VectorXd::Zero(sub.qp.nv());
  v.head(sub.layout.n) = x_k;
  for (size_t c = 0; c < program.constraints.size(); ++c) {
    const auto* sc = std::get_if<ScenarioDcConstraint>(&program.constraints[c]);
    if (!sc) continue;
    const VectorXd values = sc->scenarios.evaluate(x_k);
    const int N = sc->scenarios.num_scenarios();
    for (const auto& block : sub.layout.constraints[c].blocks) {
      const double mu = kth_smallest(values, N - block.top_count + 1);
      v(block.mu_offset) = mu;
      v.segment(block.lambda_offset, N) =
          (values.array() - mu).cwiseMax(0.0);
    }
  }
  return v;
}

std::vector<double> dc_row_multipliers(const AssembledSubproblem& sub,
                                       const QpSolution& sol) {
  std::vector<double> mult;
  mult.reserve(sub.layout.constraints.size());
  for (const auto& lay : sub.layout.constraints)
    mult.push_back(sol.z_ineq(lay.dc_row));
  return mult;
}

}  // namespace ccdc
