#pragma once

#include <variant>
#include <vector>

#include "ccdc/qp.hpp"
#include "ccdc/quantile.hpp"
#include "ccdc/types.hpp"

// Builds the DC-constrained DC program from a chance problem (or a
// cardinality problem) and assembles each proximal-DC convex subproblem in
// canonical QP form through the LP-duality rewrite of the top-k sums.

namespace ccdc {

/// Scenario-quantile DC constraint G(x) - H(x) <= 0 with G and H weighted
/// sums of top-k sums of the scenario values.
struct ScenarioDcConstraint {
  ScenarioModel scenarios;
  DcSplit split;
};

/// Generic DC constraint built from convex-function oracles. The convex
/// side G must be affine for the subproblem to stay a QP.
struct GenericDcConstraint {
  ConvexFunction G;
  ConvexFunction H;
};

using DcConstraint = std::variant<ScenarioDcConstraint, GenericDcConstraint>;

struct DcProgram {
  DcObjective objective;
  Polyhedron domain;
  std::vector<DcConstraint> constraints;
  int n = 0;
};

/// (G, H) values of one constraint at x.
std::pair<double, double> constraint_gh(const DcConstraint& c, const VectorXd& x);

/// One element of the subdifferential of the constraint's concave side.
VectorXd constraint_subgrad_H(const DcConstraint& c, const VectorXd& x);

/// Quantile reformulation of the chance constraint. M = N degenerates to
/// the all-scenario convex case, encoded as a split with T = 0 so the
/// concave side vanishes identically.
DcProgram reformulate_chance(const ChanceProblem& problem);

/// Cardinality frontend: lifts to (x, z) in R^{2n}, couples |x_i| <= z_i,
/// and constrains the (n-K)-th smallest entry of z to be nonpositive via
/// the same top-k machinery. Requires a coordinate-wise bounded domain.
DcProgram reformulate_cardinality(const DcObjective& objective,
                                  const Polyhedron& domain, int K);

struct FeasibilityReport {
  std::vector<double> constraint_values;  // G - H per constraint
  double eq_residual = 0;
  double ineq_residual = 0;
  bool feasible = false;
};

FeasibilityReport check_feasibility(const DcProgram& program, const VectorXd& x,
                                    double tol = kFeasTol);

/// Variable/row layout of an assembled subproblem: after the n decision
/// variables, each scenario constraint owns one (lambda, mu) dual block per
/// nonzero weight level.
struct SubproblemLayout {
  struct Block {
    int lambda_offset;
    int mu_offset;
    int top_count;  // k of the block's top-k sum
    double weight;
  };
  struct Constraint {
    int dc_row;  // row carrying the linearized DC constraint
    std::vector<Block> blocks;
  };
  int n = 0;
  std::vector<Constraint> constraints;
};

struct AssembledSubproblem {
  QuadraticProgram qp;
  SubproblemLayout layout;
};

/// Canonical QP of the proximal linearized subproblem at x_k:
///   min g(x) - s_h.x + (beta/2)|x - x_k|^2   (constants dropped)
/// subject to the domain, and per scenario constraint the dual rewrite
///   sum_b w_b (1'lambda_b + k_b mu_b) - H(x_k) - s_H.(x - x_k) <= 0,
///   c_j(x, xi_i) - lambda_b_i - mu_b <= 0,   lambda_b >= 0.
AssembledSubproblem assemble_subproblem(const DcProgram& program,
                                        const VectorXd& x_k,
                                        const VectorXd& s_h,
                                        const std::vector<VectorXd>& s_H,
                                        double beta);

/// A feasible point of the assembled subproblem built from a feasible x_k:
/// the decision part is x_k and every dual block gets its optimal
/// (lambda, mu) = (max(v - mu*, 0), k-th largest of v). Doubles as the
/// interior-point warm start.
VectorXd subproblem_feasible_point(const AssembledSubproblem& sub,
                                   const DcProgram& program,
                                   const VectorXd& x_k);

/// Per-constraint multipliers of the linearized DC rows.
std::vector<double> dc_row_multipliers(const AssembledSubproblem& sub,
                                       const QpSolution& sol);

}  // namespace ccdc
