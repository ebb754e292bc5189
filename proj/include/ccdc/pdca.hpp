#pragma once

#include <string>
#include <vector>

#include "ccdc/errors.hpp"
#include "ccdc/reform.hpp"

// The proximal DC algorithm: linearize the concave parts at the current
// iterate, solve the convex subproblem through the interior-point engine,
// and repeat under a non-increasing beta schedule. Every iterate stays
// feasible; sufficient decrease and feasibility are enforced as runtime
// invariants, not just assumed.

namespace ccdc {

struct SolverConfig {
  double beta0 = 1.0;
  double beta_decay = 0.25;
  double beta_floor = -1.0;  // < 0 resolves to 1e-8 when rho = 0, else 0
  double tol_rel = 1e-6;
  int max_iter = 1000;
  double time_limit_s = 1800.0;
  bool allow_fw_regime = false;  // permit rho + beta0 = 0
  QpConfig qp;
};

/// Proximal weight at iteration k: beta0 * decay^k, floored. beta0 = 0 is
/// DCA mode and stays exactly zero.
double beta_schedule(const SolverConfig& config, int k, double rho = 0.0);

enum class PdcaStatus { converged, max_iter, time_limit };

const char* to_string(PdcaStatus status);

struct IterationRecord {
  int k = 0;
  VectorXd x;        // iterate x^{k+1}
  double f = 0;      // f(x^{k+1})
  double step_norm = 0;
  double beta = 0;
  double multiplier = 0;  // largest DC-row multiplier
  double fw_gap = 0;      // d_k
  double time_s = 0;
  double lin_complementarity = 0;
};

struct SolveTrace {
  VectorXd x0;
  double f0 = 0;
  std::vector<IterationRecord> records;
  PdcaStatus status = PdcaStatus::max_iter;
  double total_time_s = 0;
};

struct PdcaResult {
  VectorXd x;
  SolveTrace trace;
};

PdcaResult pdca_solve(const DcProgram& program, const VectorXd& x0,
                      const SolverConfig& config = {});

/// Linearized decrease of the convex part along the step, the d_k of the
/// Frank-Wolfe view: g(x_k) - g(x_next) - s_h.(x_k - x_next).
double fw_gap(const ConvexFunction& g, const VectorXd& s_h, const VectorXd& x_k,
              const VectorXd& x_next);

struct KktReport {
  double step_norm_final = 0;
  double multiplier_final = 0;
  double complementarity = 0;
};

KktReport kkt_report(const DcProgram& program, const SolveTrace& trace);

void write_trace_csv(const SolveTrace& trace, const std::string& path);
std::string trace_csv(const SolveTrace& trace);

}  // namespace ccdc
