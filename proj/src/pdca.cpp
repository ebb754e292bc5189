#include "ccdc/pdca.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ccdc {

double beta_schedule(const SolverConfig& config, int k, double rho) {
  if (k < 0) throw std::invalid_argument("beta_schedule: k >= 0");
  if (config.beta0 == 0.0) return 0.0;  // DCA mode
  const double floor =
      config.beta_floor >= 0 ? config.beta_floor : (rho > 0 ? 0.0 : 1e-8);
  return std::max(config.beta0 * std::pow(config.beta_decay, k), floor);
}

const char* to_string(PdcaStatus status) {
  switch (status) {
    case PdcaStatus::converged: return "converged";
    case PdcaStatus::max_iter: return "max_iter";
    case PdcaStatus::time_limit: return "time_limit";
  }
  return "unknown";
}

double fw_gap(const ConvexFunction& g, const VectorXd& s_h, const VectorXd& x_k,
              const VectorXd& x_next) {
  return g.eval(x_k) - g.eval(x_next) - s_h.dot(x_k - x_next);
}

PdcaResult pdca_solve(const DcProgram& program, const VectorXd& x0,
                      const SolverConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(clock::now() - t_start).count();
  };

  if (x0.size() != program.n)
    throw std::invalid_argument("pdca_solve: x0 has wrong dimension");
  const double rho = program.objective.rho();
  if (rho + config.beta0 <= 0.0 && !config.allow_fw_regime)
    throw std::invalid_argument(
        "pdca_solve: rho + beta0 must be positive (set allow_fw_regime to "
        "run the beta = 0, rho = 0 case)");

  if (!check_feasibility(program, x0).feasible)
    throw SolveFailure(SolveFailure::Reason::infeasible_start,
                       "pdca_solve: starting point is infeasible");

  PdcaResult result;
  SolveTrace& trace = result.trace;
  trace.x0 = x0;
  trace.f0 = program.objective.value(x0);
  trace.status = PdcaStatus::max_iter;

  VectorXd x = x0;
  double f = trace.f0;
  const size_t nc = program.constraints.size();

  for (int k = 0; k < config.max_iter; ++k) {
    if (elapsed() > config.time_limit_s) {
      trace.status = PdcaStatus::time_limit;
      break;
    }
    const double beta = beta_schedule(config, k, rho);
    const VectorXd s_h = program.objective.h.subgradient(x);
    std::vector<VectorXd> s_H(nc);
    std::vector<double> H_k(nc);
    for (size_t c = 0; c < nc; ++c) {
      s_H[c] = constraint_subgrad_H(program.constraints[c], x);
      H_k[c] = constraint_gh(program.constraints[c], x).second;
    }

    AssembledSubproblem sub = assemble_subproblem(program, x, s_h, s_H, beta);
    QpConfig qp_config = config.qp;
    qp_config.warm_start = subproblem_feasible_point(sub, program, x);
    const QpSolution qsol = qp_solve(sub.qp, qp_config);
    if (qsol.status != QpStatus::optimal)
      throw SolveFailure(SolveFailure::Reason::subproblem_failure,
                         std::string("pdca_solve: subproblem ended with "
                                     "status ") +
                             to_string(qsol.status) + " at iteration " +
                             std::to_string(k),
                         k);

    const VectorXd x_next = qsol.x.head(program.n);
    const double f_next = program.objective.value(x_next);
    const double step = (x_next - x).norm();

    // Sufficient decrease, enforced with a small numerical slack.
    if (f_next - f > -0.5 * (rho + beta) * step * step + 1e-9)
      throw SolveFailure(
          SolveFailure::Reason::invariant_violation,
          "pdca_solve: sufficient decrease violated at iteration " +
              std::to_string(k) + " (delta f = " + std::to_string(f_next - f) +
              ")",
          k);
    if (!check_feasibility(program, x_next, 1e-6).feasible)
      throw SolveFailure(SolveFailure::Reason::feasibility_drift,
                         "pdca_solve: iterate left the feasible set at "
                         "iteration " +
                             std::to_string(k),
                         k);

    const std::vector<double> multipliers = dc_row_multipliers(sub, qsol);
    double lambda_max = 0.0;
    double compl_max = 0.0;
    for (size_t c = 0; c < nc; ++c) {
      lambda_max = std::max(lambda_max, multipliers[c]);
      const double G_next = constraint_gh(program.constraints[c], x_next).first;
      const double row_value = G_next - H_k[c] - s_H[c].dot(x_next - x);
      compl_max = std::max(compl_max, std::abs(multipliers[c] * row_value));
    }

    IterationRecord rec;
    rec.k = k;
    rec.x = x_next;
    rec.f = f_next;
    rec.step_norm = step;
    rec.beta = beta;
    rec.multiplier = lambda_max;
    rec.fw_gap = fw_gap(program.objective.g, s_h, x, x_next);
    rec.time_s = elapsed();
    rec.lin_complementarity = compl_max;
    trace.records.push_back(std::move(rec));

    const bool converged =
        std::abs(f - f_next) / std::max(1.0, std::abs(f_next)) <= config.tol_rel;
    x = x_next;
    f = f_next;
    if (converged) {
      trace.status = PdcaStatus::converged;
      break;
    }
  }

  trace.total_time_s = elapsed();
  result.x = x;
  return result;
}

KktReport kkt_report(const DcProgram& /*program*/, const SolveTrace& trace) {
  if (trace.records.empty())
    throw std::invalid_argument("kkt_report: empty trace");
  const IterationRecord& last = trace.records.back();
  return {last.step_norm, last.multiplier, last.lin_complementarity};
}

std::string trace_csv(const SolveTrace& trace) {
  std::ostringstream out;
  out << "k,f,step_norm,beta,lambda,fw_gap,time_s\n";
  char line[256];
  for (const IterationRecord& rec : trace.records) {
    std::snprintf(line, sizeof(line),
                  "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.6g\n", rec.k, rec.f,
                  rec.step_norm, rec.beta, rec.multiplier, rec.fw_gap,
                  rec.time_s);
    out << line;
  }
  return out.str();
}

void write_trace_csv(const SolveTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
  out << trace_csv(trace);
}

}  // namespace ccdc
