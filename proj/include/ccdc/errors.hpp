#pragma once

#include <stdexcept>
#include <string>

namespace ccdc {

/// Runtime failure of a solve pipeline, with a machine-readable reason.
class SolveFailure : public std::runtime_error {
 public:
  enum class Reason {
    infeasible_start,
    subproblem_failure,
    invariant_violation,
    feasibility_drift,
    no_feasible_start,
    budget_exceeded,
    infeasible_problem,
    generation_failure,
    numerical,
  };

  SolveFailure(Reason reason, const std::string& message, int iteration = -1)
      : std::runtime_error(message), reason(reason), iteration(iteration) {}

  Reason reason;
  int iteration;  // -1 when not tied to an iteration
};

}  // namespace ccdc
