#pragma once

#include <string>

#include "ccdc/bench.hpp"
#include "ccdc/pdca.hpp"
#include "ccdc/qp.hpp"
#include "ccdc/types.hpp"

// JSON front door: the instance document consumed by the CLI, solution
// records, benchmark specs, and the optional QP debug dump. Parse errors
// name the offending field.

namespace ccdc {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& field, const std::string& message)
      : std::runtime_error("field '" + field + "': " + message), field(field) {}
  std::string field;
};

/// Instance schema:
/// { n, m, d, alpha, samples (N x d), maps [{a, b, d, B?}],
///   objective {g {kind, ...}, h {kind, ...}},
///   domain {Aeq, beq, Gineq, hineq}, weights? }
ChanceProblem parse_instance(const std::string& json_text);
ChanceProblem load_instance(const std::string& path);
std::string instance_to_json(const ChanceProblem& problem);
void save_instance(const ChanceProblem& problem, const std::string& path);

struct SolutionRecord {
  VectorXd x;
  double fval = 0;
  double prob = 0;
  std::string status;
  int iters = 0;
  double time_s = 0;
};

std::string solution_to_json(const SolutionRecord& record);
void save_solution(const SolutionRecord& record, const std::string& path);

BenchSpec parse_bench_spec(const std::string& json_text);
BenchSpec load_bench_spec(const std::string& path);

/// Debug dump of a subproblem in the same number format as the instance
/// schema, for external cross-checking.
std::string qp_to_json(const QuadraticProgram& qp);
void save_qp(const QuadraticProgram& qp, const std::string& path);

}  // namespace ccdc
