#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ccdc/types.hpp"

// Synthetic instance generators at desk scale and the experiment runner
// that produces fval/time/prob report tables.

namespace ccdc {

/// Deterministic random source: mt19937_64 bits mapped to doubles by hand
/// so draws do not depend on the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();   // standard normal, Box-Muller
  int uniform_int(int lo, int hi);  // inclusive

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0;
};

/// VaR-constrained mean-variance portfolio instance with a 3-factor return
/// model: g(x) = gamma x'Sx - mu'x, chance constraint xi'x >= R, budget
/// simplex with a per-asset cap.
ChanceProblem gen_portfolio(int n, int N, std::uint64_t seed);

/// Probabilistic transportation instance over x in R^{n*m} (row-major
/// flattened): demands must be covered jointly with probability 1 - alpha,
/// capacities bound each supplier's row sum. The nonconvex variant adds a
/// concave cost discount encoded as h(x) = sum c_ij/(2 theta_i) x_ij^2.
ChanceProblem gen_transport(int n, int m, int N, std::uint64_t seed,
                            bool nonconvex);

/// Cardinality demo data: separable quadratic pull toward a random target
/// inside a box.
struct CardinalityInstance {
  DcObjective objective;
  Polyhedron domain;
  int K = 1;
  VectorXd target;
};

CardinalityInstance gen_cardinality(int n, int K, std::uint64_t seed);

struct BenchSpec {
  std::string family;  // portfolio | transport_convex | transport_nonconvex | cardinality
  int n = 10;
  int m = 0;  // transport only
  int N = 30;
  int K = 1;  // cardinality only
  double alpha = 0.1;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> methods;  // subset of {cvar, dca, pdca1, pdca2, oracle}
  double beta0_1 = 0.1;
  double beta0_2 = 1.0;
  long long oracle_cap = 5000;

  void validate() const;
};

struct BenchCell {
  std::string family;
  int n = 0;
  int m = 0;
  int N = 0;
  double alpha = 0;
  std::string method;
  std::uint64_t seed = 0;
  double fval = 0;
  double time_s = 0;
  double prob = 0;
  std::string status;
};

struct BenchAggregate {
  std::string family;
  int n = 0;
  int m = 0;
  int N = 0;
  double alpha = 0;
  std::string method;
  int count_ok = 0;
  double fval_mean = 0;
  double time_mean = 0;
  double prob_mean = 0;
};

struct BenchReport {
  std::vector<BenchCell> cells;
  std::vector<BenchAggregate> aggregates;
};

/// Runs every (seed, method) cell of the spec; failures become status
/// strings, never aborts. Deterministic: identical specs produce identical
/// reports.
BenchReport run_bench(const BenchSpec& spec);

/// with_time = false gives the canonical reproducible form (wall-clock
/// columns are the one non-deterministic quantity in a report).
std::string cells_csv(const BenchReport& report, bool with_time = true);
std::string aggregates_csv(const BenchReport& report, bool with_time = true);

/// Re-draws with shifted seeds until the instance admits a CVaR-feasible
/// point (up to 10 attempts, then throws).
ChanceProblem make_feasible_instance(const BenchSpec& spec, std::uint64_t seed);

}  // namespace ccdc
