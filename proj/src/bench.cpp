#include "ccdc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ccdc/baselines.hpp"
#include "ccdc/pdca.hpp"
#include "ccdc/reform.hpp"

namespace ccdc {

double Rng::uniform() {
  // 53 mantissa bits of one 64-bit draw
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

int Rng::uniform_int(int lo, int hi) {
  return lo + static_cast<int>(uniform() * (hi - lo + 1));
}

ChanceProblem gen_portfolio(int n, int N, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_portfolio: need n >= 2");
  Rng rng(seed);
  constexpr int kFactors = 3;
  constexpr double kFactorVol = 6e-4;
  constexpr double kIdioVol = 3e-4;
  constexpr double kReturnTarget = 2e-4;  // R = 0.02%
  constexpr double kRiskAversion = 2.0;
  constexpr double kCap = 0.5;

  // Loadings, then risk-compensated means: riskier assets pay more, which
  // makes the chance constraint bind at mean-seeking optima.
  MatrixXd loadings(n, kFactors);
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < kFactors; ++f) loadings(i, f) = rng.normal();
  VectorXd mu_true(n);
  for (int i = 0; i < n; ++i) {
    const double vol = loadings.row(i).norm() * kFactorVol;
    mu_true(i) = 3e-4 + 0.6 * vol + 1e-4 * rng.normal();
  }

  MatrixXd returns(N, n);
  for (int t = 0; t < N; ++t) {
    VectorXd factors(kFactors);
    for (int f = 0; f < kFactors; ++f) factors(f) = kFactorVol * rng.normal();
    for (int i = 0; i < n; ++i)
      returns(t, i) =
          mu_true(i) + loadings.row(i).dot(factors) + kIdioVol * rng.normal();
  }

  const VectorXd mu_hat = returns.colwise().mean();
  const MatrixXd centered = returns.rowwise() - mu_hat.transpose();
  const MatrixXd sigma_hat = centered.transpose() * centered / (N - 1.0);

  DcObjective objective{
      ConvexFunction::quadratic(kRiskAversion * sigma_hat, -mu_hat),
      ConvexFunction::zero(n)};

  Polyhedron domain = Polyhedron::box(VectorXd::Zero(n),
                                      VectorXd::Constant(n, kCap));
  domain.Aeq = MatrixXd::Ones(1, n);
  domain.beq = VectorXd::Ones(1);

  AffineMap map;
  map.a = VectorXd::Zero(n);
  map.b = VectorXd::Zero(n);
  map.offset = kReturnTarget;
  map.B = -MatrixXd::Identity(n, n);  // c(x, xi) = R - xi'x
  ScenarioModel scenarios(returns, {std::move(map)});

  ChanceProblem problem{std::move(objective), std::move(domain),
                        std::move(scenarios), 0.1, std::nullopt};
  return problem;
}

ChanceProblem gen_transport(int n, int m, int N, std::uint64_t seed,
                            bool nonconvex) {
  if (n < 2 || m < 2)
    throw std::invalid_argument("gen_transport: need n, m >= 2");
  Rng rng(seed);
  const int nv = n * m;  // x_ij at index i*m + j

  MatrixXd cost(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) cost(i, j) = rng.uniform(1.0, 10.0);

  VectorXd base_demand(m);
  for (int j = 0; j < m; ++j) base_demand(j) = rng.uniform(10.0, 50.0);
  MatrixXd demands(N, m);
  for (int t = 0; t < N; ++t)
    for (int j = 0; j < m; ++j)
      demands(t, j) = std::max(
          0.0, base_demand(j) * (1.0 + 0.1 * rng.normal()));

  VectorXd theta(n);
  for (int i = 0; i < n; ++i) theta(i) = rng.uniform(1.0, 2.0);
  theta *= 1.5 * base_demand.sum() / theta.sum();

  VectorXd cost_flat(nv);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) cost_flat(i * m + j) = cost(i, j);

  DcObjective objective{ConvexFunction::linear(cost_flat),
                        ConvexFunction::zero(nv)};
  if (nonconvex) {
    // cost discount a_ij = -c_ij / (2 theta_i); h carries the positive
    // quadratic so f = g - h matches c_ij x_ij + a_ij x_ij^2
    MatrixXd Ah = MatrixXd::Zero(nv, nv);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        Ah(i * m + j, i * m + j) = cost(i, j) / (2.0 * theta(i));
    objective.h = ConvexFunction::quadratic(Ah, VectorXd::Zero(nv));
  }

  // capacities + nonnegativity
  Polyhedron domain;
  domain.Aeq = MatrixXd::Zero(0, nv);
  domain.beq = VectorXd::Zero(0);
  domain.Gineq = MatrixXd::Zero(n + nv, nv);
  domain.hineq = VectorXd::Zero(n + nv);
  for (int i = 0; i < n; ++i) {
    domain.Gineq.row(i).segment(i * m, m).setOnes();
    domain.hineq(i) = theta(i);
  }
  domain.Gineq.bottomRows(nv) = -MatrixXd::Identity(nv, nv);

  // c_j(x, xi) = xi_j - sum_i x_ij
  std::vector<AffineMap> maps(m);
  for (int j = 0; j < m; ++j) {
    maps[j].a = VectorXd::Zero(nv);
    for (int i = 0; i < n; ++i) maps[j].a(i * m + j) = -1.0;
    maps[j].b = VectorXd::Unit(m, j);
    maps[j].offset = 0.0;
  }
  ScenarioModel scenarios(demands, std::move(maps));

  ChanceProblem problem{std::move(objective), std::move(domain),
                        std::move(scenarios), 0.1, std::nullopt};
  return problem;
}

CardinalityInstance gen_cardinality(int n, int K, std::uint64_t seed) {
  Rng rng(seed);
  CardinalityInstance inst;
  inst.K = K;
  inst.target = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) inst.target(i) = rng.uniform(-3.0, 3.0);
  // min |x - target|^2 = x'Ix - 2 target.x + const
  inst.objective = DcObjective{
      ConvexFunction::quadratic(MatrixXd::Identity(n, n), -2.0 * inst.target),
      ConvexFunction::zero(n)};
  inst.domain = Polyhedron::box(VectorXd::Constant(n, -10.0),
                                VectorXd::Constant(n, 10.0));
  return inst;
}

void BenchSpec::validate() const {
  if (family != "portfolio" && family != "transport_convex" &&
      family != "transport_nonconvex" && family != "cardinality")
    throw std::invalid_argument("BenchSpec: unknown family " + family);
  if (n < 2 || N < 2) throw std::invalid_argument("BenchSpec: sizes too small");
  if ((family == "transport_convex" || family == "transport_nonconvex") && m < 2)
    throw std::invalid_argument("BenchSpec: transport needs m >= 2");
  if (family == "cardinality" && (K < 1 || K > n - 1))
    throw std::invalid_argument("BenchSpec: cardinality needs 1 <= K <= n-1");
  if (!(alpha > 0 && alpha < 1))
    throw std::invalid_argument("BenchSpec: alpha in (0,1)");
  if (seeds.empty()) throw std::invalid_argument("BenchSpec: no seeds");
  if (methods.empty()) throw std::invalid_argument("BenchSpec: no methods");
  for (const std::string& method : methods)
    if (method != "cvar" && method != "dca" && method != "pdca1" &&
        method != "pdca2" && method != "oracle")
      throw std::invalid_argument("BenchSpec: unknown method " + method);
}

namespace {

ChanceProblem generate(const BenchSpec& spec, std::uint64_t seed) {
  ChanceProblem problem =
      spec.family == "portfolio"
          ? gen_portfolio(spec.n, spec.N, seed)
          : gen_transport(spec.n, spec.m, spec.N, seed,
                          spec.family == "transport_nonconvex");
  problem.alpha = spec.alpha;
  return problem;
}

}  // namespace

ChanceProblem make_feasible_instance(const BenchSpec& spec, std::uint64_t seed) {
  for (int attempt = 0; attempt < 10; ++attempt) {
    ChanceProblem problem = generate(spec, seed + 7919u * attempt);
    try {
      cvar_solve(problem);
      return problem;
    } catch (const SolveFailure&) {
      continue;
    }
  }
  throw SolveFailure(SolveFailure::Reason::generation_failure,
                     "make_feasible_instance: no CVaR-feasible draw in 10 "
                     "attempts");
}

namespace {

struct MethodOutcome {
  double fval = 0;
  double prob = 0;
  std::string status;
};

MethodOutcome run_method(const BenchSpec& spec, const ChanceProblem& problem,
                         const std::string& method) {
  MethodOutcome out;
  if (method == "oracle") {
    const OracleResult oracle = saa_oracle(problem, spec.oracle_cap);
    out.fval = oracle.f_star;
    out.prob = in_sample_probability(problem.scenarios, oracle.x_star);
    out.status = "optimal";
    return out;
  }
  const CvarResult start = cvar_solve(problem);
  if (method == "cvar") {
    out.fval = problem.objective.value(start.x0);
    out.prob = in_sample_probability(problem.scenarios, start.x0);
    out.status = "optimal";
    return out;
  }
  SolverConfig config;
  if (method == "dca") {
    config.beta0 = 0.0;
    config.allow_fw_regime = true;
  } else if (method == "pdca1") {
    config.beta0 = spec.beta0_1;
  } else {
    config.beta0 = spec.beta0_2;
  }
  const DcProgram program = reformulate_chance(problem);
  const PdcaResult result = pdca_solve(program, start.x0, config);
  out.fval = problem.objective.value(result.x);
  out.prob = in_sample_probability(problem.scenarios, result.x);
  out.status = to_string(result.trace.status);
  return out;
}

MethodOutcome run_cardinality_method(const BenchSpec& spec,
                                     std::uint64_t seed,
                                     const std::string& method) {
  MethodOutcome out;
  if (method == "cvar" || method == "oracle") {
    out.status = "unsupported";
    return out;
  }
  const CardinalityInstance inst = gen_cardinality(spec.n, spec.K, seed);
  const DcProgram program =
      reformulate_cardinality(inst.objective, inst.domain, inst.K);
  SolverConfig config;
  if (method == "dca") {
    config.beta0 = 0.0;
    config.allow_fw_regime = true;
  } else {
    config.beta0 = method == "pdca1" ? spec.beta0_1 : spec.beta0_2;
  }
  const VectorXd x0 = VectorXd::Zero(program.n);
  const PdcaResult result = pdca_solve(program, x0, config);
  const VectorXd x = result.x.head(spec.n);
  const int card =
      static_cast<int>((x.array().abs() > 1e-8).count());
  out.fval = inst.objective.value(result.x);
  out.prob = card <= inst.K ? 1.0 : 0.0;
  out.status = to_string(result.trace.status);
  return out;
}

}  // namespace

BenchReport run_bench(const BenchSpec& spec) {
  spec.validate();
  using clock = std::chrono::steady_clock;
  BenchReport report;

  for (const std::string& method : spec.methods) {
    BenchAggregate agg;
    agg.family = spec.family;
    agg.n = spec.n;
    agg.m = spec.m;
    agg.N = spec.N;
    agg.alpha = spec.alpha;
    agg.method = method;
    for (const std::uint64_t seed : spec.seeds) {
      BenchCell cell;
      cell.family = spec.family;
      cell.n = spec.n;
      cell.m = spec.m;
      cell.N = spec.N;
      cell.alpha = spec.alpha;
      cell.method = method;
      cell.seed = seed;
      const auto t0 = clock::now();
      try {
        MethodOutcome out;
        if (spec.family == "cardinality")
          out = run_cardinality_method(spec, seed, method);
        else
          out = run_method(spec, make_feasible_instance(spec, seed), method);
        cell.fval = out.fval;
        cell.prob = out.prob;
        cell.status = out.status;
      } catch (const std::exception& err) {
        cell.status = std::string("error: ") + err.what();
      }
      cell.time_s = std::chrono::duration<double>(clock::now() - t0).count();
      if (cell.status == "optimal" || cell.status == "converged" ||
          cell.status == "max_iter") {
        ++agg.count_ok;
        agg.fval_mean += cell.fval;
        agg.time_mean += cell.time_s;
        agg.prob_mean += cell.prob;
      }
      report.cells.push_back(std::move(cell));
    }
    if (agg.count_ok > 0) {
      agg.fval_mean /= agg.count_ok;
      agg.time_mean /= agg.count_ok;
      agg.prob_mean /= agg.count_ok;
    }
    report.aggregates.push_back(std::move(agg));
  }
  return report;
}

std::string cells_csv(const BenchReport& report, bool with_time) {
  std::ostringstream out;
  out << (with_time ? "family,n,m,N,alpha,method,seed,fval,time_s,prob,status\n"
                    : "family,n,m,N,alpha,method,seed,fval,prob,status\n");
  char line[512];
  for (const BenchCell& c : report.cells) {
    if (with_time)
      std::snprintf(line, sizeof(line),
                    "%s,%d,%d,%d,%.6g,%s,%llu,%.12g,%.4g,%.6g,%s\n",
                    c.family.c_str(), c.n, c.m, c.N, c.alpha, c.method.c_str(),
                    static_cast<unsigned long long>(c.seed), c.fval, c.time_s,
                    c.prob, c.status.c_str());
    else
      std::snprintf(line, sizeof(line), "%s,%d,%d,%d,%.6g,%s,%llu,%.12g,%.6g,%s\n",
                    c.family.c_str(), c.n, c.m, c.N, c.alpha, c.method.c_str(),
                    static_cast<unsigned long long>(c.seed), c.fval, c.prob,
                    c.status.c_str());
    out << line;
  }
  return out.str();
}

std::string aggregates_csv(const BenchReport& report, bool with_time) {
  std::ostringstream out;
  out << (with_time ? "family,n,m,N,alpha,method,count_ok,fval_mean,time_s_mean,prob_mean\n"
                    : "family,n,m,N,alpha,method,count_ok,fval_mean,prob_mean\n");
  char line[512];
  for (const BenchAggregate& a : report.aggregates) {
    if (with_time)
      std::snprintf(line, sizeof(line), "%s,%d,%d,%d,%.6g,%s,%d,%.12g,%.4g,%.6g\n",
                    a.family.c_str(), a.n, a.m, a.N, a.alpha, a.method.c_str(),
                    a.count_ok, a.fval_mean, a.time_mean, a.prob_mean);
    else
      std::snprintf(line, sizeof(line), "%s,%d,%d,%d,%.6g,%s,%d,%.12g,%.6g\n",
                    a.family.c_str(), a.n, a.m, a.N, a.alpha, a.method.c_str(),
                    a.count_ok, a.fval_mean, a.prob_mean);
    out << line;
  }
  return out.str();
}

}  // namespace ccdc
