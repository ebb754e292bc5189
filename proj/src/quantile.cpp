#include "ccdc/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ccdc {

namespace {

// Snap r to the nearest integer when within the boundary guard; otherwise
// return r unchanged. Computed in long double so the guard sees the
// caller's value, not accumulated rounding noise.
long double snap_near_integer(long double r) {
  const long double nearest = std::roundl(r);
  if (std::fabsl(r - nearest) <= 1e-12L * std::max<long double>(1.0L, std::fabsl(r)))
    return nearest;
  return r;
}

double accumulate_descending(std::vector<double>& vals) {
  std::sort(vals.begin(), vals.end(), std::greater<double>());
  double s = 0.0;
  for (double v : vals) s += v;
  return s;
}

}  // namespace

int compute_M(double alpha, int N) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("compute_M: alpha must lie in (0,1)");
  if (N < 2) throw std::invalid_argument("compute_M: need N >= 2");
  const long double r =
      snap_near_integer((1.0L - static_cast<long double>(alpha)) * N);
  const int M = static_cast<int>(std::ceill(r));
  return std::max(1, std::min(M, N));
}

double kth_smallest_impl(VectorXd v, int k) {
  const int N = static_cast<int>(v.size());
  if (k < 1 || k > N) throw std::invalid_argument("kth_smallest: k out of range");
  std::nth_element(v.data(), v.data() + (k - 1), v.data() + N);
  return v(k - 1);
}

double top_sum_impl(VectorXd v, int k) {
  const int N = static_cast<int>(v.size());
  if (k < 0 || k > N) throw std::invalid_argument("top_sum: k out of range");
  if (k == 0) return 0.0;
  std::nth_element(v.data(), v.data() + (N - k), v.data() + N);
  std::vector<double> top(v.data() + (N - k), v.data() + N);
  return accumulate_descending(top);
}

VectorXd topk_prefix_sums(VectorXd v) {
  const int N = static_cast<int>(v.size());
  std::sort(v.data(), v.data() + N, std::greater<double>());
  VectorXd prefix(N + 1);
  prefix(0) = 0.0;
  double s = 0.0;
  for (int j = 0; j < N; ++j) {
    s += v(j);
    prefix(j + 1) = s;
  }
  return prefix;
}

std::vector<int> ranked_indices(const VectorXd& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (v(a) != v(b)) return v(a) > v(b);
    return a < b;
  });
  return idx;
}

DcSplit DcSplit::plain(int M, int N) {
  VectorXd w = VectorXd::Zero(N);
  w(M - 1) = 1.0;
  return weighted(M, N, std::move(w));
}

DcSplit DcSplit::weighted(int M, int N, VectorXd w) {
  DcSplit split;
  split.M = M;
  split.T = N - M;
  split.weights = std::move(w);
  split.validate();
  return split;
}

void DcSplit::validate() const {
  const int n = N();
  if (M < 1 || M > n) throw std::invalid_argument("DcSplit: M out of range");
  if (T != n - M) throw std::invalid_argument("DcSplit: T must equal N - M");
  if (weights.minCoeff() < 0.0)
    throw std::invalid_argument("DcSplit: weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("DcSplit: weights must sum to one");
}

std::vector<std::pair<int, double>> DcSplit::support() const {
  std::vector<std::pair<int, double>> sup;
  for (int i = 0; i < weights.size(); ++i)
    if (weights(i) != 0.0) sup.emplace_back(i + 1, weights(i));
  return sup;
}

std::pair<double, double> gh_values(const DcSplit& split, const VectorXd& v) {
  const int N = split.N();
  if (v.size() != N) throw std::invalid_argument("gh_values: value vector length");
  const VectorXd prefix = topk_prefix_sums(v);
  double G = 0.0, H = 0.0;
  for (const auto& [pos, w] : split.support()) {
    G += w * prefix(N - pos + 1);
    if (pos <= N - 1) H += w * prefix(N - pos);
  }
  return {G, H};
}

ActiveSelection select_active(const ScenarioModel& model, const DcSplit& split,
                              const VectorXd& x) {
  ActiveSelection sel;
  VectorXd values = model.evaluate_with_argmax(x, sel.piece_indices);
  const std::vector<int> ranked = ranked_indices(values);
  sel.scenario_indices.assign(ranked.begin(), ranked.begin() + split.T);
  std::sort(sel.scenario_indices.begin(), sel.scenario_indices.end());
  return sel;
}

VectorXd subgrad_rank_coefficients(const DcSplit& split) {
  const int N = split.N();
  // H includes wt[i0] * top_sum(v, N-1-i0) for 0-based levels i0 <= N-2;
  // rank t (t-th largest) is covered by levels with i0 <= N-2-t.
  VectorXd prefw(N + 1);
  prefw(0) = 0.0;
  for (int i = 0; i < N; ++i) prefw(i + 1) = prefw(i) + split.weights(i);
  VectorXd coef(N);
  for (int t = 0; t < N; ++t) coef(t) = prefw(std::max(0, N - 1 - t));
  return coef;
}

VectorXd supergrad_rank_coefficients_G(const DcSplit& split) {
  const int N = split.N();
  VectorXd prefw(N + 1);
  prefw(0) = 0.0;
  for (int i = 0; i < N; ++i) prefw(i + 1) = prefw(i) + split.weights(i);
  VectorXd coef(N);
  for (int t = 0; t < N; ++t) coef(t) = prefw(N - t);
  return coef;
}

VectorXd subgrad_H(const ScenarioModel& model, const DcSplit& split,
                   const VectorXd& x) {
  VectorXi piece;
  const VectorXd values = model.evaluate_with_argmax(x, piece);
  const std::vector<int> ranked = ranked_indices(values);
  const VectorXd coef = subgrad_rank_coefficients(split);
  VectorXd s = VectorXd::Zero(model.dim_x());
  for (int t = 0; t < static_cast<int>(ranked.size()); ++t) {
    if (coef(t) == 0.0) continue;
    const int i = ranked[t];
    s += coef(t) * model.map_gradient(i, piece(i));
  }
  return s;
}

VectorXd l1_weights(double p, int N) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("l1_weights: p in (0,1)");
  if (N < 2) throw std::invalid_argument("l1_weights: need N >= 2");
  const long double np = snap_near_integer(static_cast<long double>(p) * N);
  const int M = static_cast<int>(std::ceill(np));
  if (M < 2) throw std::invalid_argument("l1_weights: M = ceil(pN) must be >= 2");
  const double g = static_cast<double>(np - M + 1);
  VectorXd w = VectorXd::Zero(N);
  w(M - 2) = 1.0 - g;
  w(M - 1) = g;
  return w;
}

namespace {

double kernel_value(KernelKind kernel, double t) {
  switch (kernel) {
    case KernelKind::gaussian:
      return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
    case KernelKind::uniform:
      return std::abs(t) <= 1.0 ? 0.5 : 0.0;
    case KernelKind::epanechnikov:
      return std::abs(t) <= 1.0 ? 0.75 * (1.0 - t * t) : 0.0;
  }
  return 0.0;
}

double simpson(KernelKind kernel, double p, double h, double a, double b) {
  const double c = 0.5 * (a + b);
  const double fa = kernel_value(kernel, (a - p) / h);
  const double fb = kernel_value(kernel, (b - p) / h);
  const double fc = kernel_value(kernel, (c - p) / h);
  return (b - a) / 6.0 * (fa + 4.0 * fc + fb) / h;
}

double adaptive_simpson(KernelKind kernel, double p, double h, double a,
                        double b, double whole, double tol, int depth) {
  const double c = 0.5 * (a + b);
  const double left = simpson(kernel, p, h, a, c);
  const double right = simpson(kernel, p, h, c, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(kernel, p, h, a, c, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(kernel, p, h, c, b, right, 0.5 * tol, depth - 1);
}

double bin_mass(KernelKind kernel, double p, double h, double a, double b) {
  if (kernel == KernelKind::uniform) {
    const double lo = std::max(a, p - h);
    const double hi = std::min(b, p + h);
    return hi > lo ? (hi - lo) / (2.0 * h) : 0.0;
  }
  // Clip the support for the compact kernel; split at p so the peak sits
  // on a panel boundary.
  double lo = a, hi = b;
  if (kernel == KernelKind::epanechnikov) {
    lo = std::max(lo, p - h);
    hi = std::min(hi, p + h);
    if (hi <= lo) return 0.0;
  }
  double total = 0.0;
  std::vector<std::pair<double, double>> panels;
  if (p > lo && p < hi)
    panels = {{lo, p}, {p, hi}};
  else
    panels = {{lo, hi}};
  for (const auto& [x0, x1] : panels) {
    const double whole = simpson(kernel, p, h, x0, x1);
    total += adaptive_simpson(kernel, p, h, x0, x1, whole, 1e-13, 40);
  }
  return total;
}

}  // namespace

VectorXd kernel_weights(double p, int N, double h, KernelKind kernel) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("kernel_weights: p in (0,1)");
  if (!(h > 0.0)) throw std::invalid_argument("kernel_weights: h must be positive");
  if (N < 2) throw std::invalid_argument("kernel_weights: need N >= 2");
  VectorXd raw(N);
  for (int i = 0; i < N; ++i)
    raw(i) = bin_mass(kernel, p, h, static_cast<double>(i) / N,
                      static_cast<double>(i + 1) / N);
  const double mass = raw.sum();
  if (mass < 1e-12)
    throw std::invalid_argument(
        "kernel_weights: degenerate bandwidth, kernel mass outside [0,1]");
  return raw / mass;
}

}  // namespace ccdc
