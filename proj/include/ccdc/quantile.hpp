#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ccdc/types.hpp"

// Order-statistics kernels: empirical quantile index, k-th smallest entry,
// sums of the k largest entries, deterministic active selections, exact
// subgradients of the concave-side function H, and L-estimator weights.
// Everything here is a pure function over immutable inputs.
//
// Summation convention: every top-k sum is accumulated over the selected
// values in descending order, so partial-selection paths and full-sort
// paths produce bit-identical results.

namespace ccdc {

/// Quantile index M = ceil((1 - alpha) * N), with a guard that snaps
/// (1 - alpha) * N to a nearby integer before taking the ceiling so that
/// e.g. alpha = 0.1, N = 20 yields 18 and not 19. M = N signals the
/// all-scenario convex case (the caller must treat H as identically zero).
int compute_M(double alpha, int N);

/// k-th smallest entry of v, 1-based. Expected O(N) selection.
double kth_smallest_impl(VectorXd v, int k);

/// Sum of the k largest entries of v; k = 0 gives 0.
double top_sum_impl(VectorXd v, int k);

/// Sums of the j largest entries for all j = 0..N, by descending-order
/// accumulation: prefix(j) bit-matches top_sum(v, j).
VectorXd topk_prefix_sums(VectorXd v);

template <typename Derived>
double kth_smallest(const Eigen::MatrixBase<Derived>& v, int k) {
  return kth_smallest_impl(v.eval(), k);
}

template <typename Derived>
double top_sum(const Eigen::MatrixBase<Derived>& v, int k) {
  return top_sum_impl(v.eval(), k);
}

/// Indices 0..N-1 ordered by (value descending, index ascending).
std::vector<int> ranked_indices(const VectorXd& v);

/// The DC split of a (possibly weighted) empirical quantile constraint:
/// G(x) - H(x) <= 0 with G and H weighted sums of top-k sums of the
/// scenario values. The plain quantile is weights = e_M. T = N - M counts
/// the entries in the concave side; T = 0 encodes the degenerate
/// all-scenario case where H vanishes.
struct DcSplit {
  int M = 1;
  int T = 0;
  VectorXd weights;  // length N on the simplex

  static DcSplit plain(int M, int N);
  static DcSplit weighted(int M, int N, VectorXd w);

  int N() const { return static_cast<int>(weights.size()); }
  void validate() const;

  /// Nonzero weight levels as (order-statistic position i, weight),
  /// 1-based positions, ascending.
  std::vector<std::pair<int, double>> support() const;
};

/// G and H evaluated on a value vector:
/// G = sum_i w_i * top_sum(v, N-i+1), H = sum_{i<=N-1} w_i * top_sum(v, N-i).
/// For w = e_M this reduces to G = top_sum(v, T+1), H = top_sum(v, T), and
/// always G - H = sum_i w_i v_[i].
std::pair<double, double> gh_values(const DcSplit& split, const VectorXd& v);

/// The scenarios and max-attaining pieces that carry the subgradient of H.
struct ActiveSelection {
  std::vector<int> scenario_indices;  // the T carriers, ascending
  VectorXi piece_indices;             // per scenario, smallest argmax map
};

ActiveSelection select_active(const ScenarioModel& model, const DcSplit& split,
                              const VectorXd& x);

/// One element of dH(x): per nonzero weight level, the gradient of the
/// corresponding sum-of-top-k function with deterministic tie-breaking.
VectorXd subgrad_H(const ScenarioModel& model, const DcSplit& split,
                   const VectorXd& x);

/// Per-rank coefficients of the subgradient of H: the t-th largest value's
/// gradient enters with coefficient sum of w_i over levels whose top-count
/// exceeds t. For w = e_M this is 1 on the first T ranks and 0 after.
VectorXd subgrad_rank_coefficients(const DcSplit& split);

/// Same for G, whose level top-counts are one larger.
VectorXd supergrad_rank_coefficients_G(const DcSplit& split);

/// L1 estimator weights: mass g = Np - M + 1 at position M and 1 - g at
/// M - 1, with the same integer snap as compute_M so that integral Np
/// reduces exactly to the plain quantile.
VectorXd l1_weights(double p, int N);

enum class KernelKind { gaussian, uniform, epanechnikov };

/// Kernel quantile estimator weights: per-bin integrals of the scaled
/// kernel, renormalized onto the simplex.
VectorXd kernel_weights(double p, int N, double h, KernelKind kernel);

}  // namespace ccdc
