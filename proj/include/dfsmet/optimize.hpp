#pragma once

#include "dfsmet/dfs.hpp"
#include "dfsmet/improve.hpp"
#include "dfsmet/qfim.hpp"

#include <utility>
#include <vector>

namespace dfsmet {

/// Result of a rate optimization over vertex-sequential strategies. Rates
/// refer to vertex-pair representatives by polytope vertex index.
struct RateSolution {
  std::vector<std::pair<int, double>> rates;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;

  SequentialStrategy strategy(const DfsPolytope& polytope) const;
};

/// Figure of merit M = tr(W F^{-1}). Null directions of F are tolerated
/// only when W annihilates them; otherwise the parameter combination is
/// unidentifiable and SingularQfim is raised.
double figure_of_merit(const WeightMatrix& weight, const Qfim& qfim,
                       double tol = kDefaultTol);

/// Closed-form optimal rates when the vertex-pair representatives are
/// mutually orthogonal and the signal map restricted to the kernel has full
/// row rank: r_i proportional to sqrt(w_i), where w_i is the coefficient of
/// 1/r_i in tr(W F^{-1}).
RateSolution optimal_rates_orthogonal(const DfsPolytope& polytope,
                                      const SensorNetwork& network,
                                      const WeightMatrix& weight,
                                      double tol = kDefaultTol);

struct OptimizeOptions {
  int max_iterations = 100000;
  /// Stop when the relative objective decrease over this many iterations
  /// falls below stall_tol.
  int stall_window = 20;
  double stall_tol = 1e-12;
  /// Rates are clipped below at this value before inverting F.
  double rate_floor = 1e-15;
};

/// Minimizes M(r) = tr(W (4T^2 S (sum_i r_i v_i v_i^T) S^T)^{-1}) over the
/// probability simplex by exponentiated-gradient (mirror) descent with
/// backtracking. The objective is convex, so the method reaches the global
/// optimum.
RateSolution optimize_rates(const DfsPolytope& polytope,
                            const SensorNetwork& network,
                            const WeightMatrix& weight,
                            const OptimizeOptions& options = {});

/// Gradient of M at interior rates: dM/dr_i = -tr(W F^{-1} F_i F^{-1}) with
/// F_i = 4T^2 (S v_i)(S v_i)^T. Exposed for verification.
Eigen::VectorXd merit_gradient(const DfsPolytope& polytope,
                               const SensorNetwork& network,
                               const WeightMatrix& weight,
                               const Eigen::VectorXd& rates);

/// Figure of merit at explicit representative rates (no optimization).
double merit_at_rates(const DfsPolytope& polytope,
                      const SensorNetwork& network, const WeightMatrix& weight,
                      const Eigen::VectorXd& rates);

/// Affine-versus-DFS comparison for a strategy within one affine block:
/// the centered strategy has exactly one quarter of the affine K matrix,
/// and lifting it to vertices dominates K_affine / 4.
struct AffineComparison {
  KMatrix k_affine;
  KMatrix k_centered;
  bool quarter_law_ok = false;
  bool ratio_bound_ok = false;
};

AffineComparison compare_affine(const SensorNetwork& network,
                                const PureStrategy& strategy_affine,
                                double tol = kDefaultTol);

}  // namespace dfsmet
