#pragma once

#include "dfsmet/dfs.hpp"
#include "dfsmet/qfim.hpp"

#include <variant>
#include <vector>

namespace dfsmet {

enum class ImproveStage { Input, Symmetrized, Sequentialized, VertexLifted };

const char* to_string(ImproveStage stage);

using StrategyVariant = std::variant<PureStrategy, SequentialStrategy>;

/// Audit trail of the three-step construction. K matrices are PSD
/// nondecreasing along the stages.
struct ImprovementTrace {
  struct Entry {
    ImproveStage stage;
    StrategyVariant strategy;
    KMatrix k_matrix;
  };
  std::vector<Entry> stages;

  const KMatrix& final_k() const { return stages.back().k_matrix; }
  const SequentialStrategy& final_strategy() const {
    return std::get<SequentialStrategy>(stages.back().strategy);
  }
};

/// Replaces each +-k amplitude pair by a GHZ term with amplitude
/// sqrt(|c_k|^2 + |c_-k|^2) on the lexicographically larger representative;
/// the result is returned expanded in the |k> basis (equal weight on k and
/// -k), so its mean spin vanishes and K gains exactly kbar kbar^T. Zero
/// labels are dropped and the rest renormalized.
PureStrategy symmetrize(const PureStrategy& strategy,
                        double tol = kDefaultTol);

/// Converts a GHZ-form superposition into the sequential strategy with
/// rates |c_k|^2; the K matrix is unchanged. Inputs whose +-k amplitude
/// magnitudes differ beyond tol are rejected as NotGhzForm.
SequentialStrategy sequentialize(const PureStrategy& strategy,
                                 double tol = kDefaultTol);

/// Replaces every label by its convex vertex decomposition, aggregating
/// rates across source terms and across +-v. K never decreases.
SequentialStrategy lift_to_vertices(const SequentialStrategy& strategy,
                                    const DfsPolytope& polytope,
                                    double tol = kDefaultTol);

/// Runs symmetrize, sequentialize and lift_to_vertices, recording the K
/// matrix at each stage and checking the PSD-monotone chain.
ImprovementTrace improve_pipeline(const PureStrategy& strategy,
                                  const SensorNetwork& network,
                                  double tol = kDefaultTol);

/// Sufficient extremality test: trace(K) is maximal. The two-argument form
/// assumes the all-+-1 vertex case where the maximal trace equals the
/// sensor count; the polytope form uses the best vertex norm.
bool is_extremal_trace(const KMatrix& k_matrix, Eigen::Index sensors,
                       double tol = kDefaultTol);
bool is_extremal_trace(const KMatrix& k_matrix, const DfsPolytope& polytope,
                       double tol = kDefaultTol);

/// Maximal attainable trace over single-vertex projectors.
double max_attainable_trace(const DfsPolytope& polytope);

/// True iff every label matches a polytope vertex up to sign within tol.
/// Such strategies are extremal.
bool certify_vertex_sequential(const SequentialStrategy& strategy,
                               const DfsPolytope& polytope,
                               double tol = kDefaultTol);

}  // namespace dfsmet
