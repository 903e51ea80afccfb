#pragma once

#include "dfsmet/model.hpp"

#include <utility>
#include <vector>

namespace dfsmet {

/// Relative rank tolerance for the kernel computation. Singular values below
/// tol * sigma_max * max(m, n) count as zero.
inline constexpr double kRankTol = 1e-10;

/// Two enumerated vertices closer than this (infinity norm) are duplicates.
inline constexpr double kVertexDedupTol = 1e-8;

/// The decoherence-free subspace {k : N k = 0, ||k||_inf <= 1} as explicit
/// geometry: an orthonormal basis of kernel(N) and the full vertex list
/// (closed under negation, sorted lexicographically).
class DfsPolytope {
 public:
  DfsPolytope(Eigen::MatrixXd kernel_basis, std::vector<SpinVector> vertices,
              Eigen::MatrixXd noise);

  const Eigen::MatrixXd& kernel_basis() const noexcept { return basis_; }
  const std::vector<SpinVector>& vertices() const noexcept { return vertices_; }
  Eigen::Index dimension() const noexcept { return basis_.cols(); }
  Eigen::Index sensors() const noexcept { return basis_.rows(); }
  const Eigen::MatrixXd& noise() const noexcept { return noise_; }

  /// Indices of one vertex per {v, -v} pair, keeping the lexicographically
  /// larger member. Sorted by vertex index.
  std::vector<int> representative_indices() const;

 private:
  Eigen::MatrixXd basis_;
  std::vector<SpinVector> vertices_;
  Eigen::MatrixXd noise_;
};

/// Convex weights over polytope vertices reconstructing a point.
struct ConvexDecomposition {
  std::vector<std::pair<int, double>> weights;  // (vertex index, weight)
};

/// Orthonormal basis of {k : noise * k = 0}. The tolerance is relative; see
/// kRankTol. A full-rank noise matrix yields an n x 0 basis.
Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& noise,
                             double tol = kRankTol);

/// Enumerates all vertices of the DFS polytope by solving every d-subset of
/// facet constraints at every sign assignment. Combinatorial, intended for
/// desk-scale networks (n up to ~14).
DfsPolytope enumerate_vertices(const SensorNetwork& network,
                               double tol = kRankTol);

/// Membership test: ||N k||_inf <= tol and ||k||_inf <= 1 + tol.
bool contains(const DfsPolytope& polytope, const SpinVector& k,
              double tol = kDefaultTol);

/// The affine offset kappa = N k; k lies in DFS_kappa iff additionally
/// ||k||_inf <= 1.
Eigen::VectorXd affine_offset(const SensorNetwork& network,
                              const SpinVector& k);

/// Convex decomposition of a DFS point into at most d+1 vertices
/// (Caratheodory). Any valid decomposition may be returned.
ConvexDecomposition caratheodory_decompose(const DfsPolytope& polytope,
                                           const SpinVector& k,
                                           double tol = kDefaultTol);

/// Maps a strategy whose labels live in a single affine DFS_kappa to the
/// DFS strategy with labels (k - kbar)/2, kbar = sum |c_k|^2 k. The K matrix
/// of the result is exactly one quarter of the input's.
PureStrategy center_affine(const PureStrategy& strategy,
                           const SensorNetwork& network,
                           double tol = kDefaultTol);

}  // namespace dfsmet
