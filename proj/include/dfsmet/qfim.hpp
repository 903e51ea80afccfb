#pragma once

#include "dfsmet/model.hpp"

namespace dfsmet {

/// The n x n summary K of a strategy; the QFIM follows as 4 T^2 S K S^T for
/// any signal matrix. Symmetric, positive semidefinite, trace at most n for
/// hypercube-label strategies.
class KMatrix {
 public:
  explicit KMatrix(Eigen::MatrixXd entries, double tol = kDefaultTol);

  const Eigen::MatrixXd& mat() const noexcept { return entries_; }
  Eigen::Index size() const noexcept { return entries_.rows(); }
  double trace() const { return entries_.trace(); }

 private:
  Eigen::MatrixXd entries_;
};

/// Quantum Fisher information matrix for the network's signal parameters.
class Qfim {
 public:
  Qfim(Eigen::MatrixXd entries, double time, double tol = kDefaultTol);

  const Eigen::MatrixXd& mat() const noexcept { return entries_; }
  double time() const noexcept { return time_; }
  Eigen::Index size() const noexcept { return entries_.rows(); }

 private:
  Eigen::MatrixXd entries_;
  double time_;
};

/// Outcome of comparing two symmetric matrices in the positive semidefinite
/// partial order.
enum class PsdOrder { Greater, Less, Equal, Incomparable };

const char* to_string(PsdOrder order);

/// Effective energies S k: one entry per signal, the scalar product of each
/// signal row with the label vector.
Eigen::VectorXd effective_energy(const SensorNetwork& network,
                                 const SpinVector& k);

/// K = sum_i r_i k_i k_i^T for a sequential GHZ strategy.
KMatrix k_matrix_sequential(const SequentialStrategy& strategy);

/// K_psi = sum |c_k|^2 k k^T - kbar kbar^T with kbar = sum |c_k|^2 k.
KMatrix k_matrix_pure(const PureStrategy& strategy);

/// Mixed-state K via the spectral decomposition of the coefficient matrix:
///   K = 1/2 sum_{i,j} (p_i - p_j)^2 / (p_i + p_j) m_ij m_ij^T-type terms,
/// with pairs whose eigenvalue sum is below tol skipped (0/0 convention).
KMatrix k_matrix_mixed(const MixedKState& state, double tol = kDefaultTol);

/// F = 4 T^2 S K S^T, symmetrized to remove rounding asymmetry.
Qfim qfim_from_k(const SensorNetwork& network, const KMatrix& k_matrix);

/// Single-parameter QFI 4 T^2 (v^T S k)^2 of |GHZ_k> along direction v.
double single_direction_qfi(const SensorNetwork& network,
                            const Eigen::VectorXd& direction,
                            const SpinVector& k);

/// Applies infinitely strong correlated noise: coefficients between labels
/// in different affine DFS blocks (N(k - k') != 0) are erased.
MixedKState dephase(const PureStrategy& strategy, const SensorNetwork& network,
                    double tol = kDefaultTol);

/// PSD partial-order comparison with tolerance scaled by the operand norms.
PsdOrder psd_compare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                     double tol = kDefaultTol);

}  // namespace dfsmet
