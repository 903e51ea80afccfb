#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfsmet {

/// Absolute tolerance used by type invariants unless a caller overrides it.
inline constexpr double kDefaultTol = 1e-9;

/// Labels closer than this (infinity norm) count as the same spin vector.
inline constexpr double kLabelDedupTol = 1e-9;

enum class ErrorCode {
  DimensionMismatch,
  NonFinite,
  NonPositiveTime,
  InvalidStrategy,
  EmptyDfs,
  NotInDfs,
  MixedAffineBlocks,
  NonHermitian,
  NegativeEigenvalue,
  ShapeMismatch,
  NotGhzForm,
  DegenerateStrategy,
  SingularQfim,
  NonOrthogonalVertices,
  SingularRestrictedSignal,
  UnidentifiableSignals,
  PhaseWrap,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

/// Elementwise |a - b| <= tol, same size required.
bool approx_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  double tol);

/// Strict lexicographic order on entries.
bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// The lexicographically larger of k and -k. GHZ states are labeled by
/// either sign, so this picks the canonical representative.
Eigen::VectorXd canonical_sign(const Eigen::VectorXd& k);

/// Effective local spin values k labeling the product state |k>.
/// Entries must satisfy ||k||_inf <= 1 + tol.
class SpinVector {
 public:
  explicit SpinVector(Eigen::VectorXd entries, double tol = kDefaultTol);

  const Eigen::VectorXd& vec() const noexcept { return entries_; }
  Eigen::Index size() const noexcept { return entries_.size(); }
  double operator[](Eigen::Index i) const { return entries_[i]; }
  SpinVector negated() const;

 private:
  Eigen::VectorXd entries_;
};

/// The estimation scenario: signal matrix S (signals x sensors), noise
/// matrix N (noise fields x sensors) and the evolution time T. Rows are
/// fields, columns are sensors; a noiseless network has zero noise rows.
class SensorNetwork {
 public:
  SensorNetwork(Eigen::MatrixXd signal, Eigen::MatrixXd noise, double time);

  const Eigen::MatrixXd& signal() const noexcept { return signal_; }
  const Eigen::MatrixXd& noise() const noexcept { return noise_; }
  double time() const noexcept { return time_; }

  Eigen::Index sensors() const noexcept { return signal_.cols(); }
  Eigen::Index signals() const noexcept { return signal_.rows(); }
  Eigen::Index noise_sources() const noexcept { return noise_.rows(); }

 private:
  Eigen::MatrixXd signal_;
  Eigen::MatrixXd noise_;
  double time_;
};

SensorNetwork validate_network(const Eigen::MatrixXd& signal,
                               const Eigen::MatrixXd& noise, double time);

/// Row-major field-sample tables (one row per field, one entry per sensor).
using SampleTable = std::vector<std::vector<double>>;

/// Assembles matrices from tabulated field samples and validates them.
/// An empty noise table yields a noiseless network.
SensorNetwork network_from_samples(const SampleTable& signal_samples,
                                   const SampleTable& noise_samples,
                                   double time);

struct PureTerm {
  SpinVector k;
  std::complex<double> amplitude;
};

/// A general strategy |psi> = sum_k c_k |k>. Terms with labels closer than
/// the dedup tolerance are merged by summing amplitudes; the merged list
/// must be normalized, sum |c_k|^2 = 1 within tol.
class PureStrategy {
 public:
  explicit PureStrategy(std::vector<PureTerm> terms, double tol = kDefaultTol);

  const std::vector<PureTerm>& terms() const noexcept { return terms_; }
  Eigen::Index sensors() const noexcept;
  std::size_t size() const noexcept { return terms_.size(); }

 private:
  std::vector<PureTerm> terms_;
};

struct SequentialTerm {
  SpinVector k;
  double rate;
};

/// A sequential GHZ strategy: prepare |GHZ_{k_i}> with rate r_i. Labels k
/// and -k describe the same GHZ state and are merged by summing rates.
/// Rates must be positive and sum to 1 within tol.
class SequentialStrategy {
 public:
  explicit SequentialStrategy(std::vector<SequentialTerm> terms,
                              double tol = kDefaultTol);

  const std::vector<SequentialTerm>& terms() const noexcept { return terms_; }
  Eigen::Index sensors() const noexcept;
  std::size_t size() const noexcept { return terms_.size(); }

 private:
  std::vector<SequentialTerm> terms_;
};

/// Symmetric positive semidefinite weights for the figure of merit
/// M = tr(W Cov).
class WeightMatrix {
 public:
  explicit WeightMatrix(Eigen::MatrixXd entries, double tol = kDefaultTol);

  static WeightMatrix identity(Eigen::Index size);

  const Eigen::MatrixXd& mat() const noexcept { return entries_; }
  Eigen::Index size() const noexcept { return entries_.rows(); }

 private:
  Eigen::MatrixXd entries_;
};

/// A mixed state rho = sum_{i,j} c_{i,j} |k_i><k_j| expressed in an
/// orthonormal set of spin-vector labels. Stores the spectral decomposition
/// c = U diag(p) U^dagger with negative eigenvalues within tol clamped to 0.
class MixedKState {
 public:
  MixedKState(std::vector<SpinVector> labels, Eigen::MatrixXcd coefficients,
              double tol = kDefaultTol);

  const std::vector<SpinVector>& labels() const noexcept { return labels_; }
  const Eigen::MatrixXcd& coefficients() const noexcept {
    return coefficients_;
  }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  const Eigen::MatrixXcd& eigenvectors() const noexcept {
    return eigenvectors_;
  }
  Eigen::Index sensors() const noexcept;

 private:
  std::vector<SpinVector> labels_;
  Eigen::MatrixXcd coefficients_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXcd eigenvectors_;
};

}  // namespace dfsmet
