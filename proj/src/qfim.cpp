#include "dfsmet/qfim.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace dfsmet {

KMatrix::KMatrix(Eigen::MatrixXd entries, double tol)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    fail(ErrorCode::ShapeMismatch, "K matrix must be square");
  }
  if (!entries_.allFinite()) {
    fail(ErrorCode::NonFinite, "K matrix has non-finite entries");
  }
  if ((entries_ - entries_.transpose()).lpNorm<Eigen::Infinity>() > tol) {
    fail(ErrorCode::NonHermitian, "K matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(entries_,
                                                     Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol) {
    fail(ErrorCode::NegativeEigenvalue, "K matrix has a negative eigenvalue");
  }
  if (entries_.trace() > static_cast<double>(entries_.rows()) + tol) {
    std::ostringstream msg;
    msg << "K matrix trace " << entries_.trace() << " exceeds sensor count";
    fail(ErrorCode::InvalidStrategy, msg.str());
  }
}

Qfim::Qfim(Eigen::MatrixXd entries, double time, double tol)
    : entries_(std::move(entries)), time_(time) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    fail(ErrorCode::ShapeMismatch, "QFIM must be square");
  }
  if (!entries_.allFinite()) {
    fail(ErrorCode::NonFinite, "QFIM has non-finite entries");
  }
  const double scale = 1.0 + entries_.lpNorm<Eigen::Infinity>();
  if ((entries_ - entries_.transpose()).lpNorm<Eigen::Infinity>() >
      tol * scale) {
    fail(ErrorCode::NonHermitian, "QFIM is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(entries_,
                                                     Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol * scale) {
    fail(ErrorCode::NegativeEigenvalue, "QFIM has a negative eigenvalue");
  }
}

const char* to_string(PsdOrder order) {
  switch (order) {
    case PsdOrder::Greater: return "Greater";
    case PsdOrder::Less: return "Less";
    case PsdOrder::Equal: return "Equal";
    case PsdOrder::Incomparable: return "Incomparable";
  }
  return "Unknown";
}

Eigen::VectorXd effective_energy(const SensorNetwork& network,
                                 const SpinVector& k) {
  if (k.size() != network.sensors()) {
    fail(ErrorCode::DimensionMismatch,
         "spin vector length does not match sensor count");
  }
  return network.signal() * k.vec();
}

KMatrix k_matrix_sequential(const SequentialStrategy& strategy) {
  const Eigen::Index n = strategy.sensors();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (const auto& term : strategy.terms()) {
    k.noalias() += term.rate * term.k.vec() * term.k.vec().transpose();
  }
  return KMatrix(0.5 * (k + k.transpose()));
}

KMatrix k_matrix_pure(const PureStrategy& strategy) {
  const Eigen::Index n = strategy.sensors();
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (const auto& term : strategy.terms()) {
    const double weight = std::norm(term.amplitude);
    second.noalias() += weight * term.k.vec() * term.k.vec().transpose();
    mean += weight * term.k.vec();
  }
  Eigen::MatrixXd k = second - mean * mean.transpose();
  return KMatrix(0.5 * (k + k.transpose()));
}

KMatrix k_matrix_mixed(const MixedKState& state, double tol) {
  const Eigen::Index n = state.sensors();
  const Eigen::Index dim = state.eigenvalues().size();
  const Eigen::VectorXd& p = state.eigenvalues();
  const Eigen::MatrixXcd& u = state.eigenvectors();

  // Label vectors as columns for fast contraction.
  Eigen::MatrixXd labels(n, dim);
  for (Eigen::Index v = 0; v < dim; ++v) {
    labels.col(v) = state.labels()[static_cast<std::size_t>(v)].vec();
  }

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      const double denom = p[i] + p[j];
      if (denom <= tol) continue;  // 0/0 convention: no support, no term
      const double weight = (p[i] - p[j]) * (p[i] - p[j]) / denom;
      if (weight == 0.0) continue;
      // m_ij = sum_nu conj(U_{nu,i}) U_{nu,j} k_nu; the (i,j) and (j,i)
      // contributions combine into 2 Re[m m^dagger], a PSD term.
      Eigen::VectorXcd m =
          labels * (u.col(i).conjugate().cwiseProduct(u.col(j)));
      k.noalias() += weight * (m.real() * m.real().transpose() +
                               m.imag() * m.imag().transpose());
    }
  }
  return KMatrix(0.5 * (k + k.transpose()));
}

Qfim qfim_from_k(const SensorNetwork& network, const KMatrix& k_matrix) {
  if (k_matrix.size() != network.sensors()) {
    fail(ErrorCode::DimensionMismatch,
         "K matrix size does not match sensor count");
  }
  const double t = network.time();
  Eigen::MatrixXd f = 4.0 * t * t * network.signal() * k_matrix.mat() *
                      network.signal().transpose();
  return Qfim(0.5 * (f + f.transpose()), t);
}

double single_direction_qfi(const SensorNetwork& network,
                            const Eigen::VectorXd& direction,
                            const SpinVector& k) {
  if (direction.size() != network.signals()) {
    fail(ErrorCode::DimensionMismatch,
         "direction length does not match signal count");
  }
  const double energy = direction.dot(effective_energy(network, k));
  const double t = network.time();
  return 4.0 * t * t * energy * energy;
}

MixedKState dephase(const PureStrategy& strategy, const SensorNetwork& network,
                    double tol) {
  if (strategy.sensors() != network.sensors()) {
    fail(ErrorCode::DimensionMismatch, "strategy does not match network");
  }
  const auto count = static_cast<Eigen::Index>(strategy.size());
  std::vector<Eigen::VectorXd> offsets;
  offsets.reserve(static_cast<std::size_t>(count));
  std::vector<SpinVector> labels;
  labels.reserve(static_cast<std::size_t>(count));
  for (const auto& term : strategy.terms()) {
    offsets.push_back(network.noise() * term.k.vec());
    labels.push_back(term.k);
  }
  Eigen::MatrixXcd rho(count, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < count; ++j) {
      const bool same_block =
          (offsets[static_cast<std::size_t>(i)] -
           offsets[static_cast<std::size_t>(j)])
              .lpNorm<Eigen::Infinity>() <= tol;
      rho(i, j) = same_block
                      ? strategy.terms()[static_cast<std::size_t>(i)].amplitude *
                            std::conj(
                                strategy.terms()[static_cast<std::size_t>(j)]
                                    .amplitude)
                      : std::complex<double>(0.0, 0.0);
    }
  }
  return MixedKState(std::move(labels), std::move(rho));
}

PsdOrder psd_compare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                     double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    fail(ErrorCode::ShapeMismatch, "matrices must be square and equally sized");
  }
  const double scale_tol =
      tol * (1.0 + a.operatorNorm() + b.operatorNorm());
  if ((a - a.transpose()).lpNorm<Eigen::Infinity>() > scale_tol ||
      (b - b.transpose()).lpNorm<Eigen::Infinity>() > scale_tol) {
    fail(ErrorCode::NonHermitian, "matrices must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a - b,
                                                     Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  const double max_eig = eig.eigenvalues().maxCoeff();
  if (std::abs(min_eig) <= scale_tol && std::abs(max_eig) <= scale_tol) {
    return PsdOrder::Equal;
  }
  if (min_eig >= -scale_tol) return PsdOrder::Greater;
  if (max_eig <= scale_tol) return PsdOrder::Less;
  return PsdOrder::Incomparable;
}

}  // namespace dfsmet
