#include "dfsmet/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dfsmet {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::InvalidStrategy: return "InvalidStrategy";
    case ErrorCode::EmptyDfs: return "EmptyDfs";
    case ErrorCode::NotInDfs: return "NotInDfs";
    case ErrorCode::MixedAffineBlocks: return "MixedAffineBlocks";
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotGhzForm: return "NotGhzForm";
    case ErrorCode::DegenerateStrategy: return "DegenerateStrategy";
    case ErrorCode::SingularQfim: return "SingularQfim";
    case ErrorCode::NonOrthogonalVertices: return "NonOrthogonalVertices";
    case ErrorCode::SingularRestrictedSignal: return "SingularRestrictedSignal";
    case ErrorCode::UnidentifiableSignals: return "UnidentifiableSignals";
    case ErrorCode::PhaseWrap: return "PhaseWrap";
  }
  return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

bool approx_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  double tol) {
  if (a.size() != b.size()) return false;
  return (a - b).lpNorm<Eigen::Infinity>() <= tol;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = std::min(a.size(), b.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return a.size() < b.size();
}

Eigen::VectorXd canonical_sign(const Eigen::VectorXd& k) {
  return lex_less(k, -k) ? Eigen::VectorXd(-k) : k;
}

SpinVector::SpinVector(Eigen::VectorXd entries, double tol)
    : entries_(std::move(entries)) {
  if (entries_.size() == 0) {
    fail(ErrorCode::DimensionMismatch, "spin vector must not be empty");
  }
  if (!entries_.allFinite()) {
    fail(ErrorCode::NonFinite, "spin vector has non-finite entries");
  }
  const double norm = entries_.lpNorm<Eigen::Infinity>();
  if (norm > 1.0 + tol) {
    std::ostringstream msg;
    msg << "spin vector infinity norm " << norm << " exceeds 1";
    fail(ErrorCode::InvalidStrategy, msg.str());
  }
}

SpinVector SpinVector::negated() const {
  SpinVector out = *this;
  out.entries_ = -out.entries_;
  return out;
}

SensorNetwork::SensorNetwork(Eigen::MatrixXd signal, Eigen::MatrixXd noise,
                             double time)
    : signal_(std::move(signal)), noise_(std::move(noise)), time_(time) {
  if (signal_.rows() < 1 || signal_.cols() < 1) {
    fail(ErrorCode::DimensionMismatch, "signal matrix must be non-empty");
  }
  if (noise_.rows() > 0 && noise_.cols() != signal_.cols()) {
    std::ostringstream msg;
    msg << "signal has " << signal_.cols() << " sensors but noise has "
        << noise_.cols();
    fail(ErrorCode::DimensionMismatch, msg.str());
  }
  if (noise_.rows() == 0) {
    noise_.resize(0, signal_.cols());
  }
  if (!signal_.allFinite() || !noise_.allFinite()) {
    fail(ErrorCode::NonFinite, "field samples must be finite");
  }
  if (!(time_ > 0.0) || !std::isfinite(time_)) {
    fail(ErrorCode::NonPositiveTime, "evolution time must be positive");
  }
}

SensorNetwork validate_network(const Eigen::MatrixXd& signal,
                               const Eigen::MatrixXd& noise, double time) {
  return SensorNetwork(signal, noise, time);
}

namespace {

Eigen::MatrixXd table_to_matrix(const SampleTable& table, const char* what) {
  if (table.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t cols = table.front().size();
  for (const auto& row : table) {
    if (row.size() != cols) {
      fail(ErrorCode::DimensionMismatch,
           std::string(what) + " table is ragged");
    }
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(table.size()),
                      static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return out;
}

}  // namespace

SensorNetwork network_from_samples(const SampleTable& signal_samples,
                                   const SampleTable& noise_samples,
                                   double time) {
  Eigen::MatrixXd signal = table_to_matrix(signal_samples, "signal");
  Eigen::MatrixXd noise = table_to_matrix(noise_samples, "noise");
  if (noise.rows() == 0) noise.resize(0, signal.cols());
  return validate_network(signal, noise, time);
}

PureStrategy::PureStrategy(std::vector<PureTerm> terms, double tol) {
  if (terms.empty()) {
    fail(ErrorCode::InvalidStrategy, "pure strategy has no terms");
  }
  const Eigen::Index n = terms.front().k.size();
  for (auto& term : terms) {
    if (term.k.size() != n) {
      fail(ErrorCode::DimensionMismatch,
           "pure strategy labels differ in length");
    }
    // Merge labels that coincide within the dedup tolerance.
    bool merged = false;
    for (auto& kept : terms_) {
      if (approx_equal(kept.k.vec(), term.k.vec(), kLabelDedupTol)) {
        kept.amplitude += term.amplitude;
        merged = true;
        break;
      }
    }
    if (!merged) terms_.push_back(std::move(term));
  }
  double norm2 = 0.0;
  for (const auto& term : terms_) norm2 += std::norm(term.amplitude);
  if (std::abs(norm2 - 1.0) > tol) {
    std::ostringstream msg;
    msg << "amplitudes give total weight " << norm2 << ", expected 1";
    fail(ErrorCode::InvalidStrategy, msg.str());
  }
  std::erase_if(terms_, [](const PureTerm& t) {
    return std::norm(t.amplitude) < 1e-30;
  });
  if (terms_.empty()) {
    fail(ErrorCode::InvalidStrategy, "all amplitudes vanish");
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& term : terms_) term.amplitude *= scale;
}

Eigen::Index PureStrategy::sensors() const noexcept {
  return terms_.front().k.size();
}

SequentialStrategy::SequentialStrategy(std::vector<SequentialTerm> terms,
                                       double tol) {
  if (terms.empty()) {
    fail(ErrorCode::InvalidStrategy, "sequential strategy has no terms");
  }
  const Eigen::Index n = terms.front().k.size();
  for (auto& term : terms) {
    if (term.k.size() != n) {
      fail(ErrorCode::DimensionMismatch,
           "sequential strategy labels differ in length");
    }
    if (!(term.rate > 0.0) || !std::isfinite(term.rate)) {
      fail(ErrorCode::InvalidStrategy, "rates must be positive");
    }
    // k and -k label the same GHZ state; merge by summing rates.
    bool merged = false;
    for (auto& kept : terms_) {
      if (approx_equal(kept.k.vec(), term.k.vec(), kLabelDedupTol) ||
          approx_equal(kept.k.vec(), -term.k.vec(), kLabelDedupTol)) {
        kept.rate += term.rate;
        merged = true;
        break;
      }
    }
    if (!merged) terms_.push_back(std::move(term));
  }
  double total = 0.0;
  for (const auto& term : terms_) total += term.rate;
  if (std::abs(total - 1.0) > tol) {
    std::ostringstream msg;
    msg << "rates sum to " << total << ", expected 1";
    fail(ErrorCode::InvalidStrategy, msg.str());
  }
  for (auto& term : terms_) term.rate /= total;
}

Eigen::Index SequentialStrategy::sensors() const noexcept {
  return terms_.front().k.size();
}

WeightMatrix::WeightMatrix(Eigen::MatrixXd entries, double tol)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    fail(ErrorCode::ShapeMismatch, "weight matrix must be square");
  }
  if (!entries_.allFinite()) {
    fail(ErrorCode::NonFinite, "weight matrix has non-finite entries");
  }
  if ((entries_ - entries_.transpose()).lpNorm<Eigen::Infinity>() > tol) {
    fail(ErrorCode::NonHermitian, "weight matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(entries_,
                                                     Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol) {
    fail(ErrorCode::NegativeEigenvalue,
         "weight matrix has a negative eigenvalue");
  }
}

WeightMatrix WeightMatrix::identity(Eigen::Index size) {
  return WeightMatrix(Eigen::MatrixXd::Identity(size, size));
}

MixedKState::MixedKState(std::vector<SpinVector> labels,
                         Eigen::MatrixXcd coefficients, double tol)
    : labels_(std::move(labels)), coefficients_(std::move(coefficients)) {
  const auto count = static_cast<Eigen::Index>(labels_.size());
  if (count < 1) {
    fail(ErrorCode::InvalidStrategy, "mixed state has no labels");
  }
  if (coefficients_.rows() != count || coefficients_.cols() != count) {
    fail(ErrorCode::ShapeMismatch,
         "coefficient matrix must be square over the labels");
  }
  const Eigen::Index n = labels_.front().size();
  for (const auto& label : labels_) {
    if (label.size() != n) {
      fail(ErrorCode::DimensionMismatch, "mixed-state labels differ in length");
    }
  }
  if ((coefficients_ - coefficients_.adjoint()).cwiseAbs().maxCoeff() > tol) {
    fail(ErrorCode::NonHermitian, "coefficient matrix is not Hermitian");
  }
  const double trace = coefficients_.trace().real();
  if (std::abs(trace - 1.0) > tol) {
    std::ostringstream msg;
    msg << "coefficient matrix trace " << trace << ", expected 1";
    fail(ErrorCode::InvalidStrategy, msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(coefficients_);
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
  if (eigenvalues_.minCoeff() < -tol) {
    fail(ErrorCode::NegativeEigenvalue,
         "coefficient matrix has a negative eigenvalue");
  }
  eigenvalues_ = eigenvalues_.cwiseMax(0.0);
}

Eigen::Index MixedKState::sensors() const noexcept {
  return labels_.front().size();
}

}  // namespace dfsmet
