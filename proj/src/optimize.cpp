#include "dfsmet/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace dfsmet {

namespace {

/// Signal images of the vertex-pair representatives, one column per rep.
Eigen::MatrixXd representative_images(const DfsPolytope& polytope,
                                      const SensorNetwork& network,
                                      const std::vector<int>& reps) {
  Eigen::MatrixXd images(network.signals(),
                         static_cast<Eigen::Index>(reps.size()));
  for (std::size_t i = 0; i < reps.size(); ++i) {
    images.col(static_cast<Eigen::Index>(i)) =
        network.signal() *
        polytope.vertices()[static_cast<std::size_t>(reps[i])].vec();
  }
  return images;
}

struct MeritEval {
  double value;
  Eigen::VectorXd gradient;
};

/// tr(W F(r)^{-1}) and its gradient, evaluated through the spectral
/// pseudo-inverse of F(r) = 4 T^2 A diag(r) A^T. Raises SingularQfim when a
/// null direction of F carries weight in W.
MeritEval evaluate_merit(const Eigen::MatrixXd& images,
                         const Eigen::MatrixXd& weight, double time,
                         const Eigen::VectorXd& rates, bool want_gradient,
                         double tol) {
  const double factor = 4.0 * time * time;
  const Eigen::MatrixXd f =
      factor * images * rates.asDiagonal() * images.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const Eigen::MatrixXd& vectors = eig.eigenvectors();
  const double threshold =
      std::max(tol, 1e-13) * std::max(1.0, values.cwiseAbs().maxCoeff());

  Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(f.rows(), f.cols());
  double merit = 0.0;
  const double weight_scale = 1.0 + weight.lpNorm<Eigen::Infinity>();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const Eigen::VectorXd u = vectors.col(i);
    if (values[i] <= threshold) {
      if ((weight * u).lpNorm<Eigen::Infinity>() > tol * weight_scale) {
        fail(ErrorCode::SingularQfim,
             "QFIM has a null direction with nonzero weight; the "
             "corresponding parameter combination is unidentifiable");
      }
      continue;
    }
    merit += u.dot(weight * u) / values[i];
    pinv.noalias() += (1.0 / values[i]) * u * u.transpose();
  }

  MeritEval out;
  out.value = merit;
  if (want_gradient) {
    const Eigen::MatrixXd core = pinv * weight * pinv;
    out.gradient.resize(rates.size());
    for (Eigen::Index i = 0; i < rates.size(); ++i) {
      const Eigen::VectorXd a = images.col(i);
      out.gradient[i] = -factor * a.dot(core * a);
    }
  }
  return out;
}

}  // namespace

SequentialStrategy RateSolution::strategy(const DfsPolytope& polytope) const {
  std::vector<SequentialTerm> terms;
  for (const auto& [index, rate] : rates) {
    if (rate <= 1e-12) continue;
    terms.push_back(
        {SpinVector(canonical_sign(
             polytope.vertices()[static_cast<std::size_t>(index)].vec())),
         rate});
  }
  double total = 0.0;
  for (const auto& term : terms) total += term.rate;
  std::vector<SequentialTerm> normalized;
  normalized.reserve(terms.size());
  for (auto& term : terms) {
    normalized.push_back({term.k, term.rate / total});
  }
  return SequentialStrategy(std::move(normalized));
}

double figure_of_merit(const WeightMatrix& weight, const Qfim& qfim,
                       double tol) {
  if (weight.size() != qfim.size()) {
    fail(ErrorCode::ShapeMismatch, "weight and QFIM sizes differ");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(qfim.mat());
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double threshold =
      std::max(tol, 1e-13) * std::max(1.0, values.cwiseAbs().maxCoeff());
  const double weight_scale = 1.0 + weight.mat().lpNorm<Eigen::Infinity>();
  double merit = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const Eigen::VectorXd u = eig.eigenvectors().col(i);
    if (values[i] <= threshold) {
      if ((weight.mat() * u).lpNorm<Eigen::Infinity>() > tol * weight_scale) {
        fail(ErrorCode::SingularQfim,
             "QFIM is singular along a weighted direction");
      }
      continue;
    }
    merit += u.dot(weight.mat() * u) / values[i];
  }
  return merit;
}

double merit_at_rates(const DfsPolytope& polytope,
                      const SensorNetwork& network, const WeightMatrix& weight,
                      const Eigen::VectorXd& rates) {
  const std::vector<int> reps = polytope.representative_indices();
  if (rates.size() != static_cast<Eigen::Index>(reps.size())) {
    fail(ErrorCode::ShapeMismatch, "one rate per vertex pair required");
  }
  const Eigen::MatrixXd images = representative_images(polytope, network, reps);
  return evaluate_merit(images, weight.mat(), network.time(), rates, false,
                        kDefaultTol)
      .value;
}

Eigen::VectorXd merit_gradient(const DfsPolytope& polytope,
                               const SensorNetwork& network,
                               const WeightMatrix& weight,
                               const Eigen::VectorXd& rates) {
  const std::vector<int> reps = polytope.representative_indices();
  if (rates.size() != static_cast<Eigen::Index>(reps.size())) {
    fail(ErrorCode::ShapeMismatch, "one rate per vertex pair required");
  }
  const Eigen::MatrixXd images = representative_images(polytope, network, reps);
  return evaluate_merit(images, weight.mat(), network.time(), rates, true,
                        kDefaultTol)
      .gradient;
}

RateSolution optimal_rates_orthogonal(const DfsPolytope& polytope,
                                      const SensorNetwork& network,
                                      const WeightMatrix& weight, double tol) {
  if (weight.size() != network.signals()) {
    fail(ErrorCode::ShapeMismatch, "weight size does not match signal count");
  }
  const std::vector<int> reps = polytope.representative_indices();
  const auto pair_count = static_cast<Eigen::Index>(reps.size());
  for (Eigen::Index i = 0; i < pair_count; ++i) {
    const Eigen::VectorXd& vi =
        polytope.vertices()[static_cast<std::size_t>(reps[static_cast<std::size_t>(i)])].vec();
    for (Eigen::Index j = i + 1; j < pair_count; ++j) {
      const Eigen::VectorXd& vj =
          polytope.vertices()[static_cast<std::size_t>(reps[static_cast<std::size_t>(j)])].vec();
      if (std::abs(vi.dot(vj)) > std::max(tol, 1e-9) * vi.norm() * vj.norm()) {
        fail(ErrorCode::NonOrthogonalVertices,
             "vertex representatives are not mutually orthogonal");
      }
    }
  }

  // Restrict the signal map to kernel coordinates; it must have full row
  // rank for the parameters to stay identifiable.
  const Eigen::MatrixXd restricted =
      network.signal() * polytope.kernel_basis();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      restricted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double sv_threshold =
      1e-12 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0) *
      static_cast<double>(std::max(restricted.rows(), restricted.cols()));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > sv_threshold) ++rank;
  }
  if (rank < network.signals()) {
    fail(ErrorCode::SingularRestrictedSignal,
         "signal map restricted to the DFS does not reach all parameters");
  }

  // Right pseudoinverse (the inverse when the restricted map is square).
  Eigen::MatrixXd pinv(restricted.cols(), restricted.rows());
  pinv.setZero();
  for (Eigen::Index i = 0; i < rank; ++i) {
    pinv.noalias() +=
        (1.0 / sv[i]) * svd.matrixV().col(i) * svd.matrixU().col(i).transpose();
  }

  const Eigen::MatrixXd w_kernel = pinv * weight.mat() * pinv.transpose();
  Eigen::VectorXd coeffs(pair_count);
  for (Eigen::Index i = 0; i < pair_count; ++i) {
    const Eigen::VectorXd y =
        polytope.kernel_basis().transpose() *
        polytope.vertices()[static_cast<std::size_t>(reps[static_cast<std::size_t>(i)])].vec();
    const double norm2 = y.squaredNorm();
    coeffs[i] = y.dot(w_kernel * y) / (norm2 * norm2);
  }

  Eigen::VectorXd rates(pair_count);
  const double total = coeffs.cwiseMax(0.0).cwiseSqrt().sum();
  if (total <= 0.0) {
    rates.setConstant(1.0 / static_cast<double>(pair_count));
  } else {
    for (Eigen::Index i = 0; i < pair_count; ++i) {
      rates[i] = std::sqrt(std::max(0.0, coeffs[i])) / total;
    }
  }

  RateSolution solution;
  for (Eigen::Index i = 0; i < pair_count; ++i) {
    solution.rates.emplace_back(reps[static_cast<std::size_t>(i)], rates[i]);
  }
  solution.objective = merit_at_rates(polytope, network, weight, rates);
  solution.iterations = 0;
  solution.converged = true;
  return solution;
}

RateSolution optimize_rates(const DfsPolytope& polytope,
                            const SensorNetwork& network,
                            const WeightMatrix& weight,
                            const OptimizeOptions& options) {
  if (weight.size() != network.signals()) {
    fail(ErrorCode::ShapeMismatch, "weight size does not match signal count");
  }
  const std::vector<int> reps = polytope.representative_indices();
  const auto pair_count = static_cast<Eigen::Index>(reps.size());
  const Eigen::MatrixXd images = representative_images(polytope, network, reps);

  Eigen::VectorXd rates =
      Eigen::VectorXd::Constant(pair_count, 1.0 / static_cast<double>(pair_count));

  const auto clip = [&](const Eigen::VectorXd& r) {
    Eigen::VectorXd clipped = r.cwiseMax(options.rate_floor);
    return Eigen::VectorXd(clipped / clipped.sum());
  };

  MeritEval current;
  try {
    current = evaluate_merit(images, weight.mat(), network.time(), clip(rates),
                             true, kDefaultTol);
  } catch (const Error& error) {
    if (error.code() == ErrorCode::SingularQfim) {
      fail(ErrorCode::UnidentifiableSignals,
           "vertex images do not span the weighted parameter space");
    }
    throw;
  }

  RateSolution solution;
  solution.converged = false;

  std::deque<double> history;
  history.push_back(current.value);
  double step = 1.0 / (1.0 + current.gradient.lpNorm<Eigen::Infinity>());
  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    if (pair_count == 1) {
      solution.converged = true;
      break;
    }
    // Exponentiated-gradient trial point with Armijo backtracking.
    bool accepted = false;
    for (int attempt = 0; attempt < 200; ++attempt) {
      Eigen::VectorXd z = -step * current.gradient;
      z.array() -= z.maxCoeff();
      Eigen::VectorXd trial = rates.cwiseProduct(z.array().exp().matrix());
      trial /= trial.sum();
      const double predicted = current.gradient.dot(rates - trial);
      MeritEval next = evaluate_merit(images, weight.mat(), network.time(),
                                      clip(trial), true, kDefaultTol);
      if (next.value <= current.value - 1e-4 * predicted) {
        rates = trial;
        current = next;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step underflow: nothing left to gain
    step = std::min(step * 1.5, 1e12);

    history.push_back(current.value);
    if (static_cast<int>(history.size()) > options.stall_window + 1) {
      history.pop_front();
      const double drop = history.front() - history.back();
      if (drop <= options.stall_tol * std::max(std::abs(history.back()), 1e-300)) {
        solution.converged = true;
        break;
      }
    }
  }

  for (Eigen::Index i = 0; i < pair_count; ++i) {
    solution.rates.emplace_back(reps[static_cast<std::size_t>(i)], rates[i]);
  }
  solution.objective = current.value;
  solution.iterations = iteration;
  return solution;
}

AffineComparison compare_affine(const SensorNetwork& network,
                                const PureStrategy& strategy_affine,
                                double tol) {
  const KMatrix k_affine = k_matrix_pure(strategy_affine);
  const PureStrategy centered = center_affine(strategy_affine, network, tol);
  const KMatrix k_centered = k_matrix_pure(centered);

  AffineComparison out{k_affine, k_centered, false, false};
  const double scale = 1.0 + k_affine.mat().lpNorm<Eigen::Infinity>();
  out.quarter_law_ok = (4.0 * k_centered.mat() - k_affine.mat())
                           .lpNorm<Eigen::Infinity>() <= 1e-12 * scale;

  if (k_affine.mat().lpNorm<Eigen::Infinity>() <= 1e-14) {
    out.ratio_bound_ok = true;  // zero K: nothing to dominate
    return out;
  }
  const ImprovementTrace trace = improve_pipeline(centered, network, tol);
  const PsdOrder order = psd_compare(trace.final_k().mat(),
                                     (k_affine.mat() / 4.0).eval(), tol);
  out.ratio_bound_ok =
      order == PsdOrder::Greater || order == PsdOrder::Equal;
  return out;
}

}  // namespace dfsmet
