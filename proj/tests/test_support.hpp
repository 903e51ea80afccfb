#pragma once

// Shared fixtures and random-instance generators for the test suites. The
// numbers in the fixtures come from the worked four-sensor examples shipped
// with the library data files.

#include "dfsmet/dfs.hpp"
#include "dfsmet/model.hpp"

#include <complex>
#include <random>
#include <vector>

namespace dfsmet::testing {

/// Four-sensor network with two signals and two correlated noise fields.
/// The second signal row as printed in the source material makes its own
/// downstream numbers impossible; this is the corrected variant that
/// reproduces them (see data/README.md).
inline SensorNetwork example1_network(double time = 1.0) {
  Eigen::MatrixXd signal(2, 4);
  signal << 1.2, 1.2, 1.2, 1.2, 0.6, 1.2, 1.2, 0.6;
  Eigen::MatrixXd noise(2, 4);
  noise << 1, 1, -1, -1, -1, 1, -1, 1;
  return SensorNetwork(signal, noise, time);
}

/// The variant with the signal row exactly as printed.
inline SensorNetwork example1_network_printed(double time = 1.0) {
  Eigen::MatrixXd signal(2, 4);
  signal << 1.2, 1.2, 1.2, 1.2, 0.6, 1.2, 0.6, 1.2;
  Eigen::MatrixXd noise(2, 4);
  noise << 1, 1, -1, -1, -1, 1, -1, 1;
  return SensorNetwork(signal, noise, time);
}

/// Four-sensor network with rounded non-integer vertices.
inline SensorNetwork example2_network(double time = 1.0) {
  Eigen::MatrixXd signal(2, 4);
  signal << 0.47, 0.47, 0.70, 0.24, -0.97, 0.24, -0.34, -0.57;
  Eigen::MatrixXd noise(2, 4);
  noise << -0.09, -0.36, 0.10, 0.91, 0.80, -0.73, 0.92, 0.12;
  return SensorNetwork(signal, noise, time);
}

/// Three sensors, one constant noise field, one signal (1, -1, 0).
inline SensorNetwork affine3_network(double time = 1.0) {
  Eigen::MatrixXd signal(1, 3);
  signal << 1, -1, 0;
  Eigen::MatrixXd noise(1, 3);
  noise << 1, 1, 1;
  return SensorNetwork(signal, noise, time);
}

/// The example-1 state psi(gamma, mu, nu) expanded in the |k> basis.
inline PureStrategy example1_psi(double gamma, std::complex<double> mu,
                                 std::complex<double> nu) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::VectorXd k1(4), k2(4);
  k1 << gamma, 1, 1, gamma;
  k2 << gamma, -1, -1, gamma;
  std::vector<PureTerm> terms;
  terms.push_back({SpinVector(k1), nu * inv_sqrt2});
  terms.push_back({SpinVector(k2), mu * inv_sqrt2});
  terms.push_back({SpinVector(-k1), mu * inv_sqrt2});
  terms.push_back({SpinVector(-k2), nu * inv_sqrt2});
  return PureStrategy(std::move(terms));
}

/// Equal superposition of the three DFS vertices of the affine example
/// (offset = 0) or of the affine block DFS_1 (offset = 1).
inline PureStrategy affine3_wstate(int offset) {
  std::vector<Eigen::VectorXd> labels;
  if (offset == 0) {
    labels = {Eigen::Vector3d(1, 0, -1), Eigen::Vector3d(-1, 1, 0),
              Eigen::Vector3d(0, -1, 1)};
  } else {
    labels = {Eigen::Vector3d(1, 1, -1), Eigen::Vector3d(-1, 1, 1),
              Eigen::Vector3d(1, -1, 1)};
  }
  const double amplitude = 1.0 / std::sqrt(3.0);
  std::vector<PureTerm> terms;
  for (const auto& label : labels) {
    terms.push_back({SpinVector(label), amplitude});
  }
  return PureStrategy(std::move(terms));
}

// ---------------------------------------------------------------------------
// Random instances

using Rng = std::mt19937_64;

/// Random noise matrix with a nontrivial kernel: m rows over n sensors with
/// small integer entries, m < n.
inline Eigen::MatrixXd random_noise(Rng& rng, Eigen::Index n, Eigen::Index m) {
  std::uniform_int_distribution<int> entry(-2, 2);
  while (true) {
    Eigen::MatrixXd noise(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) noise(i, j) = entry(rng);
    }
    if (m == 0) return noise;
    if (noise.cwiseAbs().rowwise().sum().minCoeff() > 0 &&
        kernel_basis(noise).cols() > 0) {
      return noise;
    }
  }
}

inline Eigen::MatrixXd random_signal(Rng& rng, Eigen::Index s, Eigen::Index n) {
  std::uniform_real_distribution<double> entry(-1.5, 1.5);
  Eigen::MatrixXd signal(s, n);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) signal(i, j) = entry(rng);
  }
  return signal;
}

/// Random point of the DFS as a convex combination of its vertices.
inline SpinVector random_dfs_point(Rng& rng, const DfsPolytope& polytope) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd point = Eigen::VectorXd::Zero(polytope.sensors());
  double total = 0.0;
  std::vector<double> weights(polytope.vertices().size());
  for (auto& w : weights) {
    w = unit(rng);
    total += w;
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    point += (weights[i] / total) * polytope.vertices()[i].vec();
  }
  return SpinVector(point);
}

/// Random normalized complex amplitudes.
inline std::vector<std::complex<double>> random_amplitudes(Rng& rng,
                                                           std::size_t count) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::complex<double>> amplitudes(count);
  double norm2 = 0.0;
  for (auto& c : amplitudes) {
    c = {normal(rng), normal(rng)};
    norm2 += std::norm(c);
  }
  for (auto& c : amplitudes) c /= std::sqrt(norm2);
  return amplitudes;
}

/// Random pure strategy with distinct labels inside the DFS.
inline PureStrategy random_dfs_strategy(Rng& rng, const DfsPolytope& polytope,
                                        std::size_t max_terms = 4) {
  std::uniform_int_distribution<std::size_t> count_dist(1, max_terms);
  while (true) {
    const std::size_t count = count_dist(rng);
    std::vector<Eigen::VectorXd> labels;
    for (std::size_t i = 0; i < count; ++i) {
      labels.push_back(random_dfs_point(rng, polytope).vec());
    }
    bool distinct = true;
    for (std::size_t i = 0; i < labels.size() && distinct; ++i) {
      for (std::size_t j = i + 1; j < labels.size(); ++j) {
        if ((labels[i] - labels[j]).lpNorm<Eigen::Infinity>() <= 1e-6) {
          distinct = false;
          break;
        }
      }
    }
    if (!distinct) continue;
    const auto amplitudes = random_amplitudes(rng, count);
    std::vector<PureTerm> terms;
    for (std::size_t i = 0; i < count; ++i) {
      terms.push_back({SpinVector(labels[i]), amplitudes[i]});
    }
    return PureStrategy(std::move(terms));
  }
}

}  // namespace dfsmet::testing
