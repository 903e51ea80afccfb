#include "dfsmet/simulate.hpp"

#include "dfsmet/qfim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dfsmet {

const char* to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::Off: return "off";
    case NoiseMode::Gaussian: return "gaussian";
    case NoiseMode::Infinite: return "infinite";
  }
  return "unknown";
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based randomness: one u64 per (seed, direction, shot, slot).
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t direction,
                           std::uint64_t shot, std::uint64_t slot) {
  std::uint64_t h = splitmix(seed ^ 0x6a09e667f3bcc909ULL);
  h = splitmix(h ^ (direction + 0x9e3779b97f4a7c15ULL));
  h = splitmix(h ^ (shot + 0xbf58476d1ce4e5b9ULL));
  h = splitmix(h ^ (slot + 0x94d049bb133111ebULL));
  return h;
}

double to_unit_open(std::uint64_t h) {
  // (0, 1]; safe as a Box-Muller log argument.
  return static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
}

double to_unit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
}

double standard_normal(std::uint64_t seed, std::uint64_t direction,
                       std::uint64_t shot, std::uint64_t slot) {
  const double u1 = to_unit_open(counter_hash(seed, direction, shot, 2 * slot));
  const double u2 = to_unit(counter_hash(seed, direction, shot, 2 * slot + 1));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

std::vector<FlipEvent> flip_schedule(const SpinVector& k, double time) {
  std::vector<FlipEvent> schedule;
  for (Eigen::Index j = 0; j < k.size(); ++j) {
    // k_j = +1 flips at T (a no-op) and k_j = -1 at 0 (absorbed in the sign).
    if (std::abs(std::abs(k[j]) - 1.0) <= 1e-12) continue;
    schedule.push_back({static_cast<int>(j), (1.0 + k[j]) * time / 2.0});
  }
  return schedule;
}

double ghz_phase(const SensorNetwork& network, const SpinVector& k,
                 const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta) {
  if (alpha.size() != network.signals() ||
      beta.size() != network.noise_sources()) {
    fail(ErrorCode::DimensionMismatch,
         "alpha/beta lengths do not match the network");
  }
  double phase = alpha.dot(effective_energy(network, k));
  if (beta.size() > 0) {
    phase += beta.dot(network.noise() * k.vec());
  }
  return 2.0 * network.time() * phase;
}

double parity_probability(double phi, double offset) {
  return 0.5 * (1.0 + std::sin(phi + offset));
}

std::vector<ShotRecord> sample_shots(const SensorNetwork& network,
                                     const SpinVector& k,
                                     const Eigen::VectorXd& alpha,
                                     const NoiseModel& noise, double offset,
                                     long long shots, std::uint64_t seed,
                                     int direction_index,
                                     long long first_shot) {
  if (shots < 1) {
    fail(ErrorCode::InvalidStrategy, "at least one shot required");
  }
  if (noise.mode == NoiseMode::Gaussian &&
      noise.sigma.size() != network.noise_sources()) {
    fail(ErrorCode::DimensionMismatch,
         "one noise sigma per noise source required");
  }
  if (noise.mode == NoiseMode::Gaussian && noise.sigma.size() > 0 &&
      (!noise.sigma.allFinite() || noise.sigma.minCoeff() < 0.0)) {
    fail(ErrorCode::NonFinite, "noise sigmas must be finite and nonnegative");
  }

  const double signal_phase =
      2.0 * network.time() * alpha.dot(effective_energy(network, k));
  const Eigen::VectorXd coupling = network.noise() * k.vec();
  // Inside the DFS the noise coupling vanishes identically, so the outcome
  // stream is bit-for-bit independent of the noise model.
  const bool coupled = coupling.size() > 0 &&
                       coupling.lpNorm<Eigen::Infinity>() > kDefaultTol;
  const auto dir = static_cast<std::uint64_t>(direction_index);
  const std::uint64_t parity_slot =
      2 * static_cast<std::uint64_t>(network.noise_sources());

  std::vector<ShotRecord> records;
  records.reserve(static_cast<std::size_t>(shots));
  const bool random_phase = coupled && noise.mode == NoiseMode::Gaussian &&
                            noise.sigma.size() > 0 &&
                            noise.sigma.maxCoeff() > 0.0;
  const double fixed_p =
      coupled && noise.mode == NoiseMode::Infinite
          ? 0.5
          : parity_probability(signal_phase, offset);
  for (long long t = first_shot; t < first_shot + shots; ++t) {
    const auto shot = static_cast<std::uint64_t>(t);
    double p = fixed_p;
    if (random_phase) {
      double phi = signal_phase;
      for (Eigen::Index l = 0; l < coupling.size(); ++l) {
        if (noise.sigma[l] > 0.0 && coupling[l] != 0.0) {
          phi += 2.0 * network.time() * noise.sigma[l] * coupling[l] *
                 standard_normal(seed, dir, shot, static_cast<std::uint64_t>(l));
        }
      }
      p = parity_probability(phi, offset);
    }
    const double u = to_unit(counter_hash(seed, dir, shot, parity_slot));
    records.push_back({direction_index, u < p ? 1 : -1, offset});
  }
  return records;
}

double estimate_phase(long long plus0, long long n0, long long plus1,
                      long long n1) {
  const auto log_term = [](long long count, double base) {
    if (count <= 0) return 0.0;
    return static_cast<double>(count) * std::log(std::max(base, 1e-300));
  };
  const auto log_likelihood = [&](double phi) {
    const double s = std::sin(phi);
    const double c = std::cos(phi);
    return log_term(plus0, 1.0 + s) + log_term(n0 - plus0, 1.0 - s) +
           log_term(plus1, 1.0 + c) + log_term(n1 - plus1, 1.0 - c);
  };

  // Global bracket on a grid, then golden-section refinement. The arctangent
  // of the two frequency-based quadrature estimates lies in the same basin.
  constexpr int kGrid = 720;
  double best_phi = 0.0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int g = 0; g <= kGrid; ++g) {
    const double phi = -std::numbers::pi +
                       2.0 * std::numbers::pi * static_cast<double>(g) / kGrid;
    const double value = log_likelihood(phi);
    if (value > best_value) {
      best_value = value;
      best_phi = phi;
    }
  }
  const double width = 2.0 * std::numbers::pi / kGrid;
  double lo = best_phi - width;
  double hi = best_phi + width;
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = log_likelihood(x1);
  double f2 = log_likelihood(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = log_likelihood(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = log_likelihood(x1);
    }
  }
  return 0.5 * (lo + hi);
}

EstimationReport estimate_parameters(const SensorNetwork& network,
                                     const SequentialStrategy& strategy,
                                     const Eigen::VectorXd& alpha_true,
                                     const NoiseModel& noise,
                                     long long shots_per_direction,
                                     int repetitions, std::uint64_t seed) {
  const Eigen::Index s = network.signals();
  if (alpha_true.size() != s) {
    fail(ErrorCode::DimensionMismatch, "alpha length does not match signals");
  }
  if (strategy.sensors() != network.sensors()) {
    fail(ErrorCode::DimensionMismatch, "strategy does not match network");
  }
  if (shots_per_direction < 1 || repetitions < 1) {
    fail(ErrorCode::InvalidStrategy,
         "shots per direction and repetitions must be positive");
  }
  const auto directions = static_cast<Eigen::Index>(strategy.size());

  // Design matrix: phi_i = 2 T (S k_i)^T alpha.
  Eigen::MatrixXd design(directions, s);
  for (Eigen::Index i = 0; i < directions; ++i) {
    design.row(i) =
        2.0 * network.time() *
        effective_energy(network, strategy.terms()[static_cast<std::size_t>(i)].k)
            .transpose();
  }
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
    const double threshold = 1e-12 * std::max(1.0, svd.singularValues()[0]) *
                             static_cast<double>(std::max(directions, s));
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()[i] > threshold) ++rank;
    }
    if (rank < s) {
      fail(ErrorCode::UnidentifiableSignals,
           "probe directions do not span the parameter space");
    }
  }

  const Eigen::VectorXd phi_true = design * alpha_true;
  for (Eigen::Index i = 0; i < directions; ++i) {
    if (std::abs(phi_true[i]) >= std::numbers::pi / 2.0) {
      std::ostringstream msg;
      msg << "direction " << i << " accumulates phase " << phi_true[i]
          << "; reduce alpha or T";
      fail(ErrorCode::PhaseWrap, msg.str());
    }
  }

  // Largest-remainder allocation of the per-repetition budget.
  const long long budget = shots_per_direction * directions;
  std::vector<long long> allocation(static_cast<std::size_t>(directions), 0);
  {
    std::vector<std::pair<double, Eigen::Index>> remainders;
    long long assigned = 0;
    for (Eigen::Index i = 0; i < directions; ++i) {
      const double exact =
          strategy.terms()[static_cast<std::size_t>(i)].rate *
          static_cast<double>(budget);
      allocation[static_cast<std::size_t>(i)] =
          static_cast<long long>(std::floor(exact));
      assigned += allocation[static_cast<std::size_t>(i)];
      remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::sort(remainders.begin(), remainders.end(),
              [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
              });
    const long long deficit = budget - assigned;
    for (long long idx = 0; idx < deficit; ++idx) {
      ++allocation[static_cast<std::size_t>(
          remainders[static_cast<std::size_t>(idx)].second)];
    }
  }

  {
    // Directions that received no shots carry no information; the rest must
    // still span the parameter space.
    Eigen::MatrixXd populated(directions, s);
    Eigen::Index populated_rows = 0;
    for (Eigen::Index i = 0; i < directions; ++i) {
      if (allocation[static_cast<std::size_t>(i)] > 0) {
        populated.row(populated_rows++) = design.row(i);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(populated.topRows(populated_rows));
    const double threshold = 1e-12 * std::max(1.0, svd.singularValues()[0]) *
                             static_cast<double>(std::max(populated_rows, s));
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()[i] > threshold) ++rank;
    }
    if (rank < s) {
      fail(ErrorCode::UnidentifiableSignals,
           "shot allocation left the parameter space unresolved");
    }
  }

  // Weighted least squares factor, weights = shots per direction.
  Eigen::VectorXd weights(directions);
  for (Eigen::Index i = 0; i < directions; ++i) {
    weights[i] = static_cast<double>(allocation[static_cast<std::size_t>(i)]);
  }
  const Eigen::MatrixXd normal_matrix =
      design.transpose() * weights.asDiagonal() * design;
  const Eigen::LDLT<Eigen::MatrixXd> solver(normal_matrix);

  Eigen::MatrixXd estimates(s, repetitions);
  for (int rep = 0; rep < repetitions; ++rep) {
    Eigen::VectorXd phi_hat(directions);
    for (Eigen::Index i = 0; i < directions; ++i) {
      const long long total = allocation[static_cast<std::size_t>(i)];
      if (total == 0) {
        phi_hat[i] = 0.0;
        continue;
      }
      const long long n0 = total - total / 2;
      const long long n1 = total / 2;
      const long long base = static_cast<long long>(rep) * total;
      const auto& k = strategy.terms()[static_cast<std::size_t>(i)].k;
      long long plus0 = 0;
      for (const ShotRecord& record :
           sample_shots(network, k, alpha_true, noise, 0.0, n0, seed,
                        static_cast<int>(i), base)) {
        if (record.parity > 0) ++plus0;
      }
      long long plus1 = 0;
      if (n1 > 0) {
        for (const ShotRecord& record :
             sample_shots(network, k, alpha_true, noise,
                          std::numbers::pi / 2.0, n1, seed,
                          static_cast<int>(i), base + n0)) {
          if (record.parity > 0) ++plus1;
        }
      }
      phi_hat[i] = estimate_phase(plus0, n0, plus1, n1);
      if (std::abs(phi_hat[i]) >= std::numbers::pi / 2.0) {
        fail(ErrorCode::PhaseWrap, "estimated phase left the linear window");
      }
    }
    estimates.col(rep) =
        solver.solve(design.transpose() * (weights.asDiagonal() * phi_hat));
  }

  EstimationReport report;
  report.estimates = estimates.rowwise().mean();
  report.covariance = Eigen::MatrixXd::Zero(s, s);
  if (repetitions > 1) {
    for (int rep = 0; rep < repetitions; ++rep) {
      const Eigen::VectorXd delta = estimates.col(rep) - report.estimates;
      report.covariance.noalias() += delta * delta.transpose();
    }
    report.covariance /= static_cast<double>(repetitions - 1);
  }
  const Qfim per_shot = qfim_from_k(network, k_matrix_sequential(strategy));
  report.crb = per_shot.mat().inverse() / static_cast<double>(budget);
  report.shots_used = budget * repetitions;
  report.repetitions = repetitions;
  return report;
}

}  // namespace dfsmet
