#pragma once

#include "dfsmet/model.hpp"

#include <cstdint>
#include <vector>

namespace dfsmet {

enum class NoiseMode { Off, Gaussian, Infinite };

const char* to_string(NoiseMode mode);

/// Per-shot correlated-noise model: each noise field amplitude beta_l is
/// drawn independently as sigma_l * N(0, 1). Infinite mode replaces sampling
/// with the exactly dephased outcome distribution for coupled states.
struct NoiseModel {
  Eigen::VectorXd sigma;
  NoiseMode mode = NoiseMode::Off;

  static NoiseModel off() { return {Eigen::VectorXd(), NoiseMode::Off}; }
  static NoiseModel gaussian(Eigen::VectorXd sigmas) {
    return {std::move(sigmas), NoiseMode::Gaussian};
  }
  static NoiseModel infinite() {
    return {Eigen::VectorXd(), NoiseMode::Infinite};
  }
};

struct FlipEvent {
  int sensor;
  double time;
};

struct ShotRecord {
  int direction;
  int parity;  // +1 or -1
  double offset;
};

struct EstimationReport {
  Eigen::VectorXd estimates;
  Eigen::MatrixXd covariance;      // empirical, over independent repetitions
  Eigen::MatrixXd crb;             // F^{-1} / (preparations per repetition)
  long long shots_used = 0;
  int repetitions = 0;
};

/// Local bit-flip times t_j = (1 + k_j) T / 2 realizing the effective spins.
/// Flips at 0 or T are suppressed (k_j = -1 and k_j = +1 need none).
std::vector<FlipEvent> flip_schedule(const SpinVector& k, double time);

/// Relative phase accumulated by |GHZ_k>: phi = 2 T (alpha^T S k + beta^T N k).
double ghz_phase(const SensorNetwork& network, const SpinVector& k,
                 const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta);

/// Parity click probability of the local readout: p(+1) = (1 + sin(phi + offset)) / 2.
double parity_probability(double phi, double offset);

/// Draws parity shots for one GHZ direction. Randomness is derived per shot
/// from (seed, direction_index, shot index), so streams are reproducible and
/// independent of evaluation order; shot indices start at first_shot.
std::vector<ShotRecord> sample_shots(const SensorNetwork& network,
                                     const SpinVector& k,
                                     const Eigen::VectorXd& alpha,
                                     const NoiseModel& noise, double offset,
                                     long long shots, std::uint64_t seed,
                                     int direction_index = 0,
                                     long long first_shot = 0);

/// Maximum-likelihood phase from the two quadrature counts (offsets 0 and
/// pi/2). plus0/plus1 count +1 outcomes among n0/n1 shots.
double estimate_phase(long long plus0, long long n0, long long plus1,
                      long long n1);

/// Runs the full sequential-GHZ estimation protocol: per repetition, shots
/// are allocated to directions proportionally to the rates (largest-remainder
/// rounding, budget = shots_per_direction * directions), each direction is
/// read at the two quadratures, and alpha is recovered by weighted least
/// squares. Covariance is empirical over the repetitions.
EstimationReport estimate_parameters(const SensorNetwork& network,
                                     const SequentialStrategy& strategy,
                                     const Eigen::VectorXd& alpha_true,
                                     const NoiseModel& noise,
                                     long long shots_per_direction,
                                     int repetitions, std::uint64_t seed);

}  // namespace dfsmet
