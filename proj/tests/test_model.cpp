#include "dfsmet/model.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <random>

using namespace dfsmet;

TEST_CASE("validate_network accepts the worked four-sensor example") {
  const SensorNetwork network = testing::example1_network();
  CHECK(network.sensors() == 4);
  CHECK(network.signals() == 2);
  CHECK(network.noise_sources() == 2);
  CHECK(network.time() == 1.0);
}

TEST_CASE("validate_network accepts a minimal noiseless network") {
  Eigen::MatrixXd signal(1, 1);
  signal << 1.0;
  const SensorNetwork network =
      validate_network(signal, Eigen::MatrixXd(0, 1), 1.0);
  CHECK(network.sensors() == 1);
  CHECK(network.noise_sources() == 0);
}

TEST_CASE("validate_network rejects mismatched column counts") {
  Eigen::MatrixXd signal(2, 3);
  signal.setOnes();
  Eigen::MatrixXd noise(1, 4);
  noise.setOnes();
  CHECK_THROWS_WITH_AS(validate_network(signal, noise, 1.0),
                       doctest::Contains("DimensionMismatch"), Error);
}

TEST_CASE("validate_network rejects bad time and non-finite entries") {
  Eigen::MatrixXd signal(1, 2);
  signal << 1.0, 2.0;
  Eigen::MatrixXd noise(0, 2);
  CHECK_THROWS_AS(validate_network(signal, noise, 0.0), Error);
  CHECK_THROWS_AS(validate_network(signal, noise, -1.0), Error);
  signal(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(validate_network(signal, noise, 1.0),
                       doctest::Contains("NonFinite"), Error);
}

TEST_CASE("network_from_samples assembles field tables") {
  const SensorNetwork network = network_from_samples(
      {{1.2, 1.2, 1.2, 1.2}, {0.6, 1.2, 1.2, 0.6}}, {}, 1.0);
  CHECK(network.signal().row(0).isApproxToConstant(1.2));
  CHECK(network.noise_sources() == 0);

  CHECK_THROWS_WITH_AS(
      network_from_samples({{1.0, 2.0}, {1.0}}, {}, 1.0),
      doctest::Contains("DimensionMismatch"), Error);
}

TEST_CASE("spin vectors enforce the hypercube bound") {
  CHECK_NOTHROW(SpinVector(Eigen::Vector2d(1.0, -1.0)));
  CHECK_NOTHROW(SpinVector(Eigen::Vector2d(0.3, 1.0 + 1e-10)));
  CHECK_THROWS_AS(SpinVector(Eigen::Vector2d(1.1, 0.0)), Error);
  const SpinVector k(Eigen::Vector2d(0.25, -1.0));
  CHECK(k.negated().vec() == Eigen::Vector2d(-0.25, 1.0));
}

TEST_CASE("canonical_sign picks the lexicographically larger label") {
  Eigen::VectorXd k(4);
  k << -1, 1, 1, -1;
  Eigen::VectorXd expected(4);
  expected << 1, -1, -1, 1;
  CHECK(canonical_sign(k) == expected);
  CHECK(canonical_sign(expected) == expected);
}

TEST_CASE("pure strategies merge duplicate labels and renormalize") {
  const double a = std::sqrt(0.5);
  std::vector<PureTerm> terms;
  terms.push_back({SpinVector(Eigen::Vector2d(1, 1)), a / 2.0});
  terms.push_back({SpinVector(Eigen::Vector2d(1, 1)), a / 2.0});
  terms.push_back({SpinVector(Eigen::Vector2d(1, -1)), a});
  const PureStrategy strategy(terms);
  CHECK(strategy.size() == 2);
  double norm2 = 0.0;
  for (const auto& term : strategy.terms()) norm2 += std::norm(term.amplitude);
  CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("pure strategies reject unnormalized amplitudes") {
  std::vector<PureTerm> terms;
  terms.push_back({SpinVector(Eigen::Vector2d(1, 1)), 0.5});
  CHECK_THROWS_WITH_AS(PureStrategy{terms},
                       doctest::Contains("InvalidStrategy"), Error);
}

TEST_CASE("sequential strategies merge sign pairs and renormalize exactly") {
  std::vector<SequentialTerm> terms;
  terms.push_back({SpinVector(Eigen::Vector2d(1, 1)), 0.25});
  terms.push_back({SpinVector(Eigen::Vector2d(-1, -1)), 0.25});
  terms.push_back({SpinVector(Eigen::Vector2d(1, -1)), 0.5});
  const SequentialStrategy strategy(terms);
  CHECK(strategy.size() == 2);

  double total = 0.0;
  for (const auto& term : strategy.terms()) total += term.rate;
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("sequential strategies reject bad rates") {
  std::vector<SequentialTerm> terms;
  terms.push_back({SpinVector(Eigen::Vector2d(1, 1)), -0.5});
  terms.push_back({SpinVector(Eigen::Vector2d(1, -1)), 1.5});
  CHECK_THROWS_AS(SequentialStrategy{terms}, Error);
  terms.clear();
  terms.push_back({SpinVector(Eigen::Vector2d(1, 1)), 0.9});
  CHECK_THROWS_AS(SequentialStrategy{terms}, Error);
}

TEST_CASE("weight matrices must be symmetric and PSD") {
  CHECK_NOTHROW(WeightMatrix::identity(3));
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(WeightMatrix{asym}, Error);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  CHECK_THROWS_WITH_AS(WeightMatrix{indefinite},
                       doctest::Contains("NegativeEigenvalue"), Error);
}

TEST_CASE("mixed states validate coefficients") {
  const std::vector<SpinVector> labels{SpinVector(Eigen::Vector2d(1, 1)),
                                       SpinVector(Eigen::Vector2d(1, -1))};
  Eigen::MatrixXcd rho(2, 2);
  rho << 0.5, 0.0, 0.0, 0.5;
  CHECK_NOTHROW(MixedKState(labels, rho));

  rho(0, 1) = {0.0, 0.3};
  rho(1, 0) = {0.0, 0.3};  // not Hermitian: should be the conjugate
  CHECK_THROWS_WITH_AS((MixedKState{labels, rho}),
                       doctest::Contains("NonHermitian"), Error);

  rho(0, 1) = {0.0, 0.0};
  rho(1, 0) = {0.0, 0.0};
  rho(0, 0) = 0.8;  // trace 1.3
  CHECK_THROWS_AS((MixedKState{labels, rho}), Error);
}

TEST_CASE("random constructor round trips keep invariants") {
  testing::Rng rng(20240817);
  std::uniform_int_distribution<int> n_dist(1, 6);
  std::uniform_int_distribution<std::size_t> terms_dist(1, 5);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = n_dist(rng);
    const std::size_t count = terms_dist(rng);

    std::vector<SequentialTerm> seq_terms;
    std::vector<double> rates(count);
    double total = 0.0;
    for (auto& r : rates) {
      r = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
      total += r;
    }
    for (std::size_t i = 0; i < count; ++i) {
      Eigen::VectorXd k(n);
      for (int j = 0; j < n; ++j) k[j] = entry(rng);
      seq_terms.push_back({SpinVector(k), rates[i] / total});
    }
    const SequentialStrategy sequential(seq_terms);
    double sum = 0.0;
    for (const auto& term : sequential.terms()) {
      CHECK(term.rate > 0.0);
      CHECK(term.k.vec().lpNorm<Eigen::Infinity>() <= 1.0 + 1e-9);
      sum += term.rate;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}
