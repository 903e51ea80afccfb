#include "dfsmet/improve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace dfsmet {

const char* to_string(ImproveStage stage) {
  switch (stage) {
    case ImproveStage::Input: return "input";
    case ImproveStage::Symmetrized: return "symmetrized";
    case ImproveStage::Sequentialized: return "sequentialized";
    case ImproveStage::VertexLifted: return "vertex_lifted";
  }
  return "unknown";
}

namespace {

bool is_zero_label(const Eigen::VectorXd& k) {
  return k.lpNorm<Eigen::Infinity>() <= kLabelDedupTol;
}

}  // namespace

PureStrategy symmetrize(const PureStrategy& strategy, double tol) {
  struct Pair {
    Eigen::VectorXd representative;
    double weight;  // |c_k|^2 + |c_-k|^2
  };
  std::vector<Pair> pairs;
  double total = 0.0;
  for (const auto& term : strategy.terms()) {
    if (is_zero_label(term.k.vec())) continue;  // GHZ_0 is not defined
    const Eigen::VectorXd rep = canonical_sign(term.k.vec());
    const double weight = std::norm(term.amplitude);
    total += weight;
    bool merged = false;
    for (auto& pair : pairs) {
      if (approx_equal(pair.representative, rep, kLabelDedupTol)) {
        pair.weight += weight;
        merged = true;
        break;
      }
    }
    if (!merged) pairs.push_back({rep, weight});
  }
  if (pairs.empty()) {
    fail(ErrorCode::DegenerateStrategy,
         "strategy is entirely the zero label; nothing to symmetrize");
  }
  // Renormalize if zero labels carried weight.
  std::vector<PureTerm> terms;
  terms.reserve(2 * pairs.size());
  for (const auto& pair : pairs) {
    const double amplitude = std::sqrt(pair.weight / total / 2.0);
    terms.push_back({SpinVector(pair.representative), amplitude});
    terms.push_back({SpinVector(-pair.representative), amplitude});
  }
  return PureStrategy(std::move(terms), tol);
}

SequentialStrategy sequentialize(const PureStrategy& strategy, double tol) {
  std::vector<SequentialTerm> terms;
  std::vector<bool> used(strategy.size(), false);
  const auto& input = strategy.terms();
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (used[i]) continue;
    if (is_zero_label(input[i].k.vec())) {
      fail(ErrorCode::NotGhzForm, "zero label has no GHZ counterpart");
    }
    std::size_t partner = input.size();
    for (std::size_t j = i + 1; j < input.size(); ++j) {
      if (!used[j] &&
          approx_equal(input[j].k.vec(), -input[i].k.vec(), kLabelDedupTol)) {
        partner = j;
        break;
      }
    }
    if (partner == input.size()) {
      fail(ErrorCode::NotGhzForm, "label is missing its negated partner");
    }
    const double mag_i = std::abs(input[i].amplitude);
    const double mag_j = std::abs(input[partner].amplitude);
    if (std::abs(mag_i - mag_j) > tol) {
      std::ostringstream msg;
      msg << "pair amplitudes differ in magnitude by " << std::abs(mag_i - mag_j);
      fail(ErrorCode::NotGhzForm, msg.str());
    }
    used[i] = used[partner] = true;
    const Eigen::VectorXd rep = canonical_sign(input[i].k.vec());
    terms.push_back({SpinVector(rep), std::norm(input[i].amplitude) +
                                          std::norm(input[partner].amplitude)});
  }
  return SequentialStrategy(std::move(terms), std::max(tol, kDefaultTol));
}

SequentialStrategy lift_to_vertices(const SequentialStrategy& strategy,
                                    const DfsPolytope& polytope, double tol) {
  const auto vertex_count = polytope.vertices().size();
  std::vector<double> rates(vertex_count, 0.0);
  for (const auto& term : strategy.terms()) {
    const ConvexDecomposition decomposition =
        caratheodory_decompose(polytope, term.k, tol);
    for (const auto& [index, weight] : decomposition.weights) {
      rates[static_cast<std::size_t>(index)] += term.rate * weight;
    }
  }
  // Fold -v mass onto the lexicographically larger representative.
  std::vector<SequentialTerm> terms;
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (rates[i] <= 0.0) continue;
    const Eigen::VectorXd& v = polytope.vertices()[i].vec();
    terms.push_back({SpinVector(canonical_sign(v)), rates[i]});
  }
  return SequentialStrategy(std::move(terms), std::max(tol, kDefaultTol));
}

ImprovementTrace improve_pipeline(const PureStrategy& strategy,
                                  const SensorNetwork& network, double tol) {
  const DfsPolytope polytope = enumerate_vertices(network);
  for (const auto& term : strategy.terms()) {
    if (!contains(polytope, term.k, tol)) {
      fail(ErrorCode::NotInDfs, "strategy label lies outside the DFS");
    }
  }

  ImprovementTrace trace;
  trace.stages.push_back(
      {ImproveStage::Input, strategy, k_matrix_pure(strategy)});

  const PureStrategy symmetrized = symmetrize(strategy, tol);
  trace.stages.push_back({ImproveStage::Symmetrized, symmetrized,
                          k_matrix_pure(symmetrized)});

  const SequentialStrategy sequential = sequentialize(symmetrized, tol);
  trace.stages.push_back({ImproveStage::Sequentialized, sequential,
                          k_matrix_sequential(sequential)});

  const SequentialStrategy lifted = lift_to_vertices(sequential, polytope, tol);
  trace.stages.push_back({ImproveStage::VertexLifted, lifted,
                          k_matrix_sequential(lifted)});

  for (std::size_t i = 1; i < trace.stages.size(); ++i) {
    const PsdOrder order = psd_compare(trace.stages[i].k_matrix.mat(),
                                       trace.stages[i - 1].k_matrix.mat(),
                                       std::max(tol, kDefaultTol));
    if (order != PsdOrder::Greater && order != PsdOrder::Equal) {
      throw std::logic_error("improvement chain is not PSD monotone");
    }
  }
  return trace;
}

bool is_extremal_trace(const KMatrix& k_matrix, Eigen::Index sensors,
                       double tol) {
  return k_matrix.trace() >= static_cast<double>(sensors) - tol;
}

bool is_extremal_trace(const KMatrix& k_matrix, const DfsPolytope& polytope,
                       double tol) {
  return k_matrix.trace() >= max_attainable_trace(polytope) - tol;
}

double max_attainable_trace(const DfsPolytope& polytope) {
  double best = 0.0;
  for (const auto& vertex : polytope.vertices()) {
    best = std::max(best, vertex.vec().squaredNorm());
  }
  return best;
}

bool certify_vertex_sequential(const SequentialStrategy& strategy,
                               const DfsPolytope& polytope, double tol) {
  for (const auto& term : strategy.terms()) {
    const bool matches = std::any_of(
        polytope.vertices().begin(), polytope.vertices().end(),
        [&](const SpinVector& v) {
          return approx_equal(v.vec(), term.k.vec(), tol) ||
                 approx_equal(v.vec(), -term.k.vec(), tol);
        });
    if (!matches) return false;
  }
  return true;
}

}  // namespace dfsmet
