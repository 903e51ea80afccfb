#include "dfsmet/dfs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace dfsmet {

namespace {

constexpr double kFacetFeasTol = 1e-9;
constexpr double kPivotTol = 1e-11;

void check_basis(const Eigen::MatrixXd& noise, const Eigen::MatrixXd& basis) {
  if (noise.rows() == 0 || basis.cols() == 0) return;
  const double residual = (noise * basis).lpNorm<Eigen::Infinity>();
  if (residual > 1e-6) {
    fail(ErrorCode::ShapeMismatch, "kernel basis does not annihilate noise");
  }
}

}  // namespace

DfsPolytope::DfsPolytope(Eigen::MatrixXd kernel_basis,
                         std::vector<SpinVector> vertices,
                         Eigen::MatrixXd noise)
    : basis_(std::move(kernel_basis)),
      vertices_(std::move(vertices)),
      noise_(std::move(noise)) {
  check_basis(noise_, basis_);
  for (const auto& vertex : vertices_) {
    if (vertex.size() != basis_.rows()) {
      fail(ErrorCode::DimensionMismatch, "vertex length does not match basis");
    }
    if (std::abs(vertex.vec().lpNorm<Eigen::Infinity>() - 1.0) > 1e-6) {
      fail(ErrorCode::ShapeMismatch, "vertex is not on the hypercube boundary");
    }
    if (noise_.rows() > 0 &&
        (noise_ * vertex.vec()).lpNorm<Eigen::Infinity>() > 1e-6) {
      fail(ErrorCode::ShapeMismatch, "vertex is not noise free");
    }
    const bool has_negation =
        std::any_of(vertices_.begin(), vertices_.end(), [&](const SpinVector& w) {
          return approx_equal(w.vec(), -vertex.vec(), kVertexDedupTol);
        });
    if (!has_negation) {
      fail(ErrorCode::ShapeMismatch, "vertex list is not closed under negation");
    }
  }
}

std::vector<int> DfsPolytope::representative_indices() const {
  std::vector<int> reps;
  for (int i = 0; i < static_cast<int>(vertices_.size()); ++i) {
    const Eigen::VectorXd& v = vertices_[static_cast<std::size_t>(i)].vec();
    if (!lex_less(v, -v)) reps.push_back(i);
  }
  return reps;
}

Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& noise, double tol) {
  const Eigen::Index n = noise.cols();
  if (noise.rows() == 0) {
    return Eigen::MatrixXd::Identity(n, n);
  }
  if (!noise.allFinite()) {
    fail(ErrorCode::NonFinite, "noise matrix has non-finite entries");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(noise, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double scale = sv.size() > 0 ? sv[0] : 0.0;
  const double threshold =
      tol * scale * static_cast<double>(std::max(noise.rows(), noise.cols()));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > threshold) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

namespace {

/// Visits every size-d subset of {0, ..., n-1} in lexicographic order.
template <typename Fn>
void for_each_subset(Eigen::Index n, Eigen::Index d, Fn&& fn) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  while (true) {
    fn(idx);
    Eigen::Index i = d - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - d + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < d; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

}  // namespace

DfsPolytope enumerate_vertices(const SensorNetwork& network, double tol) {
  const Eigen::MatrixXd basis = kernel_basis(network.noise(), tol);
  const Eigen::Index n = basis.rows();
  const Eigen::Index d = basis.cols();
  if (d == 0) {
    fail(ErrorCode::EmptyDfs, "noise matrix has full rank, the DFS is {0}");
  }

  // In kernel coordinates y (k = B y) the polytope is |(B y)_j| <= 1. A
  // vertex solves d active facet rows at some sign assignment.
  std::vector<Eigen::VectorXd> found;
  for_each_subset(n, d, [&](const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd active(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      active.row(r) = basis.row(rows[static_cast<std::size_t>(r)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(active);
    lu.setThreshold(1e-10);
    if (lu.rank() < d) return;  // dependent facet normals cannot pin a vertex
    for (std::uint64_t signs = 0; signs < (std::uint64_t{1} << d); ++signs) {
      Eigen::VectorXd rhs(d);
      for (Eigen::Index r = 0; r < d; ++r) {
        rhs[r] = (signs >> r) & 1 ? -1.0 : 1.0;
      }
      Eigen::VectorXd y = lu.solve(rhs);
      if (!y.allFinite()) continue;
      if ((active * y - rhs).lpNorm<Eigen::Infinity>() > kFacetFeasTol) continue;
      Eigen::VectorXd k = basis * y;
      if (k.lpNorm<Eigen::Infinity>() > 1.0 + kFacetFeasTol) continue;
      found.push_back(std::move(k));
    }
  });

  std::sort(found.begin(), found.end(),
            [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
              return lex_less(a, b);
            });
  std::vector<SpinVector> vertices;
  for (std::size_t i = 0; i < found.size(); ++i) {
    bool duplicate = false;
    for (std::size_t j = i; j-- > 0;) {
      if (found[i][0] - found[j][0] > kVertexDedupTol) break;
      if (approx_equal(found[i], found[j], kVertexDedupTol)) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      vertices.emplace_back(found[i].cwiseMax(-1.0).cwiseMin(1.0));
    }
  }
  return DfsPolytope(basis, std::move(vertices), network.noise());
}

bool contains(const DfsPolytope& polytope, const SpinVector& k, double tol) {
  if (k.size() != polytope.sensors()) {
    fail(ErrorCode::DimensionMismatch, "spin vector length mismatch");
  }
  if (k.vec().lpNorm<Eigen::Infinity>() > 1.0 + tol) return false;
  if (polytope.noise().rows() == 0) return true;
  return (polytope.noise() * k.vec()).lpNorm<Eigen::Infinity>() <= tol;
}

Eigen::VectorXd affine_offset(const SensorNetwork& network,
                              const SpinVector& k) {
  if (k.size() != network.sensors()) {
    fail(ErrorCode::DimensionMismatch, "spin vector length mismatch");
  }
  return network.noise() * k.vec();
}

namespace {

/// Phase-1 simplex for A p = b, p >= 0 with artificial variables and
/// Bland's rule. Returns the minimal total artificial mass; on exit p holds
/// a basic feasible solution of the relaxed system.
double simplex_phase1(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                      Eigen::VectorXd& p) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  Eigen::MatrixXd tab(rows, cols + rows);
  Eigen::VectorXd rhs = b;
  tab.leftCols(cols) = a;
  tab.rightCols(rows) = Eigen::MatrixXd::Identity(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (rhs[r] < 0.0) {
      rhs[r] = -rhs[r];
      tab.row(r) = -tab.row(r);
      tab(r, cols + r) = 1.0;  // keep the artificial column positive
    }
  }
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) basis[static_cast<std::size_t>(r)] = cols + r;

  // Reduced costs for minimizing the sum of artificials.
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols + rows);
  cost.tail(rows).setOnes();

  const auto objective = [&]() {
    double sum = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (basis[static_cast<std::size_t>(r)] >= cols) sum += rhs[r];
    }
    return sum;
  };

  const Eigen::Index max_pivots = 200 * (rows + cols);
  for (Eigen::Index pivot = 0; pivot < max_pivots; ++pivot) {
    // Current dual prices: y^T = c_B^T B^{-1}; the tableau is kept in
    // B^{-1}-applied form, so reduced cost_j = c_j - sum_r c_B[r] tab(r, j).
    Eigen::Index entering = -1;
    for (Eigen::Index j = 0; j < cols + rows; ++j) {
      double reduced = cost[j];
      for (Eigen::Index r = 0; r < rows; ++r) {
        if (basis[static_cast<std::size_t>(r)] >= cols) reduced -= tab(r, j);
      }
      if (reduced < -kPivotTol) {
        entering = j;  // Bland: smallest index
        break;
      }
    }
    if (entering < 0) break;
    Eigen::Index leaving = -1;
    double best_ratio = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (tab(r, entering) > kPivotTol) {
        const double ratio = rhs[r] / tab(r, entering);
        if (leaving < 0 || ratio < best_ratio - kPivotTol ||
            (std::abs(ratio - best_ratio) <= kPivotTol &&
             basis[static_cast<std::size_t>(r)] <
                 basis[static_cast<std::size_t>(leaving)])) {
          leaving = r;
          best_ratio = ratio;
        }
      }
    }
    if (leaving < 0) break;  // unbounded; cannot happen with artificials
    const double pivot_value = tab(leaving, entering);
    tab.row(leaving) /= pivot_value;
    rhs[leaving] /= pivot_value;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (r == leaving) continue;
      const double factor = tab(r, entering);
      if (factor != 0.0) {
        tab.row(r) -= factor * tab.row(leaving);
        rhs[r] -= factor * rhs[leaving];
      }
    }
    basis[static_cast<std::size_t>(leaving)] = entering;
  }

  p = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (basis[static_cast<std::size_t>(r)] < cols) {
      p[basis[static_cast<std::size_t>(r)]] = std::max(0.0, rhs[r]);
    }
  }
  return objective();
}

/// Standard Caratheodory support reduction: while more than d+1 weights are
/// active, move along a null direction of the active system until one hits
/// zero.
void reduce_support(const Eigen::MatrixXd& system, Eigen::VectorXd& p,
                    Eigen::Index target_support) {
  while (true) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (p[i] > 1e-14) support.push_back(i);
    }
    if (static_cast<Eigen::Index>(support.size()) <= target_support) return;
    Eigen::MatrixXd active(system.rows(), support.size());
    for (std::size_t c = 0; c < support.size(); ++c) {
      active.col(static_cast<Eigen::Index>(c)) = system.col(support[c]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(active);
    const Eigen::MatrixXd null_space = lu.kernel();
    if (null_space.cols() == 0 ||
        null_space.col(0).lpNorm<Eigen::Infinity>() < 1e-13) {
      return;  // numerically independent; accept current support
    }
    Eigen::VectorXd direction = null_space.col(0);
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < support.size(); ++c) {
      const double g = direction[static_cast<Eigen::Index>(c)];
      if (g < -1e-15) {
        step = std::min(step, -p[support[c]] / g);
      }
    }
    if (!std::isfinite(step)) {
      direction = -direction;
      step = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < support.size(); ++c) {
        const double g = direction[static_cast<Eigen::Index>(c)];
        if (g < -1e-15) step = std::min(step, -p[support[c]] / g);
      }
      if (!std::isfinite(step)) return;
    }
    for (std::size_t c = 0; c < support.size(); ++c) {
      p[support[c]] =
          std::max(0.0, p[support[c]] + step * direction[static_cast<Eigen::Index>(c)]);
    }
  }
}

}  // namespace

ConvexDecomposition caratheodory_decompose(const DfsPolytope& polytope,
                                           const SpinVector& k, double tol) {
  if (!contains(polytope, k, tol)) {
    fail(ErrorCode::NotInDfs, "point is outside the DFS polytope");
  }
  const Eigen::Index d = polytope.dimension();
  const auto vertex_count = static_cast<Eigen::Index>(polytope.vertices().size());

  // Work in kernel coordinates; the off-kernel residual of k is bounded by
  // the membership tolerance and is discarded by the projection.
  Eigen::MatrixXd system(d + 1, vertex_count);
  for (Eigen::Index i = 0; i < vertex_count; ++i) {
    system.col(i).head(d) = polytope.kernel_basis().transpose() *
                            polytope.vertices()[static_cast<std::size_t>(i)].vec();
    system(d, i) = 1.0;
  }
  Eigen::VectorXd target(d + 1);
  target.head(d) = polytope.kernel_basis().transpose() * k.vec();
  target[d] = 1.0;

  Eigen::VectorXd p;
  simplex_phase1(system, target, p);
  const double residual = (system * p - target).lpNorm<Eigen::Infinity>();
  if (residual > 2.0 * tol + 1e-9) {
    std::ostringstream msg;
    msg << "no convex decomposition within tolerance (residual " << residual
        << ")";
    fail(ErrorCode::NotInDfs, msg.str());
  }
  reduce_support(system, p, d + 1);

  // Renormalize away the tiny mass lost to clamping.
  const double total = p.sum();
  if (total > 0.0) p /= total;

  ConvexDecomposition out;
  for (Eigen::Index i = 0; i < vertex_count; ++i) {
    if (p[i] > 1e-14) out.weights.emplace_back(static_cast<int>(i), p[i]);
  }
  return out;
}

PureStrategy center_affine(const PureStrategy& strategy,
                           const SensorNetwork& network, double tol) {
  if (strategy.sensors() != network.sensors()) {
    fail(ErrorCode::DimensionMismatch, "strategy does not match network");
  }
  const Eigen::VectorXd kappa0 =
      network.noise() * strategy.terms().front().k.vec();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(network.sensors());
  for (const auto& term : strategy.terms()) {
    const Eigen::VectorXd kappa = network.noise() * term.k.vec();
    if ((kappa - kappa0).lpNorm<Eigen::Infinity>() > tol) {
      fail(ErrorCode::MixedAffineBlocks,
           "labels span more than one affine DFS block");
    }
    mean += std::norm(term.amplitude) * term.k.vec();
  }
  std::vector<PureTerm> centered;
  centered.reserve(strategy.size());
  for (const auto& term : strategy.terms()) {
    centered.push_back(
        {SpinVector((term.k.vec() - mean) / 2.0), term.amplitude});
  }
  return PureStrategy(std::move(centered));
}

}  // namespace dfsmet
