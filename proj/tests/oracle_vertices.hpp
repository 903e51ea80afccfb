#pragma once

// Test-only exact vertex enumeration over the rationals. Completely
// independent of the production path: kernel via fraction-free row
// reduction, vertex candidates via exact Gaussian elimination, feasibility
// and dedup via exact comparisons. Input matrices must hold integer-valued
// doubles (scaled rationals).

#include <Eigen/Dense>

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <vector>

namespace dfsmet::testing {

using Rational = boost::multiprecision::cpp_rational;
using RationalMatrix = std::vector<std::vector<Rational>>;
using RationalVector = std::vector<Rational>;

inline RationalMatrix to_rational(const Eigen::MatrixXd& m) {
  RationalMatrix out(static_cast<std::size_t>(m.rows()),
                     RationalVector(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
          Rational(static_cast<long long>(llround(m(r, c))));
    }
  }
  return out;
}

/// Exact kernel basis of an m x n rational matrix via reduced row echelon
/// form; one basis vector per free column.
inline std::vector<RationalVector> rational_kernel(RationalMatrix a,
                                                   std::size_t n) {
  std::vector<std::size_t> pivot_cols;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < a.size(); ++col) {
    std::size_t pivot = row;
    while (pivot < a.size() && a[pivot][col] == 0) ++pivot;
    if (pivot == a.size()) continue;
    std::swap(a[row], a[pivot]);
    const Rational lead = a[row][col];
    for (std::size_t c = 0; c < n; ++c) a[row][c] /= lead;
    for (std::size_t r = 0; r < a.size(); ++r) {
      if (r != row && a[r][col] != 0) {
        const Rational factor = a[r][col];
        for (std::size_t c = 0; c < n; ++c) a[r][c] -= factor * a[row][c];
      }
    }
    pivot_cols.push_back(col);
    ++row;
  }
  std::vector<bool> is_pivot(n, false);
  for (const std::size_t col : pivot_cols) is_pivot[col] = true;

  std::vector<RationalVector> basis;
  for (std::size_t free_col = 0; free_col < n; ++free_col) {
    if (is_pivot[free_col]) continue;
    RationalVector v(n, Rational(0));
    v[free_col] = 1;
    for (std::size_t r = 0; r < pivot_cols.size(); ++r) {
      v[pivot_cols[r]] = -a[r][free_col];
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Exact solve of a d x d rational system; returns false when singular.
inline bool rational_solve(RationalMatrix a, RationalVector b,
                           RationalVector& x) {
  const std::size_t d = b.size();
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    while (pivot < d && a[pivot][col] == 0) ++pivot;
    if (pivot == d) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < d; ++r) {
      if (r != col && a[r][col] != 0) {
        const Rational factor = a[r][col] / a[col][col];
        for (std::size_t c = col; c < d; ++c) a[r][c] -= factor * a[col][c];
        b[r] -= factor * b[col];
      }
    }
  }
  x.assign(d, Rational(0));
  for (std::size_t r = 0; r < d; ++r) x[r] = b[r] / a[r][r];
  return true;
}

/// All vertices of {k : N k = 0, ||k||_inf <= 1}, exactly.
inline std::vector<Eigen::VectorXd> exact_vertices(
    const Eigen::MatrixXd& noise, Eigen::Index sensors) {
  const auto n = static_cast<std::size_t>(sensors);
  std::vector<RationalVector> basis;
  if (noise.rows() == 0) {
    for (std::size_t i = 0; i < n; ++i) {
      RationalVector v(n, Rational(0));
      v[i] = 1;
      basis.push_back(std::move(v));
    }
  } else {
    basis = rational_kernel(to_rational(noise), n);
  }
  const std::size_t d = basis.size();
  std::vector<RationalVector> found;
  if (d == 0) return {};

  // Row j of the kernel-coordinate map: (B y)_j.
  const auto facet_row = [&](std::size_t j) {
    RationalVector row(d);
    for (std::size_t c = 0; c < d; ++c) row[c] = basis[c][j];
    return row;
  };

  std::vector<std::size_t> subset(d);
  const auto visit = [&](const std::vector<std::size_t>& rows) {
    for (std::uint64_t signs = 0; signs < (std::uint64_t{1} << d); ++signs) {
      RationalMatrix system;
      RationalVector rhs;
      for (std::size_t r = 0; r < d; ++r) {
        system.push_back(facet_row(rows[r]));
        rhs.push_back((signs >> r) & 1 ? Rational(-1) : Rational(1));
      }
      RationalVector y;
      if (!rational_solve(system, rhs, y)) break;  // singular for all signs
      RationalVector k(n, Rational(0));
      bool feasible = true;
      for (std::size_t j = 0; j < n && feasible; ++j) {
        for (std::size_t c = 0; c < d; ++c) k[j] += basis[c][j] * y[c];
        if (abs(k[j]) > 1) feasible = false;
      }
      if (!feasible) continue;
      if (std::find(found.begin(), found.end(), k) == found.end()) {
        found.push_back(std::move(k));
      }
    }
  };

  // Lexicographic subsets of {0..n-1} of size d.
  for (std::size_t i = 0; i < d; ++i) subset[i] = i;
  while (true) {
    visit(subset);
    bool advanced = false;
    for (std::size_t i = d; i-- > 0;) {
      if (subset[i] != n - d + i) {
        ++subset[i];
        for (std::size_t j = i + 1; j < d; ++j) subset[j] = subset[j - 1] + 1;
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }

  std::vector<Eigen::VectorXd> out;
  for (const auto& k : found) {
    Eigen::VectorXd v(sensors);
    for (std::size_t j = 0; j < n; ++j) {
      v[static_cast<Eigen::Index>(j)] = static_cast<double>(k[j]);
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace dfsmet::testing
