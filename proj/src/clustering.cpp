#include "diph/clustering.hpp"

#include "diph/constants.hpp"
#include "diph/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace diph {

namespace {

// Row-normalizes the embedding, clusters the nonzero rows and attaches zero
// rows to the nearest centroid (that of a zero vector).
ClusterResult cluster_rows(Matrix rows, int k, const KMeansOptions& opts) {
  const int n = static_cast<int>(rows.rows());
  std::vector<int> kept;
  std::vector<int> zero;
  for (int i = 0; i < n; ++i) {
    const double norm = rows.row(i).norm();
    if (norm < kZeroNormTol) {
      zero.push_back(i);
    } else {
      rows.row(i) /= norm;
      kept.push_back(i);
    }
  }
  ClusterResult out;
  out.labels.assign(n, 0);
  out.fallback_nodes = zero;
  if (kept.empty()) return out;

  Matrix X(static_cast<Eigen::Index>(kept.size()), rows.cols());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    X.row(static_cast<Eigen::Index>(r)) = rows.row(kept[r]);
  }
  const int k_eff = std::min<int>(k, static_cast<int>(kept.size()));
  ClusterResult inner = kmeans(X, k_eff, opts);
  for (std::size_t r = 0; r < kept.size(); ++r) out.labels[kept[r]] = inner.labels[r];
  out.cost = inner.cost;
  out.cost_trace = std::move(inner.cost_trace);

  if (!zero.empty()) {
    // Nearest centroid of the zero vector = smallest centroid norm.
    Matrix centres = Matrix::Zero(k_eff, X.cols());
    std::vector<int> sizes(k_eff, 0);
    for (std::size_t r = 0; r < kept.size(); ++r) {
      centres.row(inner.labels[r]) += X.row(static_cast<Eigen::Index>(r));
      ++sizes[inner.labels[r]];
    }
    int best = 0;
    double best_norm = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k_eff; ++c) {
      if (sizes[c] == 0) continue;
      const double norm = (centres.row(c) / sizes[c]).norm();
      if (norm < best_norm) {
        best_norm = norm;
        best = c;
      }
    }
    for (int i : zero) out.labels[i] = best;
  }
  return out;
}

// Columns of `vectors` at the given positions.
Matrix take_columns(const Matrix& vectors, const std::vector<Eigen::Index>& idx) {
  Matrix out(vectors.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = vectors.col(idx[c]);
  }
  return out;
}

void check_adjacency(const WeightedAdjacency& A, int k) {
  if (A.A.rows() != A.A.cols()) throw ValidationError("adjacency must be square");
  if (k < 1) throw ValidationError("number of clusters must be at least 1");
  if (k > A.size()) throw ValidationError("more clusters than nodes");
}

}  // namespace

WeightedAdjacency clique_expansion(const Hypergraph& H) {
  WeightedAdjacency out{Matrix::Zero(H.num_nodes(), H.num_nodes())};
  for (const Subset& e : H.edges()) {
    for (std::size_t a = 0; a < e.size(); ++a) {
      for (std::size_t b = a + 1; b < e.size(); ++b) {
        out.A(e[a], e[b]) += 1.0;
        out.A(e[b], e[a]) += 1.0;
      }
    }
  }
  return out;
}

ClusterResult nsc(const WeightedAdjacency& A, int k, double tau, const KMeansOptions& opts) {
  check_adjacency(A, k);
  if (tau < 0.0) throw ValidationError("regularizer tau must be nonnegative");
  const int n = A.size();
  const Vector degree = A.A.rowwise().sum();
  const double mean_degree = n > 0 ? degree.mean() : 0.0;
  Vector inv_sqrt(n);
  for (int i = 0; i < n; ++i) {
    const double reg = degree(i) + tau * mean_degree;
    inv_sqrt(i) = reg > 0.0 ? 1.0 / std::sqrt(reg) : 0.0;
  }
  const Matrix normalized = inv_sqrt.asDiagonal() * A.A * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(normalized);
  if (eig.info() != Eigen::Success) throw NumericalError("NSC eigendecomposition failed");
  // Largest eigenvalues of the normalized adjacency = smallest of I - it.
  std::vector<Eigen::Index> idx;
  for (int c = 0; c < k; ++c) idx.push_back(n - 1 - c);
  return cluster_rows(take_columns(eig.eigenvectors(), idx), k, opts);
}

ClusterResult score(const WeightedAdjacency& A, int k, const KMeansOptions& opts) {
  check_adjacency(A, k);
  if (k < 2) throw ValidationError("SCORE needs at least two clusters");
  const int n = A.size();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A.A);
  if (eig.info() != Eigen::Success) throw NumericalError("SCORE eigendecomposition failed");
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const Vector& values = eig.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(values(a)) > std::abs(values(b));
  });
  order.resize(k);
  return cluster_rows(take_columns(eig.eigenvectors(), order), k, opts);
}

}  // namespace diph
