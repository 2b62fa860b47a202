#pragma once

#include "diph/kernel.hpp"

#include <cstdint>
#include <vector>

namespace diph {

struct ClusterResult {
  std::vector<int> labels;
  double cost = 0.0;
  // Cost after every assignment/update round of the winning start.
  std::vector<double> cost_trace;
  // Nodes with a zero spectral row, labelled by nearest centroid afterwards.
  std::vector<int> fallback_nodes;
};

struct KMeansOptions {
  int n_starts = 10;
  int max_iters = 300;
  double tol = 1e-12;
  std::uint64_t seed = 0;
};

// Euclidean k-means with k-means++ seeding; best start by within-cluster sum
// of squares.
ClusterResult kmeans(const Matrix& X, int k, const KMeansOptions& opts = {});

// Clusters lines through the origin: rows v and -v are equivalent. Points go
// to the axis maximizing (v . c)^2; each axis is the leading eigenvector of
// its cluster's second-moment matrix. Cost is sum (1 - (v . c)^2). An empty
// cluster is re-seeded with the currently worst-fitting point.
ClusterResult line_kmeans(const Matrix& V, int k, const KMeansOptions& opts = {});

struct WeightedAdjacency {
  Matrix A;  // symmetric, zero diagonal
  int size() const { return static_cast<int>(A.rows()); }
};

// A_ij = number of hyperedges containing both i and j.
WeightedAdjacency clique_expansion(const Hypergraph& H);

// Regularized normalized spectral clustering: degrees d_i + tau * mean(d),
// k leading eigenvectors of D^{-1/2} A D^{-1/2} (the k smallest of the
// symmetric Laplacian), unit rows, k-means.
ClusterResult nsc(const WeightedAdjacency& A, int k, double tau = 0.1,
                  const KMeansOptions& opts = {});

// SCORE variant: k eigenvectors of A with largest |eigenvalue|, each row
// divided by its l2 norm, k-means.
ClusterResult score(const WeightedAdjacency& A, int k, const KMeansOptions& opts = {});

}  // namespace diph
