#include "oracles.hpp"

#include "diph/clustering.hpp"
#include "diph/error.hpp"
#include "diph/metrics.hpp"
#include "diph/simgen.hpp"

#include <gtest/gtest.h>

using namespace diph;

namespace {

// Hyperedges that each lie inside one block; blocks are consecutive runs.
Hypergraph block_edges(const std::vector<int>& sizes, int per_block, Rng& rng) {
  std::vector<Subset> edges;
  int start = 0, n = 0;
  for (int s : sizes) n += s;
  for (int s : sizes) {
    std::uniform_int_distribution<int> pick(start, start + s - 1);
    for (int t = 0; t < per_block; ++t) {
      int a = pick(rng), b = pick(rng);
      while (b == a) b = pick(rng);
      edges.push_back(make_subset({a, b}, n));
    }
    start += s;
  }
  return Hypergraph(n, std::move(edges));
}

std::vector<int> block_labels(const std::vector<int>& sizes) {
  std::vector<int> labels;
  for (std::size_t c = 0; c < sizes.size(); ++c) labels.insert(labels.end(), sizes[c], int(c));
  return labels;
}

}  // namespace

TEST(LineKMeans, AntipodalRowsShareACluster) {
  Matrix V(4, 2);
  V << 1, 0, -1, 0, 0, 1, 0, -1;
  const ClusterResult r = line_kmeans(V, 2);
  EXPECT_EQ(r.labels[0], r.labels[1]);
  EXPECT_EQ(r.labels[2], r.labels[3]);
  EXPECT_NE(r.labels[0], r.labels[2]);
  EXPECT_NEAR(r.cost, 0.0, 1e-15);
}

TEST(LineKMeans, ExactAxesHaveZeroCost) {
  Rng rng(1);
  Matrix V(30, 3);
  std::vector<int> truth(30);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 30; ++i) {
    truth[i] = i % 3;
    V.row(i) = Matrix::Identity(3, 3).row(truth[i]) * (coin(rng) ? 1.0 : -1.0);
  }
  const ClusterResult r = line_kmeans(V, 3);
  EXPECT_NEAR(r.cost, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(clustering_accuracy(r.labels, truth), 1.0);
}

TEST(LineKMeans, CostTraceNonincreasing) {
  Rng rng(2);
  const Matrix V = random_unit_rows(200, 3, rng);
  KMeansOptions o;
  o.n_starts = 1;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    o.seed = seed;
    const ClusterResult r = line_kmeans(V, 4, o);
    for (std::size_t t = 1; t < r.cost_trace.size(); ++t) {
      EXPECT_LE(r.cost_trace[t], r.cost_trace[t - 1] + 1e-12);
    }
  }
}

TEST(LineKMeans, InvariantToRowSigns) {
  Rng rng(3);
  const Matrix V = random_unit_rows(60, 3, rng);
  const SignVector s = oracle::random_signs(60, rng);
  Matrix flipped = V;
  for (int i = 0; i < 60; ++i) flipped.row(i) *= s[i];
  const ClusterResult a = line_kmeans(V, 3);
  const ClusterResult b = line_kmeans(flipped, 3);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NEAR(a.cost, b.cost, 1e-12);
}

TEST(LineKMeans, RecoversConcentratedDirections) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::bernoulli_distribution coin(0.5);
    Matrix V(90, 3);
    std::vector<int> truth(90);
    for (int c = 0; c < 3; ++c) {
      const Vector mu = Matrix::Identity(3, 3).col(c);
      const Matrix draws = sample_vmf(mu, 50.0, 30, rng);
      for (int j = 0; j < 30; ++j) {
        V.row(30 * c + j) = draws.row(j) * (coin(rng) ? 1.0 : -1.0);
        truth[30 * c + j] = c;
      }
    }
    KMeansOptions o;
    o.seed = seed;
    EXPECT_GE(clustering_accuracy(line_kmeans(V, 3, o).labels, truth), 0.95) << "seed " << seed;
  }
}

TEST(LineKMeans, RejectsBadInput) {
  Matrix V(2, 2);
  V << 1, 0, 0.5, 0;
  EXPECT_THROW(line_kmeans(V, 1), ValidationError);
  EXPECT_THROW(line_kmeans(Matrix::Identity(2, 2), 3), ValidationError);
  EXPECT_THROW(line_kmeans(Matrix::Identity(2, 2), 0), ValidationError);
}

TEST(KMeans, SeparatedBlobs) {
  Rng rng(4);
  std::normal_distribution<double> g(0.0, 0.1);
  Matrix X(40, 2);
  std::vector<int> truth(40);
  for (int i = 0; i < 40; ++i) {
    truth[i] = i / 20;
    X(i, 0) = g(rng) + (truth[i] ? 5.0 : 0.0);
    X(i, 1) = g(rng);
  }
  EXPECT_DOUBLE_EQ(clustering_accuracy(kmeans(X, 2).labels, truth), 1.0);
}

TEST(CliqueExpansion, Examples) {
  const WeightedAdjacency A = clique_expansion(Hypergraph(4, {{0, 1, 2}, {0, 1}, {3}, {}}));
  EXPECT_EQ(A.A(0, 1), 2.0);
  EXPECT_EQ(A.A(1, 0), 2.0);
  EXPECT_EQ(A.A(0, 2), 1.0);
  EXPECT_EQ(A.A(1, 2), 1.0);
  EXPECT_EQ(A.A.row(3).sum(), 0.0);
  EXPECT_EQ(A.A.diagonal().sum(), 0.0);
}

TEST(CliqueExpansion, AdditiveOverEdgeSets) {
  Rng rng(5);
  const KernelMatrix L = build_kernel(oracle::random_config(8, 2, rng));
  std::vector<Subset> a, b;
  for (int t = 0; t < 50; ++t) a.push_back(sample(L, rng));
  for (int t = 0; t < 70; ++t) b.push_back(sample(L, rng));
  std::vector<Subset> both = a;
  both.insert(both.end(), b.begin(), b.end());
  const Matrix sum = clique_expansion(Hypergraph(8, a)).A + clique_expansion(Hypergraph(8, b)).A;
  EXPECT_EQ(clique_expansion(Hypergraph(8, both)).A, sum);
}

TEST(Nsc, DisjointCliques) {
  Rng rng(6);
  const std::vector<int> sizes{6, 5, 7};
  const WeightedAdjacency A = clique_expansion(block_edges(sizes, 80, rng));
  EXPECT_DOUBLE_EQ(clustering_accuracy(nsc(A, 3).labels, block_labels(sizes)), 1.0);
}

TEST(Nsc, IsolatedNodeWithoutRegularizer) {
  Rng rng(7);
  std::vector<Subset> edges = block_edges({4, 4}, 40, rng).edges();
  const WeightedAdjacency A = clique_expansion(Hypergraph(9, edges));
  const ClusterResult r = nsc(A, 2, 0.0);
  ASSERT_EQ(r.fallback_nodes, std::vector<int>{8});
  EXPECT_GE(r.labels[8], 0);
  EXPECT_LT(r.labels[8], 2);
  std::vector<int> head(r.labels.begin(), r.labels.begin() + 8);
  EXPECT_DOUBLE_EQ(clustering_accuracy(head, block_labels({4, 4})), 1.0);
  EXPECT_THROW(nsc(A, 2, -1.0), ValidationError);
}

TEST(Score, HeterogeneousDegreeBlocks) {
  // Expected adjacency of a degree-corrected block model.
  const int n = 30;
  Vector theta(n);
  std::vector<int> truth(n);
  for (int i = 0; i < n; ++i) {
    theta(i) = 0.2 + 0.8 * (i % 7) / 6.0;
    truth[i] = i % 3;
  }
  Matrix B(3, 3);
  B << 1.0, 0.2, 0.1, 0.2, 0.9, 0.3, 0.1, 0.3, 0.8;
  WeightedAdjacency A{Matrix(n, n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A.A(i, j) = theta(i) * theta(j) * B(truth[i], truth[j]);
  }
  EXPECT_DOUBLE_EQ(clustering_accuracy(score(A, 3).labels, truth), 1.0);
}

TEST(Score, DisjointCliquesAndPermutationEquivariance) {
  Rng rng(8);
  const std::vector<int> sizes{5, 6, 5};
  const WeightedAdjacency A = clique_expansion(block_edges(sizes, 80, rng));
  const std::vector<int> truth = block_labels(sizes);
  EXPECT_DOUBLE_EQ(clustering_accuracy(score(A, 3).labels, truth), 1.0);

  std::vector<int> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  WeightedAdjacency P{Matrix(16, 16)};
  std::vector<int> permuted_truth(16);
  for (int i = 0; i < 16; ++i) {
    permuted_truth[i] = truth[perm[i]];
    for (int j = 0; j < 16; ++j) P.A(i, j) = A.A(perm[i], perm[j]);
  }
  EXPECT_DOUBLE_EQ(clustering_accuracy(score(P, 3).labels, permuted_truth), 1.0);
  EXPECT_THROW(score(A, 1), ValidationError);
}
