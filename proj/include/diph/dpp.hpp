#pragma once

#include "diph/kernel.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace diph {

// Every stochastic operation takes one of these explicitly.
using Rng = std::mt19937_64;

// K = I - (L + I)^{-1}; principal minors of K are inclusion probabilities.
struct MarginalKernel {
  Matrix K;
  double inclusion(int i) const { return K(i, i); }
};

// Exact probabilities of all 2^n_v subsets, indexed by bitmask
// (bit i set <=> node i in the subset).
struct SubsetDistribution {
  int num_nodes = 0;
  std::vector<double> prob;

  double operator[](std::uint32_t mask) const { return prob[mask]; }
};

Subset subset_from_mask(std::uint32_t mask);
std::uint32_t mask_from_subset(const Subset& e);

// log det(M_e) through a Cholesky factorization; det(M_empty) = 1.
// Returns kLogZero when M_e is not numerically positive definite.
double log_det_principal(const Matrix& M, const Subset& e);

// log det(L + I). Throws NumericalError if L + I is not positive definite.
double log_normalizer(const KernelMatrix& L);

// log P(E = e) = log det(L_e) - log det(L + I). A numerically singular L_e
// yields kLogZero (-infinity), i.e. probability zero.
double log_prob(const KernelMatrix& L, const Subset& e);

// Enumerates all subsets; guarded to n_v <= kMaxBruteForceNodes. Determinants
// here use LU with partial pivoting, independent of the Cholesky path.
SubsetDistribution brute_force_distribution(const KernelMatrix& L);

MarginalKernel marginal_kernel(const KernelMatrix& L);

// log P(E = e2 | e1 subset of E) = log det(L_{e2}) - log det(L + I - I_{e1}).
// Requires e1 subset of e2 (ValidationError otherwise).
double conditional_log_prob(const KernelMatrix& L, const Subset& e1,
                            const Subset& e2);

struct Completion {
  int node;
  double log_prob;  // conditional log-probability of e + {node} given e
};

// Nodes outside e ranked by P(E = e + {i} | e subset of E), descending, ties
// by ascending node index. Returns at most top_k entries.
std::vector<Completion> complete_edge(const KernelMatrix& L, const Subset& e,
                                      int top_k);

// E|E| = sum_i lambda_i / (1 + lambda_i).
double expected_size(const KernelMatrix& L);

// Exact DPP draw (eigenvector selection, then sequential projection sampling).
Subset sample(const KernelMatrix& L, Rng& rng);

// Draw conditioned on |E| = k.
Subset sample_k(const KernelMatrix& L, int k, Rng& rng);

// log e_k(lambda) for k = 0..max_k over the given eigenvalues, computed
// in the log domain.
std::vector<double> log_elementary_symmetric(const Vector& eigenvalues, int max_k);

}  // namespace diph
