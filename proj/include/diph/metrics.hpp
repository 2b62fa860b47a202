#pragma once

#include "diph/kernel.hpp"

#include <vector>

namespace diph {

// Loss after optimizing over the identifiability gauge. `rotation` is empty
// for the kernel loss.
struct AlignmentResult {
  double loss = 0.0;
  SignVector signs;
  Matrix rotation;
};

enum class SignSearch { kGreedy, kExhaustive };

// min_S ||L_hat - S L_star S||_F over diagonal sign matrices. Greedy mode
// flips the single most improving sign until no flip helps, from S = I and
// from the sign pattern of each matched eigenvector pair, keeping the best.
// Exhaustive mode enumerates all 2^n sign vectors (n <= 24).
AlignmentResult loss_L(const Matrix& L_hat, const Matrix& L_star,
                       SignSearch mode = SignSearch::kGreedy);

// min_{O orthogonal, S signs} ||V_hat - S V_star O||_F by alternating
// Procrustes and per-row sign updates.
AlignmentResult loss_V(const Matrix& V_hat, const Matrix& V_star);

double loss_alpha(const Vector& alpha_hat, const Vector& alpha_star);
double loss_beta(double beta_hat, double beta_star);

struct RelativeErrors {
  double V = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  double L = 0.0;
};

// Losses divided by ||V*||_F, |beta*|, ||alpha*||_2 and ||L*||_F.
RelativeErrors relative_errors(const LatentConfig& hat, const LatentConfig& star);

// Per-node inclusion frequency (1/n_e) sum_l 1(i in e_l).
Vector empirical_marginals(const Hypergraph& H);

// Best agreement over one-to-one relabelings of the estimated labels.
double clustering_accuracy(const std::vector<int>& labels_hat,
                           const std::vector<int>& labels_true);

}  // namespace diph
