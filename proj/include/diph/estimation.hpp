#pragma once

#include "diph/kernel.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace diph {

/// Options for the projected accelerated proximal gradient fit.
///
/// The fit maximizes the mean log-likelihood
///   -log det(beta V V^T + diag(alpha) + I) + mean_l log det(L_{e_l})
/// over unit-row V, beta > 0 and alpha > 0. Each iteration draws the next
/// mini-batch of an epoch-wise random permutation of the edges.
struct FitOptions {
  int d = 2;
  int max_iters = 5000;
  double step_size = 0.05;        // first trial step, before any BB estimate
  double backtrack_factor = 0.5;  // step shrink factor in the line search
  double tol = 1e-7;              // relative change of the full objective per epoch
  int batch_size = 256;           // clipped to n_e
  bool full_batch = false;        // overrides batch_size
  int n_inits = 5;
  double floor_eps = 1e-8;        // lower clamp for alpha and beta
  std::uint64_t seed = 0;
};

// Throws ValidationError if an option is out of range for n_v nodes.
void validate_options(const FitOptions& opts, int num_nodes);

struct FitResult {
  LatentConfig config;
  // Full-data objective of the current iterate at the end of every epoch
  // (every iteration when fitting on the full batch) of the best restart.
  std::vector<double> objective_trace;
  double final_objective = 0.0;
  double aic = 0.0;
  bool converged = false;
  int iterations_used = 0;
  int best_restart = 0;
  std::vector<double> restart_objectives;
  std::vector<std::string> warnings;
};

struct Gradient {
  Matrix V;
  double beta = 0.0;
  Vector alpha;
};

struct ObjectiveValue {
  double value = 0.0;
  // First edge whose submatrix is numerically singular, if any; value is
  // then -infinity.
  std::optional<int> singular_edge;
};

// Mean log-likelihood of H. Evaluates the formula for any V (rows need not be
// unit length); empty edges contribute log det of the empty matrix = 0.
ObjectiveValue evaluate_objective(const LatentConfig& config, const Hypergraph& H);
double objective(const LatentConfig& config, const Hypergraph& H);

// Same objective restricted to an explicit list of edges.
double objective(const LatentConfig& config, std::span<const Subset> edges);

// Gradient of -log det(L + I) + mean_{e in batch} log det(L_e) with respect to
// (V, beta, alpha) in ambient coordinates. Throws NumericalError when some L_e
// is singular.
Gradient gradient(const LatentConfig& config, std::span<const Subset> batch);

struct Projection {
  LatentConfig config;
  std::vector<int> zero_rows;  // rows replaced by the first basis vector
};

// Normalizes rows of V and clamps beta, alpha at floor_eps.
Projection project(Matrix V, double beta, Vector alpha, double floor_eps);

// Akaike information criterion with n_v d + 1 parameters and total
// log-likelihood n_e * mean_objective.
double aic(int num_nodes, int dim, int num_edges, double mean_objective);

// Initial point used by restart streams: uniform rows, beta = 0.5, alpha from
// the empirical inclusion frequencies.
LatentConfig initial_config(const Hypergraph& H, int d, double floor_eps,
                            std::uint64_t seed);

// Best of opts.n_inits restarts.
FitResult fit(const Hypergraph& H, const FitOptions& opts);

// One restart from a caller-supplied starting point (projected first).
FitResult fit_from(const Hypergraph& H, const FitOptions& opts,
                   const LatentConfig& start);

struct DimensionFit {
  int d = 0;
  std::optional<FitResult> result;
  std::string error;  // non-empty iff the fit failed
};

struct DimensionSelection {
  int best_d = 0;
  std::vector<DimensionFit> fits;
};

// Fits every candidate and returns the argmin of AIC (ties: smaller d).
// Failed candidates are kept in `fits` with their error and excluded.
DimensionSelection select_dimension(const Hypergraph& H,
                                    const std::vector<int>& d_candidates,
                                    const FitOptions& opts);

}  // namespace diph
