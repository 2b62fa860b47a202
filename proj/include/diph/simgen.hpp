#pragma once

#include "diph/dpp.hpp"
#include "diph/estimation.hpp"
#include "diph/metrics.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace diph {

// n x d rows i.i.d. uniform on S^{d-1}.
Matrix sample_uniform_sphere(int d, int n, Rng& rng);

// n draws from von Mises-Fisher(mu, kappa) on S^{d-1}, d >= 2, using Wood's
// rejection sampler for the component along mu.
Matrix sample_vmf(const Vector& mu, double kappa, int n, Rng& rng);

// alpha_i = (0.15 gamma_i + 0.05)^2 with gamma_i ~ Beta(1, 4).
Vector gen_alpha(int n, Rng& rng);

// n_e i.i.d. hyperedges drawn from the DPP with kernel L.
Hypergraph sample_hypergraph(const KernelMatrix& L, int num_edges, Rng& rng);

enum class Simulation { kUniform, kClustered };

struct SimGrid {
  int n_v = 100;
  std::vector<int> dims{2, 3, 4};
  std::vector<int> n_edges{500, 1000, 2000, 3000};
  int replicates = 10;
  std::uint64_t seed = 1;
  double beta = 1.0;
  // Clustered design only.
  int clusters = 3;
  double kappa = 10.0;
};

struct ReplicateRecord {
  std::string simulation;  // "sim1" or "sim2"
  int n_v = 0;
  int d = 0;
  int n_e = 0;
  int replicate = 0;
  std::uint64_t seed = 0;  // reproduces the record through run_replicate
  bool fit_ok = false;
  std::string error;
  double final_objective = 0.0;
  RelativeErrors errors;
  // Clustered design: accuracy of line k-means on V_hat, NSC and SCORE.
  double acc_diph = -1.0;
  double acc_nsc = -1.0;
  double acc_score = -1.0;
  double seconds = 0.0;
};

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

// Linear-interpolation quantiles of a nonempty sample.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);
Quartiles quartiles(const std::vector<double>& values);

struct ExperimentReport {
  std::vector<ReplicateRecord> records;

  // Successful records of one grid cell.
  std::vector<ReplicateRecord> cell(int d, int n_e) const;
  // Median of a per-record metric over the successful records of a cell.
  double cell_median(int d, int n_e,
                     const std::function<double(const ReplicateRecord&)>& metric) const;
};

// Seed of (simulation, d, replicate); the latent configuration depends only
// on it, so records at different n_e for the same replicate are paired.
std::uint64_t replicate_seed(std::uint64_t master, int d, int replicate);

// Latent configuration of one replicate plus, for the clustered design, the
// true cluster labels.
struct PlantedModel {
  LatentConfig config;
  std::vector<int> labels;
};
PlantedModel planted_model(Simulation sim, const SimGrid& grid, int d, std::uint64_t seed);

// One grid cell for one replicate; fit failures are recorded, not thrown.
ReplicateRecord run_replicate(Simulation sim, const SimGrid& grid, int d, int n_e,
                              int replicate, const FitOptions& opts);

using ProgressFn = std::function<void(const ReplicateRecord&)>;

ExperimentReport run_sim1(const SimGrid& grid, const FitOptions& opts,
                          const ProgressFn& progress = {});
ExperimentReport run_sim2(const SimGrid& grid, const FitOptions& opts,
                          const ProgressFn& progress = {});

}  // namespace diph
