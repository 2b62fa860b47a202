#include "diph/simgen.hpp"

#include "diph/clustering.hpp"
#include "diph/constants.hpp"
#include "diph/error.hpp"
#include "diph/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace diph {

Matrix sample_uniform_sphere(int d, int n, Rng& rng) { return random_unit_rows(n, d, rng); }

Matrix sample_vmf(const Vector& mu, double kappa, int n, Rng& rng) {
  const auto p = static_cast<int>(mu.size());
  if (p < 2) throw ValidationError("von Mises-Fisher sampling needs d >= 2");
  if (std::abs(mu.norm() - 1.0) > 1e-9) throw ValidationError("mean direction must be a unit vector");
  if (kappa < 0.0) throw ValidationError("concentration must be nonnegative");

  const double m = p - 1.0;
  const double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m * m)) / m;
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + m * std::log(1.0 - x0 * x0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Matrix out(n, p);
  for (int i = 0; i < n; ++i) {
    double w = 0.0;
    while (true) {
      const double z = draw_beta(m / 2.0, m / 2.0, rng);
      w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
      const double u = unif(rng);
      if (kappa * w + m * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
    }
    // Uniform direction orthogonal to mu.
    Vector tangent(p);
    double norm = 0.0;
    do {
      for (int j = 0; j < p; ++j) tangent(j) = gauss(rng);
      tangent -= tangent.dot(mu) * mu;
      norm = tangent.norm();
    } while (!(norm > kZeroNormTol));
    tangent /= norm;
    const Vector draw = w * mu + std::sqrt(std::max(0.0, 1.0 - w * w)) * tangent;
    out.row(i) = draw.transpose() / draw.norm();
  }
  return out;
}

Vector gen_alpha(int n, Rng& rng) {
  Vector alpha(n);
  for (int i = 0; i < n; ++i) {
    const double root = 0.15 * draw_beta(1.0, 4.0, rng) + 0.05;
    alpha(i) = root * root;
  }
  return alpha;
}

Hypergraph sample_hypergraph(const KernelMatrix& L, int num_edges, Rng& rng) {
  if (num_edges < 0) throw ValidationError("edge count must be nonnegative");
  std::vector<Subset> edges;
  edges.reserve(num_edges);
  for (int l = 0; l < num_edges; ++l) edges.push_back(sample(L, rng));
  return Hypergraph(L.size(), std::move(edges));
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(values.size() - 1, lo + 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

Quartiles quartiles(const std::vector<double>& values) {
  return {quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75)};
}

std::vector<ReplicateRecord> ExperimentReport::cell(int d, int n_e) const {
  std::vector<ReplicateRecord> out;
  for (const auto& r : records) {
    if (r.d == d && r.n_e == n_e && r.fit_ok) out.push_back(r);
  }
  return out;
}

double ExperimentReport::cell_median(
    int d, int n_e, const std::function<double(const ReplicateRecord&)>& metric) const {
  std::vector<double> values;
  for (const auto& r : cell(d, n_e)) values.push_back(metric(r));
  return median(std::move(values));
}

std::uint64_t replicate_seed(std::uint64_t master, int d, int replicate) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(d)),
                     static_cast<std::uint64_t>(replicate));
}

PlantedModel planted_model(Simulation sim, const SimGrid& grid, int d, std::uint64_t seed) {
  Rng rng(seed);
  PlantedModel out;
  if (sim == Simulation::kUniform) {
    out.config.V = sample_uniform_sphere(d, grid.n_v, rng);
  } else {
    if (d < 2) throw ValidationError("clustered design needs d >= 2");
    Matrix means;
    if (grid.clusters <= d) {
      means = Matrix::Identity(grid.clusters, d);
    } else {
      means = sample_uniform_sphere(d, grid.clusters, rng);
    }
    std::uniform_int_distribution<int> pick(0, grid.clusters - 1);
    out.labels.resize(grid.n_v);
    out.config.V.resize(grid.n_v, d);
    for (int i = 0; i < grid.n_v; ++i) out.labels[i] = pick(rng);
    for (int i = 0; i < grid.n_v; ++i) {
      const Vector mu = means.row(out.labels[i]).transpose();
      out.config.V.row(i) = sample_vmf(mu, grid.kappa, 1, rng).row(0);
    }
  }
  out.config.beta = grid.beta;
  out.config.alpha = gen_alpha(grid.n_v, rng);
  return out;
}

ReplicateRecord run_replicate(Simulation sim, const SimGrid& grid, int d, int n_e,
                              int replicate, const FitOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  ReplicateRecord rec;
  rec.simulation = sim == Simulation::kUniform ? "sim1" : "sim2";
  rec.n_v = grid.n_v;
  rec.d = d;
  rec.n_e = n_e;
  rec.replicate = replicate;
  rec.seed = replicate_seed(grid.seed, d, replicate);

  const PlantedModel planted = planted_model(sim, grid, d, rec.seed);
  const KernelMatrix L = build_kernel(planted.config);
  const std::uint64_t data_seed = derive_seed(rec.seed, static_cast<std::uint64_t>(n_e));
  Rng rng(data_seed);
  const Hypergraph H = sample_hypergraph(L, n_e, rng);

  FitOptions o = opts;
  o.d = d;
  o.seed = derive_seed(data_seed, 1);
  try {
    const FitResult fitted = fit(H, o);
    rec.fit_ok = true;
    rec.final_objective = fitted.final_objective;
    rec.errors = relative_errors(fitted.config, planted.config);
    if (sim == Simulation::kClustered) {
      KMeansOptions km;
      km.seed = derive_seed(data_seed, 2);
      rec.acc_diph = clustering_accuracy(
          line_kmeans(fitted.config.V, grid.clusters, km).labels, planted.labels);
      const WeightedAdjacency A = clique_expansion(H);
      rec.acc_nsc = clustering_accuracy(nsc(A, grid.clusters, 0.1, km).labels, planted.labels);
      rec.acc_score = clustering_accuracy(score(A, grid.clusters, km).labels, planted.labels);
    }
  } catch (const std::exception& err) {
    rec.fit_ok = false;
    rec.error = err.what();
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

namespace {

ExperimentReport run_grid(Simulation sim, const SimGrid& grid, const FitOptions& opts,
                          const ProgressFn& progress) {
  if (grid.n_v < 2 || grid.replicates < 1 || grid.dims.empty() || grid.n_edges.empty()) {
    throw ValidationError("simulation grid is empty or degenerate");
  }
  ExperimentReport report;
  for (int d : grid.dims) {
    if (d < 1 || d >= grid.n_v) throw ValidationError("grid dimension out of range");
    for (int n_e : grid.n_edges) {
      if (n_e < 1) throw ValidationError("grid edge count must be positive");
      for (int r = 0; r < grid.replicates; ++r) {
        report.records.push_back(run_replicate(sim, grid, d, n_e, r, opts));
        if (progress) progress(report.records.back());
      }
    }
  }
  return report;
}

}  // namespace

ExperimentReport run_sim1(const SimGrid& grid, const FitOptions& opts,
                          const ProgressFn& progress) {
  return run_grid(Simulation::kUniform, grid, opts, progress);
}

ExperimentReport run_sim2(const SimGrid& grid, const FitOptions& opts,
                          const ProgressFn& progress) {
  return run_grid(Simulation::kClustered, grid, opts, progress);
}

}  // namespace diph
