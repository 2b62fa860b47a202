#include "diph/estimation.hpp"

#include "diph/constants.hpp"
#include "diph/error.hpp"
#include "diph/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace diph {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Sufficient-increase constant of the line search and the safeguard.
constexpr double kSufficientIncrease = 1e-5;
constexpr int kMaxBacktracks = 60;
constexpr double kMinStep = 1e-14;
constexpr double kMaxStep = 1e6;

// Unique edges with their multiplicities; the objective only depends on
// these, so duplicates are evaluated once.
struct EdgeTable {
  std::vector<Subset> unique;
  std::vector<int> unique_of;  // per original edge
  std::vector<double> counts;
};

EdgeTable build_table(std::span<const Subset> edges) {
  EdgeTable table;
  std::map<Subset, int> index;
  table.unique_of.reserve(edges.size());
  for (const Subset& e : edges) {
    auto [it, inserted] = index.emplace(e, static_cast<int>(table.unique.size()));
    if (inserted) {
      table.unique.push_back(e);
      table.counts.push_back(0.0);
    }
    table.counts[it->second] += 1.0;
    table.unique_of.push_back(it->second);
  }
  return table;
}

struct WeightedBatch {
  std::vector<int> ids;  // ascending unique-edge ids
  std::vector<double> weights;
  double total = 0.0;
};

WeightedBatch full_batch(const EdgeTable& table) {
  WeightedBatch b;
  b.ids.resize(table.unique.size());
  std::iota(b.ids.begin(), b.ids.end(), 0);
  b.weights = table.counts;
  b.total = std::accumulate(b.weights.begin(), b.weights.end(), 0.0);
  return b;
}

WeightedBatch batch_from(const EdgeTable& table, std::span<const int> edge_ids) {
  std::vector<int> ids;
  ids.reserve(edge_ids.size());
  for (int l : edge_ids) ids.push_back(table.unique_of[l]);
  std::sort(ids.begin(), ids.end());
  WeightedBatch b;
  for (int id : ids) {
    if (!b.ids.empty() && b.ids.back() == id) {
      b.weights.back() += 1.0;
    } else {
      b.ids.push_back(id);
      b.weights.push_back(1.0);
    }
  }
  b.total = static_cast<double>(edge_ids.size());
  return b;
}

// Evaluates the batch objective and optionally its gradient. The normalizer
// uses the low-rank structure: with D = I + diag(alpha),
//   log det(L + I) = log det D + log det(I_d + beta V^T D^{-1} V)
// and (L + I)^{-1} follows from the Woodbury identity, so nothing of size
// n_v x n_v is ever factorized.
class Evaluator {
 public:
  explicit Evaluator(const EdgeTable& table) : table_(table) {}

  double evaluate(const LatentConfig& x, const WeightedBatch& batch,
                  Gradient* grad, int* singular_edge = nullptr) {
    const int n = x.num_nodes();
    const int d = x.dim();
    const Matrix& V = x.V;
    const double beta = x.beta;

    // Normalizer.
    const Vector D = (x.alpha.array() + 1.0).matrix();
    if ((D.array() <= 0.0).any()) return kLogZero;
    const Matrix W = D.cwiseInverse().asDiagonal() * V;
    const Matrix P = V.transpose() * W;
    Matrix B = beta * P;
    B.diagonal().array() += 1.0;
    Eigen::LLT<Matrix> llt(B);
    if (llt.info() != Eigen::Success) return kLogZero;
    double log_norm = D.array().log().sum();
    for (int c = 0; c < d; ++c) log_norm += 2.0 * std::log(llt.matrixLLT()(c, c));

    gram_.noalias() = V * V.transpose();
    if (grad) {
      av_.setZero(n, d);
      diag_a_.setZero(n);
    }
    double trace_term = 0.0;
    double edge_sum = 0.0;

    for (std::size_t b = 0; b < batch.ids.size(); ++b) {
      const Subset& e = table_.unique[batch.ids[b]];
      const int k = static_cast<int>(e.size());
      if (k == 0) continue;
      const double w = batch.weights[b];
      const double log_det = factor_edge(e, x);
      if (log_det == kLogZero) {
        if (singular_edge) *singular_edge = batch.ids[b];
        return kLogZero;
      }
      edge_sum += w * log_det;
      if (!grad) continue;

      invert_edge(k);
      const double c = w / batch.total;
      for (int a = 0; a < k; ++a) {
        const int i = e[a];
        diag_a_(i) += c * inv_[a * k + a];
        for (int bb = 0; bb < k; ++bb) {
          const double v = c * inv_[a * k + bb];
          av_.row(i) += v * V.row(e[bb]);
          trace_term += v * gram_(i, e[bb]);
        }
      }
    }
    const double value = -log_norm + edge_sum / batch.total;

    if (grad) {
      // (L+I)^{-1} V = W B^{-1};  tr(V^T (L+I)^{-1} V) = tr(P B^{-1});
      // diag((L+I)^{-1})_i = 1/D_i - beta W_i B^{-1} W_i^T.
      const Matrix B_inv = llt.solve(Matrix::Identity(d, d));
      const Matrix WB = W * B_inv;
      grad->V = 2.0 * beta * (av_ - WB);
      grad->beta = trace_term - (P * B_inv).trace();
      grad->alpha.resize(n);
      for (int i = 0; i < n; ++i) {
        const double m_ii = 1.0 / D(i) - beta * WB.row(i).dot(W.row(i));
        grad->alpha(i) = diag_a_(i) - m_ii;
      }
    }
    return value;
  }

 private:
  // In-place Cholesky of L_e into chol_ (row-major lower); returns log det.
  double factor_edge(const Subset& e, const LatentConfig& x) {
    const int k = static_cast<int>(e.size());
    chol_.assign(static_cast<std::size_t>(k) * k, 0.0);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b <= a; ++b) {
        chol_[a * k + b] = x.beta * gram_(e[a], e[b]);
      }
      chol_[a * k + a] += x.alpha(e[a]);
    }
    double log_det = 0.0;
    for (int j = 0; j < k; ++j) {
      double diag = chol_[j * k + j];
      for (int p = 0; p < j; ++p) diag -= chol_[j * k + p] * chol_[j * k + p];
      if (!(diag > 0.0) || !std::isfinite(diag)) return kLogZero;
      const double root = std::sqrt(diag);
      chol_[j * k + j] = root;
      log_det += std::log(root);
      for (int a = j + 1; a < k; ++a) {
        double s = chol_[a * k + j];
        for (int p = 0; p < j; ++p) s -= chol_[a * k + p] * chol_[j * k + p];
        chol_[a * k + j] = s / root;
      }
    }
    return 2.0 * log_det;
  }

  // inv_ = (C C^T)^{-1} from the factor in chol_.
  void invert_edge(int k) {
    // Lower-triangular inverse T = C^{-1}.
    tri_.assign(static_cast<std::size_t>(k) * k, 0.0);
    for (int j = 0; j < k; ++j) {
      tri_[j * k + j] = 1.0 / chol_[j * k + j];
      for (int a = j + 1; a < k; ++a) {
        double s = 0.0;
        for (int p = j; p < a; ++p) s -= chol_[a * k + p] * tri_[p * k + j];
        tri_[a * k + j] = s / chol_[a * k + a];
      }
    }
    // inv = T^T T.
    inv_.assign(static_cast<std::size_t>(k) * k, 0.0);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b <= a; ++b) {
        double s = 0.0;
        for (int p = a; p < k; ++p) s += tri_[p * k + a] * tri_[p * k + b];
        inv_[a * k + b] = s;
        inv_[b * k + a] = s;
      }
    }
  }

  const EdgeTable& table_;
  Matrix gram_;
  Matrix av_;
  Vector diag_a_;
  std::vector<double> chol_;
  std::vector<double> tri_;
  std::vector<double> inv_;
};

// Parameter-space arithmetic.
// Step lengths per parameter block. Curvature in alpha is typically orders of
// magnitude larger than in V, so a single scalar step converges slowly.
struct Steps {
  double V;
  double beta;
  double alpha;

  Steps scaled(double f) const { return {V * f, beta * f, alpha * f}; }
  double smallest() const { return std::min({V, beta, alpha}); }
};

LatentConfig axpy(const LatentConfig& x, const Steps& step, const Gradient& g) {
  return LatentConfig{x.V + step.V * g.V, x.beta + step.beta * g.beta,
                      x.alpha + step.alpha * g.alpha};
}

LatentConfig combine(const LatentConfig& x, double a, const LatentConfig& y,
                     double b, const LatentConfig& z) {
  // x + a (y - x) + b (x - z)
  return LatentConfig{x.V + a * (y.V - x.V) + b * (x.V - z.V),
                      x.beta + a * (y.beta - x.beta) + b * (x.beta - z.beta),
                      x.alpha + a * (y.alpha - x.alpha) + b * (x.alpha - z.alpha)};
}

double sq_dist(const LatentConfig& a, const LatentConfig& b) {
  const double db = a.beta - b.beta;
  return (a.V - b.V).squaredNorm() + db * db + (a.alpha - b.alpha).squaredNorm();
}

// Barzilai-Borwein step for ascent on one block from (s, r) = (dx, dgrad);
// keeps the fallback when the curvature estimate is unusable.
double bb_block(double ss, double sr, double fallback) {
  // Minimizing -f: curvature along s is -s.r.
  if (!(ss > 0.0) || !(-sr > 0.0)) return fallback;
  const double step = ss / -sr;
  if (!std::isfinite(step)) return fallback;
  return std::clamp(step, kMinStep, kMaxStep);
}

Steps bb_step(const LatentConfig& x1, const LatentConfig& x0, const Gradient& g1,
              const Gradient& g0, const Steps& fallback) {
  const Matrix sV = x1.V - x0.V;
  const double sb = x1.beta - x0.beta;
  const Vector sa = x1.alpha - x0.alpha;
  return {bb_block(sV.squaredNorm(), (sV.array() * (g1.V - g0.V).array()).sum(), fallback.V),
          bb_block(sb * sb, sb * (g1.beta - g0.beta), fallback.beta),
          bb_block(sa.squaredNorm(), sa.dot(g1.alpha - g0.alpha), fallback.alpha)};
}

struct LineSearchResult {
  LatentConfig point;
  double value;
  Steps step;
};

// Backtracking projected-gradient ascent step from `base`.
LineSearchResult line_search(Evaluator& eval, const WeightedBatch& batch,
                             const LatentConfig& base, double base_value,
                             const Gradient& g, Steps step, const FitOptions& opts,
                             std::vector<int>& zero_rows) {
  for (int t = 0; t < kMaxBacktracks && step.smallest() >= kMinStep; ++t) {
    LatentConfig raw = axpy(base, step, g);
    Projection proj = project(std::move(raw.V), raw.beta, std::move(raw.alpha),
                              opts.floor_eps);
    const double value = eval.evaluate(proj.config, batch, nullptr);
    if (std::isfinite(value) &&
        value >= base_value + kSufficientIncrease * sq_dist(proj.config, base)) {
      zero_rows.insert(zero_rows.end(), proj.zero_rows.begin(), proj.zero_rows.end());
      return {std::move(proj.config), value, step};
    }
    step = step.scaled(opts.backtrack_factor);
  }
  return {base, base_value, step};
}

struct RestartOutcome {
  LatentConfig best;
  double best_objective = kLogZero;
  std::vector<double> trace;
  bool converged = false;
  int iterations = 0;
  std::vector<int> zero_rows;
};

RestartOutcome run_restart(const EdgeTable& table, int num_edges,
                           const FitOptions& opts, const LatentConfig& start,
                           Rng& rng) {
  Evaluator eval(table);
  const WeightedBatch all = full_batch(table);
  const int batch_size = opts.full_batch ? num_edges : std::min(opts.batch_size, num_edges);
  const bool is_full = batch_size >= num_edges;

  RestartOutcome out;
  Projection p0 = project(start.V, start.beta, start.alpha, opts.floor_eps);
  out.zero_rows = p0.zero_rows;
  LatentConfig x = std::move(p0.config);
  LatentConfig x_prev = x;
  LatentConfig z = x;
  double t_prev = 0.0;
  double t = 1.0;

  // Mini-batch steps come from Barzilai-Borwein estimates between full-gradient
  // snapshots taken once per epoch, divided by the iterations per epoch;
  // differences of gradients on different batches are mostly noise.
  Gradient snap_g;
  double full_value = eval.evaluate(x, all, is_full ? nullptr : &snap_g);
  LatentConfig snap_x = x;
  const int iters_per_epoch = (num_edges + batch_size - 1) / batch_size;
  out.best = x;
  out.best_objective = full_value;
  if (!std::isfinite(full_value)) return out;

  const Steps initial_steps{opts.step_size, opts.step_size, opts.step_size};
  Steps step_y = initial_steps;
  Steps step_x = initial_steps;
  Steps epoch_steps = initial_steps;
  LatentConfig y_last;
  Gradient gy_last;
  bool have_y_last = false;

  std::vector<int> order(num_edges);
  std::iota(order.begin(), order.end(), 0);
  int cursor = num_edges;  // forces a shuffle at the start of the first epoch
  double x_value_full = full_value;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    if (cursor >= num_edges) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const int end = std::min(num_edges, cursor + batch_size);
    const WeightedBatch batch =
        is_full ? all
                : batch_from(table, std::span<const int>(order.data() + cursor,
                                                         static_cast<std::size_t>(end - cursor)));
    cursor = end;

    const double x_value = is_full ? x_value_full : eval.evaluate(x, batch, nullptr);

    // Extrapolation y = x + (t_prev/t)(z - x) + ((t_prev - 1)/t)(x - x_prev).
    LatentConfig extrapolated = combine(x, t_prev / t, z, (t_prev - 1.0) / t, x_prev);
    Projection py = project(std::move(extrapolated.V), extrapolated.beta,
                            std::move(extrapolated.alpha), opts.floor_eps);
    LatentConfig y = std::move(py.config);
    double y_value = eval.evaluate(y, batch, nullptr);
    if (!std::isfinite(y_value)) {
      y = x;
      y_value = x_value;
    }
    Gradient gy;
    eval.evaluate(y, batch, &gy);
    if (!is_full) {
      step_y = epoch_steps;
    } else if (have_y_last) {
      step_y = bb_step(y, y_last, gy, gy_last, step_y);
    }

    LineSearchResult zs = line_search(eval, batch, y, y_value, gy, step_y, opts,
                                      out.zero_rows);
    step_y = zs.step;

    LatentConfig next;
    double next_value;
    if (zs.value >= x_value + kSufficientIncrease * sq_dist(zs.point, y)) {
      next = zs.point;
      next_value = zs.value;
    } else {
      // Safeguard: plain projected-gradient step from x.
      Gradient gx;
      eval.evaluate(x, batch, &gx);
      step_x = is_full ? bb_step(x, y, gx, gy, step_x) : epoch_steps;
      LineSearchResult vs = line_search(eval, batch, x, x_value, gx, step_x, opts,
                                        out.zero_rows);
      step_x = vs.step;
      if (zs.value >= vs.value) {
        next = zs.point;
        next_value = zs.value;
      } else {
        next = std::move(vs.point);
        next_value = vs.value;
      }
    }

    y_last = std::move(y);
    gy_last = std::move(gy);
    have_y_last = true;
    z = std::move(zs.point);
    x_prev = std::move(x);
    x = std::move(next);
    const double t_next = 0.5 * (std::sqrt(4.0 * t * t + 1.0) + 1.0);
    t_prev = t;
    t = t_next;
    out.iterations = iter + 1;

    if (cursor >= num_edges) {
      // End of epoch: full-data objective drives the stopping rule.
      double value = next_value;
      if (!is_full) {
        Gradient g_full;
        value = eval.evaluate(x, all, &g_full);
        if (std::isfinite(value)) {
          epoch_steps = bb_step(x, snap_x, g_full, snap_g, epoch_steps.scaled(iters_per_epoch))
                            .scaled(1.0 / iters_per_epoch);
          snap_x = x;
          snap_g = std::move(g_full);
        }
      }
      x_value_full = value;
      out.trace.push_back(value);
      if (!std::isfinite(value)) break;
      if (value > out.best_objective) {
        out.best_objective = value;
        out.best = x;
      }
      const double change = std::abs(value - full_value) / std::max(1e-12, std::abs(full_value));
      full_value = value;
      if (change < opts.tol) {
        out.converged = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace

void validate_options(const FitOptions& opts, int num_nodes) {
  if (opts.d <= 0 || opts.d >= num_nodes) {
    throw ValidationError("latent dimension must satisfy 0 < d < n_v");
  }
  if (opts.max_iters <= 0) throw ValidationError("max_iters must be positive");
  if (!(opts.step_size > 0.0)) throw ValidationError("step_size must be positive");
  if (!(opts.backtrack_factor > 0.0 && opts.backtrack_factor < 1.0)) {
    throw ValidationError("backtrack_factor must lie in (0, 1)");
  }
  if (!(opts.tol > 0.0)) throw ValidationError("tol must be positive");
  if (!opts.full_batch && opts.batch_size <= 0) {
    throw ValidationError("batch_size must be positive");
  }
  if (opts.n_inits <= 0) throw ValidationError("n_inits must be positive");
  if (!(opts.floor_eps > 0.0)) throw ValidationError("floor_eps must be positive");
}

ObjectiveValue evaluate_objective(const LatentConfig& config, const Hypergraph& H) {
  if (config.num_nodes() != H.num_nodes() || config.alpha.size() != H.num_nodes()) {
    throw ValidationError("config and hypergraph disagree on the node count");
  }
  if (H.num_edges() == 0) throw ValidationError("hypergraph has no edges");
  const EdgeTable table = build_table(H.edges());
  Evaluator eval(table);
  int singular = -1;
  ObjectiveValue out;
  out.value = eval.evaluate(config, full_batch(table), nullptr, &singular);
  if (singular >= 0) {
    // Report the first original edge mapping to the singular unique edge.
    const auto it = std::find(table.unique_of.begin(), table.unique_of.end(), singular);
    out.singular_edge = static_cast<int>(it - table.unique_of.begin());
  }
  return out;
}

double objective(const LatentConfig& config, const Hypergraph& H) {
  return evaluate_objective(config, H).value;
}

double objective(const LatentConfig& config, std::span<const Subset> edges) {
  if (edges.empty()) throw ValidationError("edge list is empty");
  const EdgeTable table = build_table(edges);
  Evaluator eval(table);
  return eval.evaluate(config, full_batch(table), nullptr);
}

Gradient gradient(const LatentConfig& config, std::span<const Subset> batch) {
  if (batch.empty()) throw ValidationError("gradient batch is empty");
  const EdgeTable table = build_table(batch);
  Evaluator eval(table);
  Gradient g;
  int singular = -1;
  const double value = eval.evaluate(config, full_batch(table), &g, &singular);
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "cannot differentiate: ";
    if (singular >= 0) {
      msg << "kernel submatrix of batch edge " << singular << " is singular";
    } else {
      msg << "L + I is not positive definite";
    }
    throw NumericalError(msg.str());
  }
  return g;
}

Projection project(Matrix V, double beta, Vector alpha, double floor_eps) {
  Projection out;
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    const double norm = V.row(i).norm();
    if (norm < kZeroNormTol || !std::isfinite(norm)) {
      V.row(i).setZero();
      V(i, 0) = 1.0;
      out.zero_rows.push_back(static_cast<int>(i));
    } else {
      V.row(i) /= norm;
    }
  }
  // NaN compares false and is clamped too.
  if (!(beta >= floor_eps)) beta = floor_eps;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (!(alpha(i) >= floor_eps)) alpha(i) = floor_eps;
  }
  out.config = LatentConfig{std::move(V), beta, std::move(alpha)};
  return out;
}

double aic(int num_nodes, int dim, int num_edges, double mean_objective) {
  return 2.0 * (static_cast<double>(num_nodes) * dim + 1.0) -
         2.0 * static_cast<double>(num_edges) * mean_objective;
}

LatentConfig initial_config(const Hypergraph& H, int d, double floor_eps,
                            std::uint64_t seed) {
  constexpr double kInitBeta = 0.5;
  const int n = H.num_nodes();
  Rng rng(seed);
  LatentConfig x;
  x.V = random_unit_rows(n, d, rng);
  x.beta = kInitBeta;
  Vector freq = Vector::Zero(n);
  for (const Subset& e : H.edges()) {
    for (int i : e) freq(i) += 1.0;
  }
  freq /= std::max(1, H.num_edges());
  x.alpha.resize(n);
  for (int i = 0; i < n; ++i) {
    const double p = std::clamp(freq(i), floor_eps, 0.9);
    x.alpha(i) = std::max(floor_eps, p / (1.0 - p) - kInitBeta);
  }
  return x;
}

FitResult fit_from(const Hypergraph& H, const FitOptions& opts,
                   const LatentConfig& start) {
  validate_options(opts, H.num_nodes());
  if (start.num_nodes() != H.num_nodes() || start.dim() != opts.d) {
    throw ValidationError("starting point has the wrong shape");
  }
  bool any_nonempty = false;
  for (const Subset& e : H.edges()) any_nonempty = any_nonempty || !e.empty();
  if (!any_nonempty) throw ValidationError("hypergraph needs at least one nonempty edge");

  const EdgeTable table = build_table(H.edges());
  Rng rng(derive_seed(opts.seed, 0));
  RestartOutcome run = run_restart(table, H.num_edges(), opts, start, rng);
  if (!std::isfinite(run.best_objective)) {
    throw NumericalError("fit diverged: objective is not finite");
  }
  FitResult result;
  result.config = std::move(run.best);
  result.objective_trace = std::move(run.trace);
  result.final_objective = run.best_objective;
  result.aic = aic(H.num_nodes(), opts.d, H.num_edges(), result.final_objective);
  result.converged = run.converged;
  result.iterations_used = run.iterations;
  result.restart_objectives = {run.best_objective};
  for (int row : run.zero_rows) {
    result.warnings.push_back("row " + std::to_string(row) +
                              " of V had zero norm and was reset to e_1");
  }
  return result;
}

FitResult fit(const Hypergraph& H, const FitOptions& opts) {
  validate_options(opts, H.num_nodes());
  bool any_nonempty = false;
  for (const Subset& e : H.edges()) any_nonempty = any_nonempty || !e.empty();
  if (!any_nonempty) throw ValidationError("hypergraph needs at least one nonempty edge");

  const EdgeTable table = build_table(H.edges());
  FitResult best;
  bool have_best = false;
  std::vector<double> restart_values;
  std::vector<std::string> warnings;
  std::vector<std::string> failures;
  for (int r = 0; r < opts.n_inits; ++r) {
    const std::uint64_t restart_seed = derive_seed(opts.seed, static_cast<std::uint64_t>(r));
    const LatentConfig start =
        initial_config(H, opts.d, opts.floor_eps, derive_seed(restart_seed, 1));
    Rng rng(derive_seed(restart_seed, 2));
    RestartOutcome run = run_restart(table, H.num_edges(), opts, start, rng);
    restart_values.push_back(run.best_objective);
    for (int row : run.zero_rows) {
      warnings.push_back("restart " + std::to_string(r) + ": row " + std::to_string(row) +
                         " of V had zero norm and was reset to e_1");
    }
    if (!std::isfinite(run.best_objective)) {
      failures.push_back("restart " + std::to_string(r) + " produced a non-finite objective");
      continue;
    }
    if (!have_best || run.best_objective > best.final_objective) {
      have_best = true;
      best.config = std::move(run.best);
      best.objective_trace = std::move(run.trace);
      best.final_objective = run.best_objective;
      best.converged = run.converged;
      best.iterations_used = run.iterations;
      best.best_restart = r;
    }
  }
  if (!have_best) {
    std::ostringstream msg;
    msg << "all " << opts.n_inits << " restarts diverged";
    for (const auto& f : failures) msg << "; " << f;
    throw NumericalError(msg.str());
  }
  best.restart_objectives = std::move(restart_values);
  best.warnings = std::move(warnings);
  best.aic = aic(H.num_nodes(), opts.d, H.num_edges(), best.final_objective);
  return best;
}

DimensionSelection select_dimension(const Hypergraph& H,
                                    const std::vector<int>& d_candidates,
                                    const FitOptions& opts) {
  if (d_candidates.empty()) throw ValidationError("no candidate dimensions");
  for (int d : d_candidates) {
    if (d <= 0 || d >= H.num_nodes()) {
      throw ValidationError("candidate dimension " + std::to_string(d) + " out of range");
    }
  }
  DimensionSelection out;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int d : d_candidates) {
    FitOptions o = opts;
    o.d = d;
    DimensionFit entry;
    entry.d = d;
    try {
      entry.result = fit(H, o);
      const double a = entry.result->aic;
      if (a < best_aic || (a == best_aic && d < out.best_d)) {
        best_aic = a;
        out.best_d = d;
      }
    } catch (const NumericalError& err) {
      entry.error = err.what();
    }
    out.fits.push_back(std::move(entry));
  }
  if (out.best_d == 0) throw NumericalError("every candidate dimension failed to fit");
  return out;
}

}  // namespace diph
