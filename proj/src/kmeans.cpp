#include "diph/clustering.hpp"

#include "diph/dpp.hpp"
#include "diph/error.hpp"
#include "diph/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace diph {

namespace {

// Index of the point chosen with probability proportional to weights;
// uniform when every weight vanishes.
int weighted_pick(const Vector& weights, Rng& rng) {
  const double total = weights.sum();
  const auto n = static_cast<int>(weights.size());
  if (!(total > 0.0)) {
    std::uniform_int_distribution<int> unif(0, n - 1);
    return unif(rng);
  }
  std::uniform_real_distribution<double> unif(0.0, total);
  const double u = unif(rng);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += weights(i);
    if (u < acc) return i;
  }
  return n - 1;
}

// Generic Lloyd iteration over a dissimilarity; Point-to-centre cost and the
// centre update are supplied by the caller.
template <typename CostFn, typename UpdateFn>
ClusterResult lloyd(const Matrix& X, int k, const KMeansOptions& opts, CostFn cost,
                    UpdateFn update) {
  const int n = static_cast<int>(X.rows());
  if (k < 1) throw ValidationError("number of clusters must be at least 1");
  if (n == 0) return {};
  if (k > n) throw ValidationError("more clusters than points");

  ClusterResult best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int start = 0; start < std::max(1, opts.n_starts); ++start) {
    Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(start)));
    // ++ seeding.
    Matrix centres(k, X.cols());
    centres.row(0) = X.row(std::uniform_int_distribution<int>(0, n - 1)(rng));
    Vector nearest(n);
    for (int i = 0; i < n; ++i) nearest(i) = cost(X.row(i), centres.row(0));
    for (int c = 1; c < k; ++c) {
      centres.row(c) = X.row(weighted_pick(nearest, rng));
      for (int i = 0; i < n; ++i) {
        nearest(i) = std::min(nearest(i), cost(X.row(i), centres.row(c)));
      }
    }

    std::vector<int> labels(n, -1);
    std::vector<double> trace;
    double total = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opts.max_iters; ++iter) {
      // Assignment; ties go to the lowest cluster index.
      bool changed = false;
      Vector fit(n);
      std::vector<int> sizes(k, 0);
      for (int i = 0; i < n; ++i) {
        int arg = 0;
        double lo = cost(X.row(i), centres.row(0));
        for (int c = 1; c < k; ++c) {
          const double v = cost(X.row(i), centres.row(c));
          if (v < lo) {
            lo = v;
            arg = c;
          }
        }
        changed = changed || labels[i] != arg;
        labels[i] = arg;
        fit(i) = lo;
        ++sizes[arg];
      }
      // Empty clusters take the worst-fitting point of a cluster with > 1 member.
      for (int c = 0; c < k; ++c) {
        if (sizes[c] > 0) continue;
        int worst = -1;
        for (int i = 0; i < n; ++i) {
          if (sizes[labels[i]] > 1 && (worst < 0 || fit(i) > fit(worst))) worst = i;
        }
        if (worst < 0) break;
        --sizes[labels[worst]];
        labels[worst] = c;
        ++sizes[c];
        fit(worst) = 0.0;
        changed = true;
      }
      for (int c = 0; c < k; ++c) centres.row(c) = update(X, labels, c, centres.row(c));
      double next = 0.0;
      for (int i = 0; i < n; ++i) next += cost(X.row(i), centres.row(labels[i]));
      trace.push_back(next);
      const bool stalled = std::abs(total - next) <= opts.tol * std::max(1.0, std::abs(next));
      total = next;
      if (!changed || stalled) break;
    }
    if (total < best.cost) {
      best.cost = total;
      best.labels = labels;
      best.cost_trace = std::move(trace);
    }
  }
  return best;
}

}  // namespace

ClusterResult kmeans(const Matrix& X, int k, const KMeansOptions& opts) {
  auto cost = [](const auto& x, const auto& c) { return (x - c).squaredNorm(); };
  auto update = [](const Matrix& pts, const std::vector<int>& labels, int c,
                   const Eigen::RowVectorXd& old) -> Eigen::RowVectorXd {
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(pts.cols());
    int count = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) {
        sum += pts.row(static_cast<Eigen::Index>(i));
        ++count;
      }
    }
    return count > 0 ? Eigen::RowVectorXd(sum / count) : old;
  };
  return lloyd(X, k, opts, cost, update);
}

ClusterResult line_kmeans(const Matrix& V, int k, const KMeansOptions& opts) {
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    if (std::abs(V.row(i).norm() - 1.0) > 1e-6) {
      throw ValidationError("line k-means expects unit rows");
    }
  }
  auto cost = [](const auto& x, const auto& c) {
    const double dot = x.dot(c);
    return std::max(0.0, 1.0 - dot * dot);
  };
  auto update = [](const Matrix& pts, const std::vector<int>& labels, int c,
                   const Eigen::RowVectorXd& old) -> Eigen::RowVectorXd {
    Matrix moment = Matrix::Zero(pts.cols(), pts.cols());
    bool any = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != c) continue;
      const auto row = pts.row(static_cast<Eigen::Index>(i));
      moment.noalias() += row.transpose() * row;
      any = true;
    }
    if (!any) return old;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(moment);
    return eig.eigenvectors().col(pts.cols() - 1).transpose();
  };
  return lloyd(V, k, opts, cost, update);
}

}  // namespace diph
