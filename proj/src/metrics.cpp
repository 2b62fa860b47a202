#include "diph/metrics.hpp"

#include "diph/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace diph {

namespace {

// ||A - S B S||_F^2 = ||A||^2 + ||B||^2 - 2 s^T (A o B) s, so the search
// maximizes s^T P s with P the Hadamard product.
double sign_score(const Matrix& P, const std::vector<int>& s) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j) row += P(i, j) * s[j];
    acc += s[i] * row;
  }
  return acc;
}

std::vector<int> greedy_flips(const Matrix& P, std::vector<int> s) {
  const Eigen::Index n = P.rows();
  Vector field(n);  // sum_{j != i} P_ij s_j
  auto refresh = [&] {
    for (Eigen::Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) acc += P(i, j) * s[j];
      }
      field(i) = acc;
    }
  };
  refresh();
  while (true) {
    // Flipping s_i changes the score by -4 s_i field_i.
    Eigen::Index best = -1;
    double best_gain = 1e-14;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double gain = -4.0 * s[i] * field(i);
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best < 0) break;
    s[best] = -s[best];
    refresh();
  }
  return s;
}

double frobenius_loss(const Matrix& A, const Matrix& B, const SignVector& s) {
  return (A - sign_conjugate(B, s)).norm();
}

// Polar factor U W^T of M = U Sigma W^T.
Matrix polar_factor(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

struct VAlignment {
  double loss;
  std::vector<int> s;
  Matrix O;
};

VAlignment alternate(const Matrix& V_hat, const Matrix& V_star, std::vector<int> s,
                     Matrix O, bool start_with_procrustes) {
  const Eigen::Index n = V_hat.rows();
  auto loss_of = [&](const std::vector<int>& signs, const Matrix& rot) {
    const Matrix rotated = V_star * rot;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += (V_hat.row(i) - signs[i] * rotated.row(i)).squaredNorm();
    }
    return std::sqrt(acc);
  };
  auto update_signs = [&](const Matrix& rot) {
    const Matrix rotated = V_star * rot;
    std::vector<int> out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      out[i] = V_hat.row(i).dot(rotated.row(i)) >= 0.0 ? 1 : -1;
    }
    return out;
  };
  auto update_rotation = [&](const std::vector<int>& signs) {
    Matrix SV = V_star;
    for (Eigen::Index i = 0; i < n; ++i) SV.row(i) *= signs[i];
    // argmin_O ||V_hat - (S V*) O||_F is the polar factor of (S V*)^T V_hat.
    return polar_factor(SV.transpose() * V_hat);
  };

  if (start_with_procrustes) O = update_rotation(s);
  double loss = loss_of(s, O);
  for (int iter = 0; iter < 1000; ++iter) {
    std::vector<int> s_next = update_signs(O);
    Matrix O_next = update_rotation(s_next);
    const double next = loss_of(s_next, O_next);
    if (!(next < loss - 1e-15)) {
      if (next <= loss) {
        s = std::move(s_next);
        O = std::move(O_next);
        loss = next;
      }
      break;
    }
    s = std::move(s_next);
    O = std::move(O_next);
    loss = next;
  }
  return {loss, std::move(s), std::move(O)};
}

// Minimum-cost assignment on a square cost matrix (Hungarian, O(n^3)).
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n);
  for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

AlignmentResult loss_L(const Matrix& L_hat, const Matrix& L_star, SignSearch mode) {
  if (L_hat.rows() != L_star.rows() || L_hat.cols() != L_star.cols() ||
      L_hat.rows() != L_hat.cols()) {
    throw ValidationError("kernel matrices must be square with equal size");
  }
  const Eigen::Index n = L_hat.rows();
  const Matrix P = L_hat.cwiseProduct(L_star);

  std::vector<int> best;
  if (mode == SignSearch::kExhaustive) {
    if (n > 24) throw ValidationError("exhaustive sign search limited to n <= 24");
    double best_score = -std::numeric_limits<double>::infinity();
    std::vector<int> s(n, 1);
    // s_0 = +1 w.l.o.g. (global sign cancels).
    const std::uint64_t count = n > 0 ? (std::uint64_t{1} << (n - 1)) : 1;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      for (Eigen::Index i = 1; i < n; ++i) s[i] = (mask >> (i - 1)) & 1u ? -1 : 1;
      const double score = sign_score(P, s);
      if (score > best_score) {
        best_score = score;
        best = s;
      }
    }
  } else {
    // Starts: S = I, then the sign pattern of u_j * w_j for every matched
    // eigenvector pair (the leading pair first).
    best = greedy_flips(P, std::vector<int>(n, 1));
    double best_score = sign_score(P, best);
    if (n > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> eh(L_hat), es(L_star);
      for (Eigen::Index c = n - 1; c >= 0; --c) {
        const auto u = eh.eigenvectors().col(c);
        const auto w = es.eigenvectors().col(c);
        std::vector<int> s(n);
        for (Eigen::Index i = 0; i < n; ++i) s[i] = u(i) * w(i) >= 0.0 ? 1 : -1;
        s = greedy_flips(P, std::move(s));
        const double score = sign_score(P, s);
        if (score > best_score) {
          best_score = score;
          best = std::move(s);
        }
      }
    }
  }
  AlignmentResult out;
  out.signs = SignVector(best);
  out.loss = frobenius_loss(L_hat, L_star, out.signs);
  return out;
}

AlignmentResult loss_V(const Matrix& V_hat, const Matrix& V_star) {
  if (V_hat.rows() != V_star.rows() || V_hat.cols() != V_star.cols()) {
    throw ValidationError("latent matrices must have the same shape");
  }
  const Eigen::Index n = V_hat.rows();
  const Eigen::Index d = V_hat.cols();

  // Start 1: S = I, as the plain alternating scheme prescribes.
  VAlignment best = alternate(V_hat, V_star, std::vector<int>(n, 1), Matrix(), true);

  // Further starts: V_hat^T V_hat and V*^T V* share spectra up to O, so
  // O = E* diag(sigma) E_hat^T for some column signs sigma.
  if (d <= 10) {
    Eigen::SelfAdjointEigenSolver<Matrix> eh(V_hat.transpose() * V_hat);
    Eigen::SelfAdjointEigenSolver<Matrix> es(V_star.transpose() * V_star);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
      Vector sigma(d);
      for (Eigen::Index c = 0; c < d; ++c) sigma(c) = (mask >> c) & 1u ? -1.0 : 1.0;
      const Matrix O = es.eigenvectors() * sigma.asDiagonal() * eh.eigenvectors().transpose();
      VAlignment cand = alternate(V_hat, V_star, std::vector<int>(n, 1), O, false);
      if (cand.loss < best.loss) best = std::move(cand);
    }
  }
  AlignmentResult out;
  out.loss = best.loss;
  out.signs = SignVector(std::move(best.s));
  out.rotation = std::move(best.O);
  return out;
}

double loss_alpha(const Vector& alpha_hat, const Vector& alpha_star) {
  if (alpha_hat.size() != alpha_star.size()) {
    throw ValidationError("alpha vectors differ in length");
  }
  return (alpha_hat - alpha_star).norm();
}

double loss_beta(double beta_hat, double beta_star) { return std::abs(beta_hat - beta_star); }

RelativeErrors relative_errors(const LatentConfig& hat, const LatentConfig& star) {
  const Matrix L_hat = build_kernel(hat).matrix();
  const Matrix L_star = build_kernel(star).matrix();
  RelativeErrors out;
  out.V = loss_V(hat.V, star.V).loss / star.V.norm();
  out.beta = loss_beta(hat.beta, star.beta) / std::abs(star.beta);
  out.alpha = loss_alpha(hat.alpha, star.alpha) / star.alpha.norm();
  out.L = loss_L(L_hat, L_star).loss / L_star.norm();
  return out;
}

Vector empirical_marginals(const Hypergraph& H) {
  if (H.num_edges() == 0) throw ValidationError("hypergraph has no edges");
  Vector freq = Vector::Zero(H.num_nodes());
  for (const Subset& e : H.edges()) {
    for (int i : e) freq(i) += 1.0;
  }
  return freq / static_cast<double>(H.num_edges());
}

double clustering_accuracy(const std::vector<int>& labels_hat,
                           const std::vector<int>& labels_true) {
  if (labels_hat.size() != labels_true.size()) {
    throw ValidationError("label vectors differ in length");
  }
  if (labels_hat.empty()) return 1.0;
  std::map<int, int> hat_ids, true_ids;
  for (int l : labels_hat) hat_ids.emplace(l, static_cast<int>(hat_ids.size()));
  for (int l : labels_true) true_ids.emplace(l, static_cast<int>(true_ids.size()));
  const int k = static_cast<int>(std::max(hat_ids.size(), true_ids.size()));
  std::vector<std::vector<double>> agree(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < labels_hat.size(); ++i) {
    agree[hat_ids[labels_hat[i]]][true_ids[labels_true[i]]] += 1.0;
  }
  std::vector<std::vector<double>> cost(k, std::vector<double>(k));
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) cost[a][b] = -agree[a][b];
  }
  const std::vector<int> match = hungarian(cost);
  double matched = 0.0;
  for (int a = 0; a < k; ++a) matched += agree[a][match[a]];
  return matched / static_cast<double>(labels_hat.size());
}

}  // namespace diph
