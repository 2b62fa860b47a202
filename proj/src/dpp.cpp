#include "diph/dpp.hpp"

#include "diph/constants.hpp"
#include "diph/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace diph {

namespace {

double log_det_spd(const Matrix& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) return kLogZero;
  double acc = 0.0;
  const auto& factor = llt.matrixLLT();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    const double d = factor(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) return kLogZero;
    acc += std::log(d);
  }
  return 2.0 * acc;
}

double log_add_exp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void check_subset(const Subset& e, int n) {
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (e[k] < 0 || e[k] >= n) {
      throw ValidationError("subset index " + std::to_string(e[k]) + " out of range");
    }
    if (k > 0 && e[k] <= e[k - 1]) {
      throw ValidationError("subset must be strictly increasing");
    }
  }
}

std::size_t draw_index(const Vector& weights, double total, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, total);
  const double u = unif(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) <= 0.0) continue;
    acc += weights(i);
    last_positive = static_cast<std::size_t>(i);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

// Projection phase shared by sample and sample_k: draws one item per column
// of the orthonormal basis, deflating the basis after each pick.
Subset project_sample(Matrix basis, Rng& rng) {
  Subset out;
  out.reserve(basis.cols());
  while (basis.cols() > 0) {
    const Vector mass = basis.rowwise().squaredNorm();
    const double total = mass.sum();
    if (!(total > kDeflationTol)) {
      throw NumericalError("degenerate deflation: residual mass " + std::to_string(total));
    }
    const auto item = static_cast<Eigen::Index>(draw_index(mass, total, rng));
    out.push_back(static_cast<int>(item));

    // Pivot column: largest component at the chosen item.
    Eigen::Index pivot = 0;
    basis.row(item).cwiseAbs().maxCoeff(&pivot);
    const Vector pivot_col = basis.col(pivot);
    const double pivot_val = pivot_col(item);

    Matrix next(basis.rows(), basis.cols() - 1);
    for (Eigen::Index c = 0, dst = 0; c < basis.cols(); ++c) {
      if (c == pivot) continue;
      next.col(dst++) = basis.col(c) - (basis(item, c) / pivot_val) * pivot_col;
    }
    // Modified Gram-Schmidt re-orthonormalization.
    for (Eigen::Index c = 0; c < next.cols(); ++c) {
      for (Eigen::Index p = 0; p < c; ++p) {
        next.col(c) -= next.col(p).dot(next.col(c)) * next.col(p);
      }
      const double norm = next.col(c).norm();
      if (!(norm > kDeflationTol)) {
        throw NumericalError("degenerate deflation: basis column collapsed");
      }
      next.col(c) /= norm;
    }
    basis = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Matrix selected_columns(const Matrix& vectors, const std::vector<Eigen::Index>& idx) {
  Matrix basis(vectors.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    basis.col(static_cast<Eigen::Index>(c)) = vectors.col(idx[c]);
  }
  return basis;
}

}  // namespace

Subset subset_from_mask(std::uint32_t mask) {
  Subset e;
  for (int i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1u) e.push_back(i);
  }
  return e;
}

std::uint32_t mask_from_subset(const Subset& e) {
  std::uint32_t mask = 0;
  for (int i : e) mask |= (1u << i);
  return mask;
}

double log_det_principal(const Matrix& M, const Subset& e) {
  return log_det_spd(principal_submatrix(M, e));
}

double log_normalizer(const KernelMatrix& L) {
  Matrix shifted = L.matrix();
  shifted.diagonal().array() += 1.0;
  const double value = log_det_spd(shifted);
  if (value == kLogZero) {
    throw NumericalError("L + I is not positive definite");
  }
  return value;
}

double log_prob(const KernelMatrix& L, const Subset& e) {
  check_subset(e, L.size());
  const double num = log_det_principal(L.matrix(), e);
  if (num == kLogZero) return kLogZero;
  return num - log_normalizer(L);
}

SubsetDistribution brute_force_distribution(const KernelMatrix& L) {
  const int n = L.size();
  if (n > kMaxBruteForceNodes) {
    throw ValidationError("brute-force enumeration limited to n_v <= " +
                          std::to_string(kMaxBruteForceNodes));
  }
  Matrix shifted = L.matrix();
  shifted.diagonal().array() += 1.0;
  const double normalizer = shifted.partialPivLu().determinant();
  if (!(normalizer > 0.0)) throw NumericalError("det(L + I) is not positive");

  SubsetDistribution dist;
  dist.num_nodes = n;
  const std::uint32_t count = 1u << n;
  dist.prob.resize(count);
  dist.prob[0] = 1.0 / normalizer;
  for (std::uint32_t mask = 1; mask < count; ++mask) {
    const Matrix sub = principal_submatrix(L.matrix(), subset_from_mask(mask));
    dist.prob[mask] = std::max(0.0, sub.partialPivLu().determinant()) / normalizer;
  }
  return dist;
}

MarginalKernel marginal_kernel(const KernelMatrix& L) {
  const int n = L.size();
  Matrix shifted = L.matrix();
  shifted.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("L + I is not positive definite; cannot invert");
  }
  Matrix K = Matrix::Identity(n, n) - llt.solve(Matrix::Identity(n, n));
  K = 0.5 * (K + K.transpose()).eval();
  return MarginalKernel{std::move(K)};
}

double conditional_log_prob(const KernelMatrix& L, const Subset& e1,
                            const Subset& e2) {
  check_subset(e1, L.size());
  check_subset(e2, L.size());
  if (!std::includes(e2.begin(), e2.end(), e1.begin(), e1.end())) {
    throw ValidationError("conditioning set is not contained in the target set");
  }
  const double num = log_det_principal(L.matrix(), e2);
  if (num == kLogZero) return kLogZero;
  Matrix denom = L.matrix();
  denom.diagonal().array() += 1.0;
  for (int i : e1) denom(i, i) -= 1.0;
  const double log_denom = log_det_spd(denom);
  if (log_denom == kLogZero) {
    throw NumericalError("L + I - I_e1 is not positive definite");
  }
  return num - log_denom;
}

std::vector<Completion> complete_edge(const KernelMatrix& L, const Subset& e,
                                      int top_k) {
  const int n = L.size();
  check_subset(e, n);
  if (static_cast<int>(e.size()) >= n) {
    throw ValidationError("partial edge already covers every node");
  }
  Matrix denom = L.matrix();
  denom.diagonal().array() += 1.0;
  for (int i : e) denom(i, i) -= 1.0;
  const double log_denom = log_det_spd(denom);
  if (log_denom == kLogZero) {
    throw NumericalError("L + I - I_e is not positive definite");
  }

  std::vector<Completion> ranked;
  ranked.reserve(n - e.size());
  for (int i = 0; i < n; ++i) {
    if (std::binary_search(e.begin(), e.end(), i)) continue;
    Subset extended = e;
    extended.insert(std::upper_bound(extended.begin(), extended.end(), i), i);
    const double num = log_det_principal(L.matrix(), extended);
    ranked.push_back({i, num == kLogZero ? kLogZero : num - log_denom});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Completion& a, const Completion& b) {
                     return a.log_prob > b.log_prob;
                   });
  if (top_k >= 0 && static_cast<std::size_t>(top_k) < ranked.size()) {
    ranked.resize(top_k);
  }
  return ranked;
}

double expected_size(const KernelMatrix& L) {
  const Vector& lambda = L.eigenvalues();
  return (lambda.array() / (1.0 + lambda.array())).sum();
}

Subset sample(const KernelMatrix& L, Rng& rng) {
  const Vector& lambda = L.eigenvalues();
  const Matrix& vectors = L.eigenvectors();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::Index> chosen;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (unif(rng) < lambda(k) / (1.0 + lambda(k))) chosen.push_back(k);
  }
  return project_sample(selected_columns(vectors, chosen), rng);
}

std::vector<double> log_elementary_symmetric(const Vector& eigenvalues, int max_k) {
  // table[l] holds log e_l over the eigenvalues seen so far.
  const auto n = eigenvalues.size();
  std::vector<double> table(max_k + 1, kLogZero);
  table[0] = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    const double log_lambda =
        eigenvalues(m) > 0.0 ? std::log(eigenvalues(m)) : kLogZero;
    for (int l = std::min<int>(max_k, static_cast<int>(m) + 1); l >= 1; --l) {
      if (log_lambda == kLogZero || table[l - 1] == kLogZero) continue;
      table[l] = log_add_exp(table[l], log_lambda + table[l - 1]);
    }
  }
  return table;
}

Subset sample_k(const KernelMatrix& L, int k, Rng& rng) {
  const int n = L.size();
  if (k < 0 || k > n) {
    throw ValidationError("sample size k must lie in [0, n_v]");
  }
  if (k == 0) return {};
  const Vector& lambda = L.eigenvalues();
  const Matrix& vectors = L.eigenvectors();

  // log_e[m][l] = log e_l(lambda_0..lambda_{m-1}), m = 0..n.
  std::vector<std::vector<double>> log_e(n + 1, std::vector<double>(k + 1, kLogZero));
  for (int m = 0; m <= n; ++m) log_e[m][0] = 0.0;
  for (int m = 1; m <= n; ++m) {
    const double log_lambda = lambda(m - 1) > 0.0 ? std::log(lambda(m - 1)) : kLogZero;
    for (int l = 1; l <= k; ++l) {
      double with = kLogZero;
      if (log_lambda != kLogZero && log_e[m - 1][l - 1] != kLogZero) {
        with = log_lambda + log_e[m - 1][l - 1];
      }
      log_e[m][l] = log_add_exp(log_e[m - 1][l], with);
    }
  }
  if (log_e[n][k] == kLogZero) {
    throw NumericalError("elementary symmetric polynomial e_k(lambda) vanishes");
  }

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::Index> chosen;
  int remaining = k;
  for (int m = n; m >= 1 && remaining > 0; --m) {
    // P(select eigenvector m-1) = lambda * e_{l-1}(first m-1) / e_l(first m).
    double log_p = kLogZero;
    if (lambda(m - 1) > 0.0 && log_e[m - 1][remaining - 1] != kLogZero) {
      log_p = std::log(lambda(m - 1)) + log_e[m - 1][remaining - 1] - log_e[m][remaining];
    }
    if (unif(rng) < std::exp(log_p)) {
      chosen.push_back(m - 1);
      --remaining;
    }
  }
  if (remaining != 0) {
    throw NumericalError("k-DPP eigenvector selection did not reach size k");
  }
  return project_sample(selected_columns(vectors, chosen), rng);
}

}  // namespace diph
