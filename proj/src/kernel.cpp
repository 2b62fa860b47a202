#include "diph/kernel.hpp"

#include "diph/constants.hpp"
#include "diph/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace diph {

std::vector<Violation> validate_config(const LatentConfig& config) {
  std::vector<Violation> out;
  const int n = config.num_nodes();
  const int d = config.dim();

  if (d <= 0 || d >= n) {
    std::ostringstream msg;
    msg << "latent dimension must satisfy 0 < d < n_v (d=" << d
        << ", n_v=" << n << ")";
    out.push_back({"shape", -1, static_cast<double>(d), msg.str()});
  }
  if (config.alpha.size() != n) {
    out.push_back({"shape", -1, static_cast<double>(config.alpha.size()),
                   "alpha length must equal the number of rows of V"});
  }
  for (int i = 0; i < n; ++i) {
    const double norm = config.V.row(i).norm();
    if (!(std::abs(norm - 1.0) <= kRowNormTol)) {
      std::ostringstream msg;
      msg << "row " << i << " of V has norm " << norm << ", expected 1";
      out.push_back({"V", i, norm, msg.str()});
    }
  }
  if (!(config.beta > 0.0) || !std::isfinite(config.beta)) {
    out.push_back({"beta", -1, config.beta, "beta must be strictly positive"});
  }
  for (int i = 0; i < config.alpha.size(); ++i) {
    const double a = config.alpha(i);
    if (!(a > 0.0) || !std::isfinite(a)) {
      out.push_back({"alpha", i, a, "alpha must be strictly positive"});
    }
  }
  return out;
}

void require_valid(const LatentConfig& config) {
  const auto violations = validate_config(config);
  if (!violations.empty()) {
    const auto& v = violations.front();
    std::ostringstream msg;
    msg << "invalid latent config: " << v.message;
    if (v.index >= 0) msg << " (" << v.field << "[" << v.index << "] = " << v.value << ")";
    throw ValidationError(msg.str());
  }
}

KernelMatrix::KernelMatrix(Matrix L)
    : L_(std::move(L)), cache_(std::make_shared<EigenCache>()) {
  if (L_.rows() != L_.cols()) {
    throw ValidationError("kernel matrix must be square");
  }
  for (Eigen::Index i = 0; i < L_.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < L_.cols(); ++j) {
      if (!(std::abs(L_(i, j) - L_(j, i)) <= kSymmetryTol)) {
        std::ostringstream msg;
        msg << "kernel matrix is not symmetric at (" << i << ", " << j << ")";
        throw ValidationError(msg.str());
      }
    }
  }
}

const KernelMatrix::EigenCache& KernelMatrix::eigen() const {
  std::call_once(cache_->once, [this] {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(L_);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("eigendecomposition of the kernel failed");
    }
    // Eigen returns ascending order; store nonincreasing.
    const Eigen::Index n = L_.rows();
    cache_->values.resize(n);
    cache_->vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      cache_->values(k) = std::max(0.0, solver.eigenvalues()(n - 1 - k));
      cache_->vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
    }
  });
  return *cache_;
}

const Vector& KernelMatrix::eigenvalues() const { return eigen().values; }
const Matrix& KernelMatrix::eigenvectors() const { return eigen().vectors; }

KernelMatrix build_kernel(const LatentConfig& config) {
  require_valid(config);
  Matrix L = config.beta * (config.V * config.V.transpose());
  // Exact symmetry regardless of how the product was accumulated.
  L = 0.5 * (L + L.transpose()).eval();
  L.diagonal() += config.alpha;
  if (!L.allFinite()) throw NumericalError("kernel has non-finite entries (overflow)");
  return KernelMatrix(std::move(L));
}

SignVector::SignVector(std::vector<int> signs) : s_(std::move(signs)) {
  for (std::size_t i = 0; i < s_.size(); ++i) {
    if (s_[i] != 1 && s_[i] != -1) {
      throw ValidationError("sign vector entry " + std::to_string(i) +
                            " is not +1 or -1");
    }
  }
}

Matrix sign_conjugate(const Matrix& L, const SignVector& s) {
  if (L.rows() != s.size() || L.cols() != s.size()) {
    throw ValidationError("sign vector length does not match kernel size");
  }
  Matrix out = L;
  for (int i = 0; i < s.size(); ++i) {
    for (int j = 0; j < s.size(); ++j) {
      if (s[i] * s[j] < 0) out(i, j) = -out(i, j);
    }
  }
  return out;
}

KernelMatrix sign_conjugate(const KernelMatrix& L, const SignVector& s) {
  return KernelMatrix(sign_conjugate(L.matrix(), s));
}

Subset make_subset(std::vector<int> nodes, int num_nodes) {
  std::sort(nodes.begin(), nodes.end());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] < 0 || nodes[k] >= num_nodes) {
      throw ValidationError("node index " + std::to_string(nodes[k]) +
                            " out of range [0, " + std::to_string(num_nodes) + ")");
    }
    if (k > 0 && nodes[k] == nodes[k - 1]) {
      throw ValidationError("duplicate node index " + std::to_string(nodes[k]));
    }
  }
  return nodes;
}

Hypergraph::Hypergraph(int num_nodes, std::vector<Subset> edges,
                       std::vector<std::string> vocab)
    : n_v_(num_nodes), edges_(std::move(edges)), vocab_(std::move(vocab)) {
  if (n_v_ < 0) throw ValidationError("node count must be nonnegative");
  if (!vocab_.empty() && static_cast<int>(vocab_.size()) != n_v_) {
    throw ValidationError("vocabulary length does not match node count");
  }
  for (std::size_t l = 0; l < edges_.size(); ++l) {
    const Subset& e = edges_[l];
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (e[k] < 0 || e[k] >= n_v_) {
        throw ValidationError("edge " + std::to_string(l) + " has node index " +
                              std::to_string(e[k]) + " out of range");
      }
      if (k > 0 && e[k] <= e[k - 1]) {
        throw ValidationError("edge " + std::to_string(l) +
                              " is not strictly increasing");
      }
    }
  }
}

std::string Hypergraph::label(int i) const {
  return vocab_.empty() ? std::to_string(i) : vocab_[i];
}

std::optional<int> Hypergraph::find_label(const std::string& label) const {
  if (vocab_.empty()) {
    try {
      std::size_t pos = 0;
      const int i = std::stoi(label, &pos);
      if (pos == label.size() && i >= 0 && i < n_v_) return i;
    } catch (const std::exception&) {
    }
    return std::nullopt;
  }
  const auto it = std::find(vocab_.begin(), vocab_.end(), label);
  if (it == vocab_.end()) return std::nullopt;
  return static_cast<int>(it - vocab_.begin());
}

Matrix principal_submatrix(const Matrix& M, const Subset& e) {
  const int k = static_cast<int>(e.size());
  Matrix out(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) out(a, b) = M(e[a], e[b]);
  }
  return out;
}

}  // namespace diph
