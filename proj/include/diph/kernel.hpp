#pragma once

#include <Eigen/Dense>

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace diph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A hyperedge: strictly increasing 0-based node indices.
using Subset = std::vector<int>;

// Parameters of the structured kernel L = beta * V V^T + diag(alpha).
// V has unit rows (latent directions), beta is the shared squared length of
// the latent positions and alpha holds the per-node popularity.
struct LatentConfig {
  Matrix V;
  double beta = 1.0;
  Vector alpha;

  int num_nodes() const { return static_cast<int>(V.rows()); }
  int dim() const { return static_cast<int>(V.cols()); }
};

struct Violation {
  std::string field;  // "V", "beta", "alpha" or "shape"
  int index = -1;     // row / entry index, -1 when not applicable
  double value = 0.0;
  std::string message;
};

// Empty iff every LatentConfig invariant holds.
std::vector<Violation> validate_config(const LatentConfig& config);

// Throws ValidationError naming the first violation.
void require_valid(const LatentConfig& config);

// Symmetric kernel with a lazily computed, shared eigendecomposition.
// Immutable after construction; copies share the cache.
class KernelMatrix {
 public:
  // Throws ValidationError if L is not square or not symmetric within
  // kSymmetryTol.
  explicit KernelMatrix(Matrix L);

  const Matrix& matrix() const { return L_; }
  int size() const { return static_cast<int>(L_.rows()); }
  double operator()(int i, int j) const { return L_(i, j); }

  // Eigenvalues in nonincreasing order, clamped at zero.
  const Vector& eigenvalues() const;
  // Columns ordered to match eigenvalues().
  const Matrix& eigenvectors() const;

 private:
  struct EigenCache {
    std::once_flag once;
    Vector values;
    Matrix vectors;
  };
  const EigenCache& eigen() const;

  Matrix L_;
  std::shared_ptr<EigenCache> cache_;
};

// L = beta * V V^T + diag(alpha); validates config first.
KernelMatrix build_kernel(const LatentConfig& config);

class SignVector {
 public:
  SignVector() = default;
  // Entries must be exactly +1 or -1.
  explicit SignVector(std::vector<int> signs);
  static SignVector ones(int n) { return SignVector(std::vector<int>(n, 1)); }

  int size() const { return static_cast<int>(s_.size()); }
  int operator[](int i) const { return s_[i]; }
  const std::vector<int>& values() const { return s_; }
  void flip(int i) { s_[i] = -s_[i]; }

  bool operator==(const SignVector&) const = default;

 private:
  std::vector<int> s_;
};

// (DLD)_{ij} = s_i s_j L_{ij}.
KernelMatrix sign_conjugate(const KernelMatrix& L, const SignVector& s);
Matrix sign_conjugate(const Matrix& L, const SignVector& s);

// Multiset of hyperedges over n_v nodes; duplicates and empty edges allowed.
class Hypergraph {
 public:
  Hypergraph() = default;
  // Throws ValidationError on out-of-range or non-increasing edges, or a
  // vocabulary whose length differs from num_nodes.
  Hypergraph(int num_nodes, std::vector<Subset> edges,
             std::vector<std::string> vocab = {});

  int num_nodes() const { return n_v_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Subset>& edges() const { return edges_; }
  const Subset& edge(int l) const { return edges_[l]; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  bool has_vocab() const { return !vocab_.empty(); }

  // Label for node i, or its decimal index without a vocabulary.
  std::string label(int i) const;
  std::optional<int> find_label(const std::string& label) const;

 private:
  int n_v_ = 0;
  std::vector<Subset> edges_;
  std::vector<std::string> vocab_;
};

// Sorts, checks range, rejects duplicates.
Subset make_subset(std::vector<int> nodes, int num_nodes);

// Principal submatrix M_e.
Matrix principal_submatrix(const Matrix& M, const Subset& e);

}  // namespace diph
