#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace stg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

constexpr double kTolPsd = 1e-8;
constexpr double kTolTraceFeasible = 1e-9;

// Number of unordered node pairs.
constexpr std::size_t edge_count(std::size_t n_nodes) {
  return n_nodes * (n_nodes - (n_nodes > 0 ? 1 : 0)) / 2;
}

// Position of pair (i, j), i < j, in lexicographic upper-triangular order.
constexpr std::size_t edge_index(std::size_t n_nodes, std::size_t i, std::size_t j) {
  return i * n_nodes - i * (i + 1) / 2 + (j - i - 1);
}

// Inverse of edge_index, in the same order.
std::vector<std::pair<std::size_t, std::size_t>> edge_pairs(std::size_t n_nodes);

/// Nonnegative edge weights of an undirected graph in canonical pair order.
class EdgeWeightVector {
 public:
  EdgeWeightVector() = default;
  /// Throws invalid_weights on negative or non-finite entries.
  EdgeWeightVector(std::size_t n_nodes, Vector weights);

  static EdgeWeightVector zeros(std::size_t n_nodes);
  /// Complete graph with every weight 1/(n-1), so the weights sum to n/2.
  static EdgeWeightVector uniform(std::size_t n_nodes);

  std::size_t n_nodes() const { return n_nodes_; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  const Vector& weights() const { return weights_; }
  double operator[](std::size_t k) const { return weights_[static_cast<Eigen::Index>(k)]; }
  double weight(std::size_t i, std::size_t j) const;
  double sum() const { return weights_.sum(); }

  // Sum equals n/2 within kTolTraceFeasible, i.e. tr(L) = n.
  bool trace_feasible() const;

 private:
  std::size_t n_nodes_ = 0;
  Vector weights_;
};

/// Combinatorial Laplacian L = D - A of a nonnegatively weighted graph.
class GraphLaplacian {
 public:
  GraphLaplacian() = default;

  /// Validates an externally supplied matrix: symmetry, nonpositive
  /// off-diagonals, zero row sums and PSD (min eigenvalue >= -kTolPsd).
  /// The trace constraint is not enforced here; see satisfies_trace().
  static GraphLaplacian from_matrix(Matrix m, double tol = 1e-9);

  /// The n x n zero matrix (edgeless graph).
  static GraphLaplacian empty(std::size_t n_nodes);

  std::size_t n_nodes() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  double trace() const { return matrix_.trace(); }
  bool satisfies_trace(double tol = 1e-6) const;

 private:
  friend GraphLaplacian laplacian_from_weights(const EdgeWeightVector&);
  explicit GraphLaplacian(Matrix m) : matrix_(std::move(m)) {}
  Matrix matrix_;
};

/// Node-by-sample signal matrix; rows are node feature vectors.
class SignalMatrix {
 public:
  SignalMatrix() = default;
  /// Throws non_finite when any entry is NaN or infinite.
  explicit SignalMatrix(Matrix values);

  std::size_t n_nodes() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t n_samples() const { return static_cast<std::size_t>(values_.cols()); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

GraphLaplacian laplacian_from_weights(const EdgeWeightVector& w);
EdgeWeightVector weights_from_laplacian(const GraphLaplacian& laplacian);
EdgeWeightVector weights_from_laplacian(const Matrix& laplacian, double tol = 1e-9);

/// tr(X^T L X).
double smoothness(const SignalMatrix& x, const GraphLaplacian& laplacian);

/// Squared row distances ||x_(i) - x_(j)||^2 in canonical pair order, so that
/// tr(X^T L(w) X) = z . w.
Vector pairwise_sq_distances(const SignalMatrix& x);

/// Column-stacked vec(L).
Vector vec_laplacian(const GraphLaplacian& laplacian);

/// Node degrees S w.
Vector degrees(std::size_t n_nodes, const Vector& w);
/// Adjoint of degrees(): (S^T d)_(i,j) = d_i + d_j.
Vector degrees_adjoint(std::size_t n_nodes, const Vector& d);

/// Applies the operator F with w^T F w = ||L(w)||_F^2, i.e. F = 2I + S^T S.
Vector frobenius_operator(std::size_t n_nodes, const Vector& w);

}  // namespace stg
