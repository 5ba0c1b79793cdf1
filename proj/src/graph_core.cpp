#include "stg/graph_core.hpp"

#include <cmath>
#include <string>

#include "stg/error.hpp"

namespace stg {

std::vector<std::pair<std::size_t, std::size_t>> edge_pairs(std::size_t n_nodes) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(edge_count(n_nodes));
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t j = i + 1; j < n_nodes; ++j) pairs.emplace_back(i, j);
  return pairs;
}

EdgeWeightVector::EdgeWeightVector(std::size_t n_nodes, Vector weights)
    : n_nodes_(n_nodes), weights_(std::move(weights)) {
  if (static_cast<std::size_t>(weights_.size()) != edge_count(n_nodes_)) {
    throw Error(ErrorCode::dimension_mismatch,
                "edge weight vector has " + std::to_string(weights_.size()) +
                    " entries, expected " + std::to_string(edge_count(n_nodes_)));
  }
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    if (!std::isfinite(weights_[k]) || weights_[k] < 0.0) {
      throw Error(ErrorCode::invalid_weights,
                  "edge weight " + std::to_string(k) + " is negative or non-finite");
    }
  }
}

EdgeWeightVector EdgeWeightVector::zeros(std::size_t n_nodes) {
  return EdgeWeightVector(n_nodes, Vector::Zero(static_cast<Eigen::Index>(edge_count(n_nodes))));
}

EdgeWeightVector EdgeWeightVector::uniform(std::size_t n_nodes) {
  if (n_nodes < 2) return zeros(n_nodes);
  return EdgeWeightVector(
      n_nodes, Vector::Constant(static_cast<Eigen::Index>(edge_count(n_nodes)),
                                1.0 / static_cast<double>(n_nodes - 1)));
}

double EdgeWeightVector::weight(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  return weights_[static_cast<Eigen::Index>(edge_index(n_nodes_, i, j))];
}

bool EdgeWeightVector::trace_feasible() const {
  return std::abs(sum() - 0.5 * static_cast<double>(n_nodes_)) <= kTolTraceFeasible;
}

GraphLaplacian GraphLaplacian::from_matrix(Matrix m, double tol) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::invalid_laplacian, "Laplacian must be square");
  }
  if (!m.allFinite()) throw Error(ErrorCode::invalid_laplacian, "Laplacian has non-finite entries");
  const Eigen::Index n = m.rows();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol * scale) {
        throw Error(ErrorCode::invalid_laplacian, "Laplacian is not symmetric");
      }
      if (m(i, j) > tol * scale) {
        throw Error(ErrorCode::invalid_laplacian, "Laplacian has a positive off-diagonal entry");
      }
    }
    if (std::abs(m.row(i).sum()) > tol * scale) {
      throw Error(ErrorCode::invalid_laplacian, "Laplacian row does not sum to zero");
    }
  }
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kTolPsd) {
      throw Error(ErrorCode::invalid_laplacian, "Laplacian is not positive semidefinite");
    }
  }
  return GraphLaplacian(std::move(m));
}

GraphLaplacian GraphLaplacian::empty(std::size_t n_nodes) {
  const auto n = static_cast<Eigen::Index>(n_nodes);
  return GraphLaplacian::from_matrix(Matrix::Zero(n, n));
}

bool GraphLaplacian::satisfies_trace(double tol) const {
  return std::abs(trace() - static_cast<double>(n_nodes())) <= tol;
}

SignalMatrix::SignalMatrix(Matrix values) : values_(std::move(values)) {
  if (!values_.allFinite()) throw Error(ErrorCode::non_finite, "signal matrix has non-finite entries");
}

GraphLaplacian laplacian_from_weights(const EdgeWeightVector& w) {
  const std::size_t n = w.n_nodes();
  Matrix l = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double a = w[k];
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      l(ii, jj) = -a;
      l(jj, ii) = -a;
      l(ii, ii) += a;
      l(jj, jj) += a;
    }
  }
  return GraphLaplacian(std::move(l));
}

EdgeWeightVector weights_from_laplacian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::invalid_laplacian, "Laplacian must be square");
  const auto n = static_cast<std::size_t>(m.rows());
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  Vector w(static_cast<Eigen::Index>(edge_count(n)));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double upper = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double lower = m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      if (std::abs(upper - lower) > tol * scale) {
        throw Error(ErrorCode::invalid_laplacian, "Laplacian is not symmetric");
      }
      if (upper > tol * scale) {
        throw Error(ErrorCode::invalid_laplacian, "Laplacian has a positive off-diagonal entry");
      }
      w[static_cast<Eigen::Index>(k)] = std::max(0.0, -upper);
    }
  }
  return EdgeWeightVector(n, std::move(w));
}

EdgeWeightVector weights_from_laplacian(const GraphLaplacian& laplacian) {
  return weights_from_laplacian(laplacian.matrix());
}

double smoothness(const SignalMatrix& x, const GraphLaplacian& laplacian) {
  if (x.n_nodes() != laplacian.n_nodes()) {
    throw Error(ErrorCode::dimension_mismatch, "signal rows do not match Laplacian size");
  }
  // tr(X^T L X) = sum_ij L_ij <x_(i), x_(j)>
  const Matrix gram = x.values() * x.values().transpose();
  return std::max(0.0, (laplacian.matrix().array() * gram.array()).sum());
}

Vector pairwise_sq_distances(const SignalMatrix& x) {
  const std::size_t n = x.n_nodes();
  Vector z(static_cast<Eigen::Index>(edge_count(n)));
  const Matrix& v = x.values();
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++k)
      z[static_cast<Eigen::Index>(k)] =
          (v.row(static_cast<Eigen::Index>(i)) - v.row(static_cast<Eigen::Index>(j))).squaredNorm();
  return z;
}

Vector vec_laplacian(const GraphLaplacian& laplacian) {
  const Matrix& m = laplacian.matrix();
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Vector degrees(std::size_t n_nodes, const Vector& w) {
  Vector d = Vector::Zero(static_cast<Eigen::Index>(n_nodes));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t j = i + 1; j < n_nodes; ++j, ++k) {
      const double a = w[static_cast<Eigen::Index>(k)];
      d[static_cast<Eigen::Index>(i)] += a;
      d[static_cast<Eigen::Index>(j)] += a;
    }
  }
  return d;
}

Vector degrees_adjoint(std::size_t n_nodes, const Vector& d) {
  Vector out(static_cast<Eigen::Index>(edge_count(n_nodes)));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t j = i + 1; j < n_nodes; ++j, ++k)
      out[static_cast<Eigen::Index>(k)] =
          d[static_cast<Eigen::Index>(i)] + d[static_cast<Eigen::Index>(j)];
  return out;
}

Vector frobenius_operator(std::size_t n_nodes, const Vector& w) {
  return 2.0 * w + degrees_adjoint(n_nodes, degrees(n_nodes, w));
}

}  // namespace stg
