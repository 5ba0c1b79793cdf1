#include "stg/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "stg/error.hpp"

namespace stg {

SimplexQP SimplexQP::dense(Vector c, Matrix q, double simplex_sum, double constant) {
  if (q.rows() != q.cols() || q.rows() != c.size()) {
    throw Error(ErrorCode::dimension_mismatch, "quadratic and linear terms disagree in size");
  }
  SimplexQP qp;
  qp.linear_term = std::move(c);
  Matrix sym = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  qp.strong_convexity = 2.0 * std::max(0.0, eig.eigenvalues().minCoeff());
  qp.apply_quadratic = [m = std::move(sym)](const Vector& w) -> Vector { return m * w; };
  qp.simplex_sum = simplex_sum;
  qp.constant = constant;
  return qp;
}

double SimplexQP::objective(const Vector& w) const {
  return linear_term.dot(w) + w.dot(apply_quadratic(w)) + constant;
}

Vector SimplexQP::gradient(const Vector& w) const {
  return linear_term + 2.0 * apply_quadratic(w);
}

Matrix SimplexQP::materialize() const {
  const Eigen::Index d = dim();
  Matrix q(d, d);
  for (Eigen::Index k = 0; k < d; ++k) q.col(k) = apply_quadratic(Vector::Unit(d, k));
  return q;
}

Vector project_scaled_simplex(const Vector& v, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::invalid_argument, "simplex sum must be positive and finite");
  }
  if (!v.allFinite()) throw Error(ErrorCode::non_finite, "cannot project a non-finite vector");
  const Eigen::Index n = v.size();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "cannot project onto an empty simplex");

  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumsum += u[static_cast<std::size_t>(k)];
    const double t = (cumsum - s) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] - t > 0.0) theta = t;
  }
  Vector x = (v.array() - theta).max(0.0).matrix();

  // Rounding can leave |sum - s| around 1e-16 * n; push it onto the support.
  const double err = x.sum() - s;
  if (err != 0.0) {
    const Eigen::Index support = (x.array() > 0.0).count();
    if (support > 0) {
      for (Eigen::Index k = 0; k < n; ++k)
        if (x[k] > 0.0) x[k] = std::max(0.0, x[k] - err / static_cast<double>(support));
    }
  }
  return x;
}

double estimate_largest_eigenvalue(const SimplexQP::Operator& op, Eigen::Index dim,
                                   double rel_tol, int max_iter) {
  if (dim == 0) return 0.0;
  Vector v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v[k] = 1.0 + 0.1 * std::sin(static_cast<double>(k) + 1.0);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector qv = op(v);
    const double next = v.dot(qv);
    const double norm = qv.norm();
    if (norm == 0.0) return 0.0;
    v = qv / norm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) return std::max(next, norm);
    lambda = next;
  }
  return lambda;
}

double kkt_residual(const SimplexQP& qp, const Vector& w) {
  return (w - project_scaled_simplex(w - qp.gradient(w), qp.simplex_sum)).norm();
}

SolverReport solve_simplex_qp(const SimplexQP& qp, const Vector& w0, const SolverSettings& settings) {
  if (w0.size() != qp.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "starting point has the wrong dimension");
  }
  if (settings.max_iter < 1) throw Error(ErrorCode::invalid_argument, "max_iter must be >= 1");

  SolverReport report;
  Vector x = project_scaled_simplex(w0, qp.simplex_sum);
  if (qp.dim() == 1) {
    report.solution = x;
    report.objective = qp.objective(x);
    report.converged = true;
    return report;
  }

  // Lipschitz constant of grad f = 2Q.
  double lip = 2.0 * estimate_largest_eigenvalue(qp.apply_quadratic, qp.dim());
  if (!(lip > 0.0)) lip = 1.0;

  double fx = qp.objective(x);
  Vector y = x;
  double t = 1.0;
  report.kkt_residual = kkt_residual(qp, x);
  const double curvature_floor = -1e-10;

  int it = 0;
  while (it < settings.max_iter && report.kkt_residual > settings.kkt_tol) {
    ++it;
    const Vector qy = qp.apply_quadratic(y);
    const Vector grad = qp.linear_term + 2.0 * qy;
    Vector next = project_scaled_simplex(y - grad / lip, qp.simplex_sum);
    const Vector step = next - y;
    const double step_sq = step.squaredNorm();
    if (step_sq == 0.0) {
      if (y == x) break;  // stationary
      y = x;
      t = 1.0;
      continue;
    }
    const double curvature = step.dot(qp.apply_quadratic(step));
    if (curvature < curvature_floor * step_sq * std::max(1.0, lip)) {
      throw Error(ErrorCode::invalid_problem, "quadratic term has negative curvature");
    }
    // Exact quadratic majorization check; a power-iteration underestimate
    // would otherwise break the descent guarantee.
    if (curvature > 0.5 * lip * step_sq * (1.0 + 1e-12)) {
      lip *= 2.0;
      continue;
    }
    const double f_next = qp.objective(next);
    if (f_next > fx) {
      y = x;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - x);
    x = std::move(next);
    fx = f_next;
    t = t_next;
    report.kkt_residual = kkt_residual(qp, x);
  }

  report.solution = std::move(x);
  report.objective = fx;
  report.iterations = it;
  report.converged = report.kkt_residual <= settings.kkt_tol;
  return report;
}

namespace {

void grid_recurse(const SimplexQP& qp, double remaining, double step, Eigen::Index k, Vector& point,
                  Vector& best, double& best_value) {
  const Eigen::Index d = point.size();
  if (k == d - 1) {
    point[k] = std::max(0.0, remaining);
    const double value = qp.objective(point);
    if (value < best_value) {
      best_value = value;
      best = point;
    }
    return;
  }
  const auto max_units = static_cast<long>(std::floor(remaining / step + 1e-9));
  for (long u = 0; u <= max_units; ++u) {
    point[k] = static_cast<double>(u) * step;
    grid_recurse(qp, remaining - point[k], step, k + 1, point, best, best_value);
  }
}

}  // namespace

std::pair<Vector, double> brute_force_simplex_qp(const SimplexQP& qp, double simplex_sum,
                                                 double grid_step) {
  if (qp.dim() > 4) {
    throw Error(ErrorCode::invalid_argument, "brute-force oracle refuses dimension > 4");
  }
  if (!(grid_step > 0.0) || !(simplex_sum > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "grid step and simplex sum must be positive");
  }
  Vector point = Vector::Zero(qp.dim());
  Vector best = point;
  double best_value = std::numeric_limits<double>::infinity();
  grid_recurse(qp, simplex_sum, grid_step, 0, point, best, best_value);
  return {best, best_value};
}

}  // namespace stg
