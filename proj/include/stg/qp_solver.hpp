#pragma once

#include <functional>
#include <utility>

#include "stg/graph_core.hpp"

namespace stg {

/// min  c^T w + w^T Q w + constant   s.t.  w >= 0, sum(w) = simplex_sum.
///
/// Q is only ever applied, never factored; graph subproblems supply it as a
/// matrix-free operator. `constant` is carried so that assembled subproblems
/// reproduce the full block objective, not just its w-dependent part.
struct SimplexQP {
  using Operator = std::function<Vector(const Vector&)>;

  Vector linear_term;
  Operator apply_quadratic;
  double simplex_sum = 1.0;
  double strong_convexity = 0.0;  // lower bound on lambda_min(2Q) along the simplex
  double constant = 0.0;

  static SimplexQP dense(Vector c, Matrix q, double simplex_sum, double constant = 0.0);

  Eigen::Index dim() const { return linear_term.size(); }
  double objective(const Vector& w) const;
  Vector gradient(const Vector& w) const;
  Matrix materialize() const;
};

struct SolverSettings {
  int max_iter = 5000;
  double kkt_tol = 1e-7;
};

struct SolverReport {
  Vector solution;
  double objective = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool converged = false;
};

/// Euclidean projection onto {x >= 0, sum(x) = s}.
Vector project_scaled_simplex(const Vector& v, double s);

/// Largest eigenvalue of a symmetric PSD operator by power iteration.
double estimate_largest_eigenvalue(const SimplexQP::Operator& op, Eigen::Index dim,
                                   double rel_tol = 1e-6, int max_iter = 1000);

/// ||w - P(w - grad f(w))||, zero exactly at the constrained minimizer.
double kkt_residual(const SimplexQP& qp, const Vector& w);

/// Accelerated projected gradient with function-value restart. The iterate
/// sequence is monotone, so the returned objective never exceeds the one at
/// the (projected) starting point. Throws invalid_problem on detected
/// negative curvature.
SolverReport solve_simplex_qp(const SimplexQP& qp, const Vector& w0,
                              const SolverSettings& settings = {});

/// Exhaustive search over the grid {w : w_k in grid_step * Z, w >= 0} with the
/// last coordinate fixed by the sum constraint. Test oracle; dim <= 4.
std::pair<Vector, double> brute_force_simplex_qp(const SimplexQP& qp, double simplex_sum,
                                                 double grid_step);

}  // namespace stg
