#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "stg/graph_core.hpp"
#include "stg/qp_solver.hpp"

namespace stg {

enum class SweepMode { gauss_seidel, jacobi };

struct JointConfig {
  double beta = 0.5;
  int max_outer_iter = 100;
  double outer_rel_tol = 1e-6;
  SolverSettings solver;
  SweepMode sweep = SweepMode::gauss_seidel;
  // Rescale each window so its pairwise squared row distances have unit mean.
  bool normalize_distances = false;
  // Worker threads for the Jacobi sweep; ignored in Gauss-Seidel mode.
  int threads = 1;

  void validate() const;
};

struct JointResult {
  std::vector<GraphLaplacian> spatial;
  GraphLaplacian temporal;
  // Entry 0 is the objective at the uniform initialization, then one entry
  // per outer iteration.
  std::vector<double> objective_trace;
  bool converged = false;
  int outer_iterations = 0;
  // Per-window multiplier applied to the signals when normalize_distances is on
  // (1 otherwise); the trace is the objective of the rescaled windows.
  std::vector<double> window_scales;
};

/// Sum of window smoothness, temporal smoothness of the stacked vec(L_m) rows
/// and beta-weighted squared Frobenius norms of every Laplacian.
double joint_objective(const std::vector<SignalMatrix>& windows,
                       const std::vector<GraphLaplacian>& spatial, const GraphLaplacian& temporal,
                       double beta);

/// Block subproblem for window m with every other block fixed. The returned
/// QP evaluates exactly to smoothness + beta ||L||_F^2 + temporal coupling
/// (its constant term included).
///
/// `spatial_weights` holds all M blocks; entry m is ignored.
SimplexQP assemble_spatial_subproblem(std::size_t m, const Vector& pairwise_distances,
                                      const std::vector<EdgeWeightVector>& spatial_weights,
                                      const Vector& temporal_row, double beta);

/// Convenience overload that takes the window signals and Laplacians directly.
SimplexQP assemble_spatial_subproblem(std::size_t m, const SignalMatrix& window,
                                      const std::vector<GraphLaplacian>& spatial,
                                      const GraphLaplacian& temporal, double beta);

/// Temporal subproblem over the M(M-1)/2 window-pair weights. Throws
/// degenerate_temporal for M < 2.
SimplexQP assemble_temporal_subproblem(const std::vector<GraphLaplacian>& spatial, double beta);

/// Off-diagonal weights of row m of a temporal Laplacian (-L_mj, 0 at j = m).
/// Throws invalid_temporal_graph on a weight below -1e-12.
Vector temporal_weights_row(const GraphLaplacian& temporal, std::size_t m);

/// Scale factor per window that gives unit-mean pairwise distances.
std::vector<double> distance_normalization(const std::vector<SignalMatrix>& windows);

JointResult learn_joint_graphs(const std::vector<SignalMatrix>& windows, const JointConfig& config);

// Writes spatial_0001.csv ... spatial_MMMM.csv, temporal.csv,
// objective_trace.csv and config.json into `dir`.
void write_joint_result(const std::filesystem::path& dir, const JointResult& result,
                        const JointConfig& config, const std::vector<std::string>& channel_names = {});
JointResult read_joint_result(const std::filesystem::path& dir,
                              std::vector<std::string>* channel_names = nullptr);

}  // namespace stg
