#include "stg/joint_learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "stg/csv.hpp"
#include "stg/error.hpp"
#include "stg/laplacian_io.hpp"

namespace stg {

namespace {

double frobenius_sq(std::size_t n, const Vector& w) { return w.dot(frobenius_operator(n, w)); }

double weights_objective(const std::vector<Vector>& distances, const std::vector<EdgeWeightVector>& spatial,
                         const EdgeWeightVector& temporal, double beta) {
  const std::size_t m_windows = spatial.size();
  const std::size_t n = spatial.front().n_nodes();
  double total = 0.0;
  for (std::size_t m = 0; m < m_windows; ++m) {
    total += distances[m].dot(spatial[m].weights()) + beta * frobenius_sq(n, spatial[m].weights());
  }
  if (m_windows >= 2) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < m_windows; ++i) {
      for (std::size_t j = i + 1; j < m_windows; ++j, ++k) {
        const double v = temporal[k];
        if (v != 0.0) {
          total += v * frobenius_sq(n, spatial[i].weights() - spatial[j].weights());
        }
      }
    }
    total += beta * frobenius_sq(m_windows, temporal.weights());
  }
  return total;
}

EdgeWeightVector as_weights(std::size_t n, const Vector& solution) {
  return EdgeWeightVector(n, solution.cwiseMax(0.0));
}

std::string block_name(std::size_t m) {
  return m == static_cast<std::size_t>(-1) ? std::string("temporal") : "spatial block " + std::to_string(m + 1);
}

}  // namespace

void JointConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::invalid_argument, "beta must be > 0");
  if (max_outer_iter < 1) throw Error(ErrorCode::invalid_argument, "max_outer_iter must be >= 1");
  if (!(outer_rel_tol > 0.0)) throw Error(ErrorCode::invalid_argument, "outer_rel_tol must be > 0");
  if (solver.max_iter < 1 || !(solver.kkt_tol > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "solver settings must be positive");
  }
}

double joint_objective(const std::vector<SignalMatrix>& windows, const std::vector<GraphLaplacian>& spatial,
                       const GraphLaplacian& temporal, double beta) {
  const std::size_t m_windows = windows.size();
  if (m_windows == 0 || spatial.size() != m_windows || temporal.n_nodes() != m_windows) {
    throw Error(ErrorCode::dimension_mismatch, "windows, spatial graphs and temporal graph disagree on M");
  }
  if (!(beta > 0.0)) throw Error(ErrorCode::invalid_argument, "beta must be > 0");

  double total = 0.0;
  Matrix stacked(static_cast<Eigen::Index>(m_windows), static_cast<Eigen::Index>(spatial[0].matrix().size()));
  for (std::size_t m = 0; m < m_windows; ++m) {
    if (spatial[m].n_nodes() != spatial[0].n_nodes()) {
      throw Error(ErrorCode::dimension_mismatch, "spatial graphs differ in node count");
    }
    total += smoothness(windows[m], spatial[m]) + beta * spatial[m].matrix().squaredNorm();
    stacked.row(static_cast<Eigen::Index>(m)) = vec_laplacian(spatial[m]).transpose();
  }
  total += (stacked.transpose() * temporal.matrix() * stacked).trace();
  total += beta * temporal.matrix().squaredNorm();
  return total;
}

Vector temporal_weights_row(const GraphLaplacian& temporal, std::size_t m) {
  const auto n = static_cast<Eigen::Index>(temporal.n_nodes());
  Vector row(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == static_cast<Eigen::Index>(m)) {
      row[j] = 0.0;
      continue;
    }
    const double w = -temporal.matrix()(static_cast<Eigen::Index>(m), j);
    if (w < -1e-12) {
      throw Error(ErrorCode::invalid_temporal_graph, "temporal graph has a negative edge weight");
    }
    row[j] = std::max(0.0, w);
  }
  return row;
}

SimplexQP assemble_spatial_subproblem(std::size_t m, const Vector& pairwise_distances,
                                      const std::vector<EdgeWeightVector>& spatial_weights,
                                      const Vector& temporal_row, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::invalid_argument, "beta must be > 0");
  if (m >= spatial_weights.size() || static_cast<std::size_t>(temporal_row.size()) != spatial_weights.size()) {
    throw Error(ErrorCode::dimension_mismatch, "temporal row does not match the number of windows");
  }
  const std::size_t n = spatial_weights[m].n_nodes();
  if (static_cast<std::size_t>(pairwise_distances.size()) != edge_count(n)) {
    throw Error(ErrorCode::dimension_mismatch, "pairwise distances do not match node count");
  }

  // sum_j c_j ||L(w) - L(w_j)||_F^2 expands to
  //   C w^T F w - 2 w^T F (sum_j c_j w_j) + sum_j c_j w_j^T F w_j.
  double coupling = 0.0;
  double constant = 0.0;
  Vector target = Vector::Zero(pairwise_distances.size());
  for (std::size_t j = 0; j < spatial_weights.size(); ++j) {
    if (j == m) continue;
    const double c = temporal_row[static_cast<Eigen::Index>(j)];
    if (c < -1e-12) throw Error(ErrorCode::invalid_temporal_graph, "temporal graph has a negative edge weight");
    if (c <= 0.0) continue;
    coupling += c;
    target += c * spatial_weights[j].weights();
    constant += c * frobenius_sq(n, spatial_weights[j].weights());
  }

  SimplexQP qp;
  qp.linear_term = pairwise_distances - 2.0 * frobenius_operator(n, target);
  const double scale = beta + coupling;
  qp.apply_quadratic = [n, scale](const Vector& w) -> Vector { return scale * frobenius_operator(n, w); };
  qp.simplex_sum = 0.5 * static_cast<double>(n);
  qp.strong_convexity = 4.0 * scale;  // lambda_min(F) = 2
  qp.constant = constant;
  return qp;
}

SimplexQP assemble_spatial_subproblem(std::size_t m, const SignalMatrix& window,
                                      const std::vector<GraphLaplacian>& spatial,
                                      const GraphLaplacian& temporal, double beta) {
  if (temporal.n_nodes() != spatial.size()) {
    throw Error(ErrorCode::dimension_mismatch, "temporal graph size does not match the number of windows");
  }
  std::vector<EdgeWeightVector> weights;
  weights.reserve(spatial.size());
  for (const auto& l : spatial) weights.push_back(weights_from_laplacian(l));
  return assemble_spatial_subproblem(m, pairwise_sq_distances(window), weights,
                                     temporal_weights_row(temporal, m), beta);
}

SimplexQP assemble_temporal_subproblem(const std::vector<GraphLaplacian>& spatial, double beta) {
  const std::size_t m_windows = spatial.size();
  if (m_windows < 2) {
    throw Error(ErrorCode::degenerate_temporal, "temporal graph needs at least two windows");
  }
  if (!(beta > 0.0)) throw Error(ErrorCode::invalid_argument, "beta must be > 0");
  Vector d(static_cast<Eigen::Index>(edge_count(m_windows)));
  std::size_t k = 0;
  for (std::size_t i = 0; i < m_windows; ++i)
    for (std::size_t j = i + 1; j < m_windows; ++j, ++k)
      d[static_cast<Eigen::Index>(k)] = (spatial[i].matrix() - spatial[j].matrix()).squaredNorm();

  SimplexQP qp;
  qp.linear_term = std::move(d);
  qp.apply_quadratic = [m_windows, beta](const Vector& w) -> Vector {
    return beta * frobenius_operator(m_windows, w);
  };
  qp.simplex_sum = 0.5 * static_cast<double>(m_windows);
  qp.strong_convexity = 4.0 * beta;
  return qp;
}

std::vector<double> distance_normalization(const std::vector<SignalMatrix>& windows) {
  std::vector<double> scales;
  scales.reserve(windows.size());
  for (const auto& w : windows) {
    const Vector z = pairwise_sq_distances(w);
    const double mean = z.size() > 0 ? z.mean() : 0.0;
    scales.push_back(mean > 0.0 ? 1.0 / std::sqrt(mean) : 1.0);
  }
  return scales;
}

JointResult learn_joint_graphs(const std::vector<SignalMatrix>& input, const JointConfig& config) {
  config.validate();
  if (input.empty()) throw Error(ErrorCode::invalid_argument, "need at least one window");
  const std::size_t n = input.front().n_nodes();
  if (n < 2) throw Error(ErrorCode::invalid_argument, "need at least two nodes per window");
  for (const auto& w : input) {
    if (w.n_nodes() != n) throw Error(ErrorCode::dimension_mismatch, "windows differ in node count");
  }
  const std::size_t m_windows = input.size();

  JointResult result;
  result.window_scales.assign(m_windows, 1.0);
  if (config.normalize_distances) result.window_scales = distance_normalization(input);

  std::vector<Vector> distances;
  distances.reserve(m_windows);
  for (std::size_t m = 0; m < m_windows; ++m)
    distances.push_back(result.window_scales[m] * result.window_scales[m] * pairwise_sq_distances(input[m]));

  std::vector<EdgeWeightVector> spatial(m_windows, EdgeWeightVector::uniform(n));
  EdgeWeightVector temporal = EdgeWeightVector::uniform(m_windows);

  auto solve_spatial = [&](std::size_t m, const std::vector<EdgeWeightVector>& others,
                           const Vector& row) -> EdgeWeightVector {
    try {
      const SimplexQP qp = assemble_spatial_subproblem(m, distances[m], others, row, config.beta);
      const SolverReport rep = solve_simplex_qp(qp, others[m].weights(), config.solver);
      return as_weights(n, rep.solution);
    } catch (const Error& e) {
      throw Error(e.code(), block_name(m) + ": " + e.what());
    }
  };
  auto row_of = [&](std::size_t m) -> Vector {
    Vector row = Vector::Zero(static_cast<Eigen::Index>(m_windows));
    for (std::size_t j = 0; j < m_windows; ++j)
      if (j != m) row[static_cast<Eigen::Index>(j)] = temporal.weight(m, j);
    return row;
  };

  double current = weights_objective(distances, spatial, temporal, config.beta);
  result.objective_trace.push_back(current);

  for (int it = 1; it <= config.max_outer_iter; ++it) {
    if (config.sweep == SweepMode::gauss_seidel) {
      for (std::size_t m = 0; m < m_windows; ++m) spatial[m] = solve_spatial(m, spatial, row_of(m));
    } else {
      const std::vector<EdgeWeightVector> previous = spatial;
      const std::size_t workers =
          std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, config.threads)), 1, m_windows);
      std::vector<std::thread> pool;
      std::exception_ptr failure;
      std::mutex failure_mutex;
      for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          for (std::size_t m = t; m < m_windows; m += workers) {
            try {
              spatial[m] = solve_spatial(m, previous, row_of(m));
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
      for (auto& th : pool) th.join();
      if (failure) std::rethrow_exception(failure);
    }

    if (m_windows >= 2) {
      std::vector<GraphLaplacian> laplacians;
      laplacians.reserve(m_windows);
      for (const auto& w : spatial) laplacians.push_back(laplacian_from_weights(w));
      try {
        const SimplexQP qp = assemble_temporal_subproblem(laplacians, config.beta);
        temporal = as_weights(m_windows, solve_simplex_qp(qp, temporal.weights(), config.solver).solution);
      } catch (const Error& e) {
        throw Error(e.code(), block_name(static_cast<std::size_t>(-1)) + ": " + e.what());
      }
    }

    const double next = weights_objective(distances, spatial, temporal, config.beta);
    result.objective_trace.push_back(next);
    result.outer_iterations = it;
    const double rel = std::abs(current - next) / std::max(std::abs(current), 1e-300);
    current = next;
    if (rel < config.outer_rel_tol) {
      result.converged = true;
      break;
    }
  }

  result.spatial.reserve(m_windows);
  for (const auto& w : spatial) result.spatial.push_back(laplacian_from_weights(w));
  result.temporal = m_windows >= 2 ? laplacian_from_weights(temporal) : GraphLaplacian::empty(1);
  return result;
}

namespace {

std::string spatial_file_name(std::size_t m) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "spatial_%04zu.csv", m + 1);
  return buf;
}

const char* sweep_name(SweepMode mode) { return mode == SweepMode::gauss_seidel ? "gauss_seidel" : "jacobi"; }

}  // namespace

void write_joint_result(const std::filesystem::path& dir, const JointResult& result, const JointConfig& config,
                        const std::vector<std::string>& channel_names) {
  std::filesystem::create_directories(dir);
  for (std::size_t m = 0; m < result.spatial.size(); ++m)
    write_laplacian_csv(dir / spatial_file_name(m), result.spatial[m], channel_names);
  write_laplacian_csv(dir / "temporal.csv", result.temporal);

  std::vector<csv::Row> trace{{"iteration", "objective"}};
  for (std::size_t k = 0; k < result.objective_trace.size(); ++k)
    trace.push_back({std::to_string(k), csv::format_double(result.objective_trace[k])});
  csv::write_rows(dir / "objective_trace.csv", trace);

  nlohmann::ordered_json j;
  j["beta"] = config.beta;
  j["max_outer_iter"] = config.max_outer_iter;
  j["outer_rel_tol"] = config.outer_rel_tol;
  j["solver_max_iter"] = config.solver.max_iter;
  j["solver_kkt_tol"] = config.solver.kkt_tol;
  j["sweep"] = sweep_name(config.sweep);
  j["normalize_distances"] = config.normalize_distances;
  j["n_windows"] = result.spatial.size();
  j["n_nodes"] = result.spatial.empty() ? 0 : result.spatial.front().n_nodes();
  j["outer_iterations"] = result.outer_iterations;
  j["converged"] = result.converged;
  j["window_scales"] = result.window_scales;
  j["tol_psd"] = kTolPsd;
  j["tol_trace_feasible"] = kTolTraceFeasible;
  csv::write_text(dir / "config.json", j.dump(2) + "\n");
}

JointResult read_joint_result(const std::filesystem::path& dir, std::vector<std::string>* channel_names) {
  JointResult result;
  for (std::size_t m = 0;; ++m) {
    const auto path = dir / spatial_file_name(m);
    if (!std::filesystem::exists(path)) break;
    result.spatial.push_back(read_laplacian_csv(path, m == 0 ? channel_names : nullptr));
  }
  if (result.spatial.empty()) throw Error(ErrorCode::io, "no spatial_0001.csv in " + dir.string());
  result.temporal = read_laplacian_csv(dir / "temporal.csv");
  for (const auto& row : csv::read_rows(dir / "objective_trace.csv")) {
    if (row.size() == 2 && row[0] != "iteration") result.objective_trace.push_back(csv::parse_double(row[1]));
  }
  const auto cfg_path = dir / "config.json";
  if (std::filesystem::exists(cfg_path)) {
    const auto j = nlohmann::json::parse(csv::read_text(cfg_path), nullptr, false);
    if (!j.is_discarded()) {
      result.converged = j.value("converged", false);
      result.outer_iterations = j.value("outer_iterations", 0);
      result.window_scales = j.value("window_scales", std::vector<double>{});
    }
  }
  return result;
}

}  // namespace stg
