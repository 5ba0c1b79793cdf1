#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "stg/graph_core.hpp"
#include "stg/signal_io.hpp"

namespace stg {

/// Horizontal visibility graph of a series: samples i < j are linked iff
/// every sample strictly between them is strictly below min(x_i, x_j).
struct HvgGraph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j, sorted

  Matrix adjacency() const;
  std::vector<std::size_t> degrees() const;
};

/// Linear-time stack construction. Throws invalid_argument for length < 2.
HvgGraph build_hvg(const std::vector<double>& series);

/// O(n^2) pairwise check of the criterion; reference for tests.
HvgGraph build_hvg_bruteforce(const std::vector<double>& series);

struct FeatureMatrix {
  Matrix values;  // rows = electrodes
  std::vector<bool> labels;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

/// Per electrode: mean HVG adjacency over the selected windows, strict upper
/// triangle flattened row-major (n(n-1)/2 features for n samples).
FeatureMatrix hvg_features(const WindowedRecording& wr, const std::array<std::size_t, 3>& selected);

/// Last pre-onset, onset and first post-onset windows.
std::array<std::size_t, 3> default_hvg_windows(const WindowedRecording& wr);

struct PcaModel {
  Vector mean;
  Matrix components;  // features x k, orthonormal columns
  Vector explained_variance;
  Vector explained_variance_ratio;

  Matrix transform(const Matrix& x) const;
};

/// n_components = 0 picks the smallest count reaching `variance_target`,
/// capped at rows - 1. Component signs make the largest-magnitude loading
/// positive.
PcaModel pca_fit(const Matrix& x, std::size_t n_components, double variance_target = 0.95);
FeatureMatrix pca_fit_transform(const FeatureMatrix& f, std::size_t n_components, PcaModel* model = nullptr);

struct LogisticConfig {
  double l2 = 1.0;
  int max_iter = 100;
  double grad_tol = 1e-6;
  bool balance_classes = true;
};

struct LogisticModel {
  Vector coef;
  double intercept = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<double> loss_trace;
};

/// Per-sample weights: n / (2 n_class) when balanced, else 1.
Vector logistic_sample_weights(const std::vector<bool>& labels, bool balanced);

/// Weighted mean log-loss plus (l2/2)||coef||^2; parameters ordered
/// [coef..., intercept]. Gradient written into `grad` when non-null.
double logistic_loss(const Matrix& x, const std::vector<bool>& labels, const Vector& sample_weights,
                     double l2, const Vector& params, Vector* grad = nullptr);

/// Damped Newton with backtracking; loss_trace is non-increasing.
/// Throws single_class when only one label is present.
LogisticModel logreg_train(const FeatureMatrix& f, const LogisticConfig& config = {});
Vector logreg_predict(const LogisticModel& model, const Matrix& x);

struct BaselineConfig {
  std::size_t n_folds = 5;
  std::size_t pca_components = 0;  // 0 = variance rule
  double pca_variance = 0.95;
  LogisticConfig logistic;
  std::uint64_t seed = 1;
};

struct BaselinePredictions {
  std::vector<int> fold;  // per row
  Vector probability;
  std::vector<bool> predicted;
  std::vector<LogisticModel> models;  // per fold
};

/// Stratified fold assignment: each class shuffled with `seed`, then dealt
/// round-robin across folds.
std::vector<int> stratified_folds(const std::vector<bool>& labels, std::size_t n_folds, std::uint64_t seed);

/// Out-of-fold predictions: PCA fitted on each training split, then logistic
/// regression, threshold 0.5.
BaselinePredictions run_baseline_cv(const FeatureMatrix& f, const BaselineConfig& config);

void write_feature_matrix_csv(const std::filesystem::path& path, const FeatureMatrix& f,
                              const std::vector<std::string>& row_names);

}  // namespace stg
