#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "stg/graph_core.hpp"
#include "stg/joint_learner.hpp"
#include "stg/signal_io.hpp"

namespace stg {

struct ElectrodeScore {
  std::string channel;
  double score = 0.0;
  bool predicted_soz = false;
  bool true_soz = false;
};

enum class ScoreMode { degree, weighted_degree };

// Edges count toward degree when weight > kEdgeEpsilon * mean edge weight.
constexpr double kEdgeEpsilon = 1e-4;

/// Per-window node scores (degree count or sum of incident weights).
Vector node_scores(const GraphLaplacian& spatial, ScoreMode mode);

/// Mean node score over onset and post-onset windows, ranked descending with
/// ties broken by channel name. Throws invalid_argument when no onset or
/// post-onset window exists.
std::vector<ElectrodeScore> score_electrodes(const std::vector<GraphLaplacian>& spatial,
                                             const std::vector<WindowLabel>& labels,
                                             const std::vector<std::string>& channels,
                                             const std::vector<bool>& soz_mask,
                                             ScoreMode mode = ScoreMode::weighted_degree);

/// Marks the first k entries of a ranked score list as SOZ.
std::vector<ElectrodeScore> classify_topk(std::vector<ElectrodeScore> ranked, std::size_t k);

struct ClassMetrics {
  double class0_accuracy = 0.0;  // TN / (TN + FP)
  double class1_accuracy = 0.0;  // TP / (TP + FN)
  double total_accuracy = 0.0;
  std::size_t n0 = 0;
  std::size_t n1 = 0;
};

ClassMetrics per_class_metrics(const std::vector<bool>& predicted, const std::vector<bool>& truth);
ClassMetrics per_class_metrics(const std::vector<ElectrodeScore>& scores);

enum class DominanceNorm { group_size, top_size };

struct WindowDominance {
  std::size_t window = 0;
  WindowLabel label = WindowLabel::pre_onset;
  double soz_ratio = 0.0;
  double nonsoz_ratio = 0.0;
};

/// Per window: the ceil(top_fraction * N) highest weighted-degree electrodes;
/// reports SOZ and non-SOZ counts among them, normalized by group size
/// (default) or by the top-set size.
std::vector<WindowDominance> window_dominance(const std::vector<GraphLaplacian>& spatial,
                                              const std::vector<WindowLabel>& labels,
                                              const std::vector<std::string>& channels,
                                              const std::vector<bool>& soz_mask, double top_fraction,
                                              DominanceNorm norm = DominanceNorm::group_size);

struct RegimeContrast {
  double within_mean = 0.0;  // pairs inside onset + post-onset
  double across_mean = 0.0;  // pre-onset vs onset + post-onset pairs
};

RegimeContrast regime_contrast(const GraphLaplacian& temporal, const std::vector<WindowLabel>& labels);

struct MeanGraphContrast {
  Matrix pre_mean;
  Matrix post_mean;
  Matrix difference;  // post - pre
};

/// Entrywise means of pre-onset and post-onset spatial Laplacians.
MeanGraphContrast mean_graph_contrast(const std::vector<GraphLaplacian>& spatial,
                                      const std::vector<WindowLabel>& labels);

struct WilcoxonResult {
  double statistic = 0.0;  // W+ (sum of positive ranks)
  double p_value = 1.0;    // two-sided
  std::size_t n_nonzero = 0;
  bool exact = true;
};

/// Two-sided signed-rank test on a[i] - b[i]. Zero differences are dropped,
/// tied magnitudes get average ranks; exact null distribution for up to 25
/// nonzero pairs, normal approximation with tie correction beyond. All-zero
/// differences give p = 1. Fewer than 5 pairs throws insufficient_data.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

struct RecordingMetrics {
  std::string recording;
  ClassMetrics metrics;
};

struct MethodComparison {
  WilcoxonResult class0;
  WilcoxonResult class1;
  WilcoxonResult total;
  std::vector<std::string> recordings;  // paired, sorted
};

/// Pairs recordings by id; throws insufficient_data below 5 pairs.
MethodComparison compare_methods(const std::vector<RecordingMetrics>& a, const std::vector<RecordingMetrics>& b);

/// Histogram over [0, 1] normalized to unit mass.
std::vector<double> normalized_histogram(const std::vector<double>& values, std::size_t bins = 10);

// CSV exports.
void write_scores_csv(const std::filesystem::path& path, const std::vector<ElectrodeScore>& scores);
void write_dominance_csv(const std::filesystem::path& path, const std::vector<WindowDominance>& rows);
void write_regime_contrast_csv(const std::filesystem::path& path, const RegimeContrast& rc);
void write_temporal_adjacency_csv(const std::filesystem::path& path, const GraphLaplacian& temporal,
                                  const std::vector<WindowLabel>& labels);
// Edge list i,j,channel_i,channel_j,pre,post,difference sorted by |difference| descending.
void write_difference_edges_csv(const std::filesystem::path& path, const MeanGraphContrast& contrast,
                                const std::vector<std::string>& channels);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<RecordingMetrics>& rows);
std::vector<RecordingMetrics> read_metrics_csv(const std::filesystem::path& path);
// Table layout: one row per recording with both methods side by side, then mean and std rows.
void write_comparison_table_csv(const std::filesystem::path& path, const std::vector<RecordingMetrics>& a,
                                const std::vector<RecordingMetrics>& b, const MethodComparison& cmp);
void write_histogram_csv(const std::filesystem::path& path, const std::vector<RecordingMetrics>& a,
                         const std::vector<RecordingMetrics>& b, std::size_t bins = 10);

}  // namespace stg
