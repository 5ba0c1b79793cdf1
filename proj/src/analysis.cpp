#include "stg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "stg/csv.hpp"
#include "stg/error.hpp"

namespace stg {

namespace {

// Indices sorted by score descending, ties by channel name ascending.
std::vector<std::size_t> rank_order(const Vector& scores, const std::vector<std::string>& channels) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores[static_cast<Eigen::Index>(a)];
    const double sb = scores[static_cast<Eigen::Index>(b)];
    if (sa != sb) return sa > sb;
    return channels[a] < channels[b];
  });
  return order;
}

std::vector<std::string> default_names(std::size_t n, const std::vector<std::string>& channels) {
  if (!channels.empty()) {
    if (channels.size() != n) throw Error(ErrorCode::dimension_mismatch, "channel count does not match graph size");
    return channels;
  }
  std::vector<std::string> names;
  // Zero-padded so lexicographic tie-breaks follow numeric order.
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = std::to_string(i);
    names.push_back(std::string(6 - std::min<std::size_t>(6, s.size()), '0') + s);
  }
  return names;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

Vector node_scores(const GraphLaplacian& spatial, ScoreMode mode) {
  const Matrix& l = spatial.matrix();
  const Eigen::Index n = l.rows();
  if (mode == ScoreMode::weighted_degree) return l.diagonal().cwiseMax(0.0);
  const double mean_weight = n > 1 ? l.diagonal().sum() / static_cast<double>(n * (n - 1)) : 0.0;
  const double threshold = kEdgeEpsilon * mean_weight;
  Vector deg = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && -l(i, j) > threshold) deg[i] += 1.0;
  return deg;
}

std::vector<ElectrodeScore> score_electrodes(const std::vector<GraphLaplacian>& spatial,
                                             const std::vector<WindowLabel>& labels,
                                             const std::vector<std::string>& channels,
                                             const std::vector<bool>& soz_mask, ScoreMode mode) {
  if (spatial.size() != labels.size()) throw Error(ErrorCode::dimension_mismatch, "graphs and labels disagree");
  if (spatial.empty()) throw Error(ErrorCode::invalid_argument, "no spatial graphs");
  const std::size_t n = spatial.front().n_nodes();
  const auto names = default_names(n, channels);
  if (!soz_mask.empty() && soz_mask.size() != n) throw Error(ErrorCode::dimension_mismatch, "soz mask size mismatch");

  Vector total = Vector::Zero(static_cast<Eigen::Index>(n));
  std::size_t used = 0;
  for (std::size_t m = 0; m < spatial.size(); ++m) {
    if (labels[m] == WindowLabel::pre_onset) continue;
    total += node_scores(spatial[m], mode);
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::invalid_argument, "no onset or post-onset windows to score");
  total /= static_cast<double>(used);

  std::vector<ElectrodeScore> out;
  for (std::size_t i : rank_order(total, names)) {
    out.push_back({names[i], total[static_cast<Eigen::Index>(i)], false, soz_mask.empty() ? false : soz_mask[i]});
  }
  return out;
}

std::vector<ElectrodeScore> classify_topk(std::vector<ElectrodeScore> ranked, std::size_t k) {
  if (k > ranked.size()) throw Error(ErrorCode::invalid_argument, "k exceeds the number of electrodes");
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].predicted_soz = i < k;
  return ranked;
}

ClassMetrics per_class_metrics(const std::vector<bool>& predicted, const std::vector<bool>& truth) {
  if (predicted.size() != truth.size()) throw Error(ErrorCode::dimension_mismatch, "prediction/truth size mismatch");
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) (predicted[i] ? tp : fn)++;
    else (predicted[i] ? fp : tn)++;
  }
  ClassMetrics m;
  m.n0 = tn + fp;
  m.n1 = tp + fn;
  m.class0_accuracy = m.n0 ? static_cast<double>(tn) / static_cast<double>(m.n0) : 0.0;
  m.class1_accuracy = m.n1 ? static_cast<double>(tp) / static_cast<double>(m.n1) : 0.0;
  m.total_accuracy = truth.empty() ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(truth.size());
  return m;
}

ClassMetrics per_class_metrics(const std::vector<ElectrodeScore>& scores) {
  std::vector<bool> pred, truth;
  for (const auto& s : scores) {
    pred.push_back(s.predicted_soz);
    truth.push_back(s.true_soz);
  }
  return per_class_metrics(pred, truth);
}

std::vector<WindowDominance> window_dominance(const std::vector<GraphLaplacian>& spatial,
                                              const std::vector<WindowLabel>& labels,
                                              const std::vector<std::string>& channels,
                                              const std::vector<bool>& soz_mask, double top_fraction,
                                              DominanceNorm norm) {
  if (spatial.size() != labels.size()) throw Error(ErrorCode::dimension_mismatch, "graphs and labels disagree");
  if (spatial.empty()) throw Error(ErrorCode::invalid_argument, "no spatial graphs");
  const std::size_t n = spatial.front().n_nodes();
  if (soz_mask.size() != n) throw Error(ErrorCode::dimension_mismatch, "soz mask size mismatch");
  const auto names = default_names(n, channels);
  const auto top = static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(n) - 1e-12));
  if (top == 0 || top > n) throw Error(ErrorCode::invalid_argument, "top fraction selects no electrodes");
  const auto n_soz = static_cast<std::size_t>(std::count(soz_mask.begin(), soz_mask.end(), true));
  const std::size_t n_non = n - n_soz;

  std::vector<WindowDominance> out;
  for (std::size_t m = 0; m < spatial.size(); ++m) {
    const auto order = rank_order(node_scores(spatial[m], ScoreMode::weighted_degree), names);
    std::size_t soz_hits = 0;
    for (std::size_t r = 0; r < top; ++r) soz_hits += soz_mask[order[r]] ? 1 : 0;
    const std::size_t non_hits = top - soz_hits;
    WindowDominance row{m, labels[m], 0.0, 0.0};
    if (norm == DominanceNorm::group_size) {
      row.soz_ratio = n_soz ? static_cast<double>(soz_hits) / static_cast<double>(n_soz) : 0.0;
      row.nonsoz_ratio = n_non ? static_cast<double>(non_hits) / static_cast<double>(n_non) : 0.0;
    } else {
      row.soz_ratio = static_cast<double>(soz_hits) / static_cast<double>(top);
      row.nonsoz_ratio = static_cast<double>(non_hits) / static_cast<double>(top);
    }
    out.push_back(row);
  }
  return out;
}

RegimeContrast regime_contrast(const GraphLaplacian& temporal, const std::vector<WindowLabel>& labels) {
  const std::size_t m_windows = temporal.n_nodes();
  if (labels.size() != m_windows) throw Error(ErrorCode::dimension_mismatch, "temporal graph and labels disagree");
  if (m_windows < 3) throw Error(ErrorCode::invalid_argument, "regime contrast needs at least 3 windows");
  const Matrix& l = temporal.matrix();
  double within = 0.0, across = 0.0;
  std::size_t n_within = 0, n_across = 0;
  for (std::size_t i = 0; i < m_windows; ++i) {
    for (std::size_t j = i + 1; j < m_windows; ++j) {
      const bool pi = labels[i] == WindowLabel::pre_onset;
      const bool pj = labels[j] == WindowLabel::pre_onset;
      const double w = -l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!pi && !pj) {
        within += w;
        ++n_within;
      } else if (pi != pj) {
        across += w;
        ++n_across;
      }
    }
  }
  if (n_within == 0 || n_across == 0) {
    throw Error(ErrorCode::invalid_argument, "regime contrast needs pre-onset windows and two onset/post-onset windows");
  }
  return {within / static_cast<double>(n_within), across / static_cast<double>(n_across)};
}

MeanGraphContrast mean_graph_contrast(const std::vector<GraphLaplacian>& spatial,
                                      const std::vector<WindowLabel>& labels) {
  if (spatial.size() != labels.size()) throw Error(ErrorCode::dimension_mismatch, "graphs and labels disagree");
  if (spatial.empty()) throw Error(ErrorCode::invalid_argument, "no spatial graphs");
  const auto n = static_cast<Eigen::Index>(spatial.front().n_nodes());
  MeanGraphContrast out{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix()};
  std::size_t n_pre = 0, n_post = 0;
  for (std::size_t m = 0; m < spatial.size(); ++m) {
    if (labels[m] == WindowLabel::pre_onset) {
      out.pre_mean += spatial[m].matrix();
      ++n_pre;
    } else if (labels[m] == WindowLabel::post_onset) {
      out.post_mean += spatial[m].matrix();
      ++n_post;
    }
  }
  if (n_pre == 0 || n_post == 0) throw Error(ErrorCode::invalid_argument, "pre-onset and post-onset groups must be nonempty");
  out.pre_mean /= static_cast<double>(n_pre);
  out.post_mean /= static_cast<double>(n_post);
  out.difference = out.post_mean - out.pre_mean;
  return out;
}

MethodComparison compare_methods(const std::vector<RecordingMetrics>& a, const std::vector<RecordingMetrics>& b) {
  std::map<std::string, const ClassMetrics*> by_id;
  for (const auto& r : b) {
    if (!by_id.emplace(r.recording, &r.metrics).second) {
      throw Error(ErrorCode::invalid_argument, "recording '" + r.recording + "' appears twice in method B");
    }
  }
  if (a.size() != b.size()) {
    throw Error(ErrorCode::invalid_argument, "methods cover different recordings (" + std::to_string(a.size()) +
                                                 " vs " + std::to_string(b.size()) + ")");
  }
  std::vector<std::pair<std::string, std::pair<ClassMetrics, ClassMetrics>>> pairs;
  for (const auto& r : a) {
    const auto it = by_id.find(r.recording);
    if (it == by_id.end()) throw Error(ErrorCode::invalid_argument, "recording '" + r.recording + "' has no pair");
    if (!it->second) throw Error(ErrorCode::invalid_argument, "recording '" + r.recording + "' appears twice");
    pairs.push_back({r.recording, {r.metrics, *it->second}});
    it->second = nullptr;
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  if (pairs.size() < 5) {
    throw Error(ErrorCode::insufficient_data,
                "method comparison needs at least 5 paired recordings, found " + std::to_string(pairs.size()));
  }
  MethodComparison out;
  std::vector<double> a0, b0, a1, b1, at, bt;
  for (const auto& [id, m] : pairs) {
    out.recordings.push_back(id);
    a0.push_back(m.first.class0_accuracy);
    b0.push_back(m.second.class0_accuracy);
    a1.push_back(m.first.class1_accuracy);
    b1.push_back(m.second.class1_accuracy);
    at.push_back(m.first.total_accuracy);
    bt.push_back(m.second.total_accuracy);
  }
  out.class0 = wilcoxon_signed_rank(a0, b0);
  out.class1 = wilcoxon_signed_rank(a1, b1);
  out.total = wilcoxon_signed_rank(at, bt);
  return out;
}

std::vector<double> normalized_histogram(const std::vector<double>& values, std::size_t bins) {
  std::vector<double> h(bins, 0.0);
  if (values.empty() || bins == 0) return h;
  for (double v : values) {
    const double c = std::clamp(v, 0.0, 1.0);
    const auto idx = std::min(bins - 1, static_cast<std::size_t>(c * static_cast<double>(bins)));
    h[idx] += 1.0;
  }
  for (double& x : h) x /= static_cast<double>(values.size());
  return h;
}

void write_scores_csv(const std::filesystem::path& path, const std::vector<ElectrodeScore>& scores) {
  std::vector<csv::Row> rows{{"rank", "channel", "score", "predicted_soz", "true_soz"}};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    rows.push_back({std::to_string(i + 1), scores[i].channel, csv::format_double(scores[i].score),
                    scores[i].predicted_soz ? "1" : "0", scores[i].true_soz ? "1" : "0"});
  }
  csv::write_rows(path, rows);
}

void write_dominance_csv(const std::filesystem::path& path, const std::vector<WindowDominance>& rows_in) {
  std::vector<csv::Row> rows{{"window", "label", "soz_ratio", "nonsoz_ratio"}};
  for (const auto& r : rows_in) {
    rows.push_back({std::to_string(r.window + 1), window_label_name(r.label), csv::format_double(r.soz_ratio),
                    csv::format_double(r.nonsoz_ratio)});
  }
  csv::write_rows(path, rows);
}

void write_regime_contrast_csv(const std::filesystem::path& path, const RegimeContrast& rc) {
  csv::write_rows(path, {{"within_mean", "across_mean"},
                         {csv::format_double(rc.within_mean), csv::format_double(rc.across_mean)}});
}

void write_temporal_adjacency_csv(const std::filesystem::path& path, const GraphLaplacian& temporal,
                                  const std::vector<WindowLabel>& labels) {
  const std::size_t m = temporal.n_nodes();
  std::vector<csv::Row> rows{{"window_i", "window_j", "label_i", "label_j", "weight"}};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      rows.push_back({std::to_string(i + 1), std::to_string(j + 1),
                      i < labels.size() ? window_label_name(labels[i]) : "",
                      j < labels.size() ? window_label_name(labels[j]) : "",
                      csv::format_double(-temporal.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))});
    }
  }
  csv::write_rows(path, rows);
}

void write_difference_edges_csv(const std::filesystem::path& path, const MeanGraphContrast& contrast,
                                const std::vector<std::string>& channels) {
  const auto n = static_cast<std::size_t>(contrast.difference.rows());
  const auto names = default_names(n, channels);
  struct Edge {
    std::size_t i, j;
    double pre, post, diff;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      // Edge weights are the negated off-diagonal entries.
      edges.push_back({i, j, -contrast.pre_mean(ii, jj), -contrast.post_mean(ii, jj), -contrast.difference(ii, jj)});
    }
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& a, const Edge& b) { return std::abs(a.diff) > std::abs(b.diff); });
  std::vector<csv::Row> rows{{"i", "j", "channel_i", "channel_j", "pre_weight", "post_weight", "difference"}};
  for (const auto& e : edges) {
    rows.push_back({std::to_string(e.i), std::to_string(e.j), names[e.i], names[e.j], csv::format_double(e.pre),
                    csv::format_double(e.post), csv::format_double(e.diff)});
  }
  csv::write_rows(path, rows);
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<RecordingMetrics>& rows_in) {
  std::vector<csv::Row> rows{{"recording", "class0_accuracy", "class1_accuracy", "total_accuracy", "n0", "n1"}};
  for (const auto& r : rows_in) {
    rows.push_back({r.recording, csv::format_double(r.metrics.class0_accuracy),
                    csv::format_double(r.metrics.class1_accuracy), csv::format_double(r.metrics.total_accuracy),
                    std::to_string(r.metrics.n0), std::to_string(r.metrics.n1)});
  }
  csv::write_rows(path, rows);
}

std::vector<RecordingMetrics> read_metrics_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_rows(path);
  if (rows.empty() || rows[0].size() != 6 || csv::trim(rows[0][0]) != "recording") {
    throw Error(ErrorCode::parse, path.string() + ": not a metrics table");
  }
  std::vector<RecordingMetrics> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 6) throw Error(ErrorCode::parse, path.string() + ": malformed metrics row");
    RecordingMetrics m;
    m.recording = csv::trim(rows[r][0]);
    m.metrics.class0_accuracy = csv::parse_double(rows[r][1]);
    m.metrics.class1_accuracy = csv::parse_double(rows[r][2]);
    m.metrics.total_accuracy = csv::parse_double(rows[r][3]);
    m.metrics.n0 = static_cast<std::size_t>(csv::parse_int(rows[r][4]));
    m.metrics.n1 = static_cast<std::size_t>(csv::parse_int(rows[r][5]));
    out.push_back(std::move(m));
  }
  return out;
}

void write_comparison_table_csv(const std::filesystem::path& path, const std::vector<RecordingMetrics>& a,
                                const std::vector<RecordingMetrics>& b, const MethodComparison& cmp) {
  std::map<std::string, ClassMetrics> ma, mb;
  for (const auto& r : a) ma[r.recording] = r.metrics;
  for (const auto& r : b) mb[r.recording] = r.metrics;
  std::vector<csv::Row> rows{{"recording", "class0_a", "class0_b", "class1_a", "class1_b", "total_a", "total_b"}};
  std::vector<std::vector<double>> cols(6);
  for (const auto& id : cmp.recordings) {
    const auto& x = ma.at(id);
    const auto& y = mb.at(id);
    const double v[6] = {x.class0_accuracy, y.class0_accuracy, x.class1_accuracy,
                         y.class1_accuracy, x.total_accuracy, y.total_accuracy};
    csv::Row row{id};
    for (int k = 0; k < 6; ++k) {
      row.push_back(csv::format_double(v[k]));
      cols[static_cast<std::size_t>(k)].push_back(v[k]);
    }
    rows.push_back(std::move(row));
  }
  csv::Row mean_row{"mean"}, std_row{"std"};
  for (const auto& c : cols) {
    mean_row.push_back(csv::format_double(mean(c)));
    std_row.push_back(csv::format_double(stddev(c)));
  }
  rows.push_back(std::move(mean_row));
  rows.push_back(std::move(std_row));
  rows.push_back({"p_value", csv::format_double(cmp.class0.p_value), "", csv::format_double(cmp.class1.p_value), "",
                  csv::format_double(cmp.total.p_value), ""});
  csv::write_rows(path, rows);
}

void write_histogram_csv(const std::filesystem::path& path, const std::vector<RecordingMetrics>& a,
                         const std::vector<RecordingMetrics>& b, std::size_t bins) {
  std::vector<csv::Row> rows{{"method", "class", "bin_low", "bin_high", "mass"}};
  auto emit = [&](const char* method, const std::vector<RecordingMetrics>& src) {
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<double> v;
      for (const auto& r : src) v.push_back(cls == 0 ? r.metrics.class0_accuracy : r.metrics.class1_accuracy);
      const auto h = normalized_histogram(v, bins);
      for (std::size_t k = 0; k < bins; ++k) {
        rows.push_back({method, std::to_string(cls), csv::format_double(static_cast<double>(k) / static_cast<double>(bins)),
                        csv::format_double(static_cast<double>(k + 1) / static_cast<double>(bins)), csv::format_double(h[k])});
      }
    }
  };
  emit("a", a);
  emit("b", b);
  csv::write_rows(path, rows);
}

}  // namespace stg
