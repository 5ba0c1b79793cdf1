#include "stg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "stg/csv.hpp"
#include "stg/error.hpp"
#include "stg/laplacian_io.hpp"
#include "stg/rng.hpp"

namespace stg {

namespace {

std::vector<std::size_t> parse_index_list(const std::vector<std::string>& items) {
  std::vector<std::size_t> out;
  for (const auto& s : items) {
    const long long v = csv::parse_int(s);
    if (v < 0) throw Error(ErrorCode::parse, "negative index in list");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string channel_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ch%02zu", i + 1);
  return buf;
}

EdgeWeightVector normalized(std::size_t n, Vector w) {
  const double s = w.sum();
  if (s > 0.0) w *= 0.5 * static_cast<double>(n) / s;
  return EdgeWeightVector(n, std::move(w));
}

}  // namespace

void SynthSpec::validate() const {
  if (n_nodes < 2 || m_windows < 1 || samples_per_window < 2) {
    throw Error(ErrorCode::invalid_argument, "synth spec needs n_nodes >= 2, m_windows >= 1, samples >= 2");
  }
  if (n_pre >= m_windows) throw Error(ErrorCode::invalid_argument, "n_pre must leave room for the onset window");
  if (!(boost >= 1.0)) throw Error(ErrorCode::invalid_argument, "boost factor must be >= 1");
  if (!(noise_std >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise_std must be >= 0");
  if (!(community_ar >= 0.0 && community_ar < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "community_ar must lie in [0, 1)");
  }
  for (std::size_t c : community)
    if (c >= n_nodes) throw Error(ErrorCode::invalid_argument, "community node out of range");
  if (std::set<std::size_t>(community.begin(), community.end()).size() != community.size()) {
    throw Error(ErrorCode::invalid_argument, "community nodes repeat");
  }
  std::vector<int> covered(m_windows, 0);
  for (const auto& r : regimes) {
    if (r.first_window > r.last_window || r.last_window >= m_windows) {
      throw Error(ErrorCode::invalid_argument, "regime window range is out of bounds");
    }
    if (r.graph.n_nodes() != n_nodes) throw Error(ErrorCode::invalid_argument, "regime graph has the wrong size");
    for (std::size_t m = r.first_window; m <= r.last_window; ++m) ++covered[m];
  }
  if (std::any_of(covered.begin(), covered.end(), [](int c) { return c != 1; })) {
    throw Error(ErrorCode::invalid_argument, "regime ranges do not partition the windows");
  }
}

SynthParams SynthParams::from_file(const KeyValueFile& kv) {
  SynthParams p;
  p.n_nodes = static_cast<std::size_t>(kv.get_int("n_nodes", static_cast<long long>(p.n_nodes)));
  p.m_windows = static_cast<std::size_t>(kv.get_int("m_windows", static_cast<long long>(p.m_windows)));
  p.samples_per_window =
      static_cast<std::size_t>(kv.get_int("samples_per_window", static_cast<long long>(p.samples_per_window)));
  p.n_pre = static_cast<std::size_t>(kv.get_int("n_pre", static_cast<long long>(p.n_pre)));
  if (kv.has("regimes")) {
    p.regime_starts.clear();
    std::size_t expected = 1;
    for (const auto& range : kv.get_list("regimes")) {
      const auto parts = csv::split(range, '-');
      if (parts.size() != 2) throw Error(ErrorCode::parse, "regime range must look like 'a-b'");
      const auto lo = static_cast<std::size_t>(csv::parse_int(parts[0]));
      const auto hi = static_cast<std::size_t>(csv::parse_int(parts[1]));
      if (lo != expected || hi < lo) throw Error(ErrorCode::parse, "regime ranges must be contiguous from window 1");
      p.regime_starts.push_back(lo - 1);
      expected = hi + 1;
    }
    if (expected != p.m_windows + 1) throw Error(ErrorCode::parse, "regime ranges must end at m_windows");
  }
  if (kv.has("active_regimes")) {
    p.active_regimes.clear();
    for (std::size_t r : parse_index_list(kv.get_list("active_regimes"))) {
      if (r == 0) throw Error(ErrorCode::parse, "active_regimes are 1-based");
      p.active_regimes.push_back(r - 1);
    }
  }
  p.edge_probability = kv.get_double("edge_probability", p.edge_probability);
  if (kv.has("community")) p.community = parse_index_list(kv.get_list("community"));
  p.community_size = static_cast<std::size_t>(kv.get_int("community_size", static_cast<long long>(p.community_size)));
  p.boost = kv.get_double("boost", p.boost);
  p.noise_std = kv.get_double("noise_std", p.noise_std);
  p.shared_base = kv.get_bool("shared_base", p.shared_base);
  p.community_ar = kv.get_double("community_ar", p.community_ar);
  p.sample_rate = kv.get_double("sample_rate", p.sample_rate);
  p.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(p.seed)));
  return p;
}

EdgeWeightVector random_graph(std::size_t n_nodes, double edge_probability, std::uint64_t seed,
                              const std::vector<std::size_t>& forced_clique) {
  Rng rng(seed);
  std::vector<bool> forced(n_nodes, false);
  for (std::size_t c : forced_clique) forced.at(c) = true;
  Vector w = Vector::Zero(static_cast<Eigen::Index>(edge_count(n_nodes)));
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (std::size_t j = i + 1; j < n_nodes; ++j, ++k) {
      const bool present = rng.uniform() < edge_probability;
      const double weight = rng.uniform(0.5, 1.5);
      if (present || (forced[i] && forced[j])) w[static_cast<Eigen::Index>(k)] = weight;
    }
  }
  return normalized(n_nodes, std::move(w));
}

EdgeWeightVector boost_community(const EdgeWeightVector& graph, const std::vector<std::size_t>& community,
                                 double boost) {
  const std::size_t n = graph.n_nodes();
  std::vector<bool> inside(n, false);
  for (std::size_t c : community) inside.at(c) = true;
  Vector w = graph.weights();
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++k)
      if (inside[i] && inside[j]) w[static_cast<Eigen::Index>(k)] *= boost;
  return normalized(n, std::move(w));
}

SynthSpec build_synth_spec(const SynthParams& p) {
  SynthSpec spec;
  spec.n_nodes = p.n_nodes;
  spec.m_windows = p.m_windows;
  spec.samples_per_window = p.samples_per_window;
  spec.n_pre = p.n_pre;
  spec.boost = p.boost;
  spec.noise_std = p.noise_std;
  spec.community_ar = p.community_ar;
  spec.sample_rate = p.sample_rate;
  spec.seed = p.seed;

  spec.community = p.community;
  if (spec.community.empty() && p.community_size > 0) {
    if (p.community_size > p.n_nodes) throw Error(ErrorCode::invalid_argument, "community larger than the graph");
    std::vector<std::size_t> nodes(p.n_nodes);
    std::iota(nodes.begin(), nodes.end(), 0);
    Rng rng(derive_seed(p.seed, 100));
    rng.shuffle(nodes);
    spec.community.assign(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(p.community_size));
    std::sort(spec.community.begin(), spec.community.end());
  }

  if (p.regime_starts.empty() || p.regime_starts.front() != 0) {
    throw Error(ErrorCode::invalid_argument, "regimes must start at window 0");
  }
  for (std::size_t r = 0; r < p.regime_starts.size(); ++r) {
    SynthRegime regime;
    regime.first_window = p.regime_starts[r];
    regime.last_window = r + 1 < p.regime_starts.size() ? p.regime_starts[r + 1] - 1 : p.m_windows - 1;
    const std::uint64_t graph_seed = derive_seed(p.seed, p.shared_base ? 200 : 200 + r);
    regime.graph = random_graph(p.n_nodes, p.edge_probability, graph_seed, spec.community);
    regime.community_active =
        std::find(p.active_regimes.begin(), p.active_regimes.end(), r) != p.active_regimes.end();
    spec.regimes.push_back(std::move(regime));
  }
  spec.validate();
  return spec;
}

SynthSpec default_synth_spec(std::uint64_t seed) {
  SynthParams p;
  p.seed = seed;
  return build_synth_spec(p);
}

SynthOutput generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_nodes;
  const auto ni = static_cast<Eigen::Index>(n);
  const auto k = static_cast<Eigen::Index>(spec.samples_per_window);

  SynthOutput out;
  out.soz_mask.assign(n, false);
  for (std::size_t c : spec.community) out.soz_mask[c] = true;
  out.window_graphs.resize(spec.m_windows);

  WindowedRecording& wr = out.recording;
  wr.window_length_ms = 1000.0 * static_cast<double>(spec.samples_per_window) / spec.sample_rate;
  wr.overlap_fraction = 0.0;
  for (std::size_t i = 0; i < n; ++i) wr.channel_names.push_back(channel_name(i));
  wr.soz_labels = out.soz_mask;

  Rng rng(derive_seed(spec.seed, 1));
  std::vector<Eigen::LLT<Matrix>> factors;
  std::vector<EdgeWeightVector> regime_graphs;
  for (const auto& r : spec.regimes) {
    EdgeWeightVector g = r.community_active && spec.boost != 1.0 && !spec.community.empty()
                             ? boost_community(r.graph, spec.community, spec.boost)
                             : r.graph;
    Matrix precision = laplacian_from_weights(g).matrix();
    precision.diagonal().array() += kSynthRidge;
    factors.emplace_back(precision);
    regime_graphs.push_back(std::move(g));
  }

  for (std::size_t m = 0; m < spec.m_windows; ++m) {
    std::size_t r = 0;
    while (!(spec.regimes[r].first_window <= m && m <= spec.regimes[r].last_window)) ++r;
    out.window_graphs[m] = regime_graphs[r];

    // With P = U^T U (U upper), x = U^-1 g has covariance P^-1.
    Matrix g(ni, k);
    for (Eigen::Index t = 0; t < k; ++t)
      for (Eigen::Index i = 0; i < ni; ++i) g(i, t) = rng.normal();
    Matrix x = factors[r].matrixU().solve(g);

    if (spec.community_ar > 0.0 && spec.regimes[r].community_active) {
      const double phi = spec.community_ar;
      const double gain = std::sqrt(1.0 - phi * phi);
      for (std::size_t c : spec.community) {
        const auto ci = static_cast<Eigen::Index>(c);
        for (Eigen::Index t = 1; t < k; ++t) x(ci, t) = phi * x(ci, t - 1) + gain * x(ci, t);
      }
    }
    if (spec.noise_std > 0.0) {
      for (Eigen::Index t = 0; t < k; ++t)
        for (Eigen::Index i = 0; i < ni; ++i) x(i, t) += spec.noise_std * rng.normal();
    }

    wr.windows.emplace_back(std::move(x));
    wr.labels.push_back(m < spec.n_pre ? WindowLabel::pre_onset
                                       : (m == spec.n_pre ? WindowLabel::onset : WindowLabel::post_onset));
    wr.window_starts.push_back(m * spec.samples_per_window);
  }
  return out;
}

Recording to_recording(const SynthOutput& out, const SynthSpec& spec) {
  const auto& wr = out.recording;
  Recording r;
  r.channel_names = wr.channel_names;
  r.sample_rate = spec.sample_rate;
  r.soz_labels = out.soz_mask;
  r.onset_sample = spec.n_pre * spec.samples_per_window;
  const auto k = static_cast<Eigen::Index>(spec.samples_per_window);
  r.samples.resize(static_cast<Eigen::Index>(spec.n_nodes), k * static_cast<Eigen::Index>(wr.windows.size()));
  for (std::size_t m = 0; m < wr.windows.size(); ++m)
    r.samples.middleCols(static_cast<Eigen::Index>(m) * k, k) = wr.windows[m].values();
  return r;
}

void write_synth_output(const std::filesystem::path& dir, const SynthOutput& out, const SynthSpec& spec) {
  std::filesystem::create_directories(dir);
  const Recording r = to_recording(out, spec);
  write_recording_csv(dir / "recording.csv", r);
  write_recording_binary(dir / "recording.bin", r);

  Annotations a;
  a.onset_sample = r.onset_sample;
  a.sample_rate = spec.sample_rate;
  for (std::size_t c : spec.community) a.soz_channels.push_back(r.channel_names[c]);
  a.save(dir / "annotations.txt");

  KeyValueFile truth;
  truth.set("n_nodes", std::to_string(spec.n_nodes));
  truth.set("m_windows", std::to_string(spec.m_windows));
  truth.set("samples_per_window", std::to_string(spec.samples_per_window));
  truth.set("seed", std::to_string(spec.seed));
  truth.set("boost", csv::format_double(spec.boost));
  std::string mask, community, ranges;
  for (std::size_t i = 0; i < out.soz_mask.size(); ++i) mask += (i ? "," : "") + std::string(out.soz_mask[i] ? "1" : "0");
  for (std::size_t i = 0; i < spec.community.size(); ++i) community += (i ? "," : "") + std::to_string(spec.community[i]);
  for (std::size_t k = 0; k < spec.regimes.size(); ++k) {
    const auto& reg = spec.regimes[k];
    ranges += (k ? "," : "") + std::to_string(reg.first_window + 1) + "-" + std::to_string(reg.last_window + 1);
    EdgeWeightVector g = reg.community_active && spec.boost != 1.0 && !spec.community.empty()
                             ? boost_community(reg.graph, spec.community, spec.boost)
                             : reg.graph;
    write_edge_list_csv(dir / ("truth_regime_" + std::to_string(k + 1) + ".csv"), g);
  }
  truth.set("soz_mask", mask);
  truth.set("community", community);
  truth.set("regimes", ranges);
  csv::write_text(dir / "truth.txt", truth.to_string());
}

}  // namespace stg
