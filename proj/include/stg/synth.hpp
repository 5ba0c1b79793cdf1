#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "stg/graph_core.hpp"
#include "stg/kv_file.hpp"
#include "stg/signal_io.hpp"

namespace stg {

// Ridge added to the generating Laplacian so the GMRF covariance exists.
constexpr double kSynthRidge = 1e-2;

struct SynthRegime {
  std::size_t first_window = 0;  // inclusive, 0-based
  std::size_t last_window = 0;   // inclusive
  EdgeWeightVector graph;        // base graph, before any community boost
  bool community_active = false;
};

struct SynthSpec {
  std::size_t n_nodes = 10;
  std::size_t m_windows = 13;
  std::size_t samples_per_window = 128;
  std::size_t n_pre = 3;  // windows before the onset window
  std::vector<SynthRegime> regimes;
  std::vector<std::size_t> community;
  double boost = 3.0;
  double noise_std = 0.1;
  // AR(1) coefficient applied along time to community channels in active
  // regimes; 0 leaves samples independent over time.
  double community_ar = 0.0;
  double sample_rate = 250.0;
  std::uint64_t seed = 1;

  /// Throws invalid_argument unless regimes partition the windows, boost >= 1
  /// and community nodes are in range.
  void validate() const;
};

/// Knobs for building a SynthSpec with random regime graphs.
struct SynthParams {
  std::size_t n_nodes = 10;
  std::size_t m_windows = 13;
  std::size_t samples_per_window = 128;
  std::size_t n_pre = 3;
  std::vector<std::size_t> regime_starts{0, 3};  // first window of each regime
  std::vector<std::size_t> active_regimes{1};    // regimes with the boosted community
  double edge_probability = 0.5;
  std::vector<std::size_t> community;  // empty: random subset of community_size nodes
  std::size_t community_size = 3;
  double boost = 3.0;
  double noise_std = 0.1;
  bool shared_base = false;  // all regimes share one base graph
  double community_ar = 0.0;
  double sample_rate = 250.0;
  std::uint64_t seed = 1;

  /// Keys mirror the field names; regimes are written 1-based, e.g.
  /// "regimes = 1-3, 4-13" and "active_regimes = 2".
  static SynthParams from_file(const KeyValueFile& kv);
};

/// Erdos-Renyi support, weights uniform in [0.5, 1.5], `forced` pairs always
/// present, scaled to sum n/2.
EdgeWeightVector random_graph(std::size_t n_nodes, double edge_probability, std::uint64_t seed,
                              const std::vector<std::size_t>& forced_clique = {});

/// Multiplies weights inside the community by `boost` and rescales to sum n/2.
EdgeWeightVector boost_community(const EdgeWeightVector& graph, const std::vector<std::size_t>& community,
                                 double boost);

SynthSpec build_synth_spec(const SynthParams& params);

/// The two-regime default: N=10, M=13, 128 samples per window, noise 0.1,
/// a 3-node community boosted 3x from the onset window on.
SynthSpec default_synth_spec(std::uint64_t seed);

struct SynthOutput {
  WindowedRecording recording;
  std::vector<EdgeWeightVector> window_graphs;  // generating graph per window
  std::vector<bool> soz_mask;
};

/// Each window draws samples_per_window columns from N(0, (L + ridge I)^-1)
/// of its regime graph, plus isotropic noise. Deterministic given the seed.
SynthOutput generate(const SynthSpec& spec);

/// Concatenates the (non-overlapping) windows into a continuous recording
/// with onset at n_pre * samples_per_window.
Recording to_recording(const SynthOutput& out, const SynthSpec& spec);

/// Writes recording.csv, recording.bin (+ .channels), annotations.txt,
/// truth_regime_<k>.csv edge lists and truth.txt.
void write_synth_output(const std::filesystem::path& dir, const SynthOutput& out, const SynthSpec& spec);

}  // namespace stg
