#include <doctest.h>

#include <algorithm>

#include "stg/csv.hpp"
#include "stg/error.hpp"
#include "stg/laplacian_io.hpp"
#include "stg/synth.hpp"
#include "test_util.hpp"

using namespace stg;

TEST_CASE("default spec shape") {
  const SynthSpec spec = default_synth_spec(4);
  CHECK(spec.n_nodes == 10);
  CHECK(spec.m_windows == 13);
  CHECK(spec.samples_per_window == 128);
  CHECK(spec.noise_std == 0.1);
  CHECK(spec.community.size() == 3);
  REQUIRE(spec.regimes.size() == 2);
  CHECK(spec.regimes[0].last_window == 2);
  CHECK(spec.regimes[1].first_window == 3);
  CHECK_FALSE(spec.regimes[0].community_active);
  CHECK(spec.regimes[1].community_active);
}

TEST_CASE("random graphs sit on the trace simplex and keep the forced clique") {
  const EdgeWeightVector g = random_graph(8, 0.1, 5, {1, 4, 6});
  CHECK(g.trace_feasible());
  CHECK(g.weight(1, 4) > 0.0);
  CHECK(g.weight(4, 6) > 0.0);
  CHECK(g.weight(1, 6) > 0.0);
  CHECK(random_graph(8, 0.1, 5, {1, 4, 6}).weights() == g.weights());
}

TEST_CASE("boost raises the community share of weight") {
  const EdgeWeightVector g = random_graph(6, 1.0, 2, {0, 1, 2});
  const EdgeWeightVector b = boost_community(g, {0, 1, 2}, 3.0);
  CHECK(b.trace_feasible());
  auto inside = [](const EdgeWeightVector& w) { return w.weight(0, 1) + w.weight(0, 2) + w.weight(1, 2); };
  CHECK(inside(b) / b.sum() > inside(g) / g.sum());
  CHECK(b.weight(0, 1) / b.weight(3, 4) == doctest::Approx(3.0 * g.weight(0, 1) / g.weight(3, 4)));
}

TEST_CASE("generation is deterministic and labelled") {
  const SynthSpec spec = default_synth_spec(9);
  const SynthOutput a = generate(spec);
  const SynthOutput b = generate(spec);
  REQUIRE(a.recording.windows.size() == 13);
  for (std::size_t m = 0; m < 13; ++m) CHECK(a.recording.windows[m].values() == b.recording.windows[m].values());
  CHECK(a.recording.labels[2] == WindowLabel::pre_onset);
  CHECK(a.recording.labels[3] == WindowLabel::onset);
  CHECK(a.recording.labels[12] == WindowLabel::post_onset);
  CHECK(a.recording.window_samples() == 128);
  CHECK(std::count(a.soz_mask.begin(), a.soz_mask.end(), true) == 3);
  CHECK(generate(default_synth_spec(10)).recording.windows[0].values() != a.recording.windows[0].values());
}

TEST_CASE("sample covariance follows the generating precision") {
  // With many samples and no noise, smooth pairs under the generating graph
  // are closer than the others on average.
  SynthParams p;
  p.samples_per_window = 4000;
  p.m_windows = 2;
  p.n_pre = 1;
  p.regime_starts = {0};
  p.active_regimes = {};
  p.noise_std = 0.0;
  p.seed = 3;
  const SynthSpec spec = build_synth_spec(p);
  const SynthOutput out = generate(spec);
  const Vector z = pairwise_sq_distances(out.recording.windows[0]);
  const Vector& w = spec.regimes[0].graph.weights();
  double on = 0.0, off = 0.0;
  int n_on = 0, n_off = 0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (w[k] > 0.0) {
      on += z[k];
      ++n_on;
    } else {
      off += z[k];
      ++n_off;
    }
  }
  REQUIRE(n_on > 0);
  REQUIRE(n_off > 0);
  CHECK(on / n_on < off / n_off);
}

TEST_CASE("spec validation") {
  SynthSpec spec = default_synth_spec(1);
  spec.boost = 0.5;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = default_synth_spec(1);
  spec.regimes[1].first_window = 4;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = default_synth_spec(1);
  spec.community = {0, 0, 1};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = default_synth_spec(1);
  spec.community_ar = 1.0;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("params file uses 1-based ranges") {
  const auto kv = KeyValueFile::parse(
      "n_nodes = 6\nm_windows = 5\nn_pre = 1\nregimes = 1-1, 2-3, 4-5\nactive_regimes = 2, 3\n"
      "community = 0, 2\nboost = 2\nseed = 77\n");
  const SynthParams p = SynthParams::from_file(kv);
  CHECK(p.regime_starts == std::vector<std::size_t>{0, 1, 3});
  CHECK(p.active_regimes == std::vector<std::size_t>{1, 2});
  CHECK(p.community == std::vector<std::size_t>{0, 2});
  CHECK(p.seed == 77);
  const SynthSpec spec = build_synth_spec(p);
  CHECK(spec.regimes.size() == 3);
  CHECK(spec.regimes[2].last_window == 4);
  CHECK_THROWS_AS(SynthParams::from_file(KeyValueFile::parse("m_windows = 5\nregimes = 1-2, 4-5\n")), Error);
}

TEST_CASE("written output reloads as the same recording") {
  testutil::TempDir dir("synth");
  const SynthSpec spec = default_synth_spec(2);
  const SynthOutput out = generate(spec);
  write_synth_output(dir.path(), out, spec);
  for (const char* f : {"recording.csv", "recording.bin", "recording.channels", "annotations.txt", "truth.txt",
                        "truth_regime_1.csv", "truth_regime_2.csv"})
    CHECK(std::filesystem::exists(dir / f));

  const Recording r = load_recording(dir / "recording.csv", RecordingFormat::csv, dir / "annotations.txt");
  CHECK(r.samples == to_recording(out, spec).samples);
  CHECK(r.soz_labels == out.soz_mask);
  CHECK(r.onset_sample == 3 * 128);
  WindowConfig wc;
  wc.overlap_fraction = 0.0;
  const WindowedRecording wr = make_windows(r, wc);
  REQUIRE(wr.windows.size() == 13);
  for (std::size_t m = 0; m < 13; ++m) CHECK(wr.windows[m].values() == out.recording.windows[m].values());

  const EdgeWeightVector truth = read_edge_list_csv(dir / "truth_regime_2.csv");
  CHECK(truth.weights().isApprox(boost_community(spec.regimes[1].graph, spec.community, spec.boost).weights()));
}

TEST_CASE("samples are smoother on the generating graph than on random graphs") {
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    SynthParams p;
    p.noise_std = 0.0;
    p.shared_base = true;
    p.active_regimes = {};
    p.seed = derive_seed(31, trial);
    const SynthSpec spec = build_synth_spec(p);
    const SynthOutput out = generate(spec);
    Matrix all(static_cast<Eigen::Index>(spec.n_nodes), 0);
    for (const auto& w : out.recording.windows) {
      all.conservativeResize(Eigen::NoChange, all.cols() + w.n_samples());
      all.rightCols(w.n_samples()) = w.values();
    }
    const SignalMatrix x(all);
    const double truth = smoothness(x, laplacian_from_weights(spec.regimes[0].graph));
    Rng rng(derive_seed(32, trial));
    double best_random = 1e300;
    for (int k = 0; k < 100; ++k)
      best_random = std::min(best_random, smoothness(x, laplacian_from_weights(testutil::random_weights(spec.n_nodes, rng))));
    CHECK(truth < best_random);
  }
}

TEST_CASE("boost 1 leaves nothing to recover") {
  SynthParams p;
  p.boost = 1.0;
  p.shared_base = true;
  p.seed = 12;
  const SynthSpec spec = build_synth_spec(p);
  const SynthOutput out = generate(spec);
  // Without boost both regimes share one generating graph.
  CHECK(out.window_graphs.front().weights() == out.window_graphs.back().weights());
  CHECK(std::count(out.soz_mask.begin(), out.soz_mask.end(), true) == 3);
}

TEST_CASE("empirical covariance matches the ridged inverse Laplacian") {
  SynthParams p;
  p.n_nodes = 4;
  p.m_windows = 2;
  p.n_pre = 1;
  p.samples_per_window = 50000;
  p.regime_starts = {0};
  p.active_regimes = {};
  p.community_size = 2;
  p.noise_std = 0.0;
  p.seed = 8;
  const SynthSpec spec = build_synth_spec(p);
  const SynthOutput out = generate(spec);
  Matrix all(4, 100000);
  all << out.recording.windows[0].values(), out.recording.windows[1].values();
  const Matrix emp = all * all.transpose() / static_cast<double>(all.cols());
  const Matrix truth = (laplacian_from_weights(spec.regimes[0].graph).matrix() + 1e-2 * Matrix::Identity(4, 4)).inverse();
  CHECK((emp - truth).norm() / truth.norm() < 0.05);
}

TEST_CASE("distinct regimes have distinct graphs") {
  const SynthSpec spec = default_synth_spec(6);
  const Vector a = vec_laplacian(laplacian_from_weights(spec.regimes[0].graph));
  const Vector b = vec_laplacian(laplacian_from_weights(boost_community(spec.regimes[1].graph, spec.community, spec.boost)));
  CHECK((a - b).norm() > 0.0);
}
