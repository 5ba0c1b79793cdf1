#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "stg/analysis.hpp"
#include "stg/cli.hpp"
#include "stg/csv.hpp"
#include "stg/signal_io.hpp"
#include "test_util.hpp"

using namespace stg;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "stgraph");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> synth_learn_args(const fs::path& syn, const fs::path& out) {
  return {"--quiet", "--out", out.string(), "learn", "--recording", (syn / "recording.csv").string(),
          "--annotations", (syn / "annotations.txt").string(), "--overlap", "0", "--no-preprocess"};
}

}  // namespace

TEST_CASE("help documents exit codes") {
  const Run r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("Exit codes") != std::string::npos);
  CHECK(r.out.find("solver") != std::string::npos);
}

TEST_CASE("usage errors exit 1 with one line") {
  const Run r = run({"--out", "x", "frobnicate"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.rfind("error: usage:", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  CHECK(run({"learn"}).code == cli::kExitUsage);
}

TEST_CASE("missing input is an io error") {
  testutil::TempDir dir("cli_io");
  const Run r = run({"--out", (dir / "o").string(), "learn", "--recording", (dir / "nope.csv").string(),
                     "--annotations", (dir / "nope.txt").string()});
  CHECK(r.code == cli::kExitIo);
  CHECK(r.err.rfind("error: io:", 0) == 0);
}

TEST_CASE("windowing failure is a validation error") {
  testutil::TempDir dir("cli_val");
  REQUIRE(run({"--quiet", "--out", (dir / "syn").string(), "synth"}).code == 0);
  auto args = synth_learn_args(dir / "syn", dir / "learn");
  args.push_back("--n-pre");
  args.push_back("20");
  const Run r = run(args);
  CHECK(r.code == cli::kExitValidation);
  CHECK(r.err.rfind("error: validation: windowing:", 0) == 0);
}

TEST_CASE("synth, learn and analyze end to end") {
  testutil::TempDir dir("cli_e2e");
  REQUIRE(run({"--quiet", "--seed", "5", "--out", (dir / "syn").string(), "synth"}).code == 0);
  REQUIRE(run(synth_learn_args(dir / "syn", dir / "learn")).code == 0);
  CHECK(fs::exists(dir / "learn" / "spatial_0013.csv"));
  CHECK(fs::exists(dir / "learn" / "windows.csv"));
  const Run a = run({"--quiet", "--out", (dir / "an").string(), "analyze", "--learn", (dir / "learn").string(),
                     "--annotations", (dir / "syn" / "annotations.txt").string()});
  REQUIRE(a.code == 0);
  for (const char* f : {"scores.csv", "dominance.csv", "regime_contrast.csv", "temporal_adjacency.csv",
                        "mean_graph_diff.csv", "metrics.csv", "manifest.json"})
    CHECK(fs::exists(dir / "an" / f));
  const auto rc = csv::read_rows(dir / "an" / "regime_contrast.csv");
  REQUIRE(rc.size() == 2);
  CHECK(csv::parse_double(rc[1][0]) > csv::parse_double(rc[1][1]));

  const auto manifest = nlohmann::json::parse(csv::read_text(dir / "learn" / "manifest.json"));
  CHECK(manifest["command"] == "learn");
  CHECK(manifest["parameters"]["beta"] == 0.5);
  CHECK(manifest["inputs_fnv1a"].contains("recording"));
  CHECK(manifest["timings_seconds"].contains("total"));
}

TEST_CASE("single window learns with an empty temporal graph") {
  testutil::TempDir dir("cli_m1");
  REQUIRE(run({"--quiet", "--out", (dir / "syn").string(), "synth"}).code == 0);
  auto args = synth_learn_args(dir / "syn", dir / "learn");
  for (const char* a : {"--n-pre", "0", "--n-post", "0"}) args.push_back(a);
  REQUIRE(run(args).code == 0);
  CHECK(fs::exists(dir / "learn" / "spatial_0001.csv"));
  CHECK_FALSE(fs::exists(dir / "learn" / "spatial_0002.csv"));
  const auto t = csv::read_rows(dir / "learn" / "temporal.csv");
  REQUIRE(t.size() == 2);
  CHECK(csv::parse_double(t[1][1]) == 0.0);
}

TEST_CASE("config file values apply and flags override them") {
  testutil::TempDir dir("cli_cfg");
  REQUIRE(run({"--quiet", "--out", (dir / "syn").string(), "synth"}).code == 0);
  csv::write_text(dir / "cfg.ini", "[learn]\nbeta = 2.0\nmax-outer-iter = 3\n");
  auto args = synth_learn_args(dir / "syn", dir / "a");
  args.insert(args.begin(), {"--config", (dir / "cfg.ini").string()});
  REQUIRE(run(args).code == 0);
  auto m = nlohmann::json::parse(csv::read_text(dir / "a" / "manifest.json"));
  CHECK(m["parameters"]["beta"] == 2.0);
  CHECK(m["parameters"]["max_outer_iter"] == 3);

  args = synth_learn_args(dir / "syn", dir / "b");
  args.insert(args.begin(), {"--config", (dir / "cfg.ini").string()});
  args.push_back("--beta");
  args.push_back("0.25");
  REQUIRE(run(args).code == 0);
  m = nlohmann::json::parse(csv::read_text(dir / "b" / "manifest.json"));
  CHECK(m["parameters"]["beta"] == 0.25);
  CHECK(m["parameters"]["max_outer_iter"] == 3);
}

TEST_CASE("baseline writes features, predictions and metrics") {
  testutil::TempDir dir("cli_base");
  csv::write_text(dir / "spec.txt", "n_nodes = 12\ncommunity_size = 5\ncommunity_ar = 0.9\n");
  REQUIRE(run({"--quiet", "--out", (dir / "syn").string(), "synth", "--spec", (dir / "spec.txt").string()}).code == 0);
  const Run r = run({"--quiet", "--out", (dir / "base").string(), "baseline", "--recording",
                     (dir / "syn" / "recording.bin").string(), "--annotations",
                     (dir / "syn" / "annotations.txt").string(), "--overlap", "0", "--no-preprocess", "--folds", "3"});
  REQUIRE(r.code == 0);
  const auto pred = csv::read_rows(dir / "base" / "predictions.csv");
  CHECK(pred.size() == 13);
  const auto metrics = read_metrics_csv(dir / "base" / "metrics.csv");
  REQUIRE(metrics.size() == 1);
  CHECK(metrics[0].recording == "syn");
  CHECK(metrics[0].metrics.n1 == 5);
  CHECK(fs::exists(dir / "base" / "features.csv"));
}

TEST_CASE("compare of identical metrics gives p = 1") {
  testutil::TempDir dir("cli_cmp");
  std::vector<RecordingMetrics> rows;
  for (int i = 0; i < 6; ++i) rows.push_back({"r" + std::to_string(i), {0.5 + 0.05 * i, 0.6, 0.55, 7, 3}});
  write_metrics_csv(dir / "a.csv", rows);
  write_metrics_csv(dir / "b.csv", rows);
  const Run r = run({"--quiet", "--out", (dir / "cmp").string(), "compare", "--a", (dir / "a.csv").string(), "--b",
                     (dir / "b.csv").string()});
  REQUIRE(r.code == 0);
  const auto table = csv::read_rows(dir / "cmp" / "comparison.csv");
  bool saw_p = false;
  for (const auto& row : table) {
    if (row[0] != "p_value") continue;
    saw_p = true;
    for (std::size_t k = 1; k < row.size(); ++k)
      if (!row[k].empty()) CHECK(csv::parse_double(row[k]) == 1.0);
  }
  CHECK(saw_p);
  CHECK(fs::exists(dir / "cmp" / "histogram.csv"));

  write_metrics_csv(dir / "short.csv", {rows[0], rows[1]});
  const Run bad = run({"--out", (dir / "cmp2").string(), "compare", "--a", (dir / "short.csv").string(), "--b",
                       (dir / "short.csv").string()});
  CHECK(bad.code == cli::kExitValidation);
}

TEST_CASE("reruns produce byte-identical data files") {
  testutil::TempDir dir("cli_det");
  for (const char* run_id : {"1", "2"}) {
    const fs::path base = dir / run_id;
    REQUIRE(run({"--quiet", "--seed", "11", "--out", (base / "syn").string(), "synth"}).code == 0);
    REQUIRE(run(synth_learn_args(base / "syn", base / "learn")).code == 0);
    REQUIRE(run({"--quiet", "--out", (base / "an").string(), "analyze", "--learn", (base / "learn").string(),
                 "--annotations", (base / "syn" / "annotations.txt").string()})
                .code == 0);
  }
  for (const char* sub : {"syn", "learn", "an"}) {
    for (const auto& e : fs::directory_iterator(dir / "1" / sub)) {
      if (e.path().extension() != ".csv") continue;
      const fs::path twin = dir / "2" / sub / e.path().filename();
      CHECK_MESSAGE(csv::read_text(e.path()) == csv::read_text(twin), e.path().string());
    }
  }
}
