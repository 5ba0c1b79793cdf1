#include "stg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stg/analysis.hpp"
#include "stg/csv.hpp"
#include "stg/error.hpp"
#include "stg/hvg_baseline.hpp"
#include "stg/joint_learner.hpp"
#include "stg/signal_io.hpp"
#include "stg/synth.hpp"

#ifndef STG_VERSION
#define STG_VERSION "dev"
#endif

namespace stg::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string() + " for hashing");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// One per output directory; timings are the only nondeterministic content.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)), t0_(Clock::now()), started_(utc_now()) {}

  void param(const std::string& key, json value) { params_[key] = std::move(value); }

  void input(const std::string& role, const fs::path& path) {
    if (fs::is_directory(path)) {
      for (const auto& entry : sorted_files(path)) {
        inputs_[role + ":" + fs::relative(entry, path).generic_string()] = hex64(fnv1a_file(entry));
      }
    } else {
      inputs_[role] = hex64(fnv1a_file(path));
    }
  }

  void stage(const std::string& name, Clock::time_point since) { timings_[name] = seconds_since(since); }

  void write(const fs::path& dir) {
    json j;
    j["command"] = command_;
    j["version"] = STG_VERSION;
    j["parameters"] = params_;
    j["inputs_fnv1a"] = inputs_;
    j["started_utc"] = started_;
    timings_["total"] = seconds_since(t0_);
    j["timings_seconds"] = timings_;
    csv::write_text(dir / "manifest.json", j.dump(2) + "\n");
  }

 private:
  static std::vector<fs::path> sorted_files(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
  }

  std::string command_;
  Clock::time_point t0_;
  std::string started_;
  json params_ = json::object();
  json inputs_ = json::object();
  json timings_ = json::object();
};

struct Globals {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
  bool quiet = false;
};

struct SignalOptions {
  std::string recording;
  std::string annotations;
  std::string format = "auto";
  bool no_preprocess = false;
  PreprocessConfig pre;
  WindowConfig win;
  std::string recording_id;
};

struct LearnOptions {
  SignalOptions sig;
  JointConfig joint;
  std::string sweep = "gauss_seidel";
  bool normalize = false;
};

struct BaselineOptions {
  SignalOptions sig;
  BaselineConfig base;
  std::vector<std::size_t> hvg_windows;  // 1-based; empty = last pre, onset, first post
};

struct AnalyzeOptions {
  std::string learn_dir;
  std::string annotations;
  std::size_t top_k = 0;
  double top_fraction = 0.3;
  std::string score_mode = "weighted_degree";
  std::string dominance_norm = "group_size";
  std::string recording_id;
};

struct CompareOptions {
  std::vector<std::string> a;
  std::vector<std::string> b;
  std::size_t bins = 10;
};

void add_signal_options(CLI::App* cmd, SignalOptions& o) {
  cmd->add_option("--recording", o.recording, "Recording file (.csv or .bin)")->required();
  cmd->add_option("--annotations", o.annotations, "Annotation sidecar (onset_sample, soz, bad, sample_rate)")
      ->required();
  cmd->add_option("--format", o.format, "csv | binary | auto (by extension)")
      ->check(CLI::IsMember({"auto", "csv", "binary"}));
  cmd->add_flag("--no-preprocess", o.no_preprocess, "Skip notch, bandpass and decimation");
  cmd->add_option("--notch-hz", o.pre.notch_hz, "Notch frequency; <= 0 disables");
  cmd->add_option("--notch-q", o.pre.notch_q, "Notch quality factor");
  cmd->add_option("--band-low", o.pre.band_low_hz, "Bandpass lower edge (Hz)");
  cmd->add_option("--band-high", o.pre.band_high_hz, "Bandpass upper edge (Hz)");
  cmd->add_option("--target-rate", o.pre.target_rate, "Output rate; must divide the input rate");
  cmd->add_option("--window-ms", o.win.window_ms, "Window length (ms)");
  cmd->add_option("--overlap", o.win.overlap_fraction, "Window overlap fraction in [0, 1)");
  cmd->add_option("--n-pre", o.win.n_pre, "Windows before the onset window");
  cmd->add_option("--n-post", o.win.n_post, "Windows after the onset window");
  cmd->add_option("--recording-id", o.recording_id, "Row name in metrics tables (default: parent directory name)");
}

std::string default_recording_id(const fs::path& recording) {
  const fs::path parent = fs::absolute(recording).parent_path();
  const std::string name = parent.filename().string();
  return name.empty() ? recording.stem().string() : name;
}

void record_signal_params(Manifest& m, const SignalOptions& o) {
  m.param("recording", o.recording);
  m.param("annotations", o.annotations);
  m.param("format", o.format);
  m.param("preprocess", !o.no_preprocess);
  m.param("notch_hz", o.pre.notch_hz);
  m.param("notch_q", o.pre.notch_q);
  m.param("band_low_hz", o.pre.band_low_hz);
  m.param("band_high_hz", o.pre.band_high_hz);
  m.param("target_rate", o.pre.target_rate);
  m.param("window_ms", o.win.window_ms);
  m.param("overlap_fraction", o.win.overlap_fraction);
  m.param("n_pre", o.win.n_pre);
  m.param("n_post", o.win.n_post);
}

WindowedRecording load_windows(const SignalOptions& o, Manifest& m, std::ostream& log, bool quiet) {
  m.input("recording", o.recording);
  if (o.format != "csv" && fs::exists(channel_sidecar_path(o.recording))) {
    m.input("channels", channel_sidecar_path(o.recording));
  }
  m.input("annotations", o.annotations);
  const RecordingFormat fmt = o.format == "auto"  ? format_from_extension(o.recording)
                              : o.format == "csv" ? RecordingFormat::csv
                                                  : RecordingFormat::binary;
  auto t = Clock::now();
  Recording r = load_recording(o.recording, fmt, fs::path(o.annotations));
  m.stage("load", t);
  if (!o.no_preprocess) {
    t = Clock::now();
    r = preprocess(r, o.pre);
    m.stage("preprocess", t);
  }
  WindowedRecording wr = make_windows(r, o.win);
  if (!quiet) {
    log << "loaded " << r.n_channels() << " channels, " << wr.windows.size() << " windows of "
        << wr.window_samples() << " samples\n";
  }
  return wr;
}

void write_windows_csv(const fs::path& path, const WindowedRecording& wr) {
  std::vector<csv::Row> rows{{"window", "label", "start_sample"}};
  for (std::size_t m = 0; m < wr.windows.size(); ++m) {
    rows.push_back({std::to_string(m + 1), window_label_name(wr.labels[m]), std::to_string(wr.window_starts[m])});
  }
  csv::write_rows(path, rows);
}

std::vector<WindowLabel> read_windows_csv(const fs::path& path) {
  const auto rows = csv::read_rows(path);
  if (rows.empty() || rows[0].size() < 2 || rows[0][1] != "label") {
    throw Error(ErrorCode::parse, path.string() + ": expected header window,label,...");
  }
  std::vector<WindowLabel> labels;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 2) throw Error(ErrorCode::parse, path.string() + ": short row");
    labels.push_back(parse_window_label(rows[i][1]));
  }
  return labels;
}

std::vector<bool> soz_mask_for(const std::vector<std::string>& channels, const Annotations& a) {
  std::vector<bool> mask(channels.size(), false);
  for (const auto& name : a.soz_channels) {
    const auto it = std::find(channels.begin(), channels.end(), name);
    if (it == channels.end()) throw Error(ErrorCode::invalid_argument, "SOZ channel '" + name + "' not in the graphs");
    mask[static_cast<std::size_t>(it - channels.begin())] = true;
  }
  return mask;
}

int cmd_synth(const std::string& spec_path, bool seed_given, const Globals& g, Manifest& m, std::ostream& log) {
  SynthParams params;
  if (!spec_path.empty()) {
    m.input("spec", spec_path);
    params = SynthParams::from_file(KeyValueFile::load(spec_path));
  }
  if (seed_given || spec_path.empty()) params.seed = g.seed;
  auto t = Clock::now();
  const SynthSpec spec = build_synth_spec(params);
  const SynthOutput out = generate(spec);
  m.stage("generate", t);
  write_synth_output(g.out, out, spec);

  m.param("spec", spec_path);
  m.param("seed", params.seed);
  m.param("n_nodes", spec.n_nodes);
  m.param("m_windows", spec.m_windows);
  m.param("samples_per_window", spec.samples_per_window);
  m.param("n_pre", spec.n_pre);
  m.param("edge_probability", params.edge_probability);
  m.param("community", spec.community);
  m.param("boost", spec.boost);
  m.param("noise_std", spec.noise_std);
  m.param("community_ar", spec.community_ar);
  m.param("shared_base", params.shared_base);
  m.param("sample_rate", spec.sample_rate);
  if (!g.quiet) log << "synth: wrote " << spec.m_windows << " windows x " << spec.n_nodes << " channels\n";
  return kExitOk;
}

int cmd_learn(LearnOptions o, const Globals& g, Manifest& m, std::ostream& log) {
  record_signal_params(m, o.sig);
  o.joint.sweep = o.sweep == "jacobi" ? SweepMode::jacobi : SweepMode::gauss_seidel;
  o.joint.normalize_distances = o.normalize;
  o.joint.threads = g.threads;
  o.joint.validate();
  m.param("beta", o.joint.beta);
  m.param("max_outer_iter", o.joint.max_outer_iter);
  m.param("outer_rel_tol", o.joint.outer_rel_tol);
  m.param("solver_max_iter", o.joint.solver.max_iter);
  m.param("kkt_tol", o.joint.solver.kkt_tol);
  m.param("sweep", o.sweep);
  m.param("normalize_distances", o.normalize);
  m.param("threads", g.threads);

  const WindowedRecording wr = load_windows(o.sig, m, log, g.quiet);
  auto t = Clock::now();
  const JointResult res = learn_joint_graphs(wr.windows, o.joint);
  m.stage("learn", t);

  write_joint_result(g.out, res, o.joint, wr.channel_names);
  write_windows_csv(fs::path(g.out) / "windows.csv", wr);
  const std::string id = o.sig.recording_id.empty() ? default_recording_id(o.sig.recording) : o.sig.recording_id;
  csv::write_text(fs::path(g.out) / "recording_id.txt", id + "\n");
  m.param("recording_id", id);
  if (!g.quiet) {
    log << "learn: " << res.outer_iterations << " outer iterations, objective "
        << res.objective_trace.back() << (res.converged ? "" : " (not converged)") << "\n";
  }
  return kExitOk;
}

int cmd_baseline(const BaselineOptions& o, const Globals& g, Manifest& m, std::ostream& log) {
  record_signal_params(m, o.sig);
  BaselineConfig cfg = o.base;
  cfg.seed = g.seed;
  m.param("seed", g.seed);
  m.param("n_folds", cfg.n_folds);
  m.param("pca_components", cfg.pca_components);
  m.param("pca_variance", cfg.pca_variance);
  m.param("l2", cfg.logistic.l2);
  m.param("max_iter", cfg.logistic.max_iter);
  m.param("balance_classes", cfg.logistic.balance_classes);

  const WindowedRecording wr = load_windows(o.sig, m, log, g.quiet);
  std::array<std::size_t, 3> sel = default_hvg_windows(wr);
  if (!o.hvg_windows.empty()) {
    if (o.hvg_windows.size() != 3) throw Error(ErrorCode::invalid_argument, "--hvg-windows takes three indices");
    for (std::size_t i = 0; i < 3; ++i) {
      if (o.hvg_windows[i] == 0) throw Error(ErrorCode::invalid_argument, "--hvg-windows is 1-based");
      sel[i] = o.hvg_windows[i] - 1;
    }
  }
  m.param("hvg_windows", json::array({sel[0] + 1, sel[1] + 1, sel[2] + 1}));

  auto t = Clock::now();
  const FeatureMatrix f = hvg_features(wr, sel);
  const BaselinePredictions pred = run_baseline_cv(f, cfg);
  m.stage("baseline", t);

  const fs::path out(g.out);
  write_feature_matrix_csv(out / "features.csv", f, wr.channel_names);
  std::vector<csv::Row> rows{{"channel", "fold", "probability", "predicted", "true_soz"}};
  for (std::size_t i = 0; i < f.rows(); ++i) {
    rows.push_back({wr.channel_names[i], std::to_string(pred.fold[i] + 1),
                    csv::format_double(pred.probability[static_cast<Eigen::Index>(i)]),
                    pred.predicted[i] ? "1" : "0", f.labels[i] ? "1" : "0"});
  }
  csv::write_rows(out / "predictions.csv", rows);

  const std::string id = o.sig.recording_id.empty() ? default_recording_id(o.sig.recording) : o.sig.recording_id;
  m.param("recording_id", id);
  const RecordingMetrics rm{id, per_class_metrics(pred.predicted, f.labels)};
  write_metrics_csv(out / "metrics.csv", {rm});
  if (!g.quiet) log << "baseline: total accuracy " << rm.metrics.total_accuracy << "\n";
  return kExitOk;
}

int cmd_analyze(const AnalyzeOptions& o, const Globals& g, Manifest& m, std::ostream& log) {
  m.input("learn", o.learn_dir);
  m.input("annotations", o.annotations);
  const fs::path dir(o.learn_dir);
  std::vector<std::string> channels;
  const JointResult res = read_joint_result(dir, &channels);
  const std::vector<WindowLabel> labels = read_windows_csv(dir / "windows.csv");
  if (labels.size() != res.spatial.size()) {
    throw Error(ErrorCode::dimension_mismatch, "windows.csv does not match the number of spatial graphs");
  }
  const Annotations ann = Annotations::load(o.annotations);
  const std::vector<bool> soz = soz_mask_for(channels, ann);
  const ScoreMode mode = o.score_mode == "degree" ? ScoreMode::degree : ScoreMode::weighted_degree;
  const DominanceNorm norm = o.dominance_norm == "top_size" ? DominanceNorm::top_size : DominanceNorm::group_size;
  const std::size_t k =
      o.top_k > 0 ? o.top_k : static_cast<std::size_t>(std::count(soz.begin(), soz.end(), true));

  std::string id = o.recording_id;
  if (id.empty() && fs::exists(dir / "recording_id.txt")) id = csv::trim(csv::read_text(dir / "recording_id.txt"));
  if (id.empty()) id = fs::absolute(dir).filename().string();

  m.param("learn_dir", o.learn_dir);
  m.param("annotations", o.annotations);
  m.param("top_k", k);
  m.param("top_fraction", o.top_fraction);
  m.param("score_mode", o.score_mode);
  m.param("dominance_norm", o.dominance_norm);
  m.param("recording_id", id);

  const fs::path out(g.out);
  const auto scores = classify_topk(score_electrodes(res.spatial, labels, channels, soz, mode), k);
  write_scores_csv(out / "scores.csv", scores);
  write_dominance_csv(out / "dominance.csv", window_dominance(res.spatial, labels, channels, soz, o.top_fraction, norm));
  const bool has_temporal = res.spatial.size() >= 3;
  if (has_temporal) {
    write_regime_contrast_csv(out / "regime_contrast.csv", regime_contrast(res.temporal, labels));
    write_temporal_adjacency_csv(out / "temporal_adjacency.csv", res.temporal, labels);
  }
  write_difference_edges_csv(out / "mean_graph_diff.csv", mean_graph_contrast(res.spatial, labels), channels);
  const RecordingMetrics rm{id, per_class_metrics(scores)};
  write_metrics_csv(out / "metrics.csv", {rm});
  if (!g.quiet) {
    log << "analyze: class0 " << rm.metrics.class0_accuracy << ", class1 " << rm.metrics.class1_accuracy << "\n";
  }
  return kExitOk;
}

// A metrics file, a directory holding metrics.csv, or a directory whose
// subdirectories hold one each.
std::vector<RecordingMetrics> collect_metrics(const std::vector<std::string>& paths, Manifest& m,
                                              const std::string& role) {
  std::vector<RecordingMetrics> all;
  auto take = [&](const fs::path& file) {
    m.input(role + ":" + file.generic_string(), file);
    auto rows = read_metrics_csv(file);
    all.insert(all.end(), rows.begin(), rows.end());
  };
  for (const auto& p : paths) {
    const fs::path path(p);
    if (!fs::exists(path)) throw Error(ErrorCode::io, "no such path: " + p);
    if (!fs::is_directory(path)) {
      take(path);
    } else if (fs::exists(path / "metrics.csv")) {
      take(path / "metrics.csv");
    } else {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(path))
        if (e.is_directory() && fs::exists(e.path() / "metrics.csv")) found.push_back(e.path() / "metrics.csv");
      if (found.empty()) throw Error(ErrorCode::io, "no metrics.csv under " + p);
      std::sort(found.begin(), found.end());
      for (const auto& f : found) take(f);
    }
  }
  return all;
}

int cmd_compare(const CompareOptions& o, const Globals& g, Manifest& m, std::ostream& log) {
  m.param("a", o.a);
  m.param("b", o.b);
  m.param("bins", o.bins);
  const auto a = collect_metrics(o.a, m, "a");
  const auto b = collect_metrics(o.b, m, "b");
  const MethodComparison cmp = compare_methods(a, b);
  const fs::path out(g.out);
  write_comparison_table_csv(out / "comparison.csv", a, b, cmp);
  write_histogram_csv(out / "histogram.csv", a, b, o.bins);
  if (!g.quiet) {
    log << "compare: " << cmp.recordings.size() << " pairs, p(class0) " << cmp.class0.p_value << ", p(class1) "
        << cmp.class1.p_value << ", p(total) " << cmp.total.p_value << "\n";
  }
  return kExitOk;
}

const char* error_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::io:
    case ErrorCode::parse:
      return "io";
    case ErrorCode::solver_failure:
      return "solver";
    default:
      return "validation";
  }
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::io:
    case ErrorCode::parse:
      return kExitIo;
    case ErrorCode::solver_failure:
      return kExitSolver;
    default:
      return kExitValidation;
  }
}

const char* kFooter =
    "Exit codes:\n"
    "  0  success\n"
    "  1  usage      bad flags or arguments\n"
    "  2  io         missing/unreadable input, malformed file, unwritable output\n"
    "  3  validation inputs fail a precondition (shapes, labels, windows, rates)\n"
    "  4  solver     a quadratic subproblem failed\n"
    "  5  internal   unexpected failure\n"
    "Failures print one line to stderr: error: <class>: <code>: <message>\n"
    "A --config file uses [command] sections of key = value; flags override it.";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint spatial/temporal graph learning for multichannel recordings", "stgraph"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", STG_VERSION);
  app.footer(kFooter);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Config file ([command] sections, key = value)");

  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory")->required();
  app.add_flag("-q,--quiet", g.quiet, "No progress lines on stderr");

  std::string spec_path;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic recording with planted regimes");
  synth->add_option("--spec", spec_path, "Synthetic spec (key = value); defaults to the 2-regime spec");

  LearnOptions lo;
  auto* learn = app.add_subcommand("learn", "Learn per-window spatial graphs and the temporal graph");
  add_signal_options(learn, lo.sig);
  learn->add_option("--beta", lo.joint.beta, "Frobenius regularization weight");
  learn->add_option("--max-outer-iter", lo.joint.max_outer_iter, "Block coordinate descent sweeps");
  learn->add_option("--outer-tol", lo.joint.outer_rel_tol, "Relative objective decrease to stop");
  learn->add_option("--solver-max-iter", lo.joint.solver.max_iter, "Iterations per subproblem");
  learn->add_option("--kkt-tol", lo.joint.solver.kkt_tol, "Subproblem KKT residual tolerance");
  learn->add_option("--sweep", lo.sweep, "gauss_seidel | jacobi")->check(CLI::IsMember({"gauss_seidel", "jacobi"}));
  learn->add_option("--normalize-distances", lo.normalize, "Scale each window to unit mean squared distance");

  BaselineOptions bo;
  auto* baseline = app.add_subcommand("baseline", "HVG features, PCA and logistic regression with cross-validation");
  add_signal_options(baseline, bo.sig);
  baseline->add_option("--folds", bo.base.n_folds, "Stratified folds");
  baseline->add_option("--pca-components", bo.base.pca_components, "PCA components; 0 uses --pca-variance");
  baseline->add_option("--pca-variance", bo.base.pca_variance, "Explained-variance target");
  baseline->add_option("--l2", bo.base.logistic.l2, "Logistic L2 penalty");
  baseline->add_option("--max-iter", bo.base.logistic.max_iter, "Newton iterations");
  baseline->add_option("--balance-classes", bo.base.logistic.balance_classes, "Class-balanced sample weights");
  baseline->add_option("--hvg-windows", bo.hvg_windows, "Three 1-based window indices")->expected(3);

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "Score electrodes and summarize learned graphs");
  analyze->add_option("--learn", ao.learn_dir, "Output directory of 'learn'")->required();
  analyze->add_option("--annotations", ao.annotations, "Annotation sidecar with SOZ channels")->required();
  analyze->add_option("--top-k", ao.top_k, "Electrodes marked SOZ; 0 = number of labeled SOZ");
  analyze->add_option("--top-fraction", ao.top_fraction, "Top fraction for per-window dominance");
  analyze->add_option("--score-mode", ao.score_mode, "weighted_degree | degree")
      ->check(CLI::IsMember({"weighted_degree", "degree"}));
  analyze->add_option("--dominance-norm", ao.dominance_norm, "group_size | top_size")
      ->check(CLI::IsMember({"group_size", "top_size"}));
  analyze->add_option("--recording-id", ao.recording_id, "Row name in metrics.csv");

  CompareOptions co;
  auto* compare = app.add_subcommand("compare", "Paired Wilcoxon comparison of two methods' metrics");
  compare->add_option("--a", co.a, "Metrics files or directories for method A")->required();
  compare->add_option("--b", co.b, "Metrics files or directories for method B")->required();
  compare->add_option("--bins", co.bins, "Histogram bins")->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  Manifest manifest(cmd->get_name());
  try {
    fs::create_directories(g.out);
    int rc = kExitOk;
    if (cmd == synth) {
      rc = cmd_synth(spec_path, app.get_option("--seed")->count() > 0, g, manifest, err);
    } else if (cmd == learn) {
      rc = cmd_learn(lo, g, manifest, err);
    } else if (cmd == baseline) {
      rc = cmd_baseline(bo, g, manifest, err);
    } else if (cmd == analyze) {
      rc = cmd_analyze(ao, g, manifest, err);
    } else {
      rc = cmd_compare(co, g, manifest, err);
    }
    manifest.write(g.out);
    return rc;
  } catch (const Error& e) {
    err << "error: " << error_class(e.code()) << ": " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: io: io: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: internal: internal: " << e.what() << "\n";
    return kExitInternal;
  }
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace stg::cli
