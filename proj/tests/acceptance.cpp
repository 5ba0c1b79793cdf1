// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "stg/analysis.hpp"
#include "stg/cli.hpp"
#include "stg/csv.hpp"
#include "stg/hvg_baseline.hpp"
#include "stg/joint_learner.hpp"
#include "stg/qp_solver.hpp"
#include "stg/rng.hpp"
#include "stg/synth.hpp"

using namespace stg;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
  return m;
}

std::vector<SignalMatrix> gaussian_windows(std::size_t n, std::size_t m, std::size_t k, Rng& rng) {
  std::vector<SignalMatrix> w;
  for (std::size_t i = 0; i < m; ++i) w.emplace_back(gaussian(n, k, rng));
  return w;
}

// Worst violation of the Laplacian constraint set, as a list of margins that
// must all be <= 0.
struct LaplacianCheck {
  double row_sum = 0.0, trace = 0.0, off_diag = -1.0, min_eig = 0.0;
  bool ok() const { return row_sum <= 1e-9 && trace <= 1e-6 && off_diag <= 1e-12 && min_eig >= -1e-8; }
  void add(const GraphLaplacian& l) {
    const Matrix& a = l.matrix();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      row_sum = std::max(row_sum, std::abs(a.row(i).sum()));
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        if (i != j) off_diag = std::max(off_diag, a(i, j));
    }
    trace = std::max(trace, std::abs(a.trace() - static_cast<double>(a.rows())));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
  }
};

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o) {
  std::printf("[%s] %2d %-34s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
  failures += o.pass ? 0 : 1;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

LaplacianCheck g_constraints;  // accumulated over every learned graph

Outcome monotonicity() {
  const auto t0 = Clock::now();
  const std::size_t ns[] = {4, 8};
  const std::size_t ms[] = {3, 5};
  const double betas[] = {0.1, 0.5, 2.0};
  double worst = -1e300;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(derive_seed(1001, static_cast<std::uint64_t>(trial)));
    const std::size_t n = ns[trial % 2], m = ms[(trial / 2) % 2];
    JointConfig cfg;
    cfg.beta = betas[trial % 3];
    const JointResult r = learn_joint_graphs(gaussian_windows(n, m, 32, rng), cfg);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      worst = std::max(worst, r.objective_trace[i] - r.objective_trace[i - 1]);
    for (const auto& l : r.spatial) g_constraints.add(l);
    g_constraints.add(r.temporal);
  }
  const double secs = elapsed(t0);
  return {worst <= 1e-8 && secs < 60.0, fmt("max step increase %.3g (<= 1e-8), %.2f s (< 60)", worst, secs)};
}

Outcome constraints() {
  // Criterion 1 graphs plus a larger run with a temporal graph over many windows.
  Rng rng(2002);
  JointConfig cfg;
  const JointResult r = learn_joint_graphs(gaussian_windows(12, 9, 64, rng), cfg);
  for (const auto& l : r.spatial) g_constraints.add(l);
  g_constraints.add(r.temporal);
  const auto& c = g_constraints;
  return {c.ok(), fmt("row sum %.2g, trace dev %.2g, max off-diag %.2g, min eig %.2g", c.row_sum, c.trace,
                      c.off_diag, c.min_eig)};
}

// All points of {w in step*Z^3, w >= 0, sum = s}.
std::vector<Vector> simplex_grid3(double s, double step) {
  std::vector<Vector> pts;
  const int total = static_cast<int>(std::lround(s / step));
  for (int a = 0; a <= total; ++a)
    for (int b = 0; a + b <= total; ++b) {
      Vector w(3);
      w << a * step, b * step, (total - a - b) * step;
      pts.push_back(w);
    }
  return pts;
}

Outcome joint_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0, worst_above = -1e300;
  for (int trial = 0; trial < 5; ++trial) {
    Rng rng(derive_seed(3003, static_cast<std::uint64_t>(trial)));
    const auto windows = gaussian_windows(3, 2, 8, rng);
    const double beta = 0.5;
    JointConfig cfg;
    cfg.beta = beta;
    const JointResult r = learn_joint_graphs(windows, cfg);

    // With M = 2 the temporal simplex is the single point t = 1, so the grid
    // spans both spatial simplices. The joint objective is then
    //   z1.w1 + z2.w2 + beta (|L1|^2 + |L2|^2) + |L1 - L2|^2 + beta |Lt|^2.
    const auto grid = simplex_grid3(1.5, 0.05);
    const Vector z1 = pairwise_sq_distances(windows[0]);
    const Vector z2 = pairwise_sq_distances(windows[1]);
    std::vector<Matrix> lap;
    std::vector<double> lin1, lin2, fro;
    for (const auto& w : grid) {
      lap.push_back(laplacian_from_weights(EdgeWeightVector(3, w)).matrix());
      lin1.push_back(z1.dot(w));
      lin2.push_back(z2.dot(w));
      fro.push_back(lap.back().squaredNorm());
    }
    const double temporal_term = beta * 4.0;  // |L_t|_F^2 = 4 for the 2-node edge of weight 1
    double best = 1e300;
    for (std::size_t a = 0; a < grid.size(); ++a)
      for (std::size_t b = 0; b < grid.size(); ++b)
        best = std::min(best, lin1[a] + lin2[b] + beta * (fro[a] + fro[b]) + (lap[a] - lap[b]).squaredNorm() +
                                  temporal_term);
    const double ours = joint_objective(windows, r.spatial, r.temporal, beta);
    worst = std::max(worst, std::abs(ours - best));
    worst_above = std::max(worst_above, ours - best);
  }
  const double secs = elapsed(t0);
  // A positive max(BCD - grid) would mean BCD missed a grid point; a negative
  // one means the grid itself sits above the continuous optimum.
  return {worst <= 1e-3 && secs < 120.0,
          fmt("max |BCD - grid| %.3g (<= 1e-3), max (BCD - grid) %.3g, %.2f s (< 120)", worst, worst_above, secs)};
}

Outcome subproblem_oracle() {
  Rng rng(4004);
  double worst_gap = 0.0, worst_kkt = 0.0;
  int converged = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = gaussian(3, 3, rng);
    const Matrix q = a.transpose() * a + 0.05 * Matrix::Identity(3, 3);
    const Vector c = 2.0 * gaussian(3, 1, rng).col(0);
    const double s = 0.5 + 2.0 * rng.uniform();
    const SimplexQP qp = SimplexQP::dense(c, q, s);
    const SolverReport r = solve_simplex_qp(qp, Vector::Constant(3, s / 3.0));
    const double step = s / 1000.0;
    const auto [w, f] = brute_force_simplex_qp(qp, s, step);
    worst_gap = std::max(worst_gap, std::abs(r.objective - f));
    if (r.converged) {
      ++converged;
      worst_kkt = std::max(worst_kkt, r.kkt_residual);
    }
  }
  return {worst_gap <= 1e-3 && worst_kkt <= 1e-7,
          fmt("max |solver - oracle| %.3g (<= 1e-3), max KKT %.3g (<= 1e-7) over %.0f converged", worst_gap,
              worst_kkt, converged)};
}

Outcome hvg_exact() {
  const auto t0 = Clock::now();
  Rng rng(5005);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t len = 2 + rng.uniform_int(255);
    std::vector<double> x(len);
    for (auto& v : x) v = trial % 3 == 0 ? static_cast<double>(rng.uniform_int(5)) : rng.normal();
    mismatches += build_hvg(x).edges != build_hvg_bruteforce(x).edges;
  }
  const double secs = elapsed(t0);
  return {mismatches == 0 && secs < 5.0, fmt("%.0f mismatches of 100, %.3f s (< 5)", mismatches, secs)};
}

Outcome regime_recovery() {
  int hits = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const SynthOutput out = generate(default_synth_spec(derive_seed(6006, static_cast<std::uint64_t>(trial))));
    const JointResult r = learn_joint_graphs(out.recording.windows, {});
    const RegimeContrast rc = regime_contrast(r.temporal, out.recording.labels);
    hits += rc.within_mean > rc.across_mean;
  }
  return {hits >= 45, fmt("within > across in %.0f/50 trials (>= 45)", hits)};
}

Outcome soz_recovery() {
  double recall = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const SynthSpec spec = default_synth_spec(derive_seed(7007, static_cast<std::uint64_t>(trial)));
    const SynthOutput out = generate(spec);
    const JointResult r = learn_joint_graphs(out.recording.windows, {});
    const auto scores = classify_topk(
        score_electrodes(r.spatial, out.recording.labels, out.recording.channel_names, out.soz_mask), 3);
    recall += per_class_metrics(scores).class1_accuracy;
  }
  recall /= 50.0;
  return {recall >= 0.9, fmt("mean top-3 recall %.3f (>= 0.9)", recall)};
}

Outcome baseline_soundness() {
  std::vector<double> real, null;
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = derive_seed(8008, static_cast<std::uint64_t>(trial));
    SynthParams p;
    p.n_nodes = 24;
    p.community_size = 8;
    p.community_ar = 0.9;
    p.seed = seed;
    const SynthOutput out = generate(build_synth_spec(p));
    const FeatureMatrix f = hvg_features(out.recording, default_hvg_windows(out.recording));
    BaselineConfig cfg;
    cfg.seed = seed;
    const BaselinePredictions pr = run_baseline_cv(f, cfg);
    real.push_back(per_class_metrics(pr.predicted, f.labels).total_accuracy);

    FeatureMatrix permuted = f;
    Rng rng(derive_seed(seed, 1));
    rng.shuffle(permuted.labels);
    const BaselinePredictions pn = run_baseline_cv(permuted, cfg);
    null.push_back(per_class_metrics(pn.predicted, permuted.labels).total_accuracy);
  }
  const double mean_real = std::accumulate(real.begin(), real.end(), 0.0) / 20.0;
  const double mean_null = std::accumulate(null.begin(), null.end(), 0.0) / 20.0;
  double var = 0.0;
  for (double v : null) var += (v - mean_null) * (v - mean_null);
  const double sigma = std::sqrt(var / 19.0);

  // Logistic gradient against central differences.
  Rng rng(8009);
  const Matrix x = gaussian(30, 5, rng);
  std::vector<bool> labels(30);
  for (std::size_t i = 0; i < 30; ++i) labels[i] = x(static_cast<Eigen::Index>(i), 0) + 0.5 * rng.normal() > 0.0;
  const Vector s = logistic_sample_weights(labels, true);
  const Vector params = gaussian(6, 1, rng).col(0);
  Vector grad;
  logistic_loss(x, labels, s, 1.0, params, &grad);
  double grad_err = 0.0;
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < params.size(); ++k) {
    Vector a = params, b = params;
    a[k] += h;
    b[k] -= h;
    const double fd = (logistic_loss(x, labels, s, 1.0, a) - logistic_loss(x, labels, s, 1.0, b)) / (2.0 * h);
    grad_err = std::max(grad_err, std::abs(fd - grad[k]));
  }
  const double threshold = 0.5 + 2.0 * sigma;
  return {mean_real > threshold && grad_err <= 1e-5,
          fmt("accuracy %.3f > %.3f (0.5 + 2 sd of null, null mean %.3f); gradient error %.2g (<= 1e-5)", mean_real,
              threshold, mean_null, grad_err)};
}

Outcome wilcoxon_exact() {
  std::vector<double> a(10), b(10, 0.0);
  for (std::size_t i = 0; i < 10; ++i) a[i] = 0.3 + 0.01 * static_cast<double>(i);
  const WilcoxonResult r = wilcoxon_signed_rank(a, b);
  const double err = std::abs(r.p_value - 2.0 / 1024.0);
  return {err <= 1e-12 && r.exact, fmt("p = %.15g, |p - 2/1024| = %.2g (<= 1e-12)", r.p_value, err)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("stg_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::ostringstream sink;
  auto cli_run = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "stgraph");
    return cli::run(args, sink, sink);
  };
  for (const char* id : {"a", "b"}) {
    const fs::path base = root / id;
    const std::string syn = (base / "syn").string();
    if (cli_run({"--quiet", "--seed", "10010", "--out", syn, "synth"}) != 0 ||
        cli_run({"--quiet", "--out", (base / "learn").string(), "learn", "--recording", syn + "/recording.csv",
                 "--annotations", syn + "/annotations.txt", "--overlap", "0"}) != 0 ||
        cli_run({"--quiet", "--out", (base / "an").string(), "analyze", "--learn", (base / "learn").string(),
                 "--annotations", syn + "/annotations.txt"}) != 0) {
      fs::remove_all(root);
      return {false, "pipeline failed: " + sink.str()};
    }
  }
  int compared = 0, differ = 0;
  for (const char* sub : {"syn", "learn", "an"}) {
    for (const auto& e : fs::directory_iterator(root / "a" / sub)) {
      if (e.path().extension() != ".csv") continue;
      ++compared;
      differ += csv::read_text(e.path()) != csv::read_text(root / "b" / sub / e.path().filename());
    }
  }
  fs::remove_all(root);
  return {differ == 0 && compared > 0, fmt("%.0f of %.0f data CSVs differ", differ, compared)};
}

Outcome performance() {
  Rng rng(11011);
  SynthParams p;
  p.n_nodes = 20;
  p.community_size = 5;
  p.seed = 11011;
  const SynthOutput out = generate(build_synth_spec(p));
  JointConfig cfg;
  cfg.outer_rel_tol = 1e-6;
  cfg.max_outer_iter = 10000;
  const auto t0 = Clock::now();
  const JointResult r = learn_joint_graphs(out.recording.windows, cfg);
  const double secs = elapsed(t0);
  return {r.converged && secs < 60.0,
          fmt("N=20 M=13 K=128: %.0f outer iterations, converged=%.0f, %.2f s (< 60)", r.outer_iterations,
              r.converged ? 1.0 : 0.0, secs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"objective monotonicity", monotonicity},
      {"Laplacian constraint satisfaction", constraints},
      {"joint grid-search oracle", joint_oracle},
      {"subproblem brute-force oracle", subproblem_oracle},
      {"HVG exactness", hvg_exact},
      {"synthetic regime recovery", regime_recovery},
      {"synthetic SOZ recovery", soz_recovery},
      {"baseline soundness", baseline_soundness},
      {"exact Wilcoxon p-value", wilcoxon_exact},
      {"end-to-end determinism", determinism},
      {"performance envelope", performance},
  };
  int id = 0;
  for (const auto& [name, fn] : criteria) {
    ++id;
    try {
      report(id, name, fn());
    } catch (const std::exception& e) {
      report(id, name, {false, std::string("threw: ") + e.what()});
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
