#include "stg/hvg_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stg/csv.hpp"
#include "stg/error.hpp"
#include "stg/rng.hpp"

namespace stg {

Matrix HvgGraph::adjacency() const {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& [i, j] : edges) {
    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return a;
}

std::vector<std::size_t> HvgGraph::degrees() const {
  std::vector<std::size_t> d(n, 0);
  for (const auto& [i, j] : edges) {
    ++d[i];
    ++d[j];
  }
  return d;
}

HvgGraph build_hvg(const std::vector<double>& series) {
  if (series.size() < 2) throw Error(ErrorCode::invalid_argument, "HVG needs at least two samples");
  for (double v : series)
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite, "HVG series has non-finite values");

  HvgGraph g;
  g.n = series.size();
  // Stack holds candidates strictly decreasing in height from bottom to top.
  std::vector<std::size_t> stack;
  for (std::size_t j = 0; j < series.size(); ++j) {
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      g.edges.emplace_back(i, j);
      if (series[i] < series[j]) {
        stack.pop_back();
      } else {
        if (series[i] == series[j]) stack.pop_back();  // equal height blocks everything behind j
        break;
      }
    }
    stack.push_back(j);
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

HvgGraph build_hvg_bruteforce(const std::vector<double>& series) {
  if (series.size() < 2) throw Error(ErrorCode::invalid_argument, "HVG needs at least two samples");
  HvgGraph g;
  g.n = series.size();
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t j = i + 1; j < series.size(); ++j) {
      const double bar = std::min(series[i], series[j]);
      bool visible = true;
      for (std::size_t k = i + 1; k < j && visible; ++k) visible = series[k] < bar;
      if (visible) g.edges.emplace_back(i, j);
    }
  }
  return g;
}

std::array<std::size_t, 3> default_hvg_windows(const WindowedRecording& wr) {
  std::size_t last_pre = wr.labels.size(), onset = wr.labels.size(), first_post = wr.labels.size();
  for (std::size_t m = 0; m < wr.labels.size(); ++m) {
    if (wr.labels[m] == WindowLabel::pre_onset) last_pre = m;
    if (wr.labels[m] == WindowLabel::onset && onset == wr.labels.size()) onset = m;
    if (wr.labels[m] == WindowLabel::post_onset && first_post == wr.labels.size()) first_post = m;
  }
  if (last_pre == wr.labels.size() || onset == wr.labels.size() || first_post == wr.labels.size()) {
    throw Error(ErrorCode::invalid_argument, "HVG baseline needs pre-onset, onset and post-onset windows");
  }
  return {last_pre, onset, first_post};
}

FeatureMatrix hvg_features(const WindowedRecording& wr, const std::array<std::size_t, 3>& selected) {
  for (std::size_t m : selected)
    if (m >= wr.windows.size()) throw Error(ErrorCode::invalid_argument, "selected window out of range");
  const std::size_t len = wr.windows[selected[0]].n_samples();
  const std::size_t n_ch = wr.windows[selected[0]].n_nodes();
  for (std::size_t m : selected) {
    if (wr.windows[m].n_samples() != len) {
      throw Error(ErrorCode::dimension_mismatch, "selected windows have unequal lengths");
    }
  }
  if (len < 2) throw Error(ErrorCode::invalid_argument, "windows must have at least two samples");

  FeatureMatrix f;
  f.values = Matrix::Zero(static_cast<Eigen::Index>(n_ch), static_cast<Eigen::Index>(edge_count(len)));
  f.labels = wr.soz_labels;
  if (f.labels.size() != n_ch) f.labels.assign(n_ch, false);
  const double share = 1.0 / static_cast<double>(selected.size());
  for (std::size_t c = 0; c < n_ch; ++c) {
    for (std::size_t m : selected) {
      const Matrix& v = wr.windows[m].values();
      std::vector<double> series(len);
      for (std::size_t s = 0; s < len; ++s) series[s] = v(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s));
      for (const auto& [i, j] : build_hvg(series).edges)
        f.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(edge_index(len, i, j))) += share;
    }
  }
  return f;
}

Matrix PcaModel::transform(const Matrix& x) const {
  if (x.cols() != mean.size()) throw Error(ErrorCode::dimension_mismatch, "PCA input has the wrong width");
  return (x.rowwise() - mean.transpose()) * components;
}

PcaModel pca_fit(const Matrix& x, std::size_t n_components, double variance_target) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  if (rows < 2 || cols < 1) throw Error(ErrorCode::invalid_argument, "PCA needs at least two rows");
  const auto max_k = static_cast<std::size_t>(std::min(rows - 1, cols));
  if (n_components > max_k) {
    throw Error(ErrorCode::invalid_argument, "n_components exceeds min(rows - 1, cols)");
  }

  PcaModel model;
  model.mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(rows - 1);
  const double total = centered.squaredNorm() / denom;
  if (!(total > 0.0)) throw Error(ErrorCode::invalid_argument, "PCA input has zero variance");

  Vector values;
  Matrix vectors;  // features x r, descending
  if (cols <= rows) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(centered.transpose() * centered / denom);
    values = eig.eigenvalues().reverse();
    vectors = eig.eigenvectors().rowwise().reverse();
  } else {
    // Gram route: the nonzero spectrum of X^T X equals that of X X^T.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(centered * centered.transpose());
    const Vector gram_values = eig.eigenvalues().reverse();
    const Matrix gram_vectors = eig.eigenvectors().rowwise().reverse();
    values = gram_values / denom;
    vectors = Matrix::Zero(cols, rows);
    for (Eigen::Index k = 0; k < rows; ++k) {
      if (gram_values[k] > 1e-12 * gram_values[0]) {
        vectors.col(k) = centered.transpose() * gram_vectors.col(k) / std::sqrt(gram_values[k]);
      }
    }
  }
  values = values.cwiseMax(0.0);

  std::size_t usable = 0;
  while (usable < max_k && usable < static_cast<std::size_t>(values.size()) &&
         values[static_cast<Eigen::Index>(usable)] > 1e-12 * values[0])
    ++usable;
  std::size_t k = n_components;
  if (k == 0) {
    double cumulative = 0.0;
    while (k < usable) {
      cumulative += values[static_cast<Eigen::Index>(k)] / total;
      ++k;
      if (cumulative >= variance_target) break;
    }
    k = std::max<std::size_t>(k, 1);
  }

  const auto kk = static_cast<Eigen::Index>(k);
  model.components = vectors.leftCols(kk);
  for (Eigen::Index c = 0; c < kk; ++c) {
    Eigen::Index arg = 0;
    model.components.col(c).cwiseAbs().maxCoeff(&arg);
    if (model.components(arg, c) < 0.0) model.components.col(c) *= -1.0;
  }
  model.explained_variance = values.head(kk);
  model.explained_variance_ratio = model.explained_variance / total;
  return model;
}

FeatureMatrix pca_fit_transform(const FeatureMatrix& f, std::size_t n_components, PcaModel* model) {
  PcaModel fitted = pca_fit(f.values, n_components);
  FeatureMatrix out{fitted.transform(f.values), f.labels};
  if (model) *model = std::move(fitted);
  return out;
}

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_labels(const std::vector<bool>& labels) {
  const auto positives = std::count(labels.begin(), labels.end(), true);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
    throw Error(ErrorCode::single_class, "logistic regression needs both classes in the training set");
  }
}

}  // namespace

Vector logistic_sample_weights(const std::vector<bool>& labels, bool balanced) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Vector s = Vector::Ones(n);
  if (!balanced) return s;
  const auto n1 = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const double n0 = static_cast<double>(n) - n1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double count = labels[static_cast<std::size_t>(i)] ? n1 : n0;
    s[i] = count > 0.0 ? static_cast<double>(n) / (2.0 * count) : 0.0;
  }
  return s;
}

double logistic_loss(const Matrix& x, const std::vector<bool>& labels, const Vector& sample_weights, double l2,
                     const Vector& params, Vector* grad) {
  const Eigen::Index p = x.cols();
  const Vector coef = params.head(p);
  const double intercept = params[p];
  const Vector z = (x * coef).array() + intercept;
  const double total_weight = sample_weights.sum();
  double loss = 0.0;
  Vector residual(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double y = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    loss += sample_weights[i] * (softplus(z[i]) - y * z[i]);
    residual[i] = sample_weights[i] * (sigmoid(z[i]) - y);
  }
  loss = loss / total_weight + 0.5 * l2 * coef.squaredNorm();
  if (grad) {
    grad->resize(p + 1);
    grad->head(p) = x.transpose() * residual / total_weight + l2 * coef;
    (*grad)[p] = residual.sum() / total_weight;
  }
  return loss;
}

LogisticModel logreg_train(const FeatureMatrix& f, const LogisticConfig& config) {
  if (f.labels.size() != f.rows()) throw Error(ErrorCode::dimension_mismatch, "label count does not match rows");
  check_labels(f.labels);
  if (config.l2 < 0.0) throw Error(ErrorCode::invalid_argument, "l2 must be >= 0");

  const Matrix& x = f.values;
  const Eigen::Index p = x.cols();
  const Vector s = logistic_sample_weights(f.labels, config.balance_classes);
  const double total_weight = s.sum();

  Matrix xa(x.rows(), p + 1);
  xa << x, Vector::Ones(x.rows());

  Vector params = Vector::Zero(p + 1);
  Vector grad;
  double loss = logistic_loss(x, f.labels, s, config.l2, params, &grad);

  LogisticModel model;
  model.loss_trace.push_back(loss);
  int it = 0;
  while (it < config.max_iter && grad.norm() > config.grad_tol) {
    ++it;
    const Vector z = xa * params;
    Vector curv(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double pi = sigmoid(z[i]);
      curv[i] = s[i] * pi * (1.0 - pi) / total_weight;
    }
    Matrix h = xa.transpose() * curv.asDiagonal() * xa;
    h.diagonal().head(p).array() += config.l2;
    h.diagonal().array() += 1e-12;
    Vector step = -h.ldlt().solve(grad);
    if (!step.allFinite() || step.dot(grad) >= 0.0) step = -grad;

    // Armijo backtracking.
    double t = 1.0;
    Vector trial_grad;
    double trial_loss = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Vector trial = params + t * step;
      trial_loss = logistic_loss(x, f.labels, s, config.l2, trial, &trial_grad);
      if (trial_loss <= loss + 1e-4 * t * grad.dot(step)) {
        params = trial;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    loss = trial_loss;
    grad = trial_grad;
    model.loss_trace.push_back(loss);
  }

  model.coef = params.head(p);
  model.intercept = params[p];
  model.iterations = it;
  model.gradient_norm = grad.norm();
  model.converged = model.gradient_norm <= config.grad_tol;
  return model;
}

Vector logreg_predict(const LogisticModel& model, const Matrix& x) {
  if (x.cols() != model.coef.size()) throw Error(ErrorCode::dimension_mismatch, "feature width mismatch");
  Vector z = (x * model.coef).array() + model.intercept;
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = sigmoid(z[i]);
  return z;
}

std::vector<int> stratified_folds(const std::vector<bool>& labels, std::size_t n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw Error(ErrorCode::invalid_argument, "need at least two folds");
  if (labels.size() < n_folds) throw Error(ErrorCode::insufficient_data, "fewer rows than folds");
  Rng rng(seed);
  std::vector<int> fold(labels.size(), 0);
  std::size_t next = 0;
  for (bool cls : {true, false}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    rng.shuffle(members);
    for (std::size_t i : members) fold[i] = static_cast<int>(next++ % n_folds);
  }
  return fold;
}

BaselinePredictions run_baseline_cv(const FeatureMatrix& f, const BaselineConfig& config) {
  if (f.labels.size() != f.rows()) throw Error(ErrorCode::dimension_mismatch, "label count does not match rows");
  BaselinePredictions out;
  out.fold = stratified_folds(f.labels, config.n_folds, config.seed);
  out.probability = Vector::Zero(static_cast<Eigen::Index>(f.rows()));
  out.predicted.assign(f.rows(), false);

  for (std::size_t k = 0; k < config.n_folds; ++k) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < f.rows(); ++i)
      (out.fold[i] == static_cast<int>(k) ? test : train).push_back(static_cast<Eigen::Index>(i));
    if (test.empty()) continue;

    FeatureMatrix train_f{f.values(train, Eigen::all), {}};
    for (auto i : train) train_f.labels.push_back(f.labels[static_cast<std::size_t>(i)]);
    check_labels(train_f.labels);

    const std::size_t max_k = std::min(train_f.rows() - 1, train_f.cols());
    const PcaModel pca = pca_fit(train_f.values, std::min(config.pca_components, max_k), config.pca_variance);
    const FeatureMatrix reduced{pca.transform(train_f.values), train_f.labels};
    LogisticModel model = logreg_train(reduced, config.logistic);

    const Vector prob = logreg_predict(model, pca.transform(f.values(test, Eigen::all)));
    for (std::size_t t = 0; t < test.size(); ++t) {
      out.probability[test[t]] = prob[static_cast<Eigen::Index>(t)];
      out.predicted[static_cast<std::size_t>(test[t])] = prob[static_cast<Eigen::Index>(t)] >= 0.5;
    }
    out.models.push_back(std::move(model));
  }
  return out;
}

void write_feature_matrix_csv(const std::filesystem::path& path, const FeatureMatrix& f,
                              const std::vector<std::string>& row_names) {
  std::vector<csv::Row> rows;
  csv::Row header{"channel", "label"};
  for (std::size_t k = 0; k < f.cols(); ++k) header.push_back("f" + std::to_string(k));
  rows.push_back(std::move(header));
  for (std::size_t i = 0; i < f.rows(); ++i) {
    csv::Row row{i < row_names.size() ? row_names[i] : std::to_string(i), f.labels[i] ? "1" : "0"};
    for (std::size_t k = 0; k < f.cols(); ++k)
      row.push_back(csv::format_double(f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))));
    rows.push_back(std::move(row));
  }
  csv::write_rows(path, rows);
}

}  // namespace stg
