#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "engine.hpp"
#include "random.hpp"
#include "types.hpp"

namespace mafe {

/// Full pairwise Euclidean distance matrix (symmetric, zero diagonal).
inline Matrix pairwise_distance_matrix(const Matrix& X) {
  const Index n = X.rows();
  Matrix D = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double d = (X.row(i) - X.row(j)).norm();
      D(i, j) = d;
      D(j, i) = d;
    }
  return D;
}

/// √ Σ_ij (D̂_ij − D_ij)² over all entries of two same-shape distance matrices.
inline double frobenius_residual(const Matrix& D_high, const Matrix& D_low) {
  if (D_high.rows() != D_low.rows() || D_high.cols() != D_low.cols())
    throw ValidationError("shape mismatch between distance matrices");
  return (D_low - D_high).norm();
}

/// Angle in [0, π] between two nonzero vectors, arccos of the clamped cosine.
inline double spectral_angle(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ValidationError("spectral angle needs equal-length vectors");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0)
    throw ValidationError("spectral angle is undefined for a zero vector");
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(c);
}

enum class EvalMetric { SpectralAngle, Euclidean };

inline const char* metric_name(EvalMetric m) {
  return m == EvalMetric::SpectralAngle ? "spectral-angle" : "euclidean";
}

/**
 * 1-nearest-neighbor classification of each test row against the training rows.
 * Ties on the distance go to the lowest training index.
 */
inline std::vector<int> knn1_classify(const Matrix& train, const std::vector<int>& train_labels,
                                      const Matrix& test, EvalMetric metric) {
  if (train.rows() == 0) throw ValidationError("empty training set");
  if (static_cast<Index>(train_labels.size()) != train.rows())
    throw ValidationError("training label count does not match row count");
  if (train.cols() != test.cols()) throw ValidationError("train/test dimension mismatch");

  std::vector<int> pred(test.rows());
  for (Index i = 0; i < test.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    Index best_j = 0;
    for (Index j = 0; j < train.rows(); ++j) {
      double d;
      if (metric == EvalMetric::SpectralAngle)
        d = spectral_angle(test.row(i).transpose(), train.row(j).transpose());
      else
        d = (test.row(i) - train.row(j)).squaredNorm();
      if (d < best) {  // strict: the first (lowest-index) minimum wins
        best = d;
        best_j = j;
      }
    }
    pred[i] = train_labels[best_j];
  }
  return pred;
}

/// C x C contingency table: counts(a, b) = truth class a+1 predicted as b+1.
struct ConfusionMatrix {
  Eigen::MatrixXi counts;

  int total() const { return counts.sum(); }
  double overall_accuracy() const {
    const int t = total();
    if (t == 0) throw ValidationError("empty confusion matrix");
    return 100.0 * counts.diagonal().sum() / static_cast<double>(t);
  }
};

inline ConfusionMatrix confusion_matrix(const std::vector<int>& truth,
                                        const std::vector<int>& predicted, int n_classes) {
  if (truth.size() != predicted.size())
    throw ValidationError("truth/prediction size mismatch");
  if (n_classes < 1) throw ValidationError("need at least one class");
  ConfusionMatrix cm;
  cm.counts = Eigen::MatrixXi::Zero(n_classes, n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 1 || truth[i] > n_classes || predicted[i] < 1 || predicted[i] > n_classes)
      throw ValidationError("label outside {1..C} at position " + std::to_string(i));
    cm.counts(truth[i] - 1, predicted[i] - 1) += 1;
  }
  return cm;
}

/**
 * Agreement beyond chance:
 *   κ = (N·Σ_c t_cc − Σ_c t_{c+}·t_{+c}) / (N² − Σ_c t_{c+}·t_{+c})
 * with row sums t_{c+} and column sums t_{+c}.  Undefined (nullopt) when the
 * denominator vanishes, e.g. a single-class table.
 */
inline std::optional<double> kappa_statistic(const ConfusionMatrix& cm) {
  const double n = cm.total();
  if (n == 0.0) throw ValidationError("empty confusion matrix");
  const Index c = cm.counts.rows();
  double diag = 0.0, cross = 0.0;
  for (Index i = 0; i < c; ++i) {
    diag += cm.counts(i, i);
    cross += static_cast<double>(cm.counts.row(i).sum()) * cm.counts.col(i).sum();
  }
  const double denom = n * n - cross;
  if (denom == 0.0) return std::nullopt;
  return (n * diag - cross) / denom;
}

struct SplitIndices {
  std::vector<int> train, test;
};

/**
 * Class-stratified split: within each class (ascending class order, indices
 * shuffled with the shared seeded generator) round(train_fraction·n_c) points
 * go to training — half-up rounding, so remainders favor training.  A class
 * with fewer than 2 members cannot be split and raises an error naming it.
 */
inline SplitIndices stratified_split(const std::vector<int>& labels, double train_fraction,
                                     std::uint64_t seed) {
  if (labels.empty()) throw ValidationError("no labels to split");
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw ValidationError("train fraction must lie strictly between 0 and 1");
  int n_classes = 0;
  for (int v : labels) n_classes = std::max(n_classes, v);

  std::mt19937_64 rng(seed);
  SplitIndices out;
  for (int c = 1; c <= n_classes; ++c) {
    std::vector<int> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) members.push_back(static_cast<int>(i));
    if (members.size() < 2)
      throw ValidationError("class " + std::to_string(c) +
                            " has fewer than 2 members and cannot be split");
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t n_train =
        static_cast<std::size_t>(std::floor(train_fraction * members.size() + 0.5));
    for (std::size_t i = 0; i < members.size(); ++i)
      (i < n_train ? out.train : out.test).push_back(members[i]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

struct EvaluationReport {
  int runs = 0;
  Index dimension = 0;
  EvalMetric metric = EvalMetric::SpectralAngle;
  ConfusionMatrix aggregated;              // summed over runs
  double overall_accuracy = 0.0;           // percent, from the aggregated table
  double overall_accuracy_stderr = 0.0;    // std of per-run OA / sqrt(runs)
  std::vector<double> per_class_accuracy;  // percent, aggregated
  std::vector<double> per_class_stderr;
  std::optional<double> kappa;             // aggregated
  double kappa_stderr = 0.0;
  std::optional<double> frobenius;         // filled by callers who know the source distances
};

namespace detail {
inline double standard_error(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
}
}  // namespace detail

/**
 * `runs` stratified 70/30-style splits (fraction fixed at 0.7 unless overridden),
 * 1NN classification of the held-out points in the embedding, aggregated into
 * one confusion matrix with per-run spread reported as standard errors.
 * Metric default: spectral-angle for m >= 2, Euclidean for m = 1.
 */
inline EvaluationReport repeated_evaluation(const Matrix& Z, const std::vector<int>& labels,
                                            int runs, std::uint64_t seed,
                                            std::optional<EvalMetric> metric = std::nullopt,
                                            double train_fraction = 0.7) {
  if (Z.rows() != static_cast<Index>(labels.size()))
    throw ValidationError("embedding rows and label count differ");
  if (runs < 1) throw ValidationError("need at least one evaluation run");
  const EvalMetric m =
      metric.value_or(Z.cols() >= 2 ? EvalMetric::SpectralAngle : EvalMetric::Euclidean);

  int n_classes = 0;
  for (int v : labels) n_classes = std::max(n_classes, v);
  if (n_classes < 1) throw ValidationError("evaluation needs labeled points");

  EvaluationReport rep;
  rep.runs = runs;
  rep.dimension = Z.cols();
  rep.metric = m;
  rep.aggregated.counts = Eigen::MatrixXi::Zero(n_classes, n_classes);

  std::vector<double> oa_runs, kappa_runs;
  std::vector<std::vector<double>> class_runs(n_classes);
  for (int r = 0; r < runs; ++r) {
    const SplitIndices split = stratified_split(labels, train_fraction, derive_seed(seed, r));
    Matrix train(split.train.size(), Z.cols()), test(split.test.size(), Z.cols());
    std::vector<int> train_labels(split.train.size()), test_labels(split.test.size());
    for (std::size_t i = 0; i < split.train.size(); ++i) {
      train.row(i) = Z.row(split.train[i]);
      train_labels[i] = labels[split.train[i]];
    }
    for (std::size_t i = 0; i < split.test.size(); ++i) {
      test.row(i) = Z.row(split.test[i]);
      test_labels[i] = labels[split.test[i]];
    }
    const std::vector<int> pred = knn1_classify(train, train_labels, test, m);
    const ConfusionMatrix cm = confusion_matrix(test_labels, pred, n_classes);
    rep.aggregated.counts += cm.counts;
    oa_runs.push_back(cm.overall_accuracy());
    if (auto k = kappa_statistic(cm)) kappa_runs.push_back(*k);
    for (int c = 0; c < n_classes; ++c) {
      const int row_total = cm.counts.row(c).sum();
      if (row_total > 0) class_runs[c].push_back(100.0 * cm.counts(c, c) / row_total);
    }
  }

  rep.overall_accuracy = rep.aggregated.overall_accuracy();
  rep.overall_accuracy_stderr = detail::standard_error(oa_runs);
  rep.kappa = kappa_statistic(rep.aggregated);
  rep.kappa_stderr = detail::standard_error(kappa_runs);
  rep.per_class_accuracy.resize(n_classes);
  rep.per_class_stderr.resize(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    const int row_total = rep.aggregated.counts.row(c).sum();
    rep.per_class_accuracy[c] =
        row_total > 0 ? 100.0 * rep.aggregated.counts(c, c) / row_total : 0.0;
    rep.per_class_stderr[c] = detail::standard_error(class_runs[c]);
  }
  return rep;
}

struct SweepRow {
  Index dim = 0;
  double mean_error = 0.0;  // percent misclassified, mean over runs
  double std_error = 0.0;
};

/**
 * Embeds the graph at each requested dimension and reports the 1NN test error
 * (100 − OA) from repeated splits.  Engine and split seeds are derived per
 * dimension / per run so the sweep is reproducible end to end.
 */
inline std::vector<SweepRow> dimension_sweep(const NeighborhoodGraph& graph,
                                             const FieldModel& field,
                                             const std::vector<int>& labels,
                                             const std::vector<Index>& dims, int runs,
                                             std::uint64_t seed, EngineConfig base = {}) {
  if (dims.empty()) throw ValidationError("dimension sweep needs at least one dimension");
  std::vector<Index> sorted_dims = dims;
  std::sort(sorted_dims.begin(), sorted_dims.end());

  std::vector<SweepRow> rows;
  for (Index m : sorted_dims) {
    EngineConfig cfg = base;
    cfg.dim = m;
    cfg.seed = derive_seed(seed, 1000 + static_cast<std::uint64_t>(m));
    cfg.initial.reset();
    const RunResult res = run(graph, field, cfg);
    const EvaluationReport rep =
        repeated_evaluation(res.Z, labels, runs, derive_seed(seed, static_cast<std::uint64_t>(m)));
    SweepRow row;
    row.dim = m;
    row.mean_error = 100.0 - rep.overall_accuracy;
    row.std_error = rep.overall_accuracy_stderr;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mafe
