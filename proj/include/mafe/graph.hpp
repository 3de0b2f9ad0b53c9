#pragma once

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "covariance.hpp"
#include "types.hpp"

namespace mafe {

enum class GraphKind { GaussianPerplexity, Bilateral };

/**
 * Symmetric nonnegative pairwise affinities with zero diagonal.  `sigma_i`
 * holds the per-point Gaussian bandwidths when the graph came from perplexity
 * calibration; `sigma_s` the spatial scale when it came from the bilateral
 * kernel.
 */
struct NeighborhoodGraph {
  Eigen::SparseMatrix<double> weights;  // N x N, symmetric, zero diagonal
  int k = 0;                            // neighbors per vertex (or effective neighbors)
  GraphKind kind = GraphKind::GaussianPerplexity;
  Vector sigma_i;                       // per-point bandwidths (gaussian kind)
  double sigma_s = 0.0;                 // spatial scale (bilateral kind)

  Index n() const { return weights.rows(); }
};

struct PerplexityOptions {
  double entropy_base = std::exp(1.0);  // base for H and for the log k target
  double tolerance = 1e-3;              // |H - log k| acceptance band
  int max_iterations = 200;             // bisection budget per point
};

/// Per-point calibration output: row-stochastic weights (zero diagonal) and bandwidths.
struct PerplexityCalibration {
  Matrix row_weights;  // N x N, each row sums to 1 over j != i
  Vector sigma;        // per-point bandwidths σ_i
};

/**
 * Calibrates per-point bandwidths σ_i so the Shannon entropy of each row of
 * w_{j|i} = exp(-D²_ij / (2σ_i)) / Σ_{r≠i} exp(-D²_ir / (2σ_i)) matches
 * log(k) to within the tolerance, by bisection on β_i = 1/(2σ_i).
 *
 * `sq_dist` is the full matrix of squared spectral distances.
 */
inline PerplexityCalibration calibrate_perplexity(const Matrix& sq_dist, int k,
                                                  const PerplexityOptions& opts = {}) {
  const Index n = sq_dist.rows();
  if (n < 3) throw ValidationError("perplexity calibration needs at least 3 points");
  if (k < 2 || k >= n)
    throw ValidationError("effective neighbor count must satisfy 2 <= k < N");
  const double log_base = std::log(opts.entropy_base);
  const double target = std::log(static_cast<double>(k)) / log_base;

  PerplexityCalibration out;
  out.row_weights = Matrix::Zero(n, n);
  out.sigma = Vector::Zero(n);

  std::vector<double> p(n);
  for (Index i = 0; i < n; ++i) {
    double beta = 1.0, beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();
    double entropy = 0.0;
    bool done = false;

    for (int it = 0; it < opts.max_iterations && !done; ++it) {
      // shift exponents by the row minimum distance so the largest weight is exp(0)
      double dmin = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < n; ++j)
        if (j != i) dmin = std::min(dmin, sq_dist(i, j));
      double sum = 0.0, weighted_d2 = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) {
          p[j] = 0.0;
          continue;
        }
        p[j] = std::exp(-beta * (sq_dist(i, j) - dmin));
        sum += p[j];
        weighted_d2 += p[j] * (sq_dist(i, j) - dmin);
      }
      // H in nats of the normalized row: log Σ + β·E[d²]; convert to the chosen base
      entropy = (std::log(sum) + beta * weighted_d2 / sum) / log_base;
      for (Index j = 0; j < n; ++j) p[j] /= sum;

      if (std::abs(entropy - target) <= opts.tolerance) {
        done = true;
        break;
      }
      if (entropy > target) {  // too flat: concentrate
        beta_lo = beta;
        beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta_lo + beta_hi);
      } else {  // too peaked: flatten
        beta_hi = beta;
        beta = beta_lo == 0.0 ? beta / 2.0 : 0.5 * (beta_lo + beta_hi);
      }
    }
    if (!done)
      throw NumericError("perplexity calibration failed for point " + std::to_string(i) +
                         ": |H - log k| stayed above tolerance after " +
                         std::to_string(opts.max_iterations) + " iterations");
    out.row_weights.row(i) = Eigen::Map<const Eigen::RowVectorXd>(p.data(), n);
    out.sigma(i) = 1.0 / (2.0 * beta);
  }
  return out;
}

namespace detail {

/// Dense symmetric matrix -> sparse graph weights via w = (W + Wᵀ)/2 over nonzeros.
inline Eigen::SparseMatrix<double> symmetrize_to_sparse(const Matrix& W) {
  const Index n = W.rows();
  std::vector<Eigen::Triplet<double>> trips;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double w = 0.5 * (W(i, j) + W(j, i));
      if (w != 0.0) {
        trips.emplace_back(i, j, w);
        trips.emplace_back(j, i, w);
      }
    }
  }
  Eigen::SparseMatrix<double> out(n, n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace detail

/**
 * Full Gaussian-perplexity graph: calibrate every row at effective neighbor
 * count k, then symmetrize w <- (w + wᵀ)/2.  Rows of the pre-symmetrized
 * matrix sum to 1; the result is dense in structure (exponentials never
 * vanish) — compose with knn_sparsify_and_symmetrize for a k-sparse graph.
 */
inline NeighborhoodGraph gaussian_perplexity_graph(const PixelDataset& data, int k,
                                                   const PerplexityOptions& opts = {}) {
  data.validate();
  const Index n = data.n_pixels();
  Matrix sq_dist(n, n);
  for (Index i = 0; i < n; ++i) {
    sq_dist(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      const double d2 = (data.spectra.row(i) - data.spectra.row(j)).squaredNorm();
      sq_dist(i, j) = d2;
      sq_dist(j, i) = d2;
    }
  }
  PerplexityCalibration cal = calibrate_perplexity(sq_dist, k, opts);

  NeighborhoodGraph g;
  g.weights = detail::symmetrize_to_sparse(cal.row_weights);
  g.k = k;
  g.kind = GraphKind::GaussianPerplexity;
  g.sigma_i = cal.sigma;
  return g;
}

/**
 * Keeps the top-k entries of each row by weight (ties broken toward the lower
 * index), then symmetrizes with (w + wᵀ)/2.  Each row of the result holds the
 * union of its own k survivors and the rows that kept it, so a row has at
 * least k nonzeros (given k positive candidates) and the graph has at most
 * n·k undirected edges; a popular vertex may exceed 2k neighbors.
 */
inline Eigen::SparseMatrix<double> knn_sparsify_and_symmetrize(const Matrix& dense_weights, int k) {
  const Index n = dense_weights.rows();
  if (dense_weights.cols() != n) throw ValidationError("weight matrix must be square");
  if (k < 1) throw ValidationError("k must be at least 1");
  if (k >= n)
    throw ValidationError("k must be smaller than the number of points (" + std::to_string(n) + ")");

  Matrix kept = Matrix::Zero(n, n);
  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return dense_weights(i, a) > dense_weights(i, b);
    });
    int taken = 0;
    for (Index idx : order) {
      if (idx == i) continue;
      if (taken == k) break;
      kept(i, idx) = dense_weights(i, idx);
      ++taken;
    }
  }
  return detail::symmetrize_to_sparse(kept);
}

/// Spatial scale heuristic: median of the pooled k nearest nonzero spatial distances.
inline double auto_sigma_s(const PixelDataset& data, int k) {
  const Index n = data.n_pixels();
  std::vector<double> pool;
  std::vector<double> dist(n);
  for (Index i = 0; i < n; ++i) {
    Index m = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (data.spatial.row(i) - data.spatial.row(j)).norm();
      if (d > 0.0) dist[m++] = d;
    }
    const Index take = std::min<Index>(k, m);
    std::partial_sort(dist.begin(), dist.begin() + take, dist.begin() + m);
    pool.insert(pool.end(), dist.begin(), dist.begin() + take);
  }
  if (pool.empty()) throw ValidationError("cannot infer a spatial scale: all pixels coincide");
  std::nth_element(pool.begin(), pool.begin() + pool.size() / 2, pool.end());
  return pool[pool.size() / 2];
}

/// One bilateral affinity: spatial Gaussian times the Mahalanobis photometric weight.
inline double bilateral_weight(const Eigen::RowVector2d& s_i, const Eigen::RowVector2d& s_j,
                               const Vector& y_i, const Vector& y_j, double sigma_s,
                               const CovarianceModel& cov) {
  if (!(sigma_s > 0.0)) throw ValidationError("sigma_s must be positive");
  const double spatial = std::exp(-(s_i - s_j).squaredNorm() / (sigma_s * sigma_s));
  return spatial * photometric_weight(y_i, y_j, cov);
}

/**
 * Bilateral graph: affinities evaluated for pairs within a 3σ_s spatial window,
 * completed with each point's k nearest spectral neighbors (so spatially
 * isolated pixels still get edges), then top-k sparsified and symmetrized.
 *
 * Pass sigma_s <= 0 to resolve it from the data via auto_sigma_s.
 */
inline NeighborhoodGraph bilateral_graph(const PixelDataset& data, int k, double sigma_s,
                                         const CovarianceModel& cov) {
  data.validate();
  const Index n = data.n_pixels();
  if (k < 1 || k >= n) throw ValidationError("bilateral graph needs 1 <= k < N");
  if (sigma_s <= 0.0) sigma_s = auto_sigma_s(data, k);

  const double window = 3.0 * sigma_s;
  Matrix W = Matrix::Zero(n, n);
  auto eval_pair = [&](Index i, Index j) {
    if (W(i, j) != 0.0) return;
    const double w = bilateral_weight(data.spatial.row(i), data.spatial.row(j),
                                      data.spectra.row(i).transpose(),
                                      data.spectra.row(j).transpose(), sigma_s, cov);
    W(i, j) = w;
    W(j, i) = w;
  };

  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if ((data.spatial.row(i) - data.spatial.row(j)).norm() <= window) eval_pair(i, j);

  // spectral kNN completion
  std::vector<Index> order(n);
  Vector d2(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j)
      d2(j) = (data.spectra.row(j) - data.spectra.row(i)).squaredNorm();
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return d2(a) < d2(b); });
    int taken = 0;
    for (Index idx : order) {
      if (idx == i) continue;
      if (taken == k) break;
      eval_pair(std::min(i, idx), std::max(i, idx));
      ++taken;
    }
  }

  NeighborhoodGraph g;
  g.weights = knn_sparsify_and_symmetrize(W, k);
  g.k = k;
  g.kind = GraphKind::Bilateral;
  g.sigma_s = sigma_s;
  return g;
}

}  // namespace mafe
