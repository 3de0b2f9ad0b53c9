#pragma once

#include <Eigen/Eigenvalues>

#include <string>

#include "covariance.hpp"
#include "types.hpp"

namespace mafe {

/**
 * Projects the spectra onto the top `target_dim` principal directions of the
 * sample covariance (centered first).  Spatial coordinates and labels pass
 * through untouched.  Components are ordered by descending variance.
 */
inline PixelDataset pca_reduce(const PixelDataset& data, Index target_dim) {
  data.validate();
  const Index d = data.n_bands();
  if (target_dim < 1 || target_dim > d)
    throw ValidationError("pca target dimension must be in [1, " + std::to_string(d) + "]");
  if (data.n_pixels() < 2) throw ValidationError("pca needs at least 2 pixels");

  Eigen::RowVectorXd mean = data.spectra.colwise().mean();
  Matrix centered = data.spectra.rowwise() - mean;
  Matrix S = (centered.transpose() * centered) / static_cast<double>(data.n_pixels());

  const double mean_sq = data.spectra.array().square().mean();
  if (S.trace() <= 1e-20 * (1.0 + mean_sq))
    throw ValidationError("zero variance: all spectra are identical");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed in pca");

  // SelfAdjointEigenSolver sorts ascending; take the last target_dim columns reversed
  Matrix proj(d, target_dim);
  for (Index c = 0; c < target_dim; ++c) proj.col(c) = eig.eigenvectors().col(d - 1 - c);

  PixelDataset out;
  out.spatial = data.spatial;
  out.labels = data.labels;
  out.spectra = centered * proj;
  return out;
}

}  // namespace mafe
