#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mafe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Bad inputs or configuration, detected before any real work starts.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation failed numerically (divergence, failed calibration, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * A scene of N pixels: integer-valued spatial coordinates (row, col) stored as
 * doubles, a d-band spectrum per pixel, and optional class labels.
 *
 * Labels, when present, must form the contiguous set {1, ..., C}.
 */
struct PixelDataset {
  Matrix spatial;            // N x 2, (row, col)
  Matrix spectra;            // N x d
  std::vector<int> labels;   // empty, or size N with values in {1..C}

  Index n_pixels() const { return spectra.rows(); }
  Index n_bands() const { return spectra.cols(); }
  bool has_labels() const { return !labels.empty(); }

  int n_classes() const {
    int c = 0;
    for (int v : labels) c = std::max(c, v);
    return c;
  }

  void validate() const {
    if (spectra.rows() == 0 || spectra.cols() == 0)
      throw ValidationError("dataset is empty");
    if (spatial.rows() != spectra.rows() || spatial.cols() != 2)
      throw ValidationError("spatial coordinates must be N x 2 and match the spectra row count");
    if (!spectra.allFinite() || !spatial.allFinite())
      throw ValidationError("dataset contains non-finite values");
    if (!labels.empty()) {
      if (static_cast<Index>(labels.size()) != spectra.rows())
        throw ValidationError("label count does not match pixel count");
      std::set<int> distinct(labels.begin(), labels.end());
      int expect = 1;
      for (int v : distinct) {
        if (v != expect)
          throw ValidationError("labels must form the contiguous set {1..C}; found gap at " +
                                std::to_string(expect));
        ++expect;
      }
    }
  }
};

}  // namespace mafe
