#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "random.hpp"
#include "types.hpp"

namespace mafe {

enum class SyntheticLayout { Blocks, Checker };

inline SyntheticLayout layout_from_name(const std::string& s) {
  if (s == "blocks") return SyntheticLayout::Blocks;
  if (s == "checker") return SyntheticLayout::Checker;
  throw ValidationError("unknown layout: " + s + " (expected blocks or checker)");
}

/**
 * Labeled toy scene: each class gets a prototype spectrum drawn once from
 * N(0, I_bands), and each pixel is that prototype under an illumination-style
 * gain, (1 + N(0, noise²)) · prototype.  Within-class variation is therefore
 * low-rank (along the material spectrum), the regime photometric Mahalanobis
 * weighting is designed for — isotropic per-band noise would concentrate every
 * whitened same-class distance near 2·bands and flatten the kernel.
 *
 *   blocks:  class c fills one contiguous ⌈√per_class⌉-wide rectangle, the
 *            rectangles laid left to right with a 3-pixel gutter
 *   checker: classes interleave on a checkerboard of same-size cells — cell
 *            (a, b) holds pixels of class (a + b) mod C
 *
 * Pixels are stored class-major and the draw order (prototypes, then gains) is
 * fixed, so equal seeds give byte-equal datasets regardless of layout.
 */
inline PixelDataset generate_synthetic(int classes, int per_class, int bands,
                                       SyntheticLayout layout, double noise,
                                       std::uint64_t seed) {
  if (classes < 2) throw ValidationError("need at least 2 classes");
  if (per_class < 1) throw ValidationError("need at least 1 pixel per class");
  if (bands < 1) throw ValidationError("need at least 1 band");
  if (noise < 0.0) throw ValidationError("noise must be non-negative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix prototypes(classes, bands);
  for (int c = 0; c < classes; ++c)
    for (int b = 0; b < bands; ++b) prototypes(c, b) = normal(rng);

  const Index n = static_cast<Index>(classes) * per_class;
  PixelDataset out;
  out.spatial.resize(n, 2);
  out.spectra.resize(n, bands);
  out.labels.resize(n);

  for (int c = 0; c < classes; ++c) {
    for (int t = 0; t < per_class; ++t) {
      const Index idx = static_cast<Index>(c) * per_class + t;
      out.labels[idx] = c + 1;
      const double gain = 1.0 + (noise > 0.0 ? noise * normal(rng) : 0.0);
      for (int b = 0; b < bands; ++b) out.spectra(idx, b) = gain * prototypes(c, b);
    }
  }

  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(per_class))));
  const int pitch = side + 3;  // cell size plus gutter

  if (layout == SyntheticLayout::Blocks) {
    for (int c = 0; c < classes; ++c)
      for (int t = 0; t < per_class; ++t) {
        const Index idx = static_cast<Index>(c) * per_class + t;
        out.spatial(idx, 0) = t / side;
        out.spatial(idx, 1) = c * pitch + t % side;
      }
  } else {
    // walk checkerboard cells row-major; cell (a, b) takes the next chunk of
    // class (a + b) mod C.  Cells are half the block side so each class spans
    // several interleaved cells instead of one contiguous rectangle.
    const int cside = std::max(1, (side + 1) / 2);
    const int cpitch = cside + 3;
    std::vector<int> placed(classes, 0);
    Index left = n;
    for (int a = 0; left > 0; ++a) {
      for (int b = 0; b < classes && left > 0; ++b) {
        const int c = (a + b) % classes;
        const int take = std::min(per_class - placed[c], cside * cside);
        for (int t = 0; t < take; ++t) {
          const Index idx = static_cast<Index>(c) * per_class + placed[c] + t;
          out.spatial(idx, 0) = a * cpitch + t / cside;
          out.spatial(idx, 1) = b * cpitch + t % cside;
        }
        placed[c] += take;
        left -= take;
      }
    }
  }

  return out;
}

}  // namespace mafe
