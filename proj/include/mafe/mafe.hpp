#pragma once

// Umbrella header: spatial-spectral neighborhood graphs, pair force fields,
// the descent engine, and the evaluation/IO toolkit.

#include "types.hpp"    // IWYU pragma: export
#include "random.hpp"   // IWYU pragma: export
#include "covariance.hpp"  // IWYU pragma: export
#include "pca.hpp"      // IWYU pragma: export
#include "graph.hpp"    // IWYU pragma: export
#include "field.hpp"    // IWYU pragma: export
#include "energy.hpp"   // IWYU pragma: export
#include "engine.hpp"   // IWYU pragma: export
#include "evaluation.hpp"  // IWYU pragma: export
#include "synthetic.hpp"   // IWYU pragma: export
#include "io.hpp"       // IWYU pragma: export
