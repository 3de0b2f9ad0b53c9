#pragma once

#include <cmath>
#include <string>

#include "field.hpp"
#include "graph.hpp"
#include "types.hpp"

namespace mafe {

namespace detail {

inline Matrix dense_weights(const NeighborhoodGraph& g, Index n_expected) {
  if (g.n() != n_expected)
    throw ValidationError("graph size (" + std::to_string(g.n()) +
                          ") does not match the embedding row count (" +
                          std::to_string(n_expected) + ")");
  return Matrix(g.weights);
}

/// Row-stochastic kernels ŵ_ij = k(d_ij) / Σ_{r≠i} k(d_ir) for the coupled families.
/// The exponential rows are shifted by the row-minimum distance so the
/// normalizer never underflows.
inline Matrix normalized_kernel_rows(const Matrix& Z, FieldFamily family) {
  const Index n = Z.rows();
  Matrix d2(n, n);
  for (Index i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      const double v = (Z.row(i) - Z.row(j)).squaredNorm();
      d2(i, j) = v;
      d2(j, i) = v;
    }
  }
  Matrix what = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    if (family == FieldFamily::Sne) {
      double m = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < n; ++j)
        if (j != i) m = std::min(m, d2(i, j));
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        what(i, j) = std::exp(-(d2(i, j) - m));
        sum += what(i, j);
      }
    } else {  // Tsne
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        what(i, j) = 1.0 / (1.0 + d2(i, j));
        sum += what(i, j);
      }
    }
    what.row(i) /= sum;
  }
  return what;
}

}  // namespace detail

/**
 * Total field energy of the embedding Z under graph weights w:
 *
 *   MAFE families:  U = Σ_i Σ_{j≠i} { w_ij·u_att(d_ij) + u_rep(d_ij) }
 *   Sne:            U = Σ_i Σ_{j≠i} w_ij·d_ij²        + ξ_r·Σ_i log Σ_{r≠i} e^{−d_ir²}
 *   Tsne:           U = Σ_i Σ_{j≠i} w_ij·log(1+d_ij²) + ξ_r·Σ_i log Σ_{r≠i} (1+d_ir²)^{−1}
 *   Le:             U = Σ_i Σ_{j≠i} w_ij·d_ij²
 *
 * The sum runs over ordered pairs, so each unordered pair counts twice; the
 * log-sum terms are evaluated in shifted form so distant configurations do not
 * underflow to log 0.
 */
inline double total_energy(const Matrix& Z, const NeighborhoodGraph& graph, const FieldModel& field) {
  if (!Z.allFinite()) throw NumericError("non-finite coordinates in total_energy");
  field.validate();
  const Index n = Z.rows();
  const Matrix W = detail::dense_weights(graph, n);

  double e = 0.0;
  const bool coupled = field.family == FieldFamily::Sne || field.family == FieldFamily::Tsne;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d = (Z.row(i) - Z.row(j)).norm();
      e += (W(i, j) + W(j, i)) * signed_attraction_energy(d, field);
      if (!coupled) e += 2.0 * repulsion_energy(d, field);
    }
  }
  if (coupled && field.xi_r != 0.0) {
    for (Index i = 0; i < n; ++i) {
      if (field.family == FieldFamily::Sne) {
        double m = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < n; ++j)
          if (j != i) m = std::min(m, (Z.row(i) - Z.row(j)).squaredNorm());
        double s = 0.0;
        for (Index j = 0; j < n; ++j)
          if (j != i) s += std::exp(-((Z.row(i) - Z.row(j)).squaredNorm() - m));
        e += field.xi_r * (std::log(s) - m);
      } else {
        double s = 0.0;
        for (Index j = 0; j < n; ++j)
          if (j != i) s += 1.0 / (1.0 + (Z.row(i) - Z.row(j)).squaredNorm());
        e += field.xi_r * std::log(s);
      }
    }
  }
  return e;
}

/**
 * Exact analytic gradient of total_energy.  For the MAFE families row i is
 *
 *   ∇_i U = Σ_{j≠i} { w_ij·F_a(d_ij) − F_r(d_ij) }·Δ_ij  =  −Σ_{j≠i} pair_force(z_i, z_j, w_ij)
 *
 * (the radial coefficients carry the ordered-pair factor 2).  The coupled
 * families differentiate the log-sum exactly, which brings in the row- and
 * column-normalized kernels ŵ_ij + ŵ_ji.
 */
inline Matrix total_gradient(const Matrix& Z, const NeighborhoodGraph& graph, const FieldModel& field) {
  if (!Z.allFinite()) throw NumericError("non-finite coordinates in total_gradient");
  field.validate();
  const Index n = Z.rows();
  const Matrix W = detail::dense_weights(graph, n);
  Matrix G = Matrix::Zero(n, Z.cols());

  switch (field.family) {
    case FieldFamily::MafeBr:
    case FieldFamily::MafeUr:
    case FieldFamily::Mafee:
    case FieldFamily::Mafeh: {
      for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
          const Eigen::RowVectorXd delta = Z.row(i) - Z.row(j);
          const double d = delta.norm();
          const double w = 0.5 * (W(i, j) + W(j, i));
          const double coeff =
              w * attraction_force_coeff(d, field) - repulsion_force_coeff(d, field);
          G.row(i) += coeff * delta;
          G.row(j) -= coeff * delta;
        }
      }
      break;
    }
    case FieldFamily::Sne:
    case FieldFamily::Tsne: {
      const Matrix what = detail::normalized_kernel_rows(Z, field.family);
      for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
          const Eigen::RowVectorXd delta = Z.row(i) - Z.row(j);
          const double attract = W(i, j) + W(j, i);
          const double repel = field.xi_r * (what(i, j) + what(j, i));
          double coeff = 2.0 * (attract - repel);
          if (field.family == FieldFamily::Tsne) coeff /= 1.0 + delta.squaredNorm();
          G.row(i) += coeff * delta;
          G.row(j) -= coeff * delta;
        }
      }
      break;
    }
    case FieldFamily::Le: {
      for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
          const Eigen::RowVectorXd delta = Z.row(i) - Z.row(j);
          const double coeff = 2.0 * (W(i, j) + W(j, i));
          G.row(i) += coeff * delta;
          G.row(j) -= coeff * delta;
        }
      }
      break;
    }
  }
  return G;
}

enum class EmbeddingWeightKind { Probabilistic, LearnedBoundedRepulsion, LearnedUnboundedRepulsion };

/// Dense N x N pairwise weights defined on the embedding itself.
struct EmbeddingGraphWeights {
  Matrix values;
  EmbeddingWeightKind kind = EmbeddingWeightKind::Probabilistic;
};

/**
 * Row-stochastic neighbor distributions induced by the embedding:
 * ŵ_ij = k(d_ij) / Σ_{r≠i} k(d_ir) with k = exp(−d²) (Sne) or (1+d²)^{−1} (Tsne).
 */
inline EmbeddingGraphWeights probabilistic_embedding_weights(const Matrix& Z, FieldFamily family) {
  if (family != FieldFamily::Sne && family != FieldFamily::Tsne)
    throw ValidationError("probabilistic embedding weights are defined for sne and tsne");
  if (Z.rows() < 2) throw ValidationError("need at least 2 points");
  if (!Z.allFinite()) throw NumericError("non-finite coordinates");
  EmbeddingGraphWeights out;
  out.values = detail::normalized_kernel_rows(Z, family);
  out.kind = EmbeddingWeightKind::Probabilistic;
  return out;
}

/**
 * Signed per-pair weights combining the input graph with the current layout:
 *
 *   bounded repulsion (p=q=2):    w̃_ij = ξ_a·w_ij − ξ_r·e^{−d_ij²/σ}
 *   unbounded repulsion (p=2):    w̃_ij = ξ_a·w_ij − ξ_r / d_ij⁴
 *
 * Positive entries pull the pair together, negative push apart.
 */
inline EmbeddingGraphWeights learned_embedding_weights(const Matrix& Z,
                                                       const NeighborhoodGraph& graph,
                                                       const FieldModel& field) {
  field.validate();
  const Index n = Z.rows();
  const Matrix W = detail::dense_weights(graph, n);
  if (!Z.allFinite()) throw NumericError("non-finite coordinates");

  EmbeddingGraphWeights out;
  if (field.family == FieldFamily::MafeBr) {
    if (field.p != 2.0 || field.q != 2.0)
      throw ValidationError("learned bounded-repulsion weights require p = q = 2");
    out.kind = EmbeddingWeightKind::LearnedBoundedRepulsion;
  } else if (field.family == FieldFamily::MafeUr) {
    if (field.p != 2.0)
      throw ValidationError("learned unbounded-repulsion weights require p = 2");
    out.kind = EmbeddingWeightKind::LearnedUnboundedRepulsion;
  } else {
    throw ValidationError("learned weights are defined for the mafe-br and mafe-ur families");
  }

  out.values = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d = detail::floored((Z.row(i) - Z.row(j)).norm());
      double v;
      if (out.kind == EmbeddingWeightKind::LearnedBoundedRepulsion)
        v = field.xi_a * W(i, j) - field.xi_r * std::exp(-d * d / field.sigma);
      else
        v = field.xi_a * W(i, j) - field.xi_r / (d * d * d * d);
      out.values(i, j) = v;
      out.values(j, i) = v;
    }
  }
  return out;
}

}  // namespace mafe
