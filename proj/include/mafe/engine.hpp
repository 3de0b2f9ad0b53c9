#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "energy.hpp"
#include "field.hpp"
#include "graph.hpp"
#include "random.hpp"
#include "types.hpp"

namespace mafe {

struct EngineConfig {
  Index dim = 2;                 // embedding dimension m
  double alpha0 = 0.1;           // initial learning rate
  double alpha_min = 1e-6;       // learning-rate clamp
  double alpha_max = 1.0;
  double gamma1 = 1e-4;          // weight of <g_{t-1}, g_t>
  double gamma2 = 1e-5;          // weight of <g_{t-2}, g_{t-1}>
  double eps = 1e-5;             // gradient-norm termination threshold
  int max_iter = 1000;
  std::uint64_t seed = 0;
  int snapshot_every = 0;        // 0 = auto: 1 when N <= 100, else 10
  bool backtracking = true;      // halve an energy-increasing step, up to max_halvings
  int max_halvings = 20;
  double init_stddev = std::sqrt(50.0);  // coordinates start as N(0, 50·I)
  double divergence_factor = 1e12;
  std::optional<Matrix> initial; // overrides random initialization when set

  void validate(Index n_points) const {
    if (dim < 1) throw ValidationError("embedding dimension must be at least 1");
    if (!(alpha0 > 0.0) || !(alpha_min > 0.0) || !(alpha_max >= alpha_min))
      throw ValidationError("learning-rate bounds must satisfy 0 < alpha_min <= alpha_max");
    if (!(eps > 0.0)) throw ValidationError("termination threshold eps must be positive");
    if (max_iter < 0) throw ValidationError("max_iter must be non-negative");
    if (initial && (initial->rows() != n_points || initial->cols() != dim))
      throw ValidationError("initial coordinates must be N x dim");
  }
};

enum class StopReason { GradientConverged, MaxIterations };

inline const char* stop_reason_name(StopReason r) {
  return r == StopReason::GradientConverged ? "gradient_converged" : "max_iterations";
}

struct Snapshot {
  int t = 0;
  Matrix Z;
  double energy = 0.0;
  double grad_norm = 0.0;
  double alpha = 0.0;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
};

/// Iterate of the descent: current coordinates plus the last two computed gradients.
struct EmbeddingState {
  Matrix Z;
  double alpha = 0.1;
  Matrix grad_t;   // gradient at the previous iterate (zero before any step)
  Matrix grad_t1;  // gradient one step before that
  int t = 0;
  double energy = 0.0;  // energy at Z
  EngineConfig cfg;
};

struct RunResult {
  Matrix Z;
  Trajectory trajectory;
  StopReason reason = StopReason::MaxIterations;
  int iterations = 0;
};

/// Draws the initial coordinates: each of the N points i.i.d. N(0, 50·I_m).
inline Matrix init_embedding(Index n, Index m, std::uint64_t seed,
                             double stddev = std::sqrt(50.0)) {
  if (n < 1 || m < 1) throw ValidationError("embedding needs n >= 1 points and m >= 1 dimensions");
  return sample_normal_matrix(n, m, stddev, seed);
}

/**
 * One-step learning-rate adaptation
 *   α' = clamp( α + γ₁·⟨g_{t−1}, g_t⟩ + γ₂·⟨g_{t−2}, g_{t−1}⟩ , [alpha_min, alpha_max] )
 * with Frobenius inner products over the full gradient matrices.  Aligned
 * successive gradients grow the rate, opposed ones shrink it.
 */
inline double adapt_learning_rate(double alpha, const Matrix& g_t, const Matrix& g_t1,
                                  const Matrix& g_t2, double gamma1, double gamma2,
                                  double alpha_min = 1e-6, double alpha_max = 1.0) {
  if (g_t.rows() != g_t1.rows() || g_t.cols() != g_t1.cols() || g_t.rows() != g_t2.rows() ||
      g_t.cols() != g_t2.cols())
    throw ValidationError("gradient history matrices must share one shape");
  const double a = alpha + gamma1 * (g_t1.array() * g_t.array()).sum() +
                   gamma2 * (g_t2.array() * g_t1.array()).sum();
  return std::clamp(a, alpha_min, alpha_max);
}

namespace detail {

/// Z − α·g with the descent guard: halve the step while the energy increases,
/// up to max_halvings; if no non-increasing step is found, keep Z unchanged.
struct GuardedStep {
  Matrix Z;
  double energy;
  int halvings;
};

inline GuardedStep descend(const Matrix& Z, double energy, const Matrix& g, double alpha,
                           const NeighborhoodGraph& graph, const FieldModel& field,
                           bool backtracking, int max_halvings) {
  double step = alpha;
  Matrix cand = Z - step * g;
  double cand_energy = total_energy(cand, graph, field);
  if (!backtracking) return {std::move(cand), cand_energy, 0};

  int halvings = 0;
  while (cand_energy > energy && halvings < max_halvings) {
    step *= 0.5;
    ++halvings;
    cand = Z - step * g;
    cand_energy = total_energy(cand, graph, field);
  }
  if (cand_energy > energy) return {Z, energy, halvings};  // guard exhausted: hold position
  return {std::move(cand), cand_energy, halvings};
}

}  // namespace detail

/// State for iteration 0: sampled (or supplied) coordinates, empty gradient history.
inline EmbeddingState make_initial_state(const NeighborhoodGraph& graph, const FieldModel& field,
                                         const EngineConfig& cfg) {
  cfg.validate(graph.n());
  field.validate();
  EmbeddingState s;
  s.cfg = cfg;
  s.Z = cfg.initial ? *cfg.initial : init_embedding(graph.n(), cfg.dim, cfg.seed, cfg.init_stddev);
  s.alpha = cfg.alpha0;
  s.grad_t = Matrix::Zero(s.Z.rows(), s.Z.cols());
  s.grad_t1 = Matrix::Zero(s.Z.rows(), s.Z.cols());
  s.t = 0;
  s.energy = total_energy(s.Z, graph, field);
  return s;
}

/**
 * One descent iteration: evaluate g = ∇U(Z), move against it under the guard,
 * shift the gradient history, and adapt the learning rate from the three most
 * recent gradients.  A zero gradient leaves Z (and α) unchanged.
 */
inline EmbeddingState step(const EmbeddingState& state, const NeighborhoodGraph& graph,
                           const FieldModel& field) {
  const Matrix g = total_gradient(state.Z, graph, field);
  if (!g.allFinite()) throw NumericError("diverged at iteration " + std::to_string(state.t));

  detail::GuardedStep moved = detail::descend(state.Z, state.energy, g, state.alpha, graph, field,
                                              state.cfg.backtracking, state.cfg.max_halvings);

  EmbeddingState next;
  next.cfg = state.cfg;
  next.Z = std::move(moved.Z);
  next.energy = moved.energy;
  next.alpha = adapt_learning_rate(state.alpha, g, state.grad_t, state.grad_t1, state.cfg.gamma1,
                                   state.cfg.gamma2, state.cfg.alpha_min, state.cfg.alpha_max);
  next.grad_t = g;
  next.grad_t1 = state.grad_t;
  next.t = state.t + 1;
  return next;
}

/**
 * Full descent: iterate step() from a fresh initial state until ‖∇U‖ ≤ eps or
 * max_iter, recording snapshots at the configured cadence (iteration 0 and the
 * final iterate are always recorded).  Throws "diverged" when the energy
 * exceeds divergence_factor × max(|U₀|, 1) or stops being finite.
 */
inline RunResult run(const NeighborhoodGraph& graph, const FieldModel& field,
                     const EngineConfig& cfg) {
  const int cadence = cfg.snapshot_every > 0 ? cfg.snapshot_every : (graph.n() <= 100 ? 1 : 10);

  EmbeddingState state = make_initial_state(graph, field, cfg);
  const double diverge_at = cfg.divergence_factor * std::max(std::abs(state.energy), 1.0);

  Matrix g = total_gradient(state.Z, graph, field);
  double gnorm = g.norm();

  RunResult res;
  res.trajectory.snapshots.push_back({0, state.Z, state.energy, gnorm, state.alpha});

  StopReason reason = StopReason::MaxIterations;
  while (true) {
    if (gnorm <= cfg.eps) {
      reason = StopReason::GradientConverged;
      break;
    }
    if (state.t >= cfg.max_iter) break;

    // reuse g: advance manually instead of recomputing inside step()
    detail::GuardedStep moved = detail::descend(state.Z, state.energy, g, state.alpha, graph,
                                                field, cfg.backtracking, cfg.max_halvings);
    const double new_alpha =
        adapt_learning_rate(state.alpha, g, state.grad_t, state.grad_t1, cfg.gamma1, cfg.gamma2,
                            cfg.alpha_min, cfg.alpha_max);
    state.grad_t1 = std::move(state.grad_t);
    state.grad_t = std::move(g);
    state.Z = std::move(moved.Z);
    state.energy = moved.energy;
    state.alpha = new_alpha;
    state.t += 1;

    if (!std::isfinite(state.energy) || state.energy > diverge_at)
      throw NumericError("diverged at iteration " + std::to_string(state.t));

    g = total_gradient(state.Z, graph, field);
    if (!g.allFinite()) throw NumericError("diverged at iteration " + std::to_string(state.t));
    gnorm = g.norm();

    if (state.t % cadence == 0)
      res.trajectory.snapshots.push_back({state.t, state.Z, state.energy, gnorm, state.alpha});
  }

  if (res.trajectory.snapshots.back().t != state.t)
    res.trajectory.snapshots.push_back({state.t, state.Z, state.energy, gnorm, state.alpha});

  res.Z = std::move(state.Z);
  res.reason = reason;
  res.iterations = state.t;
  return res;
}

}  // namespace mafe
