#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mafe/engine.hpp"
#include "mafe/graph.hpp"
#include "mafe/random.hpp"
#include "mafe/synthetic.hpp"
#include "oracles.hpp"

using namespace mafe;

namespace {

NeighborhoodGraph complete_graph(Index n, double w = 1.0) {
  NeighborhoodGraph g;
  std::vector<Eigen::Triplet<double>> trips;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) trips.emplace_back(i, j, w);
  g.weights.resize(n, n);
  g.weights.setFromTriplets(trips.begin(), trips.end());
  g.k = static_cast<int>(n) - 1;
  return g;
}

NeighborhoodGraph toy_graph(std::uint64_t seed) {
  const PixelDataset d = generate_synthetic(3, 5, 6, SyntheticLayout::Blocks, 0.05, seed);
  const CovarianceModel cov = smt_estimate(sample_covariance(d.spectra), smt_default_rotations(6));
  return bilateral_graph(d, 4, -1.0, cov);
}

}  // namespace

TEST_CASE("initial embedding is reproducible and has the advertised spread") {
  const Matrix a = init_embedding(10000, 2, 42);
  const Matrix b = init_embedding(10000, 2, 42);
  REQUIRE((a - b).cwiseAbs().maxCoeff() == 0.0);
  const Matrix c = init_embedding(10000, 2, 43);
  REQUIRE((a - c).cwiseAbs().maxCoeff() != 0.0);
  // per-coordinate variance should sit near 50
  const double var = a.array().square().mean();
  REQUIRE(var > 40.0);
  REQUIRE(var < 60.0);
  REQUIRE(a.rows() == 10000);
  REQUIRE(a.cols() == 2);
}

TEST_CASE("learning-rate adaptation follows the two inner products") {
  const Matrix z = Matrix::Zero(3, 2);
  SECTION("empty history leaves the rate unchanged") {
    REQUIRE(adapt_learning_rate(0.1, Matrix::Ones(3, 2), z, z, 1e-4, 1e-5) == 0.1);
  }
  SECTION("aligned gradients grow the rate by gamma1 * <g,g>") {
    const Matrix g = Matrix::Ones(3, 2);
    const double got = adapt_learning_rate(0.1, g, g, z, 1e-4, 1e-5);
    REQUIRE(got == Catch::Approx(0.1 + 1e-4 * 6.0).epsilon(1e-14));
  }
  SECTION("both history slots contribute with their own coefficients") {
    const Matrix g = 2.0 * Matrix::Ones(2, 2);
    const double got = adapt_learning_rate(0.5, g, g, g, 1e-4, 1e-5);
    REQUIRE(got == Catch::Approx(0.5 + (1e-4 + 1e-5) * 16.0).epsilon(1e-14));
  }
  SECTION("opposed gradients clamp at the lower bound") {
    const Matrix g = 100.0 * Matrix::Ones(3, 2);
    REQUIRE(adapt_learning_rate(1e-4, -g, g, z, 1e-4, 1e-5) == 1e-6);
  }
  SECTION("growth clamps at the upper bound") {
    const Matrix g = 100.0 * Matrix::Ones(3, 2);
    REQUIRE(adapt_learning_rate(0.9, g, g, g, 1e-4, 1e-5) == 1.0);
  }
  SECTION("shape mismatch is rejected") {
    REQUIRE_THROWS_AS(adapt_learning_rate(0.1, Matrix::Ones(3, 2), Matrix::Ones(2, 2), z, 1, 1),
                      ValidationError);
  }
}

TEST_CASE("a zero-gradient state does not move") {
  // two points with zero weight at the balance of... simplest: zero field
  FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  f.xi_a = 0.0;
  f.xi_r = 0.0;
  const NeighborhoodGraph g = complete_graph(3);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.seed = 7;
  EmbeddingState s = make_initial_state(g, f, cfg);
  const Matrix before = s.Z;
  s = step(s, g, f);
  REQUIRE((s.Z - before).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(s.alpha == cfg.alpha0);
  REQUIRE(s.t == 1);
}

TEST_CASE("a pure-attraction step moves the pair closer") {
  FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  f.xi_r = 0.0;
  const NeighborhoodGraph g = complete_graph(2);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.initial = Matrix(2, 2);
  (*cfg.initial) << 0.0, 0.0, 3.0, 0.0;
  EmbeddingState s = make_initial_state(g, f, cfg);
  const double before = (s.Z.row(0) - s.Z.row(1)).norm();
  s = step(s, g, f);
  const double after = (s.Z.row(0) - s.Z.row(1)).norm();
  REQUIRE(after < before);
}

TEST_CASE("step and run produce identical iterates") {
  const NeighborhoodGraph g = toy_graph(11);
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.seed = 31;
  cfg.max_iter = 25;
  cfg.snapshot_every = 1;
  cfg.eps = 1e-300;  // keep both paths running the full 25 iterations

  EmbeddingState s = make_initial_state(g, f, cfg);
  for (int t = 0; t < 25; ++t) s = step(s, g, f);

  const RunResult r = run(g, f, cfg);
  REQUIRE(r.trajectory.snapshots.size() == 26);
  REQUIRE((r.trajectory.snapshots.back().Z - s.Z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("recorded energy is non-increasing, checked with the independent oracle") {
  const NeighborhoodGraph g = toy_graph(13);
  const Matrix W(g.weights);
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.seed = 5;
  cfg.max_iter = 120;
  cfg.snapshot_every = 1;
  const RunResult r = run(g, f, cfg);
  double prev = 1e300;
  for (const Snapshot& s : r.trajectory.snapshots) {
    const double e = oracle::energy(s.Z, W, f);
    REQUIRE(e <= prev * (1.0 + 1e-12) + 1e-12);
    REQUIRE(e == Catch::Approx(s.energy).epsilon(1e-10));
    prev = e;
  }
}

TEST_CASE("trajectory bookkeeping: cadence, monotone iterations, final state") {
  const NeighborhoodGraph g = toy_graph(17);
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.seed = 3;
  cfg.max_iter = 47;
  cfg.snapshot_every = 10;
  cfg.eps = 1e-14;  // force the full iteration budget
  const RunResult r = run(g, f, cfg);
  REQUIRE(r.reason == StopReason::MaxIterations);
  REQUIRE(r.iterations == 47);
  int prev = -1;
  for (const Snapshot& s : r.trajectory.snapshots) {
    REQUIRE(s.t > prev);
    prev = s.t;
    REQUIRE(s.alpha >= cfg.alpha_min);
    REQUIRE(s.alpha <= cfg.alpha_max);
  }
  REQUIRE(r.trajectory.snapshots.front().t == 0);
  REQUIRE(r.trajectory.snapshots.back().t == 47);
  REQUIRE((r.trajectory.snapshots.back().Z - r.Z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("descent terminates below the gradient threshold") {
  // A unit clique under unbounded repulsion has an equilibrium with O(1)
  // curvature, so the gradient threshold is reachable quickly.
  const NeighborhoodGraph g = complete_graph(3);
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeUr);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.seed = 8;
  cfg.max_iter = 20000;
  const RunResult r = run(g, f, cfg);
  REQUIRE(r.reason == StopReason::GradientConverged);
  REQUIRE(r.iterations < cfg.max_iter);
  const Matrix grad = total_gradient(r.Z, g, f);
  REQUIRE(grad.norm() <= 1e-5);
}

TEST_CASE("an already-converged input returns immediately with one snapshot") {
  FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  f.xi_a = 0.0;
  f.xi_r = 0.0;
  const NeighborhoodGraph g = complete_graph(4);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.seed = 12;
  const RunResult r = run(g, f, cfg);
  REQUIRE(r.reason == StopReason::GradientConverged);
  REQUIRE(r.iterations == 0);
  REQUIRE(r.trajectory.snapshots.size() == 1);
}

TEST_CASE("identical configurations give bit-identical trajectories") {
  const NeighborhoodGraph g = toy_graph(23);
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeUr);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.seed = 99;
  cfg.max_iter = 40;
  cfg.snapshot_every = 1;
  const RunResult a = run(g, f, cfg);
  const RunResult b = run(g, f, cfg);
  REQUIRE(a.trajectory.snapshots.size() == b.trajectory.snapshots.size());
  for (std::size_t i = 0; i < a.trajectory.snapshots.size(); ++i) {
    REQUIRE((a.trajectory.snapshots[i].Z - b.trajectory.snapshots[i].Z).cwiseAbs().maxCoeff() ==
            0.0);
    REQUIRE(a.trajectory.snapshots[i].energy == b.trajectory.snapshots[i].energy);
    REQUIRE(a.trajectory.snapshots[i].alpha == b.trajectory.snapshots[i].alpha);
  }
}

TEST_CASE("the centroid stays put under the symmetric pair forces") {
  const NeighborhoodGraph g = toy_graph(29);
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.seed = 41;
  cfg.max_iter = 200;
  const RunResult r = run(g, f, cfg);
  const Matrix Z0 = init_embedding(g.n(), 2, 41);
  const Eigen::RowVector2d drift = r.Z.colwise().mean() - Z0.colwise().mean();
  REQUIRE(drift.norm() <= 1e-10 * std::max(1.0, r.Z.norm()));
}

TEST_CASE("a reconverged run returns to the same configuration after a tiny nudge") {
  const NeighborhoodGraph g = complete_graph(3);
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeUr);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.seed = 77;
  cfg.max_iter = 20000;
  const RunResult first = run(g, f, cfg);
  REQUIRE(first.reason == StopReason::GradientConverged);

  EngineConfig again = cfg;
  again.initial = first.Z + 1e-8 * sample_normal_matrix(g.n(), 2, 1.0, 1234);
  const RunResult second = run(g, f, again);
  REQUIRE((second.Z - first.Z).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("unbounded repulsion keeps every pair separated at convergence") {
  const NeighborhoodGraph g = toy_graph(37);
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeUr);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.seed = 55;
  cfg.max_iter = 1500;
  const RunResult r = run(g, f, cfg);
  double dmin = 1e300;
  for (Index i = 0; i < r.Z.rows(); ++i)
    for (Index j = i + 1; j < r.Z.rows(); ++j)
      dmin = std::min(dmin, (r.Z.row(i) - r.Z.row(j)).norm());
  REQUIRE(dmin > 10.0 * kDistanceFloor);
  REQUIRE(dmin >= 1e-3);
}

TEST_CASE("runaway steps without the guard raise a divergence error") {
  // α = 1 on a 6-clique of quadratic attraction makes the update map
  // z ← z − 9.6·(z − z̄): an expansion with factor |1 − 9.6| ≈ 8.6 per step.
  const NeighborhoodGraph g = complete_graph(6);
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  EngineConfig cfg;
  cfg.dim = 2;
  cfg.seed = 13;
  cfg.backtracking = false;
  cfg.alpha0 = 1.0;
  cfg.alpha_min = 1.0;  // pin the rate at the destructive value
  cfg.alpha_max = 1.0;
  cfg.max_iter = 50;
  REQUIRE_THROWS_AS(run(g, f, cfg), NumericError);
  REQUIRE_THROWS_WITH(run(g, f, cfg), Catch::Matchers::ContainsSubstring("diverged"));
}

TEST_CASE("engine config validation") {
  const NeighborhoodGraph g = complete_graph(3);
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  EngineConfig cfg;
  cfg.dim = 0;
  REQUIRE_THROWS_AS(run(g, f, cfg), ValidationError);
  cfg.dim = 2;
  cfg.initial = Matrix::Zero(2, 2);  // wrong row count
  REQUIRE_THROWS_AS(run(g, f, cfg), ValidationError);
}
