#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mafe/field.hpp"
#include "mafe/random.hpp"
#include "oracles.hpp"

using namespace mafe;

TEST_CASE("attraction energy of the quadratic families") {
  FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  f.xi_a = 1.0;
  f.p = 2.0;
  REQUIRE(attraction_energy(2.0, f) == Catch::Approx(4.0));   // ξ_a d^p = 4
  REQUIRE(attraction_energy(0.0, f) == 0.0);
  f.p = 1.0;
  f.xi_a = 0.03;
  REQUIRE(attraction_energy(3.0, f) == Catch::Approx(0.09));  // linear well
}

TEST_CASE("bounded repulsion energy at the origin and at unit distance") {
  FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);  // ξ_r=1e-4, σ=1, q=2
  REQUIRE(repulsion_energy(0.0, f) == Catch::Approx(f.xi_r * f.sigma));  // ξ_r σ e^0
  REQUIRE(repulsion_energy(1.0, f) == Catch::Approx(f.xi_r * std::exp(-1.0)));
}

TEST_CASE("unbounded repulsion grows without bound but the floor keeps it finite") {
  FieldModel f = FieldModel::defaults(FieldFamily::MafeUr);  // ξ_r=1e-5, q=1
  REQUIRE(repulsion_energy(1e-3, f) == Catch::Approx(1e-2));
  const double at_zero = repulsion_energy(0.0, f);
  REQUIRE(std::isfinite(at_zero));
  REQUIRE(at_zero == Catch::Approx(f.xi_r / 1e-12));  // δ-floored maximum
}

TEST_CASE("repulsion energy is strictly decreasing for every family with repulsion") {
  for (FieldFamily fam : {FieldFamily::MafeBr, FieldFamily::MafeUr, FieldFamily::Mafee,
                          FieldFamily::Mafeh, FieldFamily::Sne, FieldFamily::Tsne}) {
    const FieldModel f = FieldModel::defaults(fam);
    double prev = repulsion_energy(1e-6, f);
    for (double d = 0.1; d <= 5.0; d += 0.1) {
      const double cur = repulsion_energy(d, f);
      REQUIRE(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("gravitational attraction energy reports its magnitude, enters as a well") {
  const FieldModel f = FieldModel::defaults(FieldFamily::Mafeh);  // ξ_a=0.03, p=1
  REQUIRE(attraction_energy(2.0, f) == Catch::Approx(0.015));
  REQUIRE(attraction_energy(2.0, f) >= 0.0);
  REQUIRE(signed_attraction_energy(2.0, f) == Catch::Approx(-0.015));
}

TEST_CASE("zero-magnitude field has zero energies") {
  FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  f.xi_a = 0.0;
  f.xi_r = 0.0;
  REQUIRE(attraction_energy(3.7, f) == 0.0);
  REQUIRE(repulsion_energy(3.7, f) == 0.0);
}

TEST_CASE("pair force is odd under argument swap, exactly") {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::uniform_real_distribution<double> uw(0.0, 1.0);
  for (FieldFamily fam : {FieldFamily::MafeBr, FieldFamily::MafeUr, FieldFamily::Mafee,
                          FieldFamily::Mafeh, FieldFamily::Sne, FieldFamily::Tsne,
                          FieldFamily::Le}) {
    const FieldModel f = FieldModel::defaults(fam);
    for (int trial = 0; trial < 50; ++trial) {
      Vector a(3), b(3);
      for (int c = 0; c < 3; ++c) {
        a(c) = normal(rng);
        b(c) = normal(rng);
      }
      const double w = uw(rng);
      const Vector fab = pair_force(a, b, w, f);
      const Vector fba = pair_force(b, a, w, f);
      for (int c = 0; c < 3; ++c) REQUIRE(fab(c) == -fba(c));
    }
  }
}

TEST_CASE("without repulsion the pair force points from i toward j") {
  FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  f.xi_r = 0.0;
  Vector a(2), b(2);
  a << 1.0, 1.0;
  b << 4.0, 5.0;  // delta = a - b = (-3, -4)
  const Vector force = pair_force(a, b, 0.7, f);
  // pure attraction: force = -w F_a Δ, i.e. positive multiple of (b - a)
  const Vector toward = b - a;
  REQUIRE(force(0) / toward(0) > 0.0);
  REQUIRE(force(0) * toward(1) == Catch::Approx(force(1) * toward(0)).margin(1e-12));
}

TEST_CASE("coincident points with zero weight feel no force") {
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  Vector a(2);
  a << 0.3, -0.7;
  const Vector force = pair_force(a, a, 0.0, f);
  REQUIRE(force.norm() == 0.0);
}

TEST_CASE("pair force vanishes at the balance distance") {
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  const double w = 1e-4;  // bounded repulsion balances only when w ξ_a < ξ_r
  const auto eps = equilibrium_distance(w, f);
  REQUIRE(eps.has_value());
  Vector a = Vector::Zero(2), b = Vector::Zero(2);
  b(0) = *eps;
  const Vector force = pair_force(a, b, w, f);
  REQUIRE(force.norm() <= 1e-12);
}

TEST_CASE("bounded-repulsion equilibrium matches the closed form") {
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  const double w = 1e-4;
  // w ξ_a = ξ_r e^{-d²/σ}  =>  d = sqrt(σ ln(ξ_r / (w ξ_a)))
  const double want = std::sqrt(f.sigma * std::log(f.xi_r / (w * f.xi_a)));
  const auto got = equilibrium_distance(w, f);
  REQUIRE(got.has_value());
  REQUIRE(*got == Catch::Approx(want).margin(1e-9));
}

TEST_CASE("attraction-dominated bounded repulsion has no equilibrium") {
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  // w ξ_a = 0.4 > ξ_r = 1e-4: attraction wins at every distance
  REQUIRE_FALSE(equilibrium_distance(1.0, f).has_value());
}

TEST_CASE("exact balance at the origin reports the floor-adjacent root") {
  FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  const double w = f.xi_r / f.xi_a;  // w ξ_a == ξ_r exactly
  const auto got = equilibrium_distance(w, f);
  REQUIRE(got.has_value());
  REQUIRE(*got == kDistanceFloor);
}

TEST_CASE("unbounded-repulsion equilibrium matches a dense grid scan") {
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeUr);
  const double w = 1.0;
  const auto got = equilibrium_distance(w, f);
  REQUIRE(got.has_value());
  const auto want = oracle::grid_root(
      [&](double d) {
        return w * attraction_force_coeff(d, f) - repulsion_force_coeff(d, f);
      },
      1e-4, 10.0);
  REQUIRE(want.has_value());
  REQUIRE(*got == Catch::Approx(*want).margin(1e-6));
  // closed form: 2 w ξ_a p d^{p-2} = 2 ξ_r q d^{-q-2} at p=2,q=1 → d³ = q ξ_r/(2 w ξ_a)...
  // direct: 0.12 = 2e-5 / d³
  REQUIRE(*got == Catch::Approx(std::cbrt(2.0 * f.xi_r * f.q / (2.0 * w * f.xi_a * f.p))).margin(1e-9));
}

TEST_CASE("equilibrium requires repulsion") {
  FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  f.xi_r = 0.0;
  REQUIRE_FALSE(equilibrium_distance(0.5, f).has_value());
  REQUIRE_FALSE(equilibrium_distance(0.5, FieldModel::defaults(FieldFamily::Le)).has_value());
}

TEST_CASE("equilibrium rejects a non-positive weight") {
  const FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  REQUIRE_THROWS_AS(equilibrium_distance(0.0, f), ValidationError);
}

TEST_CASE("force coefficient crosses zero exactly once for the balancing families") {
  struct Case {
    FieldModel f;
    double w;
  };
  std::vector<Case> cases;
  cases.push_back({FieldModel::defaults(FieldFamily::MafeBr), 1e-4});
  cases.push_back({FieldModel::defaults(FieldFamily::MafeUr), 1.0});
  cases.push_back({FieldModel::defaults(FieldFamily::Mafee), 0.5});
  cases.push_back({FieldModel::defaults(FieldFamily::Mafeh), 1.0});
  for (const Case& c : cases) {
    int sign_changes = 0;
    double prev = repulsion_force_coeff(1e-6, c.f) - c.w * attraction_force_coeff(1e-6, c.f);
    for (int s = 1; s <= 20000; ++s) {
      const double d = 1e-6 * std::pow(1e9, s / 20000.0);
      const double cur = repulsion_force_coeff(d, c.f) - c.w * attraction_force_coeff(d, c.f);
      if (prev * cur < 0.0) ++sign_changes;
      if (cur != 0.0) prev = cur;
    }
    REQUIRE(sign_changes == 1);
  }
}

TEST_CASE("exponential-well equilibrium exists across the full weight range") {
  const FieldModel f = FieldModel::defaults(FieldFamily::Mafee);
  for (double w : {1e-3, 0.01, 0.1, 0.5, 1.0}) {
    const auto eps = equilibrium_distance(w, f);
    REQUIRE(eps.has_value());
    // closed form for p=q=2, σ_a=4, σ_r=1, ξ_r=2: d² = (4/3) ln(2/w)
    const double want = std::sqrt(4.0 / 3.0 * std::log(2.0 / w));
    REQUIRE(*eps == Catch::Approx(want).margin(1e-8));
  }
}

TEST_CASE("field validation catches bad parameter combinations") {
  FieldModel f = FieldModel::defaults(FieldFamily::MafeBr);
  f.sigma = 0.0;
  REQUIRE_THROWS_AS(f.validate(), ValidationError);
  FieldModel h = FieldModel::defaults(FieldFamily::Mafeh);
  h.q = 1.0;  // repulsion must fall off faster than the gravitational attraction
  REQUIRE_THROWS_AS(h.validate(), ValidationError);
  FieldModel e = FieldModel::defaults(FieldFamily::Mafee);
  e.p = 0.5;
  REQUIRE_THROWS_AS(e.validate(), ValidationError);
}

TEST_CASE("family names round-trip") {
  for (FieldFamily fam : {FieldFamily::MafeBr, FieldFamily::MafeUr, FieldFamily::Mafee,
                          FieldFamily::Mafeh, FieldFamily::Sne, FieldFamily::Tsne,
                          FieldFamily::Le})
    REQUIRE(family_from_name(family_name(fam)) == fam);
  REQUIRE_THROWS_AS(family_from_name("nope"), ValidationError);
}
