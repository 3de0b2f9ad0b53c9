#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "types.hpp"

namespace mafe {

/**
 * The seven pair-interaction families.  Each defines an attraction potential
 * u_att and a repulsion potential u_rep of the inter-point distance; a pair
 * (i, j) contributes w_ij·u_att(d_ij) + u_rep(d_ij) to the total energy and
 * feels the radial force Δ·{F_r(d) − w·F_a(d)}.
 *
 *   MafeBr  bounded repulsion:    u_att = ξ_a d^p,          u_rep = ξ_r σ e^{−d^q/σ}
 *   MafeUr  unbounded repulsion:  u_att = ξ_a d^p,          u_rep = ξ_r / d^q
 *   Mafee   exponential well:     u_att = σ_a(1−e^{−d^p/σ_a}), u_rep = ξ_r σ_r e^{−d^q/σ_r}
 *   Mafeh   gravitational:        u_att = −ξ_a / d^p (well), u_rep = ξ_r / d^q  (needs q > p)
 *   Sne     stochastic-neighbor:  u_att = d²,               log-sum repulsion, scale ξ_r
 *   Tsne    heavy-tailed:         u_att = log(1+d²),        log-sum repulsion, scale ξ_r
 *   Le      Laplacian eigenmap:   u_att = d²,               no repulsion
 *
 * For Sne/Tsne the true repulsion couples all pairs through a normalizer; the
 * per-pair forms below are the local surrogates exp(−d²) and 1/(1+d²) used by
 * pair_force and equilibrium analysis, while total_energy / total_gradient use
 * the exact coupled expressions.
 */
enum class FieldFamily { MafeBr, MafeUr, Mafee, Mafeh, Sne, Tsne, Le };

inline const char* family_name(FieldFamily f) {
  switch (f) {
    case FieldFamily::MafeBr: return "mafe-br";
    case FieldFamily::MafeUr: return "mafe-ur";
    case FieldFamily::Mafee: return "mafee";
    case FieldFamily::Mafeh: return "mafeh";
    case FieldFamily::Sne: return "sne";
    case FieldFamily::Tsne: return "tsne";
    case FieldFamily::Le: return "le";
  }
  return "?";
}

inline FieldFamily family_from_name(const std::string& s) {
  if (s == "mafe-br") return FieldFamily::MafeBr;
  if (s == "mafe-ur") return FieldFamily::MafeUr;
  if (s == "mafee") return FieldFamily::Mafee;
  if (s == "mafeh") return FieldFamily::Mafeh;
  if (s == "sne") return FieldFamily::Sne;
  if (s == "tsne") return FieldFamily::Tsne;
  if (s == "le") return FieldFamily::Le;
  throw ValidationError("unknown field family: " + s);
}

/// Distance floor δ applied wherever an inverse power would blow up.
inline constexpr double kDistanceFloor = 1e-12;
/// Upper end of the equilibrium-distance search interval.
inline constexpr double kEquilibriumSearchMax = 1e3;

struct FieldModel {
  FieldFamily family = FieldFamily::MafeBr;
  double xi_a = 0.4;    // attraction magnitude
  double xi_r = 1e-4;   // repulsion magnitude (0 disables repulsion)
  double p = 2.0;       // attraction exponent
  double q = 2.0;       // repulsion exponent
  double sigma = 1.0;   // bounded-repulsion width (MafeBr)
  double sigma_a = 4.0; // attraction well width (Mafee)
  double sigma_r = 1.0; // repulsion width (Mafee)

  static FieldModel defaults(FieldFamily f) {
    FieldModel m;
    m.family = f;
    switch (f) {
      case FieldFamily::MafeBr:
        m.xi_a = 0.4; m.xi_r = 1e-4; m.p = 2.0; m.q = 2.0; m.sigma = 1.0;
        break;
      case FieldFamily::MafeUr:
        m.xi_a = 0.03; m.xi_r = 1e-5; m.p = 2.0; m.q = 1.0;
        break;
      case FieldFamily::Mafee:
        m.p = 2.0; m.q = 2.0; m.sigma_a = 4.0; m.sigma_r = 1.0; m.xi_r = 2.0;
        break;
      case FieldFamily::Mafeh:
        m.xi_a = 0.03; m.xi_r = 1e-5; m.p = 1.0; m.q = 2.0;
        break;
      case FieldFamily::Sne:
      case FieldFamily::Tsne:
        m.xi_r = 1.0;
        break;
      case FieldFamily::Le:
        m.xi_r = 0.0;
        break;
    }
    return m;
  }

  void validate() const {
    if (uses_xi_a() && xi_a < 0.0)
      throw ValidationError("attraction magnitude must be non-negative");
    if (xi_r < 0.0) throw ValidationError("repulsion magnitude must be non-negative");
    if (!(p >= 1.0) || !(q >= 1.0)) throw ValidationError("exponents must be at least 1");
    if (family == FieldFamily::MafeBr && !(sigma > 0.0))
      throw ValidationError("repulsion width sigma must be positive");
    if (family == FieldFamily::Mafee && (!(sigma_a > 0.0) || !(sigma_r > 0.0)))
      throw ValidationError("well widths sigma_a, sigma_r must be positive");
    if (family == FieldFamily::Mafeh && !(q > p))
      throw ValidationError("gravitational family needs repulsion steeper than attraction (q > p)");
  }

  bool uses_xi_a() const {
    return family == FieldFamily::MafeBr || family == FieldFamily::MafeUr ||
           family == FieldFamily::Mafeh;
  }
};

namespace detail {
inline double floored(double d) { return std::max(d, kDistanceFloor); }
}

/// Magnitude of the pairwise attraction energy at distance d (>= 0 for all families).
inline double attraction_energy(double d, const FieldModel& f) {
  if (d < 0.0 || !std::isfinite(d)) throw ValidationError("distance must be finite and non-negative");
  switch (f.family) {
    case FieldFamily::MafeBr:
    case FieldFamily::MafeUr:
      return f.xi_a * std::pow(d, f.p);
    case FieldFamily::Mafee:
      return f.sigma_a * (1.0 - std::exp(-std::pow(d, f.p) / f.sigma_a));
    case FieldFamily::Mafeh:
      return f.xi_a / std::pow(detail::floored(d), f.p);
    case FieldFamily::Sne:
    case FieldFamily::Le:
      return d * d;
    case FieldFamily::Tsne:
      return std::log1p(d * d);
  }
  return 0.0;
}

/// Pairwise repulsion energy at distance d: strictly decreasing, zero if ξ_r = 0.
inline double repulsion_energy(double d, const FieldModel& f) {
  if (d < 0.0 || !std::isfinite(d)) throw ValidationError("distance must be finite and non-negative");
  if (f.xi_r == 0.0) return 0.0;
  switch (f.family) {
    case FieldFamily::MafeBr:
      return f.xi_r * f.sigma * std::exp(-std::pow(d, f.q) / f.sigma);
    case FieldFamily::MafeUr:
    case FieldFamily::Mafeh:
      return f.xi_r / std::pow(detail::floored(d), f.q);
    case FieldFamily::Mafee:
      return f.xi_r * f.sigma_r * std::exp(-std::pow(d, f.q) / f.sigma_r);
    case FieldFamily::Sne:
      return f.xi_r * std::exp(-d * d);
    case FieldFamily::Tsne:
      return f.xi_r / (1.0 + d * d);
    case FieldFamily::Le:
      return 0.0;
  }
  return 0.0;
}

/**
 * Signed attraction potential as it enters the total energy.  Identical to
 * attraction_energy except for the gravitational family, whose attraction is a
 * negative well −ξ_a/d^p: the energy decreases as the pair approaches, which is
 * what makes the force attractive there.
 */
inline double signed_attraction_energy(double d, const FieldModel& f) {
  const double e = attraction_energy(d, f);
  return f.family == FieldFamily::Mafeh ? -e : e;
}

/**
 * Radial attraction coefficient F_a(d) >= 0: the attractive pair force is
 * −w·F_a(d)·Δ.  Includes the factor 2 that the symmetric pair double-count
 * contributes to the gradient, i.e. F_a = 2·u_att'(d)/d.
 */
inline double attraction_force_coeff(double d, const FieldModel& f) {
  const double dd = detail::floored(d);
  switch (f.family) {
    case FieldFamily::MafeBr:
    case FieldFamily::MafeUr:
      return 2.0 * f.xi_a * f.p * std::pow(dd, f.p - 2.0);
    case FieldFamily::Mafee:
      return 2.0 * f.p * std::pow(dd, f.p - 2.0) * std::exp(-std::pow(dd, f.p) / f.sigma_a);
    case FieldFamily::Mafeh:
      return 2.0 * f.xi_a * f.p * std::pow(dd, -f.p - 2.0);
    case FieldFamily::Sne:
    case FieldFamily::Le:
      return 4.0;
    case FieldFamily::Tsne:
      return 4.0 / (1.0 + d * d);
  }
  return 0.0;
}

/// Radial repulsion coefficient F_r(d) >= 0: the repulsive pair force is +F_r(d)·Δ.
inline double repulsion_force_coeff(double d, const FieldModel& f) {
  if (f.xi_r == 0.0) return 0.0;
  const double dd = detail::floored(d);
  switch (f.family) {
    case FieldFamily::MafeBr:
      return 2.0 * f.xi_r * f.q * std::pow(dd, f.q - 2.0) * std::exp(-std::pow(dd, f.q) / f.sigma);
    case FieldFamily::MafeUr:
    case FieldFamily::Mafeh:
      return 2.0 * f.xi_r * f.q * std::pow(dd, -f.q - 2.0);
    case FieldFamily::Mafee:
      return 2.0 * f.xi_r * f.q * std::pow(dd, f.q - 2.0) * std::exp(-std::pow(dd, f.q) / f.sigma_r);
    case FieldFamily::Sne:
      return 4.0 * f.xi_r * std::exp(-d * d);
    case FieldFamily::Tsne: {
      const double u = 1.0 / (1.0 + d * d);
      return 4.0 * f.xi_r * u * u;
    }
    case FieldFamily::Le:
      return 0.0;
  }
  return 0.0;
}

/**
 * Net force that j exerts on i under edge weight w:
 *   F = Δ · {F_r(‖Δ‖) − w·F_a(‖Δ‖)},  Δ = z_i − z_j.
 * Odd under argument swap by construction (the coefficient depends only on ‖Δ‖).
 */
inline Vector pair_force(const Vector& z_i, const Vector& z_j, double w, const FieldModel& f) {
  if (z_i.size() != z_j.size()) throw ValidationError("points must have equal dimension");
  if (!z_i.allFinite() || !z_j.allFinite()) throw NumericError("non-finite coordinates");
  const Vector delta = z_i - z_j;
  const double d = delta.norm();
  const double coeff = repulsion_force_coeff(d, f) - w * attraction_force_coeff(d, f);
  return delta * coeff;
}

/**
 * Pair-equilibrium distance: the root of w·F_a(d) = F_r(d) on (δ, 1e3], found
 * by scanning a geometric grid for a sign change and bisecting it down to a
 * 1e-10 bracket.  Returns nullopt when the field has no repulsion or when the
 * attraction/repulsion balance never crosses zero on the interval (attraction-
 * or repulsion-dominated everywhere).
 */
inline std::optional<double> equilibrium_distance(double w, const FieldModel& f) {
  if (!(w > 0.0)) throw ValidationError("edge weight must be positive for an equilibrium");
  if (f.xi_r == 0.0 || f.family == FieldFamily::Le) return std::nullopt;

  auto balance = [&](double d) {
    return w * attraction_force_coeff(d, f) - repulsion_force_coeff(d, f);
  };

  // balance point at or below the floor counts as a δ-adjacent root
  const double at_floor = balance(kDistanceFloor);
  const double scale_floor =
      w * attraction_force_coeff(kDistanceFloor, f) + repulsion_force_coeff(kDistanceFloor, f);
  if (std::abs(at_floor) <= 1e-12 * scale_floor) return kDistanceFloor;

  constexpr int kGrid = 4096;
  const double lo = kDistanceFloor, hi = kEquilibriumSearchMax;
  const double step = std::pow(hi / lo, 1.0 / kGrid);
  double a = lo, fa = at_floor;
  for (int g = 1; g <= kGrid; ++g) {
    const double b = (g == kGrid) ? hi : lo * std::pow(step, g);
    const double fb = balance(b);
    if (fb == 0.0) return b;
    if (fa * fb < 0.0) {
      // bisect [a, b]
      double x0 = a, x1 = b, f0 = fa;
      for (int it = 0; it < 200 && (x1 - x0) > 1e-10; ++it) {
        const double mid = 0.5 * (x0 + x1);
        const double fm = balance(mid);
        if (fm == 0.0) return mid;
        if (f0 * fm < 0.0) {
          x1 = mid;
        } else {
          x0 = mid;
          f0 = fm;
        }
      }
      return 0.5 * (x0 + x1);
    }
    a = b;
    fa = fb;
  }
  return std::nullopt;
}

}  // namespace mafe
