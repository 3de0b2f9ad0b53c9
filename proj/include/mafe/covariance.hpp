#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "types.hpp"

namespace mafe {

/// Maximum-likelihood sample covariance of the spectra: S = (1/N) Σ (y_i - ȳ)(y_i - ȳ)ᵀ.
inline Matrix sample_covariance(const Matrix& spectra) {
  if (spectra.rows() < 2) throw ValidationError("covariance needs at least 2 samples");
  Eigen::RowVectorXd mean = spectra.colwise().mean();
  Matrix centered = spectra.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(spectra.rows());
}

/**
 * Covariance factored by a sparse matrix transform: S ≈ Ê Λ̂ Êᵀ where Ê is a
 * product of Givens rotations and Λ̂ the resulting (floored) diagonal.
 */
struct CovarianceModel {
  Matrix S;           // input covariance
  Matrix E_hat;       // orthogonal estimate of the eigenvector basis
  Vector Lambda_hat;  // positive diagonal variance estimates
  int n_rotations = 0;
};

struct SmtOptions {
  // stop rotating once max_{i<j} |A_ij| / sqrt(A_ii A_jj) falls below this
  double stop_correlation = 1e-8;
  // budget guard: requesting more than d(d-1)/2 * max_sweeps rotations is a misuse
  int max_sweeps = 100;
};

/// Default rotation budget for a d-band covariance.
inline int smt_default_rotations(Index d) { return static_cast<int>(2 * d); }

/**
 * Greedy sparse matrix transform.  Each step picks the off-diagonal pair with the
 * largest normalized correlation A_ij² / (A_ii·A_jj) and annihilates it with a
 * Givens rotation, which multiplies the objective (the product of diagonal
 * entries) by 1 - A_ij²/(A_ii·A_jj) ≤ 1, so the objective never increases.
 *
 * `log_objective`, when given, records log Π_k A_kk after every applied rotation
 * (log instead of the raw product so wide matrices cannot overflow).
 */
inline CovarianceModel smt_estimate(const Matrix& S, int rotations, const SmtOptions& opts = {},
                                    std::vector<double>* log_objective = nullptr) {
  const Index d = S.rows();
  if (d == 0 || S.cols() != d) throw ValidationError("covariance must be square and non-empty");
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("covariance must be symmetric to within 1e-12");
  if (rotations < 0) throw ValidationError("rotation count must be non-negative");
  const double budget = static_cast<double>(d) * static_cast<double>(d - 1) / 2.0 * opts.max_sweeps;
  if (static_cast<double>(rotations) > budget)
    throw ValidationError("rotation budget exceeded: " + std::to_string(rotations) +
                          " rotations requested for a " + std::to_string(d) + "-band covariance");

  Matrix A = S;
  Matrix E = Matrix::Identity(d, d);
  if (log_objective) log_objective->clear();

  auto record = [&] {
    if (!log_objective) return;
    double acc = 0.0;
    for (Index i = 0; i < d; ++i)
      acc += std::log(std::max(A(i, i), std::numeric_limits<double>::min()));
    log_objective->push_back(acc);
  };
  record();

  int applied = 0;
  for (; applied < rotations; ++applied) {
    // largest normalized correlation decides the next rotation
    Index p = -1, q = -1;
    double best = 0.0;
    for (Index i = 0; i < d; ++i) {
      for (Index j = i + 1; j < d; ++j) {
        const double off = A(i, j);
        if (off == 0.0) continue;
        const double den = std::max(A(i, i) * A(j, j), std::numeric_limits<double>::min());
        const double corr = off * off / den;
        if (corr > best) {
          best = corr;
          p = i;
          q = j;
        }
      }
    }
    if (p < 0 || std::sqrt(best) < opts.stop_correlation) break;

    // stable Jacobi rotation annihilating A(p,q)
    const double apq = A(p, q);
    const double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
    const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;

    const Vector col_p = A.col(p), col_q = A.col(q);
    A.col(p) = c * col_p - s * col_q;
    A.col(q) = s * col_p + c * col_q;
    const Vector row_p = A.row(p), row_q = A.row(q);
    A.row(p) = c * row_p.transpose() - s * row_q.transpose();
    A.row(q) = s * row_p.transpose() + c * row_q.transpose();
    A(p, q) = 0.0;
    A(q, p) = 0.0;

    const Vector e_p = E.col(p), e_q = E.col(q);
    E.col(p) = c * e_p - s * e_q;
    E.col(q) = s * e_p + c * e_q;

    record();
  }

  CovarianceModel model;
  model.S = S;
  model.E_hat = E;
  model.n_rotations = applied;
  Vector lam = A.diagonal();
  const double lam_max = lam.maxCoeff();
  const double floor = lam_max > 0.0 ? 1e-10 * lam_max : 1e-10;
  model.Lambda_hat = lam.cwiseMax(floor);
  return model;
}

/// Mahalanobis affinity exp{-½ (Êᵀ(y_i - y_j))ᵀ Λ̂⁻¹ (Êᵀ(y_i - y_j))} in (0, 1].
inline double photometric_weight(const Vector& y_i, const Vector& y_j, const CovarianceModel& cov) {
  if (y_i.size() != y_j.size() || y_i.size() != cov.E_hat.rows())
    throw ValidationError("spectrum size does not match the covariance model");
  const Vector proj = cov.E_hat.transpose() * (y_i - y_j);
  const double maha = (proj.array().square() / cov.Lambda_hat.array()).sum();
  return std::exp(-0.5 * maha);
}

}  // namespace mafe
