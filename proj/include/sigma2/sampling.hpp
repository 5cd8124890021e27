#pragma once

// Seeded random instances for the matrix-lemma property sweeps.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "sigma2/conformal.hpp"
#include "sigma2/random.hpp"
#include "sigma2/sphere.hpp"
#include "sigma2/symcone.hpp"

namespace sigma2::sampling {

/// Symmetric matrix with independent upper-triangle entries uniform in [-1, 1].
inline SymMat4 symmetric(SplitMix64& rng) {
  SymMat4 m;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) m.set(i, j, rng.uniform(-1.0, 1.0));
  return m;
}

inline Vec4 vector(SplitMix64& rng, double scale = 1.0) {
  return {scale * rng.uniform(-1.0, 1.0), scale * rng.uniform(-1.0, 1.0),
          scale * rng.uniform(-1.0, 1.0), scale * rng.uniform(-1.0, 1.0)};
}

/// A + t I with t the smallest nonnegative half-integer placing it in Gamma_k+.
inline SymMat4 shift_into_cone(const SymMat4& a, ConeLevel k) {
  for (int half_steps = 0;; ++half_steps) {
    SymMat4 shifted = a + SymMat4::identity(0.5 * half_steps);
    if (in_cone(shifted, k)) return shifted;
  }
}

/// Wigner-type sample shifted into Gamma_k+.
inline SymMat4 cone_matrix(SplitMix64& rng, ConeLevel k) { return shift_into_cone(symmetric(rng), k); }

/// P^T P for P with entries uniform in [-1, 1]; positive definite almost surely.
inline SymMat4 positive_definite(SplitMix64& rng) {
  Eigen::Matrix4d p;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) p(i, j) = rng.uniform(-1.0, 1.0);
  return SymMat4::from_dense(p.transpose() * p);
}

/// Orthogonal matrix from the QR factorization of a uniform random matrix.
inline Eigen::Matrix4d orthogonal(SplitMix64& rng) {
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  Eigen::HouseholderQR<Eigen::Matrix4d> qr(m);
  return qr.householderQ() * Eigen::Matrix4d::Identity();
}

/// Smooth radial conformal factor sum_{l=1..modes} c_l cos(l theta) with
/// c_l uniform in [-amplitude, amplitude], redrawn until A_u is in Gamma_2+.
/// cos(l theta) is a polynomial in xi, so every draw is smooth on S^4.
inline RadialField admissible_radial(const RadialGrid& grid, SplitMix64& rng, double amplitude = 0.3,
                                     int modes = 4) {
  for (;;) {
    std::vector<double> c(static_cast<std::size_t>(modes));
    for (double& x : c) x = rng.uniform(-amplitude, amplitude);
    auto u = grid.from_theta([&](double th) {
      double v = 0.0;
      for (int l = 1; l <= modes; ++l) v += c[static_cast<std::size_t>(l - 1)] * std::cos(l * th);
      return v;
    });
    if (admissibility(grid, u).admissible) return u;
  }
}

}  // namespace sigma2::sampling
