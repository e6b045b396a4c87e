#ifndef RKF_NUMERICS_HPP
#define RKF_NUMERICS_HPP

#include <Eigen/Dense>
#include <string>

#include "rkf/errors.hpp"

namespace rkf {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Exact symmetrization (M + M^T)/2. Every symmetric quantity produced by the
/// library passes through this, so entries (i,j) and (j,i) compare equal
/// bit-for-bit even after thousands of recursion steps.
inline Mat symmetrize(const Mat& m) { return ((m + m.transpose()) / 2.0).eval(); }

/// Largest absolute eigenvalue of a square real matrix.
double spectral_radius(const Mat& m);

/// Smallest eigenvalue of a symmetric matrix, via self-adjoint eigendecomposition.
double min_eig_sym(const Mat& m);

/// Largest eigenvalue of a symmetric matrix.
double max_eig_sym(const Mat& m);

/// Solves the Stein (discrete Lyapunov) equation  S = F^T S F + Q  for
/// symmetric PSD Q and Schur-stable F. Dense Kronecker-vectorized linear
/// solve up to kSteinDirectDim, fixed-point iteration beyond.
///
/// Throws NotStable when spectral_radius(F) >= 1 - 1e-12, DimensionMismatch
/// when shapes disagree.
Mat solve_stein(const Mat& f, const Mat& q);

inline constexpr int kSteinDirectDim = 50;

/// Canonical lower-triangular factor L with L L^T = K for symmetric positive
/// definite K. Throws NotPositiveDefinite when the smallest eigenvalue of K
/// is <= 1e-14.
Mat symmetric_factor(const Mat& k);

/// Inverse of a well-conditioned definite symmetric matrix, symmetrized after
/// the solve. Throws NearSingular carrying `context` when any eigenvalue has
/// magnitude <= 1e-12 times the spectral norm; the recursions treat that as
/// breakdown (the tolerance budget was too large), never as a NaN source.
Mat guarded_inverse(const Mat& m, const std::string& context);

/// Relative near-singularity threshold used by guarded_inverse.
inline constexpr double kNearSingularRel = 1e-12;

namespace detail {

inline void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(what) + ": expected a square matrix, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

inline void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) {
    throw NumericalError(std::string(what) + ": matrix has non-finite entries");
  }
}

}  // namespace detail

}  // namespace rkf

#endif  // RKF_NUMERICS_HPP
