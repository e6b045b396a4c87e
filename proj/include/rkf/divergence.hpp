#ifndef RKF_DIVERGENCE_HPP
#define RKF_DIVERGENCE_HPP

#include "rkf/numerics.hpp"

namespace rkf {

/// Result of inverting the tolerance function: the risk parameter theta with
/// gamma(P, theta) == c to within 1e-10*(1+c), plus solver diagnostics.
struct ThetaSolution {
  double theta = 0.0;
  double achieved_c = 0.0;
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Kullback-Leibler tolerance function
///   gamma(P, theta) = log det(I - theta P) + tr((I - theta P)^{-1}) - n,
/// defined for symmetric P > 0 and 0 <= theta < 1/spectral_radius(P); the
/// log-determinant is taken through a symmetric (Cholesky) factorization of
/// I - theta P. Strictly increasing in theta, zero at theta = 0, diverging to
/// +infinity at the right end of the domain.
///
/// Throws OutOfDomain when theta lies outside [0, 1/sigma(P)).
double gamma(const Mat& p, double theta);

/// Solves c = gamma(P, theta) for theta by bisection on
/// [0, (1-1e-12)/sigma(P)] after geometric bracket expansion. Monotonicity of
/// gamma in theta makes the root unique.
///
/// Throws OutOfDomain for c <= 0, NoConvergence if 200 bisection steps do not
/// reach |gamma - c| <= 1e-10*(1+c).
ThetaSolution solve_theta(const Mat& p, double c);

inline constexpr double kThetaTolerance = 1e-10;
inline constexpr int kThetaMaxIterations = 200;

}  // namespace rkf

#endif  // RKF_DIVERGENCE_HPP
