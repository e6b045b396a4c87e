#ifndef RKF_ROBUST_FILTER_HPP
#define RKF_ROBUST_FILTER_HPP

#include <vector>

#include "rkf/divergence.hpp"
#include "rkf/model.hpp"

namespace rkf {

/// One iterate of the robust forward recursion. The fields satisfy
/// V = (P^{-1} - theta I)^{-1}, so V dominates P with equality exactly when
/// theta = 0; G is the gain produced by the update that generated this
/// iterate (the gain applied to observation y_{t-1}).
struct RobustFilterStep {
  int t = 0;
  Mat P;           // prior-iterate covariance
  Mat V;           // least favorable prediction-error covariance
  double theta = 0.0;
  Mat G;
};

/// Forward trajectory over [0, T]. steps[t] holds the iterate at time t;
/// gain(t) / risk(t) give the pair (G_t, theta_t) consumed by the backward
/// recursion and by filtering, for t in [0, T-1].
struct ForwardTrajectory {
  std::vector<RobustFilterStep> steps;
  bool converged = false;
  int converged_at = -1;

  const Mat& gain(int t) const { return steps.at(t + 1).G; }
  double risk(int t) const { return steps.at(t + 1).theta; }
  int horizon() const { return static_cast<int>(steps.size()) - 1; }
};

/// Steady-state limit of the forward recursion together with the closed-loop
/// matrices Abar = A - G C (Schur stable) and Bbar = B - G D.
struct SteadyState {
  Mat P;
  Mat V;
  double theta = 0.0;
  Mat G;
  Mat Abar;
  Mat Bbar;
  int iterations = 0;
};

/// Tolerances below this are treated as exactly zero: theta is pinned to 0
/// and the recursion reproduces the Kalman filter bit-for-bit.
inline constexpr double kZeroToleranceCutoff = 1e-13;

/// Initial iterate: P = V = P0, theta = 0, zero gain placeholder.
RobustFilterStep initial_step(const StateSpaceModel& model, const Mat& p0);

/// One step of the robust recursion:
///   G_t      = A V_t C^T (C V_t C^T + D D^T)^{-1}
///   P_{t+1}  = A (V_t^{-1} + C^T (D D^T)^{-1} C)^{-1} A^T + B B^T
///   theta_t  solves c = gamma(P_{t+1}, theta_t)
///   V_{t+1}  = (P_{t+1}^{-1} - theta_t I)^{-1}
RobustFilterStep forward_step(const RobustFilterStep& prev, const StateSpaceModel& model,
                              double c);

/// Runs T forward steps from V_0 = P0. Sets the convergence flag once the
/// relative change of P stays below 1e-12 for ten consecutive steps. Throws
/// Diverged when the Frobenius norm of P exceeds 1e12.
ForwardTrajectory run_forward(const StateSpaceModel& model, const Mat& p0, double c, int horizon);

/// Iterates the recursion to its fixed point, verifies that A - G C is Schur
/// stable and that the algebraic Riccati-like equation
///   P = A (P^{-1} - theta I + C^T (D D^T)^{-1} C)^{-1} A^T + B B^T
/// holds to residual 1e-10*(1+|P|_F). Starts from P0 (identity by default;
/// the limit does not depend on it).
SteadyState steady_state(const StateSpaceModel& model, double c, double tol = 1e-12,
                         const Mat& p0 = Mat());

/// Frobenius-norm residual of the algebraic Riccati-like equation at (P, theta).
double riccati_residual(const StateSpaceModel& model, const Mat& p, double theta);

/// Empirical estimate of the largest tolerance for which the forward
/// recursion converges, by bisection over [c_lo, c_hi] with `probes`
/// halvings; convergence is probed from initial covariances I, 0.1 I and
/// 10 I. This is a surrogate search, not an analytic bound, and is labeled
/// as such wherever it is reported.
double estimate_c_max(const StateSpaceModel& model, double c_lo, double c_hi, int probes);

/// State-estimate recursion x^_{t+1} = A x^_t + G_t (y_t - C x^_t) from
/// x^_0 = 0, replaying a recorded gain schedule. Returns x^_0 .. x^_T with
/// T = observations.size().
std::vector<Vec> filter_observations(const std::vector<Mat>& gains, const StateSpaceModel& model,
                                     const std::vector<Vec>& observations);

}  // namespace rkf

#endif  // RKF_ROBUST_FILTER_HPP
