#ifndef RKF_MODEL_HPP
#define RKF_MODEL_HPP

#include <vector>

#include "rkf/numerics.hpp"

namespace rkf {

/// Nominal discrete-time state-space model
///   x_{t+1} = A x_t + B v_t,   y_t = C x_t + D v_t,
/// with v_t unit-variance white Gaussian noise and x_0 ~ N(0, P0).
///
/// The filtering recursions assume the normalized form: B D^T = 0 and the
/// stacked noise-injection matrix [B; D] square and invertible (so the noise
/// dimension is m = n + p). Call normalize() to reach that form.
struct StateSpaceModel {
  Mat A;   // n x n state transition
  Mat B;   // n x m process-noise injection
  Mat C;   // p x n observation map
  Mat D;   // p x m observation-noise injection
  Mat P0;  // n x n initial state covariance, symmetric PSD

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index obs_dim() const { return C.rows(); }
  Eigen::Index noise_dim() const { return B.cols(); }
};

/// Outcome of the structural checks: ranks of the reachability and
/// observability matrices, and whether the standing assumptions hold.
struct ValidationReport {
  Eigen::Index reachability_rank = 0;
  Eigen::Index observability_rank = 0;
  Eigen::Index state_dim = 0;
  bool reachable = false;
  bool observable = false;

  bool passed() const { return reachable && observable; }
};

/// Checks dimensional consistency, (A,B) reachability and (A,C) observability.
/// Rank tests use singular values with threshold 1e-10 times the largest one.
///
/// Throws DimensionMismatch on inconsistent shapes, NotReachable /
/// NotObservable when the corresponding rank test fails.
ValidationReport validate(const StateSpaceModel& model);

/// Same checks, but returns the report instead of throwing on rank failures.
ValidationReport validation_report(const StateSpaceModel& model);

/// Removes correlation between process and observation noise:
///   A <- A - A B D^T (D D^T)^{-1} C,  B B^T <- B (I - D^T (D D^T)^{-1} D) B^T.
/// No-op when B D^T is already zero. Throws DegenerateNoise when D D^T is
/// singular.
StateSpaceModel decorrelate_noise(const StateSpaceModel& model);

/// Returns an equivalent model with B D^T = 0 and [B; D] square invertible of
/// size (n+p) x (n+p). Models already in that form are returned unchanged.
/// Otherwise the noise channels are compressed through the canonical
/// lower-triangular factor of the stacked Gram matrix [B; D] [B; D]^T, which
/// the compression preserves exactly.
///
/// Throws DegenerateNoise when D D^T is singular or the Gram matrix has rank
/// below n + p.
StateSpaceModel normalize(const StateSpaceModel& model);

/// One Kalman predictor update applied to a prediction-error covariance V:
///   gain = A V C^T (C V C^T + D D^T)^{-1}
///   next = A (V^{-1} + C^T (D D^T)^{-1} C)^{-1} A^T + B B^T
/// evaluated through the matrix inversion lemma so that singular V is fine.
struct PredictorStep {
  Mat gain;
  Mat next_covariance;
};

PredictorStep predictor_step(const StateSpaceModel& model, const Mat& v);

/// Gain schedule and covariances of the standard Kalman predictor (the
/// zero-tolerance specialization of the robust recursion), plus the
/// steady-state pair obtained by iterating to stationarity.
struct KalmanSchedule {
  std::vector<Mat> gains;        // G_t, t = 0..T
  std::vector<Mat> covariances;  // P_t, t = 0..T
  Mat steady_gain;
  Mat steady_covariance;
  int steady_iterations = 0;
};

KalmanSchedule kalman_gain_schedule(const StateSpaceModel& model, int horizon);

}  // namespace rkf

#endif  // RKF_MODEL_HPP
