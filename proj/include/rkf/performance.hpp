#ifndef RKF_PERFORMANCE_HPP
#define RKF_PERFORMANCE_HPP

#include <cstdint>
#include <vector>

#include "rkf/least_favorable.hpp"

namespace rkf {

/// Joint error dynamics e_{t+1} = F e_t + M eps_t of an arbitrary stable
/// one-step predictor with gain G' evaluated under the stationary least
/// favorable model, where e stacks the arbitrary filter's error e' on top of
/// the robust filter's error e. F = Atil - [G'; 0] Ctil is block upper
/// triangular; Pi0 = I_2 (x) V0.
struct ErrorSystem {
  Mat F;    // 2n x 2n
  Mat M;    // 2n x m
  Mat Pi0;  // 2n x 2n
};

ErrorSystem error_system(const LeastFavorableModel& lf, const Mat& gprime, const Mat& v0);

/// Pi_t for t in [0, T] under Pi_{t+1} = F Pi_t F^T + M M^T. Throws Diverged
/// when the trace passes 1e12 (an unstable G').
std::vector<Mat> lyapunov_recursion(const ErrorSystem& es, int horizon);

/// Unique fixed point Pi = F Pi F^T + M M^T for stable F, via the Stein
/// solver applied to F^T. Throws NotStable when spectral_radius(F) >= 1.
Mat steady_variance(const ErrorSystem& es);

/// Monte Carlo estimate of the error statistics at time T over N independent
/// trajectories of the error dynamics, with e'_0 = e_0 = x_0 ~ N(0, V0).
struct MonteCarloReport {
  std::vector<double> variance;        // per component of e', at t = T
  std::vector<double> variance_se;    // standard error of the variance estimate
  std::vector<double> mean;            // per component of e', at t = T
  std::vector<double> mean_se;
  std::vector<std::vector<double>> variance_trajectory;  // [t][component]
  int trajectories = 0;
  int horizon = 0;
};

MonteCarloReport monte_carlo_check(const LeastFavorableModel& lf, const Mat& gprime,
                                   const Mat& v0, int trajectories, int horizon,
                                   std::uint64_t seed);

/// Per-component error variances (leading n diagonal entries of Pi) in dB,
/// 10 log10(variance).
std::vector<double> component_variances_db(const Mat& pi, Eigen::Index n);

/// Full head-to-head evaluation: robust steady filter and Kalman steady gain
/// both run against the stationary least favorable model at tolerance c.
struct ComparisonReport {
  SteadyState robust;
  LeastFavorableModel lf;
  Mat kalman_gain;
  std::vector<Mat> pi_kalman;   // trajectory under the Kalman gain
  std::vector<Mat> pi_robust;   // trajectory under the robust gain
  Mat pi_kalman_steady;
  Mat pi_robust_steady;
  std::vector<double> kalman_db;   // steady per-component variances, dB
  std::vector<double> robust_db;
  std::vector<double> gap_db;      // kalman_db - robust_db (positive: robust wins)
};

ComparisonReport compare(const StateSpaceModel& model, double c, int horizon);

/// Same evaluation starting from an already-computed steady state and least
/// favorable model.
ComparisonReport compare(const StateSpaceModel& model, const SteadyState& robust,
                         const LeastFavorableModel& lf, int horizon);

}  // namespace rkf

#endif  // RKF_PERFORMANCE_HPP
