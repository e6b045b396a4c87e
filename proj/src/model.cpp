#include "rkf/model.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace rkf {

namespace {

constexpr double kRankRelTol = 1e-10;

Eigen::Index numeric_rank(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > kRankRelTol * sv(0)) ++rank;
  }
  return rank;
}

void check_dimensions(const StateSpaceModel& m) {
  detail::require_square(m.A, "StateSpaceModel.A");
  const Eigen::Index n = m.A.rows();
  const Eigen::Index p = m.C.rows();
  const Eigen::Index nm = m.B.cols();
  if (m.B.rows() != n) throw DimensionMismatch("StateSpaceModel: B must have n rows");
  if (m.C.cols() != n) throw DimensionMismatch("StateSpaceModel: C must have n columns");
  if (m.D.rows() != p || m.D.cols() != nm) {
    throw DimensionMismatch("StateSpaceModel: D must be p x m, matching C and B");
  }
  if (m.P0.rows() != n || m.P0.cols() != n) {
    throw DimensionMismatch("StateSpaceModel: P0 must be n x n");
  }
}

}  // namespace

ValidationReport validation_report(const StateSpaceModel& model) {
  check_dimensions(model);
  const Eigen::Index n = model.state_dim();

  Mat reach(n, n * model.noise_dim());
  Mat block = model.B;
  for (Eigen::Index k = 0; k < n; ++k) {
    reach.middleCols(k * model.noise_dim(), model.noise_dim()) = block;
    block = model.A * block;
  }

  Mat obs(n * model.obs_dim(), n);
  Mat row = model.C;
  for (Eigen::Index k = 0; k < n; ++k) {
    obs.middleRows(k * model.obs_dim(), model.obs_dim()) = row;
    row = row * model.A;
  }

  ValidationReport report;
  report.state_dim = n;
  report.reachability_rank = numeric_rank(reach);
  report.observability_rank = numeric_rank(obs);
  report.reachable = (report.reachability_rank == n);
  report.observable = (report.observability_rank == n);
  return report;
}

ValidationReport validate(const StateSpaceModel& model) {
  ValidationReport report = validation_report(model);
  if (!report.reachable) {
    throw NotReachable("validate: (A,B) not reachable, rank " +
                       std::to_string(report.reachability_rank) + " of " +
                       std::to_string(report.state_dim));
  }
  if (!report.observable) {
    throw NotObservable("validate: (A,C) not observable, rank " +
                        std::to_string(report.observability_rank) + " of " +
                        std::to_string(report.state_dim));
  }
  return report;
}

namespace {

Mat observation_gram_inverse(const StateSpaceModel& m) {
  Mat r = symmetrize(m.D * m.D.transpose());
  const double lo = min_eig_sym(r);
  const double hi = max_eig_sym(r);
  if (lo <= 1e-12 * std::max(hi, 1e-300)) {
    throw DegenerateNoise("normalize: D D^T is singular");
  }
  return guarded_inverse(r, "normalize: D D^T");
}

bool cross_term_zero(const StateSpaceModel& m) {
  const double scale = 1.0 + m.B.norm() * m.D.norm();
  return (m.B * m.D.transpose()).norm() <= 1e-12 * scale;
}

}  // namespace

StateSpaceModel decorrelate_noise(const StateSpaceModel& model) {
  check_dimensions(model);
  if (cross_term_zero(model)) return model;
  const Mat r_inv = observation_gram_inverse(model);
  StateSpaceModel out = model;
  out.A = model.A - model.A * model.B * model.D.transpose() * r_inv * model.C;
  // B (I - D^T (D D^T)^{-1} D) has the required Gram and is exactly
  // orthogonal to D in exact arithmetic.
  out.B = model.B * (Mat::Identity(model.noise_dim(), model.noise_dim()) -
                     model.D.transpose() * r_inv * model.D);
  return out;
}

StateSpaceModel normalize(const StateSpaceModel& model) {
  check_dimensions(model);
  const Eigen::Index n = model.state_dim();
  const Eigen::Index p = model.obs_dim();

  observation_gram_inverse(model);  // reject singular D D^T up front

  // Fixed point: nothing to do when the noise channels are already
  // decorrelated and the stacked injection matrix is square invertible.
  if (cross_term_zero(model) && model.noise_dim() == n + p) {
    Mat stacked(n + p, n + p);
    stacked.topRows(n) = model.B;
    stacked.bottomRows(p) = model.D;
    Eigen::JacobiSVD<Mat> svd(stacked);
    const Vec& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 1e-12 * sv(0)) return model;
  }

  StateSpaceModel work = decorrelate_noise(model);

  Mat stacked(n + p, work.noise_dim());
  stacked.topRows(n) = work.B;
  stacked.bottomRows(p) = work.D;
  Mat gram = symmetrize(stacked * stacked.transpose());

  // The off-diagonal block of the Gram is B D^T, zero up to roundoff after
  // decorrelation; pin it to exact zero so the triangular factor keeps the
  // B/D channels exactly orthogonal.
  const double cross = gram.block(0, n, n, p).norm();
  if (cross > 1e-10 * (1.0 + gram.norm())) {
    throw DegenerateNoise("normalize: noise decorrelation failed to annihilate B D^T");
  }
  gram.block(0, n, n, p).setZero();
  gram.block(n, 0, p, n).setZero();

  if (min_eig_sym(gram) <= 1e-12 * max_eig_sym(gram)) {
    throw DegenerateNoise("normalize: joint noise Gram matrix has rank below n + p");
  }

  Mat lower = symmetric_factor(gram);

  StateSpaceModel out;
  out.A = work.A;
  out.B = lower.topRows(n);
  out.C = work.C;
  out.D = lower.bottomRows(p);
  out.P0 = model.P0;
  return out;
}

PredictorStep predictor_step(const StateSpaceModel& model, const Mat& v) {
  if (v.rows() != model.state_dim() || v.cols() != model.state_dim()) {
    throw DimensionMismatch("predictor_step: covariance must be n x n");
  }
  const Mat r = symmetrize(model.D * model.D.transpose());
  const Mat s = symmetrize(model.C * v * model.C.transpose() + r);
  const Mat s_inv = guarded_inverse(s, "predictor_step: innovation covariance");
  PredictorStep out;
  out.gain = model.A * v * model.C.transpose() * s_inv;
  // (V^{-1} + C^T R^{-1} C)^{-1} = V - V C^T S^{-1} C V by the matrix
  // inversion lemma; this form also covers singular V.
  const Mat compressed = symmetrize(v - v * model.C.transpose() * s_inv * model.C * v);
  out.next_covariance = symmetrize(model.A * compressed * model.A.transpose() +
                                   model.B * model.B.transpose());
  return out;
}

KalmanSchedule kalman_gain_schedule(const StateSpaceModel& model, int horizon) {
  check_dimensions(model);
  if (horizon < 1) throw InputError("kalman_gain_schedule: horizon must be >= 1");

  KalmanSchedule out;
  out.covariances.reserve(horizon + 1);
  out.gains.reserve(horizon + 1);
  Mat p = symmetrize(model.P0);
  for (int t = 0; t <= horizon; ++t) {
    out.covariances.push_back(p);
    PredictorStep step = predictor_step(model, p);
    out.gains.push_back(step.gain);
    p = step.next_covariance;
  }

  // Steady state: keep iterating until relative stationarity holds for ten
  // consecutive steps.
  Mat ps = symmetrize(model.P0);
  int streak = 0;
  int iterations = 0;
  constexpr int kMaxIterations = 100000;
  while (iterations < kMaxIterations) {
    PredictorStep step = predictor_step(model, ps);
    ++iterations;
    const double rel = (step.next_covariance - ps).norm() / (1.0 + ps.norm());
    ps = step.next_covariance;
    streak = (rel < 1e-12) ? streak + 1 : 0;
    if (streak >= 10) break;
  }
  if (streak < 10) {
    throw NoConvergence("kalman_gain_schedule: steady covariance not stationary after " +
                        std::to_string(iterations) + " iterations");
  }
  out.steady_covariance = ps;
  out.steady_gain = predictor_step(model, ps).gain;
  out.steady_iterations = iterations;
  return out;
}

}  // namespace rkf
