#include "rkf/robust_filter.hpp"

#include <cstdio>

namespace rkf {

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", x);
  return buf;
}

}  // namespace

RobustFilterStep initial_step(const StateSpaceModel& model, const Mat& p0) {
  RobustFilterStep step;
  step.t = 0;
  step.P = symmetrize(p0);
  step.V = step.P;
  step.theta = 0.0;
  step.G = Mat::Zero(model.state_dim(), model.obs_dim());
  return step;
}

RobustFilterStep forward_step(const RobustFilterStep& prev, const StateSpaceModel& model,
                              double c) {
  PredictorStep predicted = predictor_step(model, prev.V);

  RobustFilterStep next;
  next.t = prev.t + 1;
  next.G = predicted.gain;
  next.P = predicted.next_covariance;

  if (c < kZeroToleranceCutoff || next.P.norm() == 0.0) {
    next.theta = 0.0;
    next.V = next.P;
    return next;
  }

  next.theta = solve_theta(next.P, c).theta;
  const Mat p_inv = guarded_inverse(next.P, "forward_step: P_{t+1}");
  const Eigen::Index n = model.state_dim();
  next.V = guarded_inverse(p_inv - next.theta * Mat::Identity(n, n),
                           "forward_step: P^{-1} - theta I");
  return next;
}

ForwardTrajectory run_forward(const StateSpaceModel& model, const Mat& p0, double c,
                              int horizon) {
  if (horizon < 1) throw InputError("run_forward: horizon must be >= 1");
  ForwardTrajectory traj;
  traj.steps.reserve(horizon + 1);
  traj.steps.push_back(initial_step(model, p0));
  int streak = 0;
  for (int t = 0; t < horizon; ++t) {
    RobustFilterStep next = forward_step(traj.steps.back(), model, c);
    if (next.P.norm() > 1e12) {
      throw Diverged("run_forward: |P| exceeded 1e12 at t = " + std::to_string(next.t));
    }
    const double rel = (next.P - traj.steps.back().P).norm() / (1.0 + traj.steps.back().P.norm());
    traj.steps.push_back(std::move(next));
    streak = (rel < 1e-12) ? streak + 1 : 0;
    if (streak >= 10 && !traj.converged) {
      traj.converged = true;
      traj.converged_at = t + 1;
    }
  }
  return traj;
}

double riccati_residual(const StateSpaceModel& model, const Mat& p, double theta) {
  const Eigen::Index n = model.state_dim();
  const Mat p_inv = guarded_inverse(p, "riccati_residual: P");
  const Mat inner = guarded_inverse(
      symmetrize(p_inv - theta * Mat::Identity(n, n) +
                 model.C.transpose() *
                     guarded_inverse(symmetrize(model.D * model.D.transpose()),
                                     "riccati_residual: D D^T") *
                 model.C),
      "riccati_residual: inner matrix");
  const Mat rhs =
      symmetrize(model.A * inner * model.A.transpose() + model.B * model.B.transpose());
  return (p - rhs).norm();
}

SteadyState steady_state(const StateSpaceModel& model, double c, double tol, const Mat& p0) {
  const Eigen::Index n = model.state_dim();
  Mat start = p0.size() == 0 ? Mat::Identity(n, n) : p0;
  RobustFilterStep step = initial_step(model, start);

  // A slowly contracting map can be stationary to `tol` while the algebraic
  // residual is still above its budget; in that case keep iterating with a
  // tightened stationarity requirement.
  constexpr int kMaxIterations = 100000;
  double stop_tol = tol;
  int streak = 0;
  int iterations = 0;
  double rel = 0.0;
  double residual = 0.0;
  bool settled = false;
  while (iterations < kMaxIterations) {
    RobustFilterStep next = forward_step(step, model, c);
    ++iterations;
    if (next.P.norm() > 1e12) {
      throw Diverged("steady_state: |P| exceeded 1e12 at iteration " + std::to_string(iterations));
    }
    rel = (next.P - step.P).norm() / (1.0 + step.P.norm());
    step = std::move(next);
    streak = (rel < stop_tol) ? streak + 1 : 0;
    if (streak >= 10) {
      residual = riccati_residual(model, step.P, step.theta);
      if (residual <= 1e-10 * (1.0 + step.P.norm()) || stop_tol < 1e-16) {
        settled = true;
        break;
      }
      stop_tol /= 10.0;
      streak = 0;
    }
  }
  if (!settled) {
    throw NoConvergence("steady_state: not stationary after " + std::to_string(iterations) +
                        " iterations (last relative change " + sci(rel) + ")");
  }
  if (residual > 1e-10 * (1.0 + step.P.norm())) {
    throw NoConvergence("steady_state: algebraic Riccati residual " + sci(residual) +
                        " stalled above tolerance");
  }

  SteadyState ss;
  ss.P = step.P;
  ss.theta = step.theta;
  ss.V = step.V;
  ss.G = predictor_step(model, step.V).gain;
  ss.Abar = model.A - ss.G * model.C;
  ss.Bbar = model.B - ss.G * model.D;
  ss.iterations = iterations;

  const double radius = spectral_radius(ss.Abar);
  if (radius >= 1.0) {
    throw NotStable("steady_state: A - G C has spectral radius " + std::to_string(radius));
  }
  return ss;
}

namespace {

bool probe_convergence(const StateSpaceModel& model, double c, int max_steps) {
  const Eigen::Index n = model.state_dim();
  const double scales[] = {1.0, 0.1, 10.0};
  for (double s : scales) {
    RobustFilterStep step = initial_step(model, s * Mat::Identity(n, n));
    int streak = 0;
    bool ok = false;
    try {
      for (int t = 0; t < max_steps; ++t) {
        RobustFilterStep next = forward_step(step, model, c);
        if (next.P.norm() > 1e12) break;
        const double rel = (next.P - step.P).norm() / (1.0 + step.P.norm());
        step = std::move(next);
        streak = (rel < 1e-12) ? streak + 1 : 0;
        if (streak >= 10) {
          ok = true;
          break;
        }
      }
    } catch (const NumericalError&) {
      ok = false;
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace

double estimate_c_max(const StateSpaceModel& model, double c_lo, double c_hi, int probes) {
  if (!(c_lo > 0.0) || !(c_hi > c_lo)) {
    throw BracketInvalid("estimate_c_max: need 0 < c_lo < c_hi, got [" + std::to_string(c_lo) +
                         ", " + std::to_string(c_hi) + "]");
  }
  if (probes < 1) throw BracketInvalid("estimate_c_max: probes must be >= 1");

  constexpr int kProbeSteps = 50000;
  if (!probe_convergence(model, c_lo, kProbeSteps)) {
    throw NoConvergence("estimate_c_max: recursion does not converge even at c_lo = " +
                        std::to_string(c_lo));
  }
  double lo = c_lo;
  double hi = c_hi;
  if (probe_convergence(model, hi, kProbeSteps)) return hi;
  for (int k = 0; k < probes; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (probe_convergence(model, mid, kProbeSteps)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::vector<Vec> filter_observations(const std::vector<Mat>& gains, const StateSpaceModel& model,
                                     const std::vector<Vec>& observations) {
  if (gains.size() < observations.size()) {
    throw DimensionMismatch("filter_observations: need at least one gain per observation");
  }
  std::vector<Vec> estimates;
  estimates.reserve(observations.size() + 1);
  Vec xhat = Vec::Zero(model.state_dim());
  estimates.push_back(xhat);
  for (std::size_t t = 0; t < observations.size(); ++t) {
    if (observations[t].size() != model.obs_dim()) {
      throw DimensionMismatch("filter_observations: observation " + std::to_string(t) +
                              " has wrong dimension");
    }
    xhat = model.A * xhat + gains[t] * (observations[t] - model.C * xhat);
    estimates.push_back(xhat);
  }
  return estimates;
}

}  // namespace rkf
