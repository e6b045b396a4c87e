#include "rkf/performance.hpp"

#include <cmath>

#include "rkf/random.hpp"

namespace rkf {

ErrorSystem error_system(const LeastFavorableModel& lf, const Mat& gprime, const Mat& v0) {
  const Eigen::Index two_n = lf.state_dim();
  const Eigen::Index n = two_n / 2;
  const Eigen::Index p = lf.obs_dim();
  if (gprime.rows() != n || gprime.cols() != p) {
    throw DimensionMismatch("error_system: gain must be n x p");
  }
  if (v0.rows() != n || v0.cols() != n) {
    throw DimensionMismatch("error_system: V0 must be n x n");
  }

  Mat injector = Mat::Zero(two_n, p);  // [G'; 0]
  injector.topRows(n) = gprime;

  ErrorSystem es;
  es.F = lf.Atil - injector * lf.Ctil;
  es.M = lf.Btil - injector * lf.Dtil;
  es.Pi0 = Mat::Zero(two_n, two_n);
  es.Pi0.topLeftCorner(n, n) = symmetrize(v0);
  es.Pi0.bottomRightCorner(n, n) = symmetrize(v0);
  return es;
}

std::vector<Mat> lyapunov_recursion(const ErrorSystem& es, int horizon) {
  if (horizon < 1) throw InputError("lyapunov_recursion: horizon must be >= 1");
  const Mat noise = symmetrize(es.M * es.M.transpose());
  std::vector<Mat> pi;
  pi.reserve(horizon + 1);
  pi.push_back(symmetrize(es.Pi0));
  for (int t = 0; t < horizon; ++t) {
    pi.push_back(symmetrize(es.F * pi.back() * es.F.transpose() + noise));
    if (pi.back().trace() > 1e12) {
      throw Diverged("lyapunov_recursion: trace exceeded 1e12 at t = " + std::to_string(t + 1) +
                     " (G' is not stabilizing)");
    }
  }
  return pi;
}

Mat steady_variance(const ErrorSystem& es) {
  const double radius = spectral_radius(es.F);
  if (radius >= 1.0) {
    throw NotStable("steady_variance: F has spectral radius " + std::to_string(radius));
  }
  return solve_stein(es.F.transpose(), symmetrize(es.M * es.M.transpose()));
}

MonteCarloReport monte_carlo_check(const LeastFavorableModel& lf, const Mat& gprime,
                                   const Mat& v0, int trajectories, int horizon,
                                   std::uint64_t seed) {
  if (trajectories < 2) throw InputError("monte_carlo_check: need at least two trajectories");
  if (horizon < 1) throw InputError("monte_carlo_check: horizon must be >= 1");
  const ErrorSystem es = error_system(lf, gprime, v0);
  const double radius = spectral_radius(es.F);
  if (radius >= 1.0) {
    throw NotStable("monte_carlo_check: error dynamics have spectral radius " +
                    std::to_string(radius));
  }
  const Eigen::Index two_n = es.F.rows();
  const Eigen::Index n = two_n / 2;
  const Eigen::Index m = es.M.cols();

  Eigen::SelfAdjointEigenSolver<Mat> root_solver(symmetrize(v0));
  const Mat root = root_solver.eigenvectors() *
                   root_solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  // Accumulate first and second moments of e' at every step.
  std::vector<Vec> sum(horizon + 1, Vec::Zero(n));
  std::vector<Vec> sum_sq(horizon + 1, Vec::Zero(n));

  for (int run = 0; run < trajectories; ++run) {
    GaussianSampler gauss = GaussianSampler::derived(seed, static_cast<std::uint64_t>(run));
    Vec z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = gauss();
    const Vec x0 = root * z;
    Vec e(two_n);
    e.head(n) = x0;  // both filters start at zero estimate
    e.tail(n) = x0;
    sum[0] += e.head(n);
    sum_sq[0] += e.head(n).cwiseAbs2();
    for (int t = 0; t < horizon; ++t) {
      Vec eps(m);
      for (Eigen::Index i = 0; i < m; ++i) eps(i) = gauss();
      e = es.F * e + es.M * eps;
      sum[t + 1] += e.head(n);
      sum_sq[t + 1] += e.head(n).cwiseAbs2();
    }
  }

  const double count = static_cast<double>(trajectories);
  MonteCarloReport report;
  report.trajectories = trajectories;
  report.horizon = horizon;
  report.variance_trajectory.resize(horizon + 1, std::vector<double>(n, 0.0));
  for (int t = 0; t <= horizon; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mean = sum[t](i) / count;
      const double var = (sum_sq[t](i) - count * mean * mean) / (count - 1.0);
      report.variance_trajectory[t][i] = var;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = sum[horizon](i) / count;
    const double var = report.variance_trajectory[horizon][i];
    report.mean.push_back(mean);
    report.mean_se.push_back(std::sqrt(std::max(var, 0.0) / count));
    report.variance.push_back(var);
    // Gaussian fourth-moment approximation for the variance of a sample variance.
    report.variance_se.push_back(var * std::sqrt(2.0 / (count - 1.0)));
  }
  return report;
}

std::vector<double> component_variances_db(const Mat& pi, Eigen::Index n) {
  std::vector<double> out;
  out.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.push_back(10.0 * std::log10(pi(i, i)));
  }
  return out;
}

ComparisonReport compare(const StateSpaceModel& model, const SteadyState& robust,
                         const LeastFavorableModel& lf, int horizon) {
  if (horizon < 1) throw InputError("compare: horizon must be >= 1");
  const Eigen::Index n = model.state_dim();

  ComparisonReport report;
  report.robust = robust;
  report.lf = lf;
  report.kalman_gain = kalman_gain_schedule(model, 1).steady_gain;

  const Mat v0 = symmetrize(model.P0);
  const ErrorSystem es_kalman = error_system(report.lf, report.kalman_gain, v0);
  const ErrorSystem es_robust = error_system(report.lf, report.robust.G, v0);

  report.pi_kalman = lyapunov_recursion(es_kalman, horizon);
  report.pi_robust = lyapunov_recursion(es_robust, horizon);
  report.pi_kalman_steady = steady_variance(es_kalman);
  report.pi_robust_steady = steady_variance(es_robust);

  report.kalman_db = component_variances_db(report.pi_kalman_steady, n);
  report.robust_db = component_variances_db(report.pi_robust_steady, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    report.gap_db.push_back(report.kalman_db[i] - report.robust_db[i]);
  }
  return report;
}

ComparisonReport compare(const StateSpaceModel& model, double c, int horizon) {
  SteadyState robust = steady_state(model, c);
  const SteadyBackwardResult backward = steady_backward(robust);
  LeastFavorableModel lf = assemble(model, robust, backward.X);
  return compare(model, robust, lf, horizon);
}

}  // namespace rkf
