#include "rkf/least_favorable.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <limits>

#include "rkf/random.hpp"

namespace rkf {

namespace {

// (X^{-1} - Bbar Bbar^T)^{-1} = X + X Bbar (I - Bbar^T X Bbar)^{-1} Bbar^T X.
// The m x m core I - Bbar^T X Bbar is positive definite exactly on the map's
// domain 0 <= X < (Bbar Bbar^T)^{-1}, so its minimum eigenvalue doubles as
// the domain check.
Mat lifted_inverse(const Mat& x, const Mat& bbar, const char* who) {
  const Eigen::Index m = bbar.cols();
  const Mat core = symmetrize(Mat::Identity(m, m) - bbar.transpose() * x * bbar);
  const double margin = min_eig_sym(core);
  if (margin <= 0.0) {
    throw OutOfDomain(std::string(who) + ": X reached (Bbar Bbar^T)^{-1} (core eigenvalue " +
                      std::to_string(margin) + ")");
  }
  const Mat core_inv = guarded_inverse(core, std::string(who) + ": I - Bbar^T X Bbar");
  return symmetrize(x + x * bbar * core_inv * bbar.transpose() * x);
}

void check_closed_loop_dims(const Mat& x, const Mat& abar, const Mat& bbar) {
  detail::require_square(abar, "theta_map: Abar");
  detail::require_square(x, "theta_map: X");
  if (x.rows() != abar.rows() || bbar.rows() != abar.rows()) {
    throw DimensionMismatch("theta_map: X, Abar, Bbar must share the state dimension");
  }
}

}  // namespace

Mat theta_map(const Mat& x, const Mat& abar, const Mat& bbar, double theta) {
  check_closed_loop_dims(x, abar, bbar);
  const Mat xs = symmetrize(x);
  const double x_min = min_eig_sym(xs);
  if (x_min < -1e-12 * (1.0 + xs.norm())) {
    throw OutOfDomain("theta_map: X is not positive semi-definite (min eigenvalue " +
                      std::to_string(x_min) + ")");
  }
  const Mat lifted = lifted_inverse(xs, bbar, "theta_map");
  const Eigen::Index n = abar.rows();
  return symmetrize(abar.transpose() * lifted * abar + theta * Mat::Identity(n, n));
}

std::vector<BackwardIterate> backward_recursion(const StateSpaceModel& model,
                                                const ForwardTrajectory& forward) {
  const int horizon = forward.horizon();
  const Eigen::Index n = model.state_dim();
  std::vector<BackwardIterate> iterates(horizon + 1);

  iterates[horizon].t = horizon;
  iterates[horizon].OmegaInv = Mat::Zero(n, n);
  iterates[horizon].X =
      forward.risk(horizon - 1) * Mat::Identity(n, n);  // terminal: Omega^{-1} = 0

  for (int t = horizon - 1; t >= 0; --t) {
    const double theta = forward.risk(t);
    const Mat& gain = forward.gain(t);
    const Mat abar = model.A - gain * model.C;
    const Mat bbar = model.B - gain * model.D;
    const Mat w = symmetrize(iterates[t + 1].OmegaInv + theta * Mat::Identity(n, n));
    Mat lifted;
    try {
      lifted = lifted_inverse(w, bbar, "backward_recursion");
    } catch (const OutOfDomain& e) {
      throw OutOfDomain("backward_recursion: step t = " + std::to_string(t) + ": " + e.what());
    }
    iterates[t].t = t;
    iterates[t].OmegaInv = symmetrize(abar.transpose() * lifted * abar);
    iterates[t].X = symmetrize(iterates[t].OmegaInv + theta * Mat::Identity(n, n));
  }
  return iterates;
}

SteadyBackwardResult steady_backward(const Mat& abar, const Mat& bbar, double theta, double tol) {
  const Eigen::Index n = abar.rows();
  Mat x = theta * Mat::Identity(n, n);

  // Stationarity to `tol` plus the algebraic residual budget; the residual of
  // the fixed-point equation at x_k equals the next step size, so both are
  // read off the same iteration.
  constexpr int kMaxIterations = 100000;
  int iterations = 0;
  bool settled = false;
  double rel = 0.0;
  while (iterations < kMaxIterations) {
    const Mat next = theta_map(x, abar, bbar, theta);
    ++iterations;
    const double change = (next - x).norm();
    rel = change / (1.0 + x.norm());
    x = next;
    if (rel < tol && change <= 0.5e-10 * (1.0 + x.norm())) {
      settled = true;
      break;
    }
  }
  if (!settled) {
    char detail[96];
    std::snprintf(detail, sizeof(detail), " iterations (last relative change %.3e, |X| = %.3e)",
                  rel, x.norm());
    throw NoConvergence("steady_backward: not stationary after " + std::to_string(iterations) +
                        detail);
  }
  const double residual = (x - theta_map(x, abar, bbar, theta)).norm();
  if (residual > 1e-10 * (1.0 + x.norm())) {
    char detail[48];
    std::snprintf(detail, sizeof(detail), "%.3e", residual);
    throw NumericalError("steady_backward: algebraic equation residual " + std::string(detail) +
                         " exceeds tolerance");
  }

  SteadyBackwardResult out;
  out.X = x;
  out.OmegaInvLimit = symmetrize(x - theta * Mat::Identity(n, n));
  out.iterations = iterations;
  return out;
}

SteadyBackwardResult steady_backward(const SteadyState& ss, double tol) {
  return steady_backward(ss.Abar, ss.Bbar, ss.theta, tol);
}

double certificate_margin(const Mat& abar, const Mat& bbar, double theta, double rho) {
  const Eigen::Index n = abar.rows();
  const Mat sigma = solve_stein(rho * abar, theta * Mat::Identity(n, n));
  // Sigma_rho >= theta I > 0 always; near the upper end of the rho range it
  // becomes huge and its inverse tiny, which just drives the margin negative.
  Eigen::SelfAdjointEigenSolver<Mat> es(sigma);
  const Mat sigma_inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                        es.eigenvectors().transpose();
  return min_eig_sym(symmetrize((1.0 - 1.0 / (rho * rho)) * sigma_inv -
                                bbar * bbar.transpose()));
}

namespace {

std::pair<double, double> rho_range(const Mat& abar) {
  const double sigma = spectral_radius(abar);
  if (sigma >= 1.0) {
    throw NotStable("certify: Abar has spectral radius " + std::to_string(sigma));
  }
  double lo = 1.0 + 1e-9;
  double hi = (sigma > 0.0) ? 1.0 / sigma - 1e-9 : 1e6;
  if (hi <= lo) hi = lo;
  return {lo, hi};
}

}  // namespace

std::vector<std::pair<double, double>> certificate_sweep(const Mat& abar, const Mat& bbar,
                                                         double theta, int rho_grid) {
  if (rho_grid < 1) throw InputError("certificate_sweep: grid must have at least one point");
  const auto [lo, hi] = rho_range(abar);
  std::vector<std::pair<double, double>> curve;
  curve.reserve(rho_grid);
  for (int k = 0; k < rho_grid; ++k) {
    const double f = (rho_grid == 1) ? 0.0 : static_cast<double>(k) / (rho_grid - 1);
    const double rho = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
    curve.emplace_back(rho, certificate_margin(abar, bbar, theta, rho));
  }
  return curve;
}

ConvergenceCertificate certify(const Mat& abar, const Mat& bbar, double theta, int rho_grid) {
  const Eigen::Index n = abar.rows();
  ConvergenceCertificate cert;

  if (theta < kZeroToleranceCutoff) {
    // theta = 0: the backward recursion is identically zero, nothing to certify.
    const auto [lo, hi] = rho_range(abar);
    cert.rho = std::sqrt(lo * hi);
    cert.SigmaRho = Mat::Zero(n, n);
    cert.margin = std::numeric_limits<double>::infinity();
    cert.holds = true;
    cert.degenerate = true;
    return cert;
  }

  const auto curve = certificate_sweep(abar, bbar, theta, rho_grid);
  std::size_t best = 0;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    if (curve[k].second > curve[best].second) best = k;
  }

  // Golden-section refinement between the grid neighbors of the best point.
  double a = curve[best > 0 ? best - 1 : best].first;
  double b = curve[best + 1 < curve.size() ? best + 1 : best].first;
  double best_rho = curve[best].first;
  double best_margin = curve[best].second;
  if (b > a) {
    const double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = certificate_margin(abar, bbar, theta, x1);
    double f2 = certificate_margin(abar, bbar, theta, x2);
    for (int k = 0; k < 80 && (b - a) > 1e-12 * best_rho; ++k) {
      if (f1 >= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = certificate_margin(abar, bbar, theta, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = certificate_margin(abar, bbar, theta, x2);
      }
      const double rho = (f1 >= f2) ? x1 : x2;
      const double margin = (f1 >= f2) ? f1 : f2;
      if (margin > best_margin) {
        best_margin = margin;
        best_rho = rho;
      }
    }
  }

  cert.rho = best_rho;
  cert.SigmaRho = solve_stein(best_rho * abar, theta * Mat::Identity(n, n));
  cert.margin = best_margin;
  cert.holds = best_margin >= 0.0;
  return cert;
}

ConvergenceCertificate certify(const SteadyState& ss, int rho_grid) {
  return certify(ss.Abar, ss.Bbar, ss.theta, rho_grid);
}

StabilizingCheck stabilizing_check(const Mat& x, const Mat& abar, const Mat& bbar) {
  check_closed_loop_dims(x, abar, bbar);
  const Eigen::Index m = bbar.cols();
  const Mat core = symmetrize(bbar.transpose() * x * bbar - Mat::Identity(m, m));
  const Mat core_inv = guarded_inverse(core, "stabilizing_check: Bbar^T X Bbar - I");

  StabilizingCheck out;
  out.J = abar.transpose() * x * bbar * core_inv;
  out.M = abar.transpose() - out.J * bbar.transpose();
  Eigen::EigenSolver<Mat> es(out.M, /*computeEigenvectors=*/false);
  out.eigenvalues = es.eigenvalues();
  out.stable = out.eigenvalues.cwiseAbs().maxCoeff() < 1.0;
  return out;
}

namespace {

LeastFavorableModel assemble_from(const StateSpaceModel& model, const Mat& gain, double theta,
                                  const Mat& omega_inv_next, bool stationary) {
  const Eigen::Index n = model.state_dim();
  const Eigen::Index p = model.obs_dim();
  const Eigen::Index m = model.noise_dim();

  const Mat abar = model.A - gain * model.C;
  const Mat bbar = model.B - gain * model.D;
  const Mat x = symmetrize(omega_inv_next + theta * Mat::Identity(n, n));

  const Mat ktil_inv = symmetrize(Mat::Identity(m, m) - bbar.transpose() * x * bbar);
  const double mineig = min_eig_sym(ktil_inv);
  if (mineig <= 1e-14) {
    throw NotPositiveDefinite("assemble: I - Bbar^T X Bbar is not positive definite "
                              "(min eigenvalue " + std::to_string(mineig) + ")");
  }

  LeastFavorableModel lf;
  lf.Ktil = guarded_inverse(ktil_inv, "assemble: I - Bbar^T X Bbar");
  lf.L = symmetric_factor(lf.Ktil);
  lf.H = lf.Ktil * bbar.transpose() * x * abar;
  lf.OmegaInvLimit = symmetrize(x - theta * Mat::Identity(n, n));
  lf.stationary = stationary;

  lf.Atil = Mat::Zero(2 * n, 2 * n);
  lf.Atil.topLeftCorner(n, n) = model.A;
  lf.Atil.topRightCorner(n, n) = model.B * lf.H;
  lf.Atil.bottomRightCorner(n, n) = abar + bbar * lf.H;

  Mat stacked(2 * n, m);
  stacked.topRows(n) = model.B;
  stacked.bottomRows(n) = bbar;
  lf.Btil = stacked * lf.L;

  lf.Ctil = Mat(p, 2 * n);
  lf.Ctil.leftCols(n) = model.C;
  lf.Ctil.rightCols(n) = model.D * lf.H;
  lf.Dtil = model.D * lf.L;
  return lf;
}

}  // namespace

LeastFavorableModel assemble(const StateSpaceModel& model, const SteadyState& ss, const Mat& x) {
  const Eigen::Index n = model.state_dim();
  const Mat omega_inv = symmetrize(x - ss.theta * Mat::Identity(n, n));
  return assemble_from(model, ss.G, ss.theta, omega_inv, /*stationary=*/true);
}

std::vector<LeastFavorableModel> assemble_time_varying(
    const StateSpaceModel& model, const ForwardTrajectory& forward,
    const std::vector<BackwardIterate>& backward) {
  const int horizon = forward.horizon();
  if (static_cast<int>(backward.size()) != horizon + 1) {
    throw DimensionMismatch("assemble_time_varying: backward sequence must cover [0, T]");
  }
  std::vector<LeastFavorableModel> models;
  models.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    models.push_back(assemble_from(model, forward.gain(t), forward.risk(t),
                                   backward[t + 1].OmegaInv, /*stationary=*/false));
  }
  return models;
}

ScalarRootAnalysis scalar_oracle(double abar, double bbar, double theta) {
  if (bbar == 0.0) throw NoRealRoots("scalar_oracle: bbar must be nonzero");
  const double a2 = bbar * bbar;
  const double a1 = -(1.0 - abar * abar + a2 * theta);
  const double a0 = theta;
  const double disc = a1 * a1 - 4.0 * a2 * a0;
  if (disc <= 0.0) {
    throw NoRealRoots("scalar_oracle: discriminant " + std::to_string(disc) +
                      " is not positive");
  }
  if (1.0 - abar * abar - a2 * theta <= 0.0) {
    throw NoRealRoots("scalar_oracle: 1 - abar^2 - bbar^2 theta = " +
                      std::to_string(1.0 - abar * abar - a2 * theta) + " is not positive");
  }

  // a1 < 0 here, so q = (|a1| + sqrt(disc))/2 is well separated from zero.
  const double q = 0.5 * (-a1 + std::sqrt(disc));
  ScalarRootAnalysis out;
  out.abar = abar;
  out.bbar = bbar;
  out.theta = theta;
  out.x1 = q / a2;
  out.x2 = a0 / q;

  auto feedback = [abar, bbar](double x) {
    const double den = bbar * bbar * x - 1.0;
    const double num = abar * x * bbar;
    if (num == 0.0) return abar;  // j = 0 limit
    if (den == 0.0) {
      throw NumericalError("scalar_oracle: feedback undefined, bbar^2 x = 1");
    }
    return abar - (num / den) * bbar;
  };
  out.f1 = feedback(out.x1);
  out.f2 = feedback(out.x2);

  const Mat a_mat = Mat::Constant(1, 1, abar);
  const Mat b_mat = Mat::Constant(1, 1, bbar);
  out.iteration_limit = steady_backward(a_mat, b_mat, theta, 1e-14).X(0, 0);
  return out;
}

LfSimulation simulate_lf(const LeastFavorableModel& lf, const Mat& p0, int horizon,
                         std::uint64_t seed) {
  if (horizon < 0) throw InputError("simulate_lf: horizon must be >= 0");
  if (!lf.stationary) {
    throw InputError("simulate_lf: requires a stationary least favorable model");
  }
  const Eigen::Index two_n = lf.state_dim();
  const Eigen::Index n = two_n / 2;
  if (p0.rows() != n || p0.cols() != n) {
    throw DimensionMismatch("simulate_lf: P0 must match the nominal state dimension");
  }

  // PSD square root of P0 (P0 = 0 is allowed).
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(p0));
  const Mat root =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  GaussianSampler gauss(seed);
  auto draw = [&gauss](Eigen::Index k) {
    Vec z(k);
    for (Eigen::Index i = 0; i < k; ++i) z(i) = gauss();
    return z;
  };

  LfSimulation sim;
  sim.states.reserve(horizon + 1);
  sim.observations.reserve(horizon);

  Vec xi = Vec::Zero(two_n);
  xi.head(n) = root * draw(n);
  sim.states.push_back(xi);
  for (int t = 0; t < horizon; ++t) {
    const Vec eps = draw(lf.noise_dim());
    sim.observations.push_back(lf.Ctil * xi + lf.Dtil * eps);
    xi = lf.Atil * xi + lf.Btil * eps;
    sim.states.push_back(xi);
  }
  return sim;
}

}  // namespace rkf
