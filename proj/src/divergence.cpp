#include "rkf/divergence.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace rkf {

double gamma(const Mat& p, double theta) {
  detail::require_square(p, "gamma");
  const Eigen::Index n = p.rows();
  const double sigma = max_eig_sym(symmetrize(p));
  if (theta < 0.0 || (sigma > 0.0 && theta >= 1.0 / sigma)) {
    throw OutOfDomain("gamma: theta = " + std::to_string(theta) +
                      " outside [0, 1/sigma(P)) with sigma(P) = " + std::to_string(sigma));
  }
  Mat a = Mat::Identity(n, n) - theta * symmetrize(p);
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) {
    throw OutOfDomain("gamma: I - theta P is not positive definite");
  }
  const Mat l = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(l(i, i));
  const double trace_inv = llt.solve(Mat::Identity(n, n)).trace();
  return logdet + trace_inv - static_cast<double>(n);
}

namespace {

// gamma along the eigenvalues of P: with P = U diag(lambda) U^T,
//   gamma(P, theta) = sum_i [ log(1 - theta lambda_i) + 1/(1 - theta lambda_i) - 1 ].
// One eigendecomposition up front makes each bisection probe O(n).
double gamma_from_spectrum(const Vec& lambda, double theta) {
  double logdet = 0.0;
  double trace_inv = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double d = 1.0 - theta * lambda(i);
    logdet += std::log(d);
    trace_inv += 1.0 / d;
  }
  return logdet + trace_inv - static_cast<double>(lambda.size());
}

}  // namespace

ThetaSolution solve_theta(const Mat& p, double c) {
  detail::require_square(p, "solve_theta");
  if (c <= 0.0) {
    throw OutOfDomain("solve_theta: tolerance c must be positive, got " + std::to_string(c));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(p), Eigen::EigenvaluesOnly);
  const Vec lambda = es.eigenvalues();
  const double sigma = lambda.maxCoeff();
  if (sigma <= 0.0 || lambda.minCoeff() <= 0.0) {
    throw OutOfDomain("solve_theta: P must be positive definite");
  }

  const double cap = (1.0 - 1e-12) / sigma;
  const double tol = kThetaTolerance * (1.0 + c);

  // Geometric expansion toward the cap until the bracket encloses the root.
  double lo = 0.0;
  double hi = 0.5 * cap;
  int iterations = 0;
  while (gamma_from_spectrum(lambda, hi) < c) {
    lo = hi;
    hi = cap - 0.5 * (cap - hi);
    if (++iterations > 200 || cap - hi <= 1e-18 * cap) {
      hi = cap;
      break;
    }
  }
  const double bracket_lo = lo;
  const double bracket_hi = hi;

  double theta = hi;
  double achieved = gamma_from_spectrum(lambda, theta);
  for (int k = 0; k < kThetaMaxIterations; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double g = gamma_from_spectrum(lambda, mid);
    ++iterations;
    theta = mid;
    achieved = g;
    if (std::abs(g - c) <= 0.5 * tol) break;
    if (g < c) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(achieved - c) > tol) {
    throw NoConvergence("solve_theta: bisection stalled at |gamma - c| = " +
                        std::to_string(std::abs(achieved - c)));
  }

  ThetaSolution out;
  out.theta = theta;
  out.achieved_c = achieved;
  out.iterations = iterations;
  out.bracket_lo = bracket_lo;
  out.bracket_hi = bracket_hi;
  return out;
}

}  // namespace rkf
