#include "rkf/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace rkf {

double spectral_radius(const Mat& m) {
  detail::require_square(m, "spectral_radius");
  detail::require_finite(m, "spectral_radius");
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eig_sym(const Mat& m) {
  detail::require_square(m, "min_eig_sym");
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eig_sym(const Mat& m) {
  detail::require_square(m, "max_eig_sym");
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

namespace {

// vec(S) = (F^T (x) F^T) vec(S) + vec(Q), solved as one dense linear system.
Mat solve_stein_direct(const Mat& f, const Mat& q) {
  const Eigen::Index n = f.rows();
  const Mat ft = f.transpose();
  Mat kron = Mat::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) = ft(i, j) * ft;
    }
  }
  Mat lhs = Mat::Identity(n * n, n * n) - kron;
  Vec rhs = Eigen::Map<const Vec>(q.data(), n * n);
  Vec x = lhs.partialPivLu().solve(rhs);
  return Eigen::Map<const Mat>(x.data(), n, n);
}

// Doubling iteration: S_{k+1} = S_k + G_k^T S_k G_k, G_{k+1} = G_k^2 squares
// the effective horizon each pass, so even rho(F) close to 1 converges fast.
Mat solve_stein_iterative(const Mat& f, const Mat& q) {
  Mat s = q;
  Mat g = f;
  for (int k = 0; k < 200; ++k) {
    Mat update = g.transpose() * s * g;
    s = symmetrize(s + update);
    if (update.norm() <= 1e-16 * (1.0 + s.norm())) return s;
    g = (g * g).eval();
  }
  throw NoConvergence("solve_stein: fixed-point iteration did not converge");
}

}  // namespace

Mat solve_stein(const Mat& f, const Mat& q) {
  detail::require_square(f, "solve_stein");
  detail::require_square(q, "solve_stein");
  if (f.rows() != q.rows()) {
    throw DimensionMismatch("solve_stein: F is " + std::to_string(f.rows()) + "x" +
                            std::to_string(f.cols()) + " but Q is " + std::to_string(q.rows()) +
                            "x" + std::to_string(q.cols()));
  }
  const double rho = spectral_radius(f);
  if (rho >= 1.0 - 1e-12) {
    throw NotStable("solve_stein: spectral radius " + std::to_string(rho) +
                    " is not strictly inside the unit circle");
  }
  Mat qs = symmetrize(q);
  Mat s = (f.rows() <= kSteinDirectDim) ? solve_stein_direct(f, qs) : solve_stein_iterative(f, qs);
  return symmetrize(s);
}

Mat symmetric_factor(const Mat& k) {
  detail::require_square(k, "symmetric_factor");
  Mat ks = symmetrize(k);
  const double mineig = min_eig_sym(ks);
  if (mineig <= 1e-14) {
    throw NotPositiveDefinite("symmetric_factor: matrix is not positive definite (min eigenvalue " +
                              std::to_string(mineig) + ")");
  }
  Eigen::LLT<Mat> llt(ks);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("symmetric_factor: Cholesky factorization failed");
  }
  return llt.matrixL();
}

Mat guarded_inverse(const Mat& m, const std::string& context) {
  detail::require_square(m, "guarded_inverse");
  Mat ms = symmetrize(m);
  Eigen::SelfAdjointEigenSolver<Mat> es(ms);
  const Vec& lambda = es.eigenvalues();
  const double norm2 = lambda.cwiseAbs().maxCoeff();
  double worst = lambda(0);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda(i)) < std::abs(worst)) worst = lambda(i);
  }
  if (std::abs(worst) <= kNearSingularRel * norm2 || norm2 == 0.0) {
    throw NearSingular(context, worst);
  }
  Mat inv = es.eigenvectors() * lambda.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return symmetrize(inv);
}

}  // namespace rkf
