#ifndef RKF_TESTS_SUPPORT_HPP
#define RKF_TESTS_SUPPORT_HPP

#include <random>

#include "rkf/model.hpp"
#include "rkf/numerics.hpp"

namespace test_support {

using rkf::Mat;
using rkf::Vec;

inline Mat random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                         double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = scale * gauss(rng);
  }
  return m;
}

inline Mat random_spd(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  Mat a = random_matrix(rng, n, n);
  return rkf::symmetrize(scale * (a * a.transpose() / static_cast<double>(n) +
                                  0.2 * Mat::Identity(n, n)));
}

inline Mat random_stable(std::mt19937_64& rng, Eigen::Index n, double radius) {
  for (;;) {
    Mat a = random_matrix(rng, n, n);
    const double rho = rkf::spectral_radius(a);
    if (rho > 1e-8) return (radius / rho) * a;
  }
}

/// The two-state benchmark model used throughout: unstable mode 1.2, scalar
/// observation, noise channels embedded so that B D^T = 0 and [B; D] is
/// square invertible (m = n + p = 3).
inline rkf::StateSpaceModel reference_model() {
  rkf::StateSpaceModel m;
  m.A = Mat{{0.1, 1.0}, {0.0, 1.2}};
  m.B = Mat{{0.01, 0.0, 0.0}, {0.0, 0.01, 0.0}};
  m.C = Mat{{1.0, -1.0}};
  m.D = Mat{{0.0, 0.0, 0.04}};
  m.P0 = Mat::Identity(2, 2);
  return m;
}

inline constexpr double kReferenceTolerance = 0.1879;

/// Random model already in normalized form (B D^T = 0, [B; D] square
/// invertible), reachable and observable almost surely.
inline rkf::StateSpaceModel random_normalized_model(std::mt19937_64& rng, Eigen::Index n,
                                                    Eigen::Index p, double radius = 0.8) {
  rkf::StateSpaceModel m;
  for (;;) {
    m.A = random_stable(rng, n, radius);
    Mat bl = random_matrix(rng, n, n);
    Mat dl = random_matrix(rng, p, p);
    m.B = Mat::Zero(n, n + p);
    m.B.leftCols(n) = bl * bl.transpose() / static_cast<double>(n) + 0.3 * Mat::Identity(n, n);
    m.D = Mat::Zero(p, n + p);
    m.D.rightCols(p) = dl * dl.transpose() / static_cast<double>(p) + 0.3 * Mat::Identity(p, p);
    m.C = random_matrix(rng, p, n);
    m.P0 = random_spd(rng, n);
    rkf::ValidationReport report = rkf::validation_report(m);
    if (report.passed()) return m;
  }
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

inline bool entrywise_within(const Mat& got, const Mat& want, double rel) {
  for (Eigen::Index i = 0; i < got.rows(); ++i) {
    for (Eigen::Index k = 0; k < got.cols(); ++k) {
      if (rel_err(got(i, k), want(i, k)) > rel) return false;
    }
  }
  return true;
}

}  // namespace test_support

#endif  // RKF_TESTS_SUPPORT_HPP
