#include <doctest.h>

#include "rkf/model.hpp"
#include "support.hpp"

using namespace rkf;
using test_support::reference_model;
using test_support::random_matrix;
using test_support::random_spd;

TEST_SUITE_BEGIN("model");

TEST_CASE("validate accepts the two-state example model") {
  ValidationReport report = validate(reference_model());
  CHECK(report.passed());
  CHECK(report.reachability_rank == 2);
  CHECK(report.observability_rank == 2);
}

TEST_CASE("validate accepts a scalar model") {
  StateSpaceModel m;
  m.A = Mat::Constant(1, 1, 0.5);
  m.B = Mat::Constant(1, 1, 1.0);
  m.C = Mat::Constant(1, 1, 1.0);
  m.D = Mat::Constant(1, 1, 1.0);
  m.P0 = Mat::Constant(1, 1, 1.0);
  CHECK(validate(m).passed());
}

TEST_CASE("validate flags a decoupled unexcited and unseen state") {
  StateSpaceModel m;
  m.A = Mat::Identity(2, 2);
  m.B = Mat{{1.0}, {0.0}};
  m.C = Mat{{1.0, 0.0}};
  m.D = Mat::Constant(1, 1, 1.0);
  m.P0 = Mat::Identity(2, 2);
  ValidationReport report = validation_report(m);
  CHECK(!report.reachable);
  CHECK(!report.observable);
  CHECK(report.reachability_rank == 1);
  CHECK(report.observability_rank == 1);
  CHECK_THROWS_AS(validate(m), NotReachable);
}

TEST_CASE("dimension mismatches are rejected") {
  StateSpaceModel m = reference_model();
  m.C = Mat{{1.0, -1.0, 3.0}};
  CHECK_THROWS_AS(validation_report(m), DimensionMismatch);
}

TEST_CASE("decorrelate_noise applies the cross-term removal formulas") {
  // scalar state/output with two noise channels, B and D parallel: the
  // process noise is fully explained by the observation channel.
  StateSpaceModel m;
  m.A = Mat::Constant(1, 1, 0.8);
  m.B = Mat{{1.0, 0.0}};
  m.C = Mat::Constant(1, 1, 0.3);
  m.D = Mat{{1.0, 0.0}};
  m.P0 = Mat::Constant(1, 1, 1.0);

  StateSpaceModel d = decorrelate_noise(m);
  // A - A B D^T (D D^T)^{-1} C = 0.8 - 0.8 * 1 * 1 * 0.3
  CHECK(d.A(0, 0) == doctest::Approx(0.8 - 0.8 * 0.3).epsilon(1e-14));
  CHECK((d.B * d.D.transpose()).norm() < 1e-14);
  CHECK((d.B * d.B.transpose()).norm() < 1e-14);  // B parallel to D: nothing left

  // with no independent process noise the joint Gram is rank deficient
  CHECK_THROWS_AS(normalize(m), DegenerateNoise);
}

TEST_CASE("normalize handles correlated noise with full-rank remainder") {
  StateSpaceModel m;
  m.A = Mat::Constant(1, 1, 0.5);
  m.B = Mat{{1.0, 0.5}};
  m.C = Mat::Constant(1, 1, 0.3);
  m.D = Mat{{1.0, 0.0}};
  m.P0 = Mat::Constant(1, 1, 1.0);

  StateSpaceModel nm = normalize(m);
  CHECK((nm.B * nm.D.transpose()).norm() < 1e-12);
  CHECK(nm.B.cols() == 2);  // m = n + p
  Mat stacked(2, 2);
  stacked.topRows(1) = nm.B;
  stacked.bottomRows(1) = nm.D;
  CHECK(std::abs(stacked.determinant()) > 1e-8);

  // the A correction matches the hand formula: B D^T = 1, D D^T = 1
  CHECK(nm.A(0, 0) == doctest::Approx(0.5 - 0.5 * 1.0 * 0.3).epsilon(1e-14));
  // remaining process-noise power: B (I - D^T (D D^T)^{-1} D) B^T = 0.25
  CHECK((nm.B * nm.B.transpose())(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("normalize is a fixed point on already-normalized models") {
  StateSpaceModel m = reference_model();
  StateSpaceModel nm = normalize(m);
  CHECK((nm.A - m.A).norm() < 1e-14);
  CHECK((nm.B - m.B).norm() < 1e-14);
  CHECK((nm.C - m.C).norm() < 1e-14);
  CHECK((nm.D - m.D).norm() < 1e-14);

  // the embedded noise channels form a square invertible stack
  Mat stacked(3, 3);
  stacked.topRows(2) = nm.B;
  stacked.bottomRows(1) = nm.D;
  CHECK(std::abs(stacked.determinant()) > 1e-12);
}

TEST_CASE("normalize compresses wide noise channels and preserves the Gram") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2, p = 1, extra = 2;
    // disjoint channel supports make B D^T = 0 with m > n + p
    StateSpaceModel m;
    m.A = test_support::random_stable(rng, n, 0.9);
    m.B = Mat::Zero(n, n + p + extra);
    m.B.leftCols(n) = random_matrix(rng, n, n) + 2.0 * Mat::Identity(n, n);
    m.B.col(n + p) = random_matrix(rng, n, 1);
    m.C = random_matrix(rng, p, n);
    m.D = Mat::Zero(p, n + p + extra);
    m.D.col(n) = Mat::Constant(1, 1, 1.5);
    m.D.col(n + p + 1) = Mat::Constant(1, 1, 0.25);
    m.P0 = random_spd(rng, n);

    Mat stacked_before(n + p, m.B.cols());
    stacked_before.topRows(n) = m.B;
    stacked_before.bottomRows(p) = m.D;
    const Mat gram_before = stacked_before * stacked_before.transpose();

    StateSpaceModel nm = normalize(m);
    CHECK(nm.noise_dim() == n + p);
    CHECK((nm.B * nm.D.transpose()).norm() < 1e-12);

    Mat stacked_after(n + p, n + p);
    stacked_after.topRows(n) = nm.B;
    stacked_after.bottomRows(p) = nm.D;
    const Mat gram_after = stacked_after * stacked_after.transpose();
    CHECK((gram_after - gram_before).norm() <= 1e-12 * (1.0 + gram_before.norm()));

    // B B^T invertible (full row rank)
    CHECK(min_eig_sym(symmetrize(nm.B * nm.B.transpose())) > 0.0);

    // idempotence
    StateSpaceModel again = normalize(nm);
    CHECK((again.A - nm.A).norm() <= 1e-12 * (1.0 + nm.A.norm()));
    CHECK((again.B - nm.B).norm() <= 1e-12 * (1.0 + nm.B.norm()));
    CHECK((again.D - nm.D).norm() <= 1e-12 * (1.0 + nm.D.norm()));
  }
}

TEST_CASE("normalize rejects singular observation noise") {
  StateSpaceModel m = reference_model();
  m.D = Mat::Zero(1, 3);
  CHECK_THROWS_AS(normalize(m), DegenerateNoise);
}

TEST_CASE("normalize rejects noise channels too narrow to span the model") {
  // with m < n + p the joint Gram cannot reach full rank
  StateSpaceModel m;
  m.A = Mat{{0.5, 0.1}, {0.0, 0.3}};
  m.B = Mat{{1.0}, {0.5}};
  m.C = Mat{{1.0, 0.0}};
  m.D = Mat{{0.2}};
  m.P0 = Mat::Identity(2, 2);
  CHECK_THROWS_AS(normalize(m), DegenerateNoise);
}

TEST_CASE("kalman_gain_schedule with no noise and zero start stays at zero") {
  StateSpaceModel m;
  m.A = Mat::Constant(1, 1, 0.5);
  m.B = Mat::Constant(1, 1, 0.0);
  m.C = Mat::Constant(1, 1, 1.0);
  m.D = Mat::Constant(1, 1, 1.0);
  m.P0 = Mat::Constant(1, 1, 0.0);
  KalmanSchedule ks = kalman_gain_schedule(m, 25);
  for (const Mat& p : ks.covariances) CHECK(p.norm() == 0.0);
  for (const Mat& g : ks.gains) CHECK(g.norm() == 0.0);
  CHECK(ks.steady_covariance.norm() == 0.0);
}

TEST_CASE("kalman_gain_schedule scalar steady state matches the quadratic root") {
  // p = a^2 p / (p + 1) + 1 has the positive root of p^2 - (a^2)p - ... :
  // p (p+1) = a^2 p + (p+1)  =>  p^2 - a^2 p - 1 = 0
  StateSpaceModel m;
  m.A = Mat::Constant(1, 1, 0.5);
  m.B = Mat::Constant(1, 1, 1.0);
  m.C = Mat::Constant(1, 1, 1.0);
  m.D = Mat::Constant(1, 1, 1.0);
  m.P0 = Mat::Constant(1, 1, 1.0);
  KalmanSchedule ks = kalman_gain_schedule(m, 10);
  const double a2 = 0.25;
  const double root = 0.5 * (a2 + std::sqrt(a2 * a2 + 4.0));
  CHECK(ks.steady_covariance(0, 0) == doctest::Approx(root).epsilon(1e-12));
}

TEST_CASE("kalman_gain_schedule steady state agrees with long iteration") {
  StateSpaceModel m = reference_model();
  KalmanSchedule ks = kalman_gain_schedule(m, 300);
  CHECK((ks.covariances.back() - ks.steady_covariance).norm() < 1e-10);
  CHECK((ks.gains.back() - ks.steady_gain).norm() < 1e-10);
}

TEST_CASE("predictor_step validates the covariance shape") {
  CHECK_THROWS_AS(predictor_step(reference_model(), Mat::Identity(3, 3)), DimensionMismatch);
}

TEST_SUITE_END();
