#ifndef RKF_LEAST_FAVORABLE_HPP
#define RKF_LEAST_FAVORABLE_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "rkf/robust_filter.hpp"

namespace rkf {

/// One iterate of the backward recursion
///   Omega_t^{-1} = Abar_t^T [(Omega_{t+1}^{-1} + theta_t I)^{-1}
///                            - Bbar_t Bbar_t^T]^{-1} Abar_t
/// that generates the least favorable dynamics, with X = Omega^{-1} + theta I.
struct BackwardIterate {
  int t = 0;
  Mat OmegaInv;
  Mat X;
};

/// Evidence that the backward recursion converges: a contraction factor rho
/// in (1, 1/sigma(Abar)) for which (1 - rho^{-2}) SigmaRho^{-1} - Bbar Bbar^T
/// is positive semi-definite, where SigmaRho solves the Stein equation
/// SigmaRho = rho^2 Abar^T SigmaRho Abar + theta I. `holds` records whether
/// the best margin found is nonnegative; a negative margin is a valid answer,
/// not an error. `degenerate` marks the theta = 0 case, where the backward
/// recursion is identically zero and no certificate is needed.
struct ConvergenceCertificate {
  double rho = 0.0;
  Mat SigmaRho;
  double margin = 0.0;
  bool holds = false;
  bool degenerate = false;
};

/// The adversary's model: a 2n-state system driven by unit-variance white
/// noise whose output law is least favorable for the filtering problem.
struct LeastFavorableModel {
  Mat Atil;           // 2n x 2n
  Mat Btil;           // 2n x m
  Mat Ctil;           // p x 2n
  Mat Dtil;           // p x m
  Mat H;              // m x n feedback shaping the perturbation
  Mat Ktil;           // m x m, positive definite
  Mat L;              // m x m, L L^T = Ktil
  Mat OmegaInvLimit;  // n x n
  bool stationary = false;

  Eigen::Index state_dim() const { return Atil.rows(); }
  Eigen::Index obs_dim() const { return Ctil.rows(); }
  Eigen::Index noise_dim() const { return Btil.cols(); }
};

/// Scalar (n = m = 1) analysis of the algebraic equation
///   bbar^2 x^2 - (1 - abar^2 + bbar^2 theta) x + theta = 0:
/// both roots, the associated feedback values f = abar - j bbar with
/// j = abar x bbar / (bbar^2 x - 1), and the limit reached by iterating the
/// map from x = theta.
struct ScalarRootAnalysis {
  double abar = 0.0;
  double bbar = 0.0;
  double theta = 0.0;
  double x1 = 0.0;  // larger root
  double x2 = 0.0;  // smaller root
  double f1 = 0.0;
  double f2 = 0.0;
  double iteration_limit = 0.0;
};

struct SteadyBackwardResult {
  Mat X;
  Mat OmegaInvLimit;
  int iterations = 0;
};

struct StabilizingCheck {
  Mat J;  // n x m
  Mat M;  // n x n, Abar^T - J Bbar^T
  Eigen::VectorXcd eigenvalues;
  bool stable = false;
};

/// The map Theta(X) = Abar^T (X^{-1} - Bbar Bbar^T)^{-1} Abar + theta I,
/// evaluated in the Woodbury form
///   (X^{-1} - Bbar Bbar^T)^{-1} = X + X Bbar (I - Bbar^T X Bbar)^{-1} Bbar^T X
/// which is also defined for singular PSD X. Throws OutOfDomain when X is not
/// PSD or when I - Bbar^T X Bbar loses positive definiteness (equivalently,
/// when X reaches (Bbar Bbar^T)^{-1}).
Mat theta_map(const Mat& x, const Mat& abar, const Mat& bbar, double theta);

/// Time-varying backward recursion over the forward trajectory, from the
/// terminal condition Omega_T^{-1} = 0 down to t = 0. Throws OutOfDomain,
/// tagged with the step index, if an iterate leaves the domain.
std::vector<BackwardIterate> backward_recursion(const StateSpaceModel& model,
                                                const ForwardTrajectory& forward);

/// Fixed point of the Theta iteration started at X = theta I (the recursion's
/// terminal value, which makes the iterate sequence nondecreasing). The limit
/// solves X = Abar^T (X^{-1} - Bbar Bbar^T)^{-1} Abar + theta I to residual
/// 1e-10*(1+|X|_F). A convergence certificate guarantees the iteration
/// converges; without one it may throw NoConvergence.
SteadyBackwardResult steady_backward(const Mat& abar, const Mat& bbar, double theta,
                                     double tol = 1e-12);
SteadyBackwardResult steady_backward(const SteadyState& ss, double tol = 1e-12);

/// Certificate margin min_eig((1 - rho^{-2}) SigmaRho^{-1} - Bbar Bbar^T) at
/// a single rho.
double certificate_margin(const Mat& abar, const Mat& bbar, double theta, double rho);

/// The (rho, margin) curve over a log-spaced grid of `rho_grid` points in
/// (1 + 1e-9, 1/sigma(Abar) - 1e-9).
std::vector<std::pair<double, double>> certificate_sweep(const Mat& abar, const Mat& bbar,
                                                         double theta, int rho_grid);

/// Scans the rho grid and refines around the best point by golden-section
/// search, returning the certificate at the margin-maximizing rho.
ConvergenceCertificate certify(const Mat& abar, const Mat& bbar, double theta, int rho_grid);
ConvergenceCertificate certify(const SteadyState& ss, int rho_grid);

/// Verifies that the backward limit X is the stabilizing solution:
/// J = Abar^T X Bbar (Bbar^T X Bbar - I)^{-1} and M = Abar^T - J Bbar^T must
/// be Schur stable.
StabilizingCheck stabilizing_check(const Mat& x, const Mat& abar, const Mat& bbar);

/// Assembles the stationary least favorable model from the steady state and
/// the backward limit X:
///   Ktil = (I - Bbar^T X Bbar)^{-1},  L L^T = Ktil,  H = Ktil Bbar^T X Abar,
///   Atil = [A, B H; 0, Abar + Bbar H],  Btil = [B; Bbar] L,
///   Ctil = [C, D H],  Dtil = D L.
/// Throws NotPositiveDefinite when I - Bbar^T X Bbar fails.
LeastFavorableModel assemble(const StateSpaceModel& model, const SteadyState& ss, const Mat& x);

/// Per-step least favorable models along a finite-horizon trajectory; element
/// t uses G_t, theta_t and Omega_{t+1}^{-1}. Mid-interval elements converge
/// to the stationary assemble() output as the horizon grows.
std::vector<LeastFavorableModel> assemble_time_varying(
    const StateSpaceModel& model, const ForwardTrajectory& forward,
    const std::vector<BackwardIterate>& backward);

/// Closed-form scalar analysis; also cross-checks the iteration limit.
/// Throws NoRealRoots when the discriminant is not positive or the roots are
/// not both positive.
ScalarRootAnalysis scalar_oracle(double abar, double bbar, double theta);

struct LfSimulation {
  std::vector<Vec> states;        // xi_0 .. xi_T (2n each)
  std::vector<Vec> observations;  // y_0 .. y_{T-1}
};

/// Simulates the least favorable model for T steps driven by unit-variance
/// white Gaussian noise; xi_0 = [x_0; 0] with x_0 ~ N(0, P0). The same seed
/// replays the same trajectories.
LfSimulation simulate_lf(const LeastFavorableModel& lf, const Mat& p0, int horizon,
                         std::uint64_t seed);

}  // namespace rkf

#endif  // RKF_LEAST_FAVORABLE_HPP
