#pragma once

#include <string>
#include <vector>

#include "shelab/domain.hpp"
#include "shelab/forward.hpp"
#include "shelab/frequency.hpp"

namespace shelab {

struct UcpInputs {
  double r = 0.1;        ///< radius of B_r inside G_0
  double m = 0.25;       ///< max over the closure of G of |x - x0|^2
  double T = 1.0;
  double a_sup = 0.0;    ///< ||a||_G
  double b_norm = 0.0;   ///< ||b||_G
  int n = 1;
  double energy0 = 1.0;  ///< E||y(0)||^2
  double energyT = 1.0;  ///< E||y(T)||^2
};

struct UcpConstants {
  double r = 0.0, m = 0.0, T = 0.0;
  double a_sup = 0.0, a_sq = 0.0, b_sq = 0.0;
  int n = 1;
  double log_ratio = 0.0;   ///< ln(E||y(0)||^2 / E||y(T)||^2), clamped at 0
  double J = 0.0;
  double Dcal = 0.0;
  double denominator = 0.0; ///< r^2 T + 8 m (T+1) exp(T ||b||^2)
  double delta = 0.0;
  double beta = 0.0;
  double lambda_tilde = 0.0;
  double theta = 0.0;       ///< 8 m (T+1) exp(T ||b||^2) / (r^2 T)
  bool backward_uniqueness_branch = false;
};

/// J(T) = (T+1) e^{T||b||^2} [m/T^2 + 4||a|| + T||a||^2 + 2(1+T)||b||^2] + n/2.
double ucp_J(double T, double m, double a_sup, double b_sq, int n);

/// Convex-case constants. E||y(T)||^2 = 0 sets backward_uniqueness_branch
/// (Theorem 1.2 is then vacuous) instead of throwing.
UcpConstants compute_constants(const UcpInputs& in);

/// {2^-j : j = 0..40}, largest first.
std::vector<double> lambda_grid();

struct LambdaSelection {
  bool found = false;
  double lambda = 0.0;
  double bracket = 0.0;
  std::vector<double> lambdas, A, brackets;
};

/// Largest grid lambda with 1 - (8 lambda / r^2)(A(lambda) + n/2) >= 1/2.
LambdaSelection select_lambda(const std::vector<double>& lambdas, const std::vector<double>& A, double r, int n);

/// lambda N_lambda(T) for Phi(T) = phi y(T) (identity when cutoff is null),
/// with the kernel centered at x0.
std::vector<double> sharp_profile(const TrajectoryEnsemble& y, const CutoffFunction* cutoff, const Point& x0,
                                  const std::vector<double>& lambdas);

/// Right side of (Pr-4) for a supplied eps in (0, T/2).
std::vector<double> epsilon_profile(const TrajectoryEnsemble& y, const ForwardCoefficients& coeffs,
                                    const CutoffFunction& cutoff, const Point& x0, const std::vector<double>& lambdas,
                                    double eps, double b_norm_r4);

struct ThreeBallReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double lambda = 0.0;
  double bracket = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

/// (5.14): E int_{B_r2} |x-x0|^2 y^2(T) theta <= r1^2 E int_{B_r1} y^2(T) theta,
/// theta = exp(-|x-x0|^2 / (4 lambda)).
ThreeBallReport three_ball_check(const TrajectoryEnsemble& y, const Point& x0, double r1, double r2, double lambda,
                                 double tol);

struct UcpCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double global0 = 0.0;
  double localT = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string note;
};

/// Theorem 1.2: E||y(T)||^2 <= 2^delta e^beta (E||y(0)||^2)^{1-delta} (E||y(T)||^2_{B_r})^delta.
UcpCheck quantitative_ucp_check(const TrajectoryEnsemble& y, const Ball& br, const UcpConstants& c, double tol);

struct PropagationStep {
  Ball ball;
  Ball overlap;
  double mass = 0.0;
  double overlap_mass = 0.0;
  bool vanishing = false;
  bool overlap_vanishing = false;
  bool resolved = true;          ///< the ball contains at least one grid node
  bool overlap_resolved = true;
  ThreeBallReport three_ball;
};

struct PropagationReport {
  std::vector<PropagationStep> steps;
  double global_mass = 0.0;
  bool seed_vanishing = false;
  bool reached_target = false;
  std::size_t vanishing_balls = 0;  ///< leading run of vanishing chain balls
  bool consistent = true;           ///< no vanishing S~_i next to a non-vanishing S_{i+1} under (5.14)
};

/// Walks ball_chain(seed, target) with the 1e-12 relative vanishing threshold.
PropagationReport propagate_vanishing(const TrajectoryEnsemble& y, const Ball& seed, const Ball& target);

}  // namespace shelab
