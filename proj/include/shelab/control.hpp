#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shelab/coefficients.hpp"
#include "shelab/forward.hpp"
#include "shelab/observability.hpp"

namespace shelab {

/// Nodal field per tree node per level; level k holds 2^k fields.
class TreeField {
 public:
  TreeField() = default;
  TreeField(int depth, std::size_t nodes);

  int depth() const { return depth_; }
  std::size_t nodes() const { return n_; }
  std::span<double> at(int level, std::size_t i) { return {data_.data() + offset(level) + i * n_, n_}; }
  std::span<const double> at(int level, std::size_t i) const { return {data_.data() + offset(level) + i * n_, n_}; }

 private:
  std::size_t offset(int level) const { return ((std::size_t{1} << level) - 1) * n_; }
  int depth_ = 0;
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Backward controlled system (1.8) on G with control region G0 x E1.
/// BSDE coefficients a1, b1 must be deterministic.
class ControlProblem {
 public:
  ControlProblem(SpatialGrid grid, TimeMesh mesh, CoefficientField a1, CoefficientField b1, Ball g0,
                 MeasurableTimeSet e1, int depth_cap = 16);

  const SpatialGrid& grid() const { return grid_; }
  const TimeMesh& mesh() const { return tree_.mesh(); }
  const BernoulliTree& tree() const { return tree_; }
  const CoefficientField& a1() const { return a1_; }
  const CoefficientField& b1() const { return b1_; }
  const Ball& g0() const { return g0_; }
  const MeasurableTimeSet& e1() const { return e1_; }
  const std::vector<unsigned char>& mask() const { return mask_; }
  /// Step weights: overlap(E1, [t_k, t_k+1]) / dt when that fraction is >= 1/2, else 0.
  const std::vector<double>& weights() const { return w_; }
  const StepOperator& step() const { return op_; }
  std::size_t size() const { return grid_.size(); }

 private:
  SpatialGrid grid_;
  BernoulliTree tree_;
  CoefficientField a1_, b1_;
  Ball g0_;
  MeasurableTimeSet e1_;
  std::vector<unsigned char> mask_;
  std::vector<double> w_;
  StepOperator op_;
};

enum class BackwardMode { AdjointExact, Independent };

struct BackwardPair {
  TreeField z;  ///< levels 0..N
  TreeField Z;  ///< levels 0..N-1
};

/// Backward induction on the tree. `zT` holds the terminal datum at level N;
/// `h` and `f` (levels 0..N-1) may be null. The control enters as w_k chi_G0 f_k.
BackwardPair solve_backward_tree(const ControlProblem& p, const TreeField& zT, const TreeField* h, const TreeField* f,
                                 BackwardMode mode = BackwardMode::AdjointExact);

/// Dual forward equation (6.2) from a deterministic initial datum.
TrajectoryEnsemble dual_forward(const ControlProblem& p, std::span<const double> yhat0);

struct DualityReport {
  double lhs = 0.0;  ///< E<y(T), z(T)> - <y0, z(0)>
  double rhs = 0.0;  ///< sum dt E<y_k, h_k + w_k chi f_k>
  double residual = 0.0;
  double scale = 0.0;
  double normalized = 0.0;
};

DualityReport duality_check(const ControlProblem& p, const TrajectoryEnsemble& yhat, const BackwardPair& zz,
                            const TreeField* h, const TreeField* f);

/// Lambda yhat0 = -z(0) for z_T = 0, h = 0, f = dual state from yhat0.
Field gramian_apply(const ControlProblem& p, std::span<const double> yhat0);

/// The dual state restricted to active steps, stored as a control field.
TreeField control_from_dual(const ControlProblem& p, std::span<const double> yhat0);

struct KrylovResult {
  Field x;
  std::vector<double> residuals;  ///< ||r_j||, j = 0..iterations
  int iterations = 0;
  bool converged = false;
  bool monotone = true;
};

/// Conjugate residual method for symmetric positive (semi)definite operators.
KrylovResult conjugate_residual(const std::function<Field(const Field&)>& apply, const Field& rhs, double rel_tol,
                                int max_iter);

struct SpectrumReport {
  double min_eig = 0.0;
  double max_eig = 0.0;
  double condition = 0.0;
  double symmetry_error = 0.0;
};

/// Assembles Lambda column by column and diagonalizes it.
SpectrumReport gramian_spectrum(const ControlProblem& p, Eigen::MatrixXd* assembled = nullptr);

struct NullControlReport {
  Field yhat0;
  TreeField control;
  KrylovResult krylov;
  double zT_norm = 0.0;
  double free_z0_norm = 0.0;
  double z0_norm = 0.0;  ///< re-verified by a fresh backward solve
  double eps_reg = 0.0;
  SpectrumReport spectrum;
  bool converged = false;
};

/// Aims at ||z(0)|| <= threshold ||z_T||: CR on Lambda yhat0 = z_free(0) stops once
/// the residual (which is z(0) in the adjoint-exact mode) is below a tenth of that.
NullControlReport synthesize_null_control(const ControlProblem& p, const TreeField& zT, double threshold,
                                          int max_iter, double eps_reg = 0.0, bool spectrum = true);

struct RegularizationPoint {
  double eps_reg = 0.0;
  double residual = 0.0;  ///< verified ||z(0) - z0||
};

struct ApproxControlReport {
  Field yhat0;
  TreeField control;
  std::vector<RegularizationPoint> curve;  ///< s 10^-d, d = 0..16, s = largest Gramian eigenvalue (decreasing eps_reg)
  std::vector<RegularizationPoint> bisection;
  double chosen_eps = 0.0;
  double residual = 0.0;
  double target = 0.0;
  bool achieved = false;
  bool monotone = true;
};

/// (Lambda + eps_reg I) yhat0 = z_free(0) - z0 with eps_reg chosen from a decade
/// scan and log-bisection so that the verified residual is <= accuracy.
ApproxControlReport synthesize_approx_control(const ControlProblem& p, const TreeField& zT, const TreeField* h,
                                              std::span<const double> z0_target, double accuracy);

struct SupportReport {
  double observation_mass = 0.0;  ///< sum dt w_k E int_G0 yhat_k^2
  double eta_norm_sq = 0.0;
  double ratio = 0.0;
};

SupportReport duality_support_check(const ControlProblem& p, std::span<const double> eta);

/// sqrt(E ||v(level)||^2) of a tree field level.
double tree_level_norm(const ControlProblem& p, const TreeField& v, int level);

}  // namespace shelab
