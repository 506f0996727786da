#pragma once

#include <optional>
#include <vector>

#include "shelab/domain.hpp"
#include "shelab/forward.hpp"

namespace shelab {

/// Phi = phi y and F = a Phi - y Lap(phi) - 2 grad(phi).grad(y) for every
/// scenario of every level, together with the coefficient values used.
/// Identity mode (no cutoff) gives Phi = y and F = a y.
class LocalizedField {
 public:
  const TrajectoryEnsemble& source() const { return *y_; }
  bool identity() const { return !cutoff_.has_value(); }
  const std::optional<CutoffFunction>& cutoff() const { return cutoff_; }

  std::span<const double> phi(int level, std::size_t j) const { return slice(Phi_, level, j); }
  std::span<const double> F(int level, std::size_t j) const { return slice(F_, level, j); }
  std::span<const double> a(int level, std::size_t j) const { return slice(a_, level, j); }
  std::span<const double> b(int level, std::size_t j) const { return slice(b_, level, j); }

  friend LocalizedField localize(const TrajectoryEnsemble& y, const ForwardCoefficients& coeffs,
                                 const CutoffFunction* cutoff);

 private:
  std::span<const double> slice(const std::vector<double>& v, int level, std::size_t j) const {
    return {v.data() + offset_[level] + j * n_, n_};
  }
  const TrajectoryEnsemble* y_ = nullptr;
  std::optional<CutoffFunction> cutoff_;
  std::size_t n_ = 0;
  std::vector<std::size_t> offset_;
  std::vector<double> Phi_, F_, a_, b_;
};

/// `cutoff == nullptr` selects identity mode. The ensemble must outlive the result.
LocalizedField localize(const TrajectoryEnsemble& y, const ForwardCoefficients& coeffs, const CutoffFunction* cutoff);

struct FrequencyTrace {
  std::vector<double> t, H, D, N;
  std::vector<unsigned char> valid;
  double lambda = 0.0;
  Point x0{0.0, 0.0};
};

/// H = E int Phi^2 K, D = E int |grad Phi|^2 K, N = 2D/H where H >= 1e-14 H(0).
FrequencyTrace compute_HDN(const LocalizedField& loc, const HeatKernelWeight& weight);

struct IdentityResidual {
  std::vector<double> residual;  ///< (H_{k+1} - H_k)/dt - RHS_k, k = 0..N_t-1
  std::vector<double> rhs;
  double max_abs = 0.0;
  double max_normalized = 0.0;   ///< max |res| / max H
  double integrated = 0.0;       ///< sum dt |res_k| / max H
  double signed_integrated = 0.0; ///< sum dt res_k / max H
};

/// Lemma 2.1 (cutoff) or Lemma 4.1 (identity):
/// H' = -2D + 2 E int Phi F K + E int b^2 Phi^2 K.
IdentityResidual hprime_identity_residual(const FrequencyTrace& trace, const LocalizedField& loc,
                                          const HeatKernelWeight& weight);

struct BoundNorms {
  double a_sup = 0.0;  ///< ||a|| over G
  double b_w1 = 0.0;   ///< ||b||_{W^{1,inf}} over G (identity) or supp phi (cutoff)
};

struct BoundCheck {
  double margin = 0.0;     ///< min over node pairs s < t of RHS - LHS
  std::size_t worst_s = 0, worst_t = 0;
  double tolerance = 0.0;
  bool pass = true;
  std::vector<double> f_term;  ///< E int F^2 K / H per node (cutoff mode)
};

/// Lemma 2.2 (cutoff) or Lemma 4.2 (identity) on every pair of valid trace
/// nodes inside [s_index, t_index]; trapezoid quadrature in time.
BoundCheck frequency_bound_check(const FrequencyTrace& trace, const LocalizedField& loc, const HeatKernelWeight& weight,
                                 const BoundNorms& norms, std::size_t s_index, std::size_t t_index,
                                 double tol_scale = 1.0);

struct BoundarySignReport {
  double min_sign = 0.0;
  std::size_t negative = 0;
  std::size_t checked = 0;
  bool pass = true;
};

/// (x - x0).nu >= 0 at every boundary node.
BoundarySignReport boundary_sign_audit(const SpatialGrid& grid, const Point& x0);

}  // namespace shelab
