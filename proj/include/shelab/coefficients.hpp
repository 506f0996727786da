#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "shelab/domain.hpp"
#include "shelab/noise.hpp"

namespace shelab {

/// Coefficient a(t,x) or b(t,x) sampled at the time nodes t_k.
///
/// Three forms: a constant, a deterministic table built from a function of
/// (t, x), or an adapted callback that sees only dB_0..dB_{k-1}.
class CoefficientField {
 public:
  using Function = std::function<double(double, const Point&)>;
  using Adapted = std::function<void(int, std::span<const double>, std::span<double>)>;

  CoefficientField() = default;

  static CoefficientField constant(double value);
  /// Tabulates fn at t_0..t_{N_t}; the spatial gradient comes from centered
  /// differences of fn itself at x +- h/100.
  static CoefficientField from_function(const SpatialGrid& grid, const TimeMesh& mesh, Function fn);
  /// Per-path coefficient; `sup` and `sup_grad` must bound the callback values.
  static CoefficientField adapted(Adapted fn, double sup, double sup_grad);

  bool is_constant() const { return kind_ == Kind::Constant; }
  bool deterministic() const { return kind_ != Kind::Adapted; }
  double constant_value() const { return value_; }

  /// Nodal values at step k given the increments dB_0..dB_{k-1}.
  void evaluate(int k, std::span<const double> history, std::span<double> out) const;
  /// Deterministic values at step k.
  Field at(int k, std::size_t nodes) const;

  double sup() const { return sup_; }
  double sup_grad() const { return sup_grad_; }
  /// max(sup|c|, sup|grad c|).
  double w1inf() const { return std::max(sup_, sup_grad_); }
  /// Same norms restricted to the nodes where mask is set (deterministic forms only;
  /// adapted fields return the global bounds).
  double sup_on(const std::vector<unsigned char>& mask) const;
  double w1inf_on(const std::vector<unsigned char>& mask) const;

  CoefficientField scaled(double factor) const;

 private:
  enum class Kind { Constant, Table, Adapted };
  Kind kind_ = Kind::Constant;
  double value_ = 0.0;
  std::shared_ptr<const std::vector<Field>> table_;
  std::shared_ptr<const std::vector<Field>> grad_norm_;
  Adapted fn_;
  double factor_ = 1.0;
  double sup_ = 0.0;
  double sup_grad_ = 0.0;
};

/// Bounded smooth field for seeded sweeps:
/// c(t,x) = bound * sum_j w_j s_j(x) cos(g_j t) / sum_j |w_j| with products of sines s_j,
/// so |c| <= bound.
CoefficientField random_smooth_field(const SpatialGrid& grid, const TimeMesh& mesh, double bound,
                                     std::uint64_t seed);

}  // namespace shelab
