#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shelab/ucp.hpp"

namespace shelab {

/// Finite union of disjoint open intervals inside (0, T).
class MeasurableTimeSet {
 public:
  MeasurableTimeSet() = default;
  /// Sorts the intervals; throws ConfigError on overlap, empty or out-of-range pieces.
  MeasurableTimeSet(std::vector<std::pair<double, double>> intervals, double horizon);

  const std::vector<std::pair<double, double>>& intervals() const { return iv_; }
  double measure() const;
  /// |E intersect (lo, hi)|.
  double measure_in(double lo, double hi) const;
  double horizon() const { return T_; }

 private:
  std::vector<std::pair<double, double>> iv_;
  double T_ = 0.0;
};

struct DensitySequence {
  double t0 = 0.0;
  double t1 = 0.0;
  double z = 2.0;
  bool found = false;
  double best_violation = 0.0;      ///< min over m of 3|E cap gap| - gap length, for the returned t1
  std::vector<double> t;            ///< t_1 .. t_{depth+1}
  std::vector<double> gaps;         ///< |E cap (t_{m+1}, t_m)|, m = 1..depth
  std::vector<double> gap_lengths;  ///< t_m - t_{m+1}
};

/// Lemma 5.1 construction: t0 = midpoint of the longest interval, t1 from a
/// 1024-point scan of (t0, T), largest candidate first.
DensitySequence density_sequence(const MeasurableTimeSet& E, double z, int depth);

enum class EnergyVariant { Derivation, Printed, Larger };
enum class ThetaVariant { Substituted, Literal };

struct ObservabilityOptions {
  EnergyVariant energy = EnergyVariant::Derivation;
  ThetaVariant theta = ThetaVariant::Substituted;
  int theta_grid = 1024;
};

/// C(a,b,t): (2||a|| + ||b||^2) t (derivation) or (2||a||^2 + ||b||^2) t (printed).
double energy_constant(double a_sup, double b_sq, double t, EnergyVariant v);

struct ObservabilityConstants {
  double Theta = 0.0;
  double Theta_literal = 0.0;
  double Theta_substituted = 0.0;
  double gamma = 0.0;
  double C_abT = 0.0;
  double z = 2.0;
  double eps1 = 0.0;
  double log_eps1 = 0.0;
};

ObservabilityConstants observability_constants(const UcpInputs& in, double z, const ObservabilityOptions& opt = {});

struct InterpolationRecord {
  double t = 0.0;
  double eps = 0.0;
  double lhs = 0.0;
  double local_term = 0.0;
  double initial_term = 0.0;
  double rhs = 0.0;
  bool pass = true;
};

/// (ob-1) at time t from the global and local energies at t and the global energy at 0.
InterpolationRecord interpolation_split(double t, double global_t, double local_t, double global_0,
                                        const ObservabilityConstants& c, double eps, double tol = 0.0);

struct EpsilonSequence {
  std::vector<double> log_eps, log_alpha, log_sigma;
  std::vector<double> eps, alpha, sigma;
  double max_bound_excess = 0.0;    ///< max over m of log eps_m - log eps_1 (<= 0 required)
  double max_matching_error = 0.0;  ///< max relative |sigma_m / (alpha_{m+1} e^{-C}) - 1|
  bool bound_holds = true;
};

/// Recursion (3.26) from eps_1; logs carried throughout so deep levels do not underflow.
EpsilonSequence epsilon_sequence(const ObservabilityConstants& c, const std::vector<double>& gaps);

/// Piecewise-linear-in-time energy traces on the time mesh.
struct EnergyTraces {
  std::vector<double> t;
  std::vector<double> global;  ///< E||y(t_k)||^2_{L2(G)}
  std::vector<double> local;   ///< E||y(t_k)||^2_{L2(B_r)}
  double at_global(double s) const;
  double at_local(double s) const;
  /// int over E cap (lo, hi) of the local trace, exact for the interpolant.
  double local_mass(const MeasurableTimeSet& E, double lo, double hi) const;
};

EnergyTraces energy_traces(const TrajectoryEnsemble& y, const Ball& br);

struct GapRecord {
  int m = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
};

struct TelescopingReport {
  std::vector<GapRecord> gaps;
  double summed_lhs = 0.0, summed_rhs = 0.0;
  bool summed_pass = true;
  double final_lhs = 0.0;         ///< E||y(T)||^2
  double observation_mass = 0.0;  ///< E int_E int_{B_r} y^2
  double log_C_paper = 0.0;
  double C_paper = 0.0;
  double C_emp = 0.0;
  bool final_pass = true;
  bool emp_below_bound = true;
  bool hard_failure = false;      ///< zero observation with nonzero LHS
};

TelescopingReport telescoping_check(const EnergyTraces& tr, const MeasurableTimeSet& E, const DensitySequence& seq,
                                    const ObservabilityConstants& c, const EpsilonSequence& es, double tol = 0.0);

struct EnergyEstimateReport {
  double worst_ratio = 0.0;  ///< max_k E||y(t_k)||^2 / (exp(C t_k) E||y(0)||^2)
  double tolerance = 0.0;
  bool pass = true;
};

EnergyEstimateReport energy_estimate_check(const std::vector<double>& times, const std::vector<double>& energy,
                                           double a_sup, double b_sq, EnergyVariant v, double tol);

}  // namespace shelab
