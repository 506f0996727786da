#pragma once

#include <string>
#include <vector>

#include "shelab/config.hpp"
#include "shelab/control.hpp"
#include "shelab/forward.hpp"
#include "shelab/frequency.hpp"
#include "shelab/observability.hpp"
#include "shelab/report.hpp"
#include "shelab/ucp.hpp"

namespace shelab {

/// Seed streams; every random object is derived from (run seed, stream, index).
enum SeedStream : std::uint64_t {
  kSweepStream = 1,
  kIdentityStream = 2,
  kTransformStream = 3,
  kDualityStream = 4,
  kNullStream = 5,
  kApproxStream = 6,
  kSimulateStream = 7,
};

SpatialGrid make_grid(const ExperimentConfig& cfg);
TimeMesh make_time_mesh(const ExperimentConfig& cfg);
/// Tree of depth N_t, or cfg.paths sampled paths in mc mode.
NoiseSource make_noise(const ExperimentConfig& cfg, const TimeMesh& mesh, std::uint64_t seed);
Field initial_data(const ExperimentConfig& cfg, const SpatialGrid& grid, std::uint64_t seed);
/// Random smooth a and b with |a| <= a_bound, |b| <= b_bound.
ForwardCoefficients sweep_coefficients(const ExperimentConfig& cfg, const SpatialGrid& grid, const TimeMesh& mesh,
                                       std::uint64_t seed);

/// Everything the acceptance sweep asserts for one seeded configuration.
struct SweepOutcome {
  int index = 0;
  std::uint64_t seed = 0;
  double a_sup = 0.0, b_norm = 0.0;
  double energy0 = 0.0, energyT = 0.0;
  BoundCheck frequency;           ///< Lemma 4.2 (identity, convex G)
  BoundCheck frequency_cutoff;    ///< Lemma 2.2 (cutoff on B_r4), informational
  BoundarySignReport boundary;
  UcpConstants constants;
  UcpCheck ucp;
  UcpCheck ucp_scaled;            ///< same with y -> 3y
  bool scale_invariant = true;
  LambdaSelection selection;
  ThreeBallReport three_ball;
  ObservabilityConstants obs;
  EpsilonSequence eps;
  TelescopingReport telescoping;
  double C_emp_G0 = 0.0;          ///< E||y(T)||^2 / E int_E int_G0 y^2
  EnergyEstimateReport energy;
};

SweepOutcome run_sweep_case(const ExperimentConfig& cfg, int index, const DensitySequence& seq);
std::vector<SweepOutcome> run_sweep(const ExperimentConfig& cfg);

/// Criterion 1: relative sup error against exp(-pi^2 T) sin(pi x).
struct OracleStudy {
  double rel_error = 0.0;
  double tolerance = 1e-3;
  bool pass = false;
};
OracleStudy deterministic_oracle(const ExperimentConfig& cfg, RunReport* rep);

/// Criterion 2: closed-form caloric residual at random probes.
struct KernelStudy {
  double max_residual = 0.0;
  double max_fd_residual = 0.0;
  int probes = 0;
  bool pass = false;
};
KernelStudy kernel_study(const ExperimentConfig& cfg, RunReport* rep, int probes = 10000);

/// Criterion 3: H' identity residual at N_t = identity_steps on a short horizon,
/// plus the Richardson difference ratio at N_t = 4, 8, 16.
struct IdentityStudy {
  std::vector<double> integrated;        ///< per seed and mode at identity_steps
  double worst = 0.0;
  std::vector<double> ratios;            ///< per seed and mode
  double tolerance = 0.05;
  bool residual_pass = false;
  bool halving_pass = false;
};
IdentityStudy identity_study(const ExperimentConfig& cfg, RunReport* rep, int seeds = 5);

/// Criterion 7: Lemma 5.1 construction and the epsilon recursion.
struct SequenceStudy {
  DensitySequence seq;
  ObservabilityConstants constants;
  EpsilonSequence eps;
  int exact_failures = 0;
  bool pass = false;
};
SequenceStudy sequence_study(const ExperimentConfig& cfg, RunReport* rep);

/// Criterion 9: duality residuals.
struct DualityStudy {
  double worst_exact = 0.0;
  std::vector<double> dt, independent;
  double slope = 0.0;
  bool exact_pass = false;
  bool slope_pass = false;
};
DualityStudy duality_study(const ExperimentConfig& cfg, RunReport* rep, int triples = 10);

/// Criterion 10.
struct NullStudy {
  double worst_ratio = 0.0;
  int worst_iterations = 0;
  double min_eig = 0.0, max_eig = 0.0;
  bool pass = false;
};
NullStudy null_control_study(const ExperimentConfig& cfg, RunReport* rep);

/// Criterion 11.
struct ApproxStudy {
  double worst_relative = 0.0;
  bool monotone = true;
  bool pass = false;
};
ApproxStudy approx_control_study(const ExperimentConfig& cfg, RunReport* rep);

/// Criterion 12: Remark 1 gap under dt refinement (sampled paths).
struct TransformStudy {
  std::vector<double> dt, gaps;
  double slope = 0.0;
  double literal_gap = 0.0;
  bool pass = false;
};
TransformStudy transform_study(const ExperimentConfig& cfg, RunReport* rep);

/// Records every sweep inequality into the report under `prefix`.
void record_sweep(const std::vector<SweepOutcome>& sweep, const ExperimentConfig& cfg, RunReport& rep,
                  bool frequency, bool ucp, bool observe);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Named subcommands: simulate, frequency, ucp, observe, control, verify.
RunReport run_experiment(const std::string& name, const ExperimentConfig& cfg);

}  // namespace shelab
