#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/SparseCholesky>

#include "shelab/coefficients.hpp"
#include "shelab/domain.hpp"
#include "shelab/noise.hpp"

namespace shelab {

/// Factorization of (I - dt Delta_h), shared by forward and backward solves.
class StepOperator {
 public:
  StepOperator(const SpatialGrid& grid, double dt);

  double dt() const { return dt_; }
  std::size_t size() const { return n_; }
  /// out = (I - dt Delta_h)^{-1} rhs. `out` may alias `rhs`.
  void solve(std::span<const double> rhs, std::span<double> out) const;
  const Eigen::SparseMatrix<double>& matrix() const { return A_; }

 private:
  double dt_;
  std::size_t n_;
  Eigen::SparseMatrix<double> A_;
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
};

enum class NoiseMode { Tree, Sampled };

/// Tree or path ensemble behind a common scenario view. A scenario at level k
/// is a tree node (2^k of them) or a path (M of them at every level).
class NoiseSource {
 public:
  explicit NoiseSource(BernoulliTree tree) : src_(std::move(tree)) {}
  explicit NoiseSource(PathEnsemble paths) : src_(std::move(paths)) {}

  NoiseMode mode() const { return src_.index() == 0 ? NoiseMode::Tree : NoiseMode::Sampled; }
  const TimeMesh& mesh() const;
  std::size_t scenarios(int level) const;
  /// Scenario at level-1 that scenario j at `level` descends from.
  std::size_t parent(int level, std::size_t j) const;
  /// Increment dB_{level-1} leading into scenario j at `level`.
  double increment_into(int level, std::size_t j) const;
  std::vector<double> history(int level, std::size_t j) const;
  double brownian(int level, std::size_t j) const;
  const BernoulliTree& tree() const;
  const PathEnsemble& paths() const;
  std::uint64_t seed() const;

 private:
  std::variant<BernoulliTree, PathEnsemble> src_;
};

struct ForwardCoefficients {
  CoefficientField a = CoefficientField::constant(0.0);
  CoefficientField b = CoefficientField::constant(0.0);
};

/// Space-time solution values for every scenario of every level.
class TrajectoryEnsemble {
 public:
  TrajectoryEnsemble(SpatialGrid grid, NoiseSource noise, std::string scheme);

  const SpatialGrid& grid() const { return grid_; }
  const NoiseSource& noise() const { return noise_; }
  const TimeMesh& mesh() const { return noise_.mesh(); }
  int steps() const { return mesh().steps; }
  const std::string& scheme() const { return scheme_; }
  std::size_t scenarios(int level) const { return noise_.scenarios(level); }

  std::span<double> at(int level, std::size_t j);
  std::span<const double> at(int level, std::size_t j) const;

  bool excluded(int level, std::size_t j) const { return excluded_[offset_[level] / grid_.size() + j] != 0; }
  void exclude(int level, std::size_t j) { excluded_[offset_[level] / grid_.size() + j] = 1; }
  std::size_t excluded_paths() const;

  /// E[f(scenario)] at a level; exact tree weights, excluded scenarios dropped.
  double expectation(int level, const std::function<double(std::span<const double>, std::size_t)>& f) const;

 private:
  SpatialGrid grid_;
  NoiseSource noise_;
  std::string scheme_;
  std::vector<std::size_t> offset_;
  std::vector<double> data_;
  std::vector<unsigned char> excluded_;
};

/// One Euler-Maruyama step: (I - dt Delta_h) y1 = y0 + dt a y0 + b y0 dB.
void step_forward(std::span<const double> y0, std::span<const double> a, std::span<const double> b, double dB,
                  const StepOperator& op, std::span<double> y1);

TrajectoryEnsemble solve_forward(std::span<const double> y0, const ForwardCoefficients& coeffs, const NoiseSource& noise,
                                 const SpatialGrid& grid);

struct SemilinearOptions {
  double blowup_cap = 1e6;
};

/// dw - Delta w dt = w^m dB, same scheme; paths whose sup norm passes the cap are excluded.
TrajectoryEnsemble solve_semilinear(std::span<const double> w0, int exponent, const NoiseSource& noise,
                                    const SpatialGrid& grid, SemilinearOptions opt = {});

enum class TransformVariant { Ito, Literal };

struct TransformReport {
  std::vector<double> gaps;  ///< per scenario at the final level, max_k |y~_k - y_k| / max_k |y_k| in L2
  double mean_gap = 0.0;
  double max_gap = 0.0;
};

/// Remark 1 oracle for constant b: solves z_t - Delta z = (a - c b^2) z per path with
/// c = 1/2 (Ito) or 1 (literal) and compares exp(b B) z with the SPDE path.
TransformReport exp_transform_oracle(const TrajectoryEnsemble& y, const ForwardCoefficients& coeffs,
                                     TransformVariant variant = TransformVariant::Ito);

/// E||y(t_k)||^2 for k = 0..N_t.
std::vector<double> energy_trace(const TrajectoryEnsemble& y);

struct UniquenessReport {
  bool invertible = true;
  double min_factor = 0.0;      ///< min |1 + a dt + b dB| over nodes and scenarios
  std::size_t flagged = 0;      ///< node/scenario pairs below 1e-12
  double terminal_norm = 0.0;   ///< max over leaves of ||d(T)||
  double max_norm = 0.0;        ///< max over all levels of ||d(t_k)||
  double reconstruction_error = 0.0;
  bool consistent = true;       ///< d(T) = 0 implies d = 0, or d(T) != 0
};

/// Lemma 2.3 probe on the difference d = y1 - y2 of two trajectories with the
/// same noise and coefficients: checks every step factor and rebuilds d
/// backward from d(T) through the inverse steps.
UniquenessReport backward_uniqueness_probe(const TrajectoryEnsemble& y1, const TrajectoryEnsemble& y2,
                                           const ForwardCoefficients& coeffs);

/// Preset initial data.
Field preset_sine(const SpatialGrid& grid, int mode = 1);
Field preset_bump(const SpatialGrid& grid, const Point& center, double width);
/// sin-envelope times a seeded sum of Gaussian bumps.
Field preset_random_bumps(const SpatialGrid& grid, std::uint64_t seed, int count = 3);

}  // namespace shelab
