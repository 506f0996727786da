#include "shelab/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "shelab/errors.hpp"

namespace shelab {

StepOperator::StepOperator(const SpatialGrid& grid, double dt) : dt_(dt), n_(grid.size()) {
  if (!(dt > 0.0)) throw ConfigError("step operator: dt must be positive");
  Eigen::SparseMatrix<double> eye(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  eye.setIdentity();
  A_ = eye - dt * laplacian_matrix(grid);
  A_.makeCompressed();
  ldlt_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(A_);
  if (ldlt_->info() != Eigen::Success) {
    throw NumericalError("step operator: factorization of I - dt*Laplacian failed");
  }
}

void StepOperator::solve(std::span<const double> rhs, std::span<double> out) const {
  if (rhs.size() != n_ || out.size() != n_) throw ShapeError("step operator: field size mismatch");
  Eigen::Map<const Eigen::VectorXd> r(rhs.data(), static_cast<Eigen::Index>(n_));
  Eigen::VectorXd x = ldlt_->solve(r);
  if (ldlt_->info() != Eigen::Success || !x.allFinite()) {
    throw NumericalError("step operator: solve failed");
  }
  std::copy(x.data(), x.data() + n_, out.begin());
}

// ---------------------------------------------------------------------------

const TimeMesh& NoiseSource::mesh() const {
  return std::visit([](const auto& s) -> const TimeMesh& { return s.mesh(); }, src_);
}

std::size_t NoiseSource::scenarios(int level) const {
  if (mode() == NoiseMode::Tree) return std::get<BernoulliTree>(src_).nodes(level);
  return static_cast<std::size_t>(std::get<PathEnsemble>(src_).paths());
}

std::size_t NoiseSource::parent(int, std::size_t j) const { return mode() == NoiseMode::Tree ? j >> 1 : j; }

double NoiseSource::increment_into(int level, std::size_t j) const {
  if (mode() == NoiseMode::Tree) return std::get<BernoulliTree>(src_).increment_into(level, j);
  return std::get<PathEnsemble>(src_).increment(static_cast<int>(j), level - 1);
}

std::vector<double> NoiseSource::history(int level, std::size_t j) const {
  if (mode() == NoiseMode::Tree) return std::get<BernoulliTree>(src_).history(level, j);
  auto p = std::get<PathEnsemble>(src_).path(static_cast<int>(j));
  return {p.begin(), p.begin() + level};
}

double NoiseSource::brownian(int level, std::size_t j) const {
  if (mode() == NoiseMode::Tree) return std::get<BernoulliTree>(src_).brownian(level, j);
  return std::get<PathEnsemble>(src_).brownian(static_cast<int>(j), level);
}

const BernoulliTree& NoiseSource::tree() const {
  if (mode() != NoiseMode::Tree) throw PreconditionError("noise source is not a tree");
  return std::get<BernoulliTree>(src_);
}

const PathEnsemble& NoiseSource::paths() const {
  if (mode() != NoiseMode::Sampled) throw PreconditionError("noise source is not a path ensemble");
  return std::get<PathEnsemble>(src_);
}

std::uint64_t NoiseSource::seed() const { return mode() == NoiseMode::Tree ? 0 : paths().seed(); }

// ---------------------------------------------------------------------------

TrajectoryEnsemble::TrajectoryEnsemble(SpatialGrid grid, NoiseSource noise, std::string scheme)
    : grid_(std::move(grid)), noise_(std::move(noise)), scheme_(std::move(scheme)) {
  const int N = noise_.mesh().steps;
  offset_.resize(N + 2);
  std::size_t total = 0;
  for (int k = 0; k <= N; ++k) {
    offset_[k] = total * grid_.size();
    total += noise_.scenarios(k);
  }
  offset_[N + 1] = total * grid_.size();
  check_storage(total * grid_.size(), "trajectory ensemble");
  data_.assign(total * grid_.size(), 0.0);
  excluded_.assign(total, 0);
}

std::span<double> TrajectoryEnsemble::at(int level, std::size_t j) {
  return {data_.data() + offset_[level] + j * grid_.size(), grid_.size()};
}

std::span<const double> TrajectoryEnsemble::at(int level, std::size_t j) const {
  return {data_.data() + offset_[level] + j * grid_.size(), grid_.size()};
}

std::size_t TrajectoryEnsemble::excluded_paths() const {
  const int N = steps();
  std::size_t c = 0;
  for (std::size_t j = 0; j < scenarios(N); ++j) c += excluded(N, j) ? 1 : 0;
  return c;
}

double TrajectoryEnsemble::expectation(int level,
                                       const std::function<double(std::span<const double>, std::size_t)>& f) const {
  const std::size_t S = scenarios(level);
  std::vector<double> vals;
  vals.reserve(S);
  for (std::size_t j = 0; j < S; ++j) {
    if (!excluded(level, j)) vals.push_back(f(at(level, j), j));
  }
  if (vals.empty()) return 0.0;
  return pairwise_sum(vals) / static_cast<double>(vals.size());
}

// ---------------------------------------------------------------------------

void step_forward(std::span<const double> y0, std::span<const double> a, std::span<const double> b, double dB,
                  const StepOperator& op, std::span<double> y1) {
  const std::size_t n = op.size();
  if (y0.size() != n || a.size() != n || b.size() != n || y1.size() != n) {
    throw ShapeError("step_forward: field size mismatch");
  }
  const double dt = op.dt();
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y0[i])) throw NumericalError("step_forward: non-finite state");
    rhs[i] = y0[i] + dt * a[i] * y0[i] + b[i] * y0[i] * dB;
  }
  op.solve(rhs, y1);
}

namespace {

void check_initial(std::span<const double> y0, const SpatialGrid& grid) {
  if (y0.size() != grid.size()) throw ShapeError("initial datum size does not match grid");
  for (double v : y0) {
    if (!std::isfinite(v)) throw ConfigError("initial datum must be finite");
  }
}

}  // namespace

TrajectoryEnsemble solve_forward(std::span<const double> y0, const ForwardCoefficients& coeffs, const NoiseSource& noise,
                                 const SpatialGrid& grid) {
  check_initial(y0, grid);
  TrajectoryEnsemble out(grid, noise, "implicit-diffusion Euler-Maruyama");
  const TimeMesh& mesh = noise.mesh();
  const StepOperator op(grid, mesh.dt());
  const std::size_t n = grid.size();
  for (std::size_t j = 0; j < noise.scenarios(0); ++j) std::copy(y0.begin(), y0.end(), out.at(0, j).begin());

  const bool det = coeffs.a.deterministic() && coeffs.b.deterministic();
  Field a(n), b(n);
  for (int k = 0; k < mesh.steps; ++k) {
    if (det) {
      coeffs.a.evaluate(k, {}, a);
      coeffs.b.evaluate(k, {}, b);
    }
    for (std::size_t j = 0; j < noise.scenarios(k + 1); ++j) {
      const std::size_t p = noise.parent(k + 1, j);
      if (!det) {
        const auto hist = noise.history(k, p);
        coeffs.a.evaluate(k, hist, a);
        coeffs.b.evaluate(k, hist, b);
      }
      step_forward(out.at(k, p), a, b, noise.increment_into(k + 1, j), op, out.at(k + 1, j));
    }
  }
  return out;
}

TrajectoryEnsemble solve_semilinear(std::span<const double> w0, int exponent, const NoiseSource& noise,
                                    const SpatialGrid& grid, SemilinearOptions opt) {
  check_initial(w0, grid);
  if (exponent < 1) throw ConfigError("semilinear: exponent must be a positive integer");
  TrajectoryEnsemble out(grid, noise, "implicit-diffusion Euler-Maruyama, w^m noise");
  const TimeMesh& mesh = noise.mesh();
  const StepOperator op(grid, mesh.dt());
  const std::size_t n = grid.size();
  for (std::size_t j = 0; j < noise.scenarios(0); ++j) std::copy(w0.begin(), w0.end(), out.at(0, j).begin());

  std::vector<double> rhs(n);
  for (int k = 0; k < mesh.steps; ++k) {
    for (std::size_t j = 0; j < noise.scenarios(k + 1); ++j) {
      const std::size_t p = noise.parent(k + 1, j);
      auto w1 = out.at(k + 1, j);
      if (out.excluded(k, p)) {
        out.exclude(k + 1, j);
        continue;
      }
      const auto w = out.at(k, p);
      const double dB = noise.increment_into(k + 1, j);
      for (std::size_t i = 0; i < n; ++i) rhs[i] = w[i] + std::pow(w[i], exponent) * dB;
      op.solve(rhs, w1);
      double sup = 0.0;
      for (double v : w1) sup = std::max(sup, std::abs(v));
      if (!(sup <= opt.blowup_cap)) {
        std::fill(w1.begin(), w1.end(), 0.0);
        out.exclude(k + 1, j);
      }
    }
  }
  return out;
}

TransformReport exp_transform_oracle(const TrajectoryEnsemble& y, const ForwardCoefficients& coeffs,
                                     TransformVariant variant) {
  if (!coeffs.b.is_constant()) throw PreconditionError("exp_transform_oracle: b must be constant in t and x");
  if (!coeffs.a.deterministic()) throw PreconditionError("exp_transform_oracle: a must be deterministic");
  const double beta = coeffs.b.constant_value();
  const double c = variant == TransformVariant::Ito ? 0.5 : 1.0;
  const SpatialGrid& grid = y.grid();
  const TimeMesh& mesh = y.mesh();
  const NoiseSource& noise = y.noise();
  const StepOperator op(grid, mesh.dt());
  const std::size_t n = grid.size();
  const int N = mesh.steps;

  // z is deterministic: the transformed equation carries no noise.
  std::vector<Field> z(N + 1, Field(n));
  std::copy(y.at(0, 0).begin(), y.at(0, 0).end(), z[0].begin());
  Field a(n), rhs(n);
  for (int k = 0; k < N; ++k) {
    coeffs.a.evaluate(k, {}, a);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = z[k][i] + mesh.dt() * (a[i] - c * beta * beta) * z[k][i];
    op.solve(rhs, z[k + 1]);
  }

  TransformReport rep;
  const std::size_t S = y.scenarios(N);
  rep.gaps.resize(S);
  for (std::size_t leaf = 0; leaf < S; ++leaf) {
    double gap = 0.0, scale = 0.0;
    std::size_t j = leaf;
    for (int k = N; k >= 0; --k) {
      const double w = std::exp(beta * noise.brownian(k, j));
      const auto yk = y.at(k, j);
      double d2 = 0.0, y2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = w * z[k][i] - yk[i];
        d2 += d * d;
        y2 += yk[i] * yk[i];
      }
      gap = std::max(gap, std::sqrt(d2 * grid.cell_volume()));
      scale = std::max(scale, std::sqrt(y2 * grid.cell_volume()));
      if (k > 0) j = noise.parent(k, j);
    }
    rep.gaps[leaf] = scale > 0.0 ? gap / scale : gap;
    rep.max_gap = std::max(rep.max_gap, rep.gaps[leaf]);
  }
  rep.mean_gap = pairwise_sum(rep.gaps) / static_cast<double>(S);
  return rep;
}

std::vector<double> energy_trace(const TrajectoryEnsemble& y) {
  std::vector<double> e(y.steps() + 1);
  const SpatialGrid& grid = y.grid();
  for (int k = 0; k <= y.steps(); ++k) {
    e[k] = y.expectation(k, [&](std::span<const double> v, std::size_t) { return grid.norm_sq(v); });
  }
  return e;
}

UniquenessReport backward_uniqueness_probe(const TrajectoryEnsemble& y1, const TrajectoryEnsemble& y2,
                                           const ForwardCoefficients& coeffs) {
  if (y1.grid().size() != y2.grid().size() || y1.steps() != y2.steps() ||
      y1.noise().mode() != y2.noise().mode() || y1.scenarios(y1.steps()) != y2.scenarios(y2.steps())) {
    throw ShapeError("backward_uniqueness_probe: trajectories live on different meshes");
  }
  const SpatialGrid& grid = y1.grid();
  const NoiseSource& noise = y1.noise();
  const TimeMesh& mesh = y1.mesh();
  const int N = mesh.steps;
  const std::size_t n = grid.size();
  const StepOperator op(grid, mesh.dt());
  UniquenessReport rep;
  rep.min_factor = std::numeric_limits<double>::infinity();

  auto diff = [&](int k, std::size_t j) {
    Field d(n);
    const auto u = y1.at(k, j);
    const auto v = y2.at(k, j);
    for (std::size_t i = 0; i < n; ++i) d[i] = u[i] - v[i];
    return d;
  };

  Field a(n), b(n), dk(n);
  for (int k = 0; k <= N; ++k) {
    for (std::size_t j = 0; j < noise.scenarios(k); ++j) {
      const double nk = std::sqrt(grid.norm_sq(diff(k, j)));
      rep.max_norm = std::max(rep.max_norm, nk);
      if (k == N) rep.terminal_norm = std::max(rep.terminal_norm, nk);
    }
  }

  // Walk each scenario at level k+1 back to its parent: d_k = (I - dt Lap) d_{k+1} / factor.
  for (int k = N - 1; k >= 0; --k) {
    for (std::size_t j = 0; j < noise.scenarios(k + 1); ++j) {
      const std::size_t p = noise.parent(k + 1, j);
      const auto hist = noise.history(k, p);
      coeffs.a.evaluate(k, hist, a);
      coeffs.b.evaluate(k, hist, b);
      const double dB = noise.increment_into(k + 1, j);
      const Field next = diff(k + 1, j);
      Eigen::Map<const Eigen::VectorXd> dn(next.data(), static_cast<Eigen::Index>(n));
      const Eigen::VectorXd lhs = op.matrix() * dn;
      const Field prev = diff(k, p);
      double err = 0.0;
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i) {
        const double f = 1.0 + a[i] * mesh.dt() + b[i] * dB;
        rep.min_factor = std::min(rep.min_factor, std::abs(f));
        if (std::abs(f) < 1e-12) {
          ++rep.flagged;
          ok = false;
          continue;
        }
        dk[i] = lhs[static_cast<Eigen::Index>(i)] / f;
        err = std::max(err, std::abs(dk[i] - prev[i]));
      }
      if (ok) rep.reconstruction_error = std::max(rep.reconstruction_error, err);
    }
  }
  rep.invertible = rep.flagged == 0;
  const double scale = std::max(rep.max_norm, 1e-300);
  if (rep.terminal_norm == 0.0) {
    rep.consistent = rep.invertible ? rep.max_norm == 0.0 : true;
  } else {
    rep.consistent = rep.reconstruction_error <= 1e-8 * scale || !rep.invertible;
  }
  return rep;
}

Field preset_sine(const SpatialGrid& grid, int mode) {
  Field y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.coord(i);
    double v = 1.0;
    for (int a = 0; a < grid.dimension(); ++a) {
      const Extent& e = grid.extent(a);
      v *= std::sin(mode * std::numbers::pi * (x[a] - e.lo) / (e.hi - e.lo));
    }
    y[i] = v;
  }
  return y;
}

Field preset_bump(const SpatialGrid& grid, const Point& center, double width) {
  Field y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    y[i] = std::exp(-squared_distance(grid.coord(i), center, grid.dimension()) / (2.0 * width * width));
  }
  const Field env = preset_sine(grid);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= env[i];
  return y;
}

Field preset_random_bumps(const SpatialGrid& grid, std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Field y(grid.size(), 0.0);
  for (int c = 0; c < count; ++c) {
    Point center{0.0, 0.0};
    for (int a = 0; a < grid.dimension(); ++a) {
      const Extent& e = grid.extent(a);
      center[a] = e.lo + (0.2 + 0.6 * unit(rng)) * (e.hi - e.lo);
    }
    const double width = 0.1 + 0.15 * unit(rng);
    const double amp = 0.5 + unit(rng);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      y[i] += amp * std::exp(-squared_distance(grid.coord(i), center, grid.dimension()) / (2.0 * width * width));
    }
  }
  const Field env = preset_sine(grid);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= env[i];
  return y;
}

}  // namespace shelab
