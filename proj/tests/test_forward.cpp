#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "shelab/errors.hpp"
#include "shelab/forward.hpp"

using namespace shelab;
using Catch::Approx;

namespace {

ForwardCoefficients constants(double a, double b) {
  return {CoefficientField::constant(a), CoefficientField::constant(b)};
}

}  // namespace

TEST_CASE("3-node step against dense assembly", "[forward][oracle]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {3});
  const TimeMesh mesh = make_mesh(0.1, 2);
  const double dt = mesh.dt(), a = 0.7, b = 0.4;
  const Field y0{0.3, -1.0, 2.0};
  const TrajectoryEnsemble y = solve_forward(y0, constants(a, b), NoiseSource(build_tree(mesh)), g);

  Eigen::Matrix3d L;
  L << -2, 1, 0, 1, -2, 1, 0, 1, -2;
  L *= 16.0;
  const Eigen::Matrix3d A = Eigen::Matrix3d::Identity() - dt * L;
  const Eigen::Vector3d v0(0.3, -1.0, 2.0);
  const double s = std::sqrt(dt);
  for (int branch = 0; branch < 2; ++branch) {
    const double dB = branch == 0 ? s : -s;
    const Eigen::Vector3d v1 = A.lu().solve(v0 * (1.0 + a * dt + b * dB));
    const auto got = y.at(1, static_cast<std::size_t>(branch));
    for (int i = 0; i < 3; ++i) CHECK(got[static_cast<std::size_t>(i)] == Approx(v1[i]).epsilon(1e-13));
    // Second level, node 2*branch + 1 (down move).
    const Eigen::Vector3d v2 = A.lu().solve(v1 * (1.0 + a * dt - b * s));
    const auto got2 = y.at(2, static_cast<std::size_t>(2 * branch + 1));
    for (int i = 0; i < 3; ++i) CHECK(got2[static_cast<std::size_t>(i)] == Approx(v2[i]).epsilon(1e-13));
  }
}

TEST_CASE("deterministic oracle: first mode decays per step", "[forward][oracle]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {31});
  const DiscreteMode m = first_mode(g);
  const TimeMesh mesh = make_mesh(0.1, 50);
  const TrajectoryEnsemble y = solve_forward(m.vector, {}, NoiseSource(sample_ensemble(mesh, 1, 3)), g);
  const double factor = std::pow(1.0 / (1.0 + mesh.dt() * m.eigenvalue), 50);
  const auto yT = y.at(50, 0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(yT[i] == Approx(factor * m.vector[i]).epsilon(1e-10));
  // And the continuum decay within the O(dt + h^2) error: about pi^4 T (dt / 2 + h^2 / 12).
  const double exact = std::exp(-std::numbers::pi * std::numbers::pi * 0.1);
  const double h = g.spacing(0);
  const double bound = std::pow(std::numbers::pi, 4) * 0.1 * (mesh.dt() / 2 + h * h / 12);
  CHECK(std::abs(factor - exact) / exact < 1.5 * bound);
}

TEST_CASE("tree second moment is exact for constant b", "[forward][oracle]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {15});
  const DiscreteMode m = first_mode(g);
  const TimeMesh mesh = make_mesh(0.2, 8);
  const double b = 0.6;
  const TrajectoryEnsemble y = solve_forward(m.vector, constants(0.0, b), NoiseSource(build_tree(mesh)), g);
  const auto E = energy_trace(y);
  const double per = (1.0 + b * b * mesh.dt()) / std::pow(1.0 + mesh.dt() * m.eigenvalue, 2);
  for (int k = 0; k <= 8; ++k) CHECK(E[static_cast<std::size_t>(k)] == Approx(std::pow(per, k)).epsilon(1e-12));
}

TEST_CASE("zero data stays zero; linearity", "[forward]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {9});
  const TimeMesh mesh = make_mesh(0.3, 5);
  const NoiseSource noise(build_tree(mesh));
  const ForwardCoefficients c = constants(0.5, 0.3);
  const TrajectoryEnsemble z = solve_forward(Field(9, 0.0), c, noise, g);
  CHECK(energy_trace(z).back() == 0.0);
  const Field u = preset_sine(g, 1), v = preset_sine(g, 3);
  Field w(9);
  for (std::size_t i = 0; i < 9; ++i) w[i] = 2.0 * u[i] - v[i];
  const auto yu = solve_forward(u, c, noise, g), yv = solve_forward(v, c, noise, g), yw = solve_forward(w, c, noise, g);
  for (std::size_t j = 0; j < yw.scenarios(5); ++j) {
    for (std::size_t i = 0; i < 9; ++i) {
      CHECK(yw.at(5, j)[i] == Approx(2.0 * yu.at(5, j)[i] - yv.at(5, j)[i]).margin(1e-13));
    }
  }
}

TEST_CASE("adapted coefficient sees only the past", "[forward]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {7});
  const TimeMesh mesh = make_mesh(0.2, 3);
  std::size_t max_seen = 0;
  auto fn = [&max_seen](int k, std::span<const double> hist, std::span<double> out) {
    max_seen = std::max(max_seen, hist.size());
    REQUIRE(hist.size() == static_cast<std::size_t>(k));
    for (auto& o : out) o = hist.empty() ? 0.1 : 0.1 * std::tanh(hist.back());
  };
  ForwardCoefficients c{CoefficientField::adapted(fn, 0.1, 0.0), CoefficientField::constant(0.2)};
  const TrajectoryEnsemble y = solve_forward(preset_sine(g), c, NoiseSource(build_tree(mesh)), g);
  CHECK(max_seen == 2);
  CHECK(energy_trace(y).back() > 0.0);
}

TEST_CASE("semilinear blow-up exclusion", "[forward]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {15});
  const TimeMesh mesh = make_mesh(1.0, 64);
  Field w0 = preset_sine(g);
  for (auto& v : w0) v *= 50.0;
  SemilinearOptions opt;
  opt.blowup_cap = 100.0;
  const TrajectoryEnsemble w = solve_semilinear(w0, 2, NoiseSource(sample_ensemble(mesh, 32, 5)), g, opt);
  CHECK(w.excluded_paths() > 0);
  CHECK(w.excluded_paths() <= 32);
  const TrajectoryEnsemble calm = solve_semilinear(preset_sine(g), 1, NoiseSource(sample_ensemble(mesh, 8, 5)), g);
  CHECK(calm.excluded_paths() == 0);
}

TEST_CASE("exponential transform gap shrinks with dt", "[forward][oracle]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {15});
  const PathEnsemble fine = sample_ensemble(make_mesh(0.5, 128), 64, 11);
  const ForwardCoefficients c = constants(0.0, 0.5);
  double prev = 1e300;
  for (int f : {8, 4, 2, 1}) {
    const PathEnsemble lvl = f == 1 ? fine : fine.coarsen(f);
    const auto y = solve_forward(preset_sine(g), c, NoiseSource(lvl), g);
    const double gap = exp_transform_oracle(y, c, TransformVariant::Ito).mean_gap;
    CHECK(gap < prev);
    prev = gap;
    if (f == 1) CHECK(exp_transform_oracle(y, c, TransformVariant::Literal).mean_gap > gap);
  }
}

TEST_CASE("backward uniqueness probe", "[forward]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {9});
  const TimeMesh mesh = make_mesh(0.2, 4);
  const NoiseSource noise(build_tree(mesh));
  const ForwardCoefficients c = constants(0.3, 0.2);
  const auto y1 = solve_forward(preset_sine(g, 1), c, noise, g);
  const auto y2 = solve_forward(preset_sine(g, 2), c, noise, g);
  const UniquenessReport r = backward_uniqueness_probe(y1, y2, c);
  CHECK(r.invertible);
  CHECK(r.consistent);
  CHECK(r.terminal_norm > 0.0);
  CHECK(r.reconstruction_error < 1e-8 * r.max_norm);
  const UniquenessReport same = backward_uniqueness_probe(y1, y1, c);
  CHECK(same.terminal_norm == 0.0);
  CHECK(same.max_norm == 0.0);
  CHECK(same.consistent);
}
