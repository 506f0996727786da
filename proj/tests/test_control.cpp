#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "shelab/control.hpp"
#include "shelab/errors.hpp"

using namespace shelab;
using Catch::Approx;

namespace {

ControlProblem single_node(double a1, double b1) {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {1});
  const TimeMesh mesh = make_mesh(0.2, 2);
  return ControlProblem(g, mesh, CoefficientField::constant(a1), CoefficientField::constant(b1),
                        Ball{{0.5, 0.0}, 0.3}, MeasurableTimeSet({{0.0, 0.2}}, 0.2));
}

ControlProblem desk(int nodes = 15, int steps = 6) {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {nodes});
  const TimeMesh mesh = make_mesh(0.5, steps);
  return ControlProblem(g, mesh, random_smooth_field(g, mesh, 0.5, 1), random_smooth_field(g, mesh, 0.2, 2),
                        Ball{{0.5, 0.0}, 0.15}, MeasurableTimeSet({{0.05, 0.45}}, 0.5));
}

TreeField random_leaves(const ControlProblem& p, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  const int N = p.mesh().steps;
  TreeField f(N, p.size());
  for (std::size_t i = 0; i < p.tree().nodes(N); ++i) {
    for (auto& v : f.at(N, i)) v = nd(rng);
  }
  return f;
}

TreeField random_running(const ControlProblem& p, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  const int N = p.mesh().steps;
  TreeField f(N, p.size());
  for (int k = 0; k < N; ++k) {
    for (std::size_t i = 0; i < p.tree().nodes(k); ++i) {
      for (auto& v : f.at(k, i)) v = nd(rng);
    }
  }
  return f;
}

}  // namespace

TEST_CASE("single node, two steps: Gramian by hand", "[control][oracle]") {
  const double a1 = 0.4, b1 = 0.3;
  const ControlProblem p = single_node(a1, b1);
  const double dt = 0.1;
  const double r = 1.0 / (1.0 + 8.0 * dt);  // -Delta_h = 2 / h^2 = 8 on one node
  const double second = (1.0 - a1 * dt) * (1.0 - a1 * dt) + b1 * b1 * dt;
  const double lambda = dt * (1.0 + r * r * second);
  const Field y0{1.7};
  CHECK(gramian_apply(p, y0)[0] == Approx(lambda * 1.7).epsilon(1e-13));

  // Null control from z_T = 1 at every leaf: one unknown, Lambda yhat0 = z_free(0).
  TreeField zT(2, 1);
  for (std::size_t i = 0; i < 4; ++i) zT.at(2, i)[0] = 1.0;
  const NullControlReport nc = synthesize_null_control(p, zT, 1e-10, 5);
  const double free0 = r * r * (1.0 - a1 * dt) * (1.0 - a1 * dt);  // E[D] = 1 - a1 dt per step
  CHECK(nc.free_z0_norm == Approx(std::sqrt(0.5) * free0).epsilon(1e-12));
  CHECK(nc.yhat0[0] == Approx(free0 / lambda).epsilon(1e-10));
  CHECK(nc.z0_norm < 1e-10 * nc.zT_norm);
}

TEST_CASE("adjoint-exact duality to rounding", "[control]") {
  const ControlProblem p = desk();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 3; ++trial) {
    const TreeField zT = random_leaves(p, rng), h = random_running(p, rng), f = random_running(p, rng);
    Field y0(p.size());
    for (auto& v : y0) v = nd(rng);
    const DualityReport d = duality_check(p, dual_forward(p, y0), solve_backward_tree(p, zT, &h, &f), &h, &f);
    CHECK(d.normalized < 1e-12);
  }
}

TEST_CASE("independent mode converges at first order", "[control]") {
  std::vector<double> dts, res;
  for (int N : {4, 8, 16}) {
    const SpatialGrid g = build_grid({{0.0, 1.0}}, {15});
    const TimeMesh mesh = make_mesh(0.5, N);
    const ControlProblem p(g, mesh, CoefficientField::constant(0.3), CoefficientField::constant(0.2),
                           Ball{{0.5, 0.0}, 0.15}, MeasurableTimeSet({{0.05, 0.35}}, 0.5));
    TreeField zT(N, g.size());
    for (std::size_t i = 0; i < p.tree().nodes(N); ++i) {
      const double B = p.tree().brownian(N, i);
      for (std::size_t x = 0; x < g.size(); ++x) zT.at(N, i)[x] = std::sin(3.14159 * g.coord(x)[0]) * std::cos(B);
    }
    const Field y0 = preset_sine(g, 1);
    const DualityReport d = duality_check(p, dual_forward(p, y0),
                                          solve_backward_tree(p, zT, nullptr, nullptr, BackwardMode::Independent),
                                          nullptr, nullptr);
    dts.push_back(mesh.dt());
    res.push_back(d.residual);
  }
  CHECK(res[2] < res[1]);
  CHECK(res[1] < res[0]);
  CHECK(std::log(res[0] / res[2]) / std::log(dts[0] / dts[2]) > 0.8);
}

TEST_CASE("Gramian is symmetric and positive semidefinite", "[control]") {
  const ControlProblem p = desk(11, 5);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  Field u(p.size()), v(p.size());
  for (auto& x : u) x = nd(rng);
  for (auto& x : v) x = nd(rng);
  const Field Lu = gramian_apply(p, u), Lv = gramian_apply(p, v);
  double uv = 0.0, vu = 0.0, uu = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    uv += Lu[i] * v[i];
    vu += Lv[i] * u[i];
    uu += Lu[i] * u[i];
  }
  CHECK(std::abs(uv - vu) <= 1e-10 * std::abs(uv));
  CHECK(uu > 0.0);
  const SpectrumReport s = gramian_spectrum(p);
  CHECK(s.symmetry_error < 1e-10);
  CHECK(s.max_eig > 0.0);
  CHECK(s.min_eig > -1e-12 * s.max_eig);
}

TEST_CASE("trivial controls", "[control]") {
  const ControlProblem p = desk(9, 4);
  const TreeField zero(4, p.size());
  const NullControlReport nc = synthesize_null_control(p, zero, 1e-6, 10, 0.0, false);
  CHECK(nc.z0_norm == 0.0);
  for (int k = 0; k < 4; ++k) {
    for (double v : nc.control.at(k, 0)) CHECK(v == 0.0);
  }
  // Target equal to the free solve: zero control, zero residual.
  std::mt19937_64 rng(3);
  const TreeField zT = random_leaves(p, rng);
  const NullControlReport free = synthesize_null_control(p, zT, 1e-6, 0, 0.0, false);
  const BackwardPair bp = solve_backward_tree(p, zT, nullptr, nullptr);
  const auto z0 = bp.z.at(0, 0);
  const ApproxControlReport ac = synthesize_approx_control(p, zT, nullptr, Field(z0.begin(), z0.end()), 1e-12);
  CHECK(ac.achieved);
  CHECK(ac.residual < 1e-14);
  CHECK(free.free_z0_norm > 0.0);
}

TEST_CASE("null and approximate control at desk scale", "[control]") {
  const ControlProblem p = desk(15, 10);
  std::mt19937_64 rng(21);
  const TreeField zT = random_leaves(p, rng);
  const NullControlReport nc = synthesize_null_control(p, zT, 1e-6, 15, 0.0, false);
  CHECK(nc.z0_norm <= 1e-6 * nc.zT_norm);
  CHECK(nc.krylov.iterations <= 15);
  CHECK(nc.krylov.monotone);

  std::normal_distribution<double> nd;
  Field z0(p.size());
  for (auto& v : z0) v = nd(rng);
  const double nz = std::sqrt(p.grid().norm_sq(z0));
  const ApproxControlReport ac = synthesize_approx_control(p, zT, nullptr, z0, 1e-2 * nz);
  CHECK(ac.achieved);
  CHECK(ac.monotone);
  CHECK(ac.residual <= 1e-2 * nz);
}

TEST_CASE("support check", "[control]") {
  const ControlProblem p = desk(9, 4);
  CHECK(duality_support_check(p, Field(p.size(), 0.0)).observation_mass == 0.0);
  const SupportReport s = duality_support_check(p, preset_sine(p.grid(), 2));
  CHECK(s.observation_mass > 0.0);
  CHECK(s.ratio > 0.0);
}

TEST_CASE("control problem preconditions", "[control]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {9});
  const TimeMesh mesh = make_mesh(0.5, 4);
  auto adapted = CoefficientField::adapted([](int, std::span<const double>, std::span<double> o) {
    for (auto& v : o) v = 0.0;
  }, 0.0, 0.0);
  CHECK_THROWS(ControlProblem(g, mesh, adapted, CoefficientField::constant(0.0), Ball{{0.5, 0.0}, 0.2},
                              MeasurableTimeSet({{0.1, 0.4}}, 0.5)));
  CHECK_THROWS(ControlProblem(g, mesh, CoefficientField::constant(0.0), CoefficientField::constant(0.0),
                              Ball{{0.5, 0.0}, 0.6}, MeasurableTimeSet({{0.1, 0.4}}, 0.5)));
  CHECK_THROWS(ControlProblem(g, mesh, CoefficientField::constant(0.0), CoefficientField::constant(0.0),
                              Ball{{0.5, 0.0}, 0.2}, MeasurableTimeSet({{0.1, 0.4}}, 0.8)));
}
