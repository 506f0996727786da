#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "shelab/domain.hpp"
#include "shelab/errors.hpp"

using namespace shelab;
using Catch::Approx;

TEST_CASE("grid coordinates and trapezoid volume", "[domain]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {3});
  REQUIRE(g.size() == 3);
  CHECK(g.spacing(0) == Approx(0.25));
  CHECK(g.coord(0)[0] == Approx(0.25));
  CHECK(g.coord(2)[0] == Approx(0.75));
  // Boundary values are zero, so the trapezoid rule is h times the interior sum.
  const Field ones(3, 1.0);
  CHECK(g.integrate(ones) == Approx(0.75));

  const SpatialGrid g2 = build_grid({{0.0, 1.0}, {0.0, 2.0}}, {3, 4});
  CHECK(g2.size() == 12);
  CHECK(g2.cell_volume() == Approx(0.25 * 0.4));
  CHECK(g2.coord(g2.index(1, 2))[1] == Approx(1.2));
}

TEST_CASE("3-node Laplacian matches the hand stencil", "[domain][oracle]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {3});
  Eigen::MatrixXd L = Eigen::MatrixXd(laplacian_matrix(g));
  Eigen::MatrixXd ref(3, 3);
  ref << -2, 1, 0, 1, -2, 1, 0, 1, -2;
  ref *= 16.0;
  CHECK((L - ref).norm() < 1e-12);

  const Field v{1.0, 2.0, -1.0};
  Field out(3);
  apply_laplacian(g, v, out);
  const Eigen::Vector3d expect = ref * Eigen::Vector3d(1.0, 2.0, -1.0);
  for (int i = 0; i < 3; ++i) CHECK(out[i] == Approx(expect[i]));
}

TEST_CASE("first discrete mode is an eigenvector", "[domain]") {
  for (int n : {7, 31}) {
    const SpatialGrid g = build_grid({{0.0, 1.0}}, {n});
    const DiscreteMode m = first_mode(g);
    Field lv(g.size());
    apply_laplacian(g, m.vector, lv);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(lv[i] == Approx(-m.eigenvalue * m.vector[i]).margin(1e-10));
    CHECK(g.norm_sq(m.vector) == Approx(1.0));
  }
  const SpatialGrid g2 = build_grid({{0.0, 1.0}, {0.0, 1.0}}, {9, 9});
  CHECK(first_mode(g2).eigenvalue == Approx(2.0 * first_mode(build_grid({{0.0, 1.0}}, {9})).eigenvalue));
}

TEST_CASE("kernel derivatives agree with finite differences", "[domain][kernel]") {
  const HeatKernelWeight w(1.0, 0.1, {0.3, 0.0}, 1);
  const Point x{0.55, 0.0};
  const double t = 0.4, e = 1e-5;
  const double kt = (w.value(x, t + e) - w.value(x, t - e)) / (2 * e);
  CHECK(w.time_derivative(x, t) == Approx(kt).epsilon(1e-7));
  const double kxx = (w.value({x[0] + e, 0}, t) - 2 * w.value(x, t) + w.value({x[0] - e, 0}, t)) / (e * e);
  CHECK(w.laplacian(x, t) == Approx(kxx).epsilon(1e-4));
  CHECK(std::abs(w.time_derivative(x, t) + w.laplacian(x, t)) < 1e-12 * w.value(x, t));
  // Peak value at the center at t = T is lambda^{-n/2}.
  CHECK(w.value({0.3, 0.0}, 1.0) == Approx(1.0 / std::sqrt(0.1)));

  const HeatKernelWeight w2(1.0, 0.2, {0.5, 0.5}, 2);
  const Point y{0.2, 0.9};
  CHECK(std::abs(w2.time_derivative(y, 0.3) + w2.laplacian(y, 0.3)) < 1e-12 * w2.value(y, 0.3));
}

TEST_CASE("cutoff plateau and support", "[domain]") {
  CHECK(CutoffFunction::profile(0.0) == 1.0);
  CHECK(CutoffFunction::profile(1.0) == Approx(0.0).margin(1e-15));
  CHECK(CutoffFunction::profile_d1(0.0) == 0.0);
  CHECK(CutoffFunction::profile_d1(1.0) == Approx(0.0).margin(1e-14));
  CHECK(CutoffFunction::profile_d2(1.0) == Approx(0.0).margin(1e-12));
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {63});
  const CutoffFunction c = build_cutoff({{0.5, 0.0}, 0.1}, {{0.5, 0.0}, 0.2}, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = std::abs(g.coord(i)[0] - 0.5);
    if (r <= 0.1) CHECK(c.phi[i] == Approx(1.0));
    if (r >= 0.2) CHECK(c.phi[i] == 0.0);
    CHECK(c.phi[i] >= 0.0);
    CHECK(c.phi[i] <= 1.0);
  }
}

TEST_CASE("geometry predicates", "[domain]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {15});
  CHECK(g.ball_closure_inside({{0.5, 0.0}, 0.4}));
  CHECK_FALSE(g.ball_closure_inside({{0.5, 0.0}, 0.5}));
  CHECK(g.max_squared_distance({0.2, 0.0}) == Approx(0.64));
  CHECK(g.distance_to_boundary({0.2, 0.0}) == Approx(0.2));
  const auto bp = g.boundary_points();
  REQUIRE(bp.size() == 2);
  CHECK(bp[0].normal[0] * bp[1].normal[0] == Approx(-1.0));

  const BallChain chain = ball_chain({{0.5, 0.0}, 0.08}, {{0.15, 0.0}, 0.05}, g);
  CHECK(chain.length() >= 2);
  CHECK(chain.overlaps.size() == chain.length() - 1);
  CHECK(chain_admissible(chain, {{0.5, 0.0}, 0.08}, {{0.15, 0.0}, 0.05}, g));
}

TEST_CASE("shape errors", "[domain]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {5});
  const Field bad(4, 0.0);
  CHECK_THROWS_AS(g.integrate(bad), ShapeError);
}
