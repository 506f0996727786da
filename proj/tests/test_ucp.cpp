#include "catch_amalgamated.hpp"

#include <cmath>

#include "shelab/coefficients.hpp"
#include "shelab/errors.hpp"
#include "shelab/ucp.hpp"

using namespace shelab;
using Catch::Approx;

TEST_CASE("J(T) by hand", "[ucp]") {
  const double growth = 2.0 * std::exp(0.04);
  CHECK(ucp_J(1.0, 0.25, 1.0, 0.04, 1) == Approx(growth * (0.25 + 4.0 + 1.0 + 4.0 * 0.04) + 0.5));
}

TEST_CASE("convex-case constants", "[ucp]") {
  UcpInputs in;
  in.r = 0.1;
  in.m = 0.25;
  in.T = 0.5;
  in.a_sup = 1.0;
  in.b_norm = 0.3;
  in.energy0 = 1.0;
  in.energyT = 0.25;
  const UcpConstants c = compute_constants(in);
  const double growth = 1.5 * std::exp(0.5 * 0.09);
  CHECK(c.log_ratio == Approx(std::log(4.0)));
  CHECK(c.denominator == Approx(0.01 * 0.5 + 8.0 * 0.25 * growth));
  CHECK(c.delta == Approx(0.005 / c.denominator));
  CHECK(c.beta == Approx(4.0 * 0.25 * 0.5 * c.J / c.denominator));
  CHECK(c.Dcal == Approx(c.J + growth * 4.0 * std::log(4.0)));
  CHECK(c.delta > 0.0);
  CHECK(c.delta < 1.0);
  CHECK_FALSE(c.backward_uniqueness_branch);

  in.energyT = 0.0;
  CHECK(compute_constants(in).backward_uniqueness_branch);
  in.energy0 = 0.0;
  CHECK_THROWS_AS(compute_constants(in), PreconditionError);
}

TEST_CASE("lambda selection by hand", "[ucp]") {
  const auto grid = lambda_grid();
  REQUIRE(grid.size() == 41);
  CHECK(grid.front() == 1.0);
  // A = 0: bracket 1 - 4 lambda / r^2 >= 1/2 iff lambda <= r^2 / 8 = 0.005.
  const LambdaSelection s = select_lambda(grid, std::vector<double>(41, 0.0), 0.2, 1);
  REQUIRE(s.found);
  CHECK(s.lambda == Approx(std::ldexp(1.0, -8)));
  CHECK(s.bracket >= 0.5);
  const LambdaSelection none = select_lambda(grid, std::vector<double>(41, 1e30), 0.2, 1);
  CHECK_FALSE(none.found);
}

TEST_CASE("three-ball inequality on a field supported in B_r1", "[ucp][oracle]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {63});
  const TimeMesh mesh = make_mesh(0.1, 2);
  TrajectoryEnsemble y(g, NoiseSource(build_tree(mesh)), "manual");
  for (std::size_t j = 0; j < y.scenarios(2); ++j) {
    auto v = y.at(2, j);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = std::abs(g.coord(i)[0] - 0.5);
      v[i] = r < 0.1 ? (1.0 + j) * (0.1 - r) : 0.0;
    }
  }
  const ThreeBallReport rep = three_ball_check(y, {0.5, 0.0}, 0.1, 0.2, 0.01, 0.0);
  CHECK(rep.pass);
  CHECK(rep.lhs <= rep.rhs);
  CHECK(rep.lhs > 0.0);
}

TEST_CASE("Theorem 1.2 on a forward ensemble; scale invariance", "[ucp]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {31});
  const TimeMesh mesh = make_mesh(0.2, 6);
  const ForwardCoefficients c{CoefficientField::constant(0.5), CoefficientField::constant(0.2)};
  const Field y0 = preset_random_bumps(g, 9, 3);
  const TrajectoryEnsemble y = solve_forward(y0, c, NoiseSource(build_tree(mesh)), g);
  const auto E = energy_trace(y);
  UcpInputs in;
  in.r = 0.1;
  in.m = g.max_squared_distance({0.5, 0.0});
  in.T = 0.2;
  in.a_sup = 0.5;
  in.b_norm = 0.2;
  in.energy0 = E.front();
  in.energyT = E.back();
  const UcpConstants k = compute_constants(in);
  const UcpCheck u = quantitative_ucp_check(y, {{0.5, 0.0}, 0.1}, k, 0.0);
  CHECK(u.pass);
  CHECK(u.lhs == Approx(E.back()));

  Field y3 = y0;
  for (auto& v : y3) v *= 3.0;
  const TrajectoryEnsemble z = solve_forward(y3, c, NoiseSource(build_tree(mesh)), g);
  in.energy0 *= 9.0;
  in.energyT *= 9.0;
  const UcpCheck u3 = quantitative_ucp_check(z, {{0.5, 0.0}, 0.1}, compute_constants(in), 0.0);
  CHECK(u3.pass == u.pass);
  CHECK(u3.lhs == Approx(9.0 * u.lhs));
  CHECK(u3.rhs == Approx(9.0 * u.rhs));
}

TEST_CASE("propagation along a chain", "[ucp]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}}, {63});
  const TimeMesh mesh = make_mesh(0.05, 4);
  const ForwardCoefficients c{CoefficientField::constant(0.2), CoefficientField::constant(0.1)};
  const TrajectoryEnsemble y = solve_forward(preset_sine(g), c, NoiseSource(build_tree(mesh)), g);
  const PropagationReport p = propagate_vanishing(y, {{0.5, 0.0}, 0.08}, {{0.2, 0.0}, 0.05});
  CHECK(p.consistent);
  CHECK_FALSE(p.seed_vanishing);
  CHECK(p.vanishing_balls == 0);
  CHECK(p.steps.size() >= 2);

  TrajectoryEnsemble zero(g, NoiseSource(build_tree(mesh)), "manual");
  const PropagationReport pz = propagate_vanishing(zero, {{0.5, 0.0}, 0.08}, {{0.2, 0.0}, 0.05});
  CHECK(pz.consistent);
}
