#include "catch_amalgamated.hpp"

#include <cmath>

#include "shelab/coefficients.hpp"
#include "shelab/errors.hpp"
#include "shelab/frequency.hpp"

using namespace shelab;
using Catch::Approx;

namespace {

struct Setup {
  SpatialGrid grid = build_grid({{0.0, 1.0}}, {63});
  TimeMesh mesh = make_mesh(0.01, 10);
  ForwardCoefficients c{CoefficientField::constant(0.4), CoefficientField::constant(0.3)};
  TrajectoryEnsemble y = solve_forward(preset_sine(grid), c, NoiseSource(build_tree(mesh)), grid);
  HeatKernelWeight w{0.01, 0.1, {0.5, 0.0}, 1};
};

}  // namespace

TEST_CASE("H matches a direct quadrature at t = 0", "[frequency]") {
  Setup s;
  const LocalizedField loc = localize(s.y, s.c, nullptr);
  const FrequencyTrace tr = compute_HDN(loc, s.w);
  const Field K = eval_kernel(s.w, 0.0, s.grid);
  const Field y0 = preset_sine(s.grid);
  double H = 0.0;
  for (std::size_t i = 0; i < y0.size(); ++i) H += y0[i] * y0[i] * K[i];
  CHECK(tr.H[0] == Approx(H * s.grid.cell_volume()));
  CHECK(tr.valid[0] == 1);
  CHECK(tr.N[0] == Approx(2.0 * tr.D[0] / tr.H[0]));
}

TEST_CASE("H' identity residual is small and first order", "[frequency][oracle]") {
  Setup s;
  const CutoffFunction phi = build_cutoff({{0.5, 0.0}, 0.1}, {{0.5, 0.0}, 0.4}, s.grid);
  for (const CutoffFunction* cut : {static_cast<const CutoffFunction*>(nullptr), &phi}) {
    double r[3];
    int idx = 0;
    for (int N : {4, 8, 16}) {
      const TimeMesh mesh = make_mesh(0.01, N);
      const auto y = solve_forward(preset_sine(s.grid), s.c, NoiseSource(build_tree(mesh)), s.grid);
      const LocalizedField loc = localize(y, s.c, cut);
      const IdentityResidual res = hprime_identity_residual(compute_HDN(loc, s.w), loc, s.w);
      CHECK(res.integrated < 0.05);
      r[idx++] = res.signed_integrated;
    }
    CHECK((r[1] - r[2]) / (r[0] - r[1]) == Approx(0.5).margin(0.15));
  }
}

TEST_CASE("Lemma 4.2 bound holds on the convex interval", "[frequency]") {
  Setup s;
  const LocalizedField loc = localize(s.y, s.c, nullptr);
  const FrequencyTrace tr = compute_HDN(loc, s.w);
  const BoundCheck b = frequency_bound_check(tr, loc, s.w, {0.4, 0.3}, 0, 10);
  CHECK(b.pass);
  CHECK(b.margin >= -b.tolerance);
  CHECK_THROWS_AS(frequency_bound_check(tr, loc, s.w, {0.4, 0.3}, 5, 2), DomainError);
}

TEST_CASE("localized source F in cutoff mode", "[frequency]") {
  Setup s;
  const CutoffFunction phi = build_cutoff({{0.5, 0.0}, 0.1}, {{0.5, 0.0}, 0.3}, s.grid);
  const LocalizedField loc = localize(s.y, s.c, &phi);
  const auto y0 = s.y.at(0, 0);
  const auto F = loc.F(0, 0);
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    CHECK(loc.phi(0, 0)[i] == Approx(phi.phi[i] * y0[i]));
    // Inside the plateau grad phi = lap phi = 0 so F = a Phi.
    if (std::abs(s.grid.coord(i)[0] - 0.5) < 0.09) CHECK(F[i] == Approx(0.4 * y0[i]));
  }
}

TEST_CASE("kernel horizon must match", "[frequency]") {
  Setup s;
  const LocalizedField loc = localize(s.y, s.c, nullptr);
  CHECK_THROWS_AS(compute_HDN(loc, HeatKernelWeight(0.5, 0.1, {0.5, 0.0}, 1)), PreconditionError);
}

TEST_CASE("boundary sign audit", "[frequency]") {
  const SpatialGrid g = build_grid({{0.0, 1.0}, {0.0, 1.0}}, {7, 7});
  const BoundarySignReport in = boundary_sign_audit(g, {0.3, 0.6});
  CHECK(in.pass);
  CHECK(in.negative == 0);
  CHECK(in.checked > 0);
  const BoundarySignReport out = boundary_sign_audit(g, {1.4, 0.5});
  CHECK_FALSE(out.pass);
  CHECK(out.negative > 0);
}
