#include "catch_amalgamated.hpp"

#include <cmath>

#include "shelab/errors.hpp"
#include "shelab/observability.hpp"

using namespace shelab;
using Catch::Approx;

TEST_CASE("measurable time set", "[observability]") {
  const MeasurableTimeSet E({{0.3, 0.45}, {0.1, 0.2}}, 0.5);
  CHECK(E.measure() == Approx(0.25));
  CHECK(E.measure_in(0.15, 0.35) == Approx(0.1));
  CHECK(E.measure_in(0.2, 0.3) == Approx(0.0).margin(1e-15));
  CHECK(E.intervals().front().first == Approx(0.1));
  CHECK_THROWS_AS(MeasurableTimeSet({{0.1, 0.3}, {0.2, 0.4}}, 0.5), ConfigError);
  CHECK_THROWS_AS(MeasurableTimeSet({{0.1, 0.7}}, 0.5), ConfigError);
}

TEST_CASE("Lemma 5.1 sequence", "[observability][oracle]") {
  const MeasurableTimeSet E({{0.1, 0.2}, {0.3, 0.45}}, 0.5);
  const DensitySequence s = density_sequence(E, 2.0, 8);
  REQUIRE(s.found);
  REQUIRE(s.gaps.size() == 8);
  CHECK(s.t0 > 0.3);
  CHECK(s.t0 < 0.45);
  for (std::size_t m = 0; m < 8; ++m) {
    CHECK(s.t[m] > s.t[m + 1]);
    CHECK(s.t[m + 1] > s.t0);
    CHECK(s.gap_lengths[m] == Approx(s.t[m] - s.t[m + 1]));
    CHECK(s.gap_lengths[m] <= 3.0 * s.gaps[m]);
  }
  // Geometric: t_m - t_{m+1} = z (t_{m+1} - t_{m+2}).
  CHECK(s.gap_lengths[0] == Approx(2.0 * s.gap_lengths[1]));
}

TEST_CASE("energy constant variants", "[observability]") {
  CHECK(energy_constant(0.5, 0.09, 2.0, EnergyVariant::Derivation) == Approx((1.0 + 0.09) * 2.0));
  CHECK(energy_constant(0.5, 0.09, 2.0, EnergyVariant::Printed) == Approx((0.5 + 0.09) * 2.0));
  CHECK(energy_constant(0.5, 0.09, 2.0, EnergyVariant::Larger) == Approx((1.0 + 0.09) * 2.0));
  CHECK(energy_constant(3.0, 0.09, 2.0, EnergyVariant::Larger) == Approx((18.0 + 0.09) * 2.0));
}

TEST_CASE("epsilon recursion", "[observability]") {
  UcpInputs in;
  in.r = 0.08;
  in.m = 0.25;
  in.T = 0.5;
  in.a_sup = 1.0;
  in.b_norm = 0.3;
  const ObservabilityConstants c = observability_constants(in, 2.0);
  CHECK(c.Theta > 0.0);
  CHECK(std::isfinite(c.log_eps1));
  const MeasurableTimeSet E({{0.1, 0.2}, {0.3, 0.45}}, 0.5);
  const DensitySequence s = density_sequence(E, 2.0, 8);
  const EpsilonSequence es = epsilon_sequence(c, s.gaps);
  REQUIRE(es.log_eps.size() == 8);
  CHECK(es.bound_holds);
  CHECK(es.max_bound_excess <= 0.0);
  CHECK(es.max_matching_error < 1e-12);
  CHECK(es.log_eps[0] == Approx(c.log_eps1));
}

TEST_CASE("interpolation split is a valid inequality for consistent inputs", "[observability]") {
  UcpInputs in;
  in.r = 0.1;
  in.T = 0.5;
  const ObservabilityConstants c = observability_constants(in, 2.0);
  const InterpolationRecord r = interpolation_split(0.25, 1.0, 1.0, 1.0, c, 0.5, 0.0);
  CHECK(r.pass);
  CHECK(r.lhs <= r.rhs);
}

TEST_CASE("energy traces integrate exactly", "[observability]") {
  EnergyTraces tr;
  tr.t = {0.0, 0.25, 0.5};
  tr.global = {2.0, 2.0, 2.0};
  tr.local = {1.0, 3.0, 1.0};
  CHECK(tr.at_local(0.125) == Approx(2.0));
  const MeasurableTimeSet E({{0.0, 0.5}}, 0.5);
  CHECK(tr.local_mass(E, 0.0, 0.5) == Approx(1.0));
  const MeasurableTimeSet E2({{0.25, 0.5}}, 0.5);
  CHECK(tr.local_mass(E2, 0.0, 0.5) == Approx(0.5));
  CHECK(tr.local_mass(E2, 0.0, 0.25) == Approx(0.0).margin(1e-15));
}

TEST_CASE("energy estimate check", "[observability]") {
  const std::vector<double> t{0.0, 0.5, 1.0};
  const std::vector<double> e{1.0, std::exp(0.5), std::exp(1.0)};
  // C(a, b, t) = (2 * 0.5 + 0) t = t: equality.
  CHECK(energy_estimate_check(t, e, 0.5, 0.0, EnergyVariant::Derivation, 1e-12).pass);
  CHECK_FALSE(energy_estimate_check(t, e, 0.25, 0.0, EnergyVariant::Derivation, 1e-12).pass);
}
