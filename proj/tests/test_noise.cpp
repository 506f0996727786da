#include "catch_amalgamated.hpp"

#include <cmath>

#include "shelab/errors.hpp"
#include "shelab/noise.hpp"

using namespace shelab;
using Catch::Approx;

TEST_CASE("tree increments and Brownian values", "[noise]") {
  const TimeMesh mesh = make_mesh(1.0, 4);
  const BernoulliTree tree = build_tree(mesh, 8);
  CHECK(tree.depth() == 4);
  CHECK(tree.leaves() == 16);
  CHECK(tree.leaf_weight() == Approx(1.0 / 16));
  CHECK(tree.increment_into(1, 0) == Approx(0.5));
  CHECK(tree.increment_into(1, 1) == Approx(-0.5));
  // Leaf 0 is all up moves, leaf 15 all down.
  CHECK(tree.brownian(4, 0) == Approx(2.0));
  CHECK(tree.brownian(4, 15) == Approx(-2.0));
  const auto h = tree.history(3, 5);  // 5 = 0b101: down, up, down
  REQUIRE(h.size() == 3);
  CHECK(h[0] == Approx(-0.5));
  CHECK(h[1] == Approx(0.5));
  CHECK(h[2] == Approx(-0.5));
  CHECK(tree.increment_on_leaf(10, 1) == Approx(tree.history(4, 10)[1]));
}

TEST_CASE("tree moments are exact", "[noise][oracle]") {
  const TimeMesh mesh = make_mesh(0.5, 6);
  const BernoulliTree tree = build_tree(mesh);
  std::vector<double> B(tree.leaves()), B2(tree.leaves()), B4(tree.leaves());
  for (std::size_t i = 0; i < tree.leaves(); ++i) {
    const double b = tree.brownian(6, i);
    B[i] = b;
    B2[i] = b * b;
    B4[i] = b * b * b * b;
  }
  CHECK(conditional_expectation(tree, B, 6, 0)[0] == Approx(0.0).margin(1e-15));
  CHECK(conditional_expectation(tree, B2, 6, 0)[0] == Approx(0.5));
  // Martingale: E[B_T | F_k] = B_k at every node.
  const auto cond = conditional_expectation(tree, B, 6, 3);
  for (std::size_t i = 0; i < cond.size(); ++i) CHECK(cond[i] == Approx(tree.brownian(3, i)).margin(1e-14));
  // Fourth moment of the scaled random walk: 3T^2 - 2 T dt.
  CHECK(conditional_expectation(tree, B4, 6, 0)[0] == Approx(3 * 0.25 - 2 * 0.5 * mesh.dt()));
}

TEST_CASE("depth cap", "[noise]") {
  CHECK_THROWS_AS(build_tree(make_mesh(1.0, 20), 16), ResourceError);
  CHECK_NOTHROW(build_tree(make_mesh(1.0, 16), 16));
}

TEST_CASE("sampled paths are reproducible per path", "[noise]") {
  const TimeMesh mesh = make_mesh(1.0, 64);
  const PathEnsemble e = sample_ensemble(mesh, 8, 42);
  const PathEnsemble f = sample_ensemble(mesh, 8, 42);
  for (int p = 0; p < 8; ++p) {
    const auto single = sample_path(mesh, 42, p);
    for (int k = 0; k < 64; ++k) {
      CHECK(e.increment(p, k) == single[static_cast<std::size_t>(k)]);
      CHECK(e.increment(p, k) == f.increment(p, k));
    }
  }
  CHECK(sample_ensemble(mesh, 8, 43).increment(0, 0) != e.increment(0, 0));
}

TEST_CASE("coarsening sums blocks and keeps B_T", "[noise]") {
  const TimeMesh mesh = make_mesh(1.0, 16);
  const PathEnsemble e = sample_ensemble(mesh, 4, 7);
  const PathEnsemble c = e.coarsen(4);
  CHECK(c.mesh().steps == 4);
  for (int p = 0; p < 4; ++p) {
    CHECK(c.increment(p, 1) == Approx(e.increment(p, 4) + e.increment(p, 5) + e.increment(p, 6) + e.increment(p, 7)));
    CHECK(c.brownian(p, 4) == Approx(e.brownian(p, 16)));
  }
  CHECK_THROWS_AS(e.coarsen(3), ShapeError);
}

TEST_CASE("sample statistics", "[noise]") {
  const TimeMesh mesh = make_mesh(1.0, 4);
  const PathEnsemble e = sample_ensemble(mesh, 20000, 1);
  double m = 0.0, v = 0.0;
  for (int p = 0; p < e.paths(); ++p) {
    const double x = e.increment(p, 2);
    m += x;
    v += x * x;
  }
  m /= e.paths();
  v /= e.paths();
  // Five standard errors.
  CHECK(std::abs(m) < 5.0 * std::sqrt(0.25 / 20000));
  CHECK(std::abs(v - 0.25) < 5.0 * 0.25 * std::sqrt(2.0 / 20000));
}

TEST_CASE("pairwise sum", "[noise]") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == Approx(100.0).epsilon(1e-14));
  CHECK(pairwise_sum(std::span<const double>{}) == 0.0);
}
