#include "shelab/noise.hpp"

#include <cmath>
#include <random>
#include <string>

#include "shelab/errors.hpp"

namespace shelab {

TimeMesh make_mesh(double horizon, int steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("time mesh: horizon must be positive");
  if (steps < 1) throw ConfigError("time mesh: step count must be >= 1");
  return TimeMesh{horizon, steps};
}

PathEnsemble::PathEnsemble(TimeMesh mesh, int paths, std::uint64_t seed, std::vector<double> increments)
    : mesh_(mesh), paths_(paths), seed_(seed), dB_(std::move(increments)) {
  if (dB_.size() != static_cast<std::size_t>(paths) * mesh.steps) {
    throw ShapeError("path ensemble: increment count does not match paths x steps");
  }
}

double PathEnsemble::brownian(int p, int k) const {
  double b = 0.0;
  for (int j = 0; j < k; ++j) b += increment(p, j);
  return b;
}

PathEnsemble PathEnsemble::coarsen(int factor) const {
  if (factor < 1 || mesh_.steps % factor != 0) throw ShapeError("coarsen: factor must divide the step count");
  TimeMesh coarse = make_mesh(mesh_.horizon, mesh_.steps / factor);
  std::vector<double> dB(static_cast<std::size_t>(paths_) * coarse.steps, 0.0);
  for (int p = 0; p < paths_; ++p) {
    for (int k = 0; k < coarse.steps; ++k) {
      double s = 0.0;
      for (int j = 0; j < factor; ++j) s += increment(p, k * factor + j);
      dB[static_cast<std::size_t>(p) * coarse.steps + k] = s;
    }
  }
  return PathEnsemble(coarse, paths_, seed_, std::move(dB));
}

std::vector<double> sample_path(const TimeMesh& mesh, std::uint64_t seed, int path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, std::sqrt(mesh.dt()));
  std::vector<double> dB(mesh.steps);
  for (double& v : dB) v = normal(rng);
  return dB;
}

PathEnsemble sample_ensemble(const TimeMesh& mesh, int paths, std::uint64_t seed) {
  if (paths < 1) throw ConfigError("sample_ensemble: path count must be >= 1");
  std::vector<double> dB;
  dB.reserve(static_cast<std::size_t>(paths) * mesh.steps);
  for (int p = 0; p < paths; ++p) {
    auto one = sample_path(mesh, seed, p);
    dB.insert(dB.end(), one.begin(), one.end());
  }
  return PathEnsemble(mesh, paths, seed, std::move(dB));
}

double BernoulliTree::leaf_weight() const { return std::ldexp(1.0, -depth()); }

double BernoulliTree::increment_into(int level, std::size_t index) const {
  if (level < 1 || level > depth()) throw DomainError("tree: level out of range");
  const double s = std::sqrt(mesh_.dt());
  return (index & 1u) ? -s : s;
}

double BernoulliTree::increment_on_leaf(std::size_t leaf, int k) const {
  return increment_into(k + 1, leaf >> (depth() - k - 1));
}

double BernoulliTree::brownian(int level, std::size_t index) const {
  double b = 0.0;
  for (int l = level; l >= 1; --l, index >>= 1) b += increment_into(l, index);
  return b;
}

std::vector<double> BernoulliTree::history(int level, std::size_t index) const {
  std::vector<double> h(level);
  for (int l = level; l >= 1; --l, index >>= 1) h[l - 1] = increment_into(l, index);
  return h;
}

BernoulliTree build_tree(const TimeMesh& mesh, int depth_cap) {
  if (mesh.steps > depth_cap) {
    throw ResourceError("tree depth " + std::to_string(mesh.steps) + " exceeds the cap " + std::to_string(depth_cap));
  }
  if (mesh.steps > 30) throw ResourceError("tree depth beyond 30 is not addressable");
  return BernoulliTree(mesh);
}

std::vector<double> conditional_expectation(const BernoulliTree& tree, std::span<const double> values,
                                            int from_level, int level, std::size_t width) {
  if (from_level < level || from_level > tree.depth() || level < 0) {
    throw ShapeError("conditional_expectation: levels out of order");
  }
  if (values.size() != tree.nodes(from_level) * width) {
    throw ShapeError("conditional_expectation: value count does not match the tree level");
  }
  std::vector<double> cur(values.begin(), values.end());
  for (int l = from_level; l > level; --l) {
    std::vector<double> up(tree.nodes(l - 1) * width);
    for (std::size_t i = 0; i < tree.nodes(l - 1); ++i) {
      const double* c0 = cur.data() + (2 * i) * width;
      const double* c1 = cur.data() + (2 * i + 1) * width;
      for (std::size_t w = 0; w < width; ++w) up[i * width + w] = 0.5 * (c0[w] + c1[w]);
    }
    cur.swap(up);
  }
  return cur;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

}  // namespace shelab
