#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace shelab {

/// Uniform partition of [0, T] into N_t steps.
struct TimeMesh {
  double horizon = 1.0;
  int steps = 1;

  double dt() const { return horizon / steps; }
  double time(int k) const { return k == steps ? horizon : k * dt(); }
};

TimeMesh make_mesh(double horizon, int steps);

/// Gaussian increments, one independent stream per path.
class PathEnsemble {
 public:
  PathEnsemble() = default;
  PathEnsemble(TimeMesh mesh, int paths, std::uint64_t seed, std::vector<double> increments);

  const TimeMesh& mesh() const { return mesh_; }
  int paths() const { return paths_; }
  std::uint64_t seed() const { return seed_; }
  double increment(int path, int k) const { return dB_[static_cast<std::size_t>(path) * mesh_.steps + k]; }
  std::span<const double> path(int p) const {
    return {dB_.data() + static_cast<std::size_t>(p) * mesh_.steps, static_cast<std::size_t>(mesh_.steps)};
  }
  double brownian(int path, int k) const;

  /// Same paths on a mesh with steps/factor steps; increments are summed in blocks.
  PathEnsemble coarsen(int factor) const;

 private:
  TimeMesh mesh_;
  int paths_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> dB_;
};

PathEnsemble sample_ensemble(const TimeMesh& mesh, int paths, std::uint64_t seed);

/// Increments of one path, regenerated from (seed, path) alone.
std::vector<double> sample_path(const TimeMesh& mesh, std::uint64_t seed, int path);

/// Full binary tree of +-sqrt(dt) increments. Node i at level k has children
/// 2i (increment +sqrt(dt)) and 2i+1 (increment -sqrt(dt)) at level k+1.
class BernoulliTree {
 public:
  BernoulliTree() = default;
  explicit BernoulliTree(TimeMesh mesh) : mesh_(mesh) {}

  const TimeMesh& mesh() const { return mesh_; }
  int depth() const { return mesh_.steps; }
  std::size_t nodes(int level) const { return std::size_t{1} << level; }
  std::size_t leaves() const { return nodes(depth()); }
  double leaf_weight() const;

  /// Increment dB_{level-1} leading into node `index` of `level` (level >= 1).
  double increment_into(int level, std::size_t index) const;
  /// Increment dB_k along the path ending at leaf `leaf`.
  double increment_on_leaf(std::size_t leaf, int k) const;
  /// B(t_k) at the level-k node `index`.
  double brownian(int level, std::size_t index) const;
  /// Increments dB_0..dB_{level-1} of the history leading to the node.
  std::vector<double> history(int level, std::size_t index) const;

 private:
  TimeMesh mesh_;
};

BernoulliTree build_tree(const TimeMesh& mesh, int depth_cap = 16);

/// E[ . | F_{t_level}] of values stored per node of `from_level` (width
/// doubles each). Returns width doubles per node of `level`.
std::vector<double> conditional_expectation(const BernoulliTree& tree, std::span<const double> values,
                                            int from_level, int level, std::size_t width = 1);

/// Pairwise (cascade) summation; order fixed by the input layout.
double pairwise_sum(std::span<const double> v);

}  // namespace shelab
