#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

namespace shelab {

/// Point in R^1 or R^2; unused coordinates are zero.
using Point = std::array<double, 2>;

/// Nodal values on the interior nodes of a grid (Dirichlet nodes are implicit zeros).
using Field = std::vector<double>;

double squared_distance(const Point& a, const Point& b, int dimension);

struct Extent {
  double lo = 0.0;
  double hi = 1.0;
};

struct Ball {
  Point center{0.0, 0.0};
  double radius = 0.0;
};

/// A node of the full (boundary-inclusive) grid lying on the boundary of G,
/// together with an outward unit normal. Corners appear once per adjacent side.
struct BoundaryPoint {
  Point x{0.0, 0.0};
  Point normal{0.0, 0.0};
};

/// Uniform tensor grid on an interval or a rectangle. Only interior nodes carry
/// unknowns; the boundary carries the homogeneous Dirichlet value.
class SpatialGrid {
 public:
  SpatialGrid() = default;

  int dimension() const { return dim_; }
  std::size_t size() const { return size_; }
  int count(int axis) const { return counts_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  const Extent& extent(int axis) const { return extents_[axis]; }
  double cell_volume() const;

  std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(j) * counts_[0] + i; }
  Point coord(std::size_t node) const;
  const std::vector<Point>& coords() const { return coords_; }

  /// True iff the full-grid node (i, j), with i in [0, count+1], lies on the boundary.
  bool is_boundary(int i, int j = 0) const;
  std::vector<BoundaryPoint> boundary_points() const;

  bool contains(const Point& x) const;
  /// Distance from x to the boundary of G (negative outside).
  double distance_to_boundary(const Point& x) const;
  /// Closure of the ball strictly inside G.
  bool ball_closure_inside(const Ball& ball) const;
  /// max over the closure of G of |x - x0|^2.
  double max_squared_distance(const Point& x0) const;

  /// Trapezoid rule; exact for the Dirichlet zero boundary values.
  double integrate(std::span<const double> values) const;
  double inner(std::span<const double> u, std::span<const double> v) const;
  double norm_sq(std::span<const double> u) const { return inner(u, u); }
  /// Integral restricted to nodes inside the open ball.
  double integrate_ball(std::span<const double> values, const Ball& ball) const;
  std::vector<unsigned char> ball_mask(const Ball& ball) const;

  friend SpatialGrid build_grid(const std::vector<Extent>& extents, const std::vector<int>& counts);

 private:
  int dim_ = 0;
  std::array<int, 2> counts_{1, 1};
  std::array<double, 2> spacing_{1.0, 1.0};
  std::array<Extent, 2> extents_{};
  std::size_t size_ = 0;
  std::vector<Point> coords_;
};

/// Uniform partition with `counts[a]` interior nodes on axis a.
SpatialGrid build_grid(const std::vector<Extent>& extents, const std::vector<int>& counts);

/// Dirichlet 3-point / 5-point discrete Laplacian on the interior nodes.
Eigen::SparseMatrix<double> laplacian_matrix(const SpatialGrid& grid);
void apply_laplacian(const SpatialGrid& grid, std::span<const double> in, std::span<double> out);

/// Centered differences with the Dirichlet ghost value 0 next to the boundary.
std::vector<Point> gradient(const SpatialGrid& grid, std::span<const double> values);

/// First Dirichlet eigenvector of the discrete Laplacian (L2-normalized) and
/// its eigenvalue mu_1 of -Delta_h.
struct DiscreteMode {
  Field vector;
  double eigenvalue = 0.0;
};
DiscreteMode first_mode(const SpatialGrid& grid);

/// Backward Gaussian weight K(x,t) = (T-t+lambda)^{-n/2} exp(-|x-x0|^2 / (4(T-t+lambda))).
class HeatKernelWeight {
 public:
  HeatKernelWeight(double horizon, double lambda, Point x0, int dimension);

  double horizon() const { return horizon_; }
  double lambda() const { return lambda_; }
  const Point& center() const { return x0_; }
  int dimension() const { return dim_; }

  double value(const Point& x, double t) const;
  Point grad(const Point& x, double t) const;
  double time_derivative(const Point& x, double t) const;
  /// Sum of the closed-form second partials.
  double laplacian(const Point& x, double t) const;

 private:
  double shifted(double t) const;
  double horizon_;
  double lambda_;
  Point x0_;
  int dim_;
};

Field eval_kernel(const HeatKernelWeight& weight, double t, const SpatialGrid& grid);

struct CaloricResidual {
  double closed_form = 0.0;       ///< max |K_t + Delta K| from the closed forms
  double finite_difference = 0.0; ///< same with centered differences in t and x
  double max_kernel = 0.0;
};

/// Max over interior nodes of the caloric residual at time t in (0, T).
CaloricResidual kernel_caloric_residual(const HeatKernelWeight& weight, const SpatialGrid& grid,
                                        double t, double dt);

/// Radial quintic plateau: phi = 1 on the inner ball, 0 outside the outer one.
struct CutoffFunction {
  Ball inner;
  Ball outer;
  Field phi;
  std::vector<Point> grad;
  Field lap;

  /// Profile q(s) = 1 - s^3 (10 - 15 s + 6 s^2) on s in [0,1] and its first two derivatives.
  static double profile(double s);
  static double profile_d1(double s);
  static double profile_d2(double s);
};

CutoffFunction build_cutoff(const Ball& inner, const Ball& outer, const SpatialGrid& grid);

/// Chain S_1..S_m with overlap balls S~_1..S~_{m-1} joining two balls in G.
struct BallChain {
  std::vector<Ball> balls;
  std::vector<Ball> overlaps;
  std::size_t length() const { return balls.size(); }
};

BallChain ball_chain(const Ball& from, const Ball& to, const SpatialGrid& grid);

/// Re-checks every containment predicate of a chain.
bool chain_admissible(const BallChain& chain, const Ball& from, const Ball& to, const SpatialGrid& grid);

}  // namespace shelab
