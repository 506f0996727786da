#include "shelab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "shelab/errors.hpp"

namespace shelab {

double squared_distance(const Point& a, const Point& b, int dimension) {
  double s = 0.0;
  for (int d = 0; d < dimension; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

// ---------------------------------------------------------------------------
// SpatialGrid

SpatialGrid build_grid(const std::vector<Extent>& extents, const std::vector<int>& counts) {
  if (extents.empty() || extents.size() > 2 || extents.size() != counts.size()) {
    throw ConfigError("grid: dimension must be 1 or 2 with one node count per axis");
  }
  SpatialGrid g;
  g.dim_ = static_cast<int>(extents.size());
  g.size_ = 1;
  for (int a = 0; a < g.dim_; ++a) {
    const Extent& e = extents[a];
    if (!(e.hi > e.lo) || !std::isfinite(e.lo) || !std::isfinite(e.hi)) {
      throw ConfigError("grid: extent on axis " + std::to_string(a) + " must have hi > lo");
    }
    if (counts[a] < 1) {
      throw ConfigError("grid: node count on axis " + std::to_string(a) + " must be >= 1");
    }
    g.extents_[a] = e;
    g.counts_[a] = counts[a];
    g.spacing_[a] = (e.hi - e.lo) / (counts[a] + 1);
    g.size_ *= static_cast<std::size_t>(counts[a]);
  }
  g.coords_.resize(g.size_);
  for (std::size_t node = 0; node < g.size_; ++node) {
    const int i = static_cast<int>(node % g.counts_[0]);
    const int j = static_cast<int>(node / g.counts_[0]);
    Point p{0.0, 0.0};
    p[0] = g.extents_[0].lo + (i + 1) * g.spacing_[0];
    if (g.dim_ == 2) p[1] = g.extents_[1].lo + (j + 1) * g.spacing_[1];
    g.coords_[node] = p;
  }
  return g;
}

double SpatialGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing_[a];
  return v;
}

Point SpatialGrid::coord(std::size_t node) const { return coords_[node]; }

bool SpatialGrid::is_boundary(int i, int j) const {
  const bool bx = (i == 0 || i == counts_[0] + 1);
  if (dim_ == 1) return bx;
  return bx || j == 0 || j == counts_[1] + 1;
}

std::vector<BoundaryPoint> SpatialGrid::boundary_points() const {
  std::vector<BoundaryPoint> out;
  if (dim_ == 1) {
    out.push_back({{extents_[0].lo, 0.0}, {-1.0, 0.0}});
    out.push_back({{extents_[0].hi, 0.0}, {1.0, 0.0}});
    return out;
  }
  const Extent& ex = extents_[0];
  const Extent& ey = extents_[1];
  for (int i = 0; i <= counts_[0] + 1; ++i) {
    const double x = ex.lo + i * spacing_[0];
    out.push_back({{x, ey.lo}, {0.0, -1.0}});
    out.push_back({{x, ey.hi}, {0.0, 1.0}});
  }
  for (int j = 0; j <= counts_[1] + 1; ++j) {
    const double y = ey.lo + j * spacing_[1];
    out.push_back({{ex.lo, y}, {-1.0, 0.0}});
    out.push_back({{ex.hi, y}, {1.0, 0.0}});
  }
  return out;
}

bool SpatialGrid::contains(const Point& x) const { return distance_to_boundary(x) > 0.0; }

double SpatialGrid::distance_to_boundary(const Point& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim_; ++a) {
    d = std::min({d, x[a] - extents_[a].lo, extents_[a].hi - x[a]});
  }
  return d;
}

bool SpatialGrid::ball_closure_inside(const Ball& ball) const {
  return ball.radius > 0.0 && distance_to_boundary(ball.center) > ball.radius;
}

double SpatialGrid::max_squared_distance(const Point& x0) const {
  double m = 0.0;
  const int corners = dim_ == 1 ? 2 : 4;
  for (int c = 0; c < corners; ++c) {
    Point p{0.0, 0.0};
    p[0] = (c & 1) ? extents_[0].hi : extents_[0].lo;
    if (dim_ == 2) p[1] = (c & 2) ? extents_[1].hi : extents_[1].lo;
    m = std::max(m, squared_distance(p, x0, dim_));
  }
  return m;
}

double SpatialGrid::integrate(std::span<const double> values) const {
  if (values.size() != size_) throw ShapeError("integrate: field size does not match grid");
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_volume();
}

double SpatialGrid::inner(std::span<const double> u, std::span<const double> v) const {
  if (u.size() != size_ || v.size() != size_) throw ShapeError("inner: field size does not match grid");
  double s = 0.0;
  for (std::size_t i = 0; i < size_; ++i) s += u[i] * v[i];
  return s * cell_volume();
}

double SpatialGrid::integrate_ball(std::span<const double> values, const Ball& ball) const {
  if (values.size() != size_) throw ShapeError("integrate_ball: field size does not match grid");
  const double r2 = ball.radius * ball.radius;
  double s = 0.0;
  for (std::size_t i = 0; i < size_; ++i) {
    if (squared_distance(coords_[i], ball.center, dim_) < r2) s += values[i];
  }
  return s * cell_volume();
}

std::vector<unsigned char> SpatialGrid::ball_mask(const Ball& ball) const {
  std::vector<unsigned char> mask(size_, 0);
  const double r2 = ball.radius * ball.radius;
  for (std::size_t i = 0; i < size_; ++i) {
    mask[i] = squared_distance(coords_[i], ball.center, dim_) < r2 ? 1 : 0;
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Discrete operators

Eigen::SparseMatrix<double> laplacian_matrix(const SpatialGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(grid.size() * (1 + 2 * grid.dimension()));
  const int nx = grid.count(0);
  const int ny = grid.dimension() == 2 ? grid.count(1) : 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto row = static_cast<Eigen::Index>(grid.index(i, j));
      double diag = 0.0;
      const double ix2 = 1.0 / (grid.spacing(0) * grid.spacing(0));
      diag -= 2.0 * ix2;
      if (i > 0) trips.emplace_back(row, static_cast<Eigen::Index>(grid.index(i - 1, j)), ix2);
      if (i < nx - 1) trips.emplace_back(row, static_cast<Eigen::Index>(grid.index(i + 1, j)), ix2);
      if (grid.dimension() == 2) {
        const double iy2 = 1.0 / (grid.spacing(1) * grid.spacing(1));
        diag -= 2.0 * iy2;
        if (j > 0) trips.emplace_back(row, static_cast<Eigen::Index>(grid.index(i, j - 1)), iy2);
        if (j < ny - 1) trips.emplace_back(row, static_cast<Eigen::Index>(grid.index(i, j + 1)), iy2);
      }
      trips.emplace_back(row, row, diag);
    }
  }
  Eigen::SparseMatrix<double> lap(n, n);
  lap.setFromTriplets(trips.begin(), trips.end());
  return lap;
}

void apply_laplacian(const SpatialGrid& grid, std::span<const double> in, std::span<double> out) {
  if (in.size() != grid.size() || out.size() != grid.size()) {
    throw ShapeError("apply_laplacian: field size does not match grid");
  }
  const int nx = grid.count(0);
  const int ny = grid.dimension() == 2 ? grid.count(1) : 1;
  const double ix2 = 1.0 / (grid.spacing(0) * grid.spacing(0));
  const double iy2 = grid.dimension() == 2 ? 1.0 / (grid.spacing(1) * grid.spacing(1)) : 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid.index(i, j);
      const double left = i > 0 ? in[grid.index(i - 1, j)] : 0.0;
      const double right = i < nx - 1 ? in[grid.index(i + 1, j)] : 0.0;
      double v = (left - 2.0 * in[c] + right) * ix2;
      if (grid.dimension() == 2) {
        const double down = j > 0 ? in[grid.index(i, j - 1)] : 0.0;
        const double up = j < ny - 1 ? in[grid.index(i, j + 1)] : 0.0;
        v += (down - 2.0 * in[c] + up) * iy2;
      }
      out[c] = v;
    }
  }
}

std::vector<Point> gradient(const SpatialGrid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw ShapeError("gradient: field size does not match grid");
  std::vector<Point> g(grid.size(), Point{0.0, 0.0});
  const int nx = grid.count(0);
  const int ny = grid.dimension() == 2 ? grid.count(1) : 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t c = grid.index(i, j);
      const double left = i > 0 ? values[grid.index(i - 1, j)] : 0.0;
      const double right = i < nx - 1 ? values[grid.index(i + 1, j)] : 0.0;
      g[c][0] = (right - left) / (2.0 * grid.spacing(0));
      if (grid.dimension() == 2) {
        const double down = j > 0 ? values[grid.index(i, j - 1)] : 0.0;
        const double up = j < ny - 1 ? values[grid.index(i, j + 1)] : 0.0;
        g[c][1] = (up - down) / (2.0 * grid.spacing(1));
      }
    }
  }
  return g;
}

DiscreteMode first_mode(const SpatialGrid& grid) {
  DiscreteMode mode;
  mode.vector.resize(grid.size());
  double mu = 0.0;
  for (int a = 0; a < grid.dimension(); ++a) {
    const double h = grid.spacing(a);
    const double s = std::sin(std::numbers::pi * h / (2.0 * (grid.extent(a).hi - grid.extent(a).lo)));
    mu += 4.0 / (h * h) * s * s;
  }
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const Point x = grid.coord(node);
    double v = 1.0;
    for (int a = 0; a < grid.dimension(); ++a) {
      const Extent& e = grid.extent(a);
      v *= std::sin(std::numbers::pi * (x[a] - e.lo) / (e.hi - e.lo));
    }
    mode.vector[node] = v;
  }
  const double nrm = std::sqrt(grid.norm_sq(mode.vector));
  for (double& v : mode.vector) v /= nrm;
  mode.eigenvalue = mu;
  return mode;
}

// ---------------------------------------------------------------------------
// Heat kernel weight

HeatKernelWeight::HeatKernelWeight(double horizon, double lambda, Point x0, int dimension)
    : horizon_(horizon), lambda_(lambda), x0_(x0), dim_(dimension) {
  if (!(horizon > 0.0)) throw ConfigError("kernel: horizon must be positive");
  if (!(lambda > 0.0) || lambda > 1.0) throw ConfigError("kernel: lambda must lie in (0, 1]");
  if (dimension != 1 && dimension != 2) throw ConfigError("kernel: dimension must be 1 or 2");
}

double HeatKernelWeight::shifted(double t) const {
  if (t < 0.0 || t > horizon_) throw DomainError("kernel: time outside [0, T]");
  return horizon_ - t + lambda_;
}

double HeatKernelWeight::value(const Point& x, double t) const {
  const double tau = shifted(t);
  const double r2 = squared_distance(x, x0_, dim_);
  return std::pow(tau, -0.5 * dim_) * std::exp(-r2 / (4.0 * tau));
}

Point HeatKernelWeight::grad(const Point& x, double t) const {
  const double tau = shifted(t);
  const double k = value(x, t);
  Point g{0.0, 0.0};
  for (int d = 0; d < dim_; ++d) g[d] = -(x[d] - x0_[d]) * k / (2.0 * tau);
  return g;
}

double HeatKernelWeight::time_derivative(const Point& x, double t) const {
  const double tau = shifted(t);
  const double r2 = squared_distance(x, x0_, dim_);
  return value(x, t) * (dim_ / (2.0 * tau) - r2 / (4.0 * tau * tau));
}

double HeatKernelWeight::laplacian(const Point& x, double t) const {
  const double tau = shifted(t);
  const double k = value(x, t);
  double s = 0.0;
  for (int d = 0; d < dim_; ++d) {
    const double dx = x[d] - x0_[d];
    s += k * (dx * dx / (4.0 * tau * tau) - 1.0 / (2.0 * tau));
  }
  return s;
}

Field eval_kernel(const HeatKernelWeight& weight, double t, const SpatialGrid& grid) {
  if (weight.dimension() != grid.dimension()) throw ShapeError("eval_kernel: dimension mismatch");
  if (t < 0.0 || t > weight.horizon()) throw DomainError("eval_kernel: time outside [0, T]");
  Field k(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) k[i] = weight.value(grid.coord(i), t);
  return k;
}

CaloricResidual kernel_caloric_residual(const HeatKernelWeight& weight, const SpatialGrid& grid,
                                        double t, double dt) {
  if (!(t > 0.0) || !(t < weight.horizon())) throw DomainError("caloric residual: t must lie in (0, T)");
  CaloricResidual res;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.coord(i);
    const double k = weight.value(x, t);
    res.max_kernel = std::max(res.max_kernel, k);
    res.closed_form = std::max(res.closed_form, std::abs(weight.time_derivative(x, t) + weight.laplacian(x, t)));

    const double tp = std::min(t + dt, weight.horizon());
    const double tm = std::max(t - dt, 0.0);
    const double kt = (weight.value(x, tp) - weight.value(x, tm)) / (tp - tm);
    double lap = 0.0;
    for (int a = 0; a < grid.dimension(); ++a) {
      const double h = grid.spacing(a);
      Point xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      lap += (weight.value(xp, t) - 2.0 * k + weight.value(xm, t)) / (h * h);
    }
    res.finite_difference = std::max(res.finite_difference, std::abs(kt + lap));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Cutoff

double CutoffFunction::profile(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double CutoffFunction::profile_d1(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double u = 1.0 - s;
  return -30.0 * s * s * u * u;
}

double CutoffFunction::profile_d2(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
}

CutoffFunction build_cutoff(const Ball& inner, const Ball& outer, const SpatialGrid& grid) {
  const int n = grid.dimension();
  if (squared_distance(inner.center, outer.center, n) != 0.0) {
    throw GeometryError("cutoff: inner and outer balls must be concentric");
  }
  if (!(inner.radius > 0.0) || !(inner.radius < outer.radius)) {
    throw GeometryError("cutoff: inner ball must lie strictly inside the outer ball");
  }
  if (!grid.ball_closure_inside(outer)) {
    throw GeometryError("cutoff: closure of the outer ball must lie inside G");
  }
  CutoffFunction c;
  c.inner = inner;
  c.outer = outer;
  c.phi.resize(grid.size());
  c.grad.assign(grid.size(), Point{0.0, 0.0});
  c.lap.assign(grid.size(), 0.0);
  const double width = outer.radius - inner.radius;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.coord(i);
    const double rho = std::sqrt(squared_distance(x, inner.center, n));
    const double s = (rho - inner.radius) / width;
    c.phi[i] = CutoffFunction::profile(s);
    if (s > 0.0 && s < 1.0) {
      const double d1 = CutoffFunction::profile_d1(s) / width;
      const double d2 = CutoffFunction::profile_d2(s) / (width * width);
      for (int a = 0; a < n; ++a) c.grad[i][a] = d1 * (x[a] - inner.center[a]) / rho;
      c.lap[i] = d2 + (n - 1) * d1 / rho;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Ball chains

BallChain ball_chain(const Ball& from, const Ball& to, const SpatialGrid& grid) {
  const int n = grid.dimension();
  if (!grid.ball_closure_inside(from)) throw GeometryError("ball_chain: closure of the start ball leaves G");
  if (!grid.ball_closure_inside(to)) throw GeometryError("ball_chain: closure of the target ball leaves G");

  const double rho = from.radius;
  const double dist = std::sqrt(squared_distance(from.center, to.center, n));
  const double last_radius = std::min(rho, to.radius);

  std::size_t m = 1;
  if (dist > 0.0) {
    m = static_cast<std::size_t>(std::ceil(dist / (0.5 * rho))) + 1;
  } else if (to.radius < from.radius) {
    m = 2;
  }

  BallChain chain;
  for (std::size_t i = 0; i < m; ++i) {
    const double frac = m == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(m - 1);
    Ball b;
    for (int a = 0; a < n; ++a) b.center[a] = from.center[a] + frac * (to.center[a] - from.center[a]);
    b.radius = (i + 1 == m) ? last_radius : rho;
    if (i == 0) b.center = from.center;
    if (i + 1 == m) b.center = to.center;
    if (!grid.ball_closure_inside(b)) {
      throw GeometryError("ball_chain: no admissible chain at the requested radii (reduce radii)");
    }
    chain.balls.push_back(b);
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    Ball o;
    o.center = chain.balls[i + 1].center;
    o.radius = (i + 2 == m) ? std::min(0.25 * rho, 0.5 * last_radius) : 0.25 * rho;
    chain.overlaps.push_back(o);
  }
  return chain;
}

bool chain_admissible(const BallChain& chain, const Ball& from, const Ball& to, const SpatialGrid& grid) {
  const int n = grid.dimension();
  if (chain.balls.empty() || chain.overlaps.size() + 1 != chain.balls.size()) return false;
  for (const Ball& b : chain.balls) {
    if (!grid.ball_closure_inside(b)) return false;
  }
  const Ball& first = chain.balls.front();
  if (squared_distance(first.center, from.center, n) != 0.0 || first.radius < from.radius) return false;
  const Ball& last = chain.balls.back();
  if (squared_distance(last.center, to.center, n) != 0.0 || last.radius > to.radius) return false;
  for (std::size_t i = 0; i < chain.overlaps.size(); ++i) {
    const Ball& o = chain.overlaps[i];
    const Ball& s = chain.balls[i];
    const Ball& next = chain.balls[i + 1];
    if (squared_distance(o.center, next.center, n) != 0.0) return false;
    const double ds = std::sqrt(squared_distance(o.center, s.center, n));
    if (!(ds + o.radius < s.radius)) return false;
    if (!(o.radius < next.radius)) return false;
  }
  return true;
}

}  // namespace shelab
