#include "shelab/ucp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shelab/errors.hpp"

namespace shelab {

double ucp_J(double T, double m, double a_sup, double b_sq, int n) {
  return (T + 1.0) * std::exp(T * b_sq) * (m / (T * T) + 4.0 * a_sup + T * a_sup * a_sup + 2.0 * (1.0 + T) * b_sq) +
         0.5 * n;
}

UcpConstants compute_constants(const UcpInputs& in) {
  if (!(in.r > 0.0) || !(in.m > 0.0) || !(in.T > 0.0)) throw ConfigError("ucp constants: r, m, T must be positive");
  if (in.a_sup < 0.0 || in.b_norm < 0.0) throw ConfigError("ucp constants: norms must be nonnegative");
  if (!(in.energy0 > 0.0)) throw PreconditionError("ucp constants: E||y(0)||^2 must be positive");
  UcpConstants c;
  c.r = in.r;
  c.m = in.m;
  c.T = in.T;
  c.n = in.n;
  c.a_sup = in.a_sup;
  c.a_sq = in.a_sup * in.a_sup;
  c.b_sq = in.b_norm * in.b_norm;
  const double T = in.T;
  const double growth = (T + 1.0) * std::exp(T * c.b_sq);
  if (in.energyT <= 0.0) {
    c.backward_uniqueness_branch = true;
    c.log_ratio = 0.0;
  } else {
    c.log_ratio = std::max(0.0, std::log(in.energy0 / in.energyT));
  }
  c.J = ucp_J(T, in.m, in.a_sup, c.b_sq, in.n);
  c.Dcal = c.J + growth * (2.0 / T) * c.log_ratio;
  c.denominator = in.r * in.r * T + 8.0 * in.m * growth;
  c.delta = in.r * in.r * T / c.denominator;
  c.beta = 4.0 * in.m * T * c.J / c.denominator;
  c.lambda_tilde = in.r * in.r / (16.0 * c.Dcal);
  c.theta = 8.0 * in.m * growth / (in.r * in.r * T);
  return c;
}

std::vector<double> lambda_grid() {
  std::vector<double> g(41);
  for (int j = 0; j <= 40; ++j) g[j] = std::ldexp(1.0, -j);
  return g;
}

LambdaSelection select_lambda(const std::vector<double>& lambdas, const std::vector<double>& A, double r, int n) {
  if (lambdas.size() != A.size()) throw ShapeError("select_lambda: profile length does not match the grid");
  LambdaSelection sel;
  sel.lambdas = lambdas;
  sel.A = A;
  sel.brackets.resize(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double br = std::isfinite(A[i]) ? 1.0 - 8.0 * lambdas[i] / (r * r) * (A[i] + 0.5 * n)
                                          : -std::numeric_limits<double>::infinity();
    sel.brackets[i] = br;
    if (br >= 0.5 && (!sel.found || lambdas[i] > sel.lambda)) {
      sel.found = true;
      sel.lambda = lambdas[i];
      sel.bracket = br;
    }
  }
  return sel;
}

std::vector<double> sharp_profile(const TrajectoryEnsemble& y, const CutoffFunction* cutoff, const Point& x0,
                                  const std::vector<double>& lambdas) {
  const SpatialGrid& grid = y.grid();
  const int N = y.steps();
  const std::size_t n = grid.size();
  // Phi(T) and its gradient per final scenario, reused for every lambda.
  std::vector<Field> phi;
  std::vector<std::vector<Point>> grad;
  std::vector<std::size_t> live;
  for (std::size_t j = 0; j < y.scenarios(N); ++j) {
    if (y.excluded(N, j)) continue;
    Field p(y.at(N, j).begin(), y.at(N, j).end());
    if (cutoff) {
      for (std::size_t i = 0; i < n; ++i) p[i] *= cutoff->phi[i];
    }
    grad.push_back(gradient(grid, p));
    phi.push_back(std::move(p));
  }
  std::vector<double> out(lambdas.size());
  std::vector<double> hs(phi.size()), ds(phi.size());
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const HeatKernelWeight w(y.mesh().horizon, lambdas[l], x0, grid.dimension());
    const Field K = eval_kernel(w, y.mesh().horizon, grid);
    for (std::size_t s = 0; s < phi.size(); ++s) {
      double h = 0.0, d = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        h += phi[s][i] * phi[s][i] * K[i];
        d += (grad[s][i][0] * grad[s][i][0] + grad[s][i][1] * grad[s][i][1]) * K[i];
      }
      hs[s] = h;
      ds[s] = d;
    }
    const double H = pairwise_sum(hs);
    const double D = pairwise_sum(ds);
    out[l] = H > 0.0 ? lambdas[l] * 2.0 * D / H : std::numeric_limits<double>::infinity();
  }
  return out;
}

std::vector<double> epsilon_profile(const TrajectoryEnsemble& y, const ForwardCoefficients& coeffs,
                                    const CutoffFunction& cutoff, const Point& x0, const std::vector<double>& lambdas,
                                    double eps, double b_norm_r4) {
  const double T = y.mesh().horizon;
  if (!(eps > 0.0) || !(2.0 * eps < T)) throw DomainError("epsilon_profile: eps must lie in (0, T/2)");
  const LocalizedField loc = localize(y, coeffs, &cutoff);
  const double b2 = b_norm_r4 * b_norm_r4;
  std::vector<double> out(lambdas.size());
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const HeatKernelWeight w(T, lambdas[l], x0, y.grid().dimension());
    const FrequencyTrace tr = compute_HDN(loc, w);
    const auto interp = [&](const std::vector<double>& v, double t) {
      const double dt = y.mesh().dt();
      const std::size_t k = std::min(static_cast<std::size_t>(t / dt), v.size() - 2);
      const double s = (t - tr.t[k]) / dt;
      return (1.0 - s) * v[k] + s * v[k + 1];
    };
    const double h2 = interp(tr.H, T - 2.0 * eps);
    const double h1 = interp(tr.H, T - eps);
    if (!(h1 > 0.0) || !(h2 > 0.0)) {
      out[l] = std::numeric_limits<double>::infinity();
      continue;
    }
    // E int F^2 K / H on [T - 2 eps, T] by trapezoid over the trace nodes.
    std::vector<double> q(tr.t.size(), 0.0);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
      if (!tr.valid[k]) continue;
      const Field K = eval_kernel(w, tr.t[k], y.grid());
      const int lev = static_cast<int>(k);
      const double fk = y.expectation(lev, [&](std::span<const double>, std::size_t j) {
        const auto F = loc.F(lev, j);
        double s = 0.0;
        for (std::size_t i = 0; i < K.size(); ++i) s += F[i] * F[i] * K[i];
        return s * y.grid().cell_volume();
      });
      q[k] = fk / tr.H[k];
    }
    double fint = 0.0;
    const double lo = T - 2.0 * eps;
    for (std::size_t k = 0; k + 1 < tr.t.size(); ++k) {
      const double a = std::max(lo, tr.t[k]);
      const double b = tr.t[k + 1];
      if (b <= a) continue;
      fint += 0.5 * (b - a) * (interp(q, a) + interp(q, b));
    }
    out[l] = (T + lambdas[l]) / eps * std::exp(2.0 * T * b2) *
             (std::log(h2 / h1) + eps + eps * (1.0 + 2.0 * T) * b2 + (eps + 1.0) * fint);
  }
  return out;
}

ThreeBallReport three_ball_check(const TrajectoryEnsemble& y, const Point& x0, double r1, double r2, double lambda,
                                 double tol) {
  if (!(r1 > 0.0) || !(r1 < r2)) throw GeometryError("three_ball_check: radii must satisfy 0 < r1 < r2");
  if (!(lambda > 0.0)) throw DomainError("three_ball_check: lambda must be positive");
  const SpatialGrid& grid = y.grid();
  const int N = y.steps();
  const int dim = grid.dimension();
  ThreeBallReport rep;
  rep.lambda = lambda;
  rep.tolerance = tol;
  Field wl(grid.size(), 0.0), wr(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d2 = squared_distance(grid.coord(i), x0, dim);
    const double th = std::exp(-d2 / (4.0 * lambda));
    if (d2 < r2 * r2) wl[i] = d2 * th;
    if (d2 < r1 * r1) wr[i] = r1 * r1 * th;
  }
  const double vol = grid.cell_volume();
  auto mass = [&](const Field& w) {
    return y.expectation(N, [&](std::span<const double> v, std::size_t) {
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i] * v[i];
      return s * vol;
    });
  };
  rep.lhs = mass(wl);
  rep.rhs = mass(wr);
  rep.pass = rep.lhs <= rep.rhs * (1.0 + tol);
  return rep;
}

UcpCheck quantitative_ucp_check(const TrajectoryEnsemble& y, const Ball& br, const UcpConstants& c, double tol) {
  const SpatialGrid& grid = y.grid();
  const int N = y.steps();
  UcpCheck out;
  out.tolerance = tol;
  const auto mask = grid.ball_mask(br);
  out.lhs = y.expectation(N, [&](std::span<const double> v, std::size_t) { return grid.norm_sq(v); });
  out.global0 = y.expectation(0, [&](std::span<const double> v, std::size_t) { return grid.norm_sq(v); });
  out.localT = y.expectation(N, [&](std::span<const double> v, std::size_t) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += mask[i] ? v[i] * v[i] : 0.0;
    return s * grid.cell_volume();
  });
  if (out.lhs == 0.0) {
    out.rhs = 0.0;
    out.pass = true;
    out.note = "y(T) vanishes: backward-uniqueness branch (Lemma 2.3), inequality holds as 0 <= 0";
    return out;
  }
  out.rhs = std::exp(c.delta * std::log(2.0) + c.beta + (1.0 - c.delta) * std::log(out.global0) +
                     c.delta * std::log(out.localT));
  out.pass = out.lhs <= out.rhs * (1.0 + tol);
  return out;
}

PropagationReport propagate_vanishing(const TrajectoryEnsemble& y, const Ball& seed, const Ball& target) {
  const SpatialGrid& grid = y.grid();
  const BallChain chain = ball_chain(seed, target, grid);
  const int N = y.steps();
  PropagationReport rep;
  rep.global_mass = y.expectation(N, [&](std::span<const double> v, std::size_t) { return grid.norm_sq(v); });
  const double threshold = 1e-12 * rep.global_mass;
  auto resolved = [&](const Ball& b) {
    const auto mask = grid.ball_mask(b);
    return std::any_of(mask.begin(), mask.end(), [](unsigned char m) { return m != 0; });
  };
  auto ball_mass = [&](const Ball& b) {
    const auto mask = grid.ball_mask(b);
    return y.expectation(N, [&](std::span<const double> v, std::size_t) {
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += mask[i] ? v[i] * v[i] : 0.0;
      return s * grid.cell_volume();
    });
  };
  const auto lambdas = lambda_grid();
  bool run = true;
  for (std::size_t i = 0; i < chain.length(); ++i) {
    PropagationStep st;
    st.ball = chain.balls[i];
    st.mass = ball_mass(st.ball);
    st.resolved = resolved(st.ball);
    // A ball holding no grid node carries no information; it never counts as vanishing.
    st.vanishing = st.resolved && st.mass <= threshold;
    if (i + 1 < chain.length()) {
      st.overlap = chain.overlaps[i];
      st.overlap_mass = ball_mass(st.overlap);
      st.overlap_resolved = resolved(st.overlap);
      st.overlap_vanishing = st.overlap_resolved && st.overlap_mass <= threshold;
      const Ball& next = chain.balls[i + 1];
      const auto A = sharp_profile(y, nullptr, st.overlap.center, lambdas);
      const LambdaSelection sel = select_lambda(lambdas, A, st.overlap.radius, grid.dimension());
      const double lam = sel.found ? sel.lambda : lambdas.back();
      st.three_ball = three_ball_check(y, st.overlap.center, st.overlap.radius, next.radius, lam, 0.0);
      st.three_ball.bracket = sel.found ? sel.bracket : 0.0;
      // Vanishing mass on S~_i forces the weighted mass on S_{i+1} down with it.
      if (st.overlap_vanishing && st.three_ball.lhs > threshold * next.radius * next.radius) rep.consistent = false;
    }
    if (run && st.vanishing) {
      ++rep.vanishing_balls;
    } else {
      run = false;
    }
    rep.steps.push_back(st);
  }
  rep.seed_vanishing = !rep.steps.empty() && rep.steps.front().vanishing;
  rep.reached_target = rep.vanishing_balls == chain.length();
  return rep;
}

}  // namespace shelab
