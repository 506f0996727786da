#include "shelab/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shelab/errors.hpp"

namespace shelab {

LocalizedField localize(const TrajectoryEnsemble& y, const ForwardCoefficients& coeffs, const CutoffFunction* cutoff) {
  const SpatialGrid& grid = y.grid();
  const std::size_t n = grid.size();
  if (cutoff && (cutoff->phi.size() != n)) throw ShapeError("localize: cutoff does not match the grid");

  LocalizedField loc;
  loc.y_ = &y;
  if (cutoff) loc.cutoff_ = *cutoff;
  loc.n_ = n;
  const int N = y.steps();
  loc.offset_.resize(N + 1);
  std::size_t total = 0;
  for (int k = 0; k <= N; ++k) {
    loc.offset_[k] = total * n;
    total += y.scenarios(k);
  }
  loc.Phi_.assign(total * n, 0.0);
  loc.F_.assign(total * n, 0.0);
  loc.a_.assign(total * n, 0.0);
  loc.b_.assign(total * n, 0.0);

  const NoiseSource& noise = y.noise();
  for (int k = 0; k <= N; ++k) {
    // Coefficients at the last node are only needed for diagnostics; reuse step N-1 there.
    const int kc = std::min(k, N - 1);
    for (std::size_t j = 0; j < y.scenarios(k); ++j) {
      const auto yk = y.at(k, j);
      std::span<double> phi{loc.Phi_.data() + loc.offset_[k] + j * n, n};
      std::span<double> F{loc.F_.data() + loc.offset_[k] + j * n, n};
      std::span<double> a{loc.a_.data() + loc.offset_[k] + j * n, n};
      std::span<double> b{loc.b_.data() + loc.offset_[k] + j * n, n};
      std::vector<double> hist;
      if (!coeffs.a.deterministic() || !coeffs.b.deterministic()) hist = noise.history(k, j);
      coeffs.a.evaluate(kc, hist, a);
      coeffs.b.evaluate(kc, hist, b);
      if (!cutoff) {
        for (std::size_t i = 0; i < n; ++i) {
          phi[i] = yk[i];
          F[i] = a[i] * yk[i];
        }
        continue;
      }
      const auto gy = gradient(grid, yk);
      for (std::size_t i = 0; i < n; ++i) {
        phi[i] = cutoff->phi[i] * yk[i];
        double dot = 0.0;
        for (int d = 0; d < grid.dimension(); ++d) dot += cutoff->grad[i][d] * gy[i][d];
        F[i] = a[i] * phi[i] - yk[i] * cutoff->lap[i] - 2.0 * dot;
      }
    }
  }
  return loc;
}

namespace {

void check_weight(const TrajectoryEnsemble& y, const HeatKernelWeight& weight) {
  const double T = y.mesh().horizon;
  if (std::abs(weight.horizon() - T) > 1e-12 * T) {
    throw PreconditionError("kernel horizon does not match the trajectory horizon");
  }
  if (weight.dimension() != y.grid().dimension()) throw ShapeError("kernel dimension does not match the grid");
}

double weighted(std::span<const double> u, std::span<const double> v, const Field& K) {
  double s = 0.0;
  for (std::size_t i = 0; i < K.size(); ++i) s += u[i] * v[i] * K[i];
  return s;
}

}  // namespace

FrequencyTrace compute_HDN(const LocalizedField& loc, const HeatKernelWeight& weight) {
  const TrajectoryEnsemble& y = loc.source();
  check_weight(y, weight);
  const SpatialGrid& grid = y.grid();
  const double vol = grid.cell_volume();
  const int N = y.steps();
  FrequencyTrace tr;
  tr.lambda = weight.lambda();
  tr.x0 = weight.center();
  tr.t.resize(N + 1);
  tr.H.resize(N + 1);
  tr.D.resize(N + 1);
  tr.N.assign(N + 1, 0.0);
  tr.valid.assign(N + 1, 0);
  for (int k = 0; k <= N; ++k) {
    const double t = y.mesh().time(k);
    tr.t[k] = t;
    const Field K = eval_kernel(weight, t, grid);
    tr.H[k] = y.expectation(k, [&](std::span<const double>, std::size_t j) {
      const auto phi = loc.phi(k, j);
      return weighted(phi, phi, K) * vol;
    });
    tr.D[k] = y.expectation(k, [&](std::span<const double>, std::size_t j) {
      const auto g = gradient(grid, loc.phi(k, j));
      double s = 0.0;
      for (std::size_t i = 0; i < K.size(); ++i) s += (g[i][0] * g[i][0] + g[i][1] * g[i][1]) * K[i];
      return s * vol;
    });
  }
  const double floor = 1e-14 * tr.H[0];
  for (int k = 0; k <= N; ++k) {
    if (tr.H[0] > 0.0 && tr.H[k] >= floor && tr.H[k] > 0.0) {
      tr.valid[k] = 1;
      tr.N[k] = 2.0 * tr.D[k] / tr.H[k];
    }
  }
  return tr;
}

IdentityResidual hprime_identity_residual(const FrequencyTrace& trace, const LocalizedField& loc,
                                          const HeatKernelWeight& weight) {
  const TrajectoryEnsemble& y = loc.source();
  check_weight(y, weight);
  const int N = y.steps();
  if (static_cast<int>(trace.H.size()) != N + 1) throw ShapeError("identity residual: trace length mismatch");
  const SpatialGrid& grid = y.grid();
  const double vol = grid.cell_volume();
  const double dt = y.mesh().dt();
  IdentityResidual out;
  out.residual.resize(N);
  out.rhs.resize(N);
  const double Hmax = *std::max_element(trace.H.begin(), trace.H.end());
  for (int k = 0; k < N; ++k) {
    const Field K = eval_kernel(weight, trace.t[k], grid);
    const double cross = y.expectation(k, [&](std::span<const double>, std::size_t j) {
      return weighted(loc.phi(k, j), loc.F(k, j), K) * vol;
    });
    const double noise = y.expectation(k, [&](std::span<const double>, std::size_t j) {
      const auto phi = loc.phi(k, j);
      const auto b = loc.b(k, j);
      double s = 0.0;
      for (std::size_t i = 0; i < K.size(); ++i) s += b[i] * b[i] * phi[i] * phi[i] * K[i];
      return s * vol;
    });
    out.rhs[k] = -2.0 * trace.D[k] + 2.0 * cross + noise;
    out.residual[k] = (trace.H[k + 1] - trace.H[k]) / dt - out.rhs[k];
    out.max_abs = std::max(out.max_abs, std::abs(out.residual[k]));
    out.integrated += dt * std::abs(out.residual[k]);
    out.signed_integrated += dt * out.residual[k];
  }
  if (Hmax > 0.0) {
    out.max_normalized = out.max_abs / Hmax;
    out.integrated /= Hmax;
    out.signed_integrated /= Hmax;
  }
  return out;
}

BoundCheck frequency_bound_check(const FrequencyTrace& trace, const LocalizedField& loc, const HeatKernelWeight& weight,
                                 const BoundNorms& norms, std::size_t s_index, std::size_t t_index,
                                 double tol_scale) {
  const TrajectoryEnsemble& y = loc.source();
  check_weight(y, weight);
  const std::size_t M = trace.H.size();
  if (s_index > t_index || t_index >= M) throw DomainError("frequency bound: interval outside the trace");
  for (std::size_t k = s_index; k <= t_index; ++k) {
    if (!trace.valid[k]) throw PreconditionError("frequency bound: H vanishes inside [s, t]");
  }
  const SpatialGrid& grid = y.grid();
  const double vol = grid.cell_volume();
  const double T = weight.horizon();
  const double lam = weight.lambda();
  const double b2 = norms.b_w1 * norms.b_w1;
  const bool cutoff = !loc.identity();

  BoundCheck out;
  out.f_term.assign(M, 0.0);
  std::vector<double> g(M, 0.0);
  double maxN = 0.0;
  for (std::size_t k = s_index; k <= t_index; ++k) {
    const int lev = static_cast<int>(k);
    if (cutoff) {
      const Field K = eval_kernel(weight, trace.t[k], grid);
      const double fk = y.expectation(lev, [&](std::span<const double>, std::size_t j) {
        const auto F = loc.F(lev, j);
        return weighted(F, F, K) * vol;
      });
      out.f_term[k] = fk / trace.H[k];
      g[k] = (1.0 / (T - trace.t[k] + lam) + 2.0 * b2) * trace.N[k] + 2.0 * b2 + out.f_term[k];
    } else {
      g[k] = (1.0 / (T - trace.t[k] + lam) + b2) * trace.N[k] + norms.a_sup * norms.a_sup + 2.0 * b2;
    }
    maxN = std::max(maxN, std::abs(trace.N[k]));
  }
  // Trapezoid prefix sums of the right-hand integrand.
  std::vector<double> P(M, 0.0);
  for (std::size_t k = s_index + 1; k <= t_index; ++k) {
    P[k] = P[k - 1] + 0.5 * (trace.t[k] - trace.t[k - 1]) * (g[k] + g[k - 1]);
  }
  out.margin = std::numeric_limits<double>::infinity();
  out.worst_s = s_index;
  out.worst_t = s_index;
  for (std::size_t s = s_index; s <= t_index; ++s) {
    for (std::size_t t = s; t <= t_index; ++t) {
      const double m = (P[t] - P[s]) - (trace.N[t] - trace.N[s]);
      if (m < out.margin) {
        out.margin = m;
        out.worst_s = s;
        out.worst_t = t;
      }
    }
  }
  double h2 = 0.0;
  for (int a = 0; a < grid.dimension(); ++a) h2 = std::max(h2, grid.spacing(a) * grid.spacing(a));
  out.tolerance = tol_scale * 1.1 * 5.0 * (y.mesh().dt() + h2) * (1.0 + maxN);
  out.pass = out.margin >= -out.tolerance;
  return out;
}

BoundarySignReport boundary_sign_audit(const SpatialGrid& grid, const Point& x0) {
  BoundarySignReport rep;
  rep.min_sign = std::numeric_limits<double>::infinity();
  for (const BoundaryPoint& bp : grid.boundary_points()) {
    double s = 0.0;
    for (int d = 0; d < grid.dimension(); ++d) s += (bp.x[d] - x0[d]) * bp.normal[d];
    rep.min_sign = std::min(rep.min_sign, s);
    if (s < 0.0) ++rep.negative;
    ++rep.checked;
  }
  rep.pass = rep.negative == 0;
  return rep;
}

}  // namespace shelab
