#include "shelab/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/Eigenvalues>

#include "shelab/errors.hpp"

namespace shelab {

TreeField::TreeField(int depth, std::size_t nodes) : depth_(depth), n_(nodes) {
  const std::size_t total = ((std::size_t{1} << (depth + 1)) - 1) * nodes;
  check_storage(total, "tree field");
  data_.assign(total, 0.0);
}

namespace {

std::vector<double> step_weights(const TimeMesh& mesh, const MeasurableTimeSet& e1) {
  std::vector<double> w(static_cast<std::size_t>(mesh.steps), 0.0);
  const double dt = mesh.dt();
  for (int k = 0; k < mesh.steps; ++k) {
    double frac = e1.measure_in(mesh.time(k), mesh.time(k + 1)) / dt;
    w[static_cast<std::size_t>(k)] = frac >= 0.5 ? frac : 0.0;
  }
  return w;
}

// Coefficient tables per step k = 0..N-1.
std::vector<Field> tabulate(const CoefficientField& c, int steps, std::size_t n) {
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) out.push_back(c.at(k, n));
  return out;
}

double dot(const Field& u, const Field& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm2(const Field& u) { return std::sqrt(dot(u, u)); }

}  // namespace

ControlProblem::ControlProblem(SpatialGrid grid, TimeMesh mesh, CoefficientField a1, CoefficientField b1, Ball g0,
                               MeasurableTimeSet e1, int depth_cap)
    : grid_(std::move(grid)),
      tree_(build_tree(mesh, depth_cap)),
      a1_(std::move(a1)),
      b1_(std::move(b1)),
      g0_(g0),
      e1_(std::move(e1)),
      op_(grid_, mesh.dt()) {
  if (!a1_.deterministic() || !b1_.deterministic()) {
    throw ConfigError("control: backward coefficients a1, b1 must be deterministic");
  }
  if (std::abs(e1_.horizon() - mesh.horizon) > 1e-12 * mesh.horizon) {
    throw ConfigError("control: E1 horizon differs from the time mesh");
  }
  if (!grid_.ball_closure_inside(g0_)) throw GeometryError("control: closure of G0 must lie inside G");
  mask_ = grid_.ball_mask(g0_);
  if (std::none_of(mask_.begin(), mask_.end(), [](unsigned char c) { return c != 0; })) {
    throw GeometryError("control: G0 contains no grid node");
  }
  w_ = step_weights(mesh, e1_);
}

BackwardPair solve_backward_tree(const ControlProblem& p, const TreeField& zT, const TreeField* h, const TreeField* f,
                                 BackwardMode mode) {
  const std::size_t n = p.size();
  const int N = p.mesh().steps;
  if (zT.depth() != N || zT.nodes() != n) throw ShapeError("backward: terminal field shape mismatch");
  if (h && (h->depth() != N || h->nodes() != n)) throw ShapeError("backward: h shape mismatch");
  if (f && (f->depth() != N || f->nodes() != n)) throw ShapeError("backward: f shape mismatch");

  const double dt = p.mesh().dt();
  const double sq = std::sqrt(dt);
  const auto a1 = tabulate(p.a1(), N, n);
  const auto b1 = tabulate(p.b1(), N, n);
  const auto& mask = p.mask();
  const auto& w = p.weights();

  BackwardPair out{TreeField(N, n), TreeField(N, n)};
  for (std::size_t i = 0; i < p.tree().nodes(N); ++i) {
    auto src = zT.at(N, i);
    std::copy(src.begin(), src.end(), out.z.at(N, i).begin());
  }

  // Independent mode factors (I - dt Delta + dt a1_k) per step; constant a1 needs one.
  std::vector<std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>> implicit;
  if (mode == BackwardMode::Independent) {
    const int count = p.a1().is_constant() ? 1 : N;
    for (int k = 0; k < count; ++k) {
      Eigen::SparseMatrix<double> A = p.step().matrix();
      for (std::size_t i = 0; i < n; ++i) {
        A.coeffRef(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += dt * a1[static_cast<std::size_t>(k)][i];
      }
      implicit.push_back(std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(A));
      if (implicit.back()->info() != Eigen::Success) {
        throw NumericalError("backward: implicit step factorization failed");
      }
    }
  }

  Field rz_up(n), rz_dn(n), rhs(n);
  Eigen::VectorXd sol(static_cast<Eigen::Index>(n));
  for (int k = N - 1; k >= 0; --k) {
    const auto& ak = a1[static_cast<std::size_t>(k)];
    const auto& bk = b1[static_cast<std::size_t>(k)];
    const double wk = w[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < p.tree().nodes(k); ++i) {
      auto up = out.z.at(k + 1, 2 * i);      // child with dB = +sqrt(dt)
      auto dn = out.z.at(k + 1, 2 * i + 1);  // child with dB = -sqrt(dt)
      auto zk = out.z.at(k, i);
      auto Zk = out.Z.at(k, i);
      if (mode == BackwardMode::AdjointExact) {
        // z_k = 1/2 sum_s D_s R z_{k+1,s} - dt g_k, D_s = 1 - a1 dt - s b1 sqrt(dt).
        p.step().solve(up, rz_up);
        p.step().solve(dn, rz_dn);
        for (std::size_t x = 0; x < n; ++x) {
          double dp = 1.0 - ak[x] * dt - bk[x] * sq;
          double dm = 1.0 - ak[x] * dt + bk[x] * sq;
          zk[x] = 0.5 * (dp * rz_up[x] + dm * rz_dn[x]);
          Zk[x] = 0.5 * (rz_up[x] - rz_dn[x]) * sq / dt;
        }
      } else {
        for (std::size_t x = 0; x < n; ++x) {
          Zk[x] = 0.5 * (up[x] - dn[x]) * sq / dt;
          rhs[x] = 0.5 * (up[x] + dn[x]) - dt * bk[x] * Zk[x];
        }
      }
      if (h) {
        auto hk = h->at(k, i);
        for (std::size_t x = 0; x < n; ++x) (mode == BackwardMode::AdjointExact ? zk[x] : rhs[x]) -= dt * hk[x];
      }
      if (f && wk > 0.0) {
        auto fk = f->at(k, i);
        for (std::size_t x = 0; x < n; ++x) {
          if (mask[x]) (mode == BackwardMode::AdjointExact ? zk[x] : rhs[x]) -= dt * wk * fk[x];
        }
      }
      if (mode == BackwardMode::Independent) {
        auto& solver = implicit[implicit.size() == 1 ? 0 : static_cast<std::size_t>(k)];
        sol = solver->solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(n)));
        for (std::size_t x = 0; x < n; ++x) zk[x] = sol[static_cast<Eigen::Index>(x)];
      }
    }
  }
  return out;
}

TrajectoryEnsemble dual_forward(const ControlProblem& p, std::span<const double> yhat0) {
  if (yhat0.size() != p.size()) throw ShapeError("dual forward: initial datum size mismatch");
  ForwardCoefficients c{p.a1().scaled(-1.0), p.b1().scaled(-1.0)};
  return solve_forward(yhat0, c, NoiseSource(p.tree()), p.grid());
}

DualityReport duality_check(const ControlProblem& p, const TrajectoryEnsemble& yhat, const BackwardPair& zz,
                            const TreeField* h, const TreeField* f) {
  const int N = p.mesh().steps;
  const double dt = p.mesh().dt();
  const auto& g = p.grid();
  const auto& mask = p.mask();
  DualityReport r;
  double term_T = yhat.expectation(N, [&](std::span<const double> y, std::size_t j) { return g.inner(y, zz.z.at(N, j)); });
  double term_0 = g.inner(yhat.at(0, 0), zz.z.at(0, 0));
  r.lhs = term_T - term_0;
  double abs_sum = std::abs(term_T) + std::abs(term_0);
  Field masked(p.size());
  for (int k = 0; k < N; ++k) {
    const double wk = p.weights()[static_cast<std::size_t>(k)];
    double acc = 0.0;
    if (h) acc += yhat.expectation(k, [&](std::span<const double> y, std::size_t j) { return g.inner(y, h->at(k, j)); });
    if (f && wk > 0.0) {
      acc += wk * yhat.expectation(k, [&](std::span<const double> y, std::size_t j) {
        auto fk = f->at(k, j);
        for (std::size_t x = 0; x < masked.size(); ++x) masked[x] = mask[x] ? fk[x] : 0.0;
        return g.inner(y, masked);
      });
    }
    r.rhs += dt * acc;
    abs_sum += dt * std::abs(acc);
  }
  r.residual = std::abs(r.lhs - r.rhs);
  r.scale = abs_sum;
  r.normalized = abs_sum > 0.0 ? r.residual / abs_sum : 0.0;
  return r;
}

TreeField control_from_dual(const ControlProblem& p, std::span<const double> yhat0) {
  const int N = p.mesh().steps;
  TrajectoryEnsemble y = dual_forward(p, yhat0);
  TreeField f(N, p.size());
  for (int k = 0; k < N; ++k) {
    if (p.weights()[static_cast<std::size_t>(k)] <= 0.0) continue;
    for (std::size_t i = 0; i < p.tree().nodes(k); ++i) {
      auto src = y.at(k, i);
      auto dst = f.at(k, i);
      for (std::size_t x = 0; x < src.size(); ++x) dst[x] = p.mask()[x] ? src[x] : 0.0;
    }
  }
  return f;
}

Field gramian_apply(const ControlProblem& p, std::span<const double> yhat0) {
  TreeField f = control_from_dual(p, yhat0);
  TreeField zero(p.mesh().steps, p.size());
  BackwardPair zz = solve_backward_tree(p, zero, nullptr, &f);
  auto z0 = zz.z.at(0, 0);
  Field out(z0.size());
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = -z0[x];
  return out;
}

KrylovResult conjugate_residual(const std::function<Field(const Field&)>& apply, const Field& rhs, double rel_tol,
                                int max_iter) {
  const std::size_t n = rhs.size();
  KrylovResult res;
  res.x.assign(n, 0.0);
  Field r = rhs;
  double bnorm = norm2(rhs);
  res.residuals.push_back(bnorm);
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  Field p = r;
  Field Ar = apply(r);
  Field Ap = Ar;
  double rAr = dot(r, Ar);
  for (int it = 0; it < max_iter; ++it) {
    double ApAp = dot(Ap, Ap);
    if (!(ApAp > 0.0) || !std::isfinite(ApAp)) break;
    double alpha = rAr / ApAp;
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    res.iterations = it + 1;
    double rn = norm2(r);
    if (rn > res.residuals.back() * (1.0 + 1e-12)) res.monotone = false;
    res.residuals.push_back(rn);
    if (rn <= rel_tol * bnorm) {
      res.converged = true;
      break;
    }
    Ar = apply(r);
    double rAr_new = dot(r, Ar);
    if (rAr == 0.0) break;
    double beta = rAr_new / rAr;
    rAr = rAr_new;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = r[i] + beta * p[i];
      Ap[i] = Ar[i] + beta * Ap[i];
    }
  }
  return res;
}

SpectrumReport gramian_spectrum(const ControlProblem& p, Eigen::MatrixXd* assembled) {
  const std::size_t n = p.size();
  Eigen::MatrixXd L(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Field e(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    e[c] = 1.0;
    Field col = gramian_apply(p, e);
    e[c] = 0.0;
    for (std::size_t r = 0; r < n; ++r) L(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
  }
  SpectrumReport s;
  double scale = L.norm();
  s.symmetry_error = scale > 0.0 ? (L - L.transpose()).norm() / scale : 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (L + L.transpose()), Eigen::EigenvaluesOnly);
  s.min_eig = es.eigenvalues().minCoeff();
  s.max_eig = es.eigenvalues().maxCoeff();
  s.condition = s.min_eig > 0.0 ? s.max_eig / s.min_eig : std::numeric_limits<double>::infinity();
  if (assembled) *assembled = std::move(L);
  return s;
}

double tree_level_norm(const ControlProblem& p, const TreeField& v, int level) {
  std::vector<double> vals(p.tree().nodes(level));
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = p.grid().norm_sq(v.at(level, i));
  return std::sqrt(pairwise_sum(vals) / static_cast<double>(vals.size()));
}

namespace {

Field free_initial(const ControlProblem& p, const TreeField& zT, const TreeField* h) {
  BackwardPair zz = solve_backward_tree(p, zT, h, nullptr);
  auto z0 = zz.z.at(0, 0);
  return Field(z0.begin(), z0.end());
}

Field verified_initial(const ControlProblem& p, const TreeField& zT, const TreeField* h, const TreeField& f) {
  BackwardPair zz = solve_backward_tree(p, zT, h, &f);
  auto z0 = zz.z.at(0, 0);
  return Field(z0.begin(), z0.end());
}

}  // namespace

NullControlReport synthesize_null_control(const ControlProblem& p, const TreeField& zT, double threshold,
                                          int max_iter, double eps_reg, bool spectrum) {
  NullControlReport rep;
  rep.eps_reg = eps_reg;
  rep.zT_norm = tree_level_norm(p, zT, p.mesh().steps);
  Field rhs = free_initial(p, zT, nullptr);
  rep.free_z0_norm = std::sqrt(p.grid().norm_sq(rhs));
  auto apply = [&](const Field& v) {
    Field out = gramian_apply(p, v);
    if (eps_reg > 0.0) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += eps_reg * v[i];
    }
    return out;
  };
  // Euclidean residual target equivalent to 0.1 * threshold * ||z_T|| in the grid norm.
  const double target = 0.1 * threshold * rep.zT_norm / std::sqrt(p.grid().cell_volume());
  const double rhs_norm = norm2(rhs);
  const double rel_tol = rhs_norm > 0.0 ? target / rhs_norm : 1.0;
  rep.krylov = conjugate_residual(apply, rhs, rel_tol, max_iter);
  rep.converged = rep.krylov.converged;
  rep.yhat0 = rep.krylov.x;
  rep.control = control_from_dual(p, rep.yhat0);
  Field z0 = verified_initial(p, zT, nullptr, rep.control);
  rep.z0_norm = std::sqrt(p.grid().norm_sq(z0));
  if (spectrum) rep.spectrum = gramian_spectrum(p);
  return rep;
}

ApproxControlReport synthesize_approx_control(const ControlProblem& p, const TreeField& zT, const TreeField* h,
                                              std::span<const double> z0_target, double accuracy) {
  const std::size_t n = p.size();
  if (z0_target.size() != n) throw ShapeError("approximate control: target size mismatch");
  ApproxControlReport rep;
  rep.target = accuracy;
  Field rhs = free_initial(p, zT, h);
  for (std::size_t i = 0; i < n; ++i) rhs[i] -= z0_target[i];

  Eigen::MatrixXd L;
  gramian_spectrum(p, &L);
  L = 0.5 * (L + L.transpose());
  // Lambda is small and dense here: one eigendecomposition serves every eps_reg.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  const Eigen::VectorXd lam = es.eigenvalues();
  const Eigen::VectorXd proj =
      es.eigenvectors().transpose() * Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(n));
  const double scale = std::max(lam.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  auto solve_for = [&](double eps, Field& y0, TreeField& f) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = proj[i] / (std::max(lam[i], 0.0) + eps);
    const Eigen::VectorXd x = es.eigenvectors() * c;
    y0.assign(x.data(), x.data() + x.size());
    f = control_from_dual(p, y0);
    Field z0 = verified_initial(p, zT, h, f);
    Field diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = z0[i] - z0_target[i];
    return std::sqrt(p.grid().norm_sq(diff));
  };

  Field y0;
  TreeField f;
  double pass_eps = -1.0, fail_eps = -1.0;
  // Decades below the Gramian scale, down to its rounding floor (16 digits).
  for (int d = 0; d <= 16; ++d) {
    double eps = scale * std::pow(10.0, -d);
    double res = solve_for(eps, y0, f);
    if (!rep.curve.empty() && res > rep.curve.back().residual * (1.0 + 1e-8) + 1e-14) rep.monotone = false;
    rep.curve.push_back({eps, res});
    if (res <= accuracy) {
      pass_eps = eps;
      break;
    }
    fail_eps = eps;
  }
  if (pass_eps < 0.0) {
    rep.chosen_eps = rep.curve.back().eps_reg;
    rep.residual = rep.curve.back().residual;
    rep.yhat0 = y0;
    rep.control = std::move(f);
    return rep;
  }
  double best_eps = pass_eps;
  if (fail_eps > 0.0) {
    double lo = std::log10(pass_eps), hi = std::log10(fail_eps);
    for (int it = 0; it < 12; ++it) {
      double mid = 0.5 * (lo + hi);
      double eps = std::pow(10.0, mid);
      double res = solve_for(eps, y0, f);
      rep.bisection.push_back({eps, res});
      if (res <= accuracy) {
        lo = mid;
        best_eps = eps;
      } else {
        hi = mid;
      }
    }
  }
  rep.chosen_eps = best_eps;
  rep.residual = solve_for(best_eps, y0, f);
  rep.yhat0 = y0;
  rep.control = std::move(f);
  rep.achieved = rep.residual <= accuracy;
  return rep;
}

SupportReport duality_support_check(const ControlProblem& p, std::span<const double> eta) {
  SupportReport s;
  TrajectoryEnsemble y = dual_forward(p, eta);
  const double dt = p.mesh().dt();
  for (int k = 0; k < p.mesh().steps; ++k) {
    double wk = p.weights()[static_cast<std::size_t>(k)];
    if (wk <= 0.0) continue;
    s.observation_mass += dt * wk * y.expectation(k, [&](std::span<const double> v, std::size_t) {
      Field sq(v.size());
      for (std::size_t x = 0; x < v.size(); ++x) sq[x] = p.mask()[x] ? v[x] * v[x] : 0.0;
      return p.grid().integrate(sq);
    });
  }
  s.eta_norm_sq = p.grid().norm_sq(eta);
  s.ratio = s.eta_norm_sq > 0.0 ? s.observation_mass / s.eta_norm_sq : 0.0;
  return s;
}

}  // namespace shelab
