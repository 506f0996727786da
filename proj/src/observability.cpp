#include "shelab/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shelab/errors.hpp"

namespace shelab {

MeasurableTimeSet::MeasurableTimeSet(std::vector<std::pair<double, double>> intervals, double horizon)
    : iv_(std::move(intervals)), T_(horizon) {
  if (iv_.empty()) throw ConfigError("time set: at least one interval is required");
  std::sort(iv_.begin(), iv_.end());
  for (std::size_t i = 0; i < iv_.size(); ++i) {
    const auto& [lo, hi] = iv_[i];
    if (!(lo < hi)) throw ConfigError("time set: interval with lo >= hi");
    if (lo < 0.0 || hi > horizon) throw ConfigError("time set: interval outside (0, T)");
    if (i > 0 && lo < iv_[i - 1].second) throw ConfigError("time set: intervals overlap");
  }
}

double MeasurableTimeSet::measure() const {
  double s = 0.0;
  for (const auto& [lo, hi] : iv_) s += hi - lo;
  return s;
}

double MeasurableTimeSet::measure_in(double lo, double hi) const {
  double s = 0.0;
  for (const auto& [a, b] : iv_) s += std::max(0.0, std::min(b, hi) - std::max(a, lo));
  return s;
}

namespace {

void fill_sequence(const MeasurableTimeSet& E, double t0, double t1, double z, int depth, DensitySequence& seq) {
  seq.t.assign(depth + 1, 0.0);
  seq.t[0] = t1;
  for (int m = 1; m <= depth; ++m) seq.t[m] = t0 + std::pow(z, -m) * (t1 - t0);
  seq.gaps.assign(depth, 0.0);
  seq.gap_lengths.assign(depth, 0.0);
  seq.best_violation = std::numeric_limits<double>::infinity();
  for (int m = 0; m < depth; ++m) {
    seq.gap_lengths[m] = seq.t[m] - seq.t[m + 1];
    seq.gaps[m] = E.measure_in(seq.t[m + 1], seq.t[m]);
    seq.best_violation = std::min(seq.best_violation, 3.0 * seq.gaps[m] - seq.gap_lengths[m]);
  }
}

}  // namespace

DensitySequence density_sequence(const MeasurableTimeSet& E, double z, int depth) {
  if (!(z > 1.0)) throw ConfigError("density_sequence: z must exceed 1");
  if (depth < 1) throw ConfigError("density_sequence: depth must be >= 1");
  if (E.intervals().empty()) throw ConfigError("density_sequence: empty time set");
  const auto& iv = E.intervals();
  std::size_t longest = 0;
  for (std::size_t i = 1; i < iv.size(); ++i) {
    if (iv[i].second - iv[i].first > iv[longest].second - iv[longest].first) longest = i;
  }
  DensitySequence seq;
  seq.z = z;
  seq.t0 = 0.5 * (iv[longest].first + iv[longest].second);
  const double T = E.horizon();
  const int grid = 1024;
  DensitySequence best;
  best.best_violation = -std::numeric_limits<double>::infinity();
  for (int i = grid - 1; i >= 1; --i) {
    const double t1 = seq.t0 + (T - seq.t0) * i / grid;
    DensitySequence cand = seq;
    cand.t1 = t1;
    fill_sequence(E, seq.t0, t1, z, depth, cand);
    if (cand.best_violation >= 0.0) {
      cand.found = true;
      return cand;
    }
    if (cand.best_violation > best.best_violation) best = cand;
  }
  best.found = false;
  return best;
}

double energy_constant(double a_sup, double b_sq, double t, EnergyVariant v) {
  const double derivation = (2.0 * a_sup + b_sq) * t;
  const double printed = (2.0 * a_sup * a_sup + b_sq) * t;
  switch (v) {
    case EnergyVariant::Derivation:
      return derivation;
    case EnergyVariant::Printed:
      return printed;
    case EnergyVariant::Larger:
      return std::max(derivation, printed);
  }
  return derivation;
}

ObservabilityConstants observability_constants(const UcpInputs& in, double z, const ObservabilityOptions& opt) {
  if (!(z > 1.0)) throw ConfigError("observability constants: z must exceed 1");
  if (opt.theta_grid < 1) throw ConfigError("observability constants: theta grid must be positive");
  ObservabilityConstants c;
  c.z = z;
  const double b2 = in.b_norm * in.b_norm;
  const double JT = ucp_J(in.T, in.m, in.a_sup, b2, in.n);
  c.Theta_literal = -std::numeric_limits<double>::infinity();
  c.Theta_substituted = -std::numeric_limits<double>::infinity();
  c.gamma = 0.0;
  for (int i = 1; i <= opt.theta_grid; ++i) {
    const double t = in.T * i / opt.theta_grid;
    const double growth = (t + 1.0) * std::exp(t * b2);
    const double Jt = ucp_J(t, in.m, in.a_sup, b2, in.n);
    c.Theta_substituted = std::max(c.Theta_substituted, t * Jt / (2.0 * growth));
    c.Theta_literal = std::max(c.Theta_literal, t * JT / (2.0 * growth));
    const double g = 8.0 * in.m * growth / (in.r * in.r * t + 8.0 * in.m * growth);
    c.gamma = std::max(c.gamma, g);
  }
  c.Theta = opt.theta == ThetaVariant::Substituted ? c.Theta_substituted : c.Theta_literal;
  c.C_abT = energy_constant(in.a_sup, b2, in.T, opt.energy);
  c.log_eps1 = -std::log(3.0 * z) - c.C_abT;
  c.eps1 = std::exp(c.log_eps1);
  return c;
}

InterpolationRecord interpolation_split(double t, double global_t, double local_t, double global_0,
                                        const ObservabilityConstants& c, double eps, double tol) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw DomainError("interpolation_split: eps must lie in (0, 1)");
  InterpolationRecord r;
  r.t = t;
  r.eps = eps;
  r.lhs = global_t;
  r.local_term = local_t > 0.0 ? std::exp(std::log(2.0) - c.gamma * std::log(eps) + c.Theta + std::log(local_t)) : 0.0;
  r.initial_term = eps * global_0;
  r.rhs = r.local_term + r.initial_term;
  r.pass = r.lhs <= r.rhs * (1.0 + tol);
  return r;
}

EpsilonSequence epsilon_sequence(const ObservabilityConstants& c, const std::vector<double>& gaps) {
  for (double g : gaps) {
    if (!(g > 0.0)) throw PreconditionError("epsilon_sequence: gap measures must be positive");
  }
  EpsilonSequence es;
  const std::size_t M = gaps.size();
  const double gam = c.gamma;
  es.log_eps.resize(M);
  es.log_alpha.resize(M);
  es.log_sigma.resize(M);
  es.log_eps[0] = c.log_eps1;
  for (std::size_t m = 0; m + 1 < M; ++m) {
    es.log_eps[m + 1] =
        ((gam + 1.0) * es.log_eps[m] + c.C_abT + std::log(gaps[m]) - std::log(gaps[m + 1])) / gam;
  }
  for (std::size_t m = 0; m < M; ++m) {
    es.log_alpha[m] = gam * es.log_eps[m] + std::log(gaps[m]);
    es.log_sigma[m] = (gam + 1.0) * es.log_eps[m] + std::log(gaps[m]);
    es.max_bound_excess = std::max(es.max_bound_excess, es.log_eps[m] - c.log_eps1);
  }
  for (std::size_t m = 0; m + 1 < M; ++m) {
    const double d = es.log_sigma[m] - (es.log_alpha[m + 1] - c.C_abT);
    es.max_matching_error = std::max(es.max_matching_error, std::abs(std::expm1(d)));
  }
  es.bound_holds = es.max_bound_excess <= 0.0;
  es.eps.resize(M);
  es.alpha.resize(M);
  es.sigma.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    es.eps[m] = std::exp(es.log_eps[m]);
    es.alpha[m] = std::exp(es.log_alpha[m]);
    es.sigma[m] = std::exp(es.log_sigma[m]);
  }
  return es;
}

namespace {

double interp(const std::vector<double>& t, const std::vector<double>& v, double s) {
  if (s <= t.front()) return v.front();
  if (s >= t.back()) return v.back();
  const auto it = std::upper_bound(t.begin(), t.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
  const double w = (s - t[k]) / (t[k + 1] - t[k]);
  return (1.0 - w) * v[k] + w * v[k + 1];
}

}  // namespace

double EnergyTraces::at_global(double s) const { return interp(t, global, s); }
double EnergyTraces::at_local(double s) const { return interp(t, local, s); }

double EnergyTraces::local_mass(const MeasurableTimeSet& E, double lo, double hi) const {
  double total = 0.0;
  for (const auto& [a, b] : E.intervals()) {
    const double s0 = std::max(a, lo);
    const double s1 = std::min(b, hi);
    if (!(s1 > s0)) continue;
    // Break at mesh nodes so the trapezoid rule is exact for the interpolant.
    double left = s0;
    for (double node : t) {
      if (node <= left) continue;
      if (node >= s1) break;
      total += 0.5 * (node - left) * (at_local(left) + at_local(node));
      left = node;
    }
    total += 0.5 * (s1 - left) * (at_local(left) + at_local(s1));
  }
  return total;
}

EnergyTraces energy_traces(const TrajectoryEnsemble& y, const Ball& br) {
  const SpatialGrid& grid = y.grid();
  const auto mask = grid.ball_mask(br);
  EnergyTraces tr;
  const int N = y.steps();
  for (int k = 0; k <= N; ++k) {
    tr.t.push_back(y.mesh().time(k));
    tr.global.push_back(y.expectation(k, [&](std::span<const double> v, std::size_t) { return grid.norm_sq(v); }));
    tr.local.push_back(y.expectation(k, [&](std::span<const double> v, std::size_t) {
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += mask[i] ? v[i] * v[i] : 0.0;
      return s * grid.cell_volume();
    }));
  }
  return tr;
}

TelescopingReport telescoping_check(const EnergyTraces& tr, const MeasurableTimeSet& E, const DensitySequence& seq,
                                    const ObservabilityConstants& c, const EpsilonSequence& es, double tol) {
  const std::size_t n = es.log_eps.size();
  if (seq.t.size() < n + 1) throw ShapeError("telescoping_check: sequence shorter than the epsilon table");
  TelescopingReport rep;
  const double eC = std::exp(-c.C_abT);
  const double two_eTheta_log = std::log(2.0) + c.Theta;
  for (std::size_t m = 0; m < n; ++m) {
    GapRecord g;
    g.m = static_cast<int>(m + 1);
    g.lhs = es.alpha[m] * eC * tr.at_global(seq.t[m]) - es.sigma[m] * tr.at_global(seq.t[m + 1]);
    const double mass = tr.local_mass(E, seq.t[m + 1], seq.t[m]);
    g.rhs = mass > 0.0 ? std::exp(two_eTheta_log + std::log(mass)) : 0.0;
    g.pass = g.lhs <= g.rhs * (1.0 + tol) || g.lhs <= 0.0;
    rep.gaps.push_back(g);
  }
  rep.summed_lhs = es.alpha[0] * eC * tr.at_global(seq.t[0]) - es.sigma[n - 1] * tr.at_global(seq.t[n]);
  rep.observation_mass = tr.local_mass(E, 0.0, E.horizon());
  rep.summed_rhs = rep.observation_mass > 0.0 ? std::exp(two_eTheta_log + std::log(rep.observation_mass)) : 0.0;
  rep.summed_pass = rep.summed_lhs <= rep.summed_rhs * (1.0 + tol) || rep.summed_lhs <= 0.0;

  rep.final_lhs = tr.global.back();
  rep.log_C_paper = std::log(2.0) - es.log_alpha[0] + 2.0 * c.C_abT + c.Theta;
  rep.C_paper = std::exp(rep.log_C_paper);
  if (rep.observation_mass > 0.0) {
    rep.C_emp = rep.final_lhs / rep.observation_mass;
    rep.final_pass = std::log(rep.final_lhs) <= rep.log_C_paper + std::log(rep.observation_mass) + std::log1p(tol) ||
                     rep.final_lhs == 0.0;
    rep.emp_below_bound = rep.final_lhs == 0.0 || std::log(rep.C_emp) <= rep.log_C_paper;
  } else {
    rep.C_emp = rep.final_lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    rep.hard_failure = rep.final_lhs > 0.0;
    rep.final_pass = !rep.hard_failure;
    rep.emp_below_bound = !rep.hard_failure;
  }
  return rep;
}

EnergyEstimateReport energy_estimate_check(const std::vector<double>& times, const std::vector<double>& energy,
                                           double a_sup, double b_sq, EnergyVariant v, double tol) {
  if (times.size() != energy.size() || times.empty()) throw ShapeError("energy_estimate_check: trace size mismatch");
  EnergyEstimateReport rep;
  rep.tolerance = tol;
  const double e0 = energy.front();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (e0 <= 0.0) {
      if (energy[k] > 0.0) rep.worst_ratio = std::numeric_limits<double>::infinity();
      continue;
    }
    const double bound = std::exp(energy_constant(a_sup, b_sq, times[k], v)) * e0;
    rep.worst_ratio = std::max(rep.worst_ratio, energy[k] / bound);
  }
  rep.pass = rep.worst_ratio <= 1.0 + tol;
  return rep;
}

}  // namespace shelab
