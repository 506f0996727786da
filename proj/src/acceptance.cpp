#include "shelab/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "shelab/experiments.hpp"

namespace shelab {

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

bool AcceptanceResult::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
}

AcceptanceResult run_acceptance(const ExperimentConfig& cfg, RunReport& rep) {
  AcceptanceResult out;
  auto add = [&](int id, std::string title, bool pass, std::string detail) {
    out.criteria.push_back({id, std::move(title), pass, std::move(detail)});
  };

  const OracleStudy c1 = deterministic_oracle(cfg, &rep);
  add(1, "deterministic oracle", c1.pass, fmt("rel error %.3e <= %.0e", c1.rel_error, c1.tolerance));

  const KernelStudy c2 = kernel_study(cfg, &rep);
  add(2, "kernel caloric identity", c2.pass, fmt("max residual %.3e over %g probes", c2.max_residual, c2.probes));

  const IdentityStudy c3 = identity_study(cfg, &rep);
  double worst_ratio = 0.0;
  for (double r : c3.ratios) worst_ratio = std::max(worst_ratio, std::abs(r - 0.5));
  add(3, "H' identity residual", c3.residual_pass && c3.halving_pass,
      fmt("worst residual %.3e <= 0.05, worst |ratio - 0.5| %.3f <= 0.15", c3.worst, worst_ratio));

  const SequenceStudy c7 = sequence_study(cfg, &rep);
  const auto sweep = run_sweep(cfg);
  record_sweep(sweep, cfg, rep, true, true, true);

  int freq_fail = 0, ucp_fail = 0, scale_fail = 0, qualified = 0, tb_fail = 0, obs_fail = 0;
  double worst_freq = std::numeric_limits<double>::infinity();
  double worst_log_gap = std::numeric_limits<double>::infinity();
  double max_C_emp = 0.0;
  for (const auto& s : sweep) {
    if (!s.frequency.pass || !s.boundary.pass) ++freq_fail;
    worst_freq = std::min(worst_freq, s.frequency.margin + s.frequency.tolerance);
    if (!s.ucp.pass) ++ucp_fail;
    if (!s.scale_invariant) ++scale_fail;
    if (s.selection.found) {
      ++qualified;
      if (!s.three_ball.pass) ++tb_fail;
    }
    const auto& t = s.telescoping;
    const bool ok = t.final_pass && t.emp_below_bound && std::isfinite(t.C_emp) && !t.hard_failure;
    if (!ok) ++obs_fail;
    if (std::isfinite(t.C_emp) && t.C_emp > 0.0) {
      worst_log_gap = std::min(worst_log_gap, t.log_C_paper - std::log(t.C_emp));
      max_C_emp = std::max(max_C_emp, t.C_emp);
    }
  }
  const double n = static_cast<double>(sweep.size());
  add(4, "frequency bound", freq_fail == 0,
      fmt("%g/%g configurations fail, min margin + tol %.3e", freq_fail, n, worst_freq));
  add(5, "quantitative UCP", ucp_fail == 0 && scale_fail == 0,
      fmt("%g/%g fail, %g scale-invariance changes", ucp_fail, n, scale_fail));
  const int need = static_cast<int>(std::ceil(0.75 * sweep.size()));
  add(6, "three-ball inequality", qualified >= need && tb_fail == 0,
      fmt("%g qualify (need %g), %g fail", qualified, need, tb_fail));
  add(7, "density sequence", c7.pass,
      fmt("%g gap failures, eps excess %.3e, matching error %.3e", c7.exact_failures, c7.eps.max_bound_excess,
          c7.eps.max_matching_error));
  add(8, "observability inequality", obs_fail == 0,
      fmt("%g/%g fail, min log(C_paper / C_emp) %.3e", obs_fail, n, worst_log_gap));

  const DualityStudy c9 = duality_study(cfg, &rep);
  add(9, "duality", c9.exact_pass && c9.slope_pass,
      fmt("adjoint-exact worst %.3e, independent slope %.3f", c9.worst_exact, c9.slope));

  const NullStudy c10 = null_control_study(cfg, &rep);
  add(10, "null control", c10.pass,
      fmt("worst ||z(0)||/||z_T|| %.3e, worst iterations %g", c10.worst_ratio, c10.worst_iterations));

  const ApproxStudy c11 = approx_control_study(cfg, &rep);
  add(11, "approximate control", c11.pass,
      fmt("worst residual / ||z0|| %.3e, monotone %g", c11.worst_relative, c11.monotone ? 1.0 : 0.0));

  const TransformStudy c12 = transform_study(cfg, &rep);
  add(12, "exponential transform", c12.pass, fmt("slope %.3f >= 0.4", c12.slope));

  auto& arr = rep.data["acceptance"] = nlohmann::ordered_json::array();
  for (const auto& c : out.criteria) arr.push_back({{"criterion", c.id}, {"title", c.title}, {"pass", c.pass}, {"detail", c.detail}});
  rep.data["C_emp_max"] = max_C_emp;
  return out;
}

CriterionResult determinism_check(const std::string& first, const std::string& second) {
  CriterionResult c{13, "determinism", first == second, ""};
  if (c.pass) {
    c.detail = fmt("identical reports, %g bytes", static_cast<double>(first.size()));
  } else {
    std::size_t i = 0;
    while (i < first.size() && i < second.size() && first[i] == second[i]) ++i;
    c.detail = fmt("reports differ at byte %g", static_cast<double>(i));
  }
  return c;
}

std::string format_criterion(const CriterionResult& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "criterion %2d %s  ", c.id, c.pass ? "PASS" : "FAIL");
  return buf + c.title + ": " + c.detail;
}

}  // namespace shelab
