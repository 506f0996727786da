// shelab: command-line front end for the stochastic heat equation lab.
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "shelab/acceptance.hpp"
#include "shelab/config.hpp"
#include "shelab/errors.hpp"
#include "shelab/experiments.hpp"
#include "shelab/report.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::string format = "both";
  std::string mode;
  long long seed = -1;
  double tol_scale = 0.0;
  bool quiet = false;
  bool determinism = true;
};

shelab::ExperimentConfig resolve(const Options& o) {
  shelab::ExperimentConfig cfg = o.config.empty() ? shelab::ExperimentConfig{} : shelab::load_config(o.config);
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.mode.empty()) cfg.mode = o.mode;
  if (o.tol_scale > 0.0) cfg.tol_scale = o.tol_scale;
  shelab::validate(cfg);
  return cfg;
}

void print_record(const shelab::CheckRecord& r) {
  std::fprintf(stderr, "FAILED %s: lhs=%s rhs=%s margin=%s (%s)\n", r.name.c_str(), shelab::format_number(r.lhs).c_str(),
               shelab::format_number(r.rhs).c_str(), shelab::format_number(r.margin).c_str(), r.note.c_str());
}

int run(const std::string& name, const Options& o) {
  const shelab::ExperimentConfig cfg = resolve(o);
  shelab::RunReport rep = shelab::run_experiment(name, cfg);
  bool pass = rep.all_pass();
  if (name == "verify") {
    for (const auto& c : rep.data["acceptance"]) {
      shelab::CriterionResult cr{c["criterion"].get<int>(), c["title"].get<std::string>(), c["pass"].get<bool>(),
                                 c["detail"].get<std::string>()};
      pass = pass && cr.pass;
      if (!o.quiet) std::cout << shelab::format_criterion(cr) << "\n";
    }
    if (o.determinism) {
      const shelab::RunReport again = shelab::run_experiment(name, cfg);
      const auto c13 = shelab::determinism_check(shelab::serialize(rep), shelab::serialize(again));
      pass = pass && c13.pass;
      if (!o.quiet) std::cout << shelab::format_criterion(c13) << "\n";
    }
  }
  const auto written = shelab::emit(rep, o.out, o.format);
  if (!o.quiet) {
    std::size_t asserted = 0;
    for (const auto& c : rep.checks) asserted += c.asserted;
    std::printf("%s: %zu asserted checks, %s; config %s, seed %llu, %.1f s\n", name.c_str(), asserted,
                pass ? "all pass" : "FAILURES", rep.config_hash.c_str(), static_cast<unsigned long long>(rep.seed),
                rep.elapsed_seconds);
    for (const auto& p : written) std::printf("  wrote %s\n", p.c_str());
  }
  if (const auto* f = rep.first_failure()) {
    print_record(*f);
    return 1;
  }
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic heat equation: unique continuation, observability and control experiments"};
  app.require_subcommand(1);
  Options o;
  std::string selected;
  for (const char* name : {"simulate", "frequency", "ucp", "observe", "control", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", o.config, "config file (section.key = value)");
    sub->add_option("-s,--seed", o.seed, "override run.seed");
    sub->add_option("-m,--mode", o.mode, "noise: tree or mc")->check(CLI::IsMember({"tree", "mc"}));
    sub->add_option("-o,--out", o.out, "output directory");
    sub->add_option("-f,--format", o.format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
    sub->add_option("--tol-scale", o.tol_scale, "override run.tol_scale")->check(CLI::PositiveNumber);
    sub->add_flag("-q,--quiet", o.quiet, "no console summary");
    if (std::string(name) == "verify") {
      sub->add_flag("!--no-determinism", o.determinism, "skip the second run behind criterion 13");
    }
    sub->callback([&selected, name] { selected = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return run(selected, o);
  } catch (const shelab::ConfigParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const shelab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
