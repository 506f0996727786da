// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include <cstdio>
#include <exception>
#include <iostream>

#include "shelab/acceptance.hpp"
#include "shelab/config.hpp"
#include "shelab/experiments.hpp"

int main(int argc, char** argv) {
  try {
    const shelab::ExperimentConfig cfg = argc > 1 ? shelab::load_config(argv[1]) : shelab::ExperimentConfig{};
    shelab::RunReport first;
    first.experiment = "verify";
    first.config_hash = shelab::config_hash(cfg);
    first.seed = cfg.seed;
    first.mode = cfg.mode;
    shelab::AcceptanceResult acc = shelab::run_acceptance(cfg, first);

    // Criterion 13 compares two complete verify runs.
    const std::string a = shelab::serialize(shelab::run_experiment("verify", cfg));
    const std::string b = shelab::serialize(shelab::run_experiment("verify", cfg));
    acc.criteria.push_back(shelab::determinism_check(a, b));

    int passed = 0;
    for (const auto& c : acc.criteria) {
      std::cout << shelab::format_criterion(c) << "\n";
      passed += c.pass;
    }
    std::cout << "acceptance: " << passed << "/" << acc.criteria.size() << " criteria pass\n";
    if (!first.all_pass()) {
      const auto* f = first.first_failure();
      std::cout << "first failing record: " << f->name << " lhs=" << shelab::format_number(f->lhs)
                << " rhs=" << shelab::format_number(f->rhs) << " (" << f->note << ")\n";
    }
    return acc.all_pass() && first.all_pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
