#include "catch_amalgamated.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "shelab/config.hpp"
#include "shelab/errors.hpp"
#include "shelab/report.hpp"

using namespace shelab;
using Catch::Approx;

TEST_CASE("defaults and overrides", "[config]") {
  const ExperimentConfig d = parse_config("");
  CHECK(d.steps == 10);
  CHECK(d.counts.front() == 63);
  const ExperimentConfig c = parse_config(
      "# comment\n"
      "run.seed = 7\n"
      "time.steps = 8   # trailing\n"
      "observe.E = 0.05:0.1, 0.2:0.3\n"
      "geometry.radii = 0.05, 0.1, 0.15, 0.2\n");
  CHECK(c.seed == 7);
  CHECK(c.steps == 8);
  REQUIRE(c.E.size() == 2);
  CHECK(c.E[1].second == Approx(0.3));
  CHECK(c.radii[3] == Approx(0.2));
}

TEST_CASE("parse errors carry line and key", "[config]") {
  auto line_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigParseError& e) {
      return std::make_pair(e.line(), e.key());
    }
    return std::make_pair(-1, std::string());
  };
  CHECK(line_of("run.seed = 1\nbogus.key = 3\n") == std::make_pair(2, std::string("bogus.key")));
  CHECK(line_of("time.steps = 4\ntime.steps = 5\n") == std::make_pair(2, std::string("time.steps")));
  CHECK(line_of("\n\ntime.steps = four\n") == std::make_pair(3, std::string("time.steps")));
  CHECK(line_of("no equals sign\n").first == 1);
  // Cross-key failure reported at the line that set the key.
  CHECK(line_of("run.seed = 1\ngeometry.radii = 0.2, 0.1, 0.3, 0.4\n") ==
        std::make_pair(2, std::string("geometry.radii")));
  CHECK(line_of("time.steps = 40\n").second == "time.steps");
  CHECK_THROWS_AS(parse_config("run.mode = quantum\n"), ConfigParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/shelab.cfg"), ConfigError);
}

TEST_CASE("canonical form and hash", "[config]") {
  const ExperimentConfig a = parse_config("run.seed = 5\ntime.steps = 6\n");
  const ExperimentConfig b = parse_config("time.steps = 6\n\nrun.seed = 5 # same\n");
  CHECK(canonical_form(a) == canonical_form(b));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) != config_hash(parse_config("run.seed = 6\ntime.steps = 6\n")));
  // The canonical form parses back to the same configuration.
  CHECK(config_hash(parse_config(canonical_form(a))) == config_hash(a));
  // FNV-1a 64 reference values.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("derived seeds", "[config]") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("report JSON and CSV", "[report]") {
  RunReport r;
  r.experiment = "unit";
  r.config_hash = "0123456789abcdef";
  r.seed = 9;
  r.mode = "tree";
  r.add({"a", 1.0, 2.0, 1.0, true, true, "fine"});
  r.add({"b", 3.0, 2.0, -1.0, false, false, "informational"});
  CHECK(r.all_pass());
  CHECK(r.first_failure() == nullptr);
  r.add({"c", 3.0, 2.0, -1.0, false, true, ""});
  CHECK_FALSE(r.all_pass());
  REQUIRE(r.first_failure() != nullptr);
  CHECK(r.first_failure()->name == "c");

  Table t{"tbl", {"x", "y"}, {}};
  t.add({0.1, std::numeric_limits<double>::infinity()});
  t.add({std::nan(""), -2.0});
  r.tables.push_back(t);
  CHECK(to_csv(t) == "x,y\n0.10000000000000001,inf\nnan,-2\n");

  const auto j = to_json(r);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["tool_version"] == kToolVersion);
  CHECK(j["pass"] == false);
  CHECK(j["checks"].size() == 3);
  CHECK(j["tables"][0] == "tbl");
  CHECK(serialize(r) == serialize(r));
  CHECK(serialize(r).find("elapsed") == std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "shelab_report_test";
  std::filesystem::remove_all(dir);
  r.blobs.emplace_back("raw.bin", std::string("\x01\x02", 2));
  const auto written = emit(r, dir.string(), "both");
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "tbl.csv"));
  CHECK(std::filesystem::exists(dir / "timing.json"));
  CHECK(std::filesystem::file_size(dir / "raw.bin") == 2);
  CHECK_THROWS_AS(emit(r, dir.string(), "xml"), ConfigError);
  std::filesystem::remove_all(dir);
}
