#include "shelab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace shelab {

ConfigParseError::ConfigParseError(int line, std::string key, const std::string& what)
    : ConfigError(line > 0 ? "config line " + std::to_string(line) + (key.empty() ? "" : " key '" + key + "'") + ": " + what
                           : (key.empty() ? "config: " : "config key '" + key + "': ") + what),
      line_(line),
      key_(std::move(key)),
      detail_(what) {}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& s) {
  if (s.empty()) throw ConfigError("expected a number");
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (*end != '\0' || errno == ERANGE || !std::isfinite(v)) throw ConfigError("'" + s + "' is not a finite number");
  return v;
}

long long to_int(const std::string& s) {
  if (s.empty()) throw ConfigError("expected an integer");
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (*end != '\0' || errno == ERANGE) throw ConfigError("'" + s + "' is not an integer");
  return v;
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(to_double(p));
  return out;
}

std::string list_str(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

Intervals to_intervals(const std::string& s) {
  Intervals out;
  for (const auto& p : split(s, ',')) {
    auto ends = split(p, ':');
    if (ends.size() != 2) throw ConfigError("intervals are written lo:hi, comma separated");
    out.emplace_back(to_double(ends[0]), to_double(ends[1]));
  }
  return out;
}

std::string intervals_str(const Intervals& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i].first) + ":" + fmt(v[i].second);
  return s;
}

Point to_point(const std::string& s) {
  auto v = to_list(s);
  if (v.empty() || v.size() > 2) throw ConfigError("a point has one or two coordinates");
  return {v[0], v.size() > 1 ? v[1] : 0.0};
}

struct Binding {
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

template <class T>
Binding num(const char* key, T& field) {
  return {key,
          [&field](const std::string& v) {
            if constexpr (std::is_floating_point_v<T>) {
              field = to_double(v);
            } else {
              field = static_cast<T>(to_int(v));
            }
          },
          [&field] {
            if constexpr (std::is_floating_point_v<T>) {
              return fmt(field);
            } else {
              return std::to_string(field);
            }
          }};
}

Binding str(const char* key, std::string& field, std::initializer_list<const char*> options) {
  std::vector<std::string> opts(options.begin(), options.end());
  return {key,
          [&field, opts](const std::string& v) {
            if (!opts.empty() && std::find(opts.begin(), opts.end(), v) == opts.end()) {
              std::string all;
              for (const auto& o : opts) all += (all.empty() ? "" : " | ") + o;
              throw ConfigError("'" + v + "' is not one of " + all);
            }
            field = v;
          },
          [&field] { return field; }};
}

std::vector<Binding> bindings(ExperimentConfig& c) {
  std::vector<Binding> b;
  b.push_back({"run.seed", [&c](const std::string& v) {
                 if (v.empty() || v[0] == '-') throw ConfigError("seed must be a non-negative integer");
                 errno = 0;
                 char* end = nullptr;
                 c.seed = std::strtoull(v.c_str(), &end, 10);
                 if (*end != '\0' || errno == ERANGE) throw ConfigError("'" + v + "' is not a valid seed");
               },
               [&c] { return std::to_string(c.seed); }});
  b.push_back(str("run.mode", c.mode, {"tree", "mc"}));
  b.push_back(num("run.paths", c.paths));
  b.push_back(num("run.tol_scale", c.tol_scale));
  b.push_back(num("run.depth_cap", c.depth_cap));

  b.push_back({"grid.x", [&c](const std::string& v) {
                 auto e = to_list(v);
                 if (e.size() != 2) throw ConfigError("grid.x is lo, hi");
                 c.extents[0] = {e[0], e[1]};
               },
               [&c] { return fmt(c.extents[0].lo) + ", " + fmt(c.extents[0].hi); }});
  b.push_back({"grid.y", [&c](const std::string& v) {
                 if (v.empty() || v == "none") {
                   c.extents.resize(1);
                   return;
                 }
                 auto e = to_list(v);
                 if (e.size() != 2) throw ConfigError("grid.y is lo, hi or none");
                 c.extents.resize(2);
                 c.extents[1] = {e[0], e[1]};
               },
               [&c] { return c.extents.size() > 1 ? fmt(c.extents[1].lo) + ", " + fmt(c.extents[1].hi) : std::string("none"); }});
  b.push_back({"grid.nodes", [&c](const std::string& v) {
                 c.counts.clear();
                 for (const auto& p : split(v, ',')) c.counts.push_back(static_cast<int>(to_int(p)));
                 if (c.counts.size() > 2) throw ConfigError("grid.nodes has one or two counts");
               },
               [&c] {
                 std::string s;
                 for (std::size_t i = 0; i < c.counts.size(); ++i) s += (i ? ", " : "") + std::to_string(c.counts[i]);
                 return s;
               }});

  b.push_back(num("time.horizon", c.horizon));
  b.push_back(num("time.steps", c.steps));

  b.push_back({"geometry.x0", [&c](const std::string& v) { c.x0 = to_point(v); },
               [&c] { return fmt(c.x0[0]) + ", " + fmt(c.x0[1]); }});
  b.push_back({"geometry.radii", [&c](const std::string& v) { c.radii = to_list(v); },
               [&c] { return list_str(c.radii); }});
  b.push_back({"geometry.g0_center", [&c](const std::string& v) { c.g0.center = to_point(v); },
               [&c] { return fmt(c.g0.center[0]) + ", " + fmt(c.g0.center[1]); }});
  b.push_back(num("geometry.g0_radius", c.g0.radius));

  b.push_back(num("coefficients.a_bound", c.a_bound));
  b.push_back(num("coefficients.b_bound", c.b_bound));
  b.push_back(str("initial.preset", c.initial, {"random_bumps", "sine", "bump", "csv"}));
  b.push_back(str("initial.csv", c.initial_csv, {}));
  b.push_back(num("initial.bumps", c.bumps));

  b.push_back(num("frequency.lambda", c.frequency_lambda));
  b.push_back(num("frequency.identity_horizon", c.identity_horizon));
  b.push_back(num("frequency.identity_steps", c.identity_steps));
  b.push_back({"frequency.identity_cutoff", [&c](const std::string& v) {
                 auto r = to_list(v);
                 if (r.size() != 2) throw ConfigError("frequency.identity_cutoff is inner, outer");
                 c.identity_cutoff = {r[0], r[1]};
               },
               [&c] { return fmt(c.identity_cutoff[0]) + ", " + fmt(c.identity_cutoff[1]); }});

  b.push_back(num("sweep.configs", c.sweep_configs));

  b.push_back(str("constants.energy_variant", c.energy_variant, {"derivation", "printed", "larger"}));
  b.push_back(str("constants.theta_variant", c.theta_variant, {"substituted", "literal"}));
  b.push_back(num("observe.z", c.density_z));
  b.push_back(num("observe.depth", c.observe_depth));
  b.push_back({"observe.E", [&c](const std::string& v) { c.E = to_intervals(v); }, [&c] { return intervals_str(c.E); }});

  b.push_back(num("semilinear.exponent", c.semilinear_exponent));
  b.push_back(num("semilinear.blowup_cap", c.blowup_cap));

  b.push_back(num("oracle.nodes", c.oracle_nodes));
  b.push_back(num("oracle.horizon", c.oracle_horizon));
  b.push_back(num("oracle.steps", c.oracle_steps));

  b.push_back(num("transform.b", c.transform_b));
  b.push_back(num("transform.a", c.transform_a));
  b.push_back(num("transform.paths", c.transform_paths));
  b.push_back(num("transform.steps", c.transform_steps));

  b.push_back(num("control.nodes", c.control_nodes));
  b.push_back(num("control.steps", c.control_steps));
  b.push_back({"control.g0_center", [&c](const std::string& v) { c.control_g0.center = to_point(v); },
               [&c] { return fmt(c.control_g0.center[0]) + ", " + fmt(c.control_g0.center[1]); }});
  b.push_back(num("control.g0_radius", c.control_g0.radius));
  b.push_back({"control.E1", [&c](const std::string& v) { c.E1 = to_intervals(v); }, [&c] { return intervals_str(c.E1); }});
  b.push_back({"control.desk_E1", [&c](const std::string& v) { c.desk_E1 = to_intervals(v); },
               [&c] { return intervals_str(c.desk_E1); }});
  b.push_back(num("control.a1_bound", c.a1_bound));
  b.push_back(num("control.b1_bound", c.b1_bound));
  b.push_back(num("control.null_threshold", c.null_threshold));
  b.push_back(num("control.cg_max_iter", c.cg_max_iter));
  b.push_back(num("control.trials", c.control_trials));
  b.push_back(num("control.approx_accuracy", c.approx_accuracy));
  b.push_back(num("control.duality_nodes", c.duality_nodes));
  return b;
}

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigParseError(0, key, what);
}

void check_intervals(const Intervals& iv, double T, const char* key) {
  require(!iv.empty(), key, "at least one interval is required");
  for (const auto& [lo, hi] : iv) {
    require(lo < hi, key, "each interval needs lo < hi");
    require(lo >= 0.0 && hi <= T, key, "intervals must lie in [0, T]");
  }
}

}  // namespace

void validate(const ExperimentConfig& c) {
  require(c.paths >= 1, "run.paths", "must be >= 1");
  require(c.tol_scale > 0.0, "run.tol_scale", "must be positive");
  require(c.depth_cap >= 1 && c.depth_cap <= 24, "run.depth_cap", "must be in [1, 24]");
  require(c.counts.size() == c.extents.size(), "grid.nodes", "one count per grid axis");
  for (std::size_t a = 0; a < c.extents.size(); ++a) {
    require(c.extents[a].hi > c.extents[a].lo, a == 0 ? "grid.x" : "grid.y", "extent must be positive");
    require(c.counts[a] >= 3, "grid.nodes", "at least 3 interior nodes per axis");
  }
  require(c.horizon > 0.0, "time.horizon", "must be positive");
  require(c.steps >= 1 && c.steps <= c.depth_cap, "time.steps", "must be in [1, run.depth_cap]");
  require(c.radii.size() == 4, "geometry.radii", "four radii r1 < r2 < r3 < r4 are required");
  for (std::size_t i = 0; i < 4; ++i) {
    require(c.radii[i] > 0.0, "geometry.radii", "radii must be positive");
    if (i > 0) require(c.radii[i - 1] < c.radii[i], "geometry.radii", "radii must satisfy r1 < r2 < r3 < r4");
  }
  require(c.g0.radius > 0.0, "geometry.g0_radius", "must be positive");
  require(c.a_bound >= 0.0, "coefficients.a_bound", "must be non-negative");
  require(c.b_bound >= 0.0, "coefficients.b_bound", "must be non-negative");
  require(c.initial != "csv" || !c.initial_csv.empty(), "initial.csv", "required when initial.preset = csv");
  require(c.bumps >= 1, "initial.bumps", "must be >= 1");
  require(c.frequency_lambda > 0.0 && c.frequency_lambda <= 1.0, "frequency.lambda", "must be in (0, 1]");
  require(c.identity_horizon > 0.0, "frequency.identity_horizon", "must be positive");
  require(c.identity_steps >= 2 && c.identity_steps <= c.depth_cap, "frequency.identity_steps",
          "must be in [2, run.depth_cap]");
  require(c.identity_cutoff[0] > 0.0 && c.identity_cutoff[0] < c.identity_cutoff[1], "frequency.identity_cutoff",
          "needs 0 < inner < outer");
  require(c.sweep_configs >= 1, "sweep.configs", "must be >= 1");
  require(c.density_z > 1.0, "observe.z", "must exceed 1");
  require(c.observe_depth >= 1 && c.observe_depth <= 64, "observe.depth", "must be in [1, 64]");
  check_intervals(c.E, c.horizon, "observe.E");
  require(c.semilinear_exponent >= 1, "semilinear.exponent", "must be >= 1");
  require(c.blowup_cap > 0.0, "semilinear.blowup_cap", "must be positive");
  require(c.oracle_nodes >= 3, "oracle.nodes", "must be >= 3");
  require(c.oracle_horizon > 0.0, "oracle.horizon", "must be positive");
  require(c.oracle_steps >= 1, "oracle.steps", "must be >= 1");
  require(c.transform_paths >= 1, "transform.paths", "must be >= 1");
  require(c.transform_steps >= 4 && c.transform_steps % 4 == 0, "transform.steps", "must be a positive multiple of 4");
  require(c.control_nodes >= 3, "control.nodes", "must be >= 3");
  require(c.control_steps >= 1 && c.control_steps <= c.depth_cap, "control.steps", "must be in [1, run.depth_cap]");
  require(c.control_g0.radius > 0.0, "control.g0_radius", "must be positive");
  check_intervals(c.E1, c.horizon, "control.E1");
  check_intervals(c.desk_E1, c.horizon, "control.desk_E1");
  require(c.null_threshold > 0.0, "control.null_threshold", "must be positive");
  require(c.cg_max_iter >= 1, "control.cg_max_iter", "must be >= 1");
  require(c.control_trials >= 1, "control.trials", "must be >= 1");
  require(c.approx_accuracy > 0.0, "control.approx_accuracy", "must be positive");
  require(c.duality_nodes >= 3, "control.duality_nodes", "must be >= 3");

  // Geometry against the grid: every ball closure inside G.
  SpatialGrid grid = build_grid(c.extents, c.counts);
  require(grid.contains(c.x0), "geometry.x0", "must lie inside G");
  require(grid.ball_closure_inside(Ball{c.x0, c.radii[3]}), "geometry.radii", "closure of B_r4(x0) must lie inside G");
  require(grid.ball_closure_inside(Ball{c.x0, c.identity_cutoff[1]}), "frequency.identity_cutoff",
          "closure of the outer ball must lie inside G");
  require(grid.ball_closure_inside(c.g0), "geometry.g0_radius", "closure of G0 must lie inside G");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  auto binds = bindings(cfg);
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigParseError(line, "", "expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigParseError(line, "", "empty key");
    auto it = std::find_if(binds.begin(), binds.end(), [&](const Binding& b) { return b.key == key; });
    if (it == binds.end()) throw ConfigParseError(line, key, "unknown key");
    if (!seen.emplace(key, line).second) throw ConfigParseError(line, key, "duplicate key");
    try {
      it->set(value);
    } catch (const ConfigParseError&) {
      throw;
    } catch (const LabError& e) {
      throw ConfigParseError(line, key, e.what());
    }
  }
  try {
    validate(cfg);
  } catch (const ConfigParseError& e) {
    // Point cross-key failures at the line that set the key, when the file set it.
    auto it = seen.find(e.key());
    if (e.line() == 0 && it != seen.end()) throw ConfigParseError(it->second, e.key(), e.detail());
    throw;
  } catch (const LabError& e) {
    throw ConfigParseError(0, "", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigParseError(0, "", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_form(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  auto binds = bindings(copy);
  std::sort(binds.begin(), binds.end(), [](const Binding& a, const Binding& b) { return a.key < b.key; });
  std::string out;
  for (const auto& b : binds) out += b.key + "=" + b.get() + "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_form(cfg))));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

}  // namespace shelab
