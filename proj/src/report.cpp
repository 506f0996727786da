#include "shelab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "shelab/errors.hpp"

namespace shelab {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add(const std::vector<double>& row) {
  std::vector<std::string> r;
  r.reserve(row.size());
  for (double v : row) r.push_back(format_number(v));
  add_text(std::move(r));
}

void Table::add_text(std::vector<std::string> row) {
  if (row.size() != header.size()) throw ShapeError("table '" + name + "': row width differs from the header");
  rows.push_back(std::move(row));
}

bool RunReport::all_pass() const { return first_failure() == nullptr; }

const CheckRecord* RunReport::first_failure() const {
  for (const auto& c : checks) {
    if (c.asserted && !c.pass) return &c;
  }
  return nullptr;
}

namespace {

// Non-finite doubles become strings so the JSON stays valid and lossless.
nlohmann::ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["experiment"] = r.experiment;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["mode"] = r.mode;
  j["pass"] = r.all_pass();
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["lhs"] = num(c.lhs);
    e["rhs"] = num(c.rhs);
    e["margin"] = num(c.margin);
    e["pass"] = c.pass;
    e["asserted"] = c.asserted;
    if (!c.note.empty()) e["note"] = c.note;
    checks.push_back(std::move(e));
  }
  j["data"] = r.data;
  auto& tables = j["tables"] = nlohmann::ordered_json::array();
  for (const auto& t : r.tables) tables.push_back(t.name);
  auto& blobs = j["attachments"] = nlohmann::ordered_json::array();
  for (const auto& b : r.blobs) blobs.push_back(b.first);
  return j;
}

std::string serialize(const RunReport& r) { return to_json(r).dump(2) + "\n"; }

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

std::vector<std::string> emit(const RunReport& r, const std::string& dir, const std::string& format) {
  if (format != "json" && format != "csv" && format != "both") throw ConfigError("emit: format must be json, csv or both");
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  auto write = [&](const std::string& name, const std::string& body) {
    auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ResourceError("emit: cannot write " + path);
    f << body;
    written.push_back(path);
  };
  if (format != "csv") write("report.json", serialize(r));
  if (format != "json") {
    for (const auto& t : r.tables) write(t.name + ".csv", to_csv(t));
  }
  for (const auto& [name, bytes] : r.blobs) write(name, bytes);
  nlohmann::ordered_json timing;
  timing["experiment"] = r.experiment;
  timing["elapsed_seconds"] = r.elapsed_seconds;
  write("timing.json", timing.dump(2) + "\n");
  return written;
}

}  // namespace shelab
