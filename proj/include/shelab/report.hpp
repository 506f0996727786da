#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace shelab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// One asserted (or informational) inequality: pass iff margin >= 0 within the
/// stated tolerance. Informational records have asserted = false.
struct CheckRecord {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = true;
  bool asserted = true;
  std::string note;
};

/// CSV table; the header row is fixed per table name.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(const std::vector<double>& row);
  void add_text(std::vector<std::string> row);
};

std::string format_number(double v);

struct RunReport {
  std::string experiment;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string mode;
  std::vector<CheckRecord> checks;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  std::vector<Table> tables;
  /// Raw binary attachments (file name, bytes), written next to the report.
  std::vector<std::pair<std::string, std::string>> blobs;
  double elapsed_seconds = 0.0;  ///< kept out of the JSON report

  void add(CheckRecord rec) { checks.push_back(std::move(rec)); }
  bool all_pass() const;
  /// First asserted failing record, or nullptr.
  const CheckRecord* first_failure() const;
};

nlohmann::ordered_json to_json(const RunReport& r);
std::string serialize(const RunReport& r);
std::string to_csv(const Table& t);

/// Writes report.json (format json|both), one CSV per table (csv|both) and
/// timing.json into dir. Returns the paths written.
std::vector<std::string> emit(const RunReport& r, const std::string& dir, const std::string& format = "both");

}  // namespace shelab
