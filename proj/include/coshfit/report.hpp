#pragma once

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>

namespace coshfit {

inline constexpr const char* kReportSchemaVersion = "1";

/// Structured command output: {command, inputs, results, schema_version}.
struct Report {
  std::string command;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json results = nlohmann::ordered_json::object();

  nlohmann::ordered_json to_json() const;
};

/// Human-readable rendering: nested keys indented, numeric arrays on one line.
void print_report(const Report& report, std::ostream& out);

/// Writes the JSON form to a file, or to `out` when path is "-".
void write_report_json(const Report& report, const std::string& path, std::ostream& out);

}  // namespace coshfit
