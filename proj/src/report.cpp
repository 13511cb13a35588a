#include "coshfit/report.hpp"

#include <fmt/format.h>

#include <fstream>
#include <stdexcept>

namespace coshfit {

namespace {

std::string scalar(const nlohmann::ordered_json& v) {
  if (v.is_number_float()) return fmt::format("{:.10g}", v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "undefined";
  return v.dump();
}

bool flat_array(const nlohmann::ordered_json& v) {
  if (!v.is_array()) return false;
  for (const auto& e : v) {
    if (e.is_object() || e.is_array()) return false;
  }
  return true;
}

void render(const nlohmann::ordered_json& v, std::ostream& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  if (v.is_object()) {
    for (const auto& [key, value] : v.items()) {
      if (value.is_object() || (value.is_array() && !flat_array(value))) {
        out << pad << key << ":\n";
        render(value, out, depth + 1);
      } else if (value.is_array()) {
        out << pad << fmt::format("{:<18}", key);
        for (const auto& e : value) out << ' ' << scalar(e);
        out << '\n';
      } else {
        out << pad << fmt::format("{:<18} {}", key, scalar(value)) << '\n';
      }
    }
  } else if (v.is_array()) {
    std::size_t i = 0;
    for (const auto& e : v) {
      out << pad << "[" << i++ << "]\n";
      render(e, out, depth + 1);
    }
  } else {
    out << pad << scalar(v) << '\n';
  }
}

}  // namespace

nlohmann::ordered_json Report::to_json() const {
  return {{"command", command}, {"inputs", inputs}, {"results", results}, {"schema_version", kReportSchemaVersion}};
}

void print_report(const Report& report, std::ostream& out) {
  out << "== " << report.command << " ==\n";
  render(report.results, out, 0);
}

void write_report_json(const Report& report, const std::string& path, std::ostream& out) {
  const std::string text = report.to_json().dump(2) + "\n";
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write report to '" + path + "'");
  file << text;
}

}  // namespace coshfit
