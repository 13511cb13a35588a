#include "coshfit/datasets.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace coshfit {

namespace {

constexpr std::array<double, 25> kLocation25{
    -2.80, -1.98, -1.70, -1.20, -1.10, -0.82, -0.79, -0.73, -0.66, -0.51, -0.41, -0.35, -0.23,
    0.10,  0.22,  0.25,  0.37,  0.52,  0.93,  0.95,  1.36,  1.52,  1.76,  3.07,  20.50};

// 1955 is the usual 0.73; the 9.73 in some printings does not reproduce the published least-squares line.
constexpr std::array<double, 24> kTelephoneCalls{0.44, 0.47, 0.47, 0.59, 0.66, 0.73, 0.81, 0.88,
                                                 1.06, 1.20, 1.35, 1.49, 1.61, 2.12, 11.9, 12.4,
                                                 14.2, 15.9, 18.2, 21.2, 4.30, 2.40, 2.70, 2.90};

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> available_builtins() { return {"location25", "telephone"}; }

NamedDataset builtin(std::string_view name) {
  NamedDataset d;
  d.name = std::string(name);
  if (name == "location25") {
    d.y = Eigen::Map<const Eigen::VectorXd>(kLocation25.data(), kLocation25.size());
    d.X = Eigen::MatrixXd(static_cast<Eigen::Index>(kLocation25.size()), 0);
    d.response_name = "x";
    return d;
  }
  if (name == "telephone") {
    d.y = Eigen::Map<const Eigen::VectorXd>(kTelephoneCalls.data(), kTelephoneCalls.size());
    d.X.resize(static_cast<Eigen::Index>(kTelephoneCalls.size()), 1);
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) d.X(i, 0) = 1950.0 + static_cast<double>(i);
    d.response_name = "calls";
    d.column_names = {"year"};
    return d;
  }
  std::string names;
  for (const auto& n : available_builtins()) names += (names.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown dataset '" + std::string(name) + "' (available: " + names + ")");
}

NamedDataset load_csv(const std::filesystem::path& path, std::string_view response) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty; a header row is required");
  std::vector<std::string> header = split_row(line);
  for (auto& h : header) h = trim(h);

  std::size_t response_col = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == response) response_col = j;
  }
  if (response_col == header.size()) {
    throw DataError("response column '" + std::string(response) + "' not found in '" + path.string() + "'");
  }

  std::vector<std::vector<double>> rows;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row_number) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(header.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string cell = trim(cells[j]);
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, values[j]);
      if (cell.empty() || ec != std::errc() || ptr != last) {
        throw DataError("non-numeric value at row " + std::to_string(row_number) + ", column " + header[j] +
                        ": '" + cell + "'");
      }
    }
    rows.push_back(std::move(values));
  }

  NamedDataset d;
  d.name = path.stem().string();
  d.response_name = header[response_col];
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != response_col) d.column_names.push_back(header[j]);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  d.y.resize(n);
  d.X.resize(n, static_cast<Eigen::Index>(d.column_names.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j == response_col) {
        d.y(i) = rows[static_cast<std::size_t>(i)][j];
      } else {
        d.X(i, col++) = rows[static_cast<std::size_t>(i)][j];
      }
    }
  }
  return d;
}

void write_csv(const NamedDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << data.response_name;
  for (const auto& c : data.column_names) out << ',' << c;
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (Eigen::Index i = 0; i < data.y.size(); ++i) {
    put(data.y(i));
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
      out << ',';
      put(data.X(i, j));
    }
    out << '\n';
  }
  if (!out) throw DataError("failed while writing '" + path.string() + "'");
}

}  // namespace coshfit
