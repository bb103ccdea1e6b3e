#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace wtseq::report {

/// Empty cells are written as "" in CSV and null in JSON.
using Cell = std::variant<std::monostate, std::string, double, std::int64_t>;

Cell cell(const std::optional<double>& v);
Cell cell(double v);
Cell cell(std::uint64_t v);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.json` with the same content.
/// Returns the paths written.
std::vector<std::filesystem::path> write_table(const std::filesystem::path& dir, const std::string& name,
                                               const Table& table);

/// A CSV report read back as strings keyed by column name.
struct CsvRows {
  std::vector<std::string> columns;
  std::vector<std::map<std::string, std::string>> rows;
};

CsvRows read_csv(const std::filesystem::path& path);

double to_double(const std::string& s);

}  // namespace wtseq::report
