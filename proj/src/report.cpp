#include "wtseq/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "wtseq/csv.hpp"

namespace wtseq::report {

Cell cell(const std::optional<double>& v) {
  if (!v || std::isnan(*v)) return std::monostate{};
  return *v;
}

Cell cell(double v) { return cell(std::optional<double>(v)); }

Cell cell(std::uint64_t v) { return static_cast<std::int64_t>(v); }

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw std::logic_error("report row has " + std::to_string(row.size()) + " cells, expected " +
                           std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

namespace {

std::string csv_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, std::string>) return v;
        else if constexpr (std::is_same_v<T, double>) return csv::format_double(v);
        else return std::to_string(v);
      },
      c);
}

nlohmann::ordered_json json_value(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<T, double>) {
          if (std::isnan(v)) return nullptr;
          if (!std::isfinite(v)) return csv::format_double(v);
          return v;
        } else return v;
      },
      c);
}

}  // namespace

std::vector<std::filesystem::path> write_table(const std::filesystem::path& dir, const std::string& name,
                                               const Table& table) {
  std::filesystem::create_directories(dir);
  const auto csv_path = dir / (name + ".csv");
  const auto json_path = dir / (name + ".json");
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    csv::write_record(out, table.columns);
    std::vector<std::string> fields;
    for (const auto& row : table.rows) {
      fields.clear();
      for (const auto& c : row) fields.push_back(csv_text(c));
      csv::write_record(out, fields);
    }
  }
  {
    nlohmann::ordered_json j;
    j["columns"] = table.columns;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      nlohmann::ordered_json obj;
      for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = json_value(row[i]);
      rows.push_back(std::move(obj));
    }
    std::ofstream out(json_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + json_path.string());
    out << j.dump(1) << '\n';
  }
  return {csv_path, json_path};
}

CsvRows read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvRows out;
  std::size_t line = 0;
  auto header = csv::read_record(in, line);
  if (!header) return out;
  out.columns = *header;
  while (auto rec = csv::read_record(in, line)) {
    if (rec->size() == 1 && (*rec)[0].empty()) continue;
    if (rec->size() != out.columns.size())
      throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": wrong field count");
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < rec->size(); ++i) row[out.columns[i]] = (*rec)[i];
    out.rows.push_back(std::move(row));
  }
  return out;
}

double to_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

}  // namespace wtseq::report
