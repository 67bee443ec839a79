#include "streampipe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace streampipe {

int Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("unknown column: " + name);
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("row width does not match column count");
  rows.push_back(std::move(row));
}

FiveNumber five_number_summary(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("five_number_summary: empty list");
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 >= values.size()) return values[lo];
    return values[lo] + frac * (values[lo + 1] - values[lo]);
  };
  return FiveNumber{values.front(), quantile(0.25), quantile(0.5), quantile(0.75),
                    values.back()};
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool cell_truthy(const Cell& cell) {
  if (std::holds_alternative<bool>(cell)) return std::get<bool>(cell);
  if (std::holds_alternative<std::int64_t>(cell)) return std::get<std::int64_t>(cell) != 0;
  if (std::holds_alternative<std::string>(cell)) {
    const auto& s = std::get<std::string>(cell);
    return s == "1" || s == "true";
  }
  return false;
}

std::optional<double> cell_as_double(const Cell& cell) {
  if (std::holds_alternative<double>(cell)) return std::get<double>(cell);
  if (std::holds_alternative<std::int64_t>(cell))
    return static_cast<double>(std::get<std::int64_t>(cell));
  if (std::holds_alternative<std::string>(cell)) {
    const auto& s = std::get<std::string>(cell);
    if (s.empty()) return std::nullopt;
    try {
      return std::stod(s);
    } catch (...) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

// Orders cells of possibly mixed type: by type index first, then value.
bool cell_less(const Cell& a, const Cell& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (std::holds_alternative<std::int64_t>(a))
    return std::get<std::int64_t>(a) < std::get<std::int64_t>(b);
  if (std::holds_alternative<double>(a)) return std::get<double>(a) < std::get<double>(b);
  if (std::holds_alternative<bool>(a)) return std::get<bool>(a) < std::get<bool>(b);
  if (std::holds_alternative<std::string>(a))
    return std::get<std::string>(a) < std::get<std::string>(b);
  return false;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_cell(const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) return "";
  if (std::holds_alternative<std::int64_t>(cell))
    return std::to_string(std::get<std::int64_t>(cell));
  if (std::holds_alternative<double>(cell)) return format_double(std::get<double>(cell));
  if (std::holds_alternative<bool>(cell)) return std::get<bool>(cell) ? "1" : "0";
  return std::get<std::string>(cell);
}

std::vector<SummaryRow> group_summaries(const Table& table, const std::string& metric,
                                        const std::vector<std::string>& group_keys,
                                        bool include_disqualified) {
  const int metric_col = table.column_index(metric);
  std::vector<int> key_cols;
  key_cols.reserve(group_keys.size());
  for (const auto& key : group_keys) key_cols.push_back(table.column_index(key));
  int disq_col = -1;
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    if (table.columns[i] == "disqualified") disq_col = static_cast<int>(i);

  std::map<std::vector<Cell>, std::vector<double>, decltype([](const std::vector<Cell>& a,
                                                               const std::vector<Cell>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), cell_less);
  })>
      groups;
  for (const auto& row : table.rows) {
    if (!include_disqualified && disq_col >= 0 && cell_truthy(row[disq_col])) continue;
    const auto value = cell_as_double(row[metric_col]);
    if (!value) continue;
    std::vector<Cell> key;
    key.reserve(key_cols.size());
    for (int c : key_cols) key.push_back(row[c]);
    groups[std::move(key)].push_back(*value);
  }

  std::vector<SummaryRow> out;
  out.reserve(groups.size());
  for (auto& [key, values] : groups) {
    SummaryRow row;
    row.keys = key;
    row.count = static_cast<std::int64_t>(values.size());
    row.stats = five_number_summary(std::move(values));
    out.push_back(std::move(row));
  }
  return out;
}

Table summaries_to_table(const std::vector<SummaryRow>& summaries,
                         const std::vector<std::string>& group_keys) {
  Table table;
  table.columns = group_keys;
  for (const char* col : {"count", "min", "q1", "q2", "q3", "max"})
    table.columns.push_back(col);
  for (const auto& summary : summaries) {
    std::vector<Cell> row = summary.keys;
    row.emplace_back(summary.count);
    row.emplace_back(summary.stats.min);
    row.emplace_back(summary.stats.q1);
    row.emplace_back(summary.stats.median);
    row.emplace_back(summary.stats.q3);
    row.emplace_back(summary.stats.max);
    table.add_row(std::move(row));
  }
  return table;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += csv_escape(table.columns[c]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_escape(format_cell(row[c]));
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Table& table) {
  std::ostringstream out;
  out << "[";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << (r ? ",\n " : "\n ") << "{";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out << ",";
      out << '"' << table.columns[c] << "\":";
      const Cell& cell = table.rows[r][c];
      if (std::holds_alternative<std::monostate>(cell)) {
        out << "null";
      } else if (std::holds_alternative<bool>(cell)) {
        out << (std::get<bool>(cell) ? "true" : "false");
      } else if (std::holds_alternative<std::string>(cell)) {
        out << '"';
        for (char ch : std::get<std::string>(cell)) {
          if (ch == '"' || ch == '\\') out << '\\';
          out << ch;
        }
        out << '"';
      } else {
        out << format_cell(cell);
      }
    }
    out << "}";
  }
  out << "\n]\n";
  return out.str();
}

std::size_t emit(const Table& table, OutputFormat format, const std::filesystem::path& dest) {
  const std::string payload = format == OutputFormat::csv ? to_csv(table) : to_json(table);
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + dest.string());
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw std::runtime_error("write failed: " + dest.string());
  return payload.size();
}

Table parse_csv(const std::string& text) {
  Table table;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (; pos < text.size(); ++pos) {
      const char c = text[pos];
      if (quoted) {
        if (c == '"') {
          if (pos + 1 < text.size() && text[pos + 1] == '"') {
            field += '"';
            ++pos;
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\n') {
        ++pos;
        break;
      } else {
        field += c;
      }
    }
    fields.push_back(std::move(field));
    if (header) {
      table.columns = std::move(fields);
      header = false;
    } else {
      std::vector<Cell> row;
      row.reserve(fields.size());
      for (auto& f : fields) row.emplace_back(std::move(f));
      table.add_row(std::move(row));
    }
  }
  return table;
}

}  // namespace streampipe
