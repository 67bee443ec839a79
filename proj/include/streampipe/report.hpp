#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace streampipe {

// One table cell. monostate renders as an empty CSV field / JSON null.
using Cell = std::variant<std::monostate, std::int64_t, double, bool, std::string>;

// Small column-named table backing every CSV/JSON artifact. Emission is
// deterministic: stable column order, floats at 6 significant digits,
// byte-identical output for identical input.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  int column_index(const std::string& name) const;  // throws on unknown column
  void add_row(std::vector<Cell> row);
};

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Quantiles by linear interpolation between order statistics (the common
// "type 7" rule); recorded as kQuantileRule in emitted metadata. Throws on an
// empty list.
FiveNumber five_number_summary(std::vector<double> values);

inline constexpr const char* kQuantileRule = "linear interpolation between order statistics (type 7)";

struct SummaryRow {
  std::vector<Cell> keys;
  std::int64_t count = 0;
  FiveNumber stats;
};

// One summary row per distinct key combination, sorted by keys. Rows whose
// `disqualified` column is truthy are excluded unless include_disqualified;
// rows with an empty metric cell are skipped.
std::vector<SummaryRow> group_summaries(const Table& table, const std::string& metric,
                                        const std::vector<std::string>& group_keys,
                                        bool include_disqualified = false);

Table summaries_to_table(const std::vector<SummaryRow>& summaries,
                         const std::vector<std::string>& group_keys);

enum class OutputFormat { csv, json };

std::string format_cell(const Cell& cell);
std::string to_csv(const Table& table);
std::string to_json(const Table& table);

// Returns bytes written; throws on an unwritable destination.
std::size_t emit(const Table& table, OutputFormat format, const std::filesystem::path& dest);

// Reads a CSV produced by to_csv back into a table of string cells.
Table parse_csv(const std::string& text);

// Two-column (x, y) plot series: the best metric value per group over time.
struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

}  // namespace streampipe
