#pragma once

#include <string>
#include <variant>
#include <vector>

#include "fdamimo/scenario.hpp"

namespace fdamimo {

using Cell = std::variant<double, std::string>;

/// Column-named table of numbers and strings.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& name) const;
  double number(std::size_t row, const std::string& column) const;
  const std::string& text(std::size_t row, const std::string& column) const;

  bool operator==(const Table& other) const;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool log_y = false;
};

enum class Format { kCsv, kJson, kSvg };

std::string to_csv(const Table& t);
Json table_to_json(const Table& t);
Table table_from_json(const Json& j);
std::string to_svg(const LineChart& chart);

/// Groups rows by `series_column` (or one series when empty) into a chart of
/// `y_column` against `x_column`.
LineChart chart_from_table(const Table& t, const std::string& x_column, const std::string& y_column,
                           const std::string& series_column, const std::string& title);

/// Writes text to `path`; IO failures raise std::runtime_error naming the path.
void write_text(const std::string& path, const std::string& text);

void emit(const Table& t, Format format, const std::string& path, const LineChart* chart = nullptr);

/// UTC time stamp used in output file names, e.g. 20240131T120000Z.
std::string timestamp();

}  // namespace fdamimo
