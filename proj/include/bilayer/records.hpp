#pragma once

// Typed tables and their CSV form.  Doubles are written as %.16e (17
// significant digits), which round-trips exactly.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bilayer {

enum class ColumnType { real, integer, text };

struct Column {
  std::string name;
  ColumnType type{ColumnType::real};

  bool operator==(const Column&) const = default;
};

using Cell = std::variant<double, std::int64_t, std::string>;
using Row = std::vector<Cell>;

struct Table {
  std::vector<Column> columns;
  std::vector<Row> rows;

  void add(Row row);
  std::size_t column_index(std::string_view name) const;
  double real(std::size_t row, std::string_view column) const;

  bool operator==(const Table&) const = default;
};

/// Throws Errc::non_finite on NaN/Inf and Errc::out_of_range on type
/// mismatches or text cells containing separators.
void write_csv(std::ostream& out, const Table& table);
std::string to_csv(const Table& table);

/// Parses CSV written by write_csv against a known column schema.
Table parse_csv(std::string_view text, const std::vector<Column>& schema);

std::string format_real(double v);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace bilayer
