#include "bilayer/records.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "bilayer/error.hpp"

namespace bilayer {

void Table::add(Row row) {
  if (row.size() != columns.size())
    throw Error(Errc::out_of_range, "table row has " + std::to_string(row.size()) + " cells, expected " +
                                        std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::size_t Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  throw Error(Errc::not_found, "no column '" + std::string(name) + "'");
}

double Table::real(std::size_t row, std::string_view column) const {
  const Cell& c = rows.at(row).at(column_index(column));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  throw Error(Errc::out_of_range, "column '" + std::string(column) + "' is not numeric");
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace {

bool holds(const Cell& c, ColumnType t) {
  switch (t) {
    case ColumnType::real: return std::holds_alternative<double>(c);
    case ColumnType::integer: return std::holds_alternative<std::int64_t>(c);
    case ColumnType::text: return std::holds_alternative<std::string>(c);
  }
  return false;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << table.columns[i].name;
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const Row& row = table.rows[r];
    if (row.size() != table.columns.size())
      throw Error(Errc::out_of_range, "row " + std::to_string(r) + " has the wrong width");
    for (std::size_t i = 0; i < row.size(); ++i) {
      const Column& col = table.columns[i];
      if (!holds(row[i], col.type))
        throw Error(Errc::out_of_range, "row " + std::to_string(r) + ", column '" + col.name + "': type mismatch");
      if (i) out << ',';
      if (const auto* d = std::get_if<double>(&row[i])) {
        if (!std::isfinite(*d))
          throw Error(Errc::non_finite, "row " + std::to_string(r) + ", column '" + col.name + "': non-finite value");
        out << format_real(*d);
      } else if (const auto* n = std::get_if<std::int64_t>(&row[i])) {
        out << *n;
      } else {
        const auto& s = std::get<std::string>(row[i]);
        if (s.find_first_of(",\"\n\r") != std::string::npos)
          throw Error(Errc::out_of_range, "row " + std::to_string(r) + ", column '" + col.name + "': text contains a separator");
        out << s;
      }
    }
    out << '\n';
  }
}

std::string to_csv(const Table& table) {
  std::ostringstream os;
  write_csv(os, table);
  return os.str();
}

Table parse_csv(std::string_view text, const std::vector<Column>& schema) {
  Table t;
  t.columns = schema;
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(Errc::io, "csv: missing header");
  const auto header = split(lines[0], ',');
  if (header.size() != schema.size()) throw Error(Errc::io, "csv: header width does not match schema");
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (header[i] != schema[i].name)
      throw Error(Errc::io, "csv: expected column '" + schema[i].name + "', found '" + std::string(header[i]) + "'");
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split(lines[l], ',');
    if (cells.size() != schema.size()) throw Error(Errc::io, "csv: line " + std::to_string(l + 1) + " has the wrong width");
    Row row;
    row.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto c = cells[i];
      switch (schema[i].type) {
        case ColumnType::real: {
          double v = 0.0;
          const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
          if (res.ec != std::errc() || res.ptr != c.data() + c.size())
            throw Error(Errc::io, "csv: bad real '" + std::string(c) + "' in column '" + schema[i].name + "'");
          row.emplace_back(v);
          break;
        }
        case ColumnType::integer: {
          std::int64_t v = 0;
          const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
          if (res.ec != std::errc() || res.ptr != c.data() + c.size())
            throw Error(Errc::io, "csv: bad integer '" + std::string(c) + "' in column '" + schema[i].name + "'");
          row.emplace_back(v);
          break;
        }
        case ColumnType::text:
          row.emplace_back(std::string(c));
          break;
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bilayer
