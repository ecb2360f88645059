#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace idleq {

using CsvCell = std::variant<std::string, double, std::int64_t>;

// %.12g, with "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double v);

/// Header plus rows; every row must have one cell per column.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<CsvCell> row);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<CsvCell>>& rows() const { return rows_; }

  void write(std::ostream& out) const;
  // "-" writes to stdout.
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

}  // namespace idleq
