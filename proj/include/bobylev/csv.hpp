#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace bobylev {

/// Shortest round-trip-safe text of a double: %.17g, with "inf", "-inf" and
/// "nan" for non-finite values.
std::string format_number(double x);

/// In-memory CSV table with a fixed header. Numbers are written with
/// format_number, so equal values give equal bytes.
class CsvTable {
 public:
  using Cell = std::variant<double, std::int64_t, std::string>;

  explicit CsvTable(std::vector<std::string> header);

  /// Throws ConfigError if the cell count differs from the header.
  CsvTable& add(std::vector<Cell> cells);

  [[nodiscard]] const std::vector<std::string>& header() const { return header_; }
  [[nodiscard]] std::size_t rows() const { return rows_.size(); }
  [[nodiscard]] std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace bobylev
