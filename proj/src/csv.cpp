#include "bobylev/csv.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>

#include "bobylev/errors.hpp"

namespace bobylev {

namespace {
std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line + '\n';
}
}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  for (auto& h : header_) h = quote(h);
}

CsvTable& CsvTable::add(std::vector<Cell> cells) {
  if (cells.size() != header_.size())
    throw ConfigError(fmt::format("csv row has {} cells, header has {}", cells.size(), header_.size()));
  std::vector<std::string> row;
  row.reserve(cells.size());
  for (const auto& c : cells) {
    if (const auto* d = std::get_if<double>(&c))
      row.push_back(format_number(*d));
    else if (const auto* i = std::get_if<std::int64_t>(&c))
      row.push_back(std::to_string(*i));
    else
      row.push_back(quote(std::get<std::string>(c)));
  }
  rows_.push_back(std::move(row));
  return *this;
}

std::string CsvTable::str() const {
  std::string out = join(header_);
  for (const auto& r : rows_) out += join(r);
  return out;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot open {} for writing", path));
  const auto s = str();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw Error(fmt::format("write to {} failed", path));
}

}  // namespace bobylev
