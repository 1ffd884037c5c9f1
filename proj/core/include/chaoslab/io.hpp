#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chaoslab::io {

// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

// Minimal CSV table: header row plus rows of preformatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  void add_row(const std::vector<double>& values);
  std::string str() const;
  void write(const std::filesystem::path& path) const;

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace chaoslab::io
