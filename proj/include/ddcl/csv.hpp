#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace ddcl {

// RFC-4180 style writer: comma separated, dot decimal, doubles printed with 17
// significant digits so values round-trip exactly.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);

  void header(const std::vector<std::string>& columns);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(const std::string& v);
  void end_row();
  void close();

  const std::string& path() const { return path_; }

 private:
  void sep();

  std::string path_;
  std::ofstream out_;
  bool row_started_ = false;
};

std::string format_double(double v);
std::string csv_quote(const std::string& s);

}  // namespace ddcl
