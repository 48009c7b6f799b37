#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace psrl::csv {

// Canonical format: one header row, comma separated, '\n' line ends, UTF-8,
// '.' decimal point. Numbers are printed with format_num so identical doubles
// always serialize to identical bytes.
std::string format_num(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const;  // -1 when absent
  double num(std::size_t row, int col) const;
};

class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void row_nums(const std::vector<double>& cells);
  void close();

 private:
  std::ofstream out_;
  std::size_t n_cols_;
};

Table read(const std::string& path);

}  // namespace psrl::csv
