#pragma once

#include <string>
#include <vector>

#include "psrl/common/csv.hpp"

namespace psrl::cli {

struct SeriesStat {
  std::vector<double> x;     // episode index (or T)
  std::vector<double> mean;  // across trials
  std::vector<double> sd;    // sample standard deviation (0 for a single trial)
};

// Groups `value_col` by `key_col` (e.g. per-episode across trials) and returns
// mean and sample standard deviation per key, keys sorted ascending.
SeriesStat aggregate_by_key(const csv::Table& t, const std::string& key_col,
                            const std::string& value_col);

// Writes a (key, mean, std) CSV for one aggregated metric.
void write_series_csv(const std::string& path, const std::string& key_name,
                      const std::string& value_name, const SeriesStat& s);

// Standalone SVG line chart: mean line with a +-1 sd band, axis ticks and labels.
void write_line_svg(const std::string& path, const SeriesStat& s, const std::string& title,
                    const std::string& x_label, const std::string& y_label);

}  // namespace psrl::cli
