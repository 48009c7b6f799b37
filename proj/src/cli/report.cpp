#include "psrl/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace psrl::cli {

SeriesStat aggregate_by_key(const csv::Table& t, const std::string& key_col,
                            const std::string& value_col) {
  const int kc = t.col(key_col);
  const int vc = t.col(value_col);
  if (kc < 0) throw std::runtime_error("report: missing column '" + key_col + "'");
  if (vc < 0) throw std::runtime_error("report: missing column '" + value_col + "'");
  std::map<double, std::vector<double>> groups;
  for (std::size_t i = 0; i < t.rows.size(); ++i) groups[t.num(i, kc)].push_back(t.num(i, vc));
  SeriesStat s;
  for (const auto& [key, vals] : groups) {
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double sd = 0.0;
    if (vals.size() > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    }
    s.x.push_back(key);
    s.mean.push_back(mean);
    s.sd.push_back(sd);
  }
  return s;
}

void write_series_csv(const std::string& path, const std::string& key_name,
                      const std::string& value_name, const SeriesStat& s) {
  csv::Writer w(path, {key_name, value_name + "_mean", value_name + "_std"});
  for (std::size_t i = 0; i < s.x.size(); ++i) w.row_nums({s.x[i], s.mean[i], s.sd[i]});
  w.close();
}

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

// Round an axis range outward to pleasant tick positions.
double nice_step(double span) {
  if (span <= 0.0) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step = 10.0;
  if (norm <= 1.0) step = 1.0;
  else if (norm <= 2.0) step = 2.0;
  else if (norm <= 5.0) step = 5.0;
  return step * mag;
}

}  // namespace

void write_line_svg(const std::string& path, const SeriesStat& s, const std::string& title,
                    const std::string& x_label, const std::string& y_label) {
  const int width = 720, height = 440;
  const int ml = 72, mr = 24, mt = 40, mb = 56;  // margins
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  if (!s.x.empty()) {
    xmin = *std::min_element(s.x.begin(), s.x.end());
    xmax = *std::max_element(s.x.begin(), s.x.end());
    ymin = ymax = s.mean[0];
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
      ymin = std::min(ymin, s.mean[i] - s.sd[i]);
      ymax = std::max(ymax, s.mean[i] + s.sd[i]);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("report: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

  // Axes.
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";

  // Ticks and grid.
  const double xs = nice_step(xmax - xmin), ys = nice_step(ymax - ymin);
  for (double x = std::ceil(xmin / xs) * xs; x <= xmax + 1e-9 * xs; x += xs) {
    out << "<line x1=\"" << px(x) << "\" y1=\"" << mt << "\" x2=\"" << px(x) << "\" y2=\""
        << mt + ph << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << px(x) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(x)
        << "</text>\n";
  }
  for (double y = std::ceil(ymin / ys) * ys; y <= ymax + 1e-9 * ys; y += ys) {
    out << "<line x1=\"" << ml << "\" y1=\"" << py(y) << "\" x2=\"" << ml + pw << "\" y2=\""
        << py(y) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py(y) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(y)
        << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">" << y_label << "</text>\n";

  if (!s.x.empty()) {
    // +-1 sd band.
    out << "<polygon fill=\"#4477aa\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << fmt(px(s.x[i])) << "," << fmt(py(s.mean[i] + s.sd[i])) << " ";
    for (std::size_t i = s.x.size(); i-- > 0;)
      out << fmt(px(s.x[i])) << "," << fmt(py(s.mean[i] - s.sd[i])) << " ";
    out << "\"/>\n";
    // Mean line.
    out << "<polyline fill=\"none\" stroke=\"#4477aa\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << fmt(px(s.x[i])) << "," << fmt(py(s.mean[i])) << " ";
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace psrl::cli
