#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "schemabind/tensor.hpp"
#include "schemabind/textio.hpp"

namespace schemabind {

inline const char* arch_color(const std::string& arch) {
  if (arch == "rnn") return "#1f77b4";
  if (arch == "lstm") return "#ff7f0e";
  if (arch == "fw") return "#2ca02c";
  if (arch == "ntm") return "#d62728";
  return "#7f7f7f";
}

struct CurveSeries {
  std::string name;
  std::vector<double> steps;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

namespace svgdetail {

constexpr double kW = 640, kH = 420, kLeft = 60, kRight = 140, kTop = 40, kBottom = 50;

inline double sx(double step, double max_step) {
  return kLeft + (kW - kLeft - kRight) * (max_step > 0 ? step / max_step : 0.0);
}
inline double sy(double v) { return kTop + (kH - kTop - kBottom) * (1.0 - v); }

inline std::string num(double v) { return format_fixed(v, 2); }

inline void axes(std::string& out, const std::string& title, const std::string& xlabel,
                 double max_step) {
  out += "<rect width='" + num(kW) + "' height='" + num(kH) + "' fill='white'/>\n";
  out += "<text x='" + num(kW / 2) + "' y='22' text-anchor='middle' font-size='15'>" + title +
         "</text>\n";
  out += "<line x1='" + num(kLeft) + "' y1='" + num(sy(0)) + "' x2='" + num(kW - kRight) + "' y2='" +
         num(sy(0)) + "' stroke='black'/>\n";
  out += "<line x1='" + num(kLeft) + "' y1='" + num(sy(0)) + "' x2='" + num(kLeft) + "' y2='" +
         num(sy(1)) + "' stroke='black'/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    double v = tick / 4.0;
    out += "<text x='" + num(kLeft - 8) + "' y='" + num(sy(v) + 4) +
           "' text-anchor='end' font-size='11'>" + format_fixed(v, 2) + "</text>\n";
    out += "<line x1='" + num(kLeft - 4) + "' y1='" + num(sy(v)) + "' x2='" + num(kLeft) + "' y2='" +
           num(sy(v)) + "' stroke='black'/>\n";
  }
  out += "<text x='" + num((kW - kRight + kLeft) / 2) + "' y='" + num(kH - 12) +
         "' text-anchor='middle' font-size='12'>" + xlabel + "</text>\n";
  if (max_step > 0) {
    for (int tick = 0; tick <= 4; ++tick) {
      double s = max_step * tick / 4.0;
      out += "<text x='" + num(sx(s, max_step)) + "' y='" + num(sy(0) + 16) +
             "' text-anchor='middle' font-size='11'>" + format_fixed(s, 0) + "</text>\n";
    }
  }
}

}  // namespace svgdetail

// Mean line with a min/max ribbon per series, mirroring the learning-curve
// plots with error ribbons over trials.
inline std::string svg_learning_curves(const std::string& title,
                                       const std::vector<CurveSeries>& series, double chance) {
  using namespace svgdetail;
  double max_step = 1.0;
  for (const auto& s : series)
    for (double st : s.steps) max_step = std::max(max_step, st);
  std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(kW) + "' height='" +
                    num(kH) + "'>\n";
  axes(out, title, "training step", max_step);
  if (chance > 0.0) {
    out += "<line x1='" + num(kLeft) + "' y1='" + num(sy(chance)) + "' x2='" + num(kW - kRight) +
           "' y2='" + num(sy(chance)) + "' stroke='gray' stroke-dasharray='4,3'/>\n";
    out += "<text x='" + num(kW - kRight + 6) + "' y='" + num(sy(chance) + 4) +
           "' font-size='10' fill='gray'>chance</text>\n";
  }
  int legend_i = 0;
  for (const auto& s : series) {
    const char* color = arch_color(s.name);
    if (!s.lo.empty()) {
      std::string pts;
      for (size_t i = 0; i < s.steps.size(); ++i)
        pts += num(sx(s.steps[i], max_step)) + "," + num(sy(s.hi[i])) + " ";
      for (size_t i = s.steps.size(); i-- > 0;)
        pts += num(sx(s.steps[i], max_step)) + "," + num(sy(s.lo[i])) + " ";
      out += "<polygon points='" + pts + "' fill='" + color + "' opacity='0.15'/>\n";
    }
    std::string pts;
    for (size_t i = 0; i < s.steps.size(); ++i)
      pts += num(sx(s.steps[i], max_step)) + "," + num(sy(s.mean[i])) + " ";
    out += "<polyline points='" + pts + "' fill='none' stroke='" + color + "' stroke-width='1.8'/>\n";
    double ly = kTop + 16 * legend_i++;
    out += "<rect x='" + num(kW - kRight + 10) + "' y='" + num(ly) +
           "' width='12' height='12' fill='" + color + "'/>\n";
    out += "<text x='" + num(kW - kRight + 27) + "' y='" + num(ly + 10) + "' font-size='12'>" +
           s.name + "</text>\n";
  }
  return out + "</svg>\n";
}

struct BarGroup {
  std::string arch;
  std::vector<double> mean;  // one per category
  std::vector<double> lo;
  std::vector<double> hi;
};

// One bar group per architecture with per-category bars and min/max error
// whiskers.
inline std::string svg_grouped_bars(const std::string& title,
                                    const std::vector<std::string>& categories,
                                    const std::vector<BarGroup>& groups, double chance) {
  using namespace svgdetail;
  std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(kW) + "' height='" +
                    num(kH) + "'>\n";
  axes(out, title, "", 0.0);
  double plot_w = kW - kLeft - kRight;
  double group_w = plot_w / std::max<size_t>(1, groups.size());
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& grp = groups[gi];
    const char* color = arch_color(grp.arch);
    double x0 = kLeft + group_w * static_cast<double>(gi);
    size_t ncat = std::max<size_t>(1, grp.mean.size());
    double bar_w = group_w * 0.8 / static_cast<double>(ncat);
    for (size_t ci = 0; ci < grp.mean.size(); ++ci) {
      double bx = x0 + group_w * 0.1 + bar_w * static_cast<double>(ci);
      double v = std::clamp(grp.mean[ci], 0.0, 1.0);
      out += "<rect x='" + num(bx) + "' y='" + num(sy(v)) + "' width='" + num(bar_w * 0.9) +
             "' height='" + num(sy(0) - sy(v)) + "' fill='" + color + "' opacity='" +
             format_fixed(0.45 + 0.55 * (ci + 1.0) / static_cast<double>(ncat), 2) + "'>" +
             "<title>" + grp.arch + (categories.size() == grp.mean.size() ? " " + categories[ci] : "") +
             "</title></rect>\n";
      if (ci < grp.lo.size() && ci < grp.hi.size()) {
        double cx = bx + bar_w * 0.45;
        out += "<line x1='" + num(cx) + "' y1='" + num(sy(std::clamp(grp.lo[ci], 0.0, 1.0))) +
               "' x2='" + num(cx) + "' y2='" + num(sy(std::clamp(grp.hi[ci], 0.0, 1.0))) +
               "' stroke='black' stroke-width='1'/>\n";
      }
    }
    out += "<text x='" + num(x0 + group_w / 2) + "' y='" + num(sy(0) + 16) +
           "' text-anchor='middle' font-size='12'>" + grp.arch + "</text>\n";
  }
  if (chance > 0.0)
    out += "<line x1='" + num(kLeft) + "' y1='" + num(sy(chance)) + "' x2='" + num(kW - kRight) +
           "' y2='" + num(sy(chance)) + "' stroke='gray' stroke-dasharray='4,3'/>\n";
  int li = 0;
  for (const auto& c : categories) {
    double ly = kTop + 14 * li++;
    out += "<text x='" + num(kW - kRight + 10) + "' y='" + num(ly + 10) + "' font-size='11'>" + c +
           "</text>\n";
  }
  return out + "</svg>\n";
}

// Correlation heatmap with red-blue shading over [-1, 1].
inline std::string svg_heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                               const std::vector<std::string>& col_labels, const Tensor& values) {
  using namespace svgdetail;
  std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(kW) + "' height='" +
                    num(kH) + "'>\n";
  out += "<rect width='" + num(kW) + "' height='" + num(kH) + "' fill='white'/>\n";
  out += "<text x='" + num(kW / 2) + "' y='22' text-anchor='middle' font-size='15'>" + title +
         "</text>\n";
  double cell_w = (kW - kLeft - 40) / std::max(1, values.cols);
  double cell_h = (kH - kTop - kBottom) / std::max(1, values.rows);
  for (int i = 0; i < values.rows; ++i) {
    for (int j = 0; j < values.cols; ++j) {
      double v = std::clamp(values.at(i, j), -1.0, 1.0);
      int red = v > 0 ? 255 : static_cast<int>(255 * (1.0 + v));
      int blue = v < 0 ? 255 : static_cast<int>(255 * (1.0 - v));
      int green = static_cast<int>(255 * (1.0 - std::abs(v)));
      double x = kLeft + cell_w * j, y = kTop + 10 + cell_h * i;
      out += "<rect x='" + num(x) + "' y='" + num(y) + "' width='" + num(cell_w) + "' height='" +
             num(cell_h) + "' fill='rgb(" + std::to_string(red) + "," + std::to_string(green) + "," +
             std::to_string(blue) + ")' stroke='white'/>\n";
      out += "<text x='" + num(x + cell_w / 2) + "' y='" + num(y + cell_h / 2 + 4) +
             "' text-anchor='middle' font-size='10'>" + format_fixed(values.at(i, j), 2) +
             "</text>\n";
    }
    if (i < static_cast<int>(row_labels.size()))
      out += "<text x='" + num(kLeft - 6) + "' y='" + num(kTop + 10 + cell_h * i + cell_h / 2 + 4) +
             "' text-anchor='end' font-size='11'>" + row_labels[i] + "</text>\n";
  }
  for (int j = 0; j < values.cols && j < static_cast<int>(col_labels.size()); ++j)
    out += "<text x='" + num(kLeft + cell_w * j + cell_w / 2) + "' y='" + num(kH - kBottom + 24) +
           "' text-anchor='middle' font-size='11'>" + col_labels[j] + "</text>\n";
  return out + "</svg>\n";
}

}  // namespace schemabind
