#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <string>
#include <vector>

#include "ilfo/harness.hpp"

namespace ilfo {

struct RunSeries {
  std::string file;   // path as given
  std::string stem;   // basename without extension
  std::string group;  // stem with a trailing _seed<k> stripped
  std::vector<MetricsRow> rows;
};

inline std::string path_stem(const std::string& path) {
  std::size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  std::size_t dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return base;
}

inline std::string run_group(const std::string& stem) {
  static const std::regex seed_suffix("^(.*)[_-]seed[0-9]+$");
  std::smatch m;
  if (std::regex_match(stem, m, seed_suffix)) return m[1].str();
  return stem;
}

inline RunSeries load_run(const std::string& path) {
  RunSeries run;
  run.file = path;
  run.stem = path_stem(path);
  run.group = run_group(run.stem);
  run.rows = load_metrics(path);
  if (run.rows.empty()) throw std::runtime_error("metrics " + path + ": no data rows");
  return run;
}

struct GroupSummary {
  std::string group;
  int runs = 0;
  double final_success_mean = 0.0;
  double final_success_sd = 0.0;  // population sd
  double final_gamma_mean = 0.0;
  long final_frames = 0;
};

inline std::vector<GroupSummary> summarize_runs(const std::vector<RunSeries>& runs) {
  std::map<std::string, std::vector<const RunSeries*>> by_group;
  for (const auto& r : runs) by_group[r.group].push_back(&r);
  std::vector<GroupSummary> out;
  for (const auto& [group, members] : by_group) {
    GroupSummary s;
    s.group = group;
    s.runs = static_cast<int>(members.size());
    double sum = 0.0, sumsq = 0.0;
    for (const auto* r : members) {
      const MetricsRow& last = r->rows.back();
      sum += last.success_rate;
      sumsq += last.success_rate * last.success_rate;
      s.final_gamma_mean += last.gamma;
      s.final_frames = std::max(s.final_frames, last.frames);
    }
    s.final_success_mean = sum / s.runs;
    double var = sumsq / s.runs - s.final_success_mean * s.final_success_mean;
    s.final_success_sd = std::sqrt(std::max(0.0, var));
    s.final_gamma_mean /= s.runs;
    out.push_back(s);
  }
  return out;
}

inline std::string render_summary(const std::vector<GroupSummary>& groups) {
  std::string out = "group runs final_frames final_success_mean final_success_sd final_gamma_mean\n";
  for (const auto& g : groups) {
    out += g.group;
    out += ' ';
    out += std::to_string(g.runs);
    out += ' ';
    out += std::to_string(g.final_frames);
    out += ' ';
    out += format_double(g.final_success_mean);
    out += ' ';
    out += format_double(g.final_success_sd);
    out += ' ';
    out += format_double(g.final_gamma_mean);
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline const char* svg_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette[i % 10];
}

}  // namespace detail

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Minimal static line chart; fixed y range keeps output deterministic and
// comparable across runs.
inline std::string render_line_chart(const std::string& title, const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<ChartSeries>& series, double y_min,
                                     double y_max) {
  const double width = 860, height = 520;
  const double ml = 70, mr = 180, mt = 50, mb = 60;
  const double pw = width - ml - mr, ph = height - mt - mb;
  double x_max = 1.0;
  for (const auto& s : series)
    for (const auto& p : s.points) x_max = std::max(x_max, p.first);
  const double y_span = y_max - y_min;

  auto px = [&](double x) { return ml + (x / x_max) * pw; };
  auto py = [&](double y) { return mt + (1.0 - (y - y_min) / y_span) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) +
         "\" height=\"" + detail::svg_num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::svg_num(width / 2) +
         "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\" font-family=\"sans-serif\">" +
         title + "</text>\n";
  // axes
  svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt) + "\" x2=\"" +
         detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(mt + ph) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt + ph) + "\" x2=\"" +
         detail::svg_num(ml + pw) + "\" y2=\"" + detail::svg_num(mt + ph) +
         "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double xv = x_max * i / 4.0;
    double yv = y_min + y_span * i / 4.0;
    svg += "<text x=\"" + detail::svg_num(px(xv)) + "\" y=\"" + detail::svg_num(mt + ph + 20) +
           "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" +
           detail::svg_num(xv) + "</text>\n";
    svg += "<text x=\"" + detail::svg_num(ml - 8) + "\" y=\"" + detail::svg_num(py(yv) + 4) +
           "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" +
           detail::svg_num(yv) + "</text>\n";
    if (i > 0) {
      svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(py(yv)) +
             "\" x2=\"" + detail::svg_num(ml + pw) + "\" y2=\"" + detail::svg_num(py(yv)) +
             "\" stroke=\"#dddddd\"/>\n";
    }
  }
  svg += "<text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"" + detail::svg_num(height - 16) +
         "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\">" + x_label +
         "</text>\n";
  svg += "<text x=\"20\" y=\"" + detail::svg_num(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\" transform=\"rotate(-90 20 " +
         detail::svg_num(mt + ph / 2) + ")\">" + y_label + "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (s.points.empty()) continue;
    std::string pts;
    for (const auto& p : s.points) {
      if (!pts.empty()) pts += ' ';
      pts += detail::svg_num(px(p.first)) + "," + detail::svg_num(py(std::clamp(p.second, y_min, y_max)));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(detail::svg_color(i)) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    double ly = mt + 16 + 18.0 * static_cast<double>(i);
    svg += "<line x1=\"" + detail::svg_num(width - mr + 10) + "\" y1=\"" + detail::svg_num(ly - 4) +
           "\" x2=\"" + detail::svg_num(width - mr + 34) + "\" y2=\"" + detail::svg_num(ly - 4) +
           "\" stroke=\"" + detail::svg_color(i) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::svg_num(width - mr + 40) + "\" y=\"" + detail::svg_num(ly) +
           "\" font-size=\"12\" font-family=\"sans-serif\">" + s.name + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Renders the cross-run report: a text summary table plus success and
// discount curves, one series per input file.
inline std::vector<std::string> write_report(const std::vector<RunSeries>& runs,
                                             const std::string& out_prefix) {
  std::vector<ChartSeries> success, gamma;
  for (const auto& r : runs) {
    ChartSeries cs{r.stem, {}}, cg{r.stem, {}};
    for (const auto& row : r.rows) {
      cs.points.emplace_back(static_cast<double>(row.frames), row.success_rate);
      cg.points.emplace_back(static_cast<double>(row.frames), row.gamma);
    }
    success.push_back(std::move(cs));
    gamma.push_back(std::move(cg));
  }
  std::vector<std::string> written;
  write_text_file(out_prefix + "_summary.txt", render_summary(summarize_runs(runs)));
  written.push_back(out_prefix + "_summary.txt");
  write_text_file(out_prefix + "_success.svg",
                  render_line_chart("evaluation success rate", "frames", "success rate", success, 0.0, 1.0));
  written.push_back(out_prefix + "_success.svg");
  write_text_file(out_prefix + "_gamma.svg",
                  render_line_chart("discount schedule", "frames", "gamma", gamma, 0.0, 1.0));
  written.push_back(out_prefix + "_gamma.svg");
  return written;
}

}  // namespace ilfo
