#pragma once

#include <string>
#include <vector>

#include "histofeat/report.hpp"

namespace histofeat {

// Bars are drawn from the zero line; NaN values are skipped. `sd`, when
// non-empty, adds an error whisker per bar.
struct BarSeries {
    std::string name;
    std::vector<double> values;
    std::vector<double> sd;
};

std::string svg_grouped_bars(const std::string& title, const std::string& y_label,
                             const std::vector<std::string>& groups,
                             const std::vector<BarSeries>& series, double y_min, double y_max);

std::string svg_histogram(const std::string& title, const std::string& x_label,
                          const std::vector<double>& values, int bins);

struct ScatterPoints {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;
};

std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<ScatterPoints>& series,
                        bool identity_line);

// Renders the plot set appropriate for the report's experiment into dir and
// returns the file names written (relative to dir).
std::vector<std::string> render_report_plots(const CVReport& report, const std::string& dir);

}  // namespace histofeat
