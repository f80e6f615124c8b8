#include "histofeat/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "histofeat/common.hpp"
#include "histofeat/io_util.hpp"

namespace histofeat {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 24, kTop = 44, kBottom = 64;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

const char* series_color(std::size_t i) {
    static const char* palette[] = {"#5b7fa6", "#d9822b", "#5ba65f", "#a65b9e"};
    return palette[i % 4];
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return std::string(buf);
}

std::string escape_text(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

class SvgDoc {
   public:
    SvgDoc() {
        body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) +
                 "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " +
                 fmt(kHeight) + "\">\n";
        body_ += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
                 "\" fill=\"white\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill,
              double opacity = 1.0) {
        body_ += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) +
                 "\" height=\"" + fmt(h) + "\" fill=\"" + fill + "\"";
        if (opacity < 1.0) body_ += " fill-opacity=\"" + fmt(opacity) + "\"";
        body_ += "/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0, bool dashed = false) {
        body_ += "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) +
                 "\" y2=\"" + fmt(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
                 fmt(width) + "\"";
        if (dashed) body_ += " stroke-dasharray=\"4 3\"";
        body_ += "/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill, double opacity = 1.0) {
        body_ += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" + fmt(r) +
                 "\" fill=\"" + fill + "\"";
        if (opacity < 1.0) body_ += " fill-opacity=\"" + fmt(opacity) + "\"";
        body_ += "/>\n";
    }

    void text(double x, double y, const std::string& s, double size,
              const std::string& anchor = "middle", double rotate = 0.0) {
        body_ += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-family=\"sans-serif\"" +
                 " font-size=\"" + fmt(size) + "\" text-anchor=\"" + anchor + "\"";
        if (rotate != 0.0)
            body_ += " transform=\"rotate(" + fmt(rotate) + " " + fmt(x) + " " + fmt(y) + ")\"";
        body_ += ">" + escape_text(s) + "</text>\n";
    }

    std::string finish() { return body_ + "</svg>\n"; }

   private:
    std::string body_;
};

struct Axis {
    double lo = 0, hi = 1;
    double to_px(double v) const { return kTop + (1.0 - (v - lo) / (hi - lo)) * kPlotH; }
};

void draw_frame(SvgDoc& doc, const std::string& title, const std::string& y_label,
                const Axis& axis) {
    doc.text(kWidth / 2, kTop - 18, title, 14);
    doc.line(kLeft, kTop, kLeft, kTop + kPlotH, "#333333");
    doc.line(kLeft, kTop + kPlotH, kLeft + kPlotW, kTop + kPlotH, "#333333");
    for (int i = 0; i <= 4; ++i) {
        double v = axis.lo + (axis.hi - axis.lo) * i / 4.0;
        double y = axis.to_px(v);
        doc.line(kLeft - 4, y, kLeft, y, "#333333");
        doc.line(kLeft, y, kLeft + kPlotW, y, "#e0e0e0", 0.5);
        doc.text(kLeft - 8, y + 3.5, fmt_tick(v), 10, "end");
    }
    if (!y_label.empty()) doc.text(16, kTop + kPlotH / 2, y_label, 11, "middle", -90.0);
}

void draw_legend(SvgDoc& doc, const std::vector<std::string>& names) {
    double x = kLeft + kPlotW - 8;
    for (std::size_t i = names.size(); i-- > 0;) {
        double w = 10.0 + 6.5 * names[i].size() + 14;
        x -= w;
        doc.rect(x, kTop + 4, 10, 10, series_color(i));
        doc.text(x + 14, kTop + 13, names[i], 10, "start");
    }
}

}  // namespace

std::string svg_grouped_bars(const std::string& title, const std::string& y_label,
                             const std::vector<std::string>& groups,
                             const std::vector<BarSeries>& series, double y_min, double y_max) {
    for (const auto& s : series) {
        if (s.values.size() != groups.size() || (!s.sd.empty() && s.sd.size() != groups.size()))
            throw InvalidInput("bar series length does not match group count");
    }
    if (!(y_max > y_min)) throw InvalidInput("bar chart needs y_max > y_min");

    SvgDoc doc;
    Axis axis{y_min, y_max};
    draw_frame(doc, title, y_label, axis);

    const std::size_t n = groups.size(), m = std::max<std::size_t>(series.size(), 1);
    const double slot = kPlotW / std::max<std::size_t>(n, 1);
    const double bar_w = slot * 0.8 / m;
    const double zero_px = axis.to_px(std::clamp(0.0, y_min, y_max));
    for (std::size_t g = 0; g < n; ++g) {
        double gx = kLeft + g * slot;
        for (std::size_t s = 0; s < series.size(); ++s) {
            double v = series[s].values[g];
            if (std::isnan(v)) continue;
            double vp = axis.to_px(std::clamp(v, y_min, y_max));
            double x = gx + slot * 0.1 + s * bar_w;
            doc.rect(x, std::min(vp, zero_px), bar_w * 0.92, std::abs(vp - zero_px),
                     series_color(s));
            if (!series[s].sd.empty() && series[s].sd[g] > 0) {
                double cx = x + bar_w * 0.46;
                double lo = axis.to_px(std::clamp(v - series[s].sd[g], y_min, y_max));
                double hi = axis.to_px(std::clamp(v + series[s].sd[g], y_min, y_max));
                doc.line(cx, lo, cx, hi, "#333333");
                doc.line(cx - 3, lo, cx + 3, lo, "#333333");
                doc.line(cx - 3, hi, cx + 3, hi, "#333333");
            }
        }
        double rotate = n > 8 ? -35.0 : 0.0;
        doc.text(gx + slot / 2, kTop + kPlotH + 16, groups[g], 10,
                 rotate == 0.0 ? "middle" : "end", rotate);
    }

    std::vector<std::string> names;
    for (const auto& s : series) names.push_back(s.name);
    draw_legend(doc, names);
    return doc.finish();
}

std::string svg_histogram(const std::string& title, const std::string& x_label,
                          const std::vector<double>& values, int bins) {
    if (bins < 1) throw InvalidInput("histogram needs at least one bin");
    SvgDoc doc;
    if (values.empty()) {
        doc.text(kWidth / 2, kHeight / 2, "no data", 14);
        doc.text(kWidth / 2, kTop - 18, title, 14);
        return doc.finish();
    }
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (hi <= lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    double pad = (hi - lo) * 0.05;
    lo -= pad;
    hi += pad;
    std::vector<int> counts(std::size_t(bins), 0);
    for (double v : values) {
        int b = int((v - lo) / (hi - lo) * bins);
        counts[std::size_t(std::clamp(b, 0, bins - 1))]++;
    }
    int cmax = *std::max_element(counts.begin(), counts.end());

    Axis axis{0.0, double(cmax) * 1.1};
    draw_frame(doc, title, "count", axis);
    double bw = kPlotW / bins;
    for (int b = 0; b < bins; ++b) {
        double y = axis.to_px(counts[std::size_t(b)]);
        doc.rect(kLeft + b * bw + 1, y, bw - 2, kTop + kPlotH - y, series_color(0));
    }
    for (int i = 0; i <= 4; ++i) {
        double v = lo + (hi - lo) * i / 4.0;
        double x = kLeft + kPlotW * i / 4.0;
        doc.line(x, kTop + kPlotH, x, kTop + kPlotH + 4, "#333333");
        doc.text(x, kTop + kPlotH + 16, fmt_tick(v), 10);
    }
    doc.text(kLeft + kPlotW / 2, kHeight - 16, x_label, 11);
    return doc.finish();
}

std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<ScatterPoints>& series,
                        bool identity_line) {
    SvgDoc doc;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : series) {
        if (s.xs.size() != s.ys.size()) throw InvalidInput("scatter series length mismatch");
        for (double v : s.xs) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (double v : s.ys) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(hi > lo)) {
        lo = std::isfinite(lo) ? lo - 0.5 : 0.0;
        hi = lo + 1.0;
    }
    double pad = (hi - lo) * 0.05;
    lo -= pad;
    hi += pad;

    Axis axis{lo, hi};
    draw_frame(doc, title, y_label, axis);
    auto x_px = [&](double v) { return kLeft + (v - lo) / (hi - lo) * kPlotW; };
    for (int i = 0; i <= 4; ++i) {
        double v = lo + (hi - lo) * i / 4.0;
        doc.line(x_px(v), kTop + kPlotH, x_px(v), kTop + kPlotH + 4, "#333333");
        doc.text(x_px(v), kTop + kPlotH + 16, fmt_tick(v), 10);
    }
    if (identity_line)
        doc.line(x_px(lo), axis.to_px(lo), x_px(hi), axis.to_px(hi), "#999999", 1.0, true);
    for (std::size_t s = 0; s < series.size(); ++s)
        for (std::size_t i = 0; i < series[s].xs.size(); ++i)
            doc.circle(x_px(series[s].xs[i]), axis.to_px(series[s].ys[i]), 3.2, series_color(s),
                       0.65);
    doc.text(kLeft + kPlotW / 2, kHeight - 16, x_label, 11);
    std::vector<std::string> names;
    for (const auto& s : series) names.push_back(s.name);
    draw_legend(doc, names);
    return doc.finish();
}

namespace {

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

// PairedTest.cmp holds the fine-tuned series as its first sample, so the
// baseline summary comes from the `b` fields.
void render_summary(const CVReport& report, const std::string& dir,
                    std::vector<std::string>& files) {
    for (const auto& pt : report.paired_tests) {
        BarSeries base{"baseline", {pt.cmp.mean_b}, {pt.cmp.sd_b}};
        BarSeries tuned{"fine-tuned", {pt.cmp.mean_a}, {pt.cmp.sd_a}};
        double top = std::max(pt.cmp.mean_a + pt.cmp.sd_a, pt.cmp.mean_b + pt.cmp.sd_b);
        double bottom = std::min({0.0, pt.cmp.mean_a - pt.cmp.sd_a, pt.cmp.mean_b - pt.cmp.sd_b});
        double y_max = top <= 1.0 && bottom >= 0.0 ? 1.0 : top + 0.1 * (top - bottom + 1e-9);
        std::string svg = svg_grouped_bars(
            "mean " + pt.metric + " per repeat (p=" + fmt_tick(pt.cmp.wilcoxon_p) + ")",
            pt.metric, {pt.metric}, {base, tuned}, bottom, y_max);
        std::string name = "summary_" + pt.metric + ".svg";
        write_file(dir + "/" + name, svg);
        files.push_back(name);
    }
}

void render_per_class(const CVReport& report, const std::string& dir,
                      std::vector<std::string>& files) {
    if (report.classes <= 0) return;
    auto per_class = [&](const std::vector<long long>& counts) {
        std::vector<double> acc;
        for (int t = 0; t < report.classes; ++t) {
            long long row = 0, diag = 0;
            for (int p = 0; p < report.classes; ++p) {
                row += counts[std::size_t(t) * report.classes + p];
                if (p == t) diag = counts[std::size_t(t) * report.classes + p];
            }
            acc.push_back(row > 0 ? double(diag) / double(row) : 0.0);
        }
        return acc;
    };
    BarSeries a{"baseline", per_class(report.confusion_a), {}};
    BarSeries b{"fine-tuned", per_class(report.confusion_b), {}};
    std::string svg = svg_grouped_bars("per-class accuracy (pooled over repeats)", "accuracy",
                                       report.class_names, {a, b}, 0.0, 1.0);
    write_file(dir + "/per_class_accuracy.svg", svg);
    files.push_back("per_class_accuracy.svg");
}

void render_gene_bars(const CVReport& report, const std::string& dir,
                      std::vector<std::string>& files) {
    if (report.genes.empty()) return;
    const bool has_corr =
        std::any_of(report.genes.begin(), report.genes.end(),
                    [](const GeneRow& g) { return g.corr_a || g.corr_b; });
    const bool has_auc = std::any_of(report.genes.begin(), report.genes.end(),
                                     [](const GeneRow& g) { return g.auc_a || g.auc_b; });
    std::vector<std::string> names;
    for (const auto& g : report.genes) names.push_back(g.gene);

    if (has_corr) {
        BarSeries a{"baseline", {}, {}}, b{"fine-tuned", {}, {}};
        std::vector<double> delta;
        for (const auto& g : report.genes) {
            a.values.push_back(g.corr_a ? *g.corr_a : nan_value());
            b.values.push_back(g.corr_b ? *g.corr_b : nan_value());
            if (g.corr_a && g.corr_b) delta.push_back(*g.corr_b - *g.corr_a);
        }
        write_file(dir + "/correlation_by_gene.svg",
                   svg_grouped_bars("observed vs predicted correlation by gene", "pearson r",
                                    names, {a, b}, -1.0, 1.0));
        files.push_back("correlation_by_gene.svg");
        write_file(dir + "/correlation_delta.svg",
                   svg_histogram("correlation improvement per gene", "r (fine-tuned) - r (baseline)",
                                 delta, 10));
        files.push_back("correlation_delta.svg");
    }
    if (has_auc) {
        BarSeries a{"baseline", {}, {}}, b{"fine-tuned", {}, {}};
        for (const auto& g : report.genes) {
            a.values.push_back(g.auc_a ? *g.auc_a : nan_value());
            b.values.push_back(g.auc_b ? *g.auc_b : nan_value());
        }
        write_file(dir + "/auc_by_gene.svg",
                   svg_grouped_bars("mutation status AUC by gene", "auc", names, {a, b}, 0.0,
                                    1.0));
        files.push_back("auc_by_gene.svg");
    }
}

void render_scatters(const CVReport& report, const std::string& dir,
                     std::vector<std::string>& files) {
    std::map<std::string, std::vector<const ScatterSeries*>> by_gene;
    for (const auto& s : report.scatters) by_gene[s.gene].push_back(&s);
    for (const auto& [gene, parts] : by_gene) {
        std::vector<ScatterPoints> pts;
        for (const ScatterSeries* s : parts)
            pts.push_back({s->extractor == "a" ? "baseline" : "fine-tuned", s->observed,
                           s->predicted});
        write_file(dir + "/scatter_" + gene + ".svg",
                   svg_scatter("observed vs predicted: " + gene, "observed", "predicted", pts,
                               true));
        files.push_back("scatter_" + gene + ".svg");
    }
}

}  // namespace

std::vector<std::string> render_report_plots(const CVReport& report, const std::string& dir) {
    std::vector<std::string> files;
    render_summary(report, dir, files);
    render_per_class(report, dir, files);
    render_gene_bars(report, dir, files);
    render_scatters(report, dir, files);
    return files;
}

}  // namespace histofeat
