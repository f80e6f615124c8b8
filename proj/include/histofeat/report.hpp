#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "histofeat/metrics.hpp"
#include "histofeat/wilcoxon.hpp"

namespace histofeat {

struct FoldMetric {
    int repeat = 0;
    int fold = 0;
    std::string extractor;  // "a" (baseline) or "b" (fine-tuned)
    std::string metric;
    double value = 0.0;
};

struct PairedTest {
    std::string metric;
    PairedComparison cmp;  // a = extractor b series, b = extractor a series,
                           // so mean_diff > 0 means the fine-tuned model wins
};

struct GeneRow {
    std::string gene;
    std::optional<double> corr_a, corr_b;
    std::optional<double> p_a, p_b;
    std::optional<double> auc_a, auc_b;
};

// Observed-vs-predicted points kept for the regression scatter plots so
// reports can be re-rendered without the feature files.
struct ScatterSeries {
    std::string gene;
    std::string extractor;  // "a" or "b"
    std::vector<double> observed;
    std::vector<double> predicted;
};

struct CVReport {
    std::string experiment;  // tissue | expression | mutation
    int k = 0;
    int repeats = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> class_names;

    std::vector<FoldMetric> fold_metrics;
    std::vector<PairedTest> paired_tests;

    // Experiment 1: pooled confusion over all repeats, rows = truth.
    int classes = 0;
    std::vector<long long> confusion_a, confusion_b;

    // Experiments 2-3.
    std::vector<GeneRow> genes;
    GeneCounts improved;
    std::vector<ScatterSeries> scatters;
};

nlohmann::json report_to_json(const CVReport& report);
CVReport report_from_json(const nlohmann::json& j);

void save_report_json(const std::string& path, const CVReport& report);
CVReport load_report_json(const std::string& path);

// One row per repeat x fold x extractor x metric.
void save_report_csv(const std::string& path, const CVReport& report);

// Plot payloads duplicated as CSV so the SVGs are never the only record.
void save_confusion_csv(const std::string& path, const CVReport& report);
void save_gene_csv(const std::string& path, const CVReport& report);
void save_scatter_csv(const std::string& path, const CVReport& report);

// Per-repeat mean of a metric for one extractor (averaged over folds), used
// as the paired-test series.
std::vector<double> per_repeat_means(const CVReport& report, const std::string& extractor,
                                     const std::string& metric);

}  // namespace histofeat
