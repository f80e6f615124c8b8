#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace histofeat {

struct ConfusionResult {
    double accuracy = 0.0;
    int classes = 0;
    std::vector<long long> counts;            // classes x classes, rows = truth
    std::vector<double> per_class_accuracy;   // row-normalized diagonal; NaN-free
                                              // (empty rows report 0)
    long long at(int truth, int pred) const { return counts[std::size_t(truth) * classes + pred]; }
};

ConfusionResult accuracy_and_confusion(const std::vector<int>& pred, const std::vector<int>& truth,
                                       int classes);

// Sample Pearson correlation; nullopt when either vector is constant.
std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b);

// Two-sided p for H0: rho = 0 via t = r*sqrt((n-2)/(1-r^2)) with n-2 dof.
double correlation_p_value(double r, std::size_t n);

// Mann-Whitney AUC: fraction of (positive, negative) pairs ordered correctly,
// ties counted one half; nullopt when only one class is present.
std::optional<double> auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct GeneCounts {
    int n_significant = 0;
    int n_improved = 0;
};

// Restrict to genes significant under extractor b (p_b < alpha with a defined
// corr_b); count those where corr_b > corr_a.  A gene whose corr_a is
// undefined counts as improved: b carries signal where a has none.
GeneCounts count_improved_genes(const std::vector<std::optional<double>>& corr_a,
                                const std::vector<std::optional<double>>& corr_b,
                                const std::vector<std::optional<double>>& p_b, double alpha = 0.05);

}  // namespace histofeat
