#pragma once

#include <vector>

namespace histofeat {

struct WilcoxonResult {
    double w_plus = 0.0;  // sum of midranks of positive differences
    double p = 1.0;       // two-sided
    int n_nonzero = 0;
    bool exact = false;
};

// Signed-rank test on paired differences.  Zeros are dropped, |d| midranked.
// n <= 25 uses the exact null (tie-aware, via the doubled-rank subset-sum
// distribution); larger n uses the normal approximation with continuity and
// tie corrections.  All differences zero gives p = 1.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs);

struct PairedComparison {
    double mean_a = 0.0, mean_b = 0.0;
    double sd_a = 0.0, sd_b = 0.0;
    double mean_diff = 0.0;  // mean(a - b)
    double wilcoxon_w = 0.0;
    double wilcoxon_p = 1.0;
    double t_statistic = 0.0;
    double t_p = 1.0;
    int n = 0;
};

// Wilcoxon signed-rank plus a paired t-test over the same series.
PairedComparison paired_compare(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace histofeat
