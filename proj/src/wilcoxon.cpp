#include "histofeat/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "histofeat/common.hpp"
#include "histofeat/stats.hpp"

namespace histofeat {

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs) {
    std::vector<double> d;
    for (double v : diffs)
        if (v != 0.0) d.push_back(v);

    WilcoxonResult res;
    res.n_nonzero = int(d.size());
    if (d.empty()) {
        res.p = 1.0;
        res.exact = true;
        return res;
    }
    const std::size_t n = d.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return std::abs(d[x]) < std::abs(d[y]); });
    std::vector<double> rank(n);
    std::vector<std::size_t> tie_sizes;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
        const double mid = (double(i + 1) + double(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
        tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }
    double w_plus = 0.0;
    for (std::size_t t = 0; t < n; ++t)
        if (d[t] > 0.0) w_plus += rank[t];
    res.w_plus = w_plus;

    if (n <= 25) {
        // Doubled midranks are integers, so the null distribution of 2*W+ is a
        // subset-sum count over them; the 2^n total weight stays exact in
        // doubles for n <= 25.
        std::vector<long long> r2(n);
        long long total = 0;
        for (std::size_t t = 0; t < n; ++t) {
            r2[t] = llround(2.0 * rank[t]);
            total += r2[t];
        }
        std::vector<double> count(std::size_t(total) + 1, 0.0);
        count[0] = 1.0;
        for (std::size_t t = 0; t < n; ++t)
            for (long long s = total; s >= r2[t]; --s)
                count[std::size_t(s)] += count[std::size_t(s - r2[t])];
        const long long w2 = llround(2.0 * w_plus);
        double below = 0.0, above = 0.0;
        for (long long s = 0; s <= total; ++s) {
            if (s <= w2) below += count[std::size_t(s)];
            if (s >= w2) above += count[std::size_t(s)];
        }
        const double denom = std::pow(2.0, double(n));
        res.p = std::min(1.0, 2.0 * std::min(below, above) / denom);
        res.exact = true;
        return res;
    }

    const double nn = double(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    double tie_term = 0.0;
    for (std::size_t t : tie_sizes) {
        const double tt = double(t);
        tie_term += tt * tt * tt - tt;
    }
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    if (!(var > 0.0)) {
        res.p = 1.0;
        return res;
    }
    const double z = (std::abs(w_plus - mu) - 0.5) / std::sqrt(var);
    res.p = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::max(z, 0.0))));
    return res;
}

PairedComparison paired_compare(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw InvalidInput("paired series differ in length");
    if (a.size() < 6) throw InvalidInput("paired comparison needs at least 6 pairs");
    PairedComparison out;
    out.n = int(a.size());
    out.mean_a = mean(a);
    out.mean_b = mean(b);
    out.sd_a = sample_sd(a);
    out.sd_b = sample_sd(b);

    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    out.mean_diff = mean(d);

    const auto w = wilcoxon_signed_rank(d);
    out.wilcoxon_w = w.w_plus;
    out.wilcoxon_p = w.p;

    const double sd = sample_sd(d);
    if (sd > 0.0) {
        out.t_statistic = out.mean_diff / (sd / std::sqrt(double(d.size())));
        out.t_p = student_t_two_sided(out.t_statistic, double(d.size() - 1));
    } else {
        out.t_statistic = 0.0;
        out.t_p = out.mean_diff == 0.0 ? 1.0 : 0.0;
    }
    return out;
}

}  // namespace histofeat
