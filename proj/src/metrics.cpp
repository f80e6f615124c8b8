#include "histofeat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "histofeat/common.hpp"
#include "histofeat/stats.hpp"

namespace histofeat {

ConfusionResult accuracy_and_confusion(const std::vector<int>& pred, const std::vector<int>& truth,
                                       int classes) {
    if (pred.empty()) throw InvalidInput("empty predictions");
    if (pred.size() != truth.size()) throw InvalidInput("pred and truth lengths differ");
    if (classes < 1) throw InvalidInput("need at least one class");
    ConfusionResult r;
    r.classes = classes;
    r.counts.assign(std::size_t(classes) * classes, 0);
    long long hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || pred[i] >= classes || truth[i] < 0 || truth[i] >= classes)
            throw InvalidInput("class index out of range");
        ++r.counts[std::size_t(truth[i]) * classes + pred[i]];
        hits += pred[i] == truth[i] ? 1 : 0;
    }
    r.accuracy = double(hits) / double(pred.size());
    r.per_class_accuracy.assign(std::size_t(classes), 0.0);
    for (int c = 0; c < classes; ++c) {
        long long row = 0;
        for (int p = 0; p < classes; ++p) row += r.at(c, p);
        if (row > 0) r.per_class_accuracy[std::size_t(c)] = double(r.at(c, c)) / double(row);
    }
    return r;
}

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw InvalidInput("pearson inputs differ in length");
    if (a.size() < 2) throw InvalidInput("pearson needs at least 2 points");
    const double ma = mean(a), mb = mean(b);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
    double r = sab / std::sqrt(saa * sbb);
    return std::min(1.0, std::max(-1.0, r));
}

double correlation_p_value(double r, std::size_t n) {
    if (n < 4) throw InvalidInput("correlation p-value needs n >= 4");
    if (!(r >= -1.0 && r <= 1.0)) throw InvalidInput("correlation out of [-1,1]");
    if (std::abs(r) >= 1.0) return 0.0;
    const double df = double(n - 2);
    const double t = r * std::sqrt(df / (1.0 - r * r));
    return student_t_two_sided(t, df);
}

std::optional<double> auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw InvalidInput("auc inputs differ in length");
    if (scores.empty()) throw InvalidInput("auc needs data");
    std::size_t pos = 0, neg = 0;
    for (int l : labels) {
        if (l == 1)
            ++pos;
        else if (l == 0)
            ++neg;
        else
            throw InvalidInput("auc labels must be 0/1");
    }
    if (pos == 0 || neg == 0) return std::nullopt;

    // Midranks; rank sums stay exact in doubles (integers or halves).
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return scores[x] < scores[y]; });
    std::vector<double> rank(scores.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid = (double(i + 1) + double(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
        i = j + 1;
    }
    double rank_sum_pos = 0.0;
    for (std::size_t t = 0; t < labels.size(); ++t)
        if (labels[t] == 1) rank_sum_pos += rank[t];
    const double u = rank_sum_pos - double(pos) * double(pos + 1) / 2.0;
    return u / (double(pos) * double(neg));
}

GeneCounts count_improved_genes(const std::vector<std::optional<double>>& corr_a,
                                const std::vector<std::optional<double>>& corr_b,
                                const std::vector<std::optional<double>>& p_b, double alpha) {
    if (corr_a.size() != corr_b.size() || corr_a.size() != p_b.size())
        throw InvalidInput("gene vectors differ in length");
    GeneCounts out;
    for (std::size_t g = 0; g < corr_b.size(); ++g) {
        if (!p_b[g] || !corr_b[g] || !(*p_b[g] < alpha)) continue;
        ++out.n_significant;
        if (!corr_a[g] || *corr_b[g] > *corr_a[g]) ++out.n_improved;
    }
    return out;
}

}  // namespace histofeat
