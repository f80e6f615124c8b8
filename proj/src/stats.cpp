#include "histofeat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "histofeat/common.hpp"

namespace histofeat {

double percentile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw InvalidInput("percentile of empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 100.0) return sorted.back();
    double idx = p / 100.0 * double(sorted.size() - 1);
    std::size_t lo = std::size_t(idx);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = idx - double(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw InvalidInput("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size() - 1));
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
    const int max_iter = 300;
    const double eps = 3e-16;
    const double fpmin = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double reg_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                   a * std::log(x) + b * std::log1p(-x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * betacf(a, b, x) / a;
    }
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
    if (df <= 0.0) throw InvalidInput("t test requires positive degrees of freedom");
    if (std::isinf(t)) return 0.0;
    double x = df / (df + t * t);
    double p = reg_incomplete_beta(df / 2.0, 0.5, x);
    return std::min(1.0, std::max(0.0, p));
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / 1.4142135623730950488);
}

double ks_distance(const std::vector<std::uint64_t>& h1, const std::vector<std::uint64_t>& h2) {
    if (h1.size() != h2.size()) throw InvalidInput("KS distance over mismatched histograms");
    std::uint64_t n1 = 0, n2 = 0;
    for (auto c : h1) n1 += c;
    for (auto c : h2) n2 += c;
    if (n1 == 0 || n2 == 0) throw InvalidInput("KS distance over empty histogram");
    double c1 = 0.0, c2 = 0.0, d = 0.0;
    for (std::size_t i = 0; i < h1.size(); ++i) {
        c1 += double(h1[i]) / double(n1);
        c2 += double(h2[i]) / double(n2);
        d = std::max(d, std::fabs(c1 - c2));
    }
    return d;
}

}  // namespace histofeat
