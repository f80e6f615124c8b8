#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace histofeat {

// p-th percentile (p in [0,100]) with linear interpolation between order
// statistics. `sorted` must be ascending and nonempty.
double percentile_sorted(const std::vector<double>& sorted, double p);

double mean(const std::vector<double>& v);
// Sample standard deviation (n-1 denominator); 0 for n < 2.
double sample_sd(const std::vector<double>& v);

// Regularized incomplete beta I_x(a, b).
double reg_incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

// Standard normal CDF.
double normal_cdf(double z);

// Kolmogorov-Smirnov distance between two discrete distributions given as
// counts over the same bins: max |CDF1 - CDF2|.
double ks_distance(const std::vector<std::uint64_t>& h1, const std::vector<std::uint64_t>& h2);

}  // namespace histofeat
