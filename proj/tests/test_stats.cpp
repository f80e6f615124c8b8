#include <doctest.h>

#include <cmath>
#include <vector>

#include "histofeat/stats.hpp"

using namespace histofeat;

TEST_CASE("percentile interpolates between order statistics") {
    std::vector<double> v{1.0, 2.0, 3.0};
    CHECK(percentile_sorted(v, 0.0) == 1.0);
    CHECK(percentile_sorted(v, 50.0) == 2.0);
    CHECK(percentile_sorted(v, 100.0) == 3.0);
    CHECK(percentile_sorted(v, 25.0) == doctest::Approx(1.5).epsilon(1e-15));

    std::vector<double> two{1.0, 2.0};
    CHECK(percentile_sorted(two, 50.0) == doctest::Approx(1.5).epsilon(1e-15));

    std::vector<double> one{5.0};
    CHECK(percentile_sorted(one, 0.0) == 5.0);
    CHECK(percentile_sorted(one, 73.0) == 5.0);

    // idx = p/100 * (n-1): p=25 over 4 points lands at 0.75 between 1 and 2.
    std::vector<double> four{1.0, 2.0, 3.0, 4.0};
    CHECK(percentile_sorted(four, 25.0) == doctest::Approx(1.75).epsilon(1e-15));
}

TEST_CASE("mean and sample sd") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(mean(v) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(sample_sd(v) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
    CHECK(sample_sd({7.0}) == 0.0);
    CHECK(sample_sd({2.0, 2.0, 2.0}) == 0.0);
}

TEST_CASE("student t two-sided tails match closed forms") {
    // df=1 is a Cauchy: P(|T| > 1) = 1/2 exactly.
    CHECK(student_t_two_sided(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    // df=2: F(t) = 1/2 + t / (2*sqrt(2+t^2)); at t=sqrt(2) the two-sided
    // tail is 1 - 1/sqrt(2).
    CHECK(student_t_two_sided(std::sqrt(2.0), 2.0) ==
          doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(student_t_two_sided(0.0, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
    // Symmetry in the sign of t.
    CHECK(student_t_two_sided(-2.25, 7.0) ==
          doctest::Approx(student_t_two_sided(2.25, 7.0)).epsilon(1e-14));
    // Large |t| drives the tail toward zero.
    CHECK(student_t_two_sided(50.0, 10.0) < 1e-10);
}

TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
    CHECK(normal_cdf(-1.96) == doctest::Approx(1.0 - 0.9750021048517795).epsilon(1e-10));
}

TEST_CASE("regularized incomplete beta closed forms") {
    for (double x : {0.1, 0.35, 0.8}) {
        CHECK(reg_incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-12));
        CHECK(reg_incomplete_beta(2.0, 1.0, x) == doctest::Approx(x * x).epsilon(1e-12));
        CHECK(reg_incomplete_beta(1.0, 2.0, x) ==
              doctest::Approx(1.0 - (1.0 - x) * (1.0 - x)).epsilon(1e-12));
    }
    CHECK(reg_incomplete_beta(3.0, 4.0, 0.0) == 0.0);
    CHECK(reg_incomplete_beta(3.0, 4.0, 1.0) == 1.0);
}

TEST_CASE("ks distance over count histograms") {
    std::vector<std::uint64_t> a{10, 10}, b{10, 10};
    CHECK(ks_distance(a, b) == 0.0);

    std::vector<std::uint64_t> c{20, 0}, d{0, 20};
    CHECK(ks_distance(c, d) == doctest::Approx(1.0).epsilon(1e-15));

    std::vector<std::uint64_t> e{1, 1}, f{0, 2};
    CHECK(ks_distance(e, f) == doctest::Approx(0.5).epsilon(1e-15));
}
