#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "histofeat/rng.hpp"

using namespace histofeat;

TEST_CASE("splitmix64 matches the reference vector") {
    // First output of the reference splitmix64 stream seeded with 0.
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("rng streams are reproducible") {
    Rng a(42), b(42);
    for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(43);
    Rng d(42);
    bool all_equal = true;
    for (int i = 0; i < 16; ++i) all_equal &= (c.next_u64() == d.next_u64());
    CHECK_FALSE(all_equal);
}

TEST_CASE("uniform stays in range") {
    Rng r(7);
    for (int i = 0; i < 2000; ++i) {
        double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 2000; ++i) {
        double u = r.uniform(-2.5, 3.5);
        CHECK(u >= -2.5);
        CHECK(u < 3.5);
    }
}

TEST_CASE("below is bounded and covers small ranges") {
    Rng r(11);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 500; ++i) {
        std::uint64_t v = r.below(5);
        CHECK(v < 5);
        seen.insert(v);
    }
    CHECK(seen.size() == 5);
    for (int i = 0; i < 20; ++i) CHECK(r.below(1) == 0);
}

TEST_CASE("normal has roughly standard moments") {
    Rng r(3);
    const int n = 40000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = r.normal();
        sum += v;
        sq += v * v;
    }
    double m = sum / n;
    double var = sq / n - m * m;
    CHECK(std::abs(m) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);

    Rng r2(3);
    double shifted = r2.normal(10.0, 2.0);
    Rng r3(3);
    CHECK(shifted == doctest::Approx(10.0 + 2.0 * r3.normal()).epsilon(1e-15));
}

TEST_CASE("shuffle permutes deterministically") {
    std::vector<int> v(20);
    for (int i = 0; i < 20; ++i) v[i] = i;
    std::vector<int> w = v;

    Rng a(99);
    a.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == w);

    std::vector<int> v2 = w;
    Rng b(99);
    b.shuffle(v2);
    CHECK(v == v2);
}

TEST_CASE("derive_seed separates streams") {
    const std::uint64_t s = 1234;
    CHECK(derive_seed(s, "alpha") != derive_seed(s, "beta"));
    CHECK(derive_seed(s, "alpha", 0) != derive_seed(s, "alpha", 1));
    CHECK(derive_seed(s, "alpha") != derive_seed(s + 1, "alpha"));

    // The (tag, index) overload is the composition of the single-tag overloads.
    CHECK(derive_seed(s, "alpha", 7) == derive_seed(derive_seed(s, "alpha"), std::uint64_t(7)));
    CHECK(derive_seed(s, std::uint64_t(3), std::uint64_t(4)) ==
          derive_seed(derive_seed(s, std::uint64_t(3)), std::uint64_t(4)));

    // String tags go through FNV-1a.
    CHECK(derive_seed(s, "alpha") == derive_seed(s, tag_hash("alpha")));
}
