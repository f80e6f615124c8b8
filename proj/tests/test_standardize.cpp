#include <doctest.h>

#include <cmath>
#include <vector>

#include "histofeat/standardize.hpp"

using namespace histofeat;

TEST_CASE("fit centers and scales with the 1/N convention") {
    DMatrix X(4, 2);
    // Column 0: {1,3,1,3} -> mean 2, population sd 1.
    // Column 1: {0,0,6,6} -> mean 3, population sd 3.
    X.at(0, 0) = 1;
    X.at(1, 0) = 3;
    X.at(2, 0) = 1;
    X.at(3, 0) = 3;
    X.at(2, 1) = 6;
    X.at(3, 1) = 6;

    Standardizer s = Standardizer::fit(X);
    CHECK(s.mean[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.sd[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.mean[1] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(s.sd[1] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK_FALSE(s.constant[0]);
    CHECK_FALSE(s.constant[1]);

    DMatrix Z = s.transform(X);
    CHECK(Z.at(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(Z.at(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(Z.at(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(Z.at(2, 1) == doctest::Approx(1.0).epsilon(1e-15));

    // Transformed columns have mean 0 and population variance 1.
    for (std::size_t c = 0; c < 2; ++c) {
        double sum = 0, sq = 0;
        for (std::size_t r = 0; r < 4; ++r) {
            sum += Z.at(r, c);
            sq += Z.at(r, c) * Z.at(r, c);
        }
        CHECK(sum == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(sq / 4.0 == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("duplicating rows leaves the fit unchanged") {
    DMatrix X(3, 1);
    X.at(0, 0) = 1.0;
    X.at(1, 0) = 5.0;
    X.at(2, 0) = 6.0;
    DMatrix XX(6, 1);
    for (int i = 0; i < 6; ++i) XX.at(i, 0) = X.at(i % 3, 0);

    Standardizer a = Standardizer::fit(X);
    Standardizer b = Standardizer::fit(XX);
    CHECK(a.mean[0] == doctest::Approx(b.mean[0]).epsilon(1e-15));
    CHECK(a.sd[0] == doctest::Approx(b.sd[0]).epsilon(1e-15));
}

TEST_CASE("constant features map to exactly zero") {
    DMatrix X(3, 2);
    for (int r = 0; r < 3; ++r) {
        X.at(r, 0) = 7.5;
        X.at(r, 1) = r;
    }
    Standardizer s = Standardizer::fit(X);
    CHECK(bool(s.constant[0]));
    CHECK_FALSE(bool(s.constant[1]));
    CHECK(s.sd[0] == 1.0);

    // Even unseen values collapse to zero on a constant column.
    DMatrix Y(1, 2);
    Y.at(0, 0) = 123.0;
    Y.at(0, 1) = 1.0;
    DMatrix Z = s.transform(Y);
    CHECK(Z.at(0, 0) == 0.0);
    CHECK(Z.at(0, 1) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("dmatrix conversion and row gathering") {
    FeatureMatrix fm;
    fm.ids = {"a", "b", "c"};
    fm.dim = 2;
    fm.values = {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f};
    DMatrix X = to_dmatrix(fm);
    CHECK(X.rows == 3);
    CHECK(X.cols == 2);
    CHECK(X.at(1, 1) == 4.0);

    DMatrix G = gather_rows(X, {2, 0});
    CHECK(G.rows == 2);
    CHECK(G.at(0, 0) == 5.0);
    CHECK(G.at(1, 1) == 2.0);
}
