#include <doctest.h>

#include <cmath>
#include <vector>

#include "histofeat/lasso.hpp"
#include "histofeat/rng.hpp"

using namespace histofeat;

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

// Mean-zero columns with (1/N) X'X = I, built by Gram-Schmidt and scaled to
// norm sqrt(N).  Under this design the lasso solution is the soft-thresholded
// per-column correlation, in closed form.
DMatrix orthonormal_design(std::size_t n, std::size_t p, std::uint64_t seed) {
    DMatrix X(n, p);
    Rng rng(seed);
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> col(n);
        for (auto& v : col) v = rng.normal();
        double m = 0;
        for (double v : col) m += v;
        m /= double(n);
        for (auto& v : col) v -= m;
        for (std::size_t k = 0; k < j; ++k) {
            double dot = 0;
            for (std::size_t i = 0; i < n; ++i) dot += col[i] * X.at(i, k);
            dot /= double(n);  // previous columns have squared norm N
            for (std::size_t i = 0; i < n; ++i) col[i] -= dot * X.at(i, k);
        }
        double norm = 0;
        for (double v : col) norm += v * v;
        norm = std::sqrt(norm / double(n));
        for (std::size_t i = 0; i < n; ++i) X.at(i, j) = col[i] / norm;
    }
    return X;
}

std::vector<double> closed_form(const DMatrix& X, const std::vector<double>& y, double lambda) {
    const std::size_t n = X.rows, p = X.cols;
    double ybar = 0;
    for (double v : y) ybar += v;
    ybar /= double(n);
    std::vector<double> w(p);
    for (std::size_t j = 0; j < p; ++j) {
        double z = 0;
        for (std::size_t i = 0; i < n; ++i) z += X.at(i, j) * (y[i] - ybar);
        w[j] = soft_threshold(z / double(n), lambda);
    }
    return w;
}

}  // namespace

TEST_CASE("orthonormal designs hit the soft-threshold closed form") {
    const std::size_t n = 16, p = 4;
    DMatrix X = orthonormal_design(n, p, 3);
    Rng rng(9);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.normal(1.0, 2.0);

    for (double lambda : {0.0, 0.05, 0.3, 1.0}) {
        LinearModel fit = lasso_fit_fixed(X, y, LassoFamily::Linear, lambda);
        auto expect = closed_form(X, y, lambda);
        REQUIRE(fit.weights.size() == p);
        for (std::size_t j = 0; j < p; ++j)
            CHECK(fit.weights[j] == doctest::Approx(expect[j]).epsilon(1e-8));
    }
}

TEST_CASE("lambda at or above lambda_max zeroes every weight") {
    const std::size_t n = 20, p = 5;
    DMatrix X = orthonormal_design(n, p, 7);
    Rng rng(13);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.normal(0.0, 1.5);

    auto grid = lasso_lambda_grid(X, y, LassoFamily::Linear);
    REQUIRE(grid.size() == 50);
    CHECK(grid.front() > grid.back());  // descending
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] < grid[i - 1]);

    LinearModel at_max = lasso_fit_fixed(X, y, LassoFamily::Linear, grid.front());
    for (double w : at_max.weights) CHECK(std::abs(w) <= 1e-12);
    LinearModel above = lasso_fit_fixed(X, y, LassoFamily::Linear, grid.front() * 2.0);
    for (double w : above.weights) CHECK(std::abs(w) <= 1e-12);
}

TEST_CASE("unpenalized fit matches the normal equations") {
    // Small correlated design; solve X'X w = X'y directly for reference.
    const std::size_t n = 30, p = 3;
    Rng rng(5);
    DMatrix X(n, p);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        X.at(i, 0) = rng.normal();
        X.at(i, 1) = 0.5 * X.at(i, 0) + rng.normal();
        X.at(i, 2) = rng.normal() - 0.3 * X.at(i, 1);
        y[i] = 1.5 * X.at(i, 0) - 2.0 * X.at(i, 2) + 0.7 + 0.1 * rng.normal();
    }
    // Center columns and y so the intercept separates cleanly.
    std::vector<double> mu(p, 0.0);
    double ybar = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) mu[j] += X.at(i, j);
        ybar += y[i];
    }
    for (auto& v : mu) v /= double(n);
    ybar /= double(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) X.at(i, j) -= mu[j];

    // Dense 3x3 solve.
    double A[3][3] = {};
    double b[3] = {};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < p; ++r) {
            b[r] += X.at(i, r) * (y[i] - ybar);
            for (std::size_t c = 0; c < p; ++c) A[r][c] += X.at(i, r) * X.at(i, c);
        }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            for (int c = 0; c < 3; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    double ref[3];
    for (int r = 0; r < 3; ++r) ref[r] = b[r] / A[r][r];

    LinearModel fit = lasso_fit_fixed(X, y, LassoFamily::Linear, 0.0);
    for (std::size_t j = 0; j < p; ++j)
        CHECK(fit.weights[j] == doctest::Approx(ref[j]).epsilon(1e-6));
    CHECK(fit.bias == doctest::Approx(ybar).epsilon(1e-8));
}

TEST_CASE("logistic family separates a one-dimensional problem") {
    const std::size_t n = 24;
    DMatrix X(n, 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        X.at(i, 0) = (i < n / 2) ? -1.0 - 0.05 * double(i) : 1.0 + 0.05 * double(i);
        y[i] = (i < n / 2) ? 0.0 : 1.0;
    }
    LinearModel fit = lasso_fit_fixed(X, y, LassoFamily::Logistic, 1e-3);
    CHECK(fit.weights[0] > 0.0);
    CHECK(fit.kind == "lasso_logistic");

    LassoModel model;
    model.scaler = Standardizer::fit(X);
    model.lin = lasso_fit_fixed(model.scaler.transform(X), y, LassoFamily::Logistic, 1e-3);
    model.family = LassoFamily::Logistic;
    auto probs = predict_lasso(model, X);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(probs[i] > 0.0);
        CHECK(probs[i] < 1.0);
        CHECK((probs[i] > 0.5) == (y[i] > 0.5));
    }
}

TEST_CASE("cross-validated training picks a lambda and reproduces bitwise") {
    const std::size_t n = 30, p = 4;
    DMatrix X = orthonormal_design(n, p, 19);
    Rng rng(29);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 2.0 * X.at(i, 0) + 0.3 * rng.normal();

    LassoModel a = train_lasso(X, y, LassoFamily::Linear, 77);
    CHECK(a.lambda_grid.size() == 50);
    CHECK(a.cv_scores.size() == 50);
    CHECK(a.lambda > 0.0);
    // The informative feature survives selection.
    CHECK(std::abs(a.lin.weights[0]) > 0.5);

    LassoModel b = train_lasso(X, y, LassoFamily::Linear, 77);
    CHECK(a.lin.weights == b.lin.weights);
    CHECK(a.lambda == b.lambda);
    CHECK(a.cv_scores == b.cv_scores);

    auto j = lasso_json(a);
    CHECK(j["kind"] == "lasso_linear");
    CHECK(j["lambda"] == a.lambda);
}

TEST_CASE("logistic targets must contain both classes") {
    DMatrix X(6, 1);
    for (int i = 0; i < 6; ++i) X.at(i, 0) = i;
    CHECK_THROWS_AS(train_lasso(X, std::vector<double>(6, 1.0), LassoFamily::Logistic, 0),
                    InvalidTarget);
    CHECK_THROWS_AS(train_lasso(X, std::vector<double>(6, 0.0), LassoFamily::Logistic, 0),
                    InvalidTarget);
    CHECK_THROWS_AS(
        train_lasso(X, std::vector<double>{0, 1, 2, 0, 1, 0}, LassoFamily::Logistic, 0),
        InvalidTarget);
    CHECK_THROWS_AS(train_lasso(X, std::vector<double>(2, 0.0), LassoFamily::Linear, 0),
                    ShapeError);
    CHECK_THROWS_AS(lasso_fit_fixed(X, std::vector<double>(6, 0.5), LassoFamily::Linear, -0.1),
                    ConfigError);
}

TEST_CASE("expression transform") {
    auto out = log_transform_expression({8.0, 99.0, 0.0});
    CHECK(out[0] == doctest::Approx(2.1972245773362196).epsilon(1e-12));  // ln 9
    CHECK(out[1] == doctest::Approx(4.605170185988091).epsilon(1e-12));   // ln 100
    CHECK(out[2] == 0.0);
    CHECK_THROWS_AS(log_transform_expression({1.0, -0.5}), InvalidTarget);
}
