#include "histofeat/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "histofeat/common.hpp"
#include "histofeat/rng.hpp"

namespace histofeat {

namespace {

double soft_threshold(double rho, double lambda) {
    if (rho > lambda) return rho - lambda;
    if (rho < -lambda) return rho + lambda;
    return 0.0;
}

double clamp_prob(double p) { return std::min(std::max(p, 1e-5), 1.0 - 1e-5); }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Weighted cyclic coordinate descent for
//   (1/2N) sum v_i (z_i - b - x~w)^2 + lambda * sum |w_j|
// with the intercept unpenalized.  w and b are updated in place.
void weighted_cd(const DMatrix& Xs, const std::vector<double>& z, const std::vector<double>& v,
                 double lambda, std::vector<double>& w, double& b) {
    const std::size_t N = Xs.rows, D = Xs.cols;
    std::vector<double> denom(D, 0.0);
    double vsum = 0.0;
    for (std::size_t i = 0; i < N; ++i) vsum += v[i];
    for (std::size_t j = 0; j < D; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) s += v[i] * Xs.at(i, j) * Xs.at(i, j);
        denom[j] = s / double(N);
    }
    std::vector<double> r(N);
    for (std::size_t i = 0; i < N; ++i) {
        double pred = b;
        for (std::size_t j = 0; j < D; ++j) pred += Xs.at(i, j) * w[j];
        r[i] = z[i] - pred;
    }
    for (int sweep = 0; sweep < 10000; ++sweep) {
        double max_change = 0.0;
        if (vsum > 0.0) {
            double num = 0.0;
            for (std::size_t i = 0; i < N; ++i) num += v[i] * r[i];
            const double db = num / vsum;
            if (db != 0.0) {
                b += db;
                for (std::size_t i = 0; i < N; ++i) r[i] -= db;
                max_change = std::max(max_change, std::abs(db));
            }
        }
        for (std::size_t j = 0; j < D; ++j) {
            if (denom[j] <= 0.0) continue;
            double rho = denom[j] * w[j];
            for (std::size_t i = 0; i < N; ++i) rho += v[i] * Xs.at(i, j) * r[i] / double(N);
            const double wj = soft_threshold(rho, lambda) / denom[j];
            const double dw = wj - w[j];
            if (dw != 0.0) {
                w[j] = wj;
                for (std::size_t i = 0; i < N; ++i) r[i] -= dw * Xs.at(i, j);
                max_change = std::max(max_change, std::abs(dw));
            }
        }
        if (max_change < 1e-10) break;
    }
}

void fit_linear(const DMatrix& Xs, const std::vector<double>& y, double lambda,
                std::vector<double>& w, double& b) {
    std::vector<double> ones(Xs.rows, 1.0);
    weighted_cd(Xs, y, ones, lambda, w, b);
}

void fit_logistic(const DMatrix& Xs, const std::vector<double>& y, double lambda,
                  std::vector<double>& w, double& b) {
    const std::size_t N = Xs.rows, D = Xs.cols;
    std::vector<double> eta(N), v(N), z(N);
    for (int irls = 0; irls < 50; ++irls) {
        for (std::size_t i = 0; i < N; ++i) {
            double s = b;
            for (std::size_t j = 0; j < D; ++j) s += Xs.at(i, j) * w[j];
            eta[i] = s;
            const double p = clamp_prob(sigmoid(s));
            v[i] = p * (1.0 - p);
            z[i] = s + (y[i] - p) / v[i];
        }
        std::vector<double> w_old = w;
        const double b_old = b;
        weighted_cd(Xs, z, v, lambda, w, b);
        double change = std::abs(b - b_old);
        for (std::size_t j = 0; j < D; ++j) change = std::max(change, std::abs(w[j] - w_old[j]));
        if (change < 1e-8) break;
    }
}

double pooled_loss(LassoFamily family, const std::vector<double>& pred,
                   const std::vector<double>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (family == LassoFamily::Linear) {
            const double e = pred[i] - y[i];
            total += e * e;
        } else {
            const double p = clamp_prob(sigmoid(pred[i]));
            total += -2.0 * (y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p));
        }
    }
    return total;
}

}  // namespace

std::vector<double> lasso_lambda_grid(const DMatrix& Xs, const std::vector<double>& y,
                                      LassoFamily family, int points, double decades) {
    (void)family;  // the null-model residual is y - ybar for both families
    const std::size_t N = Xs.rows, D = Xs.cols;
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= double(N);
    double lmax = 0.0;
    for (std::size_t j = 0; j < D; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) s += Xs.at(i, j) * (y[i] - ybar);
        lmax = std::max(lmax, std::abs(s) / double(N));
    }
    if (!(lmax > 0.0)) return {0.0};
    std::vector<double> grid;
    for (int k = 0; k < points; ++k)
        grid.push_back(lmax * std::pow(10.0, -decades * double(k) / double(points - 1)));
    return grid;
}

LinearModel lasso_fit_fixed(const DMatrix& Xs, const std::vector<double>& y, LassoFamily family,
                            double lambda) {
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    std::vector<double> w(Xs.cols, 0.0);
    double b = 0.0;
    if (family == LassoFamily::Logistic) {
        double ybar = 0.0;
        for (double v : y) ybar += v;
        ybar = clamp_prob(ybar / double(Xs.rows));
        b = std::log(ybar / (1.0 - ybar));
        fit_logistic(Xs, y, lambda, w, b);
    } else {
        fit_linear(Xs, y, lambda, w, b);
    }
    LinearModel m;
    m.kind = family == LassoFamily::Linear ? "lasso_linear" : "lasso_logistic";
    m.weights = std::move(w);
    m.bias = b;
    return m;
}

LassoModel train_lasso(const DMatrix& X, const std::vector<double>& y, LassoFamily family,
                       std::uint64_t seed, const std::vector<double>& lambda_grid) {
    if (X.rows < 2) throw InvalidInput("lasso needs at least 2 rows");
    if (y.size() != X.rows) throw ShapeError("targets do not match rows");
    if (family == LassoFamily::Logistic) {
        bool has0 = false, has1 = false;
        for (double v : y) {
            if (v == 0.0)
                has0 = true;
            else if (v == 1.0)
                has1 = true;
            else
                throw InvalidTarget("logistic targets must be 0 or 1");
        }
        if (!has0 || !has1) throw InvalidTarget("logistic target has a single class");
    }

    LassoModel model;
    model.family = family;
    model.scaler = Standardizer::fit(X);
    const DMatrix Xs = model.scaler.transform(X);
    model.lambda_grid =
        lambda_grid.empty() ? lasso_lambda_grid(Xs, y, family) : lambda_grid;

    const std::size_t N = X.rows;
    const int K = int(std::min<std::size_t>(5, N));
    std::vector<int> fold_of(N, 0);
    {
        Rng rng(derive_seed(seed, "lasso_cv"));
        if (family == LassoFamily::Logistic) {
            for (int cls = 0; cls <= 1; ++cls) {
                std::vector<std::size_t> idx;
                for (std::size_t i = 0; i < N; ++i)
                    if (int(y[i]) == cls) idx.push_back(i);
                rng.shuffle(idx);
                for (std::size_t i = 0; i < idx.size(); ++i) fold_of[idx[i]] = int(i) % K;
            }
        } else {
            std::vector<std::size_t> idx(N);
            std::iota(idx.begin(), idx.end(), std::size_t(0));
            rng.shuffle(idx);
            for (std::size_t i = 0; i < N; ++i) fold_of[idx[i]] = int(i) % K;
        }
    }

    model.cv_scores.assign(model.lambda_grid.size(), 0.0);
    for (int f = 0; f < K; ++f) {
        std::vector<std::size_t> tr, va;
        for (std::size_t i = 0; i < N; ++i) (fold_of[i] == f ? va : tr).push_back(i);
        if (tr.empty() || va.empty()) continue;
        DMatrix Xtr = gather_rows(X, tr), Xva = gather_rows(X, va);
        std::vector<double> ytr, yva;
        for (auto i : tr) ytr.push_back(y[i]);
        for (auto i : va) yva.push_back(y[i]);
        const Standardizer fold_scaler = Standardizer::fit(Xtr);
        const DMatrix Xtrs = fold_scaler.transform(Xtr);
        const DMatrix Xvas = fold_scaler.transform(Xva);

        // Warm start down the (descending) grid, as path solvers do.
        std::vector<double> w(X.cols, 0.0);
        double b = 0.0;
        if (family == LassoFamily::Logistic) {
            double ybar = 0.0;
            for (double v : ytr) ybar += v;
            ybar = clamp_prob(ybar / double(ytr.size()));
            b = std::log(ybar / (1.0 - ybar));
        }
        for (std::size_t g = 0; g < model.lambda_grid.size(); ++g) {
            if (family == LassoFamily::Logistic)
                fit_logistic(Xtrs, ytr, model.lambda_grid[g], w, b);
            else
                fit_linear(Xtrs, ytr, model.lambda_grid[g], w, b);
            std::vector<double> pred(va.size());
            for (std::size_t i = 0; i < va.size(); ++i) {
                double s = b;
                for (std::size_t j = 0; j < X.cols; ++j) s += Xvas.at(i, j) * w[j];
                pred[i] = s;
            }
            model.cv_scores[g] += pooled_loss(family, pred, yva);
        }
    }
    for (auto& s : model.cv_scores) s /= double(N);

    std::size_t best = 0;
    for (std::size_t g = 1; g < model.cv_scores.size(); ++g)
        if (model.cv_scores[g] < model.cv_scores[best]) best = g;
    model.lambda = model.lambda_grid[best];
    model.lin = lasso_fit_fixed(Xs, y, family, model.lambda);
    return model;
}

std::vector<double> predict_lasso(const LassoModel& model, const DMatrix& X) {
    if (X.cols != model.scaler.mean.size())
        throw ShapeError("lasso expects " + std::to_string(model.scaler.mean.size()) +
                         " features, got " + std::to_string(X.cols));
    const DMatrix Xs = model.scaler.transform(X);
    std::vector<double> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        double s = model.lin.bias;
        for (std::size_t j = 0; j < X.cols; ++j) s += Xs.at(i, j) * model.lin.weights[j];
        out[i] = model.family == LassoFamily::Logistic ? sigmoid(s) : s;
    }
    return out;
}

std::vector<double> log_transform_expression(const std::vector<double>& values) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 0.0) throw InvalidTarget("expression values must be >= 0");
        out[i] = std::log1p(values[i]);
    }
    return out;
}

nlohmann::json lasso_json(const LassoModel& model) {
    return {{"kind", model.lin.kind},
            {"weights", model.lin.weights},
            {"bias", model.lin.bias},
            {"lambda", model.lambda},
            {"standardizer", {{"mean", model.scaler.mean}, {"sd", model.scaler.sd}}}};
}

}  // namespace histofeat
