#include "histofeat/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "histofeat/common.hpp"
#include "histofeat/rng.hpp"

namespace histofeat {

namespace {

// Dual coordinate descent for min_w 0.5*w'w + C * sum max(0, 1 - y_i w'x_i),
// bias handled as an augmented constant feature.  Stops when the duality gap
// P(w) - D(alpha) drops below gap_tol * max(1, P(w)).
LinearModel train_binary_svc(const DMatrix& Xs, const std::vector<double>& y, double C,
                             std::uint64_t seed, double gap_tol, int max_passes) {
    const std::size_t N = Xs.rows, D = Xs.cols;
    std::vector<double> w(D + 1, 0.0);  // last entry = bias (feature value 1)
    std::vector<double> alpha(N, 0.0);
    std::vector<double> qd(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double* xi = Xs.row(i);
        double q = 1.0;  // bias feature
        for (std::size_t d = 0; d < D; ++d) q += xi[d] * xi[d];
        qd[i] = q;
    }
    auto dot_w = [&](std::size_t i) {
        const double* xi = Xs.row(i);
        double s = w[D];
        for (std::size_t d = 0; d < D; ++d) s += w[d] * xi[d];
        return s;
    };

    Rng rng(derive_seed(seed, "svc_pass"));
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), std::size_t(0));
    for (int pass = 0; pass < max_passes; ++pass) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            const double G = y[i] * dot_w(i) - 1.0;
            double pg = G;
            if (alpha[i] <= 0.0)
                pg = std::min(G, 0.0);
            else if (alpha[i] >= C)
                pg = std::max(G, 0.0);
            if (pg == 0.0) continue;
            const double old = alpha[i];
            alpha[i] = std::min(std::max(old - G / qd[i], 0.0), C);
            const double delta = (alpha[i] - old) * y[i];
            if (delta != 0.0) {
                const double* xi = Xs.row(i);
                for (std::size_t d = 0; d < D; ++d) w[d] += delta * xi[d];
                w[D] += delta;
            }
        }
        double wtw = 0.0;
        for (double v : w) wtw += v * v;
        double hinge = 0.0, asum = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            hinge += std::max(0.0, 1.0 - y[i] * dot_w(i));
            asum += alpha[i];
        }
        const double primal = 0.5 * wtw + C * hinge;
        const double dual = asum - 0.5 * wtw;
        if (primal - dual <= gap_tol * std::max(1.0, std::abs(primal))) break;
    }

    LinearModel m;
    m.kind = "svc_binary";
    m.weights.assign(w.begin(), w.begin() + std::ptrdiff_t(D));
    m.bias = w[D];
    return m;
}

}  // namespace

MulticlassSvc train_svc(const DMatrix& X, const std::vector<int>& y, int classes, double c_reg,
                        std::uint64_t seed, double gap_tol, int max_passes) {
    if (X.rows < 2) throw InvalidInput("svc needs at least 2 rows");
    if (y.size() != X.rows) throw ShapeError("labels do not match rows");
    if (classes < 2) throw ConfigError("svc needs at least 2 classes");
    if (!(c_reg > 0.0)) throw ConfigError("c_reg must be > 0");
    std::vector<int> count(std::size_t(classes), 0);
    for (int v : y) {
        if (v < 0 || v >= classes) throw InvalidInput("label out of range");
        ++count[std::size_t(v)];
    }
    int present_classes = 0;
    for (int c : count) present_classes += c > 0 ? 1 : 0;
    if (present_classes < 2) throw InvalidInput("svc needs at least 2 classes present");

    MulticlassSvc model;
    model.c_reg = c_reg;
    model.scaler = Standardizer::fit(X);
    const DMatrix Xs = model.scaler.transform(X);
    for (int k = 0; k < classes; ++k) {
        if (count[std::size_t(k)] == 0) {
            LinearModel absent;
            absent.kind = "svc_binary";
            absent.weights.assign(X.cols, 0.0);
            absent.present = false;
            model.per_class.push_back(std::move(absent));
            continue;
        }
        std::vector<double> yk(X.rows);
        for (std::size_t i = 0; i < X.rows; ++i) yk[i] = y[i] == k ? 1.0 : -1.0;
        model.per_class.push_back(train_binary_svc(Xs, yk, c_reg,
                                                   derive_seed(seed, "svc_class", std::uint64_t(k)),
                                                   gap_tol, max_passes));
    }
    return model;
}

std::vector<double> decision_values_svc(const MulticlassSvc& model, const double* row) {
    const std::size_t D = model.scaler.mean.size();
    std::vector<double> xs(D);
    for (std::size_t d = 0; d < D; ++d)
        xs[d] = model.scaler.constant[d] ? 0.0
                                         : (row[d] - model.scaler.mean[d]) / model.scaler.sd[d];
    std::vector<double> out(model.per_class.size());
    for (std::size_t k = 0; k < model.per_class.size(); ++k) {
        const auto& m = model.per_class[k];
        if (!m.present) {
            out[k] = -std::numeric_limits<double>::infinity();
            continue;
        }
        double s = m.bias;
        for (std::size_t d = 0; d < D; ++d) s += m.weights[d] * xs[d];
        out[k] = s;
    }
    return out;
}

std::vector<int> predict_svc(const MulticlassSvc& model, const DMatrix& X) {
    if (X.cols != model.scaler.mean.size())
        throw ShapeError("svc expects " + std::to_string(model.scaler.mean.size()) +
                         " features, got " + std::to_string(X.cols));
    std::vector<int> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        const auto scores = decision_values_svc(model, X.row(i));
        int best = 0;
        for (std::size_t k = 1; k < scores.size(); ++k)
            if (scores[k] > scores[std::size_t(best)]) best = int(k);
        out[i] = best;
    }
    return out;
}

SvrModel train_svr(const DMatrix& X, const std::vector<double>& y, double c_reg,
                   double epsilon_tube, std::uint64_t seed) {
    (void)seed;  // full-batch descent is deterministic; kept for API symmetry
    if (X.rows < 2) throw InvalidInput("svr needs at least 2 rows");
    if (y.size() != X.rows) throw ShapeError("targets do not match rows");
    if (!(c_reg > 0.0)) throw ConfigError("c_reg must be > 0");
    if (epsilon_tube < 0.0) throw ConfigError("epsilon_tube must be >= 0");

    SvrModel model;
    model.epsilon = epsilon_tube;
    model.c_reg = c_reg;
    model.scaler = Standardizer::fit(X);
    const DMatrix Xs = model.scaler.transform(X);
    const std::size_t N = X.rows, D = X.cols;

    double ysum = 0.0;
    for (double v : y) ysum += v;
    model.y_mean = ysum / double(N);
    double yss = 0.0;
    for (double v : y) yss += (v - model.y_mean) * (v - model.y_mean);
    model.y_sd = std::sqrt(yss / double(N));
    if (!(model.y_sd > 0.0)) model.y_sd = 1.0;
    std::vector<double> ys(N);
    for (std::size_t i = 0; i < N; ++i) ys[i] = (y[i] - model.y_mean) / model.y_sd;

    const double lambda = 1.0 / c_reg;
    const int passes = 5000;
    const double eta0 = 0.5;
    std::vector<double> w(D, 0.0), wavg(D, 0.0), g(D);
    double b = 0.0, bavg = 0.0;
    int avg_count = 0;
    for (int t = 0; t < passes; ++t) {
        std::fill(g.begin(), g.end(), 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double pred = b;
            for (std::size_t d = 0; d < D; ++d) pred += w[d] * Xs.at(i, d);
            const double r = pred - ys[i];
            if (r > epsilon_tube) {
                for (std::size_t d = 0; d < D; ++d) g[d] += Xs.at(i, d);
                gb += 1.0;
            } else if (r < -epsilon_tube) {
                for (std::size_t d = 0; d < D; ++d) g[d] -= Xs.at(i, d);
                gb -= 1.0;
            }
        }
        const double eta = eta0 / std::sqrt(double(t + 1));
        for (std::size_t d = 0; d < D; ++d) w[d] -= eta * (g[d] / double(N) + lambda * w[d]);
        b -= eta * gb / double(N);
        if (t >= passes / 2) {
            for (std::size_t d = 0; d < D; ++d) wavg[d] += w[d];
            bavg += b;
            ++avg_count;
        }
    }
    model.lin.kind = "svr";
    model.lin.weights.resize(D);
    for (std::size_t d = 0; d < D; ++d) model.lin.weights[d] = wavg[d] / avg_count;
    model.lin.bias = bavg / avg_count;
    return model;
}

std::vector<double> predict_svr(const SvrModel& model, const DMatrix& X) {
    if (X.cols != model.scaler.mean.size())
        throw ShapeError("svr expects " + std::to_string(model.scaler.mean.size()) +
                         " features, got " + std::to_string(X.cols));
    const DMatrix Xs = model.scaler.transform(X);
    std::vector<double> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        double s = model.lin.bias;
        for (std::size_t d = 0; d < X.cols; ++d) s += model.lin.weights[d] * Xs.at(i, d);
        out[i] = model.y_mean + model.y_sd * s;
    }
    return out;
}

namespace {

nlohmann::json scaler_json(const Standardizer& s) {
    return {{"mean", s.mean}, {"sd", s.sd}};
}

nlohmann::json linear_json(const LinearModel& m) {
    return {{"kind", m.kind}, {"weights", m.weights}, {"bias", m.bias}, {"present", m.present}};
}

}  // namespace

nlohmann::json svc_json(const MulticlassSvc& model) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& m : model.per_class) classes.push_back(linear_json(m));
    return {{"kind", "svc_multiclass"},
            {"c_reg", model.c_reg},
            {"class_names", model.class_names},
            {"standardizer", scaler_json(model.scaler)},
            {"classes", classes}};
}

nlohmann::json svr_json(const SvrModel& model) {
    nlohmann::json j = linear_json(model.lin);
    j["standardizer"] = scaler_json(model.scaler);
    j["y_mean"] = model.y_mean;
    j["y_sd"] = model.y_sd;
    j["epsilon"] = model.epsilon;
    j["c_reg"] = model.c_reg;
    return j;
}

}  // namespace histofeat
