#include "histofeat/standardize.hpp"

#include <cmath>

#include "histofeat/common.hpp"

namespace histofeat {

DMatrix to_dmatrix(const FeatureMatrix& fm) {
    DMatrix X(fm.rows(), std::size_t(fm.dim));
    for (std::size_t i = 0; i < fm.rows(); ++i)
        for (int d = 0; d < fm.dim; ++d) X.at(i, std::size_t(d)) = double(fm.row(i)[d]);
    return X;
}

DMatrix gather_rows(const DMatrix& X, const std::vector<std::size_t>& idx) {
    DMatrix out(idx.size(), X.cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t c = 0; c < X.cols; ++c) out.at(i, c) = X.at(idx[i], c);
    return out;
}

Standardizer Standardizer::fit(const DMatrix& X) {
    if (X.rows == 0) throw InvalidInput("cannot standardize an empty matrix");
    Standardizer s;
    s.mean.assign(X.cols, 0.0);
    s.sd.assign(X.cols, 1.0);
    s.constant.assign(X.cols, 0);
    for (std::size_t c = 0; c < X.cols; ++c) {
        double lo = X.at(0, c), hi = X.at(0, c), sum = 0.0;
        for (std::size_t r = 0; r < X.rows; ++r) {
            const double v = X.at(r, c);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        s.mean[c] = sum / double(X.rows);
        if (lo == hi) {
            s.constant[c] = 1;
            continue;
        }
        double ss = 0.0;
        for (std::size_t r = 0; r < X.rows; ++r) {
            const double d = X.at(r, c) - s.mean[c];
            ss += d * d;
        }
        s.sd[c] = std::sqrt(ss / double(X.rows));
        if (!(s.sd[c] > 0.0)) {
            s.sd[c] = 1.0;
            s.constant[c] = 1;
        }
    }
    return s;
}

DMatrix Standardizer::transform(const DMatrix& X) const {
    if (X.cols != mean.size())
        throw ShapeError("standardizer fitted on " + std::to_string(mean.size()) +
                         " features, got " + std::to_string(X.cols));
    DMatrix out(X.rows, X.cols);
    for (std::size_t r = 0; r < X.rows; ++r)
        for (std::size_t c = 0; c < X.cols; ++c)
            out.at(r, c) = constant[c] ? 0.0 : (X.at(r, c) - mean[c]) / sd[c];
    return out;
}

}  // namespace histofeat
