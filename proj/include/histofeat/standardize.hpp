#pragma once

#include <cstddef>
#include <vector>

#include "histofeat/features.hpp"

namespace histofeat {

// Row-major double matrix for the downstream predictors.
struct DMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> v;

    DMatrix() = default;
    DMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
    const double* row(std::size_t r) const { return v.data() + r * cols; }
    double* row(std::size_t r) { return v.data() + r * cols; }
};

DMatrix to_dmatrix(const FeatureMatrix& fm);
DMatrix gather_rows(const DMatrix& X, const std::vector<std::size_t>& idx);

// Per-feature mean/sd learned on training rows.  sd uses the 1/N convention so
// that duplicating every row leaves the fit unchanged.  Zero-variance features
// get sd = 1 and transform to exactly 0, which forces their weights to zero in
// every downstream solver.
struct Standardizer {
    std::vector<double> mean, sd;
    std::vector<unsigned char> constant;

    static Standardizer fit(const DMatrix& X);
    DMatrix transform(const DMatrix& X) const;
};

}  // namespace histofeat
