#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "histofeat/svm.hpp"

namespace histofeat {

enum class LassoFamily { Linear, Logistic };

struct LassoModel {
    Standardizer scaler;
    LinearModel lin;  // kind lasso_linear | lasso_logistic
    LassoFamily family = LassoFamily::Linear;
    double lambda = 0.0;
    std::vector<double> lambda_grid;
    std::vector<double> cv_scores;  // mean inner-CV loss per grid point
};

// Grid from lambda_max = max_j |X~_j' (y - ybar)| / N down two decades, 50
// points, log-spaced, descending.
std::vector<double> lasso_lambda_grid(const DMatrix& Xs, const std::vector<double>& y,
                                      LassoFamily family, int points = 50, double decades = 2.0);

// Cyclic coordinate descent with soft-thresholding at a fixed lambda;
// intercept unpenalized; logistic wraps the descent in IRLS steps.
LinearModel lasso_fit_fixed(const DMatrix& Xs, const std::vector<double>& y, LassoFamily family,
                            double lambda);

// Lambda chosen by inner 5-fold CV on the training rows (MSE for linear,
// deviance for logistic), then refit on all rows at the winner.
LassoModel train_lasso(const DMatrix& X, const std::vector<double>& y, LassoFamily family,
                       std::uint64_t seed, const std::vector<double>& lambda_grid = {});

// Linear family: Xw + b.  Logistic: sigmoid(Xw + b).
std::vector<double> predict_lasso(const LassoModel& model, const DMatrix& X);

// ln(x + 1) elementwise; negative input is rejected.
std::vector<double> log_transform_expression(const std::vector<double>& values);

nlohmann::json lasso_json(const LassoModel& model);

}  // namespace histofeat
