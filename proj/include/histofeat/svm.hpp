#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "histofeat/standardize.hpp"

namespace histofeat {

// Weights live in standardized feature space; the owning wrapper carries the
// Standardizer.  `present` is false for one-vs-rest classes unseen in training
// (their decision value is -inf).
struct LinearModel {
    std::string kind;  // svc_binary | svr | lasso_linear | lasso_logistic
    std::vector<double> weights;
    double bias = 0.0;
    bool present = true;
};

struct MulticlassSvc {
    Standardizer scaler;
    std::vector<LinearModel> per_class;
    std::vector<std::string> class_names;  // may be empty
    double c_reg = 1.0;
};

struct SvrModel {
    Standardizer scaler;
    LinearModel lin;
    double y_mean = 0.0, y_sd = 1.0;
    double epsilon = 0.1;
    double c_reg = 1.0;
};

// One-vs-rest L2-regularized hinge loss by dual coordinate descent, run to a
// duality-gap tolerance or a fixed pass budget.
MulticlassSvc train_svc(const DMatrix& X, const std::vector<int>& y, int classes, double c_reg,
                        std::uint64_t seed, double gap_tol = 1e-4, int max_passes = 1000);

std::vector<double> decision_values_svc(const MulticlassSvc& model, const double* row);
std::vector<int> predict_svc(const MulticlassSvc& model, const DMatrix& X);

// Epsilon-insensitive linear regression: mean tube loss + ||w||^2/(2*c_reg),
// minimized by deterministic full-batch subgradient descent with suffix
// averaging over a fixed budget of 5000 passes.  Features and targets are
// standardized on the training rows; the tube width applies to standardized
// targets, matching the reference implementation's scaling.
SvrModel train_svr(const DMatrix& X, const std::vector<double>& y, double c_reg = 1.0,
                   double epsilon_tube = 0.1, std::uint64_t seed = 0);

std::vector<double> predict_svr(const SvrModel& model, const DMatrix& X);

nlohmann::json svc_json(const MulticlassSvc& model);
nlohmann::json svr_json(const SvrModel& model);

}  // namespace histofeat
