#pragma once

#include <cstdint>
#include <string>

#include "histofeat/dataset.hpp"
#include "histofeat/features.hpp"
#include "histofeat/lasso.hpp"
#include "histofeat/report.hpp"

namespace histofeat {

struct ExperimentParams {
    int k = 5;
    int repeats = 50;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    double svc_c = 1.0;
    double svr_c = 1.0;
    double svr_epsilon = 0.1;
    LassoFamily mutation_family = LassoFamily::Logistic;
    int scatter_genes = 4;
    int threads = 1;
};

// All three runners take the baseline (a) and fine-tuned (b) feature files,
// which must cover exactly the same ids; folds are shared between extractors
// so every comparison is paired.

// Tissue classification over tiles.  Tile ids carry their class as a
// "<class>/" prefix; folds are stratified by that class.  Emits per-fold
// accuracy, pooled confusion matrices, and a paired test on per-repeat mean
// accuracy.
CVReport run_tissue_experiment(const FeatureMatrix& fa, const FeatureMatrix& fb,
                               const ExperimentParams& params);

// Per-gene epsilon-SVR on ln(1+x) expression, folds over patients.  Emits
// per-fold rmse, a per-repeat pooled-correlation series (fold = -1 rows), a
// paired test on that series, per-gene correlations with p-values on
// repeat-averaged out-of-fold predictions, and observed-vs-predicted scatter
// points for the strongest genes.
CVReport run_expression_experiment(const FeatureMatrix& fa, const FeatureMatrix& fb,
                                   const TargetTable& expression,
                                   const ExperimentParams& params);

// Per-gene lasso on binary mutation flags, folds stratified by flag.  Genes
// whose minority class has fewer than k patients are skipped (every training
// split must see both classes).  Emits a per-repeat pooled-AUC series
// (fold = -1 rows), a paired test on it, and per-gene AUCs on repeat-averaged
// out-of-fold scores.
CVReport run_mutation_experiment(const FeatureMatrix& fa, const FeatureMatrix& fb,
                                 const TargetTable& flags, const ExperimentParams& params);

}  // namespace histofeat
