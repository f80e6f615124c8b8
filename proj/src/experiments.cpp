#include "histofeat/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "histofeat/common.hpp"
#include "histofeat/folds.hpp"
#include "histofeat/logging.hpp"
#include "histofeat/metrics.hpp"
#include "histofeat/parallel.hpp"
#include "histofeat/rng.hpp"
#include "histofeat/standardize.hpp"
#include "histofeat/svm.hpp"

namespace histofeat {

namespace {

// Sorted id list plus per-extractor row matrices aligned to it.
struct AlignedFeatures {
    std::vector<std::string> ids;
    DMatrix a, b;
};

AlignedFeatures align_features(const FeatureMatrix& fa, const FeatureMatrix& fb) {
    if (fa.rows() == 0 || fb.rows() == 0) throw ConfigError("feature files are empty");
    std::map<std::string, std::size_t> row_a, row_b;
    for (std::size_t i = 0; i < fa.rows(); ++i) row_a[fa.ids[i]] = i;
    for (std::size_t i = 0; i < fb.rows(); ++i) row_b[fb.ids[i]] = i;
    if (row_a.size() != fa.rows() || row_b.size() != fb.rows())
        throw ConfigError("feature files contain duplicate ids");
    if (row_a.size() != row_b.size())
        throw ConfigError("feature files cover different id sets");
    if (fa.dim != fb.dim)
        throw ConfigError("feature dimension mismatch: " + std::to_string(fa.dim) + " vs " +
                          std::to_string(fb.dim));
    AlignedFeatures out;
    out.a.rows = out.b.rows = row_a.size();
    out.a.cols = std::size_t(fa.dim);
    out.b.cols = std::size_t(fb.dim);
    out.a.v.reserve(out.a.rows * out.a.cols);
    out.b.v.reserve(out.b.rows * out.b.cols);
    for (const auto& [id, ia] : row_a) {
        auto it = row_b.find(id);
        if (it == row_b.end())
            throw ConfigError("feature files cover different id sets (missing '" + id + "')");
        out.ids.push_back(id);
        const float* ra = fa.row(ia);
        for (int j = 0; j < fa.dim; ++j) out.a.v.push_back(ra[j]);
        const float* rb = fb.row(it->second);
        for (int j = 0; j < fb.dim; ++j) out.b.v.push_back(rb[j]);
    }
    return out;
}

void check_params(const ExperimentParams& params, std::size_t units) {
    if (params.k < 2) throw ConfigError("cv.k must be >= 2");
    if (params.repeats < 1) throw ConfigError("cv.repeats must be >= 1");
    if (units < std::size_t(params.k))
        throw ConfigError("fewer units than folds: " + std::to_string(units));
}

std::vector<std::size_t> index_of(const std::vector<std::string>& ids,
                                  const std::vector<std::string>& subset) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;
    std::vector<std::size_t> out;
    out.reserve(subset.size());
    for (const auto& id : subset) out.push_back(pos.at(id));
    return out;
}

std::vector<std::size_t> complement_of(std::size_t n, const std::vector<std::size_t>& test) {
    std::vector<char> held(n, 0);
    for (std::size_t i : test) held[i] = 1;
    std::vector<std::size_t> out;
    out.reserve(n - test.size());
    for (std::size_t i = 0; i < n; ++i)
        if (!held[i]) out.push_back(i);
    return out;
}

template <typename T>
std::vector<T> gather(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(v[i]);
    return out;
}

}  // namespace

CVReport run_tissue_experiment(const FeatureMatrix& fa, const FeatureMatrix& fb,
                               const ExperimentParams& params) {
    AlignedFeatures al = align_features(fa, fb);
    check_params(params, al.ids.size());

    // Class = id prefix up to '/'.
    std::set<std::string> name_set;
    std::vector<std::string> prefixes;
    prefixes.reserve(al.ids.size());
    for (const auto& id : al.ids) {
        auto slash = id.find('/');
        if (slash == std::string::npos || slash == 0)
            throw ConfigError("tile id lacks a class prefix: '" + id + "'");
        prefixes.push_back(id.substr(0, slash));
        name_set.insert(prefixes.back());
    }
    std::vector<std::string> class_names(name_set.begin(), name_set.end());
    if (class_names.size() < 2) throw ConfigError("tissue experiment needs at least two classes");
    std::map<std::string, int> class_index;
    for (std::size_t c = 0; c < class_names.size(); ++c) class_index[class_names[c]] = int(c);
    std::vector<int> labels;
    labels.reserve(al.ids.size());
    for (const auto& p : prefixes) labels.push_back(class_index[p]);
    const int classes = int(class_names.size());

    auto plans = make_fold_plan(al.ids, labels, params.k, params.repeats,
                                derive_seed(params.seed, "tissue"));

    struct FoldOut {
        double acc_a = 0, acc_b = 0;
        std::vector<long long> conf_a, conf_b;
    };
    std::vector<FoldOut> results(std::size_t(params.repeats) * params.k);

    parallel_for(results.size(), params.threads, [&](std::size_t slot) {
        const std::size_t r = slot / std::size_t(params.k);
        const int f = int(slot % std::size_t(params.k));
        const auto& plan = plans[r];
        auto test_idx = index_of(al.ids, plan.folds[std::size_t(f)]);
        auto train_idx = complement_of(al.ids.size(), test_idx);
        auto y_train = gather(labels, train_idx);
        auto y_test = gather(labels, test_idx);
        std::uint64_t fit_seed = derive_seed(plan.seed, "svc", std::uint64_t(f));

        FoldOut& out = results[slot];
        for (int which = 0; which < 2; ++which) {
            const DMatrix& X = which == 0 ? al.a : al.b;
            MulticlassSvc model =
                train_svc(gather_rows(X, train_idx), y_train, classes, params.svc_c, fit_seed);
            auto pred = predict_svc(model, gather_rows(X, test_idx));
            ConfusionResult cr = accuracy_and_confusion(pred, y_test, classes);
            (which == 0 ? out.acc_a : out.acc_b) = cr.accuracy;
            (which == 0 ? out.conf_a : out.conf_b) = cr.counts;
        }
    });

    CVReport report;
    report.experiment = "tissue";
    report.k = params.k;
    report.repeats = params.repeats;
    report.seed = params.seed;
    report.class_names = class_names;
    report.classes = classes;
    report.confusion_a.assign(std::size_t(classes) * classes, 0);
    report.confusion_b.assign(std::size_t(classes) * classes, 0);
    for (std::size_t slot = 0; slot < results.size(); ++slot) {
        const int r = int(slot) / params.k, f = int(slot) % params.k;
        report.fold_metrics.push_back({r, f, "a", "accuracy", results[slot].acc_a});
        report.fold_metrics.push_back({r, f, "b", "accuracy", results[slot].acc_b});
        for (std::size_t i = 0; i < report.confusion_a.size(); ++i) {
            report.confusion_a[i] += results[slot].conf_a[i];
            report.confusion_b[i] += results[slot].conf_b[i];
        }
    }

    if (params.repeats >= 6) {
        PairedTest pt;
        pt.metric = "accuracy";
        pt.cmp = paired_compare(per_repeat_means(report, "b", "accuracy"),
                                per_repeat_means(report, "a", "accuracy"));
        report.paired_tests.push_back(pt);
    }
    return report;
}

namespace {

std::vector<double> target_column(const TargetTable& table, const std::vector<std::string>& ids,
                                  std::size_t col) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < table.ids.size(); ++i) pos[table.ids[i]] = i;
    std::vector<double> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = pos.find(id);
        if (it == pos.end()) throw InvalidTarget("no target row for patient '" + id + "'");
        out.push_back(table.at(it->second, col));
    }
    return out;
}

double rmse(const std::vector<double>& truth, const std::vector<double>& pred) {
    double ss = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        double d = truth[i] - pred[i];
        ss += d * d;
    }
    return std::sqrt(ss / double(truth.size()));
}

}  // namespace

CVReport run_expression_experiment(const FeatureMatrix& fa, const FeatureMatrix& fb,
                                   const TargetTable& expression,
                                   const ExperimentParams& params) {
    AlignedFeatures al = align_features(fa, fb);
    check_params(params, al.ids.size());
    if (expression.columns.empty()) throw InvalidTarget("expression table has no gene columns");

    const std::size_t n_pat = al.ids.size();
    const std::size_t n_genes = expression.columns.size();
    const std::size_t n_rep = std::size_t(params.repeats);

    auto plans = make_fold_plan(al.ids, std::nullopt, params.k, params.repeats,
                                derive_seed(params.seed, "expression"));

    // Precompute fold index lists once; all genes share the plan.
    std::vector<std::vector<std::size_t>> test_idx(n_rep * std::size_t(params.k));
    std::vector<std::vector<std::size_t>> train_idx(test_idx.size());
    for (std::size_t r = 0; r < n_rep; ++r)
        for (int f = 0; f < params.k; ++f) {
            std::size_t slot = r * std::size_t(params.k) + std::size_t(f);
            test_idx[slot] = index_of(al.ids, plans[r].folds[std::size_t(f)]);
            train_idx[slot] = complement_of(n_pat, test_idx[slot]);
        }

    struct GeneOut {
        std::vector<double> fold_rmse_a, fold_rmse_b;      // repeat*k
        std::vector<double> repeat_corr_a, repeat_corr_b;  // missing -> 0
        std::optional<double> corr_a, corr_b, p_a, p_b;
        std::vector<double> observed, mean_pred_a, mean_pred_b;
    };
    std::vector<GeneOut> genes(n_genes);

    parallel_for(n_genes, params.threads, [&](std::size_t g) {
        GeneOut& out = genes[g];
        std::vector<double> y = log_transform_expression(target_column(expression, al.ids, g));
        out.observed = y;
        out.fold_rmse_a.resize(n_rep * std::size_t(params.k));
        out.fold_rmse_b.resize(out.fold_rmse_a.size());
        out.repeat_corr_a.assign(n_rep, 0.0);
        out.repeat_corr_b.assign(n_rep, 0.0);
        std::vector<double> sum_pred_a(n_pat, 0.0), sum_pred_b(n_pat, 0.0);

        for (std::size_t r = 0; r < n_rep; ++r) {
            std::vector<double> oof_a(n_pat, 0.0), oof_b(n_pat, 0.0);
            for (int f = 0; f < params.k; ++f) {
                std::size_t slot = r * std::size_t(params.k) + std::size_t(f);
                const auto& tr = train_idx[slot];
                const auto& te = test_idx[slot];
                auto y_tr = gather(y, tr);
                auto y_te = gather(y, te);
                std::uint64_t fit_seed = derive_seed(plans[r].seed, "svr", std::uint64_t(f));
                for (int which = 0; which < 2; ++which) {
                    const DMatrix& X = which == 0 ? al.a : al.b;
                    SvrModel model = train_svr(gather_rows(X, tr), y_tr, params.svr_c,
                                               params.svr_epsilon, fit_seed);
                    auto pred = predict_svr(model, gather_rows(X, te));
                    (which == 0 ? out.fold_rmse_a : out.fold_rmse_b)[slot] = rmse(y_te, pred);
                    auto& oof = which == 0 ? oof_a : oof_b;
                    for (std::size_t i = 0; i < te.size(); ++i) oof[te[i]] = pred[i];
                }
            }
            // Pooled out-of-fold correlation for this repeat; a constant
            // prediction vector contributes 0 to the repeat series.
            out.repeat_corr_a[r] = pearson(y, oof_a).value_or(0.0);
            out.repeat_corr_b[r] = pearson(y, oof_b).value_or(0.0);
            for (std::size_t i = 0; i < n_pat; ++i) {
                sum_pred_a[i] += oof_a[i];
                sum_pred_b[i] += oof_b[i];
            }
        }

        out.mean_pred_a.resize(n_pat);
        out.mean_pred_b.resize(n_pat);
        for (std::size_t i = 0; i < n_pat; ++i) {
            out.mean_pred_a[i] = sum_pred_a[i] / double(n_rep);
            out.mean_pred_b[i] = sum_pred_b[i] / double(n_rep);
        }
        out.corr_a = pearson(y, out.mean_pred_a);
        out.corr_b = pearson(y, out.mean_pred_b);
        if (out.corr_a && n_pat >= 4) out.p_a = correlation_p_value(*out.corr_a, n_pat);
        if (out.corr_b && n_pat >= 4) out.p_b = correlation_p_value(*out.corr_b, n_pat);
    });

    CVReport report;
    report.experiment = "expression";
    report.k = params.k;
    report.repeats = params.repeats;
    report.seed = params.seed;

    for (std::size_t r = 0; r < n_rep; ++r) {
        for (int f = 0; f < params.k; ++f) {
            std::size_t slot = r * std::size_t(params.k) + std::size_t(f);
            double ra = 0, rb = 0;
            for (const auto& g : genes) {
                ra += g.fold_rmse_a[slot];
                rb += g.fold_rmse_b[slot];
            }
            report.fold_metrics.push_back({int(r), f, "a", "rmse", ra / double(n_genes)});
            report.fold_metrics.push_back({int(r), f, "b", "rmse", rb / double(n_genes)});
        }
        double ca = 0, cb = 0;
        for (const auto& g : genes) {
            ca += g.repeat_corr_a[r];
            cb += g.repeat_corr_b[r];
        }
        report.fold_metrics.push_back({int(r), -1, "a", "corr_mean", ca / double(n_genes)});
        report.fold_metrics.push_back({int(r), -1, "b", "corr_mean", cb / double(n_genes)});
    }

    if (params.repeats >= 6) {
        PairedTest pt;
        pt.metric = "corr_mean";
        pt.cmp = paired_compare(per_repeat_means(report, "b", "corr_mean"),
                                per_repeat_means(report, "a", "corr_mean"));
        report.paired_tests.push_back(pt);
    }

    std::vector<std::optional<double>> corr_a, corr_b, p_b;
    for (std::size_t g = 0; g < n_genes; ++g) {
        GeneRow row;
        row.gene = expression.columns[g];
        row.corr_a = genes[g].corr_a;
        row.corr_b = genes[g].corr_b;
        row.p_a = genes[g].p_a;
        row.p_b = genes[g].p_b;
        report.genes.push_back(row);
        corr_a.push_back(row.corr_a);
        corr_b.push_back(row.corr_b);
        p_b.push_back(row.p_b);
    }
    report.improved = count_improved_genes(corr_a, corr_b, p_b, params.alpha);

    // Scatter points for the strongest fine-tuned genes.
    std::vector<std::size_t> order(n_genes);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        double cx = genes[x].corr_b.value_or(-2.0);
        double cy = genes[y].corr_b.value_or(-2.0);
        if (cx != cy) return cx > cy;
        return expression.columns[x] < expression.columns[y];
    });
    std::size_t keep = std::min<std::size_t>(std::size_t(std::max(params.scatter_genes, 0)),
                                             n_genes);
    for (std::size_t i = 0; i < keep; ++i) {
        std::size_t g = order[i];
        report.scatters.push_back(
            {expression.columns[g], "a", genes[g].observed, genes[g].mean_pred_a});
        report.scatters.push_back(
            {expression.columns[g], "b", genes[g].observed, genes[g].mean_pred_b});
    }
    return report;
}

CVReport run_mutation_experiment(const FeatureMatrix& fa, const FeatureMatrix& fb,
                                 const TargetTable& flags, const ExperimentParams& params) {
    AlignedFeatures al = align_features(fa, fb);
    check_params(params, al.ids.size());
    if (flags.columns.empty()) throw InvalidTarget("mutation table has no gene columns");

    const std::size_t n_pat = al.ids.size();
    const std::size_t n_genes = flags.columns.size();
    const std::size_t n_rep = std::size_t(params.repeats);

    struct GeneOut {
        bool skipped = false;
        std::vector<double> repeat_auc_a, repeat_auc_b;
        std::optional<double> auc_a, auc_b;
    };
    std::vector<GeneOut> genes(n_genes);

    parallel_for(n_genes, params.threads, [&](std::size_t g) {
        GeneOut& out = genes[g];
        std::vector<double> raw = target_column(flags, al.ids, g);
        std::vector<int> y;
        y.reserve(n_pat);
        int positives = 0;
        for (double v : raw) {
            if (v != 0.0 && v != 1.0)
                throw InvalidTarget("mutation flag for gene '" + flags.columns[g] +
                                    "' is not 0/1");
            y.push_back(int(v));
            positives += int(v);
        }
        int minority = std::min(positives, int(n_pat) - positives);
        if (minority < params.k) {
            // Every training split must contain both classes; too few
            // carriers cannot guarantee that.
            out.skipped = true;
            log_event("gene_skipped",
                      {{"gene", flags.columns[g]}, {"minority", minority}, {"k", params.k}});
            return;
        }

        auto plans = make_fold_plan(al.ids, y, params.k, params.repeats,
                                    derive_seed(params.seed, "mutation", g));
        out.repeat_auc_a.assign(n_rep, 0.0);
        out.repeat_auc_b.assign(n_rep, 0.0);
        std::vector<double> sum_score_a(n_pat, 0.0), sum_score_b(n_pat, 0.0);
        std::vector<double> y01(raw);

        for (std::size_t r = 0; r < n_rep; ++r) {
            std::vector<double> oof_a(n_pat, 0.0), oof_b(n_pat, 0.0);
            for (int f = 0; f < params.k; ++f) {
                auto te = index_of(al.ids, plans[r].folds[std::size_t(f)]);
                auto tr = complement_of(n_pat, te);
                auto y_tr = gather(y01, tr);
                std::uint64_t fit_seed = derive_seed(plans[r].seed, "lasso", std::uint64_t(f));
                for (int which = 0; which < 2; ++which) {
                    const DMatrix& X = which == 0 ? al.a : al.b;
                    LassoModel model = train_lasso(gather_rows(X, tr), y_tr,
                                                   params.mutation_family, fit_seed);
                    auto score = predict_lasso(model, gather_rows(X, te));
                    auto& oof = which == 0 ? oof_a : oof_b;
                    for (std::size_t i = 0; i < te.size(); ++i) oof[te[i]] = score[i];
                }
            }
            out.repeat_auc_a[r] = auc(oof_a, y).value_or(0.5);
            out.repeat_auc_b[r] = auc(oof_b, y).value_or(0.5);
            for (std::size_t i = 0; i < n_pat; ++i) {
                sum_score_a[i] += oof_a[i];
                sum_score_b[i] += oof_b[i];
            }
        }
        for (std::size_t i = 0; i < n_pat; ++i) {
            sum_score_a[i] /= double(n_rep);
            sum_score_b[i] /= double(n_rep);
        }
        out.auc_a = auc(sum_score_a, y);
        out.auc_b = auc(sum_score_b, y);
    });

    CVReport report;
    report.experiment = "mutation";
    report.k = params.k;
    report.repeats = params.repeats;
    report.seed = params.seed;

    std::size_t active = 0;
    for (const auto& g : genes)
        if (!g.skipped) ++active;
    if (active == 0) throw InvalidTarget("all mutation genes were skipped");

    for (std::size_t r = 0; r < n_rep; ++r) {
        double sa = 0, sb = 0;
        for (const auto& g : genes) {
            if (g.skipped) continue;
            sa += g.repeat_auc_a[r];
            sb += g.repeat_auc_b[r];
        }
        report.fold_metrics.push_back({int(r), -1, "a", "auc_mean", sa / double(active)});
        report.fold_metrics.push_back({int(r), -1, "b", "auc_mean", sb / double(active)});
    }

    if (params.repeats >= 6) {
        PairedTest pt;
        pt.metric = "auc_mean";
        pt.cmp = paired_compare(per_repeat_means(report, "b", "auc_mean"),
                                per_repeat_means(report, "a", "auc_mean"));
        report.paired_tests.push_back(pt);
    }

    for (std::size_t g = 0; g < n_genes; ++g) {
        GeneRow row;
        row.gene = flags.columns[g];
        row.auc_a = genes[g].auc_a;
        row.auc_b = genes[g].auc_b;
        report.genes.push_back(row);
    }
    return report;
}

}  // namespace histofeat
