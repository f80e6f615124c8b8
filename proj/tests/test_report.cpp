#include <doctest.h>

#include <optional>
#include <string>
#include <vector>

#include "histofeat/common.hpp"
#include "histofeat/io_util.hpp"
#include "histofeat/report.hpp"
#include "test_util.hpp"

using namespace histofeat;

namespace {

// A report exercising every field at once.
CVReport full_report() {
    CVReport r;
    r.experiment = "expression";
    r.k = 3;
    r.repeats = 6;
    r.seed = 42;
    r.class_names = {"x", "y"};
    r.classes = 2;
    r.confusion_a = {1, 2, 3, 4};
    r.confusion_b = {5, 0, 0, 3};

    r.fold_metrics.push_back({0, 0, "a", "accuracy", 0.5});
    r.fold_metrics.push_back({0, 1, "a", "accuracy", 0.75});
    r.fold_metrics.push_back({0, -1, "b", "corr_mean", 0.25});

    PairedTest pt;
    pt.metric = "accuracy";
    pt.cmp.mean_a = 0.9;
    pt.cmp.mean_b = 0.6;
    pt.cmp.sd_a = 0.05;
    pt.cmp.sd_b = 0.07;
    pt.cmp.mean_diff = 0.3;
    pt.cmp.wilcoxon_w = 21.0;
    pt.cmp.wilcoxon_p = 0.03125;
    pt.cmp.t_statistic = 4.5;
    pt.cmp.t_p = 0.002;
    pt.cmp.n = 6;
    r.paired_tests.push_back(pt);

    GeneRow g1;
    g1.gene = "g00";
    g1.corr_a = 0.25;
    g1.corr_b = 0.75;
    g1.p_a = 0.5;
    g1.p_b = 0.004;
    GeneRow g2;
    g2.gene = "g01";  // every statistic undefined
    r.genes = {g1, g2};
    r.improved.n_significant = 1;
    r.improved.n_improved = 1;

    r.scatters.push_back({"g00", "a", {1.0, 2.0}, {1.5, 1.75}});
    r.scatters.push_back({"g00", "b", {1.0, 2.0}, {1.25, 2.5}});
    return r;
}

}  // namespace

TEST_CASE("json round trip is lossless") {
    CVReport r = full_report();
    nlohmann::json j1 = report_to_json(r);
    CVReport back = report_from_json(j1);
    nlohmann::json j2 = report_to_json(back);
    CHECK(j1 == j2);
    CHECK(j1.dump(2) == j2.dump(2));

    // Optionals survive as nulls.
    CHECK(j1["genes"][1]["corr_a"].is_null());
    CHECK(!back.genes[1].corr_a.has_value());
    CHECK(back.genes[0].corr_b == doctest::Approx(0.75));
    CHECK(back.seed == 42);
    CHECK(back.scatters.size() == 2);
    CHECK(back.scatters[1].predicted == std::vector<double>{1.25, 2.5});
}

TEST_CASE("paired tests are published from the reader's viewpoint") {
    // Internally the comparison holds (fine-tuned, baseline) as (a, b); the
    // JSON flips them so "mean_a" is the baseline and "mean_improvement" is
    // fine-tuned minus baseline.
    CVReport r = full_report();
    nlohmann::json j = report_to_json(r);
    const auto& pt = j["paired_tests"][0];
    CHECK(pt["mean_a"].get<double>() == 0.6);
    CHECK(pt["mean_b"].get<double>() == 0.9);
    CHECK(pt["sd_a"].get<double>() == 0.07);
    CHECK(pt["sd_b"].get<double>() == 0.05);
    CHECK(pt["mean_improvement"].get<double>() == 0.3);
    CHECK(pt["wilcoxon_p"].get<double>() == 0.03125);
    CHECK(pt["n"].get<int>() == 6);

    CVReport back = report_from_json(j);
    CHECK(back.paired_tests[0].cmp.mean_a == 0.9);
    CHECK(back.paired_tests[0].cmp.mean_b == 0.6);
    CHECK(back.paired_tests[0].cmp.mean_diff == 0.3);
}

TEST_CASE("report files load back identically") {
    testutil::TempDir tmp;
    CVReport r = full_report();
    save_report_json(tmp.file("report.json"), r);

    std::string raw = read_file(tmp.file("report.json"));
    CHECK(raw.front() == '{');
    CHECK(raw.back() == '\n');

    CVReport back = load_report_json(tmp.file("report.json"));
    CHECK(report_to_json(back).dump(2) == report_to_json(r).dump(2));
}

TEST_CASE("metric csv is exact") {
    testutil::TempDir tmp;
    CVReport r;
    r.fold_metrics.push_back({0, 0, "a", "accuracy", 0.5});
    r.fold_metrics.push_back({0, -1, "b", "corr_mean", 0.25});
    save_report_csv(tmp.file("m.csv"), r);
    CHECK(read_file(tmp.file("m.csv")) ==
          "repeat,fold,extractor,metric,value\n"
          "0,0,a,accuracy,0.5\n"
          "0,-1,b,corr_mean,0.25\n");

    CVReport bad;
    bad.fold_metrics.push_back({0, 0, "a", "acc,uracy", 1.0});
    CHECK_THROWS_AS(save_report_csv(tmp.file("bad.csv"), bad), InvalidInput);
}

TEST_CASE("confusion csv is exact") {
    testutil::TempDir tmp;
    CVReport r;
    r.classes = 2;
    r.class_names = {"x", "y"};
    r.confusion_a = {1, 2, 3, 4};
    r.confusion_b = {5, 0, 0, 3};
    save_confusion_csv(tmp.file("c.csv"), r);
    CHECK(read_file(tmp.file("c.csv")) ==
          "extractor,truth,predicted,count\n"
          "a,x,x,1\n"
          "a,x,y,2\n"
          "a,y,x,3\n"
          "a,y,y,4\n"
          "b,x,x,5\n"
          "b,x,y,0\n"
          "b,y,x,0\n"
          "b,y,y,3\n");
}

TEST_CASE("gene csv leaves undefined stats blank") {
    testutil::TempDir tmp;
    CVReport r = full_report();
    save_gene_csv(tmp.file("g.csv"), r);
    CHECK(read_file(tmp.file("g.csv")) ==
          "gene,corr_a,corr_b,p_a,p_b,auc_a,auc_b\n"
          "g00,0.25,0.75,0.5,0.004,,\n"
          "g01,,,,,,\n");
}

TEST_CASE("scatter csv is one row per point") {
    testutil::TempDir tmp;
    CVReport r = full_report();
    save_scatter_csv(tmp.file("s.csv"), r);
    CHECK(read_file(tmp.file("s.csv")) ==
          "gene,extractor,observed,predicted\n"
          "g00,a,1,1.5\n"
          "g00,a,2,1.75\n"
          "g00,b,1,1.25\n"
          "g00,b,2,2.5\n");
}

TEST_CASE("per-repeat means average folds and filter strictly") {
    CVReport r;
    r.fold_metrics.push_back({0, 0, "a", "m", 1.0});
    r.fold_metrics.push_back({0, 1, "a", "m", 2.0});
    r.fold_metrics.push_back({1, 0, "a", "m", 3.0});
    r.fold_metrics.push_back({1, 1, "a", "m", 5.0});
    r.fold_metrics.push_back({0, 0, "b", "m", 100.0});   // other extractor
    r.fold_metrics.push_back({0, 0, "a", "other", 7.0});  // other metric

    auto means = per_repeat_means(r, "a", "m");
    REQUIRE(means.size() == 2);
    CHECK(means[0] == doctest::Approx(1.5));
    CHECK(means[1] == doctest::Approx(4.0));

    // A fold = -1 series is already per repeat; the mean is the value itself.
    CVReport series;
    series.fold_metrics.push_back({0, -1, "a", "corr_mean", 0.4});
    series.fold_metrics.push_back({1, -1, "a", "corr_mean", 0.6});
    auto vals = per_repeat_means(series, "a", "corr_mean");
    CHECK(vals == std::vector<double>{0.4, 0.6});

    CHECK(per_repeat_means(r, "c", "m").empty());
}
