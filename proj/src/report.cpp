#include "histofeat/report.hpp"

#include <map>

#include "histofeat/common.hpp"
#include "histofeat/io_util.hpp"

namespace histofeat {

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

std::optional<double> opt_from(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace

nlohmann::json report_to_json(const CVReport& report) {
    nlohmann::json j;
    j["experiment"] = report.experiment;
    j["k"] = report.k;
    j["repeats"] = report.repeats;
    j["seed"] = report.seed;
    j["class_names"] = report.class_names;
    j["classes"] = report.classes;

    nlohmann::json fm = nlohmann::json::array();
    for (const auto& m : report.fold_metrics)
        fm.push_back({{"repeat", m.repeat},
                      {"fold", m.fold},
                      {"extractor", m.extractor},
                      {"metric", m.metric},
                      {"value", m.value}});
    j["fold_metrics"] = fm;

    nlohmann::json pt = nlohmann::json::array();
    for (const auto& t : report.paired_tests)
        pt.push_back({{"metric", t.metric},
                      {"mean_a", t.cmp.mean_b},
                      {"mean_b", t.cmp.mean_a},
                      {"sd_a", t.cmp.sd_b},
                      {"sd_b", t.cmp.sd_a},
                      {"mean_improvement", t.cmp.mean_diff},
                      {"wilcoxon_w", t.cmp.wilcoxon_w},
                      {"wilcoxon_p", t.cmp.wilcoxon_p},
                      {"t_statistic", t.cmp.t_statistic},
                      {"t_p", t.cmp.t_p},
                      {"n", t.cmp.n}});
    j["paired_tests"] = pt;

    j["confusion_a"] = report.confusion_a;
    j["confusion_b"] = report.confusion_b;

    nlohmann::json genes = nlohmann::json::array();
    for (const auto& g : report.genes)
        genes.push_back({{"gene", g.gene},
                         {"corr_a", opt_json(g.corr_a)},
                         {"corr_b", opt_json(g.corr_b)},
                         {"p_a", opt_json(g.p_a)},
                         {"p_b", opt_json(g.p_b)},
                         {"auc_a", opt_json(g.auc_a)},
                         {"auc_b", opt_json(g.auc_b)}});
    j["genes"] = genes;
    j["n_significant"] = report.improved.n_significant;
    j["n_improved"] = report.improved.n_improved;

    nlohmann::json scatters = nlohmann::json::array();
    for (const auto& s : report.scatters)
        scatters.push_back({{"gene", s.gene},
                            {"extractor", s.extractor},
                            {"observed", s.observed},
                            {"predicted", s.predicted}});
    j["scatters"] = scatters;
    return j;
}

CVReport report_from_json(const nlohmann::json& j) {
    CVReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.k = j.at("k").get<int>();
    r.repeats = j.at("repeats").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.class_names = j.at("class_names").get<std::vector<std::string>>();
    r.classes = j.at("classes").get<int>();
    for (const auto& m : j.at("fold_metrics")) {
        FoldMetric fm;
        fm.repeat = m.at("repeat").get<int>();
        fm.fold = m.at("fold").get<int>();
        fm.extractor = m.at("extractor").get<std::string>();
        fm.metric = m.at("metric").get<std::string>();
        fm.value = m.at("value").get<double>();
        r.fold_metrics.push_back(std::move(fm));
    }
    for (const auto& t : j.at("paired_tests")) {
        PairedTest pt;
        pt.metric = t.at("metric").get<std::string>();
        pt.cmp.mean_b = t.at("mean_a").get<double>();
        pt.cmp.mean_a = t.at("mean_b").get<double>();
        pt.cmp.sd_b = t.at("sd_a").get<double>();
        pt.cmp.sd_a = t.at("sd_b").get<double>();
        pt.cmp.mean_diff = t.at("mean_improvement").get<double>();
        pt.cmp.wilcoxon_w = t.at("wilcoxon_w").get<double>();
        pt.cmp.wilcoxon_p = t.at("wilcoxon_p").get<double>();
        pt.cmp.t_statistic = t.at("t_statistic").get<double>();
        pt.cmp.t_p = t.at("t_p").get<double>();
        pt.cmp.n = t.at("n").get<int>();
        r.paired_tests.push_back(std::move(pt));
    }
    r.confusion_a = j.at("confusion_a").get<std::vector<long long>>();
    r.confusion_b = j.at("confusion_b").get<std::vector<long long>>();
    for (const auto& g : j.at("genes")) {
        GeneRow gr;
        gr.gene = g.at("gene").get<std::string>();
        gr.corr_a = opt_from(g.at("corr_a"));
        gr.corr_b = opt_from(g.at("corr_b"));
        gr.p_a = opt_from(g.at("p_a"));
        gr.p_b = opt_from(g.at("p_b"));
        gr.auc_a = opt_from(g.at("auc_a"));
        gr.auc_b = opt_from(g.at("auc_b"));
        r.genes.push_back(std::move(gr));
    }
    r.improved.n_significant = j.at("n_significant").get<int>();
    r.improved.n_improved = j.at("n_improved").get<int>();
    for (const auto& s : j.at("scatters")) {
        ScatterSeries ss;
        ss.gene = s.at("gene").get<std::string>();
        ss.extractor = s.at("extractor").get<std::string>();
        ss.observed = s.at("observed").get<std::vector<double>>();
        ss.predicted = s.at("predicted").get<std::vector<double>>();
        r.scatters.push_back(std::move(ss));
    }
    return r;
}

void save_report_json(const std::string& path, const CVReport& report) {
    write_file(path, report_to_json(report).dump(2) + "\n");
}

CVReport load_report_json(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, true);
    return report_from_json(j);
}

void save_report_csv(const std::string& path, const CVReport& report) {
    std::string out = "repeat,fold,extractor,metric,value\n";
    for (const auto& m : report.fold_metrics) {
        check_csv_field(m.extractor);
        check_csv_field(m.metric);
        out += std::to_string(m.repeat) + "," + std::to_string(m.fold) + "," + m.extractor + "," +
               m.metric + "," + format_double(m.value) + "\n";
    }
    write_file(path, out);
}

void save_confusion_csv(const std::string& path, const CVReport& report) {
    std::string out = "extractor,truth,predicted,count\n";
    auto emit = [&](const char* name, const std::vector<long long>& counts) {
        for (int t = 0; t < report.classes; ++t)
            for (int p = 0; p < report.classes; ++p) {
                const std::string& tn = report.class_names[t];
                const std::string& pn = report.class_names[p];
                check_csv_field(tn);
                check_csv_field(pn);
                out += std::string(name) + "," + tn + "," + pn + "," +
                       std::to_string(counts[std::size_t(t) * report.classes + p]) + "\n";
            }
    };
    emit("a", report.confusion_a);
    emit("b", report.confusion_b);
    write_file(path, out);
}

namespace {

std::string opt_field(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

}  // namespace

void save_gene_csv(const std::string& path, const CVReport& report) {
    std::string out = "gene,corr_a,corr_b,p_a,p_b,auc_a,auc_b\n";
    for (const auto& g : report.genes) {
        check_csv_field(g.gene);
        out += g.gene + "," + opt_field(g.corr_a) + "," + opt_field(g.corr_b) + "," +
               opt_field(g.p_a) + "," + opt_field(g.p_b) + "," + opt_field(g.auc_a) + "," +
               opt_field(g.auc_b) + "\n";
    }
    write_file(path, out);
}

void save_scatter_csv(const std::string& path, const CVReport& report) {
    std::string out = "gene,extractor,observed,predicted\n";
    for (const auto& s : report.scatters) {
        check_csv_field(s.gene);
        check_csv_field(s.extractor);
        for (std::size_t i = 0; i < s.observed.size(); ++i)
            out += s.gene + "," + s.extractor + "," + format_double(s.observed[i]) + "," +
                   format_double(s.predicted[i]) + "\n";
    }
    write_file(path, out);
}

std::vector<double> per_repeat_means(const CVReport& report, const std::string& extractor,
                                     const std::string& metric) {
    std::map<int, std::pair<double, int>> acc;
    for (const auto& m : report.fold_metrics) {
        if (m.extractor != extractor || m.metric != metric) continue;
        auto& [sum, count] = acc[m.repeat];
        sum += m.value;
        ++count;
    }
    std::vector<double> out;
    for (const auto& [repeat, entry] : acc) out.push_back(entry.first / entry.second);
    return out;
}

}  // namespace histofeat
