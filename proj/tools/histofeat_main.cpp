#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "histofeat/common.hpp"
#include "histofeat/config.hpp"
#include "histofeat/logging.hpp"
#include "histofeat/pipeline.hpp"

namespace hf = histofeat;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    std::string seed;
    std::string threads;
};

hf::PipelineConfig make_config(const GlobalArgs& args) {
    hf::ConfigMap map;
    if (!args.config_path.empty()) map = hf::load_config_file(args.config_path);
    for (const auto& assignment : args.overrides) hf::apply_override(map, assignment);
    // Dedicated flags win over both the file and --set.
    if (!args.out_dir.empty()) map.set("out_dir", args.out_dir);
    if (!args.seed.empty()) map.set("seed", args.seed);
    if (!args.threads.empty()) map.set("threads", args.threads);
    return hf::build_pipeline_config(map);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"histofeat: stain-normalized tiling, two-step transfer training, feature "
                 "extraction, and repeated cross-validation experiments"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "key = value config file");
    app.add_option("--out", args.out_dir, "output directory (overrides out_dir)");
    app.add_option("--seed", args.seed, "seed (overrides config)");
    app.add_option("--threads", args.threads, "worker threads (overrides config)");
    app.add_option("--set", args.overrides, "config override key=value (repeatable)");

    auto* gen = app.add_subcommand("gen-synthetic", "write the synthetic corpus into --out");

    auto* pre = app.add_subcommand("pretrain", "train the full network on data.source_dir");

    auto* fine = app.add_subcommand(
        "finetune", "two-step transfer on data.target_dir starting from model.checkpoint");

    std::string extract_input, extract_stem = "features";
    auto* extract = app.add_subcommand(
        "extract", "extract features from a class dataset directory or a patient manifest csv");
    extract->add_option("--input", extract_input, "dataset directory or manifest csv")
        ->required();
    extract->add_option("--output", extract_stem, "output file stem (default: features)");

    std::string which, features_a, features_b;
    auto* experiment =
        app.add_subcommand("experiment", "paired cross-validation over two feature files");
    experiment->add_option("--which", which, "tissue | expression | mutation")->required();
    experiment->add_option("--features-a", features_a, "baseline feature file")->required();
    experiment->add_option("--features-b", features_b, "fine-tuned feature file")->required();

    std::string report_json;
    auto* report = app.add_subcommand("report", "re-render csv/plots from a report json");
    report->add_option("--report", report_json, "report json path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        hf::PipelineConfig cfg = make_config(args);
        if (gen->parsed()) {
            hf::cmd_gen_synthetic(cfg);
        } else if (pre->parsed()) {
            hf::cmd_pretrain(cfg);
        } else if (fine->parsed()) {
            hf::cmd_finetune(cfg);
        } else if (extract->parsed()) {
            hf::cmd_extract(cfg, extract_input, extract_stem);
        } else if (experiment->parsed()) {
            hf::cmd_experiment(cfg, which, features_a, features_b);
        } else if (report->parsed()) {
            hf::cmd_report(cfg, report_json);
        }
        return 0;
    } catch (const hf::Error& e) {
        hf::log_event("error", {{"message", e.what()},
                                {"exit_code", static_cast<int>(e.category())}});
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        hf::log_event("error", {{"message", e.what()}, {"exit_code", 4}});
        return 4;
    }
}
