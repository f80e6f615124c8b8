#include "histofeat/pipeline.hpp"

#include <filesystem>
#include <map>

#include "histofeat/checkpoint.hpp"
#include "histofeat/common.hpp"
#include "histofeat/dataset.hpp"
#include "histofeat/experiments.hpp"
#include "histofeat/features.hpp"
#include "histofeat/finetune.hpp"
#include "histofeat/io_util.hpp"
#include "histofeat/logging.hpp"
#include "histofeat/parallel.hpp"
#include "histofeat/stain.hpp"
#include "histofeat/svg.hpp"
#include "histofeat/tiling.hpp"

namespace histofeat {

namespace {

namespace fs = std::filesystem;

ImageU8 preprocess(const ImageU8& img, const PipelineConfig& cfg) {
    if (!cfg.stain_enabled) return img;
    return macenko_normalize(img, default_reference_basis(), cfg.stain);
}

LabeledDataset load_preprocessed_dataset(const std::string& dir, const PipelineConfig& cfg,
                                         const char* role) {
    if (dir.empty())
        throw ConfigError(std::string("config key 'data.") + role + "' is required");
    LabeledDataset data = load_class_dataset(dir, cfg.tile_size);
    parallel_for(data.tiles.size(), cfg.threads, [&](std::size_t i) {
        data.tiles[i].pixels = preprocess(data.tiles[i].pixels, cfg);
    });
    log_event("dataset_loaded", {{"dir", dir},
                                 {"tiles", data.tiles.size()},
                                 {"classes", data.class_names.size()},
                                 {"stain_normalized", cfg.stain_enabled}});
    return data;
}

Model load_model(const std::string& path) {
    if (path.empty()) throw ConfigError("config key 'model.checkpoint' is required");
    nn::Params params = load_checkpoint(path);
    Model model;
    model.cfg = infer_config(params);
    model.params = std::move(params);
    return model;
}

}  // namespace

SyntheticOutputs cmd_gen_synthetic(const PipelineConfig& cfg) {
    SyntheticOutputs outs = generate_synthetic(cfg.synthetic, cfg.out_dir);
    log_event("synthetic_written", {{"source_dir", outs.source_dir},
                                    {"target_dir", outs.target_dir},
                                    {"manifest", outs.manifest_path}});
    return outs;
}

std::string cmd_pretrain(const PipelineConfig& cfg) {
    LabeledDataset data = load_preprocessed_dataset(cfg.source_dir, cfg, "source_dir");
    if (data.class_count() != cfg.network.classes)
        throw ConfigError("network.classes is " + std::to_string(cfg.network.classes) +
                          " but the dataset has " + std::to_string(data.class_count()) +
                          " classes");
    Model model = build_model(cfg.network, cfg.seed);
    pretrain(model, data, cfg.pretrain_lr, cfg.pretrain_epochs, cfg.pretrain_batch,
             cfg.seed, cfg.threads);
    double acc = eval_accuracy(model, data, cfg.threads);
    log_event("pretrain_done", {{"train_accuracy", acc}});

    fs::create_directories(cfg.out_dir);
    std::string path = cfg.out_dir + "/pretrained.ckpt";
    save_checkpoint(path, model.params);
    log_event("checkpoint_written", {{"path", path}});
    return path;
}

std::string cmd_finetune(const PipelineConfig& cfg) {
    Model model = load_model(cfg.checkpoint_path);
    LabeledDataset data = load_preprocessed_dataset(cfg.target_dir, cfg, "target_dir");
    if (cfg.reinit_head) {
        reset_head(model, data.class_count(), cfg.seed);
    } else if (model.cfg.classes != data.class_count()) {
        throw ConfigError("checkpoint head has " + std::to_string(model.cfg.classes) +
                          " classes but the dataset has " + std::to_string(data.class_count()));
    }
    finetune_step1(model, data, cfg.finetune);
    finetune_step2(model, data, cfg.finetune);
    double acc = eval_accuracy(model, data, cfg.threads);
    log_event("finetune_done", {{"train_accuracy", acc}});

    fs::create_directories(cfg.out_dir);
    std::string path = cfg.out_dir + "/finetuned.ckpt";
    save_checkpoint(path, model.params);
    log_event("checkpoint_written", {{"path", path}});
    return path;
}

ExtractOutputs cmd_extract(const PipelineConfig& cfg, const std::string& input,
                           const std::string& stem) {
    if (input.empty()) throw ConfigError("extract needs an input dataset or manifest");
    Model model = load_model(cfg.checkpoint_path);
    fs::create_directories(cfg.out_dir);
    ExtractOutputs outs;
    const std::string base = cfg.out_dir + "/" + stem;

    if (fs::is_directory(input)) {
        LabeledDataset data = load_preprocessed_dataset(input, cfg, "source_dir");
        FeatureMatrix fm = extract_tile_features(model, data.tiles, cfg.threads);
        outs.tile_features = base + ".pfv";
        outs.tile_features_csv = base + ".csv";
        outs.tile_labels_csv = base + "_labels.csv";
        save_features(outs.tile_features, fm);
        save_features_csv(outs.tile_features_csv, fm);
        LabelTable labels;
        for (std::size_t i = 0; i < data.tiles.size(); ++i) {
            labels.ids.push_back(data.tiles[i].id());
            labels.labels.push_back(data.labels[i]);
            labels.class_names.push_back(data.class_names[std::size_t(data.labels[i])]);
        }
        save_label_table(outs.tile_labels_csv, labels);
        log_event("features_written",
                  {{"path", outs.tile_features}, {"rows", fm.rows()}, {"dim", fm.dim}});
        return outs;
    }

    PatientManifest manifest = load_manifest(input);
    std::vector<std::vector<Tile>> per_image(manifest.rows.size());
    parallel_for(manifest.rows.size(), cfg.threads, [&](std::size_t i) {
        const ManifestRow& row = manifest.rows[i];
        ImageU8 img = load_image(row.image_path);
        img = rescale_to_mpp(img, row.mpp, cfg.target_mpp);
        img = preprocess(img, cfg);
        std::string source_id =
            row.patient_id + "/" + fs::path(row.image_path).filename().string();
        std::vector<Tile> tiles =
            tile_image(img, cfg.tile_size, cfg.tile_size, source_id, row.patient_id);
        std::vector<Tile> kept;
        for (auto& t : tiles)
            if (content_filter(t.pixels, cfg.white_threshold, cfg.max_white_fraction))
                kept.push_back(std::move(t));
        if (kept.empty())
            throw InsufficientTissue("no usable tiles in " + row.image_path);
        per_image[i] = std::move(kept);
    });

    std::vector<Tile> tiles;
    std::map<std::string, std::string> tile_to_patient;
    for (auto& group : per_image)
        for (auto& t : group) {
            tile_to_patient[t.id()] = *t.patient_id;
            tiles.push_back(std::move(t));
        }
    FeatureMatrix tile_fm = extract_tile_features(model, tiles, cfg.threads);
    FeatureMatrix patient_fm = aggregate_patient(tile_fm, tile_to_patient);

    outs.tile_features = base + "_tiles.pfv";
    outs.tile_features_csv = base + "_tiles.csv";
    outs.patient_features = base + "_patients.pfv";
    outs.patient_features_csv = base + "_patients.csv";
    save_features(outs.tile_features, tile_fm);
    save_features_csv(outs.tile_features_csv, tile_fm);
    save_features(outs.patient_features, patient_fm);
    save_features_csv(outs.patient_features_csv, patient_fm);
    log_event("features_written", {{"path", outs.patient_features},
                                   {"tiles", tile_fm.rows()},
                                   {"patients", patient_fm.rows()},
                                   {"dim", tile_fm.dim}});
    return outs;
}

namespace {

ExperimentOutputs emit_report(const PipelineConfig& cfg, const CVReport& report) {
    fs::create_directories(cfg.out_dir);
    const std::string base = cfg.out_dir + "/" + report.experiment;

    ExperimentOutputs outs;
    outs.report = report;
    outs.report_json = base + "_report.json";
    save_report_json(outs.report_json, report);
    outs.files.push_back(outs.report_json);

    save_report_csv(base + "_folds.csv", report);
    outs.files.push_back(base + "_folds.csv");
    if (report.classes > 0) {
        save_confusion_csv(base + "_confusion.csv", report);
        outs.files.push_back(base + "_confusion.csv");
    }
    if (!report.genes.empty()) {
        save_gene_csv(base + "_genes.csv", report);
        outs.files.push_back(base + "_genes.csv");
    }
    if (!report.scatters.empty()) {
        save_scatter_csv(base + "_scatter.csv", report);
        outs.files.push_back(base + "_scatter.csv");
    }

    std::string plot_dir = cfg.out_dir + "/plots_" + report.experiment;
    fs::create_directories(plot_dir);
    for (const auto& name : render_report_plots(report, plot_dir))
        outs.files.push_back(plot_dir + "/" + name);

    for (const auto& pt : report.paired_tests)
        log_event("paired_test", {{"experiment", report.experiment},
                                  {"metric", pt.metric},
                                  {"baseline_mean", pt.cmp.mean_b},
                                  {"finetuned_mean", pt.cmp.mean_a},
                                  {"mean_improvement", pt.cmp.mean_diff},
                                  {"wilcoxon_p", pt.cmp.wilcoxon_p},
                                  {"t_p", pt.cmp.t_p}});
    return outs;
}

}  // namespace

ExperimentOutputs cmd_experiment(const PipelineConfig& cfg, const std::string& which,
                                 const std::string& features_a, const std::string& features_b) {
    FeatureMatrix fa = load_features(features_a);
    FeatureMatrix fb = load_features(features_b);

    ExperimentParams params;
    params.k = cfg.cv_k;
    params.repeats = cfg.cv_repeats;
    params.seed = cfg.seed;
    params.alpha = cfg.alpha;
    params.svc_c = cfg.svc_c;
    params.svr_c = cfg.svr_c;
    params.svr_epsilon = cfg.svr_epsilon;
    params.mutation_family = cfg.mutation_family;
    params.scatter_genes = cfg.scatter_genes;
    params.threads = cfg.threads;

    CVReport report;
    if (which == "tissue") {
        report = run_tissue_experiment(fa, fb, params);
    } else if (which == "expression") {
        if (cfg.expression_path.empty())
            throw ConfigError("config key 'data.expression' is required");
        report = run_expression_experiment(fa, fb, load_target_table(cfg.expression_path),
                                           params);
    } else if (which == "mutation") {
        if (cfg.mutation_path.empty())
            throw ConfigError("config key 'data.mutation' is required");
        report = run_mutation_experiment(fa, fb, load_target_table(cfg.mutation_path), params);
    } else {
        throw ConfigError("unknown experiment '" + which +
                          "' (expected tissue, expression, or mutation)");
    }
    return emit_report(cfg, report);
}

ExperimentOutputs cmd_report(const PipelineConfig& cfg, const std::string& report_json) {
    return emit_report(cfg, load_report_json(report_json));
}

}  // namespace histofeat
