#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "histofeat/common.hpp"
#include "histofeat/dataset.hpp"
#include "histofeat/features.hpp"
#include "histofeat/image.hpp"
#include "histofeat/io_util.hpp"
#include "histofeat/pipeline.hpp"
#include "test_util.hpp"

using namespace histofeat;
namespace fs = std::filesystem;

namespace {

// Small enough to run the whole chain in seconds.
PipelineConfig mini_config(const std::string& out_dir) {
    PipelineConfig cfg;
    cfg.out_dir = out_dir;
    cfg.seed = 3;
    cfg.threads = 1;
    cfg.tile_size = 16;

    cfg.network.stem_channels = 4;
    cfg.network.block1_channels = 8;
    cfg.network.block2_channels = 8;
    cfg.network.head_width = 8;
    cfg.network.classes = 3;

    cfg.pretrain_lr = 1e-3;
    cfg.pretrain_epochs = 4;
    cfg.pretrain_batch = 16;
    cfg.finetune.epochs_step1 = 2;
    cfg.finetune.epochs_step2 = 1;
    cfg.finetune.batch_size = 16;
    cfg.finetune.seed = cfg.seed;
    cfg.finetune.threads = cfg.threads;

    cfg.cv_k = 2;
    cfg.cv_repeats = 6;
    cfg.scatter_genes = 2;

    cfg.synthetic.n_classes = 3;
    cfg.synthetic.tiles_per_class_source = 8;
    cfg.synthetic.tiles_per_class_target = 8;
    cfg.synthetic.tile_size = 16;
    cfg.synthetic.patients = 6;
    cfg.synthetic.patient_grid = 2;
    cfg.synthetic.genes = 2;
    cfg.synthetic.mutations = 1;
    cfg.synthetic.min_ks_distance = 0.0;  // tiny corpus, skip the separation gate
    cfg.synthetic.seed = cfg.seed;
    return cfg;
}

}  // namespace

TEST_CASE("the command chain runs end to end") {
    testutil::TempDir tmp;
    PipelineConfig cfg = mini_config(tmp.str() + "/out");

    SyntheticOutputs data = cmd_gen_synthetic(cfg);
    cfg.source_dir = data.source_dir;
    cfg.target_dir = data.target_dir;

    std::string pretrained = cmd_pretrain(cfg);
    CHECK(pretrained == cfg.out_dir + "/pretrained.ckpt");
    REQUIRE(fs::exists(pretrained));

    cfg.checkpoint_path = pretrained;
    std::string finetuned = cmd_finetune(cfg);
    CHECK(finetuned == cfg.out_dir + "/finetuned.ckpt");
    REQUIRE(fs::exists(finetuned));
    CHECK(read_file(pretrained) != read_file(finetuned));

    // Tile features from the target tiles under both checkpoints.
    cfg.checkpoint_path = pretrained;
    ExtractOutputs base = cmd_extract(cfg, cfg.target_dir, "base");
    cfg.checkpoint_path = finetuned;
    ExtractOutputs tuned = cmd_extract(cfg, cfg.target_dir, "tuned");
    for (const auto& path : {base.tile_features, base.tile_features_csv, base.tile_labels_csv,
                             tuned.tile_features})
        CHECK(fs::exists(path));
    CHECK(base.patient_features.empty());  // class-dir input has no patients

    FeatureMatrix fb = load_features(tuned.tile_features);
    CHECK(int(fb.rows()) == 3 * 8);
    CHECK(fb.dim == cfg.network.head_width);
    CHECK(fb.ids[0].rfind("c00/", 0) == 0);  // class prefix for the tissue experiment
    LabelTable labels = load_label_table(base.tile_labels_csv);
    CHECK(labels.ids.size() == fb.rows());

    // Patient-level features via the manifest route.
    ExtractOutputs pat_base = cmd_extract(cfg, data.manifest_path, "pat_tuned");
    for (const auto& path : {pat_base.tile_features, pat_base.tile_features_csv,
                             pat_base.patient_features, pat_base.patient_features_csv})
        CHECK(fs::exists(path));
    FeatureMatrix patients = load_features(pat_base.patient_features);
    REQUIRE(int(patients.rows()) == cfg.synthetic.patients);
    CHECK(patients.ids.front() == "P000");
    CHECK(patients.ids.back() == "P005");
    // Every patient image is 2x2 cells of 16 px at the working resolution.
    FeatureMatrix tile_rows = load_features(pat_base.tile_features);
    CHECK(int(tile_rows.rows()) == cfg.synthetic.patients * 4);

    // Tissue experiment plus a byte-identical re-render from the json.
    ExperimentOutputs exp = cmd_experiment(cfg, "tissue", base.tile_features,
                                           tuned.tile_features);
    CHECK(exp.report.experiment == "tissue");
    CHECK(int(exp.report.fold_metrics.size()) == 2 * cfg.cv_k * cfg.cv_repeats);
    CHECK(exp.report.paired_tests.size() == 1);
    REQUIRE(fs::exists(exp.report_json));
    for (const auto& f : exp.files) CHECK(fs::exists(f));

    PipelineConfig render_cfg = cfg;
    render_cfg.out_dir = tmp.str() + "/rerender";
    ExperimentOutputs again = cmd_report(render_cfg, exp.report_json);
    REQUIRE(again.files.size() == exp.files.size());
    for (std::size_t i = 0; i < exp.files.size(); ++i) {
        CHECK(exp.files[i].substr(cfg.out_dir.size()) ==
              again.files[i].substr(render_cfg.out_dir.size()));
        CHECK(read_file(exp.files[i]) == read_file(again.files[i]));
    }

    // Expression experiment over the patient features.
    PipelineConfig expr_cfg = cfg;
    expr_cfg.expression_path = data.expression_path;
    ExperimentOutputs expr = cmd_experiment(expr_cfg, "expression", pat_base.patient_features,
                                            pat_base.patient_features);
    CHECK(expr.report.experiment == "expression");
    CHECK(expr.report.genes.size() == 2);
    CHECK(fs::exists(expr_cfg.out_dir + "/expression_report.json"));
}

TEST_CASE("regenerating and retraining is bitwise stable") {
    testutil::TempDir tmp;
    PipelineConfig a = mini_config(tmp.str() + "/a");
    PipelineConfig b = mini_config(tmp.str() + "/b");

    SyntheticOutputs data_a = cmd_gen_synthetic(a);
    SyntheticOutputs data_b = cmd_gen_synthetic(b);
    a.source_dir = data_a.source_dir;
    b.source_dir = data_b.source_dir;

    std::string ck_a = cmd_pretrain(a);
    std::string ck_b = cmd_pretrain(b);
    CHECK(read_file(ck_a) == read_file(ck_b));
}

TEST_CASE("missing inputs are named") {
    testutil::TempDir tmp;
    PipelineConfig cfg = mini_config(tmp.str() + "/out");

    CHECK_THROWS_AS(cmd_pretrain(cfg), ConfigError);  // no data.source_dir
    CHECK_THROWS_AS(cmd_finetune(cfg), ConfigError);  // no model.checkpoint
    CHECK_THROWS_AS(cmd_extract(cfg, "", "x"), ConfigError);
    CHECK_THROWS_AS(cmd_experiment(cfg, "nonsense", "a.pfv", "b.pfv"), ConfigError);

    SyntheticOutputs data = cmd_gen_synthetic(cfg);
    cfg.source_dir = data.source_dir;
    cfg.network.classes = 4;  // dataset has 3
    CHECK_THROWS_AS(cmd_pretrain(cfg), ConfigError);

    cfg.checkpoint_path = tmp.str() + "/missing.ckpt";
    CHECK_THROWS_AS(cmd_extract(cfg, data.target_dir, "x"), IoError);
}

TEST_CASE("feature id mismatches surface as config errors") {
    testutil::TempDir tmp;
    PipelineConfig cfg = mini_config(tmp.str() + "/out");
    fs::create_directories(cfg.out_dir);

    FeatureMatrix fa;
    fa.dim = 2;
    fa.ids = {"c0/x", "c0/y", "c1/z"};
    fa.values.assign(6, 1.0F);
    FeatureMatrix fb = fa;
    fb.ids[2] = "c1/other";
    save_features(cfg.out_dir + "/a.pfv", fa);
    save_features(cfg.out_dir + "/b.pfv", fb);
    CHECK_THROWS_AS(
        cmd_experiment(cfg, "tissue", cfg.out_dir + "/a.pfv", cfg.out_dir + "/b.pfv"),
        ConfigError);

    // Expression and mutation runs refuse to start without their tables.
    CHECK_THROWS_AS(
        cmd_experiment(cfg, "expression", cfg.out_dir + "/a.pfv", cfg.out_dir + "/a.pfv"),
        ConfigError);
    CHECK_THROWS_AS(
        cmd_experiment(cfg, "mutation", cfg.out_dir + "/a.pfv", cfg.out_dir + "/a.pfv"),
        ConfigError);
}

TEST_CASE("blank slides cannot produce features") {
    testutil::TempDir tmp;
    PipelineConfig cfg = mini_config(tmp.str() + "/out");
    fs::create_directories(cfg.out_dir);

    ImageU8 white = make_image(32, 32, 255, 255, 255);
    save_png(tmp.str() + "/white.png", white);
    write_file(tmp.str() + "/manifest.csv",
               "patient_id,image_path,mpp\nP0,white.png,0.25\n");

    // A checkpoint is needed before tiling starts.
    SyntheticOutputs data = cmd_gen_synthetic(cfg);
    cfg.source_dir = data.source_dir;
    cfg.checkpoint_path = cmd_pretrain(cfg);

    CHECK_THROWS_AS(cmd_extract(cfg, tmp.str() + "/manifest.csv", "x"), InsufficientTissue);
}
