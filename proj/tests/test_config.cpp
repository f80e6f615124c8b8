#include <doctest.h>

#include <string>

#include "histofeat/common.hpp"
#include "histofeat/config.hpp"
#include "histofeat/io_util.hpp"
#include "test_util.hpp"

using namespace histofeat;

TEST_CASE("config text parsing") {
    ConfigMap cfg = parse_config_text(
        "# a comment\n"
        "\n"
        "  seed = 42   # trailing comment\n"
        "out_dir=results\n"
        "cv.k   =   7\n");
    CHECK(cfg.get_u64("seed", 0) == 42);
    CHECK(cfg.get_string("out_dir", "") == "results");
    CHECK(cfg.get_int("cv.k", 0) == 7);
    CHECK(cfg.get_double("missing", 1.5) == 1.5);
}

TEST_CASE("config parse errors carry line numbers") {
    try {
        parse_config_text("seed = 1\nno_equals_here\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("= value\n"), ConfigError);
}

TEST_CASE("typed getter validation") {
    ConfigMap cfg = parse_config_text("a = yes\nb = off\nc = maybe\nd = 1.5\ne = 2e3\n");
    CHECK(cfg.get_bool("a", false));
    CHECK_FALSE(cfg.get_bool("b", true));
    CHECK_THROWS_AS(cfg.get_bool("c", false), ConfigError);
    CHECK_THROWS_AS(cfg.get_int("d", 0), ConfigError);
    CHECK(cfg.get_double("e", 0.0) == 2000.0);
    ConfigMap more = parse_config_text("t = true\no = 1\nf = false\nz = 0\n");
    CHECK(more.get_bool("t", false));
    CHECK(more.get_bool("o", false));
    CHECK_FALSE(more.get_bool("f", true));
    CHECK_FALSE(more.get_bool("z", true));
}

TEST_CASE("overrides") {
    ConfigMap cfg;
    apply_override(cfg, "cv.repeats = 9");
    apply_override(cfg, "data.source_dir=/tmp/x");
    CHECK(cfg.get_int("cv.repeats", 0) == 9);
    CHECK(cfg.get_string("data.source_dir", "") == "/tmp/x");
    CHECK_THROWS_AS(apply_override(cfg, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "=x"), ConfigError);
}

TEST_CASE("pipeline config defaults and propagation") {
    ConfigMap cfg = parse_config_text("seed = 77\nthreads = 3\n");
    PipelineConfig pc = build_pipeline_config(cfg);
    CHECK(pc.seed == 77);
    CHECK(pc.threads == 3);
    // Seed and threads flow into the stages that consume them.
    CHECK(pc.finetune.seed == 77);
    CHECK(pc.finetune.threads == 3);
    CHECK(pc.synthetic.seed == 77);

    // Training-schedule defaults.
    CHECK(pc.finetune.lr_step1 == 4e-4);
    CHECK(pc.finetune.epochs_step1 == 20);
    CHECK(pc.finetune.lr_step2 == 5e-5);
    CHECK(pc.finetune.epochs_step2 == 10);
    CHECK(pc.finetune.batch_size == 128);
    CHECK(pc.cv_k == 5);
    CHECK(pc.cv_repeats == 50);
    CHECK(pc.reinit_head);
    CHECK(pc.stain_enabled);
    CHECK(pc.mutation_family == LassoFamily::Logistic);
}

TEST_CASE("pipeline config overrides every stage") {
    ConfigMap cfg = parse_config_text(
        "network.stem_channels = 4\n"
        "network.classes = 3\n"
        "tiling.tile_size = 16\n"
        "stain.enabled = false\n"
        "finetune.lr_step1 = 0.001\n"
        "finetune.epochs_step1 = 2\n"
        "pretrain.epochs = 5\n"
        "pretrain.batch_size = 8\n"
        "mutation.family = linear\n"
        "svm.svc_c = 2.5\n"
        "cv.k = 3\n"
        "synthetic.classes = 4\n"
        "synthetic.tile_size = 24\n");
    PipelineConfig pc = build_pipeline_config(cfg);
    CHECK(pc.network.stem_channels == 4);
    CHECK(pc.network.classes == 3);
    CHECK(pc.tile_size == 16);
    CHECK_FALSE(pc.stain_enabled);
    CHECK(pc.finetune.lr_step1 == 0.001);
    CHECK(pc.finetune.epochs_step1 == 2);
    CHECK(pc.pretrain_epochs == 5);
    CHECK(pc.pretrain_batch == 8);
    CHECK(pc.mutation_family == LassoFamily::Linear);
    CHECK(pc.svc_c == 2.5);
    CHECK(pc.cv_k == 3);
    CHECK(pc.synthetic.n_classes == 4);
    CHECK(pc.synthetic.tile_size == 24);

    // Without an explicit synthetic tile size, the tiling size is reused.
    PipelineConfig pc2 = build_pipeline_config(parse_config_text("tiling.tile_size = 20\n"));
    CHECK(pc2.synthetic.tile_size == 20);
}

TEST_CASE("pipeline config rejects unknown keys and bad values") {
    CHECK_THROWS_AS(build_pipeline_config(parse_config_text("definitely.not.a.key = 1\n")),
                    ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(parse_config_text("cv.k = 1\n")), ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(parse_config_text("finetune.lr_step1 = 0\n")),
                    ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(parse_config_text("finetune.epochs_step1 = -1\n")),
                    ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(parse_config_text("network.classes = 1\n")),
                    ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(parse_config_text("mutation.family = probit\n")),
                    ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(parse_config_text("stain.alpha = 50\n")), ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(parse_config_text("tiling.max_white_fraction = 1.5\n")),
                    ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(parse_config_text("threads = 0\n")), ConfigError);
    CHECK_THROWS_AS(build_pipeline_config(parse_config_text("cv.alpha = 1.0\n")), ConfigError);
}

TEST_CASE("config files load from disk") {
    testutil::TempDir tmp;
    write_file(tmp.file("run.cfg"), "seed = 5\ncv.repeats = 12\n");
    ConfigMap cfg = load_config_file(tmp.file("run.cfg"));
    PipelineConfig pc = build_pipeline_config(cfg);
    CHECK(pc.seed == 5);
    CHECK(pc.cv_repeats == 12);
    CHECK_THROWS_AS(load_config_file(tmp.file("missing.cfg")), IoError);
}
