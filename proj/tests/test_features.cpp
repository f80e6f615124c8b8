#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "histofeat/features.hpp"
#include "histofeat/finetune.hpp"
#include "histofeat/io_util.hpp"
#include "histofeat/network.hpp"
#include "histofeat/rng.hpp"
#include "test_util.hpp"

using namespace histofeat;

namespace {

NetworkConfig tiny_config() {
    NetworkConfig cfg;
    cfg.stem_channels = 4;
    cfg.block1_channels = 6;
    cfg.block2_channels = 8;
    cfg.head_width = 8;
    cfg.classes = 2;
    return cfg;
}

std::vector<Tile> random_tiles(int n, int size, std::uint64_t seed) {
    std::vector<Tile> tiles;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        Tile t;
        t.source_id = "tile" + std::to_string(i);
        t.pixels = make_image(size, size);
        for (auto& p : t.pixels.pixels) p = std::uint8_t(rng.below(256));
        tiles.push_back(std::move(t));
    }
    return tiles;
}

FeatureMatrix small_matrix() {
    FeatureMatrix fm;
    fm.ids = {"r0", "r1", "r2"};
    fm.dim = 2;
    fm.values = {1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.5f};
    return fm;
}

}  // namespace

TEST_CASE("tile features come from the penultimate activation") {
    Model model = build_model(tiny_config(), 33);
    auto tiles = random_tiles(5, 8, 2);
    FeatureMatrix fm = extract_tile_features(model, tiles);
    CHECK(fm.dim == model.cfg.head_width);
    REQUIRE(fm.rows() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(fm.ids[i] == tiles[i].id());

    ForwardOut out = forward(model, tiles_to_batch(tiles));
    for (std::size_t i = 0; i < fm.values.size(); ++i)
        CHECK(fm.values[i] == out.features.data[i]);
}

TEST_CASE("extraction is batch-size independent") {
    Model model = build_model(tiny_config(), 12);
    auto tiles = random_tiles(7, 8, 5);
    FeatureMatrix all = extract_tile_features(model, tiles, 2);
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        FeatureMatrix one = extract_tile_features(model, {tiles[i]}, 1);
        for (int d = 0; d < all.dim; ++d)
            CHECK(one.values[std::size_t(d)] == all.row(i)[d]);  // bitwise
    }
    CHECK_THROWS_AS(extract_tile_features(model, {}), InvalidInput);
}

TEST_CASE("patient pooling is an exact mean in double precision") {
    FeatureMatrix tiles;
    tiles.ids = {"P1/t0", "P1/t1", "P1/t2", "P2/t0"};
    tiles.dim = 2;
    tiles.values = {
        1.0f, 0.1f,
        2.0f, 0.2f,
        4.0f, 0.4f,
        9.0f, 9.0f,
    };
    std::map<std::string, std::string> owner{
        {"P1/t0", "P1"}, {"P1/t1", "P1"}, {"P1/t2", "P1"}, {"P2/t0", "P2"}};

    FeatureMatrix patients = aggregate_patient(tiles, owner);
    REQUIRE(patients.rows() == 2);
    CHECK(patients.ids == std::vector<std::string>{"P1", "P2"});  // ascending ids
    CHECK(patients.row(0)[0] == float((1.0 + 2.0 + 4.0) / 3.0));
    CHECK(patients.row(0)[1] ==
          float((double(0.1f) + double(0.2f) + double(0.4f)) / 3.0));
    CHECK(patients.row(1)[0] == 9.0f);
}

TEST_CASE("patient pooling rejects bad mappings") {
    FeatureMatrix tiles;
    tiles.ids = {"a", "b"};
    tiles.dim = 1;
    tiles.values = {1.0f, 2.0f};

    std::map<std::string, std::string> partial{{"a", "P1"}};
    CHECK_THROWS_AS(aggregate_patient(tiles, partial), InvalidInput);

    FeatureMatrix dup = tiles;
    dup.ids = {"a", "a"};
    std::map<std::string, std::string> owner{{"a", "P1"}, {"b", "P1"}};
    CHECK_THROWS_AS(aggregate_patient(dup, owner), InvalidInput);

    // A patient present in the mapping but with no tile rows is an error.
    std::map<std::string, std::string> extra{{"a", "P1"}, {"b", "P1"}, {"zz", "P9"}};
    CHECK_THROWS_AS(aggregate_patient(tiles, extra), EmptyPatient);

    FeatureMatrix inf = tiles;
    inf.values[1] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(aggregate_patient(inf, owner), NumericalError);
}

TEST_CASE("binary feature files round-trip bitwise") {
    testutil::TempDir tmp;
    FeatureMatrix fm = small_matrix();
    fm.values[3] = -0.0f;
    fm.values[5] = 1.1754944e-38f;
    const std::string path = tmp.file("f.pfv");
    save_features(path, fm);

    FeatureMatrix back = load_features(path);
    CHECK(back.ids == fm.ids);
    CHECK(back.dim == fm.dim);
    REQUIRE(back.values.size() == fm.values.size());
    for (std::size_t i = 0; i < fm.values.size(); ++i) {
        // Compare representations so -0.0f vs 0.0f cannot slip through.
        CHECK(std::memcmp(&back.values[i], &fm.values[i], sizeof(float)) == 0);
    }
}

TEST_CASE("corrupt feature files are rejected") {
    testutil::TempDir tmp;
    FeatureMatrix fm = small_matrix();
    const std::string path = tmp.file("f.pfv");
    save_features(path, fm);

    std::string buf = read_file(path);
    std::string bad_magic = buf;
    bad_magic[0] = 'X';
    write_file(tmp.file("m.pfv"), bad_magic);
    CHECK_THROWS_AS(load_features(tmp.file("m.pfv")), IoError);

    write_file(tmp.file("t.pfv"), buf.substr(0, buf.size() - 3));
    CHECK_THROWS_AS(load_features(tmp.file("t.pfv")), IoError);

    write_file(tmp.file("x.pfv"), buf + "junk");
    CHECK_THROWS_AS(load_features(tmp.file("x.pfv")), IoError);

    CHECK_THROWS_AS(load_features(tmp.file("missing.pfv")), IoError);
}

TEST_CASE("csv mirror of the feature matrix") {
    testutil::TempDir tmp;
    FeatureMatrix fm;
    fm.ids = {"a", "b"};
    fm.dim = 2;
    fm.values = {1.0f, 2.5f, -3.0f, 0.0f};
    save_features_csv(tmp.file("f.csv"), fm);
    CHECK(read_file(tmp.file("f.csv")) ==
          "id,f0,f1\n"
          "a,1,2.5\n"
          "b,-3,0\n");
}
