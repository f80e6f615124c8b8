#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "histofeat/common.hpp"
#include "histofeat/dataset.hpp"
#include "histofeat/image.hpp"
#include "histofeat/io_util.hpp"
#include "test_util.hpp"

using namespace histofeat;
namespace fs = std::filesystem;

namespace {

void write_tile(const std::string& path, int size, std::uint8_t level) {
    save_png(path, make_image(size, size, level, level, level));
}

}  // namespace

TEST_CASE("class dataset loads folders in lexicographic order") {
    testutil::TempDir tmp;
    fs::create_directories(tmp.path / "b_class");
    fs::create_directories(tmp.path / "a_class");
    write_tile((tmp.path / "a_class" / "t01.png").string(), 8, 10);
    write_tile((tmp.path / "a_class" / "t00.png").string(), 8, 20);
    write_tile((tmp.path / "b_class" / "t00.png").string(), 8, 30);

    LabeledDataset ds = load_class_dataset(tmp.str(), 8);
    REQUIRE(ds.class_names == std::vector<std::string>{"a_class", "b_class"});
    REQUIRE(ds.size() == 3);
    CHECK(ds.labels == std::vector<int>{0, 0, 1});
    // Files visit in name order within a class.
    CHECK(int(ds.tiles[0].pixels.pixels[0]) == 20);  // t00 before t01
    CHECK(int(ds.tiles[1].pixels.pixels[0]) == 10);
    CHECK(int(ds.tiles[2].pixels.pixels[0]) == 30);

    // Two loads are identical.
    LabeledDataset again = load_class_dataset(tmp.str(), 8);
    CHECK(again.labels == ds.labels);
    for (std::size_t i = 0; i < ds.size(); ++i)
        CHECK(again.tiles[i].pixels.pixels == ds.tiles[i].pixels.pixels);
}

TEST_CASE("class dataset rejects malformed trees") {
    testutil::TempDir tmp;
    CHECK_THROWS_AS(load_class_dataset(tmp.file("nope"), 8), InvalidDataset);

    fs::create_directories(tmp.path / "only_one");
    write_tile((tmp.path / "only_one" / "t.png").string(), 8, 5);
    CHECK_THROWS_AS(load_class_dataset(tmp.str(), 8), InvalidDataset);

    fs::create_directories(tmp.path / "second");
    CHECK_THROWS_AS(load_class_dataset(tmp.str(), 8), InvalidDataset);  // empty class folder

    write_tile((tmp.path / "second" / "t.png").string(), 4, 5);  // wrong size
    CHECK_THROWS_AS(load_class_dataset(tmp.str(), 8), ItemError);
}

TEST_CASE("manifest parsing and path resolution") {
    testutil::TempDir tmp;
    fs::create_directories(tmp.path / "imgs");
    write_file(tmp.file("m.csv"),
               "patient_id,image_path,mpp\n"
               "P1,imgs/a.png,0.25\n"
               "P2,imgs/b.png,0.5\n");
    PatientManifest m = load_manifest(tmp.file("m.csv"));
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[0].patient_id == "P1");
    CHECK(m.rows[0].mpp == 0.25);
    // Relative paths resolve against the manifest's directory.
    CHECK(m.rows[0].image_path == (tmp.path / "imgs" / "a.png").string());
    CHECK(m.rows[1].image_path == (tmp.path / "imgs" / "b.png").string());
}

TEST_CASE("manifest format errors") {
    testutil::TempDir tmp;
    write_file(tmp.file("h.csv"), "id,path,mpp\nP1,a.png,0.25\n");
    CHECK_THROWS_AS(load_manifest(tmp.file("h.csv")), InvalidDataset);

    write_file(tmp.file("c.csv"), "patient_id,image_path,mpp\nP1,a.png\n");
    CHECK_THROWS_AS(load_manifest(tmp.file("c.csv")), InvalidDataset);

    write_file(tmp.file("e.csv"), "patient_id,image_path,mpp\n,a.png,0.25\n");
    CHECK_THROWS_AS(load_manifest(tmp.file("e.csv")), InvalidDataset);

    write_file(tmp.file("m.csv"), "patient_id,image_path,mpp\nP1,a.png,zero\n");
    CHECK_THROWS_AS(load_manifest(tmp.file("m.csv")), InvalidDataset);

    write_file(tmp.file("n.csv"), "patient_id,image_path,mpp\n");
    CHECK_THROWS_AS(load_manifest(tmp.file("n.csv")), InvalidDataset);
}

TEST_CASE("target table round-trip") {
    testutil::TempDir tmp;
    TargetTable t;
    t.id_column = "patient_id";
    t.columns = {"g00", "g01"};
    t.ids = {"P0", "P1", "P2"};
    t.values = {1.5, 2.0, 0.0, 3.25, 4.0, 5.5};
    save_target_table(tmp.file("t.csv"), t);

    TargetTable back = load_target_table(tmp.file("t.csv"));
    CHECK(back.id_column == t.id_column);
    CHECK(back.columns == t.columns);
    CHECK(back.ids == t.ids);
    CHECK(back.values == t.values);
    CHECK(back.at(1, 1) == 3.25);
}

TEST_CASE("target table rejects duplicates and gaps") {
    testutil::TempDir tmp;
    write_file(tmp.file("d.csv"), "patient_id,g0\nP1,1\nP1,2\n");
    CHECK_THROWS_AS(load_target_table(tmp.file("d.csv")), InvalidTarget);

    write_file(tmp.file("g.csv"), "patient_id,g0,g1\nP1,1,\n");
    CHECK_THROWS_AS(load_target_table(tmp.file("g.csv")), InvalidTarget);

    write_file(tmp.file("s.csv"), "patient_id,g0,g1\nP1,1\n");
    CHECK_THROWS_AS(load_target_table(tmp.file("s.csv")), InvalidTarget);

    write_file(tmp.file("h.csv"), "patient_id\nP1\n");
    CHECK_THROWS_AS(load_target_table(tmp.file("h.csv")), InvalidTarget);

    write_file(tmp.file("n.csv"), "patient_id,g0\n");
    CHECK_THROWS_AS(load_target_table(tmp.file("n.csv")), InvalidTarget);
}

TEST_CASE("label table round-trip") {
    testutil::TempDir tmp;
    LabelTable t;
    t.ids = {"c00/t0", "c00/t1", "c01/t0"};
    t.labels = {0, 0, 1};
    t.class_names = {"c00", "c01"};
    save_label_table(tmp.file("l.csv"), t);

    LabelTable back = load_label_table(tmp.file("l.csv"));
    CHECK(back.ids == t.ids);
    CHECK(back.labels == t.labels);
    CHECK(back.class_names == t.class_names);

    write_file(tmp.file("bad.csv"), "id,class_index,class_name\nx,-1,c\n");
    CHECK_THROWS_AS(load_label_table(tmp.file("bad.csv")), InvalidDataset);
}
