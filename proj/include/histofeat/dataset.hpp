#pragma once

#include <string>
#include <vector>

#include "histofeat/tiling.hpp"

namespace histofeat {

struct LabeledDataset {
    std::vector<Tile> tiles;
    std::vector<int> labels;             // per-tile class index in [0, C)
    std::vector<std::string> class_names;

    std::size_t size() const { return tiles.size(); }
    int class_count() const { return int(class_names.size()); }
};

// Folder-per-class layout: root/CLASS_NAME/*.png|*.tif. Class indices are
// the lexicographic ranks of the folder names, files are visited in
// lexicographic order, so two loads of the same tree are identical.
// Every image must be exactly tile_size x tile_size.
LabeledDataset load_class_dataset(const std::string& root, int tile_size);

struct ManifestRow {
    std::string patient_id;
    std::string image_path;  // resolved against the manifest's directory
    double mpp = 0.0;
};

struct PatientManifest {
    std::vector<ManifestRow> rows;
};

// CSV with header patient_id,image_path,mpp.
PatientManifest load_manifest(const std::string& csv_path);

// Numeric table keyed by an id column: expression values or mutation flags,
// one column per gene. Missing values are disallowed.
struct TargetTable {
    std::string id_column;
    std::vector<std::string> ids;
    std::vector<std::string> columns;
    std::vector<double> values;  // row-major, ids.size() x columns.size()

    double at(std::size_t row, std::size_t col) const { return values[row * columns.size() + col]; }
};

TargetTable load_target_table(const std::string& csv_path);
void save_target_table(const std::string& csv_path, const TargetTable& table);

// Per-tile labels emitted next to tile feature files: id,class_index,class_name.
struct LabelTable {
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<std::string> class_names;
};

LabelTable load_label_table(const std::string& csv_path);
void save_label_table(const std::string& csv_path, const LabelTable& table);

}  // namespace histofeat
