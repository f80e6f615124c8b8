#include "histofeat/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "histofeat/common.hpp"
#include "histofeat/io_util.hpp"

namespace fs = std::filesystem;

namespace histofeat {

LabeledDataset load_class_dataset(const std::string& root, int tile_size) {
    if (!fs::is_directory(root)) throw InvalidDataset("not a directory: " + root);

    std::vector<std::string> class_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
    }
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.size() < 2)
        throw InvalidDataset("need >= 2 class folders under " + root + ", found " +
                             std::to_string(class_dirs.size()));

    LabeledDataset ds;
    ds.class_names = class_dirs;
    for (std::size_t c = 0; c < class_dirs.size(); ++c) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(fs::path(root) / class_dirs[c])) {
            if (entry.is_regular_file() && has_image_extension(entry.path().string()))
                files.push_back(entry.path().filename().string());
        }
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw InvalidDataset("class folder has no images: " + class_dirs[c]);
        for (const auto& f : files) {
            std::string path = (fs::path(root) / class_dirs[c] / f).string();
            Tile t;
            t.pixels = load_image(path);
            if (t.pixels.width != tile_size || t.pixels.height != tile_size)
                throw ItemError(path, "expected " + std::to_string(tile_size) + "x" +
                                          std::to_string(tile_size) + ", got " +
                                          std::to_string(t.pixels.width) + "x" +
                                          std::to_string(t.pixels.height));
            t.source_id = class_dirs[c] + "/" + f;
            ds.tiles.push_back(std::move(t));
            ds.labels.push_back(int(c));
        }
    }
    return ds;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::string content = read_file(path);
    std::vector<std::string> lines;
    std::istringstream ss(content);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace

PatientManifest load_manifest(const std::string& csv_path) {
    auto lines = read_lines(csv_path);
    if (lines.empty()) throw InvalidDataset("empty manifest: " + csv_path);
    auto header = split_csv_line(lines[0]);
    if (header != std::vector<std::string>{"patient_id", "image_path", "mpp"})
        throw InvalidDataset("manifest header must be patient_id,image_path,mpp: " + csv_path);

    fs::path base = fs::path(csv_path).parent_path();
    PatientManifest manifest;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != 3)
            throw InvalidDataset("manifest row " + std::to_string(i) + " has " +
                                 std::to_string(fields.size()) + " fields");
        ManifestRow row;
        row.patient_id = fields[0];
        if (row.patient_id.empty())
            throw InvalidDataset("manifest row " + std::to_string(i) + " has empty patient id");
        fs::path p(fields[1]);
        row.image_path = p.is_absolute() ? p.string() : (base / p).string();
        row.mpp = parse_double(fields[2]);
        if (!(row.mpp > 0.0) || !std::isfinite(row.mpp))
            throw InvalidDataset("manifest row " + std::to_string(i) + " has invalid mpp");
        manifest.rows.push_back(std::move(row));
    }
    if (manifest.rows.empty()) throw InvalidDataset("manifest has no rows: " + csv_path);
    return manifest;
}

TargetTable load_target_table(const std::string& csv_path) {
    auto lines = read_lines(csv_path);
    if (lines.size() < 2) throw InvalidTarget("target table needs a header and rows: " + csv_path);
    auto header = split_csv_line(lines[0]);
    if (header.size() < 2) throw InvalidTarget("target table needs at least one value column");

    TargetTable table;
    table.id_column = header[0];
    table.columns.assign(header.begin() + 1, header.end());
    std::set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != header.size())
            throw InvalidTarget("row " + std::to_string(i) + " has " +
                                std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(header.size()));
        if (!seen.insert(fields[0]).second)
            throw InvalidTarget("duplicate id in target table: " + fields[0]);
        table.ids.push_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            if (fields[j].empty())
                throw InvalidTarget("missing value at row " + std::to_string(i) + " column " +
                                    header[j]);
            table.values.push_back(parse_double(fields[j]));
        }
    }
    return table;
}

void save_target_table(const std::string& csv_path, const TargetTable& table) {
    std::string out = table.id_column;
    for (const auto& c : table.columns) {
        check_csv_field(c);
        out += "," + c;
    }
    out += "\n";
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        check_csv_field(table.ids[i]);
        out += table.ids[i];
        for (std::size_t j = 0; j < table.columns.size(); ++j)
            out += "," + format_double(table.at(i, j));
        out += "\n";
    }
    write_file(csv_path, out);
}

LabelTable load_label_table(const std::string& csv_path) {
    auto lines = read_lines(csv_path);
    if (lines.size() < 2) throw InvalidDataset("label table needs a header and rows: " + csv_path);
    auto header = split_csv_line(lines[0]);
    if (header != std::vector<std::string>{"id", "class_index", "class_name"})
        throw InvalidDataset("label table header must be id,class_index,class_name");

    LabelTable table;
    std::vector<std::pair<int, std::string>> name_by_index;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = split_csv_line(lines[i]);
        if (fields.size() != 3) throw InvalidDataset("bad label row " + std::to_string(i));
        table.ids.push_back(fields[0]);
        int label = int(parse_long(fields[1]));
        if (label < 0) throw InvalidDataset("negative class index at row " + std::to_string(i));
        table.labels.push_back(label);
        name_by_index.emplace_back(label, fields[2]);
    }
    int max_label = *std::max_element(table.labels.begin(), table.labels.end());
    table.class_names.resize(std::size_t(max_label) + 1);
    for (const auto& [idx, name] : name_by_index) {
        if (!table.class_names[idx].empty() && table.class_names[idx] != name)
            throw InvalidDataset("conflicting names for class " + std::to_string(idx));
        table.class_names[idx] = name;
    }
    for (std::size_t c = 0; c < table.class_names.size(); ++c)
        if (table.class_names[c].empty())
            throw InvalidDataset("class " + std::to_string(c) + " has no rows");
    return table;
}

void save_label_table(const std::string& csv_path, const LabelTable& table) {
    std::string out = "id,class_index,class_name\n";
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        check_csv_field(table.ids[i]);
        const std::string& name = table.class_names.at(std::size_t(table.labels[i]));
        check_csv_field(name);
        out += table.ids[i] + "," + std::to_string(table.labels[i]) + "," + name + "\n";
    }
    write_file(csv_path, out);
}

}  // namespace histofeat
