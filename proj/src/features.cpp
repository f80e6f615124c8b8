#include "histofeat/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "histofeat/common.hpp"
#include "histofeat/finetune.hpp"
#include "histofeat/io_util.hpp"
#include "histofeat/parallel.hpp"

namespace histofeat {

namespace {

void validate_matrix(const FeatureMatrix& fm, const std::string& what) {
    if (fm.dim <= 0) throw InvalidInput(what + ": non-positive feature dim");
    if (fm.values.size() != fm.rows() * std::size_t(fm.dim))
        throw ShapeError(what + ": value buffer does not match rows x dim");
    std::set<std::string> seen;
    for (const auto& id : fm.ids)
        if (!seen.insert(id).second) throw InvalidInput(what + ": duplicate row id " + id);
    for (float v : fm.values)
        if (!std::isfinite(v)) throw NumericalError(what + ": non-finite feature value");
}

}  // namespace

FeatureMatrix extract_tile_features(const Model& model, const std::vector<Tile>& tiles,
                                    int threads) {
    if (tiles.empty()) throw InvalidInput("no tiles to extract from");
    nn::Tensor inputs = tiles_to_batch(tiles);
    const auto seq = layer_sequence(model.cfg);
    const std::size_t tap = nn::feature_activation_index(seq);

    FeatureMatrix fm;
    fm.dim = model.cfg.head_width;
    fm.ids.resize(tiles.size());
    fm.values.assign(tiles.size() * std::size_t(fm.dim), 0.0f);
    parallel_for(tiles.size(), threads, [&](std::size_t n) {
        auto acts = forward_seq(seq, model.params, nn::slice_sample(inputs, int(n)));
        const auto& feat = acts[tap];
        std::copy(feat.data.begin(), feat.data.end(), fm.row(n));
        fm.ids[n] = tiles[n].id();
    });
    validate_matrix(fm, "tile features");
    return fm;
}

FeatureMatrix aggregate_patient(const FeatureMatrix& tile_features,
                                const std::map<std::string, std::string>& tile_to_patient) {
    validate_matrix(tile_features, "tile features");

    std::vector<std::size_t> order(tile_features.rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return tile_features.ids[a] < tile_features.ids[b];
    });

    // std::map keeps patients in ascending id order for both the sum pass and
    // the emit pass.
    std::map<std::string, std::pair<std::vector<double>, int>> sums;
    for (const auto& [tile_id, patient_id] : tile_to_patient)
        sums.emplace(patient_id, std::make_pair(std::vector<double>(), 0));
    for (std::size_t i : order) {
        auto it = tile_to_patient.find(tile_features.ids[i]);
        if (it == tile_to_patient.end())
            throw InvalidInput("tile has no patient mapping: " + tile_features.ids[i]);
        auto& [sum, count] = sums.at(it->second);
        if (sum.empty()) sum.assign(std::size_t(tile_features.dim), 0.0);
        const float* row = tile_features.row(i);
        for (int d = 0; d < tile_features.dim; ++d) sum[std::size_t(d)] += double(row[d]);
        ++count;
    }

    FeatureMatrix out;
    out.dim = tile_features.dim;
    for (const auto& [patient_id, entry] : sums) {
        const auto& [sum, count] = entry;
        if (count == 0) throw EmptyPatient("patient has no tiles: " + patient_id);
        out.ids.push_back(patient_id);
        for (int d = 0; d < out.dim; ++d)
            out.values.push_back(float(sum[std::size_t(d)] / count));
    }
    validate_matrix(out, "patient features");
    return out;
}

namespace {
constexpr char kMagic[4] = {'P', 'F', 'V', '1'};
}

void save_features(const std::string& path, const FeatureMatrix& fm) {
    validate_matrix(fm, "features");
    std::string out;
    out.append(kMagic, 4);
    put_u32le(out, std::uint32_t(fm.rows()));
    put_u32le(out, std::uint32_t(fm.dim));
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        put_u32le(out, std::uint32_t(fm.ids[i].size()));
        out += fm.ids[i];
        const float* row = fm.row(i);
        for (int d = 0; d < fm.dim; ++d) put_f32le(out, row[d]);
    }
    write_file(path, out);
}

FeatureMatrix load_features(const std::string& path) {
    const std::string buf = read_file(path);
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
        if (pos + n > buf.size()) throw IoError("truncated feature file: " + path);
    };
    need(12);
    if (std::string(buf.data(), 4) != std::string(kMagic, 4))
        throw IoError("bad feature file magic: " + path);
    pos = 4;
    const std::uint32_t rows = get_u32le(buf, pos);
    const std::uint32_t dim = get_u32le(buf, pos);
    if (dim == 0) throw IoError("feature file has zero dim: " + path);

    FeatureMatrix fm;
    fm.dim = int(dim);
    fm.values.reserve(std::size_t(rows) * dim);
    for (std::uint32_t i = 0; i < rows; ++i) {
        need(4);
        const std::uint32_t id_len = get_u32le(buf, pos);
        need(id_len + std::size_t(dim) * 4);
        fm.ids.emplace_back(buf.data() + pos, id_len);
        pos += id_len;
        for (std::uint32_t d = 0; d < dim; ++d) fm.values.push_back(get_f32le(buf, pos));
    }
    if (pos != buf.size()) throw IoError("trailing bytes in feature file: " + path);
    validate_matrix(fm, "features");
    return fm;
}

void save_features_csv(const std::string& path, const FeatureMatrix& fm) {
    validate_matrix(fm, "features");
    std::string out = "id";
    for (int d = 0; d < fm.dim; ++d) out += ",f" + std::to_string(d);
    out += "\n";
    for (std::size_t i = 0; i < fm.rows(); ++i) {
        check_csv_field(fm.ids[i]);
        out += fm.ids[i];
        const float* row = fm.row(i);
        for (int d = 0; d < fm.dim; ++d) out += "," + format_double(double(row[d]));
        out += "\n";
    }
    write_file(path, out);
}

}  // namespace histofeat
