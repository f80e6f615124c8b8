#pragma once

#include <map>
#include <string>
#include <vector>

#include "histofeat/network.hpp"
#include "histofeat/tiling.hpp"

namespace histofeat {

struct FeatureMatrix {
    std::vector<std::string> ids;
    int dim = 0;
    std::vector<float> values;  // ids.size() x dim, row-major

    std::size_t rows() const { return ids.size(); }
    const float* row(std::size_t i) const { return values.data() + i * std::size_t(dim); }
    float* row(std::size_t i) { return values.data() + i * std::size_t(dim); }
};

// One row per tile: the post-ReLU activations of the wide dense layer.
// Evaluation is per-tile, so batching cannot change the numbers.
FeatureMatrix extract_tile_features(const Model& model, const std::vector<Tile>& tiles,
                                    int threads = 1);

// Patient row = mean of its tile rows, accumulated in ascending tile-id order;
// patients are emitted in ascending patient-id order.
FeatureMatrix aggregate_patient(const FeatureMatrix& tile_features,
                                const std::map<std::string, std::string>& tile_to_patient);

// Binary format: magic "PFV1", u32 n_rows, u32 dim, then per row
// u32 id length + UTF-8 id + dim f32 little-endian values.
void save_features(const std::string& path, const FeatureMatrix& fm);
FeatureMatrix load_features(const std::string& path);

// CSV mirror: id,f0,...,f{D-1}.
void save_features_csv(const std::string& path, const FeatureMatrix& fm);

}  // namespace histofeat
