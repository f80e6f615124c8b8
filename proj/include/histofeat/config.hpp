#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "histofeat/finetune.hpp"
#include "histofeat/lasso.hpp"
#include "histofeat/network.hpp"
#include "histofeat/synthetic.hpp"

namespace histofeat {

// Flat dotted-key config: one `key = value` per line, '#' comments.  Typed
// getters record which keys were read so unknown keys can be rejected.
class ConfigMap {
   public:
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Keys present in the file but never read by the pipeline.
    std::vector<std::string> unknown_keys() const;

   private:
    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> read_;
};

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);

// "key=value" from --set flags.
void apply_override(ConfigMap& cfg, const std::string& assignment);

struct PipelineConfig {
    std::string out_dir = "out";
    std::string source_dir;      // source-domain class dataset
    std::string target_dir;      // target-domain class dataset
    std::string manifest_path;   // patient manifest csv
    std::string expression_path;
    std::string mutation_path;
    std::string checkpoint_path;

    NetworkConfig network;

    int tile_size = 32;
    double target_mpp = 0.25;
    int white_threshold = 230;
    double max_white_fraction = 0.9;

    bool stain_enabled = true;
    MacenkoParams stain;

    FineTuneConfig finetune;
    bool reinit_head = true;
    double pretrain_lr = 1e-3;
    int pretrain_epochs = 60;
    int pretrain_batch = 32;

    double svc_c = 1.0;
    double svr_c = 1.0;
    double svr_epsilon = 0.1;
    LassoFamily mutation_family = LassoFamily::Logistic;

    int cv_k = 5;
    int cv_repeats = 50;
    double alpha = 0.05;
    int scatter_genes = 4;

    std::uint64_t seed = 0;
    int threads = 1;

    SyntheticSpec synthetic;
};

// Materializes and validates the typed config; errors name the field path.
// Unknown keys in the map are rejected.
PipelineConfig build_pipeline_config(const ConfigMap& cfg);

}  // namespace histofeat
