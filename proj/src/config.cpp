#include "histofeat/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "histofeat/common.hpp"
#include "histofeat/io_util.hpp"

namespace histofeat {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
    throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

}  // namespace

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    read_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    read_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        return parse_double(it->second);
    } catch (const InvalidInput&) {
        bad_value(key, it->second, "a number");
    }
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
    read_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        long v = parse_long(it->second);
        if (v < INT_MIN || v > INT_MAX) throw InvalidInput("range");
        return static_cast<int>(v);
    } catch (const InvalidInput&) {
        bad_value(key, it->second, "an integer");
    }
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) const {
    read_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string& s = it->second;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 10);
    if (ec != std::errc() || p != s.data() + s.size())
        bad_value(key, s, "an unsigned integer");
    return v;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    read_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string& s = it->second;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    bad_value(key, s, "a boolean (true/false)");
}

std::vector<std::string> ConfigMap::unknown_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : kv_)
        if (read_.count(key) == 0) out.push_back(key);
    return out;
}

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + stripped + "'");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        cfg.set(key, value);
    }
    return cfg;
}

ConfigMap load_config_file(const std::string& path) {
    return parse_config_text(read_file(path));
}

void apply_override(ConfigMap& cfg, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must be key=value, got '" + assignment + "'");
    std::string key = trim(assignment.substr(0, eq));
    std::string value = trim(assignment.substr(eq + 1));
    if (key.empty()) throw ConfigError("override has an empty key: '" + assignment + "'");
    cfg.set(key, value);
}

namespace {

void check_positive_int(const char* key, int v) {
    if (v < 1) throw ConfigError(std::string("config key '") + key + "' must be positive");
}

void check_positive(const char* key, double v) {
    if (!(v > 0) || !std::isfinite(v))
        throw ConfigError(std::string("config key '") + key + "' must be positive and finite");
}

void check_nonnegative(const char* key, double v) {
    if (!(v >= 0) || !std::isfinite(v))
        throw ConfigError(std::string("config key '") + key + "' must be nonnegative and finite");
}

}  // namespace

PipelineConfig build_pipeline_config(const ConfigMap& cfg) {
    PipelineConfig pc;

    pc.out_dir = cfg.get_string("out_dir", pc.out_dir);
    pc.source_dir = cfg.get_string("data.source_dir", pc.source_dir);
    pc.target_dir = cfg.get_string("data.target_dir", pc.target_dir);
    pc.manifest_path = cfg.get_string("data.manifest", pc.manifest_path);
    pc.expression_path = cfg.get_string("data.expression", pc.expression_path);
    pc.mutation_path = cfg.get_string("data.mutation", pc.mutation_path);
    pc.checkpoint_path = cfg.get_string("model.checkpoint", pc.checkpoint_path);

    pc.network.input_channels = cfg.get_int("network.input_channels", pc.network.input_channels);
    pc.network.stem_channels = cfg.get_int("network.stem_channels", pc.network.stem_channels);
    pc.network.block1_channels =
        cfg.get_int("network.block1_channels", pc.network.block1_channels);
    pc.network.block2_channels =
        cfg.get_int("network.block2_channels", pc.network.block2_channels);
    pc.network.head_width = cfg.get_int("network.head_width", pc.network.head_width);
    pc.network.classes = cfg.get_int("network.classes", pc.network.classes);
    check_positive_int("network.input_channels", pc.network.input_channels);
    check_positive_int("network.stem_channels", pc.network.stem_channels);
    check_positive_int("network.block1_channels", pc.network.block1_channels);
    check_positive_int("network.block2_channels", pc.network.block2_channels);
    check_positive_int("network.head_width", pc.network.head_width);
    if (pc.network.classes < 2) throw ConfigError("config key 'network.classes' must be >= 2");

    pc.tile_size = cfg.get_int("tiling.tile_size", pc.tile_size);
    pc.target_mpp = cfg.get_double("tiling.target_mpp", pc.target_mpp);
    pc.white_threshold = cfg.get_int("tiling.white_threshold", pc.white_threshold);
    pc.max_white_fraction = cfg.get_double("tiling.max_white_fraction", pc.max_white_fraction);
    check_positive_int("tiling.tile_size", pc.tile_size);
    check_positive("tiling.target_mpp", pc.target_mpp);
    if (pc.white_threshold < 0 || pc.white_threshold > 255)
        throw ConfigError("config key 'tiling.white_threshold' must be in [0, 255]");
    if (!(pc.max_white_fraction >= 0) || pc.max_white_fraction > 1)
        throw ConfigError("config key 'tiling.max_white_fraction' must be in [0, 1]");

    pc.stain_enabled = cfg.get_bool("stain.enabled", pc.stain_enabled);
    pc.stain.alpha = cfg.get_double("stain.alpha", pc.stain.alpha);
    pc.stain.beta = cfg.get_double("stain.beta", pc.stain.beta);
    pc.stain.io = cfg.get_int("stain.io", pc.stain.io);
    if (!(pc.stain.alpha > 0) || pc.stain.alpha >= 50)
        throw ConfigError("config key 'stain.alpha' must be in (0, 50)");
    check_nonnegative("stain.beta", pc.stain.beta);
    check_positive_int("stain.io", pc.stain.io);

    pc.finetune.lr_step1 = cfg.get_double("finetune.lr_step1", pc.finetune.lr_step1);
    pc.finetune.epochs_step1 = cfg.get_int("finetune.epochs_step1", pc.finetune.epochs_step1);
    pc.finetune.lr_step2 = cfg.get_double("finetune.lr_step2", pc.finetune.lr_step2);
    pc.finetune.epochs_step2 = cfg.get_int("finetune.epochs_step2", pc.finetune.epochs_step2);
    pc.finetune.batch_size = cfg.get_int("finetune.batch_size", pc.finetune.batch_size);
    check_positive("finetune.lr_step1", pc.finetune.lr_step1);
    check_positive("finetune.lr_step2", pc.finetune.lr_step2);
    if (pc.finetune.epochs_step1 < 0 || pc.finetune.epochs_step2 < 0)
        throw ConfigError("config finetune epoch counts must be nonnegative");
    check_positive_int("finetune.batch_size", pc.finetune.batch_size);

    pc.reinit_head = cfg.get_bool("finetune.reinit_head", pc.reinit_head);
    pc.pretrain_lr = cfg.get_double("pretrain.lr", pc.pretrain_lr);
    pc.pretrain_epochs = cfg.get_int("pretrain.epochs", pc.pretrain_epochs);
    pc.pretrain_batch = cfg.get_int("pretrain.batch_size", pc.pretrain_batch);
    check_positive("pretrain.lr", pc.pretrain_lr);
    if (pc.pretrain_epochs < 0)
        throw ConfigError("config key 'pretrain.epochs' must be nonnegative");
    if (pc.pretrain_batch < 1)
        throw ConfigError("config key 'pretrain.batch_size' must be positive");

    pc.svc_c = cfg.get_double("svm.svc_c", pc.svc_c);
    pc.svr_c = cfg.get_double("svm.svr_c", pc.svr_c);
    pc.svr_epsilon = cfg.get_double("svm.svr_epsilon", pc.svr_epsilon);
    check_positive("svm.svc_c", pc.svc_c);
    check_positive("svm.svr_c", pc.svr_c);
    check_nonnegative("svm.svr_epsilon", pc.svr_epsilon);

    std::string family = cfg.get_string("mutation.family", "logistic");
    if (family == "logistic") {
        pc.mutation_family = LassoFamily::Logistic;
    } else if (family == "linear") {
        pc.mutation_family = LassoFamily::Linear;
    } else {
        throw ConfigError("config key 'mutation.family' must be 'logistic' or 'linear'");
    }

    pc.cv_k = cfg.get_int("cv.k", pc.cv_k);
    pc.cv_repeats = cfg.get_int("cv.repeats", pc.cv_repeats);
    pc.alpha = cfg.get_double("cv.alpha", pc.alpha);
    pc.scatter_genes = cfg.get_int("report.scatter_genes", pc.scatter_genes);
    if (pc.cv_k < 2) throw ConfigError("config key 'cv.k' must be >= 2");
    check_positive_int("cv.repeats", pc.cv_repeats);
    if (!(pc.alpha > 0) || !(pc.alpha < 1))
        throw ConfigError("config key 'cv.alpha' must be in (0, 1)");
    if (pc.scatter_genes < 0)
        throw ConfigError("config key 'report.scatter_genes' must be nonnegative");

    pc.seed = cfg.get_u64("seed", pc.seed);
    pc.threads = cfg.get_int("threads", pc.threads);
    check_positive_int("threads", pc.threads);
    pc.finetune.seed = pc.seed;
    pc.finetune.threads = pc.threads;

    pc.synthetic.n_classes = cfg.get_int("synthetic.classes", pc.synthetic.n_classes);
    pc.synthetic.tiles_per_class_source =
        cfg.get_int("synthetic.source_tiles_per_class", pc.synthetic.tiles_per_class_source);
    pc.synthetic.tiles_per_class_target =
        cfg.get_int("synthetic.target_tiles_per_class", pc.synthetic.tiles_per_class_target);
    pc.synthetic.tile_size = cfg.get_int("synthetic.tile_size", pc.tile_size);
    pc.synthetic.patients = cfg.get_int("synthetic.patients", pc.synthetic.patients);
    pc.synthetic.patient_grid = cfg.get_int("synthetic.patient_grid", pc.synthetic.patient_grid);
    pc.synthetic.genes = cfg.get_int("synthetic.genes", pc.synthetic.genes);
    pc.synthetic.mutations = cfg.get_int("synthetic.mutations", pc.synthetic.mutations);
    pc.synthetic.concentration_noise =
        cfg.get_double("synthetic.concentration_noise", pc.synthetic.concentration_noise);
    pc.synthetic.expression_noise =
        cfg.get_double("synthetic.expression_noise", pc.synthetic.expression_noise);
    pc.synthetic.mutation_noise =
        cfg.get_double("synthetic.mutation_noise", pc.synthetic.mutation_noise);
    pc.synthetic.shift_hue_degrees =
        cfg.get_double("synthetic.shift_hue_degrees", pc.synthetic.shift_hue_degrees);
    pc.synthetic.shift_frequency =
        cfg.get_double("synthetic.shift_frequency", pc.synthetic.shift_frequency);
    pc.synthetic.shade_amplitude =
        cfg.get_double("synthetic.shade_amplitude", pc.synthetic.shade_amplitude);
    pc.synthetic.shade_frequency =
        cfg.get_double("synthetic.shade_frequency", pc.synthetic.shade_frequency);
    pc.synthetic.target_amplitude_scale =
        cfg.get_double("synthetic.target_amplitude_scale", pc.synthetic.target_amplitude_scale);
    pc.synthetic.min_ks_distance =
        cfg.get_double("synthetic.min_ks_distance", pc.synthetic.min_ks_distance);
    pc.synthetic.seed = pc.seed;
    validate_synthetic_spec(pc.synthetic);

    auto unknown = cfg.unknown_keys();
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& key : unknown) msg += " '" + key + "'";
        throw ConfigError(msg);
    }
    return pc;
}

}  // namespace histofeat
