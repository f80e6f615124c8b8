#include "histofeat/network.hpp"

#include <cmath>
#include <cstring>

#include "histofeat/rng.hpp"

namespace histofeat {

std::vector<nn::Layer> layer_sequence(const NetworkConfig& cfg) {
    (void)cfg;
    using K = nn::LayerKind;
    std::vector<nn::Layer> seq;
    seq.push_back({K::Conv2d, 2, 1, "a.stem.w", "a.stem.b"});
    seq.push_back({K::Relu, 1, 0, "", ""});
    seq.push_back({K::DepthwiseConv2d, 1, 1, "a.b1.dw.w", "a.b1.dw.b"});
    seq.push_back({K::PointwiseConv2d, 1, 0, "a.b1.pw.w", "a.b1.pw.b"});
    seq.push_back({K::Relu, 1, 0, "", ""});
    seq.push_back({K::PointwiseConv2d, 2, 0, "a.down.w", "a.down.b"});
    seq.push_back({K::DepthwiseConv2d, 1, 1, "a.b2.dw.w", "a.b2.dw.b"});
    seq.push_back({K::PointwiseConv2d, 1, 0, "a.b2.pw.w", "a.b2.pw.b"});
    seq.push_back({K::Relu, 1, 0, "", ""});
    seq.push_back({K::GlobalAvgPool, 1, 0, "", ""});
    seq.push_back({K::Dense, 1, 0, "b.fc1.w", "b.fc1.b"});
    seq.push_back({K::Relu, 1, 0, "", ""});
    seq.push_back({K::Dense, 1, 0, "b.out.w", "b.out.b"});
    return seq;
}

std::vector<nn::Layer> head_sequence(const NetworkConfig& cfg) {
    (void)cfg;
    using K = nn::LayerKind;
    std::vector<nn::Layer> seq;
    seq.push_back({K::Dense, 1, 0, "b.fc1.w", "b.fc1.b"});
    seq.push_back({K::Relu, 1, 0, "", ""});
    seq.push_back({K::Dense, 1, 0, "b.out.w", "b.out.b"});
    return seq;
}

namespace {

nn::Tensor he_tensor(Rng& rng, std::vector<int> shape, int fan_in) {
    nn::Tensor t(std::move(shape));
    const double sd = std::sqrt(2.0 / double(fan_in));
    for (auto& v : t.data) v = float(rng.normal() * sd);
    return t;
}

void add_head_params(nn::Params& p, const NetworkConfig& cfg, Rng& rng) {
    p.add("b.fc1.w", he_tensor(rng, {cfg.block2_channels, cfg.head_width}, cfg.block2_channels));
    p.add("b.fc1.b", nn::Tensor({cfg.head_width}));
    // Small output-layer init keeps initial logits near zero so the first
    // epochs are spent separating classes instead of deflating random logits.
    nn::Tensor out = he_tensor(rng, {cfg.head_width, cfg.classes}, cfg.head_width);
    for (auto& v : out.data) v *= 0.05f;
    p.add("b.out.w", std::move(out));
    p.add("b.out.b", nn::Tensor({cfg.classes}));
}

}  // namespace

Model build_model(const NetworkConfig& cfg, std::uint64_t seed) {
    if (cfg.input_channels < 1 || cfg.stem_channels < 1 || cfg.block1_channels < 1 ||
        cfg.block2_channels < 1 || cfg.head_width < 1 || cfg.classes < 2)
        throw ConfigError("invalid network widths");
    Rng rng(derive_seed(seed, "init"));
    Model m;
    m.cfg = cfg;
    auto& p = m.params;
    p.add("a.stem.w",
          he_tensor(rng, {3, 3, cfg.input_channels, cfg.stem_channels}, 9 * cfg.input_channels));
    p.add("a.stem.b", nn::Tensor({cfg.stem_channels}));
    p.add("a.b1.dw.w", he_tensor(rng, {3, 3, cfg.stem_channels}, 9));
    p.add("a.b1.dw.b", nn::Tensor({cfg.stem_channels}));
    p.add("a.b1.pw.w",
          he_tensor(rng, {cfg.stem_channels, cfg.block1_channels}, cfg.stem_channels));
    p.add("a.b1.pw.b", nn::Tensor({cfg.block1_channels}));
    p.add("a.down.w",
          he_tensor(rng, {cfg.block1_channels, cfg.block1_channels}, cfg.block1_channels));
    p.add("a.down.b", nn::Tensor({cfg.block1_channels}));
    p.add("a.b2.dw.w", he_tensor(rng, {3, 3, cfg.block1_channels}, 9));
    p.add("a.b2.dw.b", nn::Tensor({cfg.block1_channels}));
    p.add("a.b2.pw.w",
          he_tensor(rng, {cfg.block1_channels, cfg.block2_channels}, cfg.block1_channels));
    p.add("a.b2.pw.b", nn::Tensor({cfg.block2_channels}));
    add_head_params(p, cfg, rng);
    return m;
}

NetworkConfig infer_config(const nn::Params& params) {
    NetworkConfig cfg;
    const auto& stem = params.at("a.stem.w");
    if (stem.rank() != 4 || stem.dim(0) != 3 || stem.dim(1) != 3)
        throw ShapeError("a.stem.w must be [3,3,ic,oc], got " + nn::shape_str(stem.shape));
    cfg.input_channels = stem.dim(2);
    cfg.stem_channels = stem.dim(3);
    const auto& b1pw = params.at("a.b1.pw.w");
    if (b1pw.rank() != 2 || b1pw.dim(0) != cfg.stem_channels)
        throw ShapeError("a.b1.pw.w inconsistent with stem");
    cfg.block1_channels = b1pw.dim(1);
    const auto& b2pw = params.at("a.b2.pw.w");
    if (b2pw.rank() != 2 || b2pw.dim(0) != cfg.block1_channels)
        throw ShapeError("a.b2.pw.w inconsistent with block 1");
    cfg.block2_channels = b2pw.dim(1);
    const auto& fc1 = params.at("b.fc1.w");
    if (fc1.rank() != 2 || fc1.dim(0) != cfg.block2_channels)
        throw ShapeError("b.fc1.w inconsistent with backbone output");
    cfg.head_width = fc1.dim(1);
    const auto& out = params.at("b.out.w");
    if (out.rank() != 2 || out.dim(0) != cfg.head_width)
        throw ShapeError("b.out.w inconsistent with b.fc1.w");
    cfg.classes = out.dim(1);

    // Remaining tensors get their shapes cross-checked too.
    auto expect = [&](const std::string& name, std::vector<int> shape) {
        const auto& t = params.at(name);
        if (t.shape != shape)
            throw ShapeError(name + " expected " + nn::shape_str(shape) + ", got " +
                             nn::shape_str(t.shape));
    };
    expect("a.stem.b", {cfg.stem_channels});
    expect("a.b1.dw.w", {3, 3, cfg.stem_channels});
    expect("a.b1.dw.b", {cfg.stem_channels});
    expect("a.b1.pw.b", {cfg.block1_channels});
    expect("a.down.w", {cfg.block1_channels, cfg.block1_channels});
    expect("a.down.b", {cfg.block1_channels});
    expect("a.b2.dw.w", {3, 3, cfg.block1_channels});
    expect("a.b2.dw.b", {cfg.block1_channels});
    expect("a.b2.pw.b", {cfg.block2_channels});
    expect("b.fc1.b", {cfg.head_width});
    expect("b.out.b", {cfg.classes});
    return cfg;
}

void reset_head(Model& model, int classes, std::uint64_t seed) {
    if (classes < 2) throw ConfigError("need at least 2 classes");
    nn::Params keep;
    for (auto& [name, t] : model.params.items)
        if (name.rfind("a.", 0) == 0) keep.items.emplace_back(name, std::move(t));
    model.cfg.classes = classes;
    Rng rng(derive_seed(seed, "head"));
    add_head_params(keep, model.cfg, rng);
    model.params = std::move(keep);
}

ForwardOut forward(const Model& model, const nn::Tensor& batch, bool train_mode) {
    (void)train_mode;
    const auto seq = batch.rank() == 2 ? head_sequence(model.cfg) : layer_sequence(model.cfg);
    auto acts = forward_seq(seq, model.params, batch);
    ForwardOut out;
    out.features = acts[nn::feature_activation_index(seq)];
    out.logits = std::move(acts.back());
    return out;
}

LossGrads loss_and_grads(const Model& model, const nn::Tensor& batch,
                         const std::vector<int>& labels, const std::set<std::string>& frozen,
                         int threads) {
    const auto seq = batch.rank() == 2 ? head_sequence(model.cfg) : layer_sequence(model.cfg);
    auto r = nn::loss_and_grads_seq(seq, model.params, batch, labels, frozen, threads);
    LossGrads out;
    out.loss = r.loss;
    out.grads = std::move(r.grads);
    return out;
}

std::set<std::string> names_with_prefix(const nn::Params& params, const std::string& prefix) {
    std::set<std::string> out;
    for (const auto& [name, t] : params.items)
        if (name.rfind(prefix, 0) == 0) out.insert(name);
    return out;
}

std::uint64_t params_checksum(const nn::Params& params, const std::string& prefix) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* bytes, std::size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(bytes);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& [name, t] : params.items) {
        if (!prefix.empty() && name.rfind(prefix, 0) != 0) continue;
        mix(name.data(), name.size());
        mix(t.data.data(), t.data.size() * sizeof(float));
    }
    return h;
}

}  // namespace histofeat
