#include "histofeat/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "histofeat/adam.hpp"
#include "histofeat/logging.hpp"
#include "histofeat/parallel.hpp"
#include "histofeat/rng.hpp"

namespace histofeat {

void validate_finetune_config(const FineTuneConfig& cfg) {
    if (!(cfg.lr_step1 > 0.0) || !(cfg.lr_step2 > 0.0))
        throw ConfigError("learning rates must be > 0");
    if (cfg.epochs_step1 < 0 || cfg.epochs_step2 < 0) throw ConfigError("epochs must be >= 0");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
}

nn::Tensor tiles_to_batch(const std::vector<Tile>& tiles) {
    if (tiles.empty()) throw InvalidInput("no tiles");
    const int H = tiles[0].pixels.height, W = tiles[0].pixels.width;
    for (const auto& t : tiles)
        if (t.pixels.height != H || t.pixels.width != W)
            throw ShapeError("tiles have mixed sizes");
    nn::Tensor batch({int(tiles.size()), H, W, 3});
    for (std::size_t n = 0; n < tiles.size(); ++n) {
        const auto& px = tiles[n].pixels.pixels;
        float* dst = batch.data.data() + n * px.size();
        for (std::size_t i = 0; i < px.size(); ++i) dst[i] = float(px[i]) / 255.0f;
    }
    return batch;
}

namespace {

nn::Tensor gather_rows(const nn::Tensor& inputs, const std::vector<std::size_t>& idx) {
    std::vector<int> shape = inputs.shape;
    shape[0] = int(idx.size());
    nn::Tensor out(shape);
    const std::size_t row = inputs.numel() / std::size_t(inputs.dim(0));
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy(inputs.data.begin() + idx[i] * row, inputs.data.begin() + (idx[i] + 1) * row,
                  out.data.begin() + i * row);
    return out;
}

// Pooled backbone outputs, one row per input sample.
nn::Tensor backbone_outputs(const Model& model, const nn::Tensor& inputs, int threads) {
    auto seq = layer_sequence(model.cfg);
    while (!seq.empty() && seq.back().kind != nn::LayerKind::GlobalAvgPool) seq.pop_back();
    const int N = inputs.dim(0);
    nn::Tensor out({N, model.cfg.block2_channels});
    parallel_for(std::size_t(N), threads, [&](std::size_t n) {
        auto acts = forward_seq(seq, model.params, nn::slice_sample(inputs, int(n)));
        std::copy(acts.back().data.begin(), acts.back().data.end(),
                  out.data.begin() + n * std::size_t(model.cfg.block2_channels));
    });
    return out;
}

void check_labels(const LabeledDataset& data, const Model& model) {
    if (int(data.class_names.size()) != model.cfg.classes)
        throw ConfigError("dataset has " + std::to_string(data.class_names.size()) +
                          " classes but the classifier outputs " +
                          std::to_string(model.cfg.classes));
}

}  // namespace

TrainStats train_loop(Model& model, const nn::Tensor& inputs, const std::vector<int>& labels,
                      double lr, int epochs, int batch_size, const std::set<std::string>& frozen,
                      std::uint64_t seed, int threads, const std::string& phase) {
    const int N = inputs.dim(0);
    if (int(labels.size()) != N) throw ShapeError("labels do not match inputs");
    for (int l : labels)
        if (l < 0 || l >= model.cfg.classes) throw ConfigError("label out of classifier range");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");

    TrainStats stats;
    AdamConfig acfg;
    acfg.lr = lr;
    Adam adam(acfg);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::vector<std::size_t> perm(static_cast<std::size_t>(N));
        std::iota(perm.begin(), perm.end(), std::size_t(0));
        Rng rng(derive_seed(seed, "epoch", std::uint64_t(epoch)));
        rng.shuffle(perm);

        double loss_sum = 0.0;
        for (int base = 0; base < N; base += batch_size) {
            const int count = std::min(batch_size, N - base);
            std::vector<std::size_t> idx(perm.begin() + base, perm.begin() + base + count);
            nn::Tensor batch = gather_rows(inputs, idx);
            std::vector<int> blabels(static_cast<std::size_t>(count));
            for (int i = 0; i < count; ++i) blabels[std::size_t(i)] = labels[idx[std::size_t(i)]];
            auto lg = loss_and_grads(model, batch, blabels, frozen, threads);
            adam.step(model.params, lg.grads);
            loss_sum += double(lg.loss) * count;
        }
        const double epoch_loss = loss_sum / N;
        stats.epoch_losses.push_back(epoch_loss);
        log_event("epoch", {{"phase", phase}, {"epoch", epoch}, {"loss", epoch_loss}});
    }
    return stats;
}

TrainStats finetune_step1(Model& model, const LabeledDataset& data, const FineTuneConfig& cfg) {
    validate_finetune_config(cfg);
    check_labels(data, model);
    if (cfg.epochs_step1 == 0) return {};
    // The frozen backbone makes its pooled outputs constants, so they are
    // computed once and the head trains on them; batches then run through the
    // dense layers exactly as the full forward would.
    nn::Tensor pooled = backbone_outputs(model, tiles_to_batch(data.tiles), cfg.threads);
    return train_loop(model, pooled, data.labels, cfg.lr_step1, cfg.epochs_step1, cfg.batch_size,
                      names_with_prefix(model.params, "a."), derive_seed(cfg.seed, "step1"),
                      cfg.threads, "finetune_step1");
}

TrainStats finetune_step2(Model& model, const LabeledDataset& data, const FineTuneConfig& cfg) {
    validate_finetune_config(cfg);
    check_labels(data, model);
    if (cfg.epochs_step2 == 0) return {};
    return train_loop(model, tiles_to_batch(data.tiles), data.labels, cfg.lr_step2,
                      cfg.epochs_step2, cfg.batch_size, names_with_prefix(model.params, "b."),
                      derive_seed(cfg.seed, "step2"), cfg.threads, "finetune_step2");
}

TrainStats pretrain(Model& model, const LabeledDataset& data, double lr, int epochs,
                    int batch_size, std::uint64_t seed, int threads) {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be > 0");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    check_labels(data, model);
    if (epochs == 0) return {};
    return train_loop(model, tiles_to_batch(data.tiles), data.labels, lr, epochs, batch_size, {},
                      derive_seed(seed, "pretrain"), threads, "pretrain");
}

double eval_loss(const Model& model, const LabeledDataset& data, int threads) {
    nn::Tensor inputs = tiles_to_batch(data.tiles);
    const int N = inputs.dim(0);
    const auto seq = layer_sequence(model.cfg);
    std::vector<double> losses(static_cast<std::size_t>(N));
    parallel_for(std::size_t(N), threads, [&](std::size_t n) {
        auto acts = forward_seq(seq, model.params, nn::slice_sample(inputs, int(n)));
        losses[n] = double(nn::softmax_xent_row(acts.back(), 0, data.labels[n]).loss);
    });
    double sum = 0.0;
    for (double l : losses) sum += l;
    return sum / N;
}

double eval_accuracy(const Model& model, const LabeledDataset& data, int threads) {
    nn::Tensor inputs = tiles_to_batch(data.tiles);
    const int N = inputs.dim(0);
    const auto seq = layer_sequence(model.cfg);
    std::vector<int> hits(static_cast<std::size_t>(N));
    parallel_for(std::size_t(N), threads, [&](std::size_t n) {
        auto acts = forward_seq(seq, model.params, nn::slice_sample(inputs, int(n)));
        const auto& logits = acts.back();
        int best = 0;
        for (int c = 1; c < logits.dim(1); ++c)
            if (logits.data[std::size_t(c)] > logits.data[std::size_t(best)]) best = c;
        hits[n] = best == data.labels[n] ? 1 : 0;
    });
    double sum = 0.0;
    for (int h : hits) sum += h;
    return sum / N;
}

}  // namespace histofeat
