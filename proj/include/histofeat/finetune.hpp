#pragma once

// Two-step transfer protocol: step 1 trains the add-on head with the backbone
// frozen, step 2 tunes the backbone with the head frozen.

#include <cstdint>
#include <string>
#include <vector>

#include "histofeat/dataset.hpp"
#include "histofeat/network.hpp"

namespace histofeat {

struct FineTuneConfig {
    double lr_step1 = 4e-4;
    int epochs_step1 = 20;
    double lr_step2 = 5e-5;
    int epochs_step2 = 10;
    int batch_size = 128;
    std::uint64_t seed = 0;
    int threads = 1;
};

void validate_finetune_config(const FineTuneConfig& cfg);

// Tiles stacked into [N,H,W,3] with u8 values divided by 255.
nn::Tensor tiles_to_batch(const std::vector<Tile>& tiles);

struct TrainStats {
    std::vector<double> epoch_losses;  // mean cross-entropy per epoch
};

// Adam over shuffled minibatches; the final partial batch is kept.  Each epoch
// reshuffles from a seed derived from (seed, epoch).  `phase` tags log lines.
TrainStats train_loop(Model& model, const nn::Tensor& inputs, const std::vector<int>& labels,
                      double lr, int epochs, int batch_size, const std::set<std::string>& frozen,
                      std::uint64_t seed, int threads, const std::string& phase);

// Step 1 freezes every "a.*" tensor.  Because the backbone is constant its
// pooled outputs are computed once and the head is trained on them; this is
// bit-identical to running the full network every batch.
TrainStats finetune_step1(Model& model, const LabeledDataset& data, const FineTuneConfig& cfg);

// Same loop with the full network and every "b.*" tensor frozen.
TrainStats finetune_step2(Model& model, const LabeledDataset& data, const FineTuneConfig& cfg);

// Source-domain training of all parameters.
TrainStats pretrain(Model& model, const LabeledDataset& data, double lr, int epochs,
                    int batch_size, std::uint64_t seed, int threads);

// Mean cross-entropy of the current model on a dataset (no updates).
double eval_loss(const Model& model, const LabeledDataset& data, int threads = 1);
double eval_accuracy(const Model& model, const LabeledDataset& data, int threads = 1);

}  // namespace histofeat
