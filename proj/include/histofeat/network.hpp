#pragma once

// Reduced Xception-style classifier.  Part A (names "a.*") is the conv backbone
// up to and including global average pooling; Part B ("b.*") is a wide dense +
// ReLU + classifier.  Widths are configurable so the full-size head is one
// config change away.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "histofeat/nn_engine.hpp"

namespace histofeat {

struct NetworkConfig {
    int input_channels = 3;
    int stem_channels = 16;
    int block1_channels = 32;
    int block2_channels = 64;
    int head_width = 64;
    int classes = 9;
};

struct Model {
    NetworkConfig cfg;
    nn::Params params;
};

// Layer order for the full network and for the Part B head alone (the head
// sequence consumes pooled feature vectors directly).
std::vector<nn::Layer> layer_sequence(const NetworkConfig& cfg);
std::vector<nn::Layer> head_sequence(const NetworkConfig& cfg);

// He-normal weights, zero biases, parameters emitted in fixed order.
Model build_model(const NetworkConfig& cfg, std::uint64_t seed);

// Reconstruct the configuration from checkpoint tensors; validates that every
// expected parameter is present with a consistent shape.
NetworkConfig infer_config(const nn::Params& params);

// Reinitialize Part B for a new class count, keeping Part A bit-identical.
void reset_head(Model& model, int classes, std::uint64_t seed);

struct ForwardOut {
    nn::Tensor features;  // post-ReLU activations of the wide dense layer, [N,W]
    nn::Tensor logits;    // classifier outputs before softmax, [N,C]
};

// batch: [N,H,W,3] with values in [0,1].  train_mode is accepted for forward
// compatibility; the reduced network has no train-only layers.
ForwardOut forward(const Model& model, const nn::Tensor& batch, bool train_mode = false);

struct LossGrads {
    float loss = 0.0f;
    nn::Params grads;  // entries only for non-frozen parameters
};

LossGrads loss_and_grads(const Model& model, const nn::Tensor& batch,
                         const std::vector<int>& labels, const std::set<std::string>& frozen,
                         int threads = 1);

std::set<std::string> names_with_prefix(const nn::Params& params, const std::string& prefix);

// FNV-1a over the raw f32 payload, for freeze contracts in tests and logs.
std::uint64_t params_checksum(const nn::Params& params, const std::string& prefix = "");

}  // namespace histofeat
