#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "histofeat/nn_engine.hpp"

namespace histofeat {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam.  Parameters without a gradient entry are never touched,
// so frozen tensors stay bit-identical through any number of steps.
class Adam {
   public:
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    void step(nn::Params& params, const nn::Params& grads);

    std::int64_t steps() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

   private:
    struct Moments {
        std::vector<float> m, v;
    };
    AdamConfig cfg_;
    std::int64_t step_ = 0;
    std::map<std::string, Moments> moments_;
};

}  // namespace histofeat
