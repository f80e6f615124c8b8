#include "histofeat/adam.hpp"

#include <cmath>

namespace histofeat {

void Adam::step(nn::Params& params, const nn::Params& grads) {
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(step_));
    for (const auto& [name, g] : grads.items) {
        auto& p = params.at(name);
        if (p.shape != g.shape)
            throw ShapeError("gradient shape mismatch for " + name + ": param " +
                             nn::shape_str(p.shape) + " grad " + nn::shape_str(g.shape));
        auto& mom = moments_[name];
        if (mom.m.empty()) {
            mom.m.assign(p.numel(), 0.0f);
            mom.v.assign(p.numel(), 0.0f);
        }
        for (std::size_t i = 0; i < p.numel(); ++i) {
            const double gi = double(g.data[i]);
            const double m = cfg_.beta1 * double(mom.m[i]) + (1.0 - cfg_.beta1) * gi;
            const double v = cfg_.beta2 * double(mom.v[i]) + (1.0 - cfg_.beta2) * gi * gi;
            mom.m[i] = float(m);
            mom.v[i] = float(v);
            const double mhat = double(mom.m[i]) / bc1;
            const double vhat = double(mom.v[i]) / bc2;
            p.data[i] = float(double(p.data[i]) - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
        }
    }
}

}  // namespace histofeat
