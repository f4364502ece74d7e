#include "kunn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace kunn {

void adam_step(ParamSet& params, const std::vector<Tensor>& grads, const AdamConfig& cfg) {
    if (grads.size() != params.items.size())
        throw std::invalid_argument("adam_step: got " + std::to_string(grads.size()) +
                                    " gradients for " + std::to_string(params.items.size()) +
                                    " parameters");
    if (!(cfg.lr > 0.0)) throw std::invalid_argument("adam_step: lr must be positive");

    const std::uint64_t t = params.step_count + 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));

    for (std::size_t i = 0; i < params.items.size(); ++i) {
        Param& p = params.items[i];
        const Tensor& g = grads[i];
        if (!g.same_shape(p.value))
            throw std::invalid_argument("adam_step: gradient shape mismatch for '" + p.name + "'");
        if (!g.all_finite())
            throw std::runtime_error("adam_step: non-finite gradient for '" + p.name + "'");
        for (std::size_t j = 0; j < g.size(); ++j) {
            p.m[j] = cfg.beta1 * p.m[j] + (1.0 - cfg.beta1) * g[j];
            p.v[j] = cfg.beta2 * p.v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double mhat = p.m[j] / bc1;
            const double vhat = p.v[j] / bc2;
            p.value[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
    params.step_count = t;
}

} // namespace kunn
