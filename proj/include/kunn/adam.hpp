#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kunn/tensor.hpp"

namespace kunn {

/// Named trainable tensor with its first/second moment accumulators.
struct Param {
    std::string name;
    Tensor value;
    Tensor m;
    Tensor v;

    explicit Param(std::string name_, Tensor value_)
        : name(std::move(name_)), value(std::move(value_)), m(value.shape()), v(value.shape()) {}
};

/// All trainable parameters of a model plus the shared step counter.
struct ParamSet {
    std::vector<Param> items;
    std::uint64_t step_count = 0;

    Param& add(std::string name, Tensor value) {
        items.emplace_back(std::move(name), std::move(value));
        return items.back();
    }
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One ADAM update with bias correction over all parameters; grads[i] pairs
/// with params.items[i].  Throws naming the parameter on non-finite
/// gradients.  Increments step_count by exactly 1.
void adam_step(ParamSet& params, const std::vector<Tensor>& grads, const AdamConfig& cfg);

} // namespace kunn
