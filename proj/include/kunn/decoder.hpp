#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kunn/adam.hpp"
#include "kunn/autodiff.hpp"
#include "kunn/tensor.hpp"

namespace kunn {

/// Decoder-only convolutional generator: repeated{2x bilinear upsample while
/// below the target size (center-cropped on overshoot), 3x3 zero-padded
/// conv, relu, per-channel normalization with learned affine}, then a final
/// linear 3x3 conv to out_channels.  out_channels is 2k for k complex
/// channels in (re, im) plane order.
struct DecoderConfig {
    std::size_t n_layers = 0;
    std::size_t n_channels = 0;
    std::size_t out_h = 0, out_w = 0;
    std::size_t out_channels = 0;
    std::size_t latent_h = 4, latent_w = 4, latent_channels = 32;
};

/// Throws unless the latent can reach out_h x out_w within n_layers
/// doublings and all sizes are positive.
void decoder_validate(const DecoderConfig& cfg);

/// Appends this decoder's parameters to the set in build order: per layer a
/// conv weight [Cout, Cin, 3, 3] (uniform +-sqrt(1/fan_in)), gain (ones) and
/// bias (zeros), then the final conv weight.  Names are prefixed
/// "<prefix>.layer<i>." / "<prefix>.out.".
void decoder_init_params(const DecoderConfig& cfg, const std::string& prefix,
                         std::uint64_t seed, ParamSet& params);

/// Number of parameter tensors decoder_init_params appends.
std::size_t decoder_param_tensors(const DecoderConfig& cfg);

/// Replays the architecture on a graph, consuming parameter tensors from
/// params starting at cursor (advanced past them).  param_nodes[i] receives
/// the graph node id of params.items[i].  Returns the output node id with
/// shape [out_channels, out_h, out_w].
int decoder_build(const DecoderConfig& cfg, Graph& g, const ParamSet& params,
                  std::size_t& cursor, std::vector<int>& param_nodes, const Tensor& latent);

/// Latent draw: uniform(-1, 1) entries rescaled to Frobenius norm <= ball.
Tensor draw_latent(const DecoderConfig& cfg, double ball, std::uint64_t seed);

} // namespace kunn
