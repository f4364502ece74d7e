#include "kunn/decoder.hpp"

#include <cmath>
#include <stdexcept>

#include "kunn/rng.hpp"

namespace kunn {

namespace {

constexpr std::size_t kKernel = 3;

std::size_t doublings_needed(std::size_t from, std::size_t to) {
    std::size_t k = 0, cur = from;
    while (cur < to) {
        cur *= 2;
        ++k;
    }
    return k;
}

} // namespace

void decoder_validate(const DecoderConfig& cfg) {
    if (cfg.n_layers == 0 || cfg.n_channels == 0 || cfg.out_channels == 0)
        throw std::invalid_argument("decoder: layers, channels, out_channels must be positive");
    if (cfg.out_h == 0 || cfg.out_w == 0 || cfg.latent_h == 0 || cfg.latent_w == 0 ||
        cfg.latent_channels == 0)
        throw std::invalid_argument("decoder: sizes must be positive");
    if (doublings_needed(cfg.latent_h, cfg.out_h) > cfg.n_layers ||
        doublings_needed(cfg.latent_w, cfg.out_w) > cfg.n_layers)
        throw std::invalid_argument("decoder: " + std::to_string(cfg.n_layers) +
                                    " layers cannot upsample " + std::to_string(cfg.latent_h) +
                                    "x" + std::to_string(cfg.latent_w) + " to " +
                                    std::to_string(cfg.out_h) + "x" + std::to_string(cfg.out_w));
}

std::size_t decoder_param_tensors(const DecoderConfig& cfg) { return 3 * cfg.n_layers + 1; }

void decoder_init_params(const DecoderConfig& cfg, const std::string& prefix,
                         std::uint64_t seed, ParamSet& params) {
    decoder_validate(cfg);
    Rng rng(Rng::derive(seed, 0x64656372));
    auto conv_weight = [&](std::size_t cout, std::size_t cin) {
        Tensor w({cout, cin, kKernel, kKernel});
        const double bound = std::sqrt(1.0 / static_cast<double>(cin * kKernel * kKernel));
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
        return w;
    };
    std::size_t cin = cfg.latent_channels;
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        const std::string base = prefix + ".layer" + std::to_string(l) + ".";
        params.add(base + "conv", conv_weight(cfg.n_channels, cin));
        params.add(base + "gain", Tensor({cfg.n_channels}, 1.0));
        params.add(base + "bias", Tensor({cfg.n_channels}, 0.0));
        cin = cfg.n_channels;
    }
    params.add(prefix + ".out.conv", conv_weight(cfg.out_channels, cfg.n_channels));
}

int decoder_build(const DecoderConfig& cfg, Graph& g, const ParamSet& params,
                  std::size_t& cursor, std::vector<int>& param_nodes, const Tensor& latent) {
    decoder_validate(cfg);
    if (latent.ndim() != 3 || latent.dim(0) != cfg.latent_channels ||
        latent.dim(1) != cfg.latent_h || latent.dim(2) != cfg.latent_w)
        throw std::invalid_argument("decoder_build: latent shape mismatch");
    auto take = [&]() {
        if (cursor >= params.items.size())
            throw std::invalid_argument("decoder_build: parameter set exhausted");
        const std::size_t i = cursor++;
        const int node = g.param(params.items[i].value);
        param_nodes.at(i) = node;
        return node;
    };

    int cur = g.constant(latent);
    std::size_t h = cfg.latent_h, w = cfg.latent_w;
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        if (h < cfg.out_h || w < cfg.out_w) {
            cur = g.upsample2x_bilinear(cur);
            h *= 2;
            w *= 2;
        }
        if (h > cfg.out_h || w > cfg.out_w) {
            h = std::min(h, cfg.out_h);
            w = std::min(w, cfg.out_w);
            cur = g.crop_center(cur, h, w);
        }
        const int wt = take();
        const int gain = take();
        const int bias = take();
        cur = g.conv2d_same_zero(cur, wt);
        cur = g.relu(cur);
        cur = g.channel_norm(cur, gain, bias);
    }
    const int wt = take();
    return g.conv2d_same_zero(cur, wt);
}

Tensor draw_latent(const DecoderConfig& cfg, double ball, std::uint64_t seed) {
    if (ball <= 0.0)
        throw std::invalid_argument("draw_latent: ball radius must be positive");
    Tensor z({cfg.latent_channels, cfg.latent_h, cfg.latent_w});
    Rng rng(Rng::derive(seed, 0x6c617431));
    double ss = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = rng.uniform(-1.0, 1.0);
        ss += z[i] * z[i];
    }
    const double norm = std::sqrt(ss);
    if (norm > ball)
        for (std::size_t i = 0; i < z.size(); ++i) z[i] *= ball / norm;
    return z;
}

} // namespace kunn
