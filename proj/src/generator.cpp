#include "kunn/generator.hpp"

#include <cmath>
#include <stdexcept>

#include "kunn/phantom.hpp"
#include "kunn/rng.hpp"

namespace kunn {

CTensor planes_to_ctensor(const Tensor& planes) {
    if (planes.ndim() != 3 || planes.dim(0) % 2 != 0)
        throw std::invalid_argument("planes_to_ctensor: expected [2c, H, W]");
    const std::size_t c = planes.dim(0) / 2, h = planes.dim(1), w = planes.dim(2);
    CTensor z({c, h, w});
    for (std::size_t k = 0; k < c; ++k)
        for (std::size_t i = 0; i < h * w; ++i)
            z[k * h * w + i] = {planes[(2 * k) * h * w + i], planes[(2 * k + 1) * h * w + i]};
    return z;
}

Tensor ctensor_to_planes(const CTensor& z) {
    const std::size_t c = z.ndim() == 3 ? z.dim(0) : 1;
    const std::size_t h = z.dim(z.ndim() - 2), w = z.dim(z.ndim() - 1);
    Tensor planes({2 * c, h, w});
    for (std::size_t k = 0; k < c; ++k)
        for (std::size_t i = 0; i < h * w; ++i) {
            planes[(2 * k) * h * w + i] = z[k * h * w + i].real();
            planes[(2 * k + 1) * h * w + i] = z[k * h * w + i].imag();
        }
    return planes;
}

AblationKind ablation_from_name(const std::string& name) {
    if (name == "full") return AblationKind::full;
    if (name == "sensitivity_only") return AblationKind::sensitivity_only;
    if (name == "phase_only") return AblationKind::phase_only;
    throw std::invalid_argument("unknown ablation kind '" + name + "'");
}

std::string ablation_name(AblationKind kind) {
    switch (kind) {
    case AblationKind::full: return "full";
    case AblationKind::sensitivity_only: return "sensitivity_only";
    case AblationKind::phase_only: return "phase_only";
    }
    throw std::invalid_argument("ablation_name: bad kind");
}

GeneratorConfig default_generator_config(std::size_t n, std::size_t n_coils,
                                         std::uint64_t seed) {
    if (n_coils == 0)
        throw std::invalid_argument("generator: need at least one coil");
    GeneratorConfig cfg;
    cfg.n = n;
    cfg.n_coils = n_coils;
    cfg.seed = seed;
    cfg.dec_z = DecoderConfig{6, 64, n, n, 2};
    cfg.dec_csm = DecoderConfig{4, 32, 9, 9, 2 * n_coils};
    cfg.dec_phase = DecoderConfig{4, 32, 9, 9, 2};
    return cfg;
}

GeneratorConfig ablation_variant(GeneratorConfig cfg, AblationKind kind) {
    switch (kind) {
    case AblationKind::full:
        cfg.enable_csm = true;
        cfg.enable_phase = true;
        break;
    case AblationKind::sensitivity_only:
        if (cfg.n_coils < 2)
            throw std::invalid_argument("ablation_variant: sensitivity_only needs a multicoil "
                                        "configuration");
        cfg.enable_csm = true;
        cfg.enable_phase = false;
        break;
    case AblationKind::phase_only:
        if (cfg.n_coils != 1)
            throw std::invalid_argument("ablation_variant: phase_only needs a single-coil "
                                        "configuration");
        cfg.enable_csm = false;
        cfg.enable_phase = true;
        break;
    }
    return cfg;
}

TripledGenerator make_generator(const GeneratorConfig& cfg) {
    if (cfg.n < 4 || (cfg.n & (cfg.n - 1)) != 0)
        throw std::invalid_argument("make_generator: grid size must be a power of two >= 4");
    if (cfg.dec_csm.out_channels != 2 * cfg.n_coils)
        throw std::invalid_argument("make_generator: csm decoder must emit 2*Nc planes");
    if (cfg.dec_z.out_channels != 2 || cfg.dec_phase.out_channels != 2)
        throw std::invalid_argument("make_generator: spectrum decoders must emit 2 planes");
    if (cfg.dec_z.out_h != cfg.n || cfg.dec_z.out_w != cfg.n)
        throw std::invalid_argument("make_generator: spectrum decoder size must match the grid");

    TripledGenerator gen;
    gen.cfg = cfg;
    gen.latent_z = draw_latent(cfg.dec_z, cfg.latent_ball, Rng::derive(cfg.seed, 1));
    decoder_init_params(cfg.dec_z, "z", Rng::derive(cfg.seed, 2), gen.params);
    if (cfg.enable_csm) {
        gen.latent_csm = draw_latent(cfg.dec_csm, cfg.latent_ball, Rng::derive(cfg.seed, 3));
        decoder_init_params(cfg.dec_csm, "csm", Rng::derive(cfg.seed, 4), gen.params);
    }
    if (cfg.enable_phase) {
        gen.latent_phase = draw_latent(cfg.dec_phase, cfg.latent_ball, Rng::derive(cfg.seed, 5));
        decoder_init_params(cfg.dec_phase, "phase", Rng::derive(cfg.seed, 6), gen.params);
    }

    gen.weight_map = Tensor({cfg.n, cfg.n}, 1.0);
    if (cfg.radial_weighting) {
        const double kmax = std::hypot(cfg.n / 2.0, cfg.n / 2.0);
        for (std::size_t k1 = 0; k1 < cfg.n; ++k1)
            for (std::size_t k2 = 0; k2 < cfg.n; ++k2) {
                const double kr = std::hypot(static_cast<double>(signed_freq(k1, cfg.n)),
                                             static_cast<double>(signed_freq(k2, cfg.n)));
                gen.weight_map.at2(k1, k2) = 1.0 + kr / kmax;
            }
    }
    return gen;
}

ForwardResult generator_forward(const TripledGenerator& gen, Graph& g,
                                const Tensor* latent_z_override) {
    const GeneratorConfig& cfg = gen.cfg;
    if (cfg.n_coils > 1 && !cfg.enable_csm)
        throw std::invalid_argument("generator_forward: multicoil needs the csm module");

    ForwardResult fwd;
    fwd.param_nodes.assign(gen.params.items.size(), -1);
    std::size_t cursor = 0;
    const Tensor& lz = latent_z_override ? *latent_z_override : gen.latent_z;
    int zraw = decoder_build(cfg.dec_z, g, gen.params, cursor, fwd.param_nodes, lz);
    fwd.zhat = gen.data_scale == 1.0 ? zraw : g.scale(zraw, gen.data_scale);

    int csm_kernels;
    if (cfg.enable_csm) {
        csm_kernels = decoder_build(cfg.dec_csm, g, gen.params, cursor, fwd.param_nodes,
                                    gen.latent_csm);
    } else {
        Tensor delta({2, 1, 1});
        delta[0] = 1.0;
        csm_kernels = g.constant(delta);
    }
    fwd.branch1 = g.conv2d_circular(fwd.zhat, csm_kernels);

    if (cfg.enable_phase) {
        const int e_kernel = decoder_build(cfg.dec_phase, g, gen.params, cursor,
                                           fwd.param_nodes, gen.latent_phase);
        const int zrefl = g.reflect_spatial(g.complex_conj(fwd.zhat));
        const int second = g.conv2d_circular(zrefl, e_kernel);
        fwd.branch2 = g.conv2d_circular(second, csm_kernels);
    }
    if (cursor != gen.params.items.size())
        throw std::invalid_argument("generator_forward: parameter set does not match the "
                                    "enabled modules");
    return fwd;
}

int loss_node(const TripledGenerator& gen, Graph& g, const ForwardResult& fwd,
              const AcquisitionScene& scene) {
    const std::size_t n = gen.cfg.n;
    if (scene.n() != n || scene.coils() != gen.cfg.n_coils)
        throw std::invalid_argument("loss_node: scene does not match the generator");

    Tensor wm = scene.mask.to_entry_map();
    for (std::size_t i = 0; i < wm.size(); ++i) wm[i] *= gen.weight_map[i];
    const int mask = g.constant(wm);
    const int target = g.constant(ctensor_to_planes(scene.y));

    int root = g.sum_sq(g.masked_residual(fwd.branch1, mask, target));
    if (fwd.branch2 >= 0)
        root = g.add(root, g.sum_sq(g.masked_residual(fwd.branch2, mask, target)));
    return root;
}

double loss_value(const TripledGenerator& gen, const AcquisitionScene& scene) {
    Graph g;
    const ForwardResult fwd = generator_forward(gen, g);
    return g.value(loss_node(gen, g, fwd, scene))[0];
}

namespace {

double match_data_scale(TripledGenerator& gen, const AcquisitionScene& scene) {
    gen.data_scale = 1.0;
    Graph g;
    const ForwardResult fwd = generator_forward(gen, g);
    const CTensor b1 = planes_to_ctensor(g.value(fwd.branch1));
    const double masked = std::sqrt(scene.mask.apply(b1).norm_sq());
    const double target = std::sqrt(scene.y.norm_sq());
    return masked > 1e-30 && target > 0.0 ? target / masked : 1.0;
}

} // namespace

TrainedGenerator train(TripledGenerator gen, const AcquisitionScene& scene, std::size_t iters,
                       double lr) {
    if (iters < 1)
        throw std::invalid_argument("train: need at least one iteration");
    if (scene.n() != gen.cfg.n || scene.coils() != gen.cfg.n_coils)
        throw std::invalid_argument("train: scene does not match the generator");

    gen.data_scale = match_data_scale(gen, scene);

    AdamConfig acfg;
    acfg.lr = lr;
    TrainedGenerator out;
    out.loss_history.reserve(iters);
    std::vector<Tensor> grads(gen.params.items.size());
    for (std::size_t it = 0; it < iters; ++it) {
        Graph g;
        const ForwardResult fwd = generator_forward(gen, g);
        const int root = loss_node(gen, g, fwd, scene);
        const double loss = g.value(root)[0];
        if (!std::isfinite(loss))
            throw std::runtime_error("train: non-finite loss at iteration " + std::to_string(it));
        out.loss_history.push_back(loss);
        g.backward(root);
        for (std::size_t i = 0; i < grads.size(); ++i) grads[i] = g.grad(fwd.param_nodes[i]);
        adam_step(gen.params, grads, acfg);
    }
    out.iterations = iters;
    out.gen = std::move(gen);
    return out;
}

} // namespace kunn
