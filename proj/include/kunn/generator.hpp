#pragma once

#include <cstdint>
#include <vector>

#include "kunn/adam.hpp"
#include "kunn/autodiff.hpp"
#include "kunn/ctensor.hpp"
#include "kunn/decoder.hpp"
#include "kunn/scene.hpp"

namespace kunn {

/// (re, im) channel-plane packing used by the graph ops.
CTensor planes_to_ctensor(const Tensor& planes); // [2c,H,W] -> [c,H,W] (always rank 3)
Tensor ctensor_to_planes(const CTensor& z);      // [c,H,W] or [H,W] -> [2c,H,W]

enum class AblationKind { full, sensitivity_only, phase_only };
AblationKind ablation_from_name(const std::string& name);
std::string ablation_name(AblationKind kind);

struct GeneratorConfig {
    std::size_t n = 64;
    std::size_t n_coils = 4;
    DecoderConfig dec_z;     // full k-space size, 2 output planes
    DecoderConfig dec_csm;   // compact kernel, 2*Nc output planes
    DecoderConfig dec_phase; // compact kernel, 2 output planes
    bool enable_csm = true;
    bool enable_phase = true;
    bool radial_weighting = false;
    double latent_ball = 1.0;
    std::uint64_t seed = 1;
};

/// Desk-scale defaults: dec_z {6 layers, 64 ch, N x N}, compact decoders
/// {4 layers, 32 ch, 9 x 9}; latents 32 x 4 x 4.
GeneratorConfig default_generator_config(std::size_t n, std::size_t n_coils,
                                         std::uint64_t seed = 1);

/// Three decoders sharing one parameter set plus their fixed latents.  The
/// spectrum decoder output is multiplied by data_scale (set at train time to
/// match the measurement magnitude; 1 until then).
struct TripledGenerator {
    GeneratorConfig cfg;
    Tensor latent_z, latent_csm, latent_phase;
    ParamSet params;
    Tensor weight_map; // [N, N] residual weights (all ones unless radial)
    double data_scale = 1.0;
};

TripledGenerator make_generator(const GeneratorConfig& cfg);

/// Applies the ablation switches; sensitivity_only requires a multicoil
/// configuration and phase_only a single-coil one.
GeneratorConfig ablation_variant(GeneratorConfig cfg, AblationKind kind);

struct ForwardResult {
    int zhat = -1;    // [2, N, N] scaled spectrum node
    int branch1 = -1; // [2*Nc, N, N]
    int branch2 = -1; // [2*Nc, N, N], -1 when the phase module is off
    std::vector<int> param_nodes; // node id per params.items entry
};

/// Builds both measurement branches on the graph:
///   branch1_i = zhat (*) csm_i,  branch2_i = conj_reflect(zhat) (*) e (*) csm_i.
/// With the csm module off the kernel is the 1x1 delta, so branch1 = zhat.
ForwardResult generator_forward(const TripledGenerator& gen, Graph& g,
                                const Tensor* latent_z_override = nullptr);

/// Masked weighted fitting loss against both copies of the measurements:
/// sum of |W . M . (branch - y)|^2 over the enabled branches.
int loss_node(const TripledGenerator& gen, Graph& g, const ForwardResult& fwd,
              const AcquisitionScene& scene);

double loss_value(const TripledGenerator& gen, const AcquisitionScene& scene);

struct TrainedGenerator {
    TripledGenerator gen;
    std::vector<double> loss_history;
    std::size_t iterations = 0;
};

/// Joint ADAM over all decoder parameters with fixed latents; loss is
/// recorded before each update.  Deterministic for fixed seeds; throws with
/// the iteration index if the loss turns non-finite.
TrainedGenerator train(TripledGenerator gen, const AcquisitionScene& scene,
                       std::size_t iters = 1000, double lr = 1e-4);

} // namespace kunn
