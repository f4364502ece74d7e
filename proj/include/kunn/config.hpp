#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kunn/generator.hpp"
#include "kunn/sampling.hpp"
#include "kunn/scene.hpp"

namespace kunn {

/// Flat experiment description shared by every command.  Serialized as
/// key=value lines; unknown keys are rejected so typos fail loudly, and
/// every run writes the fully resolved set next to its outputs.
struct ExperimentConfig {
    std::size_t n = 64;
    std::size_t coils = 4;
    std::string mask = "random";
    double r = 3.0;         // acceleration; entrywise masks keep N^2/r entries
    std::size_t acs = 8;
    double pf = 9.0 / 16.0; // partial_fourier sampled fraction
    double pf_r = 0.0;      // extra partial_fourier thinning, 0 = keep the block
    double sigma = 0.0;
    std::size_t ellipses = 5;
    std::size_t sim_csm_support = 11;
    std::size_t sim_phase_support = 11;
    std::size_t z_layers = 6, z_channels = 64;
    std::size_t csm_layers = 4, csm_channels = 32, csm_kernel = 9;
    std::size_t phase_layers = 4, phase_channels = 32, phase_kernel = 9;
    std::size_t iters = 1000;
    double lr = 1e-4;
    std::uint64_t seed = 1;     // scene, mask, and verifier draws
    std::uint64_t net_seed = 1; // decoder parameter init
    bool weighting = false;
    bool dc = true;
    std::string ablation = "full";
    std::size_t trials = 20;   // verifier settings
    std::size_t window = 4;
    std::size_t restarts = 64;
    std::size_t sweeps = 2;
    std::string out;
};

/// Strict parse: every key must be known and every value well formed.
ExperimentConfig config_from_keyvals(const std::map<std::string, std::string>& kv);

/// Full resolved key set in a fixed order; round-trips bit-exactly.
std::vector<std::pair<std::string, std::string>> config_to_keyvals(const ExperimentConfig& c);

void save_config(const ExperimentConfig& c, const std::string& path);

/// Any problem with the file (missing, malformed, unknown key) surfaces as
/// invalid_argument, since the file is user-supplied configuration.
ExperimentConfig load_config(const std::string& path);

/// Mask described by the config.  Seeded kinds draw from a stream derived
/// from the scene seed, so one seed fixes the whole acquisition.
SamplingMask config_mask(const ExperimentConfig& c);

/// Simulates the acquisition the config describes.
AcquisitionScene config_scene(const ExperimentConfig& c);

/// Generator sized for an n x n grid with n_coils coils, carrying the
/// config's decoder shapes, weighting flag, and ablation.
GeneratorConfig config_generator(const ExperimentConfig& c, std::size_t n,
                                 std::size_t n_coils);

} // namespace kunn
