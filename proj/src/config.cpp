#include "kunn/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <stdexcept>

#include "kunn/kten.hpp"
#include "kunn/rng.hpp"

namespace kunn {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    const char* s = value.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (value.empty() || end != s + value.size())
        throw std::invalid_argument("config: bad number for '" + key + "': " + value);
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    if (value.empty() || value[0] == '-' || value[0] == '+')
        throw std::invalid_argument("config: bad integer for '" + key + "': " + value);
    const char* s = value.c_str();
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end != s + value.size() || errno == ERANGE)
        throw std::invalid_argument("config: bad integer for '" + key + "': " + value);
    return v;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
    return static_cast<std::size_t>(parse_u64(key, value));
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "0" || value == "false") return false;
    if (value == "1" || value == "true") return true;
    throw std::invalid_argument("config: bad flag for '" + key + "' (want 0 or 1): " + value);
}

} // namespace

ExperimentConfig config_from_keyvals(const std::map<std::string, std::string>& kv) {
    ExperimentConfig c;
    for (const auto& [key, value] : kv) {
        if (key == "n") c.n = parse_size(key, value);
        else if (key == "coils") c.coils = parse_size(key, value);
        else if (key == "mask") c.mask = value;
        else if (key == "r") c.r = parse_double(key, value);
        else if (key == "acs") c.acs = parse_size(key, value);
        else if (key == "pf") c.pf = parse_double(key, value);
        else if (key == "pf_r") c.pf_r = parse_double(key, value);
        else if (key == "sigma") c.sigma = parse_double(key, value);
        else if (key == "ellipses") c.ellipses = parse_size(key, value);
        else if (key == "sim_csm_support") c.sim_csm_support = parse_size(key, value);
        else if (key == "sim_phase_support") c.sim_phase_support = parse_size(key, value);
        else if (key == "z_layers") c.z_layers = parse_size(key, value);
        else if (key == "z_channels") c.z_channels = parse_size(key, value);
        else if (key == "csm_layers") c.csm_layers = parse_size(key, value);
        else if (key == "csm_channels") c.csm_channels = parse_size(key, value);
        else if (key == "csm_kernel") c.csm_kernel = parse_size(key, value);
        else if (key == "phase_layers") c.phase_layers = parse_size(key, value);
        else if (key == "phase_channels") c.phase_channels = parse_size(key, value);
        else if (key == "phase_kernel") c.phase_kernel = parse_size(key, value);
        else if (key == "iters") c.iters = parse_size(key, value);
        else if (key == "lr") c.lr = parse_double(key, value);
        else if (key == "seed") c.seed = parse_u64(key, value);
        else if (key == "net_seed") c.net_seed = parse_u64(key, value);
        else if (key == "weighting") c.weighting = parse_bool(key, value);
        else if (key == "dc") c.dc = parse_bool(key, value);
        else if (key == "ablation") c.ablation = value;
        else if (key == "trials") c.trials = parse_size(key, value);
        else if (key == "window") c.window = parse_size(key, value);
        else if (key == "restarts") c.restarts = parse_size(key, value);
        else if (key == "sweeps") c.sweeps = parse_size(key, value);
        else if (key == "out") c.out = value;
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return c;
}

std::vector<std::pair<std::string, std::string>> config_to_keyvals(const ExperimentConfig& c) {
    return {
        {"n", std::to_string(c.n)},
        {"coils", std::to_string(c.coils)},
        {"mask", c.mask},
        {"r", fmt_double(c.r)},
        {"acs", std::to_string(c.acs)},
        {"pf", fmt_double(c.pf)},
        {"pf_r", fmt_double(c.pf_r)},
        {"sigma", fmt_double(c.sigma)},
        {"ellipses", std::to_string(c.ellipses)},
        {"sim_csm_support", std::to_string(c.sim_csm_support)},
        {"sim_phase_support", std::to_string(c.sim_phase_support)},
        {"z_layers", std::to_string(c.z_layers)},
        {"z_channels", std::to_string(c.z_channels)},
        {"csm_layers", std::to_string(c.csm_layers)},
        {"csm_channels", std::to_string(c.csm_channels)},
        {"csm_kernel", std::to_string(c.csm_kernel)},
        {"phase_layers", std::to_string(c.phase_layers)},
        {"phase_channels", std::to_string(c.phase_channels)},
        {"phase_kernel", std::to_string(c.phase_kernel)},
        {"iters", std::to_string(c.iters)},
        {"lr", fmt_double(c.lr)},
        {"seed", std::to_string(c.seed)},
        {"net_seed", std::to_string(c.net_seed)},
        {"weighting", c.weighting ? "1" : "0"},
        {"dc", c.dc ? "1" : "0"},
        {"ablation", c.ablation},
        {"trials", std::to_string(c.trials)},
        {"window", std::to_string(c.window)},
        {"restarts", std::to_string(c.restarts)},
        {"sweeps", std::to_string(c.sweeps)},
        {"out", c.out},
    };
}

void save_config(const ExperimentConfig& c, const std::string& path) {
    write_keyvals(path, config_to_keyvals(c));
}

ExperimentConfig load_config(const std::string& path) {
    try {
        return config_from_keyvals(read_keyvals(path));
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument(e.what());
    }
}

SamplingMask config_mask(const ExperimentConfig& c) {
    switch (mask_kind_from_name(c.mask)) {
    case SamplingMask::Kind::random:
        return mask_random(c.n, c.r, c.acs, Rng::derive(c.seed, 101));
    case SamplingMask::Kind::vd_regular:
        return mask_vd_regular(c.n, c.r, c.acs);
    case SamplingMask::Kind::partial_fourier:
        return mask_partial_fourier(c.n, c.pf, c.acs, c.pf_r);
    case SamplingMask::Kind::entrywise:
        if (c.r < 1.0)
            throw std::invalid_argument("config: entrywise mask needs r >= 1");
        return mask_entrywise(c.n, 1.0 / c.r, Rng::derive(c.seed, 101));
    }
    throw std::invalid_argument("config: unhandled mask kind '" + c.mask + "'");
}

AcquisitionScene config_scene(const ExperimentConfig& c) {
    return simulate_scene(c.n, c.coils, c.ellipses, c.sim_csm_support, c.sim_phase_support,
                          c.sigma, config_mask(c), c.seed);
}

GeneratorConfig config_generator(const ExperimentConfig& c, std::size_t n,
                                 std::size_t n_coils) {
    GeneratorConfig g = default_generator_config(n, n_coils, c.net_seed);
    g.dec_z.n_layers = c.z_layers;
    g.dec_z.n_channels = c.z_channels;
    g.dec_csm.n_layers = c.csm_layers;
    g.dec_csm.n_channels = c.csm_channels;
    g.dec_csm.out_h = g.dec_csm.out_w = c.csm_kernel;
    g.dec_phase.n_layers = c.phase_layers;
    g.dec_phase.n_channels = c.phase_channels;
    g.dec_phase.out_h = g.dec_phase.out_w = c.phase_kernel;
    g.radial_weighting = c.weighting;
    return ablation_variant(g, ablation_from_name(c.ablation));
}

} // namespace kunn
