#include "kunn/scene.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "kunn/fft.hpp"
#include "kunn/kten.hpp"
#include "kunn/phantom.hpp"
#include "kunn/rng.hpp"

namespace kunn {

AcquisitionScene assemble(const Tensor& phantom, const CTensor& csm, const Tensor& phi,
                          const CTensor& e2phi, double sigma, SamplingMask mask,
                          std::uint64_t seed) {
    if (phantom.ndim() != 2 || phantom.dim(0) != phantom.dim(1))
        throw std::invalid_argument("assemble: phantom must be square");
    const std::size_t n = phantom.dim(0);
    if (csm.ndim() != 3 || csm.dim(1) != n || csm.dim(2) != n)
        throw std::invalid_argument("assemble: coil maps must be [Nc, N, N]");
    if (!phi.same_shape(phantom) || e2phi.dim(0) != n || e2phi.dim(1) != n)
        throw std::invalid_argument("assemble: phase maps must match the phantom");
    if (sigma < 0.0)
        throw std::invalid_argument("assemble: sigma must be nonnegative");
    if (mask.n != n)
        throw std::invalid_argument("assemble: mask grid size mismatch");
    const std::size_t nc = csm.dim(0);

    AcquisitionScene s;
    s.phase = phi;
    s.e2phi = e2phi;
    s.noise_sigma = sigma;
    s.seed = seed;
    s.mask = std::move(mask);

    s.z_true = CTensor({n, n});
    for (std::size_t i = 0; i < n * n; ++i)
        s.z_true[i] = phantom[i] * cplx{std::cos(phi[i]), std::sin(phi[i])};

    s.kspace_full = CTensor({nc, n, n});
    for (std::size_t c = 0; c < nc; ++c) {
        CTensor coil_img({n, n});
        for (std::size_t i = 0; i < n * n; ++i) coil_img[i] = csm[c * n * n + i] * s.z_true[i];
        const CTensor k = fft2(coil_img);
        for (std::size_t i = 0; i < n * n; ++i) s.kspace_full[c * n * n + i] = k[i];
    }
    s.csm = csm;

    s.y = s.mask.apply(s.kspace_full);
    if (sigma > 0.0) {
        Rng rng(Rng::derive(seed, 0x6e6f6973));
        for (std::size_t c = 0; c < nc; ++c)
            for (std::size_t k1 = 0; k1 < n; ++k1)
                for (std::size_t k2 = 0; k2 < n; ++k2)
                    if (s.mask.is_sampled(k1, k2))
                        s.y[(c * n + k1) * n + k2] += sigma * rng.cnormal();
    }
    return s;
}

AcquisitionScene simulate_scene(std::size_t n, std::size_t n_coils, std::size_t n_ellipses,
                                std::size_t support_csm, std::size_t support_phase, double sigma,
                                SamplingMask mask, std::uint64_t seed) {
    const Tensor phantom = make_phantom(n, n_ellipses, seed);
    const CoilMapSet csm = make_coil_maps(n, n_coils, support_csm, seed);
    const PhaseMap ph = make_phase(n, support_phase, seed);
    return assemble(phantom, csm.maps, ph.phi, ph.e2phi, sigma, std::move(mask), seed);
}

AcquisitionScene single_coil_scene(const AcquisitionScene& scene) {
    const std::size_t n = scene.n();
    Tensor mag({n, n});
    for (std::size_t i = 0; i < n * n; ++i) mag[i] = std::abs(scene.z_true[i]);
    CTensor ones({1, n, n}, cplx{1.0, 0.0});
    return assemble(mag, ones, scene.phase, scene.e2phi, scene.noise_sigma, scene.mask,
                    scene.seed);
}

void save_scene(const AcquisitionScene& scene, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::string d = dir + "/";
    write_kten(d + "z_true.kten", scene.z_true);
    write_kten(d + "csm.kten", scene.csm);
    write_kten(d + "phase.kten", scene.phase);
    write_kten(d + "e2phi.kten", scene.e2phi);
    write_kten(d + "kspace_full.kten", scene.kspace_full);
    write_kten(d + "mask.kten", scene.mask.to_entry_map());
    write_kten(d + "y.kten", scene.y);
    write_keyvals(d + "scene.meta",
                  {{"n", std::to_string(scene.n())},
                   {"coils", std::to_string(scene.coils())},
                   {"sigma", fmt_double(scene.noise_sigma)},
                   {"seed", std::to_string(scene.seed)},
                   {"mask_kind", mask_kind_name(scene.mask.kind)},
                   {"mask_r", fmt_double(scene.mask.r)},
                   {"mask_acs", std::to_string(scene.mask.acs)}});
}

AcquisitionScene load_scene(const std::string& dir) {
    const std::string d = dir + "/";
    const auto meta = read_keyvals(d + "scene.meta");
    auto need = [&](const std::string& key) {
        auto it = meta.find(key);
        if (it == meta.end())
            throw std::runtime_error("load_scene: " + d + "scene.meta is missing '" + key + "'");
        return it->second;
    };

    AcquisitionScene s;
    s.z_true = read_kten_complex(d + "z_true.kten");
    s.csm = read_kten_complex(d + "csm.kten");
    s.phase = read_kten_real(d + "phase.kten");
    s.e2phi = read_kten_complex(d + "e2phi.kten");
    s.kspace_full = read_kten_complex(d + "kspace_full.kten");
    s.y = read_kten_complex(d + "y.kten");
    s.noise_sigma = std::stod(need("sigma"));
    s.seed = std::stoull(need("seed"));

    const Tensor entry = read_kten_real(d + "mask.kten");
    const std::size_t n = entry.dim(0);
    SamplingMask m;
    m.kind = mask_kind_from_name(need("mask_kind"));
    m.n = n;
    m.acs = std::stoul(need("mask_acs"));
    m.r = std::stod(need("mask_r"));
    if (m.kind == SamplingMask::Kind::entrywise) {
        m.entry = entry;
    } else {
        for (std::size_t k1 = 0; k1 < n; ++k1) {
            std::size_t hits = 0;
            for (std::size_t k2 = 0; k2 < n; ++k2)
                if (entry.at2(k1, k2) != 0.0) ++hits;
            if (hits == n)
                m.lines.push_back(k1);
            else if (hits != 0)
                throw std::runtime_error("load_scene: line mask has a partial row");
        }
    }
    s.mask = std::move(m);

    if (s.z_true.dim(0) != n || s.csm.dim(1) != n || s.y.dim(1) != n)
        throw std::runtime_error("load_scene: inconsistent grid sizes in " + dir);
    return s;
}

} // namespace kunn
