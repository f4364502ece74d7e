#pragma once

#include <cstdint>
#include <string>

#include "kunn/ctensor.hpp"
#include "kunn/sampling.hpp"
#include "kunn/tensor.hpp"

namespace kunn {

/// Ground-truth acquisition: y = M(fft2(csm_i . z_true)) + noise, with
/// complex Gaussian noise of per-component std sigma added to sampled
/// entries only.  Unsampled entries of y are exactly zero.
struct AcquisitionScene {
    CTensor z_true;      // [N, N] phantom magnitude times exp(j*phi)
    CTensor csm;         // [Nc, N, N]
    Tensor phase;        // [N, N] phi
    CTensor e2phi;       // [N, N] exp(j*2*phi)
    CTensor kspace_full; // [Nc, N, N]
    SamplingMask mask;
    CTensor y;           // [Nc, N, N]
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    std::size_t n() const { return z_true.dim(0); }
    std::size_t coils() const { return csm.dim(0); }
};

/// Builds the scene from its parts; shapes must agree and sigma >= 0.
AcquisitionScene assemble(const Tensor& phantom, const CTensor& csm, const Tensor& phi,
                          const CTensor& e2phi, double sigma, SamplingMask mask,
                          std::uint64_t seed);

/// Convenience generator: phantom + coil maps + phase from one seed, then
/// assemble.  support_csm/support_phase are the compact spectral supports.
AcquisitionScene simulate_scene(std::size_t n, std::size_t n_coils, std::size_t n_ellipses,
                                std::size_t support_csm, std::size_t support_phase, double sigma,
                                SamplingMask mask, std::uint64_t seed);

/// Derives the single-coil version of a scene: the coil map becomes the
/// constant 1, k-space is re-simulated from the same z_true, mask, sigma,
/// and seed.
AcquisitionScene single_coil_scene(const AcquisitionScene& scene);

/// Directory layout: z_true.kten, csm.kten, phase.kten, e2phi.kten,
/// kspace_full.kten, mask.kten (0/1 entry map), y.kten, scene.meta.
void save_scene(const AcquisitionScene& scene, const std::string& dir);
AcquisitionScene load_scene(const std::string& dir);

} // namespace kunn
