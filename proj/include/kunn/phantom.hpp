#pragma once

#include <cstdint>

#include "kunn/ctensor.hpp"
#include "kunn/tensor.hpp"

namespace kunn {

/// Signed centered frequency of index k on a length-n axis: values in
/// [-n/2, n/2).  DC stays at 0; the "centered patch" of odd side p is the
/// set of indices with |signed freq| <= (p-1)/2 on both axes.
int signed_freq(std::size_t k, std::size_t n);
bool in_centered_patch(std::size_t k1, std::size_t k2, std::size_t patch, std::size_t n);

/// Piecewise-constant sum of ellipse indicators with values in [0, 1].
/// Ellipse 0 is always the centered circle of radius N/4; further ellipses
/// are seeded random.  Designed so the finite-difference gradient support
/// stays well under 15% of the pixels.
Tensor make_phantom(std::size_t n, std::size_t n_ellipses, std::uint64_t seed);

/// Fraction of pixels where the circular forward-difference gradient of a
/// 2-D image is nonzero in either direction.
double gradient_support_fraction(const Tensor& img);

struct CoilMapSet {
    CTensor maps;        // [Nc, N, N]
    CTensor pre_spectra; // [Nc, N, N] spectra before normalization, exactly
                         // zero outside the declared centered patch
    std::size_t support = 0;
    double leakage = 0.0; // worst post-normalization fraction of spectral
                          // energy outside the patch
};

/// Smooth complex coil maps synthesized from random coefficients on a
/// centered support x support k-space patch, then normalized so that
/// sum_i |csm_i|^2 == 1 pointwise (a tiny magnitude floor guards the
/// division).  support must be odd and smaller than n.
CoilMapSet make_coil_maps(std::size_t n, std::size_t n_coils, std::size_t support,
                          std::uint64_t seed);

struct PhaseMap {
    Tensor phi;              // [N, N] real phase, e2phi == exp(j*2*phi) exactly
    CTensor e2phi;           // [N, N] unit-modulus field
    double support_residual; // fraction of fft2(e2phi) energy outside the patch
};

/// Smooth phase map whose doubled-phase field exp(j*2*phi) has nearly
/// compact spectrum.  Synthesis: random coefficients on a centered
/// support x support patch, anti-Hermitian-symmetrized so their inverse
/// transform is purely imaginary, plus a strong real DC term; the result is
/// projected to unit modulus and its half-angle is the phase.  The residual
/// spectral energy the projection pushes outside the patch is reported.
PhaseMap make_phase(std::size_t n, std::size_t support, std::uint64_t seed);

} // namespace kunn
