#pragma once

#include <complex>
#include <cstddef>

#include "kunn/ctensor.hpp"

namespace kunn {

/// In-place unnormalized DFT of length n along a strided axis.
/// sign = -1 gives the forward transform sum x[j] exp(-2*pi*i*j*k/n),
/// sign = +1 the inverse kernel (still unnormalized).
/// Lengths must be powers of two (iterative radix-2); anything else throws.
void dft_axis(cplx* x, std::size_t n, std::size_t stride, int sign);

/// Unitary 2-D transforms on an [N1, N2] grid, DC at index (0, 0).
/// Both directions carry 1/sqrt(N1*N2), hence energy is preserved exactly
/// and fft2(ifft2(x)) == x up to roundoff.
CTensor fft2(const CTensor& img);
CTensor ifft2(const CTensor& ksp);

/// Per-coil unitary transforms on an [Nc, N1, N2] stack.
CTensor fft2_stack(const CTensor& imgs);
CTensor ifft2_stack(const CTensor& ksps);

} // namespace kunn
