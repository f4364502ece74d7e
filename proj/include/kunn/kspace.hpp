#pragma once

#include <vector>

#include "kunn/ctensor.hpp"
#include "kunn/tensor.hpp"

namespace kunn {

/// Windowed circular convolution convention used throughout:
///
///   (x (*) h)[i] = sum_{j=0}^{d-1} x[(i+j) mod N] * hbar[j],
///   hbar[j] = h[(-j) mod d],
///
/// and in 2-D the same formula per axis.  This is exactly the product of the
/// wrap-around Hankel lifting with the flipped kernel, H(x,d)*hbar, and it
/// reduces to plain circular convolution against the length-N embedding
/// produced by pad_kernel* below:  x (*) h == x *_circ pad(h), hence the
/// transform-domain route  x (*) h = sqrt(N1*N2) * ifft2(fft2(x) . fft2(pad(h))).

/// 1-D direct evaluation; h no longer than x.
std::vector<cplx> circ_conv1(const std::vector<cplx>& x, const std::vector<cplx>& h);

/// 2-D direct evaluation on an [N1, N2] grid with a [d1, d2] kernel.
CTensor circ_conv2(const CTensor& x, const CTensor& h);

/// Kernel flip hbar[j] = h[(-j) mod d] (per axis in 2-D).
std::vector<cplx> flip_kernel1(const std::vector<cplx>& h);
CTensor flip_kernel2(const CTensor& h);

/// Length-N embedding with p[s(u)] = h[u], s(0) = 0 and s(u) = N - d + u
/// otherwise, so that x *_circ p reproduces the windowed convolution.
std::vector<cplx> pad_kernel1(const std::vector<cplx>& h, std::size_t n);
CTensor pad_kernel2(const CTensor& h, std::size_t n1, std::size_t n2);

/// Transform-domain route; requires power-of-two grid dims.
CTensor circ_conv2_fft(const CTensor& x, const CTensor& h);

/// out[k1,k2] = conj(k[(-k1) mod N1, (-k2) mod N2]); the k-space image of
/// complex conjugation: fft2(conj(z)) == conj_reflect(fft2(z)).
CTensor conj_reflect(const CTensor& k);

/// Square root of the sum of squares across the coil axis of an [Nc, N1, N2]
/// stack; single coil degenerates to the magnitude image.
Tensor ssos(const CTensor& coils);

} // namespace kunn
