#pragma once

#include <vector>

#include "kunn/ctensor.hpp"
#include "kunn/linalg.hpp"

namespace kunn {

/// Wrap-around Hankel lifting.  Every signal entry appears in exactly d
/// (resp. d1*d2) positions, and the matrix reproduces the windowed circular
/// convolution as H(x, d) * hbar.
using HankelMatrix = CMat;

/// 1-D: H[i, j] = x[(i+j) mod N], shape N x d.
HankelMatrix hankel1(const std::vector<cplx>& x, std::size_t d);

/// 2-D: rows enumerate grid positions (i1, i2) flattened column-major
/// (r = i1 + N1*i2), columns enumerate patch offsets (j1, j2) flattened
/// column-major (c = j1 + d1*j2), and
/// H[r, c] = x[(i1+j1) mod N1, (i2+j2) mod N2].  Shape N1*N2 x d1*d2.
HankelMatrix hankel2(const CTensor& x, std::size_t d1, std::size_t d2);

/// Kernel vectorizations matching the hankel2 column order, so that
/// hankel2(x, d, d) * flatten_colmajor(flip_kernel2(h)) equals
/// flatten_colmajor(circ_conv2(x, h)).
std::vector<cplx> flatten_colmajor(const CTensor& t);

} // namespace kunn
