#include "kunn/kspace.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kunn/fft.hpp"

namespace kunn {

std::vector<cplx> circ_conv1(const std::vector<cplx>& x, const std::vector<cplx>& h) {
    const std::size_t n = x.size(), d = h.size();
    if (d == 0 || d > n)
        throw std::invalid_argument("circ_conv1: kernel length " + std::to_string(d) +
                                    " must be in [1, " + std::to_string(n) + "]");
    std::vector<cplx> hbar(d);
    for (std::size_t j = 0; j < d; ++j) hbar[j] = h[(d - j) % d];
    std::vector<cplx> out(n, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc{0.0, 0.0};
        for (std::size_t j = 0; j < d; ++j) acc += x[(i + j) % n] * hbar[j];
        out[i] = acc;
    }
    return out;
}

CTensor circ_conv2(const CTensor& x, const CTensor& h) {
    if (x.ndim() != 2 || h.ndim() != 2)
        throw std::invalid_argument("circ_conv2: both operands must be 2-D");
    const std::size_t n1 = x.dim(0), n2 = x.dim(1);
    const std::size_t d1 = h.dim(0), d2 = h.dim(1);
    if (d1 > n1 || d2 > n2)
        throw std::invalid_argument("circ_conv2: kernel " + std::to_string(d1) + "x" + std::to_string(d2) +
                                    " exceeds signal " + std::to_string(n1) + "x" + std::to_string(n2));
    const CTensor hbar = flip_kernel2(h);
    CTensor out({n1, n2});
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
            cplx acc{0.0, 0.0};
            for (std::size_t j1 = 0; j1 < d1; ++j1) {
                const std::size_t r = (i1 + j1) % n1;
                for (std::size_t j2 = 0; j2 < d2; ++j2)
                    acc += x.at2(r, (i2 + j2) % n2) * hbar.at2(j1, j2);
            }
            out.at2(i1, i2) = acc;
        }
    }
    return out;
}

std::vector<cplx> flip_kernel1(const std::vector<cplx>& h) {
    const std::size_t d = h.size();
    std::vector<cplx> hbar(d);
    for (std::size_t j = 0; j < d; ++j) hbar[j] = h[(d - j) % d];
    return hbar;
}

CTensor flip_kernel2(const CTensor& h) {
    const std::size_t d1 = h.dim(0), d2 = h.dim(1);
    CTensor hbar({d1, d2});
    for (std::size_t j1 = 0; j1 < d1; ++j1)
        for (std::size_t j2 = 0; j2 < d2; ++j2)
            hbar.at2(j1, j2) = h.at2((d1 - j1) % d1, (d2 - j2) % d2);
    return hbar;
}

std::vector<cplx> pad_kernel1(const std::vector<cplx>& h, std::size_t n) {
    const std::size_t d = h.size();
    if (d > n) throw std::invalid_argument("pad_kernel1: kernel longer than signal");
    std::vector<cplx> p(n, cplx{0.0, 0.0});
    for (std::size_t u = 0; u < d; ++u) p[u == 0 ? 0 : n - d + u] += h[u];
    return p;
}

CTensor pad_kernel2(const CTensor& h, std::size_t n1, std::size_t n2) {
    const std::size_t d1 = h.dim(0), d2 = h.dim(1);
    if (d1 > n1 || d2 > n2) throw std::invalid_argument("pad_kernel2: kernel exceeds grid");
    CTensor p({n1, n2});
    auto map = [](std::size_t u, std::size_t n, std::size_t d) { return u == 0 ? 0 : n - d + u; };
    for (std::size_t u1 = 0; u1 < d1; ++u1)
        for (std::size_t u2 = 0; u2 < d2; ++u2)
            p.at2(map(u1, n1, d1), map(u2, n2, d2)) += h.at2(u1, u2);
    return p;
}

CTensor circ_conv2_fft(const CTensor& x, const CTensor& h) {
    const std::size_t n1 = x.dim(0), n2 = x.dim(1);
    if (h.dim(0) > n1 || h.dim(1) > n2)
        throw std::invalid_argument("circ_conv2_fft: kernel exceeds signal");
    const CTensor p = pad_kernel2(h, n1, n2);
    CTensor xf = fft2(x);
    const CTensor pf = fft2(p);
    for (std::size_t i = 0; i < xf.size(); ++i) xf[i] *= pf[i];
    CTensor out = ifft2(xf);
    const double s = std::sqrt(static_cast<double>(n1) * static_cast<double>(n2));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
    return out;
}

CTensor conj_reflect(const CTensor& k) {
    if (k.ndim() != 2)
        throw std::invalid_argument("conj_reflect: expected a 2-D tensor");
    const std::size_t n1 = k.dim(0), n2 = k.dim(1);
    CTensor out({n1, n2});
    for (std::size_t k1 = 0; k1 < n1; ++k1) {
        const std::size_t r1 = (n1 - k1) % n1;
        for (std::size_t k2 = 0; k2 < n2; ++k2)
            out.at2(k1, k2) = std::conj(k.at2(r1, (n2 - k2) % n2));
    }
    return out;
}

Tensor ssos(const CTensor& coils) {
    if (coils.ndim() != 3)
        throw std::invalid_argument("ssos: expected [coils, N1, N2]");
    const std::size_t nc = coils.dim(0), n1 = coils.dim(1), n2 = coils.dim(2);
    Tensor out({n1, n2});
    for (std::size_t i = 0; i < n1 * n2; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < nc; ++c) acc += std::norm(coils[c * n1 * n2 + i]);
        out[i] = std::sqrt(acc);
    }
    return out;
}

} // namespace kunn
