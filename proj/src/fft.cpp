#include "kunn/fft.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace kunn {
namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Forward-direction unit roots exp(-2*pi*i*k/n) for k < n/2, cached per n.
const std::vector<cplx>& roots_for(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::vector<cplx>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<cplx> r(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double a = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        r[k] = {std::cos(a), std::sin(a)};
    }
    return cache.emplace(n, std::move(r)).first->second;
}

/// Iterative radix-2 Cooley-Tukey on a contiguous buffer.
void fft_pow2(cplx* x, std::size_t n, int sign) {
    if (n <= 1) return;
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    const std::vector<cplx>& roots = roots_for(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx w = roots[k * step];
                if (sign > 0) w = std::conj(w);
                const cplx u = x[i + k];
                const cplx v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
            }
        }
    }
}

void transform_rows_cols(std::size_t n1, std::size_t n2, cplx* base, int sign) {
    for (std::size_t i = 0; i < n1; ++i) dft_axis(base + i * n2, n2, 1, sign);
    for (std::size_t j = 0; j < n2; ++j) dft_axis(base + j, n1, n2, sign);
}

void require_pow2(std::size_t n1, std::size_t n2) {
    if (!is_pow2(n1) || !is_pow2(n2))
        throw std::invalid_argument("fft2: grid dims must be powers of two, got " +
                                    std::to_string(n1) + "x" + std::to_string(n2));
}

CTensor transform2_scaled(const CTensor& in, int sign) {
    if (in.ndim() != 2)
        throw std::invalid_argument("fft2: expected a 2-D tensor, got ndim=" + std::to_string(in.ndim()));
    CTensor out = in;
    const std::size_t n1 = out.dim(0), n2 = out.dim(1);
    require_pow2(n1, n2);
    transform_rows_cols(n1, n2, out.data(), sign);
    const double s = 1.0 / std::sqrt(static_cast<double>(n1) * static_cast<double>(n2));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
    return out;
}

CTensor transform2_stack_scaled(const CTensor& in, int sign) {
    if (in.ndim() != 3)
        throw std::invalid_argument("fft2_stack: expected a 3-D tensor, got ndim=" + std::to_string(in.ndim()));
    CTensor out = in;
    const std::size_t nc = out.dim(0), n1 = out.dim(1), n2 = out.dim(2);
    require_pow2(n1, n2);
    const double s = 1.0 / std::sqrt(static_cast<double>(n1) * static_cast<double>(n2));
    for (std::size_t c = 0; c < nc; ++c)
        transform_rows_cols(n1, n2, out.data() + c * n1 * n2, sign);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
    return out;
}

} // namespace

void dft_axis(cplx* x, std::size_t n, std::size_t stride, int sign) {
    if (n <= 1) return;
    if (!is_pow2(n))
        throw std::invalid_argument("dft_axis: length must be a power of two, got " + std::to_string(n));
    if (stride == 1) {
        fft_pow2(x, n, sign);
        return;
    }
    std::vector<cplx> buf(n);
    for (std::size_t k = 0; k < n; ++k) buf[k] = x[k * stride];
    fft_pow2(buf.data(), n, sign);
    for (std::size_t k = 0; k < n; ++k) x[k * stride] = buf[k];
}

CTensor fft2(const CTensor& img) { return transform2_scaled(img, -1); }
CTensor ifft2(const CTensor& ksp) { return transform2_scaled(ksp, +1); }

CTensor fft2_stack(const CTensor& imgs) { return transform2_stack_scaled(imgs, -1); }
CTensor ifft2_stack(const CTensor& ksps) { return transform2_stack_scaled(ksps, +1); }

} // namespace kunn
