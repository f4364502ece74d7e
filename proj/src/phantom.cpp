#include "kunn/phantom.hpp"

#include <cmath>
#include <stdexcept>

#include "kunn/fft.hpp"
#include "kunn/rng.hpp"

namespace kunn {

int signed_freq(std::size_t k, std::size_t n) {
    const long long kk = static_cast<long long>(k);
    const long long nn = static_cast<long long>(n);
    return static_cast<int>(kk < (nn + 1) / 2 ? kk : kk - nn);
}

bool in_centered_patch(std::size_t k1, std::size_t k2, std::size_t patch, std::size_t n) {
    const int half = static_cast<int>((patch - 1) / 2);
    return std::abs(signed_freq(k1, n)) <= half && std::abs(signed_freq(k2, n)) <= half;
}

namespace {

struct Ellipse {
    double cx, cy;     // center relative to image center, pixels
    double a, b;       // semi-axes, pixels
    double cos_t, sin_t;
    double amplitude;
};

bool inside(const Ellipse& e, double u, double v) {
    const double du = u - e.cx;
    const double dv = v - e.cy;
    const double p = (du * e.cos_t + dv * e.sin_t) / e.a;
    const double q = (-du * e.sin_t + dv * e.cos_t) / e.b;
    return p * p + q * q <= 1.0;
}

void require_odd_support(std::size_t support, std::size_t n, const char* who) {
    if (support == 0 || support % 2 == 0)
        throw std::invalid_argument(std::string(who) + ": support must be odd and positive, got " +
                                    std::to_string(support));
    if (support >= n)
        throw std::invalid_argument(std::string(who) + ": support " + std::to_string(support) +
                                    " must be smaller than the grid size " + std::to_string(n));
}

} // namespace

Tensor make_phantom(std::size_t n, std::size_t n_ellipses, std::uint64_t seed) {
    if (n < 4 || (n & (n - 1)) != 0)
        throw std::invalid_argument("make_phantom: grid size must be a power of two >= 4");
    if (n_ellipses == 0)
        throw std::invalid_argument("make_phantom: need at least one ellipse");

    std::vector<Ellipse> ellipses;
    ellipses.push_back({0.0, 0.0, n / 4.0, n / 4.0, 1.0, 0.0, 1.0});
    Rng rng(Rng::derive(seed, 0x70686e74));
    for (std::size_t e = 1; e < n_ellipses; ++e) {
        Ellipse el;
        el.cx = rng.uniform(-(n / 4.0), n / 4.0);
        el.cy = rng.uniform(-(n / 4.0), n / 4.0);
        el.a = rng.uniform(n / 16.0, 3.0 * n / 16.0);
        el.b = rng.uniform(n / 16.0, 3.0 * n / 16.0);
        const double t = rng.uniform(0.0, 3.14159265358979323846);
        el.cos_t = std::cos(t);
        el.sin_t = std::sin(t);
        el.amplitude = rng.uniform(0.25, 0.75);
        ellipses.push_back(el);
    }

    Tensor img({n, n});
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (static_cast<double>(i) + 0.5) - n / 2.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = (static_cast<double>(j) + 0.5) - n / 2.0;
            double s = 0.0;
            for (const Ellipse& e : ellipses)
                if (inside(e, u, v)) s += e.amplitude;
            img.at2(i, j) = s;
            peak = std::max(peak, s);
        }
    }
    if (peak > 1.0)
        for (std::size_t i = 0; i < img.size(); ++i) img[i] /= peak;
    return img;
}

double gradient_support_fraction(const Tensor& img) {
    if (img.ndim() != 2)
        throw std::invalid_argument("gradient_support_fraction: expected a 2-D image");
    const std::size_t n1 = img.dim(0), n2 = img.dim(1);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
            const double d1 = img.at2((i + 1) % n1, j) - img.at2(i, j);
            const double d2 = img.at2(i, (j + 1) % n2) - img.at2(i, j);
            if (d1 != 0.0 || d2 != 0.0) ++hits;
        }
    return static_cast<double>(hits) / static_cast<double>(n1 * n2);
}

CoilMapSet make_coil_maps(std::size_t n, std::size_t n_coils, std::size_t support,
                          std::uint64_t seed) {
    require_odd_support(support, n, "make_coil_maps");
    if (n_coils == 0)
        throw std::invalid_argument("make_coil_maps: need at least one coil");

    CoilMapSet out;
    out.support = support;
    out.pre_spectra = CTensor({n_coils, n, n});
    CTensor pre_maps({n_coils, n, n});
    Rng rng(Rng::derive(seed, 0x63736d));
    for (std::size_t c = 0; c < n_coils; ++c) {
        CTensor spec({n, n});
        for (std::size_t k1 = 0; k1 < n; ++k1)
            for (std::size_t k2 = 0; k2 < n; ++k2)
                if (in_centered_patch(k1, k2, support, n)) spec.at2(k1, k2) = rng.cnormal();
        const CTensor m = ifft2(spec);
        for (std::size_t i = 0; i < n * n; ++i) {
            out.pre_spectra[c * n * n + i] = spec[i];
            pre_maps[c * n * n + i] = m[i];
        }
    }

    // Pointwise sum-of-squares normalization; the floor only matters where
    // all coils nearly vanish at once and keeps the division bounded.
    const double floor = 1e-6;
    out.maps = CTensor({n_coils, n, n});
    for (std::size_t i = 0; i < n * n; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < n_coils; ++c) s += std::norm(pre_maps[c * n * n + i]);
        const double denom = std::max(std::sqrt(s), floor);
        for (std::size_t c = 0; c < n_coils; ++c)
            out.maps[c * n * n + i] = pre_maps[c * n * n + i] / denom;
    }

    out.leakage = 0.0;
    for (std::size_t c = 0; c < n_coils; ++c) {
        CTensor m({n, n});
        for (std::size_t i = 0; i < n * n; ++i) m[i] = out.maps[c * n * n + i];
        const CTensor spec = fft2(m);
        double inside = 0.0, total = 0.0;
        for (std::size_t k1 = 0; k1 < n; ++k1)
            for (std::size_t k2 = 0; k2 < n; ++k2) {
                const double e = std::norm(spec.at2(k1, k2));
                total += e;
                if (in_centered_patch(k1, k2, support, n)) inside += e;
            }
        if (total > 0.0) out.leakage = std::max(out.leakage, (total - inside) / total);
    }
    return out;
}

PhaseMap make_phase(std::size_t n, std::size_t support, std::uint64_t seed) {
    require_odd_support(support, n, "make_phase");

    // Random patch coefficients, then A(k) = (a(k) - conj(a(-k)))/2 so that
    // A(-k) = -conj(A(k)) and ifft2(A) is purely imaginary.
    CTensor a({n, n});
    Rng rng(Rng::derive(seed, 0x706873));
    for (std::size_t k1 = 0; k1 < n; ++k1)
        for (std::size_t k2 = 0; k2 < n; ++k2)
            if (in_centered_patch(k1, k2, support, n)) a.at2(k1, k2) = rng.cnormal();
    CTensor anti({n, n});
    for (std::size_t k1 = 0; k1 < n; ++k1)
        for (std::size_t k2 = 0; k2 < n; ++k2) {
            if (!in_centered_patch(k1, k2, support, n)) continue;
            const cplx mirrored = a.at2((n - k1) % n, (n - k2) % n);
            anti.at2(k1, k2) = 0.5 * (a.at2(k1, k2) - std::conj(mirrored));
        }

    const CTensor w_small = ifft2(anti);
    Tensor t2({n, n});
    double ms = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) {
        t2[i] = w_small[i].imag();
        ms += t2[i] * t2[i];
    }
    const double rms = std::sqrt(ms / static_cast<double>(n * n));
    if (rms > 1e-15)
        for (std::size_t i = 0; i < n * n; ++i) t2[i] /= rms;

    // A strong real DC keeps the synthesized field kappa + j*t2 close to
    // constant modulus, so the unit-modulus projection below disturbs its
    // spectrum only at second order.
    const double kappa = 3.0;
    PhaseMap out;
    out.phi = Tensor({n, n});
    out.e2phi = CTensor({n, n});
    for (std::size_t i = 0; i < n * n; ++i) {
        const double angle = std::atan2(t2[i], kappa);
        out.phi[i] = 0.5 * angle;
        out.e2phi[i] = {std::cos(angle), std::sin(angle)};
    }

    const CTensor spec = fft2(out.e2phi);
    double inside = 0.0, total = 0.0;
    for (std::size_t k1 = 0; k1 < n; ++k1)
        for (std::size_t k2 = 0; k2 < n; ++k2) {
            const double e = std::norm(spec.at2(k1, k2));
            total += e;
            if (in_centered_patch(k1, k2, support, n)) inside += e;
        }
    out.support_residual = total > 0.0 ? (total - inside) / total : 0.0;
    return out;
}

} // namespace kunn
