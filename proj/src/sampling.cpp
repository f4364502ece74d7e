#include "kunn/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kunn/rng.hpp"

namespace kunn {

namespace {

std::size_t target_lines(std::size_t n, double r) {
    return static_cast<std::size_t>(std::lround(static_cast<double>(n) / r));
}

void check_line_args(std::size_t n, double r, std::size_t acs, const char* who) {
    if (n == 0) throw std::invalid_argument(std::string(who) + ": empty grid");
    if (r < 1.0)
        throw std::invalid_argument(std::string(who) + ": acceleration must be >= 1");
    if (acs < 1 || acs > n)
        throw std::invalid_argument(std::string(who) + ": acs must be in [1, N]");
}

std::vector<std::size_t> acs_block(std::size_t n, std::size_t acs) {
    const std::size_t lo = (n - acs) / 2;
    std::vector<std::size_t> lines(acs);
    for (std::size_t i = 0; i < acs; ++i) lines[i] = lo + i;
    return lines;
}

void finish_lines(SamplingMask& m, std::vector<std::size_t> lines) {
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    m.lines = std::move(lines);
}

} // namespace

bool SamplingMask::is_sampled(std::size_t k1, std::size_t k2) const {
    if (k1 >= n || k2 >= n)
        throw std::invalid_argument("SamplingMask: index outside the grid");
    if (kind == Kind::entrywise) return entry.at2(k1, k2) != 0.0;
    return std::binary_search(lines.begin(), lines.end(), k1);
}

std::size_t SamplingMask::sample_count() const {
    if (kind == Kind::entrywise) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < entry.size(); ++i)
            if (entry[i] != 0.0) ++c;
        return c;
    }
    return lines.size() * n;
}

CTensor SamplingMask::apply(const CTensor& k) const {
    if (k.ndim() != 2 && k.ndim() != 3)
        throw std::invalid_argument("SamplingMask: expected [N,N] or [Nc,N,N]");
    const std::size_t coils = k.ndim() == 3 ? k.dim(0) : 1;
    const std::size_t n1 = k.dim(k.ndim() - 2), n2 = k.dim(k.ndim() - 1);
    if (n1 != n || n2 != n)
        throw std::invalid_argument("SamplingMask: grid size mismatch");
    CTensor out = k;
    for (std::size_t c = 0; c < coils; ++c)
        for (std::size_t k1 = 0; k1 < n; ++k1)
            for (std::size_t k2 = 0; k2 < n; ++k2)
                if (!is_sampled(k1, k2)) out[(c * n + k1) * n + k2] = {0.0, 0.0};
    return out;
}

Tensor SamplingMask::to_entry_map() const {
    Tensor map({n, n});
    for (std::size_t k1 = 0; k1 < n; ++k1)
        for (std::size_t k2 = 0; k2 < n; ++k2) map.at2(k1, k2) = is_sampled(k1, k2) ? 1.0 : 0.0;
    return map;
}

std::string mask_kind_name(SamplingMask::Kind kind) {
    switch (kind) {
    case SamplingMask::Kind::random: return "random";
    case SamplingMask::Kind::vd_regular: return "vd_regular";
    case SamplingMask::Kind::partial_fourier: return "partial_fourier";
    case SamplingMask::Kind::entrywise: return "entrywise";
    }
    throw std::invalid_argument("mask_kind_name: bad kind");
}

SamplingMask::Kind mask_kind_from_name(const std::string& name) {
    if (name == "random") return SamplingMask::Kind::random;
    if (name == "vd_regular") return SamplingMask::Kind::vd_regular;
    if (name == "partial_fourier") return SamplingMask::Kind::partial_fourier;
    if (name == "entrywise") return SamplingMask::Kind::entrywise;
    throw std::invalid_argument("unknown mask kind '" + name + "'");
}

SamplingMask mask_random(std::size_t n, double r, std::size_t acs, std::uint64_t seed) {
    check_line_args(n, r, acs, "mask_random");
    const std::size_t budget = target_lines(n, r);
    if (budget < acs)
        throw std::invalid_argument("mask_random: acs " + std::to_string(acs) +
                                    " exceeds the line budget " + std::to_string(budget));
    SamplingMask m;
    m.kind = SamplingMask::Kind::random;
    m.n = n;
    m.acs = acs;
    m.r = r;

    std::vector<std::size_t> lines = acs_block(n, acs);
    const std::size_t lo = (n - acs) / 2;
    std::vector<std::size_t> outside;
    for (std::size_t i = 0; i < n; ++i)
        if (i < lo || i >= lo + acs) outside.push_back(i);
    Rng rng(Rng::derive(seed, 0x6d61736b));
    rng.shuffle(outside);
    for (std::size_t i = 0; lines.size() < budget; ++i) lines.push_back(outside.at(i));
    finish_lines(m, std::move(lines));
    return m;
}

SamplingMask mask_vd_regular(std::size_t n, double r, std::size_t acs) {
    check_line_args(n, r, acs, "mask_vd_regular");
    const std::size_t budget = target_lines(n, r);
    if (budget < acs)
        throw std::invalid_argument("mask_vd_regular: acs " + std::to_string(acs) +
                                    " exceeds the line budget " + std::to_string(budget));
    SamplingMask m;
    m.kind = SamplingMask::Kind::vd_regular;
    m.n = n;
    m.acs = acs;
    m.r = r;

    std::vector<std::size_t> lines = acs_block(n, acs);
    if (budget > acs) {
        const std::size_t lo = (n - acs) / 2;
        std::vector<std::size_t> outside;
        for (std::size_t i = 0; i < n; ++i)
            if (i < lo || i >= lo + acs) outside.push_back(i);
        const std::size_t step = static_cast<std::size_t>(
            std::ceil(static_cast<double>(n - acs) / static_cast<double>(budget - acs)));
        for (std::size_t i = 0; i < outside.size(); i += step) lines.push_back(outside[i]);
    }
    finish_lines(m, std::move(lines));
    return m;
}

SamplingMask mask_partial_fourier(std::size_t n, double pf_fraction, std::size_t acs, double r) {
    if (n == 0) throw std::invalid_argument("mask_partial_fourier: empty grid");
    if (!(pf_fraction > 0.5) || pf_fraction > 1.0)
        throw std::invalid_argument("mask_partial_fourier: pf_fraction must be in (0.5, 1]");
    if (acs < 1 || acs > n)
        throw std::invalid_argument("mask_partial_fourier: acs must be in [1, N]");
    if (r < 0.0 || (r != 0.0 && r < 1.0))
        throw std::invalid_argument("mask_partial_fourier: acceleration must be 0 (off) or >= 1");

    const std::size_t block =
        static_cast<std::size_t>(std::lround(pf_fraction * static_cast<double>(n)));
    SamplingMask m;
    m.kind = SamplingMask::Kind::partial_fourier;
    m.n = n;
    m.acs = acs;
    m.r = r == 0.0 ? static_cast<double>(n) / static_cast<double>(block) : r;

    std::vector<std::size_t> lines = acs_block(n, acs);
    const std::size_t lo = (n - acs) / 2;
    std::vector<std::size_t> extra;
    for (std::size_t i = 0; i < block; ++i)
        if (i < lo || i >= lo + acs) extra.push_back(i);
    if (r == 0.0) {
        lines.insert(lines.end(), extra.begin(), extra.end());
    } else {
        const std::size_t budget = target_lines(n, r);
        if (budget < acs)
            throw std::invalid_argument("mask_partial_fourier: acs " + std::to_string(acs) +
                                        " exceeds the line budget " + std::to_string(budget));
        if (budget > acs && !extra.empty()) {
            const std::size_t step = static_cast<std::size_t>(std::ceil(
                static_cast<double>(extra.size()) / static_cast<double>(budget - acs)));
            for (std::size_t i = 0; i < extra.size(); i += step) lines.push_back(extra[i]);
        }
    }
    finish_lines(m, std::move(lines));
    return m;
}

SamplingMask mask_entrywise(std::size_t n, double density, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("mask_entrywise: empty grid");
    if (density < 0.0 || density > 1.0)
        throw std::invalid_argument("mask_entrywise: density must be in [0, 1]");
    SamplingMask m;
    m.kind = SamplingMask::Kind::entrywise;
    m.n = n;
    m.acs = 0;
    m.r = density > 0.0 ? 1.0 / density : 0.0;
    m.entry = Tensor({n, n});

    const std::size_t total = n * n;
    const std::size_t picks =
        static_cast<std::size_t>(std::lround(density * static_cast<double>(total)));
    std::vector<std::size_t> cells(total);
    for (std::size_t i = 0; i < total; ++i) cells[i] = i;
    Rng rng(Rng::derive(seed, 0x656e7472));
    rng.shuffle(cells);
    for (std::size_t i = 0; i < picks; ++i) m.entry[cells[i]] = 1.0;
    return m;
}

} // namespace kunn
