#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kunn/ctensor.hpp"
#include "kunn/tensor.hpp"

namespace kunn {

/// Cartesian k-space sampling pattern on an N x N grid.  The three line
/// kinds sample whole phase-encode lines (constant first index); the
/// entrywise kind samples individual k-space locations, which is the model
/// the recovery theory assumes.  Applying a mask is idempotent.
struct SamplingMask {
    enum class Kind { random, vd_regular, partial_fourier, entrywise };

    Kind kind = Kind::random;
    std::size_t n = 0;      // grid side
    std::size_t acs = 0;    // contiguous center lines always sampled (line kinds)
    double r = 1.0;         // nominal acceleration
    std::vector<std::size_t> lines; // sorted sampled line indices (line kinds)
    Tensor entry;           // [N, N] 0/1 map (entrywise kind; empty otherwise)

    bool is_sampled(std::size_t k1, std::size_t k2) const;
    std::size_t sample_count() const; // sampled entries over the N x N grid

    /// Zero the unsampled entries of an [N, N] array or [Nc, N, N] stack.
    CTensor apply(const CTensor& k) const;

    /// Dense [N, N] 0/1 representation (for serialization and plotting).
    Tensor to_entry_map() const;
};

std::string mask_kind_name(SamplingMask::Kind kind);
SamplingMask::Kind mask_kind_from_name(const std::string& name);

/// ACS center block plus uniformly chosen extra lines without replacement
/// until |omega| = round(N/R).
SamplingMask mask_random(std::size_t n, double r, std::size_t acs, std::uint64_t seed);

/// ACS center block plus every ceil((N-acs)/(round(N/R)-acs))-th line
/// outside it, counted from the lowest index upward.
SamplingMask mask_vd_regular(std::size_t n, double r, std::size_t acs);

/// Contiguous block [0, round(pf_fraction*N)) plus the ACS center block.
/// With r > 0 the non-ACS block lines are additionally thinned by a regular
/// skip until |omega| = round(N/R); r = 0 keeps the full block.
SamplingMask mask_partial_fourier(std::size_t n, double pf_fraction, std::size_t acs,
                                  double r = 0.0);

/// Exactly round(density * N^2) k-space locations chosen uniformly without
/// replacement.
SamplingMask mask_entrywise(std::size_t n, double density, std::uint64_t seed);

} // namespace kunn
