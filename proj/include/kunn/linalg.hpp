#pragma once

#include <cstddef>
#include <vector>

#include "kunn/ctensor.hpp"

namespace kunn {

/// Row-major complex matrix, small enough to live in one vector.
struct CMat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<cplx> a;

    CMat() = default;
    CMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, cplx{0.0, 0.0}) {}

    cplx& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const cplx& at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    CMat adjoint() const;
    double fro_norm() const;
};

CMat matmul(const CMat& x, const CMat& y);

/// Thin singular value decomposition A = U diag(s) V^H with k = min(rows, cols)
/// columns in U and V, s non-negative and non-increasing.
struct Svd {
    CMat u;
    std::vector<double> s;
    CMat v;
};

/// One-sided Jacobi SVD for desk-scale matrices.  Orthogonalizes column pairs
/// until every pair is orthogonal to within tol relative; throws with the
/// worst remaining pair correlation if max_sweeps passes do not converge.
/// Zero singular directions get deterministic orthonormal fill columns in U.
Svd svd_small(const CMat& a, double tol = 1e-14, std::size_t max_sweeps = 64);

/// Count of singular values above tol_rel times the largest.
std::size_t numeric_rank(const std::vector<double>& s, double tol_rel = 1e-6);

} // namespace kunn
