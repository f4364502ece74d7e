#include "kunn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace kunn {

CMat CMat::adjoint() const {
    CMat out(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            out.at(j, i) = std::conj(at(i, j));
    return out;
}

double CMat::fro_norm() const {
    double s = 0.0;
    for (const cplx& z : a) s += std::norm(z);
    return std::sqrt(s);
}

CMat matmul(const CMat& x, const CMat& y) {
    if (x.cols != y.rows)
        throw std::invalid_argument("matmul: inner dimensions disagree (" + std::to_string(x.cols) +
                                    " vs " + std::to_string(y.rows) + ")");
    CMat out(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t k = 0; k < x.cols; ++k) {
            const cplx xv = x.at(i, k);
            if (xv == cplx{0.0, 0.0}) continue;
            for (std::size_t j = 0; j < y.cols; ++j) out.at(i, j) += xv * y.at(k, j);
        }
    }
    return out;
}

namespace {

/// Column-major workspace: col(j) starts at w[j*m].
struct ColMat {
    std::size_t m, n;
    std::vector<cplx> w;
    ColMat(std::size_t m_, std::size_t n_) : m(m_), n(n_), w(m_ * n_, cplx{0.0, 0.0}) {}
    cplx* col(std::size_t j) { return w.data() + j * m; }
    const cplx* col(std::size_t j) const { return w.data() + j * m; }
};

double col_norm_sq(const cplx* c, std::size_t m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += std::norm(c[i]);
    return s;
}

cplx col_dot(const cplx* p, const cplx* q, std::size_t m) {
    cplx s{0.0, 0.0};
    for (std::size_t i = 0; i < m; ++i) s += std::conj(p[i]) * q[i];
    return s;
}

/// Unitary column rotation absorbing the phase of the cross term:
/// p' = c*p - s*conj(u)*q,  q' = s*p + c*conj(u)*q.
void rotate_cols(cplx* p, cplx* q, std::size_t m, double c, double s, cplx ubar) {
    for (std::size_t i = 0; i < m; ++i) {
        const cplx pv = p[i];
        const cplx qv = ubar * q[i];
        p[i] = c * pv - s * qv;
        q[i] = s * pv + c * qv;
    }
}

} // namespace

Svd svd_small(const CMat& a, double tol, std::size_t max_sweeps) {
    if (a.rows == 0 || a.cols == 0)
        throw std::invalid_argument("svd_small: empty matrix");
    if (a.rows < a.cols) {
        Svd t = svd_small(a.adjoint(), tol, max_sweeps);
        return Svd{std::move(t.v), std::move(t.s), std::move(t.u)};
    }
    const std::size_t m = a.rows, n = a.cols;
    ColMat w(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            w.col(j)[i] = a.at(i, j);
    ColMat v(n, n);
    for (std::size_t j = 0; j < n; ++j) v.col(j)[j] = cplx{1.0, 0.0};

    // Columns this far below the matrix norm carry no reliable direction
    // (rotations leave them parallel to their partners up to roundoff, which
    // would stall the relative-correlation test); they are flushed to zero.
    const double dead = 1e-15 * a.fro_norm();
    auto flush_if_dead = [&](std::size_t j) {
        if (std::sqrt(col_norm_sq(w.col(j), m)) <= dead) {
            std::fill(w.col(j), w.col(j) + m, cplx{0.0, 0.0});
            return true;
        }
        return false;
    };

    double worst = 0.0;
    bool converged = (n == 1);
    for (std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        worst = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            if (flush_if_dead(p)) continue;
            for (std::size_t q = p + 1; q < n; ++q) {
                if (flush_if_dead(q)) continue;
                const double alpha = col_norm_sq(w.col(p), m);
                const double beta = col_norm_sq(w.col(q), m);
                const cplx gamma = col_dot(w.col(p), w.col(q), m);
                const double denom = std::sqrt(alpha * beta);
                if (denom == 0.0) continue;
                const double corr = std::abs(gamma) / denom;
                worst = std::max(worst, corr);
                if (corr <= tol) continue;
                const double ag = std::abs(gamma);
                const cplx ubar = std::conj(gamma / ag);
                const double tau = (beta - alpha) / (2.0 * ag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                rotate_cols(w.col(p), w.col(q), m, c, s, ubar);
                rotate_cols(v.col(p), v.col(q), n, c, s, ubar);
            }
        }
        converged = worst <= tol;
    }
    if (!converged)
        throw std::runtime_error("svd_small: no convergence after " + std::to_string(max_sweeps) +
                                 " sweeps; worst column correlation " + std::to_string(worst));

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(col_norm_sq(w.col(j), m));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&sigma](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    Svd out;
    out.u = CMat(m, n);
    out.v = CMat(n, n);
    out.s.resize(n);
    for (std::size_t jj = 0; jj < n; ++jj) {
        const std::size_t j = order[jj];
        out.s[jj] = sigma[j];
        for (std::size_t i = 0; i < n; ++i) out.v.at(i, jj) = v.col(j)[i];
        if (sigma[j] > 0.0) {
            const double inv = 1.0 / sigma[j];
            for (std::size_t i = 0; i < m; ++i) out.u.at(i, jj) = w.col(j)[i] * inv;
        }
    }
    // Exactly zero columns get deterministic orthonormal fill so U keeps
    // orthonormal columns even for rank-deficient input.
    for (std::size_t jj = 0; jj < n; ++jj) {
        if (out.s[jj] > 0.0) continue;
        std::vector<cplx> cand(m);
        bool placed = false;
        for (std::size_t basis = 0; basis < m && !placed; ++basis) {
            std::fill(cand.begin(), cand.end(), cplx{0.0, 0.0});
            cand[basis] = cplx{1.0, 0.0};
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t l = 0; l < n; ++l) {
                    if (l == jj) continue;
                    cplx proj{0.0, 0.0};
                    for (std::size_t i = 0; i < m; ++i) proj += std::conj(out.u.at(i, l)) * cand[i];
                    for (std::size_t i = 0; i < m; ++i) cand[i] -= proj * out.u.at(i, l);
                }
            }
            const double nrm = std::sqrt(col_norm_sq(cand.data(), m));
            if (nrm > 0.5) {
                for (std::size_t i = 0; i < m; ++i) out.u.at(i, jj) = cand[i] / nrm;
                placed = true;
            }
        }
        if (!placed)
            throw std::runtime_error("svd_small: failed to complete orthonormal basis for null column");
    }
    return out;
}

std::size_t numeric_rank(const std::vector<double>& s, double tol_rel) {
    if (s.empty()) return 0;
    const double top = *std::max_element(s.begin(), s.end());
    if (top <= 0.0) return 0;
    std::size_t r = 0;
    for (double v : s)
        if (v > tol_rel * top) ++r;
    return r;
}

} // namespace kunn
