#include "kunn/hankel.hpp"

#include <stdexcept>
#include <string>

namespace kunn {

HankelMatrix hankel1(const std::vector<cplx>& x, std::size_t d) {
    const std::size_t n = x.size();
    if (d < 1 || d > n)
        throw std::invalid_argument("hankel1: window " + std::to_string(d) +
                                    " must be in [1, " + std::to_string(n) + "]");
    HankelMatrix h(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            h.at(i, j) = x[(i + j) % n];
    return h;
}

HankelMatrix hankel2(const CTensor& x, std::size_t d1, std::size_t d2) {
    if (x.ndim() != 2)
        throw std::invalid_argument("hankel2: expected a 2-D tensor");
    const std::size_t n1 = x.dim(0), n2 = x.dim(1);
    if (d1 < 1 || d2 < 1 || d1 > n1 || d2 > n2)
        throw std::invalid_argument("hankel2: window " + std::to_string(d1) + "x" + std::to_string(d2) +
                                    " must fit inside " + std::to_string(n1) + "x" + std::to_string(n2));
    HankelMatrix h(n1 * n2, d1 * d2);
    for (std::size_t i2 = 0; i2 < n2; ++i2) {
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            const std::size_t r = i1 + n1 * i2;
            for (std::size_t j2 = 0; j2 < d2; ++j2)
                for (std::size_t j1 = 0; j1 < d1; ++j1)
                    h.at(r, j1 + d1 * j2) = x.at2((i1 + j1) % n1, (i2 + j2) % n2);
        }
    }
    return h;
}

std::vector<cplx> flatten_colmajor(const CTensor& t) {
    if (t.ndim() != 2)
        throw std::invalid_argument("flatten_colmajor: expected a 2-D tensor");
    const std::size_t n1 = t.dim(0), n2 = t.dim(1);
    std::vector<cplx> v(n1 * n2);
    for (std::size_t j = 0; j < n2; ++j)
        for (std::size_t i = 0; i < n1; ++i)
            v[i + n1 * j] = t.at2(i, j);
    return v;
}

} // namespace kunn
