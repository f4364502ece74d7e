#pragma once

#include <string>
#include <vector>

#include "fd_check.hpp"

namespace kunn_test {

/// One gradient-check scenario: fresh parameter values plus a builder whose
/// non-differentiable constants are baked in per seed.
struct PreparedCase {
    std::vector<kunn::Tensor> vals;
    GraphBuilder build;
    double tol = 1e-4;
    double h = 1e-5;
};

struct OpCase {
    std::string name;
    std::function<PreparedCase(kunn::Rng&)> prepare;
};

/// Every graph op, each reduced to a scalar through sum_sq where needed.
///
/// For ops that are linear (or bilinear) the scalar root is an exact
/// polynomial of degree <= 2 in any single entry, so central differences are
/// mathematically exact for every step; those cases use h = 0.5 to suppress
/// cancellation noise and a tight 1e-8 tolerance.  The genuinely nonlinear
/// ops (relu, channel_norm) use a small step and the standard 1e-4.
inline std::vector<OpCase> gradient_cases() {
    using kunn::Graph;
    using kunn::Rng;
    using kunn::Tensor;
    std::vector<OpCase> cases;

    auto exact = [](PreparedCase& c) {
        c.tol = 1e-8;
        c.h = 0.5;
    };

    cases.push_back({"conv2d_same_zero", [exact](Rng& rng) {
                         PreparedCase c;
                         exact(c);
                         c.vals = {random_tensor(rng, {2, 8, 8}), random_tensor(rng, {3, 2, 3, 3})};
                         c.build = [](Graph& g, const std::vector<Tensor>& v, std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             const int w = g.param(v[1]);
                             ids = {x, w};
                             return g.sum_sq(g.conv2d_same_zero(x, w));
                         };
                         return c;
                     }});

    cases.push_back({"conv2d_circular", [exact](Rng& rng) {
                         PreparedCase c;
                         exact(c);
                         c.vals = {random_tensor(rng, {2, 8, 8}), random_tensor(rng, {4, 3, 3})};
                         c.build = [](Graph& g, const std::vector<Tensor>& v, std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             const int k = g.param(v[1]);
                             ids = {x, k};
                             return g.sum_sq(g.conv2d_circular(x, k));
                         };
                         return c;
                     }});

    cases.push_back({"upsample2x_bilinear", [exact](Rng& rng) {
                         PreparedCase c;
                         exact(c);
                         c.vals = {random_tensor(rng, {2, 4, 4})};
                         c.build = [](Graph& g, const std::vector<Tensor>& v, std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             ids = {x};
                             return g.sum_sq(g.upsample2x_bilinear(x));
                         };
                         return c;
                     }});

    cases.push_back({"relu", [](Rng& rng) {
                         PreparedCase c;
                         c.vals = {random_tensor_offzero(rng, {2, 8, 8})};
                         c.build = [](Graph& g, const std::vector<Tensor>& v, std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             ids = {x};
                             return g.sum_sq(g.relu(x));
                         };
                         return c;
                     }});

    cases.push_back({"channel_norm", [](Rng& rng) {
                         PreparedCase c;
                         c.vals = {random_tensor(rng, {2, 8, 8}),
                                   random_tensor(rng, {2}), random_tensor(rng, {2})};
                         // A plain sum of squares is nearly invariant in x here
                         // (the op pins per-channel variance), which starves the
                         // x-gradient; a fixed target keeps it well-conditioned.
                         Tensor target = random_tensor(rng, {2, 8, 8});
                         Tensor ones({8, 8}, std::vector<double>(64, 1.0));
                         c.build = [target, ones](Graph& g, const std::vector<Tensor>& v,
                                                  std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             const int gain = g.param(v[1]);
                             const int bias = g.param(v[2]);
                             ids = {x, gain, bias};
                             const int y = g.channel_norm(x, gain, bias);
                             return g.sum_sq(g.masked_residual(y, g.constant(ones), g.constant(target)));
                         };
                         return c;
                     }});

    cases.push_back({"add", [exact](Rng& rng) {
                         PreparedCase c;
                         exact(c);
                         c.vals = {random_tensor(rng, {2, 8, 8}), random_tensor(rng, {2, 8, 8})};
                         c.build = [](Graph& g, const std::vector<Tensor>& v, std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             const int y = g.param(v[1]);
                             ids = {x, y};
                             return g.sum_sq(g.add(x, y));
                         };
                         return c;
                     }});

    cases.push_back({"scale", [exact](Rng& rng) {
                         PreparedCase c;
                         exact(c);
                         c.vals = {random_tensor(rng, {2, 8, 8})};
                         c.build = [](Graph& g, const std::vector<Tensor>& v, std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             ids = {x};
                             return g.sum_sq(g.scale(x, -1.7));
                         };
                         return c;
                     }});

    cases.push_back({"complex_mul", [exact](Rng& rng) {
                         PreparedCase c;
                         exact(c);
                         c.vals = {random_tensor(rng, {2, 8, 8}), random_tensor(rng, {2, 8, 8})};
                         c.build = [](Graph& g, const std::vector<Tensor>& v, std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             const int y = g.param(v[1]);
                             ids = {x, y};
                             return g.sum_sq(g.complex_mul(x, y));
                         };
                         return c;
                     }});

    cases.push_back({"complex_conj", [exact](Rng& rng) {
                         PreparedCase c;
                         exact(c);
                         c.vals = {random_tensor(rng, {2, 8, 8})};
                         c.build = [](Graph& g, const std::vector<Tensor>& v, std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             ids = {x};
                             return g.sum_sq(g.complex_conj(x));
                         };
                         return c;
                     }});

    cases.push_back({"reflect_spatial", [exact](Rng& rng) {
                         PreparedCase c;
                         exact(c);
                         c.vals = {random_tensor(rng, {2, 8, 8})};
                         c.build = [](Graph& g, const std::vector<Tensor>& v, std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             ids = {x};
                             return g.sum_sq(g.reflect_spatial(x));
                         };
                         return c;
                     }});

    cases.push_back({"crop_center", [exact](Rng& rng) {
                         PreparedCase c;
                         exact(c);
                         c.vals = {random_tensor(rng, {2, 8, 8})};
                         c.build = [](Graph& g, const std::vector<Tensor>& v, std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             ids = {x};
                             return g.sum_sq(g.crop_center(x, 5, 5));
                         };
                         return c;
                     }});

    cases.push_back({"sum_sq", [exact](Rng& rng) {
                         PreparedCase c;
                         exact(c);
                         c.vals = {random_tensor(rng, {2, 8, 8})};
                         c.build = [](Graph& g, const std::vector<Tensor>& v, std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             ids = {x};
                             return g.sum_sq(x);
                         };
                         return c;
                     }});

    cases.push_back({"masked_residual", [exact](Rng& rng) {
                         PreparedCase c;
                         exact(c);
                         c.vals = {random_tensor(rng, {2, 8, 8})};
                         Tensor mask({8, 8});
                         for (std::size_t i = 0; i < mask.size(); ++i)
                             mask[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
                         Tensor target = random_tensor(rng, {2, 8, 8});
                         c.build = [mask, target](Graph& g, const std::vector<Tensor>& v,
                                                  std::vector<int>& ids) {
                             const int x = g.param(v[0]);
                             const int m = g.constant(mask);
                             const int t = g.constant(target);
                             ids = {x};
                             return g.sum_sq(g.masked_residual(x, m, t));
                         };
                         return c;
                     }});

    return cases;
}

} // namespace kunn_test
