#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "kunn/adam.hpp"
#include "kunn/autodiff.hpp"
#include "kunn/kspace.hpp"
#include "op_cases.hpp"

using namespace kunn;
using namespace kunn_test;

TEST_CASE("forward basics: relu and add") {
    Graph g;
    const int r = g.relu(g.constant(Tensor({2}, {-1.0, 2.0})));
    CHECK(g.value(r)[0] == 0.0);
    CHECK(g.value(r)[1] == 2.0);

    const int a = g.add(g.constant(Tensor({2}, {1.0, 1.0})), g.constant(Tensor({2}, {2.0, 3.0})));
    CHECK(g.value(a)[0] == 3.0);
    CHECK(g.value(a)[1] == 4.0);
}

TEST_CASE("zero-padded conv matches a quadruple-loop evaluation") {
    Rng rng(17);
    struct Case {
        std::size_t cin, h, w, cout, kh, kw;
    };
    for (const Case& c : {Case{3, 9, 7, 5, 3, 3}, Case{1, 5, 5, 1, 1, 1}, Case{2, 8, 6, 4, 5, 3},
                          Case{4, 12, 12, 6, 3, 3}}) {
        Tensor x({c.cin, c.h, c.w});
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
        Tensor k({c.cout, c.cin, c.kh, c.kw});
        for (std::size_t i = 0; i < k.size(); ++i) k[i] = rng.normal();

        Graph g;
        const Tensor& out = g.value(g.conv2d_same_zero(g.constant(x), g.constant(k)));
        REQUIRE(out.shape() == std::vector<std::size_t>{c.cout, c.h, c.w});

        const std::size_t ph = c.kh / 2, pw = c.kw / 2;
        for (std::size_t o = 0; o < c.cout; ++o)
            for (std::size_t y = 0; y < c.h; ++y)
                for (std::size_t xx = 0; xx < c.w; ++xx) {
                    double want = 0.0;
                    for (std::size_t ic = 0; ic < c.cin; ++ic)
                        for (std::size_t u = 0; u < c.kh; ++u)
                            for (std::size_t v = 0; v < c.kw; ++v) {
                                const long sy = static_cast<long>(y + u) - static_cast<long>(ph);
                                const long sx = static_cast<long>(xx + v) - static_cast<long>(pw);
                                if (sy < 0 || sx < 0 || sy >= static_cast<long>(c.h) ||
                                    sx >= static_cast<long>(c.w))
                                    continue;
                                want += x.at3(ic, static_cast<std::size_t>(sy),
                                              static_cast<std::size_t>(sx)) *
                                        k[((o * c.cin + ic) * c.kh + u) * c.kw + v];
                            }
                    CHECK(out.at3(o, y, xx) == doctest::Approx(want).epsilon(1e-12));
                }
    }
}

TEST_CASE("graph circular conv agrees with the direct k-space routine") {
    Rng rng(23);
    const std::size_t h = 8, w = 8, dh = 3, dw = 5, pairs = 3;
    CTensor xc({h, w});
    Tensor xp({2, h, w});
    for (std::size_t i = 0; i < h * w; ++i) {
        xc[i] = rng.cnormal();
        xp[i] = xc[i].real();
        xp[h * w + i] = xc[i].imag();
    }
    Tensor kp({2 * pairs, dh, dw});
    std::vector<CTensor> kernels;
    for (std::size_t b = 0; b < pairs; ++b) {
        CTensor kc({dh, dw});
        for (std::size_t i = 0; i < dh * dw; ++i) {
            kc[i] = rng.cnormal();
            kp[(2 * b) * dh * dw + i] = kc[i].real();
            kp[(2 * b + 1) * dh * dw + i] = kc[i].imag();
        }
        kernels.push_back(std::move(kc));
    }

    Graph g;
    const Tensor& out = g.value(g.conv2d_circular(g.constant(xp), g.constant(kp)));
    for (std::size_t b = 0; b < pairs; ++b) {
        const CTensor want = circ_conv2(xc, kernels[b]);
        for (std::size_t i = 0; i < h * w; ++i) {
            CHECK(out[(2 * b) * h * w + i] == doctest::Approx(want[i].real()).epsilon(1e-12));
            CHECK(out[(2 * b + 1) * h * w + i] == doctest::Approx(want[i].imag()).epsilon(1e-12));
        }
    }
}

TEST_CASE("circular conv of a delta image places the embedded kernel") {
    Rng rng(42);
    CTensor kc({3, 3});
    Tensor kt({2, 3, 3});
    for (std::size_t i = 0; i < 9; ++i) {
        kc[i] = rng.cnormal();
        kt[i] = kc[i].real();
        kt[9 + i] = kc[i].imag();
    }
    const std::size_t p1 = 1, p2 = 2;
    Tensor x({2, 4, 4});
    x[(0 * 4 + p1) * 4 + p2] = 1.0; // real delta at (1,2)

    Graph g;
    const int out = g.conv2d_circular(g.constant(x), g.constant(kt));

    const CTensor pad = pad_kernel2(kc, 4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            const cplx want = pad.at2((4 + i - p1) % 4, (4 + j - p2) % 4);
            CHECK(g.value(out)[(0 * 4 + i) * 4 + j] == doctest::Approx(want.real()).epsilon(1e-14));
            CHECK(g.value(out)[(1 * 4 + i) * 4 + j] == doctest::Approx(want.imag()).epsilon(1e-14));
        }
}

TEST_CASE("seeded backward gives the sum gradient") {
    Graph g;
    const int x = g.param(Tensor({3}, {1.0, -2.0, 5.0}));
    g.backward(x, Tensor({3}, {1.0, 1.0, 1.0}));
    const Tensor gx = g.grad(x);
    for (std::size_t i = 0; i < 3; ++i) CHECK(gx[i] == 1.0);
}

TEST_CASE("relu subgradient is zero on the negative side") {
    Graph g;
    const int x = g.param(Tensor({2}, {-1.0, 2.0}));
    const int r = g.relu(x);
    g.backward(r, Tensor({2}, {1.0, 1.0}));
    CHECK(g.grad(x)[0] == 0.0);
    CHECK(g.grad(x)[1] == 1.0);
}

TEST_CASE("complex arithmetic on channel pairs") {
    Graph g;
    const int x = g.constant(Tensor({2, 1, 1}, {1.0, 1.0}));
    const int y = g.constant(Tensor({2, 1, 1}, {1.0, -1.0}));
    const int m = g.complex_mul(x, y);
    CHECK(g.value(m)[0] == 2.0);
    CHECK(g.value(m)[1] == 0.0);

    const int c = g.complex_conj(x);
    CHECK(g.value(c)[0] == 1.0);
    CHECK(g.value(c)[1] == -1.0);
}

TEST_CASE("upsampling a constant stays constant") {
    Graph g;
    const int up = g.upsample2x_bilinear(g.constant(Tensor({1, 3, 3}, std::vector<double>(9, 2.5))));
    CHECK(g.value(up).shape() == std::vector<std::size_t>{1, 6, 6});
    for (std::size_t i = 0; i < 36; ++i) CHECK(g.value(up)[i] == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("channel_norm output statistics") {
    Rng rng(7);
    Graph g;
    const Tensor xv = random_tensor(rng, {2, 16, 16}, 2.0);
    const int x = g.constant(xv);
    const int gain = g.constant(Tensor({2}, {1.0, 1.0}));
    const int bias = g.constant(Tensor({2}, {0.0, 0.0}));
    const int y = g.channel_norm(x, gain, bias);
    for (std::size_t c = 0; c < 2; ++c) {
        double imu = 0.0, ivar = 0.0;
        for (std::size_t i = 0; i < 256; ++i) imu += xv[c * 256 + i];
        imu /= 256.0;
        for (std::size_t i = 0; i < 256; ++i) ivar += (xv[c * 256 + i] - imu) * (xv[c * 256 + i] - imu);
        ivar /= 256.0;

        double mu = 0.0, var = 0.0;
        for (std::size_t i = 0; i < 256; ++i) mu += g.value(y)[c * 256 + i];
        mu /= 256.0;
        for (std::size_t i = 0; i < 256; ++i) {
            const double d = g.value(y)[c * 256 + i] - mu;
            var += d * d;
        }
        var /= 256.0;
        CHECK(std::abs(mu) < 1e-10);
        CHECK(std::abs(var - 1.0) < 1e-6);
        // exact statement including the stabilizer in the denominator
        CHECK(var == doctest::Approx(ivar / (ivar + 1e-6)).epsilon(1e-12));
    }
}

TEST_CASE("shape mismatches fail with the op named") {
    Graph g;
    const int a = g.constant(Tensor({2, 4, 4}));
    const int b = g.constant(Tensor({2, 5, 5}));
    CHECK_THROWS_WITH_AS(g.add(a, b), "add: shape mismatch", std::invalid_argument);
    CHECK_THROWS_AS(g.conv2d_circular(a, g.constant(Tensor({3, 2, 2}))), std::invalid_argument);
    CHECK_THROWS_AS(g.complex_conj(g.constant(Tensor({3, 4, 4}))), std::invalid_argument);
}

TEST_CASE("gradients match central finite differences for every op") {
    for (const OpCase& oc : gradient_cases()) {
        CAPTURE(oc.name);
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            Rng rng(Rng::derive(900, seed));
            PreparedCase pc = oc.prepare(rng);
            const FdReport rep = fd_compare(pc.build, pc.vals, pc.h);
            CAPTURE(seed);
            CAPTURE(rep.worst_where);
            CHECK(rep.worst_rel < pc.tol);
        }
    }
}

TEST_CASE("gradients are bit-identical across rebuilds") {
    for (const OpCase& oc : gradient_cases()) {
        Rng rng1(31337), rng2(31337);
        PreparedCase a = oc.prepare(rng1);
        PreparedCase b = oc.prepare(rng2);
        Graph ga, gb;
        std::vector<int> ia, ib;
        const int ra = a.build(ga, a.vals, ia);
        const int rb = b.build(gb, b.vals, ib);
        CHECK(ga.value(ra)[0] == gb.value(rb)[0]);
        ga.backward(ra);
        gb.backward(rb);
        for (std::size_t p = 0; p < ia.size(); ++p) {
            const Tensor gxa = ga.grad(ia[p]);
            const Tensor gxb = gb.grad(ib[p]);
            for (std::size_t i = 0; i < gxa.size(); ++i) CHECK(gxa[i] == gxb[i]);
        }
    }
}

TEST_CASE("masked residual ignores off-mask perturbations exactly") {
    Rng rng(55);
    Tensor mask({8, 8});
    for (std::size_t i = 0; i < 64; ++i) mask[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    const Tensor target = random_tensor(rng, {2, 8, 8});
    Tensor x = random_tensor(rng, {2, 8, 8});

    auto loss_of = [&](const Tensor& xv) {
        Graph g;
        const int r = g.sum_sq(g.masked_residual(g.constant(xv), g.constant(mask), g.constant(target)));
        return g.value(r)[0];
    };
    const double base = loss_of(x);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 64; ++i)
            if (mask[i] == 0.0) x[c * 64 + i] += 100.0;
    CHECK(loss_of(x) == base);
}

TEST_CASE("adam first step matches the hand recurrence") {
    ParamSet ps;
    ps.add("theta", Tensor({1}, {0.0}));
    AdamConfig cfg;
    cfg.lr = 0.1;
    adam_step(ps, {Tensor({1}, {1.0})}, cfg);
    CHECK(ps.step_count == 1);
    CHECK(ps.items[0].m[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(ps.items[0].v[0] == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(ps.items[0].value[0] == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
    ParamSet ps;
    ps.add("w", Tensor({3}, {1.0, -2.0, 0.5}));
    adam_step(ps, {Tensor({3})}, AdamConfig{});
    CHECK(ps.step_count == 1);
    CHECK(ps.items[0].value[0] == 1.0);
    CHECK(ps.items[0].value[1] == -2.0);
    CHECK(ps.items[0].value[2] == 0.5);
}

TEST_CASE("adam two-step closed form for constant gradients") {
    const double g0 = 0.7, lr = 0.05;
    ParamSet ps;
    ps.add("w", Tensor({1}, {0.3}));
    AdamConfig cfg;
    cfg.lr = lr;
    adam_step(ps, {Tensor({1}, {g0})}, cfg);
    adam_step(ps, {Tensor({1}, {g0})}, cfg);

    // hand recurrences
    double m = 0.0, v = 0.0, theta = 0.3;
    for (int t = 1; t <= 2; ++t) {
        m = 0.9 * m + 0.1 * g0;
        v = 0.999 * v + 0.001 * g0 * g0;
        const double mhat = m / (1.0 - std::pow(0.9, t));
        const double vhat = v / (1.0 - std::pow(0.999, t));
        theta -= lr * mhat / (std::sqrt(vhat) + 1e-8);
    }
    CHECK(ps.items[0].value[0] == doctest::Approx(theta).epsilon(1e-12));
    CHECK(ps.items[0].m[0] == doctest::Approx(m).epsilon(1e-12));
    CHECK(ps.items[0].v[0] == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("adam rejects non-finite gradients by name") {
    ParamSet ps;
    ps.add("bad_param", Tensor({1}, {0.0}));
    Tensor g({1});
    g[0] = std::nan("");
    CHECK_THROWS_WITH_AS(adam_step(ps, {g}, AdamConfig{}),
                         "adam_step: non-finite gradient for 'bad_param'", std::runtime_error);
}

TEST_CASE("gradient scaling keeps the step-1 sign pattern") {
    Rng rng(77);
    Tensor g1({6});
    for (std::size_t i = 0; i < 6; ++i) g1[i] = rng.normal();
    for (double c : {0.01, 1.0, 250.0}) {
        ParamSet ps;
        ps.add("w", Tensor({6}));
        Tensor gs = g1;
        for (std::size_t i = 0; i < 6; ++i) gs[i] *= c;
        adam_step(ps, {gs}, AdamConfig{});
        for (std::size_t i = 0; i < 6; ++i) {
            const double step = ps.items[0].value[i];
            if (g1[i] > 0.0) CHECK(step < 0.0);
            if (g1[i] < 0.0) CHECK(step > 0.0);
        }
    }
}
