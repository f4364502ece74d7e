#include "kunn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kunn {

namespace {

constexpr double kNormEps = 1e-6;

[[noreturn]] void fail(const std::string& where, const std::string& why) {
    throw std::invalid_argument(where + ": " + why);
}

void require3d(const Tensor& t, const std::string& where) {
    if (t.ndim() != 3) fail(where, "expected [C,H,W], got ndim=" + std::to_string(t.ndim()));
}

/// Extended copy xe[i1][i2] = x[i1 mod H][i2 mod W] on an
/// (H+dh-1) x (W+dw-1) scratch; removes modulo arithmetic from conv loops.
void extend_wrap(const double* x, std::size_t h, std::size_t w,
                 std::size_t he, std::size_t we, double* xe) {
    for (std::size_t i = 0; i < he; ++i) {
        const double* src = x + (i % h) * w;
        double* dst = xe + i * we;
        for (std::size_t j = 0; j < we; ++j) dst[j] = src[j % w];
    }
}

/// Fold an extended-gradient scratch back onto the wrapped grid.
void fold_wrap(const double* ge, std::size_t he, std::size_t we,
               std::size_t h, std::size_t w, double* g) {
    for (std::size_t i = 0; i < he; ++i) {
        double* dst = g + (i % h) * w;
        const double* src = ge + i * we;
        for (std::size_t j = 0; j < we; ++j) dst[j % w] += src[j];
    }
}

/// Copies an [h, w] plane into the middle of a zeroed (h+2) x (w+2) frame,
/// turning 3x3 'same' convolution into one uniform interior loop.
void pad_plane3(const double* src, std::size_t h, std::size_t w, double* dst) {
    const std::size_t we = w + 2;
    for (std::size_t y = 0; y < h; ++y)
        std::copy(src + y * w, src + (y + 1) * w, dst + (y + 1) * we + 1);
}

/// out[o0+b] += sum_ic ker[o0+b, ic] (*) plane_ic for a tile of NB output
/// channels.  The tile shares every padded-row load across its channels, so
/// the x loop runs nine loads against 9*NB fused multiply-adds.
template <int NB>
void conv3x3_tile(const double* __restrict pads, std::size_t pp, std::size_t cin,
                  std::size_t h, std::size_t w, const double* __restrict ker,
                  std::size_t o0, double* __restrict out) {
    const std::size_t we = w + 2;
    for (std::size_t ic = 0; ic < cin; ++ic) {
        const double* p = pads + ic * pp;
        double wt[NB][9];
        for (int b = 0; b < NB; ++b)
            for (int t = 0; t < 9; ++t) wt[b][t] = ker[((o0 + b) * cin + ic) * 9 + t];
        for (std::size_t y = 0; y < h; ++y) {
            const double* r0 = p + y * we;
            const double* r1 = r0 + we;
            const double* r2 = r1 + we;
            double* orow[NB];
            for (int b = 0; b < NB; ++b) orow[b] = out + ((o0 + b) * h + y) * w;
            for (std::size_t x = 0; x < w; ++x) {
                const double a0 = r0[x], a1 = r0[x + 1], a2 = r0[x + 2];
                const double m0 = r1[x], m1 = r1[x + 1], m2 = r1[x + 2];
                const double z0 = r2[x], z1 = r2[x + 1], z2 = r2[x + 2];
                for (int b = 0; b < NB; ++b)
                    orow[b][x] += wt[b][0] * a0 + wt[b][1] * a1 + wt[b][2] * a2 +
                                  wt[b][3] * m0 + wt[b][4] * m1 + wt[b][5] * m2 +
                                  wt[b][6] * z0 + wt[b][7] * z1 + wt[b][8] * z2;
            }
        }
    }
}

/// Accumulating 3x3 'same' convolution, out[cout,h,w] += in (*) ker.  Shared
/// by the forward pass and the input-gradient pass (the same contraction
/// with transposed, flipped kernels).
void conv3x3_accumulate(const double* in, std::size_t cin, std::size_t h, std::size_t w,
                        const double* ker, std::size_t cout, double* out) {
    const std::size_t we = w + 2, pp = (h + 2) * we;
    std::vector<double> pads(cin * pp, 0.0);
    for (std::size_t ic = 0; ic < cin; ++ic)
        pad_plane3(in + ic * h * w, h, w, pads.data() + ic * pp);
    std::size_t o = 0;
    for (; o + 4 <= cout; o += 4) conv3x3_tile<4>(pads.data(), pp, cin, h, w, ker, o, out);
    switch (cout - o) {
        case 3: conv3x3_tile<3>(pads.data(), pp, cin, h, w, ker, o, out); break;
        case 2: conv3x3_tile<2>(pads.data(), pp, cin, h, w, ker, o, out); break;
        case 1: conv3x3_tile<1>(pads.data(), pp, cin, h, w, ker, o, out); break;
        default: break;
    }
}

/// gw[o, ic, u, v] += sum_{y,x} gout[o, y, x] * plane_ic[y+u-1, x+v-1] with
/// nine independent accumulator chains per (o, ic) pair.
void conv3x3_weight_grad(const double* in, std::size_t cin, std::size_t h, std::size_t w,
                         const double* gout, std::size_t cout, double* gw) {
    const std::size_t we = w + 2, pp = (h + 2) * we;
    std::vector<double> pads(cin * pp, 0.0);
    for (std::size_t ic = 0; ic < cin; ++ic)
        pad_plane3(in + ic * h * w, h, w, pads.data() + ic * pp);
    for (std::size_t o = 0; o < cout; ++o) {
        const double* dplane = gout + o * h * w;
        for (std::size_t ic = 0; ic < cin; ++ic) {
            const double* p = pads.data() + ic * pp;
            double acc[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
            for (std::size_t y = 0; y < h; ++y) {
                const double* dr = dplane + y * w;
                const double* r0 = p + y * we;
                const double* r1 = r0 + we;
                const double* r2 = r1 + we;
                for (std::size_t x = 0; x < w; ++x) {
                    const double d = dr[x];
                    acc[0] += d * r0[x];
                    acc[1] += d * r0[x + 1];
                    acc[2] += d * r0[x + 2];
                    acc[3] += d * r1[x];
                    acc[4] += d * r1[x + 1];
                    acc[5] += d * r1[x + 2];
                    acc[6] += d * r2[x];
                    acc[7] += d * r2[x + 1];
                    acc[8] += d * r2[x + 2];
                }
            }
            double* kp = gw + (o * cin + ic) * 9;
            for (int t = 0; t < 9; ++t) kp[t] += acc[t];
        }
    }
}

} // namespace

const Graph::Node& Graph::node(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw std::out_of_range("Graph: node id " + std::to_string(id) + " out of range");
    return nodes_[static_cast<std::size_t>(id)];
}

Graph::Node& Graph::node(int id) {
    return const_cast<Node&>(static_cast<const Graph*>(this)->node(id));
}

int Graph::push(Node n) {
    if (!n.value.all_finite())
        fail("Graph node " + std::to_string(nodes_.size()), "non-finite value produced");
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

Tensor& Graph::grad_buf(int id) {
    Node& n = node(id);
    if (!n.grad_live) {
        n.grad = Tensor(n.value.shape());
        n.grad_live = true;
    }
    return n.grad;
}

int Graph::constant(Tensor v) {
    Node n;
    n.op = Op::constant;
    n.value = std::move(v);
    return push(std::move(n));
}

int Graph::param(Tensor v) {
    Node n;
    n.op = Op::param;
    n.value = std::move(v);
    n.wants_grad = true;
    return push(std::move(n));
}

int Graph::conv2d_same_zero(int x, int w) {
    const Tensor& xv = node(x).value;
    const Tensor& wv = node(w).value;
    require3d(xv, "conv2d_same_zero");
    if (wv.ndim() != 4) fail("conv2d_same_zero", "kernel must be [Cout,Cin,kh,kw]");
    const std::size_t cin = xv.dim(0), h = xv.dim(1), wd = xv.dim(2);
    const std::size_t cout = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
    if (wv.dim(1) != cin)
        fail("conv2d_same_zero", "kernel expects " + std::to_string(wv.dim(1)) +
                                     " input channels, got " + std::to_string(cin));
    if (kh % 2 == 0 || kw % 2 == 0) fail("conv2d_same_zero", "kernel dims must be odd");
    if (kh > h || kw > wd) fail("conv2d_same_zero", "kernel exceeds input");

    Node n;
    n.op = Op::conv2d_same_zero;
    n.in = {x, w, -1};
    n.wants_grad = node(x).wants_grad || node(w).wants_grad;
    n.value = Tensor({cout, h, wd});
    const std::size_t ph = kh / 2, pw = kw / 2;
    double* out = n.value.data();
    const double* in = xv.data();
    const double* ker = wv.data();
    if (kh == 3 && kw == 3) {
        conv3x3_accumulate(in, cin, h, wd, ker, cout, out);
        return push(std::move(n));
    }
    for (std::size_t o = 0; o < cout; ++o) {
        double* oplane = out + o * h * wd;
        for (std::size_t ic = 0; ic < cin; ++ic) {
            const double* iplane = in + ic * h * wd;
            const double* kplane = ker + (o * cin + ic) * kh * kw;
            for (std::size_t u = 0; u < kh; ++u) {
                const std::size_t y0 = ph > u ? ph - u : 0;
                const std::size_t y1 = std::min(h, h + ph - u);
                for (std::size_t v = 0; v < kw; ++v) {
                    const double wk = kplane[u * kw + v];
                    if (wk == 0.0) continue;
                    const std::size_t x0 = pw > v ? pw - v : 0;
                    const std::size_t x1 = std::min(wd, wd + pw - v);
                    for (std::size_t y = y0; y < y1; ++y) {
                        double* orow = oplane + y * wd;
                        const double* irow = iplane + (y + u - ph) * wd + (x0 + v - pw);
                        for (std::size_t xx = x0; xx < x1; ++xx) orow[xx] += wk * irow[xx - x0];
                    }
                }
            }
        }
    }
    return push(std::move(n));
}

int Graph::conv2d_circular(int x, int k) {
    const Tensor& xv = node(x).value;
    const Tensor& kv = node(k).value;
    require3d(xv, "conv2d_circular");
    require3d(kv, "conv2d_circular");
    if (xv.dim(0) != 2) fail("conv2d_circular", "input must hold one complex pair [2,H,W]");
    if (kv.dim(0) % 2 != 0) fail("conv2d_circular", "kernel channel count must be even (re,im pairs)");
    const std::size_t h = xv.dim(1), w = xv.dim(2);
    const std::size_t dh = kv.dim(1), dw = kv.dim(2);
    if (dh > h || dw > w) fail("conv2d_circular", "kernel exceeds signal");
    const std::size_t pairs = kv.dim(0) / 2;

    Node n;
    n.op = Op::conv2d_circular;
    n.in = {x, k, -1};
    n.wants_grad = node(x).wants_grad || node(k).wants_grad;
    n.value = Tensor({2 * pairs, h, w});

    const std::size_t he = h + dh - 1, we = w + dw - 1;
    std::vector<double> xer(he * we), xei(he * we);
    extend_wrap(xv.data(), h, w, he, we, xer.data());
    extend_wrap(xv.data() + h * w, h, w, he, we, xei.data());

    for (std::size_t b = 0; b < pairs; ++b) {
        double* outr = n.value.data() + (2 * b) * h * w;
        double* outi = n.value.data() + (2 * b + 1) * h * w;
        const double* kr = kv.data() + (2 * b) * dh * dw;
        const double* ki = kv.data() + (2 * b + 1) * dh * dw;
        for (std::size_t j1 = 0; j1 < dh; ++j1) {
            for (std::size_t j2 = 0; j2 < dw; ++j2) {
                // hbar[j] = h[(d-j) mod d] per axis
                const std::size_t s1 = (dh - j1) % dh, s2 = (dw - j2) % dw;
                const double cr = kr[s1 * dw + s2];
                const double ci = ki[s1 * dw + s2];
                for (std::size_t i1 = 0; i1 < h; ++i1) {
                    const double* er = xer.data() + (i1 + j1) * we + j2;
                    const double* ei = xei.data() + (i1 + j1) * we + j2;
                    double* orow = outr + i1 * w;
                    double* irow = outi + i1 * w;
                    for (std::size_t i2 = 0; i2 < w; ++i2) {
                        orow[i2] += cr * er[i2] - ci * ei[i2];
                        irow[i2] += ci * er[i2] + cr * ei[i2];
                    }
                }
            }
        }
    }
    return push(std::move(n));
}

int Graph::upsample2x_bilinear(int x) {
    const Tensor& xv = node(x).value;
    require3d(xv, "upsample2x_bilinear");
    const std::size_t c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
    Node n;
    n.op = Op::upsample2x_bilinear;
    n.in = {x, -1, -1};
    n.wants_grad = node(x).wants_grad;
    n.value = Tensor({c, 2 * h, 2 * w});
    // half-pixel source centers: src = (dst + 0.5)/2 - 0.5, clamped
    auto taps = [](std::size_t dst, std::size_t n_src, std::size_t& lo, double& whi) {
        const double s = 0.5 * (static_cast<double>(dst) + 0.5) - 0.5;
        if (s <= 0.0) {
            lo = 0;
            whi = 0.0;
            return;
        }
        const double fl = std::floor(s);
        lo = static_cast<std::size_t>(fl);
        if (lo >= n_src - 1) {
            lo = n_src - 1;
            whi = 0.0;
            return;
        }
        whi = s - fl;
    };
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double* ip = xv.data() + ch * h * w;
        double* op = n.value.data() + ch * 4 * h * w;
        for (std::size_t i = 0; i < 2 * h; ++i) {
            std::size_t y0;
            double wy;
            taps(i, h, y0, wy);
            const std::size_t y1 = std::min(y0 + 1, h - 1);
            for (std::size_t j = 0; j < 2 * w; ++j) {
                std::size_t x0;
                double wx;
                taps(j, w, x0, wx);
                const std::size_t x1 = std::min(x0 + 1, w - 1);
                op[i * 2 * w + j] = (1.0 - wy) * ((1.0 - wx) * ip[y0 * w + x0] + wx * ip[y0 * w + x1]) +
                                    wy * ((1.0 - wx) * ip[y1 * w + x0] + wx * ip[y1 * w + x1]);
            }
        }
    }
    return push(std::move(n));
}

int Graph::crop_center(int x, std::size_t h, std::size_t w) {
    const Tensor& xv = node(x).value;
    require3d(xv, "crop_center");
    const std::size_t c = xv.dim(0), ih = xv.dim(1), iw = xv.dim(2);
    if (h > ih || w > iw) fail("crop_center", "crop exceeds input size");
    Node n;
    n.op = Op::crop_center;
    n.in = {x, -1, -1};
    n.wants_grad = node(x).wants_grad;
    n.off1 = (ih - h) / 2;
    n.off2 = (iw - w) / 2;
    n.value = Tensor({c, h, w});
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j)
                n.value[(ch * h + i) * w + j] = xv[(ch * ih + i + n.off1) * iw + j + n.off2];
    return push(std::move(n));
}

int Graph::relu(int x) {
    const Tensor& xv = node(x).value;
    Node n;
    n.op = Op::relu;
    n.in = {x, -1, -1};
    n.wants_grad = node(x).wants_grad;
    n.value = xv;
    for (std::size_t i = 0; i < n.value.size(); ++i)
        if (n.value[i] < 0.0) n.value[i] = 0.0;
    return push(std::move(n));
}

int Graph::channel_norm(int x, int gain, int bias) {
    const Tensor& xv = node(x).value;
    const Tensor& gv = node(gain).value;
    const Tensor& bv = node(bias).value;
    require3d(xv, "channel_norm");
    const std::size_t c = xv.dim(0), hw = xv.dim(1) * xv.dim(2);
    if (gv.ndim() != 1 || gv.dim(0) != c || bv.ndim() != 1 || bv.dim(0) != c)
        fail("channel_norm", "gain/bias must be [C] with C=" + std::to_string(c));
    Node n;
    n.op = Op::channel_norm;
    n.in = {x, gain, bias};
    n.wants_grad = node(x).wants_grad || node(gain).wants_grad || node(bias).wants_grad;
    n.value = Tensor(xv.shape());
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double* ip = xv.data() + ch * hw;
        double* op = n.value.data() + ch * hw;
        double mu = 0.0;
        for (std::size_t i = 0; i < hw; ++i) mu += ip[i];
        mu /= static_cast<double>(hw);
        double var = 0.0;
        for (std::size_t i = 0; i < hw; ++i) var += (ip[i] - mu) * (ip[i] - mu);
        var /= static_cast<double>(hw);
        const double inv = 1.0 / std::sqrt(var + kNormEps);
        const double g = gv[ch], b = bv[ch];
        for (std::size_t i = 0; i < hw; ++i) op[i] = (ip[i] - mu) * inv * g + b;
    }
    return push(std::move(n));
}

int Graph::add(int x, int y) {
    const Tensor& xv = node(x).value;
    const Tensor& yv = node(y).value;
    if (!xv.same_shape(yv)) fail("add", "shape mismatch");
    Node n;
    n.op = Op::add;
    n.in = {x, y, -1};
    n.wants_grad = node(x).wants_grad || node(y).wants_grad;
    n.value = xv;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] += yv[i];
    return push(std::move(n));
}

int Graph::scale(int x, double a) {
    Node n;
    n.op = Op::scale;
    n.in = {x, -1, -1};
    n.wants_grad = node(x).wants_grad;
    n.alpha = a;
    n.value = node(x).value;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] *= a;
    return push(std::move(n));
}

int Graph::complex_mul(int x, int y) {
    const Tensor& xv = node(x).value;
    const Tensor& yv = node(y).value;
    if (!xv.same_shape(yv)) fail("complex_mul", "shape mismatch");
    if (xv.ndim() < 1 || xv.dim(0) % 2 != 0)
        fail("complex_mul", "leading channel dim must be even (re,im pairs)");
    const std::size_t pairs = xv.dim(0) / 2;
    const std::size_t plane = xv.size() / xv.dim(0);
    Node n;
    n.op = Op::complex_mul;
    n.in = {x, y, -1};
    n.wants_grad = node(x).wants_grad || node(y).wants_grad;
    n.value = Tensor(xv.shape());
    for (std::size_t p = 0; p < pairs; ++p) {
        const double* ar = xv.data() + (2 * p) * plane;
        const double* ai = xv.data() + (2 * p + 1) * plane;
        const double* br = yv.data() + (2 * p) * plane;
        const double* bi = yv.data() + (2 * p + 1) * plane;
        double* or_ = n.value.data() + (2 * p) * plane;
        double* oi = n.value.data() + (2 * p + 1) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            or_[i] = ar[i] * br[i] - ai[i] * bi[i];
            oi[i] = ar[i] * bi[i] + ai[i] * br[i];
        }
    }
    return push(std::move(n));
}

int Graph::complex_conj(int x) {
    const Tensor& xv = node(x).value;
    if (xv.ndim() < 1 || xv.dim(0) % 2 != 0)
        fail("complex_conj", "leading channel dim must be even (re,im pairs)");
    const std::size_t pairs = xv.dim(0) / 2;
    const std::size_t plane = xv.size() / xv.dim(0);
    Node n;
    n.op = Op::complex_conj;
    n.in = {x, -1, -1};
    n.wants_grad = node(x).wants_grad;
    n.value = xv;
    for (std::size_t p = 0; p < pairs; ++p) {
        double* im = n.value.data() + (2 * p + 1) * plane;
        for (std::size_t i = 0; i < plane; ++i) im[i] = -im[i];
    }
    return push(std::move(n));
}

int Graph::reflect_spatial(int x) {
    const Tensor& xv = node(x).value;
    require3d(xv, "reflect_spatial");
    const std::size_t c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
    Node n;
    n.op = Op::reflect_spatial;
    n.in = {x, -1, -1};
    n.wants_grad = node(x).wants_grad;
    n.value = Tensor({c, h, w});
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < h; ++i) {
            const std::size_t ri = (h - i) % h;
            for (std::size_t j = 0; j < w; ++j)
                n.value[(ch * h + i) * w + j] = xv[(ch * h + ri) * w + (w - j) % w];
        }
    return push(std::move(n));
}

int Graph::sum_sq(int x) {
    const Tensor& xv = node(x).value;
    Node n;
    n.op = Op::sum_sq;
    n.in = {x, -1, -1};
    n.wants_grad = node(x).wants_grad;
    double acc = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i] * xv[i];
    n.value = Tensor({1}, {acc});
    return push(std::move(n));
}

int Graph::masked_residual(int x, int mask, int target) {
    const Tensor& xv = node(x).value;
    const Tensor& mv = node(mask).value;
    const Tensor& tv = node(target).value;
    require3d(xv, "masked_residual");
    if (!xv.same_shape(tv)) fail("masked_residual", "target shape mismatch");
    if (mv.ndim() != 2 || mv.dim(0) != xv.dim(1) || mv.dim(1) != xv.dim(2))
        fail("masked_residual", "mask must be [H,W] matching the spatial dims");
    if (node(mask).wants_grad || node(target).wants_grad)
        fail("masked_residual", "mask and target must be constants");
    const std::size_t c = xv.dim(0), hw = mv.size();
    Node n;
    n.op = Op::masked_residual;
    n.in = {x, mask, target};
    n.wants_grad = node(x).wants_grad;
    n.value = Tensor(xv.shape());
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double* ip = xv.data() + ch * hw;
        const double* tp = tv.data() + ch * hw;
        double* op = n.value.data() + ch * hw;
        for (std::size_t i = 0; i < hw; ++i) op[i] = (ip[i] - tp[i]) * mv[i];
    }
    return push(std::move(n));
}

void Graph::backward(int root) {
    const Tensor& rv = node(root).value;
    if (rv.size() != 1)
        fail("backward", "root must be scalar without an explicit seed");
    backward(root, Tensor({1}, {1.0}));
}

void Graph::backward(int root, const Tensor& seed) {
    Node& r = node(root);
    if (!r.value.same_shape(seed)) fail("backward", "seed shape must match root shape");
    for (Node& n : nodes_) {
        n.grad_live = false;
        n.grad = Tensor();
    }
    grad_buf(root);
    Tensor& g = node(root).grad;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = seed[i];
    for (int id = root; id >= 0; --id) {
        const Node& n = node(id);
        if (!n.wants_grad || !n.grad_live) continue;
        backward_node(id);
    }
}

Tensor Graph::grad(int id) const {
    const Node& n = node(id);
    if (!n.grad_live) return Tensor(n.value.shape());
    return n.grad;
}

void Graph::backward_node(int id) {
    Node& n = node(id);
    const Tensor& g = n.grad;
    switch (n.op) {
        case Op::constant:
        case Op::param:
            return;
        case Op::conv2d_same_zero: {
            const Node& xn = node(n.in[0]);
            const Node& wn = node(n.in[1]);
            const Tensor& xv = xn.value;
            const Tensor& wv = wn.value;
            const std::size_t cin = xv.dim(0), h = xv.dim(1), wd = xv.dim(2);
            const std::size_t cout = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
            const std::size_t ph = kh / 2, pw = kw / 2;
            if (xn.wants_grad) {
                Tensor& gx = grad_buf(n.in[0]);
                if (kh == 3 && kw == 3) {
                    // same contraction with transposed channels and flipped taps
                    std::vector<double> wt(cout * cin * 9);
                    for (std::size_t o = 0; o < cout; ++o)
                        for (std::size_t ic = 0; ic < cin; ++ic)
                            for (std::size_t t = 0; t < 9; ++t)
                                wt[(ic * cout + o) * 9 + (8 - t)] = wv[(o * cin + ic) * 9 + t];
                    conv3x3_accumulate(g.data(), cout, h, wd, wt.data(), cin, gx.data());
                } else {
                    for (std::size_t ic = 0; ic < cin; ++ic) {
                        double* gplane = gx.data() + ic * h * wd;
                        for (std::size_t o = 0; o < cout; ++o) {
                            const double* dplane = g.data() + o * h * wd;
                            const double* kplane = wv.data() + (o * cin + ic) * kh * kw;
                            for (std::size_t u = 0; u < kh; ++u) {
                                const std::size_t y0 = ph > u ? ph - u : 0;
                                const std::size_t y1 = std::min(h, h + ph - u);
                                for (std::size_t v = 0; v < kw; ++v) {
                                    const double wk = kplane[u * kw + v];
                                    if (wk == 0.0) continue;
                                    const std::size_t x0 = pw > v ? pw - v : 0;
                                    const std::size_t x1 = std::min(wd, wd + pw - v);
                                    for (std::size_t y = y0; y < y1; ++y) {
                                        const double* drow = dplane + y * wd;
                                        double* grow = gplane + (y + u - ph) * wd + (x0 + v - pw);
                                        for (std::size_t xx = x0; xx < x1; ++xx) grow[xx - x0] += wk * drow[xx];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            if (wn.wants_grad) {
                Tensor& gw = grad_buf(n.in[1]);
                if (kh == 3 && kw == 3) {
                    conv3x3_weight_grad(xv.data(), cin, h, wd, g.data(), cout, gw.data());
                    return;
                }
                for (std::size_t o = 0; o < cout; ++o) {
                    const double* dplane = g.data() + o * h * wd;
                    for (std::size_t ic = 0; ic < cin; ++ic) {
                        const double* iplane = xv.data() + ic * h * wd;
                        double* kplane = gw.data() + (o * cin + ic) * kh * kw;
                        for (std::size_t u = 0; u < kh; ++u) {
                            const std::size_t y0 = ph > u ? ph - u : 0;
                            const std::size_t y1 = std::min(h, h + ph - u);
                            for (std::size_t v = 0; v < kw; ++v) {
                                const std::size_t x0 = pw > v ? pw - v : 0;
                                const std::size_t x1 = std::min(wd, wd + pw - v);
                                double acc = 0.0;
                                for (std::size_t y = y0; y < y1; ++y) {
                                    const double* drow = dplane + y * wd;
                                    const double* irow = iplane + (y + u - ph) * wd + (x0 + v - pw);
                                    for (std::size_t xx = x0; xx < x1; ++xx) acc += drow[xx] * irow[xx - x0];
                                }
                                kplane[u * kw + v] += acc;
                            }
                        }
                    }
                }
            }
            return;
        }
        case Op::conv2d_circular: {
            const Node& xn = node(n.in[0]);
            const Node& kn = node(n.in[1]);
            const Tensor& xv = xn.value;
            const Tensor& kv = kn.value;
            const std::size_t h = xv.dim(1), w = xv.dim(2);
            const std::size_t dh = kv.dim(1), dw = kv.dim(2);
            const std::size_t pairs = kv.dim(0) / 2;
            const std::size_t he = h + dh - 1, we = w + dw - 1;
            std::vector<double> xer, xei;
            if (kn.wants_grad) {
                xer.resize(he * we);
                xei.resize(he * we);
                extend_wrap(xv.data(), h, w, he, we, xer.data());
                extend_wrap(xv.data() + h * w, h, w, he, we, xei.data());
            }
            std::vector<double> dxr, dxi;
            if (xn.wants_grad) {
                dxr.assign(he * we, 0.0);
                dxi.assign(he * we, 0.0);
            }
            Tensor* gk = kn.wants_grad ? &grad_buf(n.in[1]) : nullptr;
            for (std::size_t b = 0; b < pairs; ++b) {
                const double* gr = g.data() + (2 * b) * h * w;
                const double* gi = g.data() + (2 * b + 1) * h * w;
                const double* kr = kv.data() + (2 * b) * dh * dw;
                const double* ki = kv.data() + (2 * b + 1) * dh * dw;
                for (std::size_t j1 = 0; j1 < dh; ++j1) {
                    for (std::size_t j2 = 0; j2 < dw; ++j2) {
                        const std::size_t s1 = (dh - j1) % dh, s2 = (dw - j2) % dw;
                        if (xn.wants_grad) {
                            const double cr = kr[s1 * dw + s2];
                            const double ci = ki[s1 * dw + s2];
                            for (std::size_t i1 = 0; i1 < h; ++i1) {
                                double* er = dxr.data() + (i1 + j1) * we + j2;
                                double* ei = dxi.data() + (i1 + j1) * we + j2;
                                const double* grr = gr + i1 * w;
                                const double* gir = gi + i1 * w;
                                for (std::size_t i2 = 0; i2 < w; ++i2) {
                                    er[i2] += cr * grr[i2] + ci * gir[i2];
                                    ei[i2] += -ci * grr[i2] + cr * gir[i2];
                                }
                            }
                        }
                        if (gk) {
                            double accr = 0.0, acci = 0.0;
                            for (std::size_t i1 = 0; i1 < h; ++i1) {
                                const double* er = xer.data() + (i1 + j1) * we + j2;
                                const double* ei = xei.data() + (i1 + j1) * we + j2;
                                const double* grr = gr + i1 * w;
                                const double* gir = gi + i1 * w;
                                for (std::size_t i2 = 0; i2 < w; ++i2) {
                                    accr += grr[i2] * er[i2] + gir[i2] * ei[i2];
                                    acci += -grr[i2] * ei[i2] + gir[i2] * er[i2];
                                }
                            }
                            gk->data()[(2 * b) * dh * dw + s1 * dw + s2] += accr;
                            gk->data()[(2 * b + 1) * dh * dw + s1 * dw + s2] += acci;
                        }
                    }
                }
            }
            if (xn.wants_grad) {
                Tensor& gx = grad_buf(n.in[0]);
                fold_wrap(dxr.data(), he, we, h, w, gx.data());
                fold_wrap(dxi.data(), he, we, h, w, gx.data() + h * w);
            }
            return;
        }
        case Op::upsample2x_bilinear: {
            const Node& xn = node(n.in[0]);
            if (!xn.wants_grad) return;
            const Tensor& xv = xn.value;
            const std::size_t c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
            Tensor& gx = grad_buf(n.in[0]);
            auto taps = [](std::size_t dst, std::size_t n_src, std::size_t& lo, double& whi) {
                const double s = 0.5 * (static_cast<double>(dst) + 0.5) - 0.5;
                if (s <= 0.0) {
                    lo = 0;
                    whi = 0.0;
                    return;
                }
                const double fl = std::floor(s);
                lo = static_cast<std::size_t>(fl);
                if (lo >= n_src - 1) {
                    lo = n_src - 1;
                    whi = 0.0;
                    return;
                }
                whi = s - fl;
            };
            for (std::size_t ch = 0; ch < c; ++ch) {
                double* gp = gx.data() + ch * h * w;
                const double* dp = g.data() + ch * 4 * h * w;
                for (std::size_t i = 0; i < 2 * h; ++i) {
                    std::size_t y0;
                    double wy;
                    taps(i, h, y0, wy);
                    const std::size_t y1 = std::min(y0 + 1, h - 1);
                    for (std::size_t j = 0; j < 2 * w; ++j) {
                        std::size_t x0;
                        double wx;
                        taps(j, w, x0, wx);
                        const std::size_t x1 = std::min(x0 + 1, w - 1);
                        const double d = dp[i * 2 * w + j];
                        gp[y0 * w + x0] += (1.0 - wy) * (1.0 - wx) * d;
                        gp[y0 * w + x1] += (1.0 - wy) * wx * d;
                        gp[y1 * w + x0] += wy * (1.0 - wx) * d;
                        gp[y1 * w + x1] += wy * wx * d;
                    }
                }
            }
            return;
        }
        case Op::crop_center: {
            const Node& xn = node(n.in[0]);
            if (!xn.wants_grad) return;
            const Tensor& xv = xn.value;
            const std::size_t c = xv.dim(0), ih = xv.dim(1), iw = xv.dim(2);
            const std::size_t h = n.value.dim(1), w = n.value.dim(2);
            Tensor& gx = grad_buf(n.in[0]);
            for (std::size_t ch = 0; ch < c; ++ch)
                for (std::size_t i = 0; i < h; ++i)
                    for (std::size_t j = 0; j < w; ++j)
                        gx[(ch * ih + i + n.off1) * iw + j + n.off2] += g[(ch * h + i) * w + j];
            return;
        }
        case Op::relu: {
            const Node& xn = node(n.in[0]);
            if (!xn.wants_grad) return;
            Tensor& gx = grad_buf(n.in[0]);
            const Tensor& xv = xn.value;
            for (std::size_t i = 0; i < gx.size(); ++i)
                if (xv[i] > 0.0) gx[i] += g[i];
            return;
        }
        case Op::channel_norm: {
            const Node& xn = node(n.in[0]);
            const Node& gn = node(n.in[1]);
            const Node& bn = node(n.in[2]);
            const Tensor& xv = xn.value;
            const Tensor& gv = gn.value;
            const std::size_t c = xv.dim(0), hw = xv.dim(1) * xv.dim(2);
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double* ip = xv.data() + ch * hw;
                const double* dp = g.data() + ch * hw;
                double mu = 0.0;
                for (std::size_t i = 0; i < hw; ++i) mu += ip[i];
                mu /= static_cast<double>(hw);
                double var = 0.0;
                for (std::size_t i = 0; i < hw; ++i) var += (ip[i] - mu) * (ip[i] - mu);
                var /= static_cast<double>(hw);
                const double inv = 1.0 / std::sqrt(var + kNormEps);
                if (bn.wants_grad) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < hw; ++i) acc += dp[i];
                    grad_buf(n.in[2])[ch] += acc;
                }
                if (gn.wants_grad) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < hw; ++i) acc += dp[i] * (ip[i] - mu) * inv;
                    grad_buf(n.in[1])[ch] += acc;
                }
                if (xn.wants_grad) {
                    // d/dx of g*(x-mu)/sqrt(var+eps): project out mean and
                    // the normalized-direction component
                    const double gch = gv[ch];
                    double dsum = 0.0, dxsum = 0.0;
                    for (std::size_t i = 0; i < hw; ++i) {
                        dsum += dp[i];
                        dxsum += dp[i] * (ip[i] - mu) * inv;
                    }
                    const double dmean = dsum / static_cast<double>(hw);
                    const double dxmean = dxsum / static_cast<double>(hw);
                    double* gx = grad_buf(n.in[0]).data() + ch * hw;
                    for (std::size_t i = 0; i < hw; ++i) {
                        const double xhat = (ip[i] - mu) * inv;
                        gx[i] += gch * inv * (dp[i] - dmean - xhat * dxmean);
                    }
                }
            }
            return;
        }
        case Op::add: {
            for (int slot = 0; slot < 2; ++slot) {
                if (!node(n.in[slot]).wants_grad) continue;
                Tensor& gx = grad_buf(n.in[slot]);
                for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
            }
            return;
        }
        case Op::scale: {
            if (!node(n.in[0]).wants_grad) return;
            Tensor& gx = grad_buf(n.in[0]);
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += n.alpha * g[i];
            return;
        }
        case Op::complex_mul: {
            const Node& xn = node(n.in[0]);
            const Node& yn = node(n.in[1]);
            const Tensor& xv = xn.value;
            const Tensor& yv = yn.value;
            const std::size_t pairs = xv.dim(0) / 2;
            const std::size_t plane = xv.size() / xv.dim(0);
            for (std::size_t p = 0; p < pairs; ++p) {
                const double* ar = xv.data() + (2 * p) * plane;
                const double* ai = xv.data() + (2 * p + 1) * plane;
                const double* br = yv.data() + (2 * p) * plane;
                const double* bi = yv.data() + (2 * p + 1) * plane;
                const double* dr = g.data() + (2 * p) * plane;
                const double* di = g.data() + (2 * p + 1) * plane;
                if (xn.wants_grad) {
                    double* gr = grad_buf(n.in[0]).data() + (2 * p) * plane;
                    double* gi = grad_buf(n.in[0]).data() + (2 * p + 1) * plane;
                    for (std::size_t i = 0; i < plane; ++i) {
                        gr[i] += dr[i] * br[i] + di[i] * bi[i];
                        gi[i] += -dr[i] * bi[i] + di[i] * br[i];
                    }
                }
                if (yn.wants_grad) {
                    double* gr = grad_buf(n.in[1]).data() + (2 * p) * plane;
                    double* gi = grad_buf(n.in[1]).data() + (2 * p + 1) * plane;
                    for (std::size_t i = 0; i < plane; ++i) {
                        gr[i] += dr[i] * ar[i] + di[i] * ai[i];
                        gi[i] += -dr[i] * ai[i] + di[i] * ar[i];
                    }
                }
            }
            return;
        }
        case Op::complex_conj: {
            if (!node(n.in[0]).wants_grad) return;
            const std::size_t pairs = n.value.dim(0) / 2;
            const std::size_t plane = n.value.size() / n.value.dim(0);
            Tensor& gx = grad_buf(n.in[0]);
            for (std::size_t p = 0; p < pairs; ++p) {
                double* gr = gx.data() + (2 * p) * plane;
                double* gi = gx.data() + (2 * p + 1) * plane;
                const double* dr = g.data() + (2 * p) * plane;
                const double* di = g.data() + (2 * p + 1) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    gr[i] += dr[i];
                    gi[i] -= di[i];
                }
            }
            return;
        }
        case Op::reflect_spatial: {
            if (!node(n.in[0]).wants_grad) return;
            const std::size_t c = n.value.dim(0), h = n.value.dim(1), w = n.value.dim(2);
            Tensor& gx = grad_buf(n.in[0]);
            for (std::size_t ch = 0; ch < c; ++ch)
                for (std::size_t i = 0; i < h; ++i) {
                    const std::size_t ri = (h - i) % h;
                    for (std::size_t j = 0; j < w; ++j)
                        gx[(ch * h + ri) * w + (w - j) % w] += g[(ch * h + i) * w + j];
                }
            return;
        }
        case Op::sum_sq: {
            if (!node(n.in[0]).wants_grad) return;
            const Tensor& xv = node(n.in[0]).value;
            Tensor& gx = grad_buf(n.in[0]);
            const double d = 2.0 * g[0];
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += d * xv[i];
            return;
        }
        case Op::masked_residual: {
            if (!node(n.in[0]).wants_grad) return;
            const Tensor& mv = node(n.in[1]).value;
            const std::size_t c = n.value.dim(0), hw = mv.size();
            Tensor& gx = grad_buf(n.in[0]);
            for (std::size_t ch = 0; ch < c; ++ch) {
                double* gp = gx.data() + ch * hw;
                const double* dp = g.data() + ch * hw;
                for (std::size_t i = 0; i < hw; ++i) gp[i] += dp[i] * mv[i];
            }
            return;
        }
    }
}

} // namespace kunn
