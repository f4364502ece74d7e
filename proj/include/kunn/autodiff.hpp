#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "kunn/tensor.hpp"

namespace kunn {

/// Reverse-mode tape over real tensors.  Complex quantities travel as
/// (re, im) pairs along the leading channel axis, so a tensor with leading
/// dim 2k carries k complex channels.
///
/// Node values are computed eagerly as the graph is built; backward() then
/// walks the tape in reverse.  One Graph instance is single-threaded;
/// independent graphs may run concurrently.
class Graph {
public:
    enum class Op {
        constant,
        param,
        conv2d_same_zero,
        conv2d_circular,
        upsample2x_bilinear,
        crop_center,
        relu,
        channel_norm,
        add,
        scale,
        complex_mul,
        complex_conj,
        reflect_spatial,
        sum_sq,
        masked_residual,
    };

    /// Leaves.  Constants never receive gradients; params always do.
    int constant(Tensor v);
    int param(Tensor v);

    /// Zero-padded 'same' cross-correlation: x [Cin,H,W], w [Cout,Cin,kh,kw]
    /// with odd kh, kw -> [Cout,H,W].
    int conv2d_same_zero(int x, int w);

    /// Windowed circular convolution of one complex channel with a stack of
    /// complex kernels: x [2,H,W], k [2b,dh,dw] -> [2b,H,W], matching the
    /// kspace.hpp convention (H(x,d)*hbar).
    int conv2d_circular(int x, int k);

    /// Bilinear 2x upsampling, half-pixel centers, clamped borders:
    /// [C,H,W] -> [C,2H,2W].
    int upsample2x_bilinear(int x);

    /// Center crop to [C,h,w] (offsets floor((H-h)/2), floor((W-w)/2)).
    int crop_center(int x, std::size_t h, std::size_t w);

    int relu(int x);

    /// Per-channel normalization over spatial dims to zero mean and unit
    /// variance (population, eps = 1e-6), then per-channel affine:
    /// x [C,H,W], gain [C], bias [C].
    int channel_norm(int x, int gain, int bias);

    int add(int x, int y);
    int scale(int x, double a);

    /// Pointwise complex product of matching (re, im) channel pairs.
    int complex_mul(int x, int y);

    /// (re, im) -> (re, -im) per pair; no spatial reindexing.
    int complex_conj(int x);

    /// x[c, i, j] -> x[c, (-i) mod H, (-j) mod W]; with complex_conj this
    /// realizes the k-space image of complex conjugation.
    int reflect_spatial(int x);

    /// Scalar sum of squares over all entries -> shape [1].
    int sum_sq(int x);

    /// (x - target) * mask with mask [H,W] broadcast across channels;
    /// mask and target are constants of the residual.
    int masked_residual(int x, int mask, int target);

    const Tensor& value(int id) const { return node(id).value; }

    /// Accumulate d(root)/d(leaf) for every param reachable from root.
    /// root must be scalar unless a seed of the root's shape is supplied.
    void backward(int root);
    void backward(int root, const Tensor& seed);

    /// Gradient of the given node after backward(); zero tensor if the node
    /// was not reached.
    Tensor grad(int id) const;

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Op op;
        std::array<int, 3> in{-1, -1, -1};
        Tensor value;
        Tensor grad;
        bool wants_grad = false;
        bool grad_live = false;
        double alpha = 0.0;          // scale factor
        std::size_t off1 = 0, off2 = 0; // crop offsets
    };

    const Node& node(int id) const;
    Node& node(int id);
    int push(Node n);
    Tensor& grad_buf(int id);

    void backward_node(int id);

    std::vector<Node> nodes_;
};

} // namespace kunn
