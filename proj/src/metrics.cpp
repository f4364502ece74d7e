#include "kunn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kunn {

namespace {

void check_pair(const Tensor& x, const Tensor& ref, const char* who) {
    if (!x.same_shape(ref))
        throw std::invalid_argument(std::string(who) + ": shape mismatch " +
                                    Tensor::shape_str(x.shape()) + " vs " +
                                    Tensor::shape_str(ref.shape()));
}

} // namespace

double nmse(const Tensor& x, const Tensor& ref) {
    check_pair(x, ref, "nmse");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - ref[i];
        num += d * d;
        den += ref[i] * ref[i];
    }
    if (den == 0.0)
        throw std::invalid_argument("nmse: reference is all zero");
    return num / den;
}

double psnr(const Tensor& x, const Tensor& ref) {
    check_pair(x, ref, "psnr");
    double peak = ref[0], mse = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        peak = std::max(peak, ref[i]);
        const double d = x[i] - ref[i];
        mse += d * d;
    }
    mse /= static_cast<double>(x.size());
    if (mse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Tensor& x, const Tensor& ref) {
    check_pair(x, ref, "ssim");
    if (x.ndim() != 2)
        throw std::invalid_argument("ssim: expected 2-D images");
    const std::size_t win = 7;
    const std::size_t n1 = x.dim(0), n2 = x.dim(1);
    if (n1 < win || n2 < win)
        throw std::invalid_argument("ssim: image smaller than the 7x7 window");

    double lo = ref[0], hi = ref[0];
    for (std::size_t i = 0; i < ref.size(); ++i) {
        lo = std::min(lo, ref[i]);
        hi = std::max(hi, ref[i]);
    }
    const double range = hi > lo ? hi - lo : 1.0;
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);
    const double inv = 1.0 / static_cast<double>(win * win);

    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t i = 0; i + win <= n1; ++i)
        for (std::size_t j = 0; j + win <= n2; ++j) {
            double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (std::size_t u = 0; u < win; ++u)
                for (std::size_t v = 0; v < win; ++v) {
                    const double a = x.at2(i + u, j + v);
                    const double b = ref.at2(i + u, j + v);
                    sx += a;
                    sy += b;
                    sxx += a * a;
                    syy += b * b;
                    sxy += a * b;
                }
            const double mx = sx * inv, my = sy * inv;
            const double vx = sxx * inv - mx * mx;
            const double vy = syy * inv - my * my;
            const double cov = sxy * inv - mx * my;
            const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
            const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
            total += num / den;
            ++windows;
        }
    return total / static_cast<double>(windows);
}

QualityScores score_images(const Tensor& x, const Tensor& ref) {
    QualityScores q;
    q.nmse = nmse(x, ref);
    q.psnr_db = psnr(x, ref);
    q.ssim = ssim(x, ref);
    return q;
}

std::string scores_csv_row(const std::string& slice_id, const QualityScores& q) {
    char buf[160];
    if (std::isinf(q.psnr_db))
        std::snprintf(buf, sizeof buf, "%s,%.12g,inf,%.12g", slice_id.c_str(), q.nmse, q.ssim);
    else
        std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g", slice_id.c_str(), q.nmse,
                      q.psnr_db, q.ssim);
    return buf;
}

} // namespace kunn
