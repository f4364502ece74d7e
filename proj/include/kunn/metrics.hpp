#pragma once

#include <string>

#include "kunn/tensor.hpp"

namespace kunn {

/// Image-quality scores on real (magnitude) images.  Identical inputs give
/// nmse 0, ssim 1, and the +inf PSNR sentinel (serialized as "inf").
struct QualityScores {
    double nmse = 0.0;
    double psnr_db = 0.0;
    double ssim = 0.0;
};

/// ||x - ref||^2 / ||ref||^2.  ref must not be all zero.
double nmse(const Tensor& x, const Tensor& ref);

/// 10 log10(max(ref)^2 / MSE); +inf when x == ref.
double psnr(const Tensor& x, const Tensor& ref);

/// Mean SSIM over all 7x7 sliding windows, uniform weights, K1 = 0.01,
/// K2 = 0.03, dynamic range max(ref) - min(ref) (1.0 when ref is constant).
/// Images must be at least 7x7.
double ssim(const Tensor& x, const Tensor& ref);

QualityScores score_images(const Tensor& x, const Tensor& ref);

/// CSV row "slice_id,nmse,psnr_db,ssim"; psnr serialized as "inf" when
/// infinite.
std::string scores_csv_row(const std::string& slice_id, const QualityScores& q);

} // namespace kunn
