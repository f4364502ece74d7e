#pragma once

#include "kunn/ctensor.hpp"
#include "kunn/generator.hpp"
#include "kunn/scene.hpp"
#include "kunn/tensor.hpp"

namespace kunn {

struct Reconstruction {
    CTensor kspace; // [Nc, N, N]
    Tensor image;   // [N, N] SSoS magnitude
};

/// Final k-space is the first generator branch; with dc the sampled entries
/// are overwritten by the measurements.  The image is the SSoS of the
/// per-coil inverse transforms.
Reconstruction reconstruct(const TrainedGenerator& t, const AcquisitionScene& scene,
                           bool dc = true);

/// SSoS image of the measurements with zeros off the sampled set.
Tensor zero_filled(const AcquisitionScene& scene);

/// SSoS image of the fully sampled ground-truth k-space.
Tensor reference_image(const AcquisitionScene& scene);

/// Conjugate-symmetry completion: every unsampled location whose mirror
/// -k is sampled is filled with conj(y[-k]); the rest stay zero.  The
/// classical partial-Fourier baseline, exact only for real images.
Reconstruction conj_symmetric_fill(const AcquisitionScene& scene);

} // namespace kunn
