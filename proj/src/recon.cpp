#include "kunn/recon.hpp"

#include "kunn/fft.hpp"
#include "kunn/kspace.hpp"

namespace kunn {

Reconstruction reconstruct(const TrainedGenerator& t, const AcquisitionScene& scene, bool dc) {
    const std::size_t n = scene.n(), nc = scene.coils();
    Graph g;
    const ForwardResult fwd = generator_forward(t.gen, g);
    Reconstruction r;
    r.kspace = planes_to_ctensor(g.value(fwd.branch1));
    if (dc)
        for (std::size_t c = 0; c < nc; ++c)
            for (std::size_t k1 = 0; k1 < n; ++k1)
                for (std::size_t k2 = 0; k2 < n; ++k2)
                    if (scene.mask.is_sampled(k1, k2))
                        r.kspace[(c * n + k1) * n + k2] = scene.y[(c * n + k1) * n + k2];
    r.image = ssos(ifft2_stack(r.kspace));
    return r;
}

Tensor zero_filled(const AcquisitionScene& scene) { return ssos(ifft2_stack(scene.y)); }

Tensor reference_image(const AcquisitionScene& scene) {
    return ssos(ifft2_stack(scene.kspace_full));
}

Reconstruction conj_symmetric_fill(const AcquisitionScene& scene) {
    const std::size_t n = scene.n(), nc = scene.coils();
    Reconstruction r;
    r.kspace = scene.y;
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t k1 = 0; k1 < n; ++k1)
            for (std::size_t k2 = 0; k2 < n; ++k2) {
                if (scene.mask.is_sampled(k1, k2)) continue;
                const std::size_t m1 = (n - k1) % n, m2 = (n - k2) % n;
                if (scene.mask.is_sampled(m1, m2))
                    r.kspace[(c * n + k1) * n + k2] =
                        std::conj(scene.y[(c * n + m1) * n + m2]);
            }
    r.image = ssos(ifft2_stack(r.kspace));
    return r;
}

} // namespace kunn
