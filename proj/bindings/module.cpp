#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>

#include "kunn/config.hpp"
#include "kunn/fft.hpp"
#include "kunn/generator.hpp"
#include "kunn/kspace.hpp"
#include "kunn/kten.hpp"
#include "kunn/linalg.hpp"
#include "kunn/metrics.hpp"
#include "kunn/recon.hpp"
#include "kunn/scene.hpp"
#include "kunn/theory.hpp"

namespace py = pybind11;
using namespace kunn;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using CplxArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

Tensor tensor_from(const RealArray& a) {
    std::vector<std::size_t> shape(a.ndim());
    for (py::ssize_t i = 0; i < a.ndim(); ++i)
        shape[static_cast<std::size_t>(i)] = static_cast<std::size_t>(a.shape(i));
    Tensor t(std::move(shape));
    std::copy(a.data(), a.data() + a.size(), t.data());
    return t;
}

CTensor ctensor_from(const CplxArray& a) {
    std::vector<std::size_t> shape(a.ndim());
    for (py::ssize_t i = 0; i < a.ndim(); ++i)
        shape[static_cast<std::size_t>(i)] = static_cast<std::size_t>(a.shape(i));
    CTensor t(std::move(shape));
    std::copy(a.data(), a.data() + a.size(), t.data());
    return t;
}

py::array to_py(const Tensor& t) {
    const std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    py::array_t<double> a(shape);
    std::copy(t.data(), t.data() + t.size(), a.mutable_data());
    return a;
}

py::array to_py(const CTensor& t) {
    const std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    py::array_t<std::complex<double>> a(shape);
    std::copy(t.data(), t.data() + t.size(), a.mutable_data());
    return a;
}

CMat cmat_from(const CplxArray& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d complex matrix");
    CMat m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.a.data());
    return m;
}

ExperimentConfig cfg_from(const py::dict& d) {
    std::map<std::string, std::string> kv;
    for (const auto& item : d) {
        if (!py::isinstance<py::str>(item.first) || !py::isinstance<py::str>(item.second))
            throw std::invalid_argument("config entries must be str -> str");
        kv[py::cast<std::string>(item.first)] = py::cast<std::string>(item.second);
    }
    return config_from_keyvals(kv);
}

py::dict py_simulate(const py::dict& cfg_dict) {
    const ExperimentConfig c = cfg_from(cfg_dict);
    const AcquisitionScene s = config_scene(c);
    py::dict out;
    out["z_true"] = to_py(s.z_true);
    out["csm"] = to_py(s.csm);
    out["phase"] = to_py(s.phase);
    out["e2phi"] = to_py(s.e2phi);
    out["kspace_full"] = to_py(s.kspace_full);
    out["mask"] = to_py(s.mask.to_entry_map());
    out["y"] = to_py(s.y);
    out["reference"] = to_py(reference_image(s));
    return out;
}

py::dict py_fit(const CplxArray& y_in, const RealArray& mask_in, const py::dict& cfg_dict) {
    const CTensor y = ctensor_from(y_in);
    Tensor entry = tensor_from(mask_in);
    if (y.ndim() != 3) throw std::invalid_argument("fit: y must be [coils, N, N]");
    if (entry.ndim() != 2 || entry.dim(0) != y.dim(1) || entry.dim(1) != y.dim(2))
        throw std::invalid_argument("fit: mask must be [N, N] matching y");
    for (std::size_t i = 0; i < entry.size(); ++i)
        if (entry[i] != 0.0 && entry[i] != 1.0)
            throw std::invalid_argument("fit: mask entries must be 0 or 1");
    const std::size_t nc = y.dim(0), n = y.dim(1);

    const ExperimentConfig c = cfg_from(cfg_dict);
    // Fitting needs only the measurements and the sampling set, so the
    // ground-truth fields stay at neutral placeholders.
    AcquisitionScene scene;
    scene.z_true = CTensor({n, n});
    scene.csm = CTensor({nc, n, n}, cplx{1.0, 0.0});
    scene.phase = Tensor({n, n});
    scene.e2phi = CTensor({n, n}, cplx{1.0, 0.0});
    scene.kspace_full = CTensor({nc, n, n});
    SamplingMask m;
    m.kind = SamplingMask::Kind::entrywise;
    m.n = n;
    m.entry = std::move(entry);
    scene.mask = std::move(m);
    scene.y = scene.mask.apply(y);

    TripledGenerator gen = make_generator(config_generator(c, n, nc));
    const TrainedGenerator trained = train(std::move(gen), scene, c.iters, c.lr);
    const Reconstruction rec = reconstruct(trained, scene, c.dc);
    py::dict out;
    out["kspace"] = to_py(rec.kspace);
    out["image"] = to_py(rec.image);
    out["loss_history"] = to_py(Tensor({trained.loss_history.size()}, trained.loss_history));
    return out;
}

py::dict py_verify(const py::dict& cfg_dict) {
    const ExperimentConfig c = cfg_from(cfg_dict);
    const AcquisitionScene scene = config_scene(c);
    TripledGenerator gen = make_generator(config_generator(c, c.n, c.coils));
    const TrainedGenerator trained = train(std::move(gen), scene, c.iters, c.lr);
    const TheoryReport rep = theorem_bound_verify(trained, scene, c.trials, c.window, c.seed,
                                                  c.restarts, c.sweeps);
    py::dict out;
    out["r_observed"] = rep.r_observed;
    out["mu_u"] = rep.mu_u;
    out["mu_v"] = rep.mu_v;
    out["mu0"] = rep.mu0;
    out["c1"] = rep.c1;
    out["n_required"] = rep.n_required;
    out["n_actual"] = rep.n_actual;
    out["lemma1_min_ratio"] = rep.lemma1_min_ratio;
    out["lemma1_pass_fraction"] = rep.lemma1_pass_fraction;
    out["lemma1_skipped"] = rep.lemma1_skipped;
    out["theorem_bound_pass_fraction"] = rep.theorem_bound_pass_fraction;
    out["c2_estimate"] = rep.c2_estimate;
    out["trials"] = rep.trials;
    out["vacuous_trials"] = rep.vacuous_trials;
    out["seed"] = rep.seed;
    return out;
}

py::array py_kten_read(const std::string& path) {
    const KtenData k = read_kten(path);
    return k.is_complex ? to_py(k.cplx) : to_py(k.real);
}

void py_kten_write(const std::string& path, const py::array& a) {
    if (a.dtype().kind() == 'c')
        write_kten(path, ctensor_from(CplxArray::ensure(a)));
    else
        write_kten(path, tensor_from(RealArray::ensure(a)));
}

} // namespace

PYBIND11_MODULE(_kunn, mod) {
    mod.doc() = "Training-data-free k-space interpolation core";

    mod.def("fft2", [](const CplxArray& x) { return to_py(fft2(ctensor_from(x))); },
            "orthonormal centered 2-d FFT of an [N, N] image");
    mod.def("ifft2", [](const CplxArray& x) { return to_py(ifft2(ctensor_from(x))); },
            "inverse of fft2");
    mod.def("conj_reflect", [](const CplxArray& x) { return to_py(conj_reflect(ctensor_from(x))); },
            "spectrum of the conjugated image: conj(k) mirrored through the origin");
    mod.def("ssos", [](const CplxArray& coils) { return to_py(ssos(ctensor_from(coils))); },
            "square root of the coilwise sum of squared magnitudes");
    mod.def("nmse", [](const RealArray& x, const RealArray& ref) {
                return nmse(tensor_from(x), tensor_from(ref));
            },
            "||x - ref||^2 / ||ref||^2");
    mod.def("psnr", [](const RealArray& x, const RealArray& ref) {
                return psnr(tensor_from(x), tensor_from(ref));
            },
            "peak signal-to-noise ratio in dB, +inf on identical inputs");
    mod.def("ssim", [](const RealArray& x, const RealArray& ref) {
                return ssim(tensor_from(x), tensor_from(ref));
            },
            "mean SSIM over 7x7 sliding windows");
    mod.def("coherence", [](const CplxArray& u) { return coherence(cmat_from(u)); },
            "subspace coherence of an orthonormal-column basis");
    mod.def("mask_map", [](const py::dict& cfg) {
                return to_py(config_mask(cfg_from(cfg)).to_entry_map());
            },
            "0/1 sampling map for the config's mask settings");
    mod.def("simulate", &py_simulate, "synthetic multicoil acquisition described by the config");
    mod.def("fit", &py_fit,
            "fit the untrained generator to measurements y under the 0/1 mask");
    mod.def("verify", &py_verify, "empirical recovery-theory report for the config");
    mod.def("kten_read", &py_kten_read, "load a KTEN file as a numpy array");
    mod.def("kten_write", &py_kten_write, "store a real or complex array as a KTEN file");
}
