import numpy as np
import pytest

import kunn


def test_fft_round_trip_and_norm_preservation():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    k = kunn.fft2(x)
    assert np.allclose(kunn.ifft2(k), x, atol=1e-12)
    assert np.isclose(np.linalg.norm(k), np.linalg.norm(x))


def test_conj_reflect_matches_fft_of_conjugate():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    assert np.allclose(kunn.fft2(np.conj(x)), kunn.conj_reflect(kunn.fft2(x)), atol=1e-12)


def test_metrics_fixed_points():
    rng = np.random.default_rng(3)
    x = rng.random((16, 16))
    assert kunn.nmse(x, x) == 0.0
    assert kunn.ssim(x, x) == 1.0
    assert np.isinf(kunn.psnr(x, x))
    assert kunn.nmse(2.0 * x, x) == 1.0


def test_coherence_standard_basis():
    u = np.zeros((8, 3), dtype=complex)
    u[:3, :3] = np.eye(3)
    assert kunn.coherence(u) == pytest.approx(8.0 / 3.0)


def test_simulate_fields_and_masked_measurements():
    out = kunn.simulate(n=16, coils=2, mask="random", r=2.0, acs=4,
                        sim_csm_support=5, sim_phase_support=5, seed=7, sigma=0.0)
    assert out["kspace_full"].shape == (2, 16, 16)
    assert out["mask"].shape == (16, 16)
    assert set(np.unique(out["mask"])) <= {0.0, 1.0}
    assert np.array_equal(out["y"], out["kspace_full"] * out["mask"][None, :, :])
    assert out["reference"].shape == (16, 16)


def test_fit_smoke_descends_and_respects_dc():
    sim = kunn.simulate(n=16, coils=2, mask="random", r=2.0, acs=4,
                        sim_csm_support=5, sim_phase_support=5, seed=7, sigma=0.0)
    out = kunn.fit(sim["y"], sim["mask"], iters=5, lr=1e-3, net_seed=3,
                   z_layers=3, z_channels=12, csm_layers=2, csm_channels=8, csm_kernel=5,
                   phase_layers=2, phase_channels=8, phase_kernel=5)
    assert out["kspace"].shape == sim["y"].shape
    assert out["image"].shape == (16, 16)
    assert out["loss_history"].shape == (5,)
    assert out["loss_history"][-1] < out["loss_history"][0]
    on = sim["mask"].astype(bool)
    assert np.array_equal(out["kspace"][:, on], sim["y"][:, on])


def test_kten_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    x = rng.standard_normal((3, 4, 5)) + 1j * rng.standard_normal((3, 4, 5))
    path = str(tmp_path / "x.kten")
    kunn.kten_write(path, x)
    assert np.array_equal(kunn.kten_read(path), x)
    r = rng.standard_normal((6, 2))
    kunn.kten_write(path, r)
    assert np.array_equal(kunn.kten_read(path), r)


def test_config_errors_surface_as_value_errors():
    with pytest.raises(ValueError):
        kunn.simulate(no_such_key=1)
    with pytest.raises(ValueError):
        kunn.mask_map(n=16, mask="spiral")
