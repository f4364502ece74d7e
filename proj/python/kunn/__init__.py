"""Training-data-free k-space interpolation on synthetic multicoil scenes."""

try:
    from . import _kunn as _core  # installed layout: kunn/_kunn.so
except ImportError:
    import _kunn as _core  # build-tree layout: _kunn.so on PYTHONPATH

fft2 = _core.fft2
ifft2 = _core.ifft2
conj_reflect = _core.conj_reflect
ssos = _core.ssos
nmse = _core.nmse
psnr = _core.psnr
ssim = _core.ssim
coherence = _core.coherence
kten_read = _core.kten_read
kten_write = _core.kten_write

__all__ = [
    "fft2", "ifft2", "conj_reflect", "ssos", "nmse", "psnr", "ssim", "coherence",
    "kten_read", "kten_write", "mask_map", "simulate", "fit", "verify",
]


def _text(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _config(kwargs):
    return {key: _text(value) for key, value in kwargs.items()}


def mask_map(**kwargs):
    """0/1 sampling map for the given config keys (n, mask, r, acs, ...)."""
    return _core.mask_map(_config(kwargs))


def simulate(**kwargs):
    """Synthesize an acquisition; returns a dict of numpy arrays."""
    return _core.simulate(_config(kwargs))


def fit(y, mask, **kwargs):
    """Fit the untrained generator to measurements y under a 0/1 mask.

    Returns a dict with the interpolated k-space, the SSoS image, and the
    loss history. Training keys: iters, lr, net_seed, ablation, dc,
    weighting, and the decoder shape keys.
    """
    return _core.fit(y, mask, _config(kwargs))


def verify(**kwargs):
    """Empirical recovery-theory report for the given config keys."""
    return _core.verify(_config(kwargs))
