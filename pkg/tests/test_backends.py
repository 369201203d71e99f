import numpy as np
import pytest

from dscatter import backend_name
from dscatter import _kernels_pure as pure

compiled = pytest.importorskip("dscatter._fastkern")


def _data(batch=None):
    rng = np.random.default_rng(31)
    n = 32
    q = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if batch is None:
        rp = np.exp(1j * rng.standard_normal(n))
        cp = np.exp(1j * rng.standard_normal(n))
        f = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    else:
        rp = np.exp(1j * rng.standard_normal((batch, n)))
        cp = np.exp(1j * rng.standard_normal((batch, n)))
        f = rng.standard_normal((batch, n, n)) + 1j * rng.standard_normal((batch, n, n))
    return q, rp, cp, f


def test_backend_is_registered():
    assert backend_name() in ("pure", "compiled")


def test_fill_parity_single():
    q, rp, cp, f = _data()
    n = q.shape[0]
    out_c = np.zeros((2 * n, 2 * n), dtype=complex)
    out_p = np.zeros_like(out_c)
    compiled.fill_tk_source(out_c, rp, cp, q, f)
    pure.fill_tk_source(out_p, rp, cp, q, f)
    assert np.abs(out_c - out_p).max() < 1e-14
    assert not out_c[n:, :].any() and not out_c[:, n:].any()


def test_fill_parity_batched():
    q, rp, cp, f = _data(batch=5)
    n = q.shape[0]
    out_c = np.zeros((5, 2 * n, 2 * n), dtype=complex)
    out_p = np.zeros_like(out_c)
    compiled.fill_tk_source(out_c, rp, cp, q, f)
    pure.fill_tk_source(out_p, rp, cp, q, f)
    assert np.abs(out_c - out_p).max() < 1e-14


def test_pair_sum_parity():
    q, rp, cp, f = _data()
    a = compiled.pair_sum(rp, cp, q, f)
    b = pure.pair_sum(rp, cp, q, f)
    assert abs(a - b) < 1e-9 * max(1.0, abs(b))


def test_pair_sum_parity_batched():
    q, rp, cp, f = _data(batch=5)
    a = compiled.pair_sum(rp, cp, q, f)
    b = pure.pair_sum(rp, cp, q, f)
    assert np.abs(a - b).max() < 1e-9 * max(1.0, np.abs(b).max())
