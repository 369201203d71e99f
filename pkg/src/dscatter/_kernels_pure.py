"""Reference numpy implementations of the hot per-k kernels.

Semantics match ``_fastkern``; this module is the fallback selected at
import time when the compiled extension is unavailable (or when
``DSCATTER_BACKEND=pure``).
"""

from __future__ import annotations

import numpy as np


def fill_tk_source(out: np.ndarray, rowphase: np.ndarray, colphase: np.ndarray,
                   q: np.ndarray, f: np.ndarray) -> None:
    """Write 0.5 * e_k * q * conj(f) into the top-left n x n block of ``out``.

    ``out`` is the zero-padded convolution buffer (2n, 2n) whose border is
    assumed to stay zero between calls; phases are the separable factors of
    e_k along rows (x2, paired with Re k) and columns (x1, paired with Im k).
    Batched form: out (B, 2n, 2n), phases (B, n), f (B, n, n), shared q.
    """
    n = q.shape[-1]
    if out.ndim == 2:
        out[:n, :n] = (0.5 * rowphase)[:, None] * colphase[None, :] * q * np.conj(f)
    else:
        out[:, :n, :n] = (
            (0.5 * rowphase)[:, :, None] * colphase[:, None, :] * q[None] * np.conj(f)
        )


def pair_sum(rowphase: np.ndarray, colphase: np.ndarray,
             q: np.ndarray, mu: np.ndarray):
    """Row-major reduction sum_{j,i} e_k[j,i] q[j,i] conj(mu[j,i]).

    Returns a complex scalar, or a (B,) vector for batched phases/mu.
    """
    if mu.ndim == 2:
        return complex(np.sum(rowphase[:, None] * colphase[None, :] * q * np.conj(mu)))
    acc = rowphase[:, :, None] * colphase[:, None, :] * (q[None] * np.conj(mu))
    return np.sum(acc, axis=(1, 2))
