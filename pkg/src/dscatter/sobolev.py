"""Weighted Sobolev and Lebesgue norms.

The space H^{alpha,beta} asks for <D>^alpha f and <x>^beta f in L^2; the
norm used here is the root-sum-of-squares of the two pieces, with
<D>^alpha realized as multiplication by <k>^alpha on the transform side
(exact by the discrete Plancherel identity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import forward_transform, inverse_transform
from .grids import ComplexGrid


def bracket_D(f: ComplexGrid, alpha: float) -> ComplexGrid:
    """<D>^alpha f: multiply the transform by <k>^alpha = (1+|k|^2)^(alpha/2)."""
    fh = forward_transform(f)
    k1, k2 = fh.spec.meshes()
    wk = (1.0 + k1 * k1 + k2 * k2) ** (0.5 * alpha)
    return inverse_transform(ComplexGrid(fh.spec, wk * fh.values), out_spec=f.spec)


@dataclass(frozen=True)
class SobolevParams:
    """Smoothness weight alpha (on <D>) and decay weight beta (on <x>)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError(f"weight exponents must be >= 0, got {self}")


def sobolev_norm(f: ComplexGrid, params: SobolevParams) -> float:
    """( ||<D>^a f||_2^2 + ||<x>^b f||_2^2 )^(1/2)."""
    fh = forward_transform(f)
    k1, k2 = fh.spec.meshes()
    wk = (1.0 + k1 * k1 + k2 * k2) ** (0.5 * params.alpha)
    smooth = fh.spec.step * float(np.linalg.norm(wk * fh.values))
    decay = f.weight_bracket(params.beta).l2()
    return math.hypot(smooth, decay)


def lp_norm(f: ComplexGrid, p: float) -> float:
    """Rectangle-rule L^p norm; p = inf is the max over samples."""
    if p != math.inf and p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(f.values)
    if p == math.inf:
        return float(a.max())
    return float((f.spec.quad_weight() * np.sum(a ** p)) ** (1.0 / p))


def weighted_lp_norm(f: ComplexGrid, p: float, alpha: float,
                     homogeneous: bool = False) -> float:
    """L^p norm of w*f with w = <x>^alpha, or |x|^alpha when homogeneous."""
    if alpha == 0.0 and not homogeneous:
        return lp_norm(f, p)
    x1, x2 = f.spec.meshes()
    r2 = x1 * x1 + x2 * x2
    w = r2 ** (0.5 * alpha) if homogeneous else (1.0 + r2) ** (0.5 * alpha)
    return lp_norm(ComplexGrid(f.spec, w * f.values), p)


@dataclass(frozen=True)
class EmbeddingReport:
    """Diagnostic table of L^p norms across the embedding range of H^{a,b}."""

    alpha: float
    beta: float
    sobolev: float
    table: tuple[tuple[float, float], ...]  # (p, ||f||_p), increasing p


def embedding_report(f: ComplexGrid, alpha: float, beta: float) -> EmbeddingReport:
    """Tabulate ||f||_p over the p-range 1/2 - a/2 <= 1/p < 1/2 + b/2.

    The endpoints 2/(1+beta) and (for alpha < 1) 2/(1-alpha) bracket the
    range; p = 2 is always included.  Purely diagnostic: every discrete
    norm is finite, the table just shows the scales.
    """
    params = SobolevParams(alpha, beta)
    ps = {2.0, 2.0 / (1.0 + beta)}
    if alpha < 1.0:
        ps.add(2.0 / (1.0 - alpha))
    table = tuple((p, lp_norm(f, p)) for p in sorted(ps))
    return EmbeddingReport(alpha, beta, sobolev_norm(f, params), table)
