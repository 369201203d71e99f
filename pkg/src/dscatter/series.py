"""Multilinear decomposition of the scattering transform.

Iterating mu1 = 1 + T_k^2(mu1) splits R(q) into

    R(q)(k) = sum_{j<N} r_j(k) + r^(N)(k),
    r_j(k)   = (1/pi) integral q e_k conj(T_k^{2j}(1)),
    r^(N)(k) = (1/pi) integral q e_k conj(T_k^{2N}(mu1)),

with r_0 = qhat and r_j of multilinear degree 2j+1 in q.  The remainder is
computed directly from its own formula (never by subtraction), so the
partial-sum identity is a genuine two-path cross-check on the conjugation
conventions.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import pair_sum
from .grids import ComplexGrid, GridSpec
from .scattering import (
    BLOCK,
    SolveFailure,
    SolveReport,
    SolverOptions,
    _BlockEngine,
    _k_lattice,
)


class ExpansionError(RuntimeError):
    """Partial sums plus remainder failed to reproduce R(q)."""


def _map_blocks(starts, worker, threads: int):
    """Run block workers (serially or on a thread pool) in a fixed partition."""
    if threads <= 1:
        for s in starts:
            worker(s)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(worker, starts))


@dataclass(frozen=True)
class ExpansionResult:
    """Terms r_0..r_{N-1}, the remainder r^(N), and the reference sweep."""

    terms: list[ComplexGrid]
    remainder: ComplexGrid
    N: int
    scatter: ComplexGrid
    reports: list[SolveReport]
    max_identity_defect: float


def expansion_term(q: ComplexGrid, k: complex, j: int) -> complex:
    """r_j(k) from 2j applications of T_k to the constant 1."""
    if j < 0:
        raise ValueError("term index must be >= 0")
    eng = _BlockEngine(q.values, q.spec, SolverOptions())
    rp, cp = eng.phases(np.array([complex(k)], dtype=np.complex128))
    buf = eng.scratch(1)
    f = np.ones((q.spec.n, q.spec.n), dtype=np.complex128)
    for _ in range(2 * j):
        f = np.ascontiguousarray(eng._apply_T_single(rp[0], cp[0], f, buf))
    val = pair_sum(rp[0], cp[0], eng.q, f) * (q.spec.step ** 2 / np.pi)
    return complex(val)


def remainder_term(q: ComplexGrid, k: complex, N: int, mu1: ComplexGrid) -> complex:
    """r^(N)(k) from 2N applications of T_k to the solved mu1."""
    if N < 1:
        raise ValueError("remainder order must be >= 1")
    eng = _BlockEngine(q.values, q.spec, SolverOptions())
    rp, cp = eng.phases(np.array([complex(k)], dtype=np.complex128))
    buf = eng.scratch(1)
    f = np.ascontiguousarray(mu1.values)
    for _ in range(2 * N):
        f = np.ascontiguousarray(eng._apply_T_single(rp[0], cp[0], f, buf))
    val = pair_sum(rp[0], cp[0], eng.q, f) * (q.spec.step ** 2 / np.pi)
    return complex(val)


def expand(q: ComplexGrid, kspec: GridSpec, N: int,
           opts: SolverOptions = SolverOptions(), threads: int = 1
           ) -> ExpansionResult:
    """Sweep the k-lattice computing all terms, the remainder, and R(q).

    Raises :class:`ExpansionError` when the pointwise identity
    sum_j r_j + r^(N) = R(q) is violated beyond 10x the solver tolerance.
    """
    if N < 1:
        raise ValueError("expansion order must be >= 1")
    eng = _BlockEngine(q.values, q.spec, opts)
    ks = _k_lattice(kspec)
    total = len(ks)
    weight = q.spec.step ** 2 / np.pi

    rvals = np.empty(total, dtype=np.complex128)
    tvals = np.empty((N, total), dtype=np.complex128)
    remvals = np.empty(total, dtype=np.complex128)
    starts = list(range(0, total, BLOCK))
    block_reports: dict[int, list[SolveReport]] = {}

    def run(start: int) -> None:
        block = ks[start:start + BLOCK]
        nb = len(block)
        sl = slice(start, start + nb)
        u, breps = eng.solve(block)
        block_reports[start] = breps
        rp, cp = eng.phases(block)
        buf = eng.scratch(nb)
        mu1 = u + 1.0
        rvals[sl] = pair_sum(rp, cp, eng.q, mu1) * weight

        f = np.ones((nb, q.spec.n, q.spec.n), dtype=np.complex128)
        tvals[0, sl] = pair_sum(rp, cp, eng.q, f) * weight
        for j in range(1, N):
            f = eng._apply_T_batch(rp, cp, eng._apply_T_batch(rp, cp, f, buf), buf)
            tvals[j, sl] = pair_sum(rp, cp, eng.q, f) * weight

        g = np.ascontiguousarray(mu1)
        for _ in range(N):
            g = eng._apply_T_batch(rp, cp, eng._apply_T_batch(rp, cp, g, buf), buf)
        remvals[sl] = pair_sum(rp, cp, eng.q, g) * weight

    _map_blocks(starts, run, threads)
    reports: list[SolveReport] = []
    for start in starts:
        for rep in block_reports[start]:
            if not rep.converged:
                raise SolveFailure(rep)
        reports.extend(block_reports[start])

    defect = float(np.abs(rvals - tvals.sum(axis=0) - remvals).max())
    bound = 10.0 * opts.residual_tolerance
    if defect > bound:
        raise ExpansionError(
            f"partial sums + remainder miss R(q) by {defect:.3e} (> {bound:.3e})"
        )
    shape = (kspec.n, kspec.n)
    return ExpansionResult(
        terms=[ComplexGrid(kspec, tvals[j].reshape(shape)) for j in range(N)],
        remainder=ComplexGrid(kspec, remvals.reshape(shape)),
        N=N,
        scatter=ComplexGrid(kspec, rvals.reshape(shape)),
        reports=reports,
        max_identity_defect=defect,
    )


@dataclass(frozen=True)
class DbarKReport:
    """Finite-difference check of d(mu1)/d(kbar) = (1/2) conj(R) mu2."""

    residual: float
    k_step: float
    kspec: GridSpec
    probes: tuple[tuple[int, int], ...]
    scale: float  # sup |(1/2) conj(R) mu2| used for the relative residual


def _probe_indices(n: int) -> tuple[tuple[int, int], ...]:
    offs = (-(n // 8), 0, n // 8)
    c = n // 2
    return tuple((c + a, c + b) for a in offs for b in offs)


def dbar_k_residual(q: ComplexGrid, kspec: GridSpec,
                    opts: SolverOptions = SolverOptions(),
                    threads: int = 1) -> DbarKReport:
    """Relative sup residual of the dbar-in-k equation over a probe set.

    mu1 is differenced centrally on the k-lattice (step = kspec.step) and
    compared with (1/2) conj(R(q)(k)) mu2(x, k) at nine fixed interior
    x-points, over all interior k-points.
    """
    eng = _BlockEngine(q.values, q.spec, opts)
    ks = _k_lattice(kspec)
    nk = kspec.n
    probes = _probe_indices(q.spec.n)
    pj = np.array([p[0] for p in probes])
    pi = np.array([p[1] for p in probes])
    weight = q.spec.step ** 2 / np.pi

    mu1p = np.empty((nk * nk, len(probes)), dtype=np.complex128)
    mu2p = np.empty_like(mu1p)
    rvals = np.empty(nk * nk, dtype=np.complex128)
    starts = list(range(0, len(ks), BLOCK))
    block_reports: dict[int, list[SolveReport]] = {}

    def run(start: int) -> None:
        block = ks[start:start + BLOCK]
        sl = slice(start, start + len(block))
        u, breps = eng.solve(block)
        block_reports[start] = breps
        rp, cp = eng.phases(block)
        mu1 = u + 1.0
        rvals[sl] = pair_sum(rp, cp, eng.q, mu1) * weight
        mu2 = eng._apply_T_batch(rp, cp, np.ascontiguousarray(mu1), eng.scratch(len(block)))
        mu1p[sl] = mu1[:, pj, pi]
        mu2p[sl] = mu2[:, pj, pi]

    _map_blocks(starts, run, threads)
    for start in starts:
        for rep in block_reports[start]:
            if not rep.converged:
                raise SolveFailure(rep)

    mu1p = mu1p.reshape(nk, nk, -1)
    mu2p = mu2p.reshape(nk, nk, -1)
    rgrid = rvals.reshape(nk, nk)
    dk = kspec.step

    # rows index Im k (k2), columns Re k (k1)
    d_k1 = (mu1p[1:-1, 2:, :] - mu1p[1:-1, :-2, :]) / (2.0 * dk)
    d_k2 = (mu1p[2:, 1:-1, :] - mu1p[:-2, 1:-1, :]) / (2.0 * dk)
    fd = 0.5 * (d_k1 + 1j * d_k2)
    rhs = 0.5 * np.conj(rgrid[1:-1, 1:-1, None]) * mu2p[1:-1, 1:-1, :]

    scale = float(np.abs(rhs).max())
    err = float(np.abs(fd - rhs).max())
    residual = err / scale if scale > 0 else err
    return DbarKReport(
        residual=residual,
        k_step=dk,
        kspec=kspec,
        probes=probes,
        scale=scale,
    )
