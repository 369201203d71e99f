"""The conjugate-linear operator T_k, the mu-system solve, and the k-sweep.

T_k f = (1/2) C(e_k q conj(f)) is conjugate-linear, so T_k^2 is linear and
mu1 = 1 + (I - T_k^2)^{-1} T_k^2(1) solves mu1 = 1 + T_k^2(mu1); then
mu2 = T_k(mu1) and

    R(q)(k) = (1/pi) integral e_k(x) q(x) conj(mu1(x, k)) dx.

The solve runs a Neumann iteration while the contraction estimate
||T_k^2(1)||_2 / ||1||_2 stays below 0.9 and falls back to a matrix-free
restarted GMRES on I - T_k^2 otherwise.  Sweeps process k-points in fixed
blocks (batched FFTs) so results are bit-identical for any worker count;
all reductions are plain numpy pairwise sums, independent of BLAS
threading.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from ._kernels import fill_tk_source, pair_sum
from .cauchy import KernelPlan, kernel_plan
from .fourier import dual_spec, phase_vectors
from .grids import ComplexGrid, GridSpec, GridSpecError

BLOCK = 4  # fixed sweep block size; part of the determinism contract

_METHODS = ("neumann-then-krylov", "neumann-only", "krylov-only")
_CONTRACTION_LIMIT = 0.9


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 200
    residual_tolerance: float = 1e-10
    method: str = "neumann-then-krylov"

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.residual_tolerance > 0:
            raise ValueError("residual_tolerance must be > 0")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")


@dataclass(frozen=True)
class SolveReport:
    """Per-k convergence record of the mu1 solve."""

    k: complex
    iterations: int
    final_residual: float
    method_used: str
    contraction_estimate: float
    converged: bool = True


class SolveFailure(RuntimeError):
    """Single-k solve did not reach the residual tolerance."""

    def __init__(self, report: SolveReport):
        super().__init__(
            f"mu solve failed at k={report.k}: residual {report.final_residual:.3e} "
            f"after {report.iterations} iterations ({report.method_used})"
        )
        self.report = report


class SweepError(RuntimeError):
    """More than 1% of the k-points in a sweep failed to converge."""

    def __init__(self, failed: int, total: int, reports):
        super().__init__(f"{failed} of {total} k-points failed to converge")
        self.reports = reports


def apply_Tk(q: ComplexGrid, k: complex, f: ComplexGrid,
             plan: KernelPlan | None = None) -> ComplexGrid:
    """T_k f = (1/2) C(e_k q conj(f)); conjugate-linear in f."""
    if q.spec != f.spec:
        raise GridSpecError(f"grid spec mismatch: {q.spec} vs {f.spec}")
    if plan is None:
        plan = kernel_plan(q.spec)
    rp, cp = phase_vectors(k, q.spec)
    n = q.spec.n
    buf = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    fill_tk_source(buf, rp, cp, q.values, np.ascontiguousarray(f.values))
    spec_f = _fft.fft2(buf, workers=1)
    np.multiply(spec_f, plan.khat, out=spec_f)
    out = _fft.ifft2(spec_f, workers=1, overwrite_x=True)[:n, :n]
    return ComplexGrid(q.spec, out)


# -- deterministic matrix-free GMRES ----------------------------------------


def _nrm(v: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.conj(v) * v).real))


def _gmres(matvec, b: np.ndarray, tol_abs: float, maxiter: int,
           restart: int = 30) -> tuple[np.ndarray, int, float]:
    """Restarted GMRES with numpy-pairwise reductions (no BLAS dot calls)."""
    x = np.zeros_like(b)
    r = b.copy()
    rn = _nrm(r)
    total = 0
    while rn > tol_abs and total < maxiter:
        m = min(restart, maxiter - total)
        basis = [r / rn]
        hess = np.zeros((m + 1, m), dtype=np.complex128)
        rhs = np.zeros(m + 1, dtype=np.complex128)
        rhs[0] = rn
        y = None
        used = 0
        for j in range(m):
            w = matvec(basis[j])
            total += 1
            for i in range(j + 1):
                hij = np.sum(np.conj(basis[i]) * w)
                hess[i, j] = hij
                w = w - hij * basis[i]
            hjj = _nrm(w)
            hess[j + 1, j] = hjj
            used = j + 1
            ycand, *_ = np.linalg.lstsq(hess[:j + 2, :j + 1], rhs[:j + 2], rcond=None)
            resid = _nrm(hess[:j + 2, :j + 1] @ ycand - rhs[:j + 2])
            y = ycand
            if resid <= tol_abs or hjj <= 1e-300:
                break
            basis.append(w / hjj)
        if y is not None:
            for i in range(used):
                x = x + y[i] * basis[i]
        r = b - matvec(x)
        rn = _nrm(r)
    return x, total, rn


# -- the batched block engine ------------------------------------------------


class _BlockEngine:
    """Batched mu1 solves for a fixed potential on one lattice."""

    def __init__(self, qvals: np.ndarray, spec: GridSpec, opts: SolverOptions):
        self.q = np.ascontiguousarray(qvals, dtype=np.complex128)
        self.spec = spec
        self.opts = opts
        self.plan = kernel_plan(spec)
        self.n = spec.n
        self.h = spec.step
        self.norm_one = 2.0 * spec.L  # ||1||_2 over the window

    def scratch(self, nb: int) -> np.ndarray:
        # zeroed padded buffer; fills only ever touch the n x n corner block
        return np.zeros((nb, 2 * self.n, 2 * self.n), dtype=np.complex128)

    def _apply_T_batch(self, rp, cp, f, buf):
        n = self.n
        fill_tk_source(buf, rp, cp, self.q, f)
        spec_f = _fft.fft2(buf, axes=(-2, -1), workers=1)
        np.multiply(spec_f, self.plan.khat, out=spec_f)
        out = _fft.ifft2(spec_f, axes=(-2, -1), workers=1, overwrite_x=True)
        return np.ascontiguousarray(out[:, :n, :n])

    def _apply_T_single(self, rp, cp, f, buf):
        n = self.n
        fill_tk_source(buf[0], rp, cp, self.q, np.ascontiguousarray(f))
        spec_f = _fft.fft2(buf[0], workers=1)
        np.multiply(spec_f, self.plan.khat, out=spec_f)
        return _fft.ifft2(spec_f, workers=1, overwrite_x=True)[:n, :n]

    def phases(self, ks: np.ndarray):
        ax = self.spec.axis()
        rp = np.exp(-2j * np.outer(ks.real, ax))
        cp = np.exp(-2j * np.outer(ks.imag, ax))
        return rp, cp

    def solve(self, ks: np.ndarray):
        """Solve the block; returns (u, reports) with mu1 = 1 + u."""
        opts = self.opts
        nb = len(ks)
        n, h = self.n, self.h
        rp, cp = self.phases(ks)
        buf = self.scratch(nb)
        ones = np.ones((nb, n, n), dtype=np.complex128)
        b = self._apply_T_batch(rp, cp, self._apply_T_batch(rp, cp, ones, buf), buf)
        contraction = h * np.linalg.norm(b.reshape(nb, -1), axis=1) / self.norm_one

        u = b.copy()
        iters = np.zeros(nb, dtype=int)
        resid = np.full(nb, np.inf)
        done = np.zeros(nb, dtype=bool)
        method = np.full(nb, "neumann", dtype=object)

        neumann_ok = opts.method in ("neumann-then-krylov", "neumann-only")
        krylov_ok = opts.method in ("neumann-then-krylov", "krylov-only")
        eligible = contraction < _CONTRACTION_LIMIT if neumann_ok else np.zeros(nb, bool)

        if eligible.any():
            it = 0
            while it <= opts.max_iterations:
                unext = self._apply_T_batch(
                    rp, cp, self._apply_T_batch(rp, cp, u, buf), buf
                ) + b
                rn = h * np.linalg.norm((u - unext).reshape(nb, -1), axis=1)
                newly = eligible & ~done & (rn <= opts.residual_tolerance)
                resid[newly] = rn[newly]
                iters[newly] = it
                done |= newly
                if (done | ~eligible).all():
                    break
                step = eligible & ~done
                u[step] = unext[step]
                it += 1

        for idx in np.flatnonzero(~done):
            if not krylov_ok:
                one = self.scratch(1)
                t2u = self._t2_single(rp[idx], cp[idx], u[idx], one)
                resid[idx] = h * _nrm((u[idx] - (t2u + b[idx])).ravel())
                iters[idx] = opts.max_iterations
                continue
            method[idx] = "krylov"
            x, its, rn = self._krylov_point(rp[idx], cp[idx], b[idx])
            u[idx] = x
            iters[idx] = its
            resid[idx] = rn
            done[idx] = rn <= opts.residual_tolerance

        reports = [
            SolveReport(
                k=complex(ks[i]),
                iterations=int(iters[i]),
                final_residual=float(resid[i]),
                method_used=str(method[i]),
                contraction_estimate=float(contraction[i]),
                converged=bool(done[i]),
            )
            for i in range(nb)
        ]
        return u, reports

    def _t2_single(self, rp, cp, f, buf):
        return self._apply_T_single(rp, cp, self._apply_T_single(rp, cp, f, buf), buf)

    def _krylov_point(self, rp, cp, bpoint):
        n, h = self.n, self.h
        buf = self.scratch(1)

        def matvec(v):
            g = v.reshape(n, n)
            return (g - self._t2_single(rp, cp, g, buf)).ravel()

        x, its, rn = _gmres(
            matvec,
            bpoint.ravel().copy(),
            tol_abs=self.opts.residual_tolerance / h,
            maxiter=self.opts.max_iterations,
        )
        return np.ascontiguousarray(x.reshape(n, n)), its, h * rn

    def scatter_values(self, ks: np.ndarray):
        """R(q)(k) for a block: pairing of e_k q with conj(mu1)."""
        u, reports = self.solve(ks)
        rp, cp = self.phases(ks)
        mu1 = u
        mu1 += 1.0
        vals = pair_sum(rp, cp, self.q, mu1) * (self.h ** 2 / np.pi)
        return np.asarray(vals, dtype=np.complex128), reports


def _k_lattice(kspec: GridSpec) -> np.ndarray:
    """Row-major k points of a lattice (row = Im k, column = Re k)."""
    k1, k2 = kspec.meshes()
    return (k1 + 1j * k2).ravel()


def solve_mu(q: ComplexGrid, k: complex, opts: SolverOptions = SolverOptions()
             ) -> tuple[ComplexGrid, ComplexGrid, SolveReport]:
    """Solve the first-order system at one k: returns (mu1, mu2, report)."""
    eng = _BlockEngine(q.values, q.spec, opts)
    u, reports = eng.solve(np.array([complex(k)], dtype=np.complex128))
    report = reports[0]
    if not report.converged:
        raise SolveFailure(report)
    mu1 = ComplexGrid(q.spec, 1.0 + u[0])
    mu2 = apply_Tk(q, k, mu1, plan=eng.plan)
    return mu1, mu2, report


def scatter_at(q: ComplexGrid, k: complex, opts: SolverOptions = SolverOptions()
               ) -> tuple[complex, SolveReport]:
    """R(q)(k) at a single k; raises SolveFailure on non-convergence."""
    eng = _BlockEngine(q.values, q.spec, opts)
    vals, reports = eng.scatter_values(np.array([complex(k)], dtype=np.complex128))
    if not reports[0].converged:
        raise SolveFailure(reports[0])
    return complex(vals[0]), reports[0]


def scatter_grid(q: ComplexGrid, kspec: GridSpec,
                 opts: SolverOptions = SolverOptions(), threads: int = 1
                 ) -> tuple[ComplexGrid, list[SolveReport]]:
    """R(q) sampled on a k-lattice.

    Per-k solves are independent; k-points are processed in fixed blocks of
    ``BLOCK`` so the output is bit-identical for every ``threads`` value.
    Failed points carry the quiet value 0 and a failure report; more than
    1% failures raises :class:`SweepError`.
    """
    eng = _BlockEngine(q.values, q.spec, opts)
    ks = _k_lattice(kspec)
    total = len(ks)
    starts = list(range(0, total, BLOCK))

    def run(start: int):
        block = ks[start:start + BLOCK]
        return start, eng.scatter_values(block)

    results: dict[int, tuple[np.ndarray, list[SolveReport]]] = {}
    if threads <= 1:
        for s in starts:
            s, out = run(s)
            results[s] = out
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for s, out in pool.map(run, starts):
                results[s] = out

    vals = np.empty(total, dtype=np.complex128)
    reports: list[SolveReport] = []
    failed = 0
    for s in starts:
        bvals, breps = results[s]
        for off, rep in enumerate(breps):
            if not rep.converged:
                failed += 1
                bvals[off] = 0.0
        vals[s:s + len(bvals)] = bvals
        reports.extend(breps)
    if failed > 0.01 * total:
        raise SweepError(failed, total, reports)
    grid = ComplexGrid(kspec, vals.reshape(kspec.n, kspec.n))
    return grid, reports


def inverse_scatter(r: ComplexGrid, xspec: GridSpec | None = None,
                    opts: SolverOptions = SolverOptions(), threads: int = 1
                    ) -> tuple[ComplexGrid, list[SolveReport]]:
    """The inverse map conj(R(conj(r))): the sweep with x and k roles swapped.

    ``xspec`` defaults to the transform-dual of the r-lattice (matched
    windows), which is the roundtrip configuration.
    """
    if xspec is None:
        xspec = dual_spec(r.spec)
    out, reports = scatter_grid(r.conjugate(), xspec, opts, threads)
    return out.conjugate(), reports
