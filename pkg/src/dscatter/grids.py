"""Complex-valued functions sampled on a centered square lattice.

A grid covers [-L, L)^2 with n samples per side; sample (i, j) sits at
x1 = -L + i*h, x2 = -L + j*h with h = 2L/n (the +L edge is excluded, so
the lattice is compatible with periodic transforms).  Values are stored
row-major with the row index running over x2 and the column index over
x1.  All plane integrals use the rectangle rule with weight h^2.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"CGRD"
VERSION = 1
HEADER = struct.Struct("<4sIIId")  # magic, version, n, reserved, L


class GridFormatError(ValueError):
    """Malformed CGRD payload (bad magic, version, length or values)."""


class GridSpecError(ValueError):
    """Invalid grid geometry."""


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a centered square lattice: n points per side on [-L, L)^2."""

    n: int
    L: float

    def __post_init__(self):
        n, L = self.n, self.L
        if not isinstance(n, (int, np.integer)) or n < 16 or (n & (n - 1)) != 0:
            raise GridSpecError(f"n must be a power of two >= 16, got {n!r}")
        if not np.isfinite(L) or L <= 0:
            raise GridSpecError(f"L must be positive and finite, got {L!r}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "L", float(L))

    @property
    def step(self) -> float:
        return 2.0 * self.L / self.n

    def axis(self) -> np.ndarray:
        """Sample coordinates along one axis, -L + j*h for j in 0..n-1."""
        return -self.L + self.step * np.arange(self.n)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable (X1, X2) coordinate arrays (X1 varies along columns)."""
        ax = self.axis()
        return ax[None, :], ax[:, None]

    def quad_weight(self) -> float:
        return self.step ** 2


@dataclass(frozen=True)
class ComplexGrid:
    """Samples of a complex-valued function on a GridSpec lattice.

    ``values`` is an (n, n) complex array; C order matches the row-major
    layout of the file format.  Grids are immutable: the constructor
    copies and write-protects the array, so instances can be shared
    freely across threads.
    """

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128, order="C")  # own copy
        n = self.spec.n
        if v.shape == (n * n,):
            v = v.reshape(n, n)
        if v.shape != (n, n):
            raise GridSpecError(f"values shape {v.shape} does not match n={n}")
        if not np.isfinite(v.view(np.float64)).all():
            raise GridSpecError("grid values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    # -- pointwise algebra ------------------------------------------------

    def _like(self, values: np.ndarray) -> "ComplexGrid":
        return ComplexGrid(self.spec, values)

    def _check_match(self, other: "ComplexGrid") -> None:
        if self.spec != other.spec:
            raise GridSpecError(f"grid spec mismatch: {self.spec} vs {other.spec}")

    def add(self, other: "ComplexGrid") -> "ComplexGrid":
        self._check_match(other)
        return self._like(self.values + other.values)

    def scale(self, c: complex) -> "ComplexGrid":
        return self._like(c * self.values)

    def multiply(self, other: "ComplexGrid") -> "ComplexGrid":
        self._check_match(other)
        return self._like(self.values * other.values)

    def conjugate(self) -> "ComplexGrid":
        return self._like(np.conj(self.values))

    def weight_bracket(self, beta: float) -> "ComplexGrid":
        """Multiply by <x>^beta = (1 + |x|^2)^(beta/2); the origin sample is fixed."""
        if beta == 0.0:
            return self._like(self.values.copy())
        X1, X2 = self.spec.meshes()
        w = (1.0 + X1 * X1 + X2 * X2) ** (0.5 * beta)
        return self._like(self.values * w)

    # -- norms used everywhere ---------------------------------------------

    def l2(self) -> float:
        """Discrete L^2 norm, rectangle-rule weight h^2 per sample."""
        return self.spec.step * float(np.linalg.norm(self.values))

    def sup(self) -> float:
        return float(np.abs(self.values).max())


def make_grid(spec: GridSpec, f) -> ComplexGrid:
    """Sample ``f(x1, x2)`` on the lattice.

    ``f`` may be numpy-vectorized (preferred) or scalar; non-finite output is
    rejected with the offending coordinate in the message.
    """
    X1, X2 = spec.meshes()
    try:
        vals = np.asarray(f(X1, X2), dtype=np.complex128)
        vals = np.broadcast_to(vals, (spec.n, spec.n)).copy()
    except (TypeError, ValueError):
        vals = np.empty((spec.n, spec.n), dtype=np.complex128)
        ax = spec.axis()
        for j, x2 in enumerate(ax):
            for i, x1 in enumerate(ax):
                vals[j, i] = f(x1, x2)
    bad = ~np.isfinite(vals.view(np.float64)).reshape(spec.n, spec.n, 2).all(axis=2)
    if bad.any():
        j, i = np.argwhere(bad)[0]
        ax = spec.axis()
        raise GridSpecError(
            f"rule returned a non-finite value at x1={ax[i]!r}, x2={ax[j]!r}"
        )
    return ComplexGrid(spec, vals)


def zero_grid(spec: GridSpec) -> ComplexGrid:
    return ComplexGrid(spec, np.zeros((spec.n, spec.n), dtype=np.complex128))


# -- CGRD binary format ----------------------------------------------------


def write_grid(grid: ComplexGrid) -> bytes:
    """Serialize to the CGRD byte format (little-endian, bit-exact)."""
    head = HEADER.pack(MAGIC, VERSION, grid.spec.n, 0, grid.spec.L)
    payload = np.ascontiguousarray(grid.values, dtype="<c16").tobytes()
    return head + payload


def read_grid(data: bytes) -> ComplexGrid:
    """Parse CGRD bytes; inverse of :func:`write_grid`, bit-exact."""
    if len(data) < HEADER.size:
        raise GridFormatError("payload length mismatch: truncated header")
    magic, version, n, _reserved, L = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise GridFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise GridFormatError(f"version mismatch: got {version}, expected {VERSION}")
    expected = HEADER.size + 16 * n * n
    if len(data) != expected:
        raise GridFormatError(
            f"payload length mismatch: got {len(data)} bytes, expected {expected}"
        )
    vals = np.frombuffer(data, dtype="<c16", offset=HEADER.size).reshape(n, n)
    if not np.isfinite(vals.view(np.float64)).all():
        raise GridFormatError("non-finite payload")
    try:
        spec = GridSpec(int(n), float(L))
    except GridSpecError as exc:
        raise GridFormatError(str(exc)) from exc
    return ComplexGrid(spec, vals.astype(np.complex128))


def save_grid(grid: ComplexGrid, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_grid(grid))


def load_grid(path) -> ComplexGrid:
    with open(path, "rb") as fh:
        return read_grid(fh.read())


def export_csv(grid: ComplexGrid) -> str:
    """CSV dump (header x1,x2,re,im) for plotting, one sample per line."""
    ax = grid.spec.axis()
    out = io.StringIO()
    out.write("x1,x2,re,im\n")
    v = grid.values
    for j in range(grid.spec.n):
        x2 = ax[j]
        for i in range(grid.spec.n):
            z = v[j, i]
            out.write(f"{ax[i]!r},{x2!r},{z.real!r},{z.imag!r}\n")
    return out.getvalue()
