"""Exact verification of the two matroid families and their polytope points.

Everything here is integer/rational arithmetic: determinants by
fraction-free Bareiss elimination, convex certificates with
:class:`fractions.Fraction` weights.  Floating point never enters, so a
"pass" is a finite proof check, not numerical evidence.

The two families in R^{N+1} and R^{2N+1}:

    E1 = {e_0..e_N} + {e_{m-1} - e_m : m=1..N} + {zeta = sum (-1)^j e_j},
    E2 = {e_0..e_2N} + left/right alternating partial sums + {zeta},

where the left sums are L_k = e_0 - e_1 + ... - e_{2k-1} and the right
sums are their images under the index reversal e_j -> e_{2N-j}.  For every
ordered pair (v, w) of distinct family members there are two bases B1, B2
with B1 cap B2 = {v} and E минус (B1 cup B2) = {w}; the midpoint
Phi_{v,w} = (chi_B1 + chi_B2)/2 then takes value 1 at v, 0 at w and 1/2
elsewhere, and the uniform average of all Phi's is the constant-1/2 point
of the base polytope.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

Label = tuple
Vector = tuple[int, ...]


@dataclass(frozen=True)
class VectorFamily:
    """Ordered integer vectors with role labels ("unit", j) etc."""

    name: str
    N: int
    dim: int
    vectors: tuple[Vector, ...]
    labels: tuple[Label, ...]

    def __len__(self) -> int:
        return len(self.vectors)

    def index_of(self, label: Label) -> int:
        return self.labels.index(label)

    def vector(self, label: Label) -> Vector:
        return self.vectors[self.index_of(label)]


def _unit(dim: int, j: int) -> Vector:
    return tuple(1 if i == j else 0 for i in range(dim))


def _add(a: Vector, b: Vector, sb: int = 1) -> Vector:
    return tuple(x + sb * y for x, y in zip(a, b))


def build_E1(N: int) -> VectorFamily:
    """Units, the difference chain, and the alternating sum, in R^{N+1}."""
    if N < 2:
        raise ValueError("E1 needs N >= 2 (otherwise the vectors collide)")
    dim = N + 1
    vectors: list[Vector] = []
    labels: list[Label] = []
    for j in range(dim):
        vectors.append(_unit(dim, j))
        labels.append(("unit", j))
    for m in range(1, N + 1):
        vectors.append(_add(_unit(dim, m - 1), _unit(dim, m), -1))
        labels.append(("diff", m))
    vectors.append(tuple((-1) ** j for j in range(dim)))
    labels.append(("zeta",))
    assert len(set(vectors)) == 2 * N + 2
    return VectorFamily("E1", N, dim, tuple(vectors), tuple(labels))


def build_E2(N: int) -> VectorFamily:
    """Units, left/right alternating partial sums, and zeta, in R^{2N+1}."""
    if N < 1:
        raise ValueError("E2 needs N >= 1")
    dim = 2 * N + 1
    vectors: list[Vector] = []
    labels: list[Label] = []
    for j in range(dim):
        vectors.append(_unit(dim, j))
        labels.append(("unit", j))
    for k in range(1, N + 1):
        left = [0] * dim
        for j in range(2 * k):
            left[j] += (-1) ** j
        vectors.append(tuple(left))
        labels.append(("left", k))
    for k in range(1, N + 1):
        right = [0] * dim
        for j in range(2 * k):
            right[2 * N - j] += (-1) ** j
        vectors.append(tuple(right))
        labels.append(("right", k))
    vectors.append(tuple((-1) ** j for j in range(dim)))
    labels.append(("zeta",))
    assert len(set(vectors)) == 4 * N + 2
    return VectorFamily("E2", N, dim, tuple(vectors), tuple(labels))


# -- exact linear algebra ----------------------------------------------------


def det_int(rows: list[Vector]) -> int:
    """Integer determinant by fraction-free Bareiss elimination."""
    n = len(rows)
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for c in range(n - 1):
        if m[c][c] == 0:
            for r in range(c + 1, n):
                if m[r][c] != 0:
                    m[c], m[r] = m[r], m[c]
                    sign = -sign
                    break
            else:
                return 0
        for r in range(c + 1, n):
            for cc in range(c + 1, n):
                m[r][cc] = (m[r][cc] * m[c][c] - m[r][c] * m[c][cc]) // prev
            m[r][c] = 0
        prev = m[c][c]
    return sign * m[n - 1][n - 1]


def is_basis(family: VectorFamily, subset) -> bool:
    """Exact independence test for a subset of family indices."""
    idx = sorted(subset)
    if len(idx) != family.dim or len(set(idx)) != family.dim:
        raise ValueError(f"subset must hold {family.dim} distinct indices")
    return det_int([family.vectors[i] for i in idx]) != 0


def enumerate_bases(family: VectorFamily, guard: int = 10 ** 6) -> list[tuple[int, ...]]:
    """All dim-subsets (lexicographic) that are bases; guarded brute force."""
    total = comb(len(family), family.dim)
    if total > guard:
        raise ValueError(f"{total} subsets exceed the enumeration guard {guard}")
    return [
        s for s in combinations(range(len(family)), family.dim) if is_basis(family, s)
    ]


def rational_rank(rows: list[tuple[Fraction, ...]]) -> int:
    """Rank over Q by exact Gaussian elimination."""
    mat = [list(r) for r in rows]
    rank = 0
    cols = len(mat[0]) if mat else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(mat)) if mat[r][c] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        prow = mat[rank]
        inv = Fraction(1, 1) / prow[c]
        for r in range(len(mat)):
            if r != rank and mat[r][c] != 0:
                factor = mat[r][c] * inv
                mat[r] = [a - factor * b for a, b in zip(mat[r], prow)]
        rank += 1
        if rank == len(mat):
            break
    return rank


# -- the appendix case table ---------------------------------------------------


def _flip_label_e1(N: int, lab: Label) -> Label:
    kind = lab[0]
    if kind == "unit":
        return ("unit", N - lab[1])
    if kind == "diff":
        return ("diff", N + 1 - lab[1])
    return lab


def _flip_label_e2(N: int, lab: Label) -> Label:
    kind = lab[0]
    if kind == "unit":
        return ("unit", 2 * N - lab[1])
    if kind == "left":
        return ("right", lab[1])
    if kind == "right":
        return ("left", lab[1])
    return lab


def flip_label(family: VectorFamily, lab: Label) -> Label:
    """The index-reversal bijection e_j -> e_{dim-1-j} induced on labels."""
    if family.name == "E1":
        return _flip_label_e1(family.N, lab)
    return _flip_label_e2(family.N, lab)


def _e1_pair(N: int, v: Label, w: Label) -> tuple[set[Label], set[Label]]:
    S = {("unit", j) for j in range(N + 1)}
    D = {("diff", m) for m in range(1, N + 1)}
    Z = ("zeta",)

    def flip(lab):
        return _flip_label_e1(N, lab)

    kv, kw = v[0], w[0]
    if kv == "unit" and kw == "unit":
        return (S - {w}) | {Z}, D | {v}
    if kv == "unit" and kw == "diff":
        k, m = v[1], w[1]
        hat = ("unit", N) if k <= m - 1 else ("unit", 0)
        return (S | {Z}) - {hat}, (D - {w}) | {v, hat}
    if kv == "diff" and kw == "unit":
        m, k = v[1], w[1]
        if k not in (m - 1, m):
            return {Z, v} | (S - {w, ("unit", m - 1)}), D | {("unit", m - 1)}
        other = next(j for j in range(N + 1) if j not in (m - 1, m))
        return {Z, v} | (S - {("unit", other), w}), D | {("unit", other)}
    if kv == "diff" and kw == "diff":
        mk, ml = v[1], w[1]
        if mk > ml:
            b1, b2 = _e1_pair(N, flip(v), flip(w))
            return {flip(u) for u in b1}, {flip(u) for u in b2}
        b1 = {Z, v} | (S - {("unit", mk - 1), ("unit", ml)})
        b2 = (D - {w}) | {("unit", mk - 1), ("unit", ml)}
        return b1, b2
    if kv == "zeta" and kw == "unit":
        k = w[1]
        if N == 2 and k == 1:
            return (
                {("unit", 0), ("unit", 2), Z},
                {("diff", 1), ("diff", 2), Z},
            )
        if k >= N - 1:
            b1, b2 = _e1_pair(N, v, flip(w))
            return {flip(u) for u in b1}, {flip(u) for u in b2}
        b1 = {("diff", m) for m in range(1, k + 2)}
        b1 |= {("unit", j) for j in range(k + 1, N)} | {Z}
        b2 = {("unit", j) for j in range(k)} | {("unit", N)}
        b2 |= {("diff", m) for m in range(k + 2, N + 1)} | {Z}
        return b1, b2
    if kv == "zeta" and kw == "diff":
        k = w[1] - 1  # w = e_k - e_{k+1}
        if N == 2 and k == 1:
            return (
                {("unit", 0), ("unit", 2), Z},
                {("unit", 1), ("diff", 1), Z},
            )
        if k >= N - 1:
            b1, b2 = _e1_pair(N, v, flip(w))
            return {flip(u) for u in b1}, {flip(u) for u in b2}
        b1 = {("unit", j) for j in range(1, k + 2)}
        b1 |= {("diff", m) for m in range(k + 2, N + 1)} | {Z}
        b2 = {("unit", 0)} | {("unit", j) for j in range(k + 2, N + 1)}
        b2 |= {("diff", m) for m in range(1, k + 1)} | {Z}
        return b1, b2
    if kv == "diff" and kw == "zeta":
        m = v[1]
        return (S - {("unit", m)}) | {v}, D | {("unit", m)}
    if kv == "unit" and kw == "zeta":
        # not listed in the source case table; the evident pair works
        return set(S), D | {v}
    raise AssertionError(f"unreachable E1 case {v} {w}")


def _indep(family: VectorFamily, labels) -> bool:
    rows = [family.vector(lab) for lab in labels]
    return len(rows) == family.dim and det_int(rows) != 0


def _e2_pair(family: VectorFamily, v: Label, w: Label) -> tuple[set[Label], set[Label]]:
    N = family.N
    dim = 2 * N + 1
    S = {("unit", j) for j in range(dim)}
    D = {("left", k) for k in range(1, N + 1)} | {("right", k) for k in range(1, N + 1)}
    Z = ("zeta",)

    def flip(lab):
        return _flip_label_e2(N, lab)

    def flipped(vv, ww):
        b1, b2 = _e2_pair(family, flip(vv), flip(ww))
        return {flip(u) for u in b1}, {flip(u) for u in b2}

    kv, kw = v[0], w[0]
    in_d_v = kv in ("left", "right")
    in_d_w = kw in ("left", "right")
    if kv == "unit" and kw == "unit":
        return (S - {w}) | {Z}, D | {v}
    if kv == "unit" and kw == "zeta":
        return set(S), D | {v}
    if kv == "zeta" and kw == "unit":
        return (S - {w}) | {Z}, D | {Z}
    if kv == "unit" and in_d_w:
        if kw == "right":
            return flipped(v, w)
        # Removing the left sum w = L_m splits span(D - {w}) into the unit
        # blocks {t, t+1} (t = 2m-1, the top of w) and the rest, the latter
        # glued by L_N - R_N = e_0 - e_2N.  The second unit must come from
        # the block not containing e_j; the printed rule (e_2N for j=0,
        # else e_0) picks a dependent set whenever both blocks survive.
        j, t = v[1], 2 * w[1] - 1
        first_choice = 2 * N if j == 0 else 0
        repaired = 0 if j in (t, t + 1) else t
        for ell_idx in (first_choice, repaired):
            ell = ("unit", ell_idx)
            if ell_idx != j and _indep(family, (D - {w}) | {v, ell}):
                return (S - {ell}) | {Z}, (D - {w}) | {v, ell}
        raise AssertionError(f"no valid unit for E2 pair {v} {w}")
    if in_d_v and kw == "unit":
        if kv == "right":
            return flipped(v, w)
        t = 2 * v[1] - 1  # top index of the left sum
        j = w[1]
        ell = ("unit", 2 * N) if j <= t else ("unit", 0)
        return (S - {w, ell}) | {Z, v}, D | {ell}
    if in_d_v and in_d_w:
        if kw == "right":
            return flipped(v, w)
        # Same failure mode as above: {e_0, e_2N} only works when w is the
        # full left sum L_N.  Try the printed pair first, then the smallest
        # unit pair making both sides independent.
        candidates = [(0, 2 * N)]
        candidates += [
            (a, b) for a in range(dim) for b in range(a + 1, dim)
        ]
        for a, b in candidates:
            ua, ub = ("unit", a), ("unit", b)
            b1 = (S - {ua, ub}) | {Z, v}
            b2 = (D - {w}) | {ua, ub}
            if _indep(family, b1) and _indep(family, b2):
                return b1, b2
        raise AssertionError(f"no valid unit pair for E2 pair {v} {w}")
    if in_d_v and kw == "zeta":
        if kv == "right":
            return flipped(v, w)
        t = 2 * v[1] - 1
        return (S - {("unit", t)}) | {v}, D | {("unit", t)}
    if kv == "zeta" and in_d_w:
        if kw == "right":
            return flipped(v, w)
        t = 2 * w[1] - 1
        return (S - {("unit", t)}) | {Z}, (D - {w}) | {Z, ("unit", t)}
    raise AssertionError(f"unreachable E2 case {v} {w}")


@dataclass(frozen=True)
class BasisPair:
    """Two bases (as index sets) with B1 cap B2 = {v}, complement = {w}."""

    b1: frozenset[int]
    b2: frozenset[int]


def appendix_basis_pair(family: VectorFamily, v: Label, w: Label) -> BasisPair:
    """The case-table basis pair for an ordered pair of distinct members."""
    if v == w:
        raise ValueError("v and w must differ")
    if v not in family.labels or w not in family.labels:
        raise ValueError("v and w must be family members")
    if family.name == "E1":
        b1, b2 = _e1_pair(family.N, v, w)
    else:
        b1, b2 = _e2_pair(family, v, w)
    to_idx = family.index_of
    return BasisPair(
        frozenset(to_idx(u) for u in b1), frozenset(to_idx(u) for u in b2)
    )


@dataclass(frozen=True)
class PairReport:
    v: Label
    w: Label
    passed: bool
    failure: str | None = None


def check_pair_conditions(family: VectorFamily, pair: BasisPair,
                          v: Label, w: Label) -> PairReport:
    """Exact check: both bases, intersection {v}, complement {w}."""
    iv, iw = family.index_of(v), family.index_of(w)
    if len(pair.b1) != family.dim or not is_basis(family, pair.b1):
        return PairReport(v, w, False, "B1 is not a basis")
    if len(pair.b2) != family.dim or not is_basis(family, pair.b2):
        return PairReport(v, w, False, "B2 is not a basis")
    if pair.b1 & pair.b2 != {iv}:
        return PairReport(v, w, False, "intersection != {v}")
    if set(range(len(family))) - (pair.b1 | pair.b2) != {iw}:
        return PairReport(v, w, False, "complement != {w}")
    return PairReport(v, w, True)


def verify_pair(family: VectorFamily, v: Label, w: Label) -> PairReport:
    """Build the case-table pair and verify all of its conditions."""
    pair = appendix_basis_pair(family, v, w)
    return check_pair_conditions(family, pair, v, w)


# -- polytope points and the interior certificate ----------------------------


@dataclass(frozen=True)
class PolytopePoint:
    """theta: E -> [0,1] with an exact convex certificate over bases."""

    theta: tuple[Fraction, ...]
    certificate: tuple[tuple[frozenset[int], Fraction], ...]


class CertificateError(ValueError):
    pass


def validate_point(family: VectorFamily, point: PolytopePoint) -> None:
    """Re-derive everything: weights, bases, and the weighted indicator sum."""
    if any(t < 0 or t > 1 for t in point.theta):
        raise CertificateError("theta leaves [0,1]")
    total = sum((wt for _, wt in point.certificate), Fraction(0))
    if total != 1:
        raise CertificateError(f"weights sum to {total}, not 1")
    acc = [Fraction(0)] * len(family)
    for basis, wt in point.certificate:
        if wt < 0:
            raise CertificateError("negative weight")
        if not is_basis(family, basis):
            raise CertificateError("certificate uses a non-basis")
        for i in basis:
            acc[i] += wt
    if tuple(acc) != point.theta:
        raise CertificateError("weighted indicators do not reproduce theta")


def phi_point(family: VectorFamily, v: Label, w: Label) -> PolytopePoint:
    """Phi_{v,w} = (chi_B1 + chi_B2)/2: value 1 at v, 0 at w, 1/2 elsewhere."""
    pair = appendix_basis_pair(family, v, w)
    half = Fraction(1, 2)
    theta = [half] * len(family)
    theta[family.index_of(v)] = Fraction(1)
    theta[family.index_of(w)] = Fraction(0)
    point = PolytopePoint(tuple(theta), ((pair.b1, half), (pair.b2, half)))
    validate_point(family, point)
    return point


@dataclass(frozen=True)
class GeomReport:
    family: str
    N: int
    pairs_total: int
    pairs_passed: int
    failures: tuple[PairReport, ...]
    center_certified: bool
    interior_rank: int
    interior_rank_needed: int

    @property
    def passed(self) -> bool:
        return (
            self.pairs_passed == self.pairs_total
            and self.center_certified
            and self.interior_rank == self.interior_rank_needed
        )


def verify_lemma_geom(N: int, which_family: str) -> GeomReport:
    """All ordered pairs, the exact constant-1/2 certificate, interior rank.

    The constant-1/2 point is written as the uniform average of all
    Phi_{v,w} (each family member is v in |E|-1 pairs, w in |E|-1 pairs and
    1/2 elsewhere, so the average is exactly 1/2 coordinatewise).  Interior
    evidence: the certificate weights are strictly positive on a basis set
    whose indicator differences span the direction space of the hyperplane
    {sum theta = dim} (rank |E|-1 over Q).
    """
    family = build_E1(N) if which_family.upper() == "E1" else build_E2(N)
    labels = family.labels
    size = len(family)
    failures = []
    passed = 0
    weights: dict[frozenset[int], Fraction] = {}
    per_pair = Fraction(1, 2 * size * (size - 1))
    for v in labels:
        for w in labels:
            if v == w:
                continue
            pair = appendix_basis_pair(family, v, w)
            rep = check_pair_conditions(family, pair, v, w)
            if rep.passed:
                passed += 1
            else:
                failures.append(rep)
            for b in (pair.b1, pair.b2):
                weights[b] = weights.get(b, Fraction(0)) + per_pair

    center = PolytopePoint(
        tuple(Fraction(1, 2) for _ in range(size)), tuple(weights.items())
    )
    try:
        validate_point(family, center)
        center_ok = all(wt > 0 for wt in weights.values())
    except CertificateError:
        center_ok = False

    support = sorted(weights.keys(), key=sorted)
    base = support[0]

    def indicator(b: frozenset[int]) -> tuple[Fraction, ...]:
        return tuple(Fraction(1 if i in b else 0) for i in range(size))

    base_ind = indicator(base)
    diffs = [
        tuple(a - c for a, c in zip(indicator(b), base_ind)) for b in support[1:]
    ]
    rank = rational_rank(diffs) if diffs else 0

    return GeomReport(
        family=family.name,
        N=N,
        pairs_total=size * (size - 1),
        pairs_passed=passed,
        failures=tuple(failures),
        center_certified=center_ok,
        interior_rank=rank,
        interior_rank_needed=size - 1,
    )
