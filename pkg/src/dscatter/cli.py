"""Command line: gen, fft, cauchy, scatter, inverse, expand, check, matroid, norms.

Every run writes a JSON manifest (inputs by content hash, parameters,
per-check results, wall time).  Exit codes: 0 ok, 2 usage, 3 io/format,
4 numeric failure, 5 check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cauchy import (
    cauchy_transform,
    conj_cauchy_transform,
    dbar,
    fractional_integral,
    partial,
)
from .fourier import dual_spec, forward_transform, inverse_transform
from .grids import (
    ComplexGrid,
    GridFormatError,
    GridSpec,
    GridSpecError,
    export_csv,
    load_grid,
    make_grid,
    save_grid,
    zero_grid,
)
from .matroid import build_E1, build_E2, verify_lemma_geom, verify_pair
from .scattering import (
    SolveFailure,
    SolverOptions,
    SweepError,
    inverse_scatter,
    scatter_grid,
)
from .series import dbar_k_residual, expand
from .sobolev import embedding_report, lp_norm

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
EXIT_CHECK = 5

CONFIG_KEYS = ("tol", "max_iter", "threads", "kn", "kL", "xn", "xL", "N", "threshold")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def load_config(path) -> dict:
    """Parse 'key = value' lines; '#' starts a comment; keys must be known."""
    params: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"config: {exc}", EXIT_IO) from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"config line {lineno}: expected 'key = value'", EXIT_USAGE)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise CliError(f"config line {lineno}: unknown key {key!r}", EXIT_USAGE)
        if key in params:
            raise CliError(f"config line {lineno}: duplicate key {key!r}", EXIT_USAGE)
        params[key] = value
    return params


def _resolve(args, key: str, cast, default):
    """Precedence: explicit flag > config file > default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    cfg = getattr(args, "_config", {})
    if key in cfg:
        try:
            return cast(cfg[key])
        except ValueError as exc:
            raise CliError(f"config value for {key!r}: {exc}", EXIT_USAGE) from exc
    return default


def _solver_options(args) -> SolverOptions:
    return SolverOptions(
        max_iterations=_resolve(args, "max_iter", int, 200),
        residual_tolerance=_resolve(args, "tol", float, 1e-10),
    )


def _threads(args) -> int:
    t = _resolve(args, "threads", int, None)
    if t is None:
        t = int(os.environ.get("DSCATTER_THREADS", "1"))
    if t < 1:
        raise CliError("threads must be >= 1", EXIT_USAGE)
    return t


def _load(path) -> ComplexGrid:
    try:
        return load_grid(path)
    except FileNotFoundError as exc:
        raise CliError(f"missing file: {path}", EXIT_IO) from exc
    except (OSError, GridFormatError, GridSpecError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_IO) from exc


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Manifest:
    def __init__(self, subcommand: str, args):
        self.data = {
            "subcommand": subcommand,
            "tool_version": __version__,
            "inputs": {},
            "parameters": {},
            "results": {},
            "wall_time_s": None,
        }
        self._t0 = time.perf_counter()
        self._path = getattr(args, "manifest", None)
        self._default_anchor = getattr(args, "out", None)

    def add_input(self, path) -> None:
        self.data["inputs"][str(path)] = _digest(path)

    def set_params(self, **kw) -> None:
        self.data["parameters"].update(kw)

    def set_results(self, **kw) -> None:
        self.data["results"].update(kw)

    def write(self) -> None:
        self.data["wall_time_s"] = round(time.perf_counter() - self._t0, 6)
        if self._path:
            path = Path(self._path)
        elif self._default_anchor:
            path = Path(str(self._default_anchor) + ".manifest.json")
        else:
            path = Path("dscatter-manifest.json")
        path.write_text(json.dumps(self.data, sort_keys=True, indent=2) + "\n")


# -- subcommands -------------------------------------------------------------


def cmd_gen(args) -> int:
    man = Manifest("gen", args)
    spec = GridSpec(args.n, args.L)
    if args.kind == "gaussian":
        amp, cx, cy = args.amp, args.center[0], args.center[1]
        grid = make_grid(
            spec, lambda x1, x2: amp * np.exp(-((x1 - cx) ** 2 + (x2 - cy) ** 2))
        )
    elif args.kind == "zero":
        grid = zero_grid(spec)
    else:
        raise CliError(f"unknown kind {args.kind!r}", EXIT_USAGE)
    save_grid(grid, args.out)
    man.set_params(kind=args.kind, amp=args.amp, n=args.n, L=args.L,
                   center=list(args.center))
    man.set_results(l2=grid.l2())
    man.write()
    return EXIT_OK


def cmd_fft(args) -> int:
    man = Manifest("fft", args)
    grid = _load(args.input)
    man.add_input(args.input)
    out = inverse_transform(grid) if args.inverse else forward_transform(grid)
    save_grid(out, args.out)
    if args.csv:
        Path(args.csv).write_text(export_csv(out))
    man.set_params(inverse=bool(args.inverse))
    man.set_results(l2_in=grid.l2(), l2_out=out.l2())
    man.write()
    return EXIT_OK


def cmd_cauchy(args) -> int:
    man = Manifest("cauchy", args)
    grid = _load(args.input)
    man.add_input(args.input)
    ops = {
        "cauchy": cauchy_transform,
        "conj": conj_cauchy_transform,
        "i1": fractional_integral,
        "dbar": dbar,
        "partial": partial,
    }
    out = ops[args.op](grid)
    save_grid(out, args.out)
    man.set_params(op=args.op)
    man.set_results(l2_out=out.l2())
    man.write()
    return EXIT_OK


def cmd_norms(args) -> int:
    man = Manifest("norms", args)
    grid = _load(args.input)
    man.add_input(args.input)
    rep = embedding_report(grid, args.alpha, args.beta)
    payload = {
        "l2": lp_norm(grid, 2),
        "sobolev": rep.sobolev,
        "embedding_table": [{"p": p, "norm": v} for p, v in rep.table],
    }
    print(json.dumps(payload, sort_keys=True))
    man.set_params(alpha=args.alpha, beta=args.beta)
    man.set_results(**payload)
    man.write()
    return EXIT_OK


def cmd_scatter(args) -> int:
    man = Manifest("scatter", args)
    q = _load(args.q)
    man.add_input(args.q)
    opts = _solver_options(args)
    kspec = GridSpec(_resolve(args, "kn", int, q.spec.n),
                     _resolve(args, "kL", float, dual_spec(q.spec).L))
    try:
        r, reports = scatter_grid(q, kspec, opts, threads=_threads(args))
    except SweepError as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from exc
    save_grid(r, args.out)
    failed = sum(0 if rep.converged else 1 for rep in reports)
    man.set_params(kn=kspec.n, kL=kspec.L, tol=opts.residual_tolerance,
                   max_iter=opts.max_iterations, threads=_threads(args))
    man.set_results(failed_points=failed, l2=r.l2())
    man.write()
    return EXIT_OK


def cmd_inverse(args) -> int:
    man = Manifest("inverse", args)
    r = _load(args.r)
    man.add_input(args.r)
    opts = _solver_options(args)
    xspec = GridSpec(_resolve(args, "xn", int, r.spec.n),
                     _resolve(args, "xL", float, dual_spec(r.spec).L))
    try:
        q, reports = inverse_scatter(r, xspec, opts, threads=_threads(args))
    except SweepError as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from exc
    save_grid(q, args.out)
    failed = sum(0 if rep.converged else 1 for rep in reports)
    man.set_params(xn=xspec.n, xL=xspec.L, tol=opts.residual_tolerance,
                   max_iter=opts.max_iterations, threads=_threads(args))
    man.set_results(failed_points=failed, l2=q.l2())
    man.write()
    return EXIT_OK


def cmd_expand(args) -> int:
    man = Manifest("expand", args)
    q = _load(args.q)
    man.add_input(args.q)
    opts = _solver_options(args)
    n_terms = _resolve(args, "N", int, 3)
    kspec = GridSpec(_resolve(args, "kn", int, 16),
                     _resolve(args, "kL", float, 2.0))
    try:
        result = expand(q, kspec, n_terms, opts, threads=_threads(args))
    except SolveFailure as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from exc
    prefix = Path(args.out_prefix)
    term_norms = []
    for j, term in enumerate(result.terms):
        path = prefix.parent / f"{prefix.name}{j}.cgrd"
        save_grid(term, path)
        term_norms.append(term.l2())
    rem_path = prefix.parent / "remainder.cgrd"
    save_grid(result.remainder, rem_path)
    man.set_params(N=n_terms, kn=kspec.n, kL=kspec.L, tol=opts.residual_tolerance)
    man.set_results(
        term_l2=term_norms,
        remainder_l2=result.remainder.l2(),
        identity_defect=result.max_identity_defect,
    )
    man.write()
    payload = {"terms": term_norms, "remainder": result.remainder.l2(),
               "identity_defect": result.max_identity_defect}
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def cmd_check(args) -> int:
    man = Manifest(f"check-{args.what}", args)
    q = _load(args.q)
    man.add_input(args.q)
    opts = _solver_options(args)
    threads = _threads(args)
    failed_points = 0
    if args.what == "plancherel":
        kspec = GridSpec(_resolve(args, "kn", int, q.spec.n),
                         _resolve(args, "kL", float, dual_spec(q.spec).L))
        r, reports = scatter_grid(q, kspec, opts, threads=threads)
        failed_points = sum(0 if rep.converged else 1 for rep in reports)
        qn, rn = q.l2(), r.l2()
        defect = abs(qn ** 2 - rn ** 2) / qn ** 2 if qn > 0 else 0.0
        threshold = _resolve(args, "threshold", float, 1e-3)
        payload = {"defect": defect, "failed_points": failed_points,
                   "l2_q": qn, "l2_r": rn}
        ok = defect < threshold
    elif args.what == "roundtrip":
        kspec = GridSpec(_resolve(args, "kn", int, q.spec.n),
                         _resolve(args, "kL", float, dual_spec(q.spec).L))
        r, rep1 = scatter_grid(q, kspec, opts, threads=threads)
        q2, rep2 = inverse_scatter(r, q.spec, opts, threads=threads)
        failed_points = sum(0 if rep.converged else 1 for rep in rep1 + rep2)
        diff = q2.add(q.scale(-1.0)).l2()
        rel = diff / q.l2() if q.l2() > 0 else diff
        threshold = _resolve(args, "threshold", float, 1e-2)
        payload = {"relative_error": rel, "failed_points": failed_points}
        ok = rel < threshold
    elif args.what == "dbar-k":
        kspec = GridSpec(_resolve(args, "kn", int, 16),
                         _resolve(args, "kL", float, 1.0))
        rep = dbar_k_residual(q, kspec, opts, threads=threads)
        threshold = _resolve(args, "threshold", float, 5e-2)
        payload = {"residual": rep.residual, "k_step": rep.k_step,
                   "failed_points": 0}
        ok = rep.residual < threshold
    else:
        raise CliError(f"unknown check {args.what!r}", EXIT_USAGE)
    print(json.dumps(payload, sort_keys=True))
    man.set_params(what=args.what, threads=threads)
    man.set_results(passed=ok, **payload)
    man.write()
    return EXIT_OK if ok else EXIT_CHECK


def cmd_matroid(args) -> int:
    man = Manifest("matroid", args)
    family = build_E1(args.N) if args.family == "E1" else build_E2(args.N)
    report = verify_lemma_geom(args.N, args.family)
    rows = []
    for v in family.labels:
        for w in family.labels:
            if v == w:
                continue
            rep = verify_pair(family, v, w)
            rows.append({"v": list(v), "w": list(w), "passed": rep.passed,
                         "failure": rep.failure})
    payload = {
        "family": args.family,
        "N": args.N,
        "pairs_total": report.pairs_total,
        "pairs_passed": report.pairs_passed,
        "center_certified": report.center_certified,
        "interior_rank": report.interior_rank,
        "interior_rank_needed": report.interior_rank_needed,
        "passed": report.passed,
    }
    if args.json:
        payload["pairs"] = rows
        print(json.dumps(payload, sort_keys=True))
    else:
        for row in rows:
            status = "pass" if row["passed"] else f"FAIL ({row['failure']})"
            print(f"{row['v']} / {row['w']}: {status}")
        print(
            f"{args.family} N={args.N}: {report.pairs_passed}/{report.pairs_total} "
            f"pairs, center certificate {'ok' if report.center_certified else 'BAD'}, "
            f"interior rank {report.interior_rank}/{report.interior_rank_needed}"
        )
    man.set_params(family=args.family, N=args.N)
    man.set_results(**{k: v for k, v in payload.items() if k != "pairs"})
    man.write()
    return EXIT_OK if report.passed else EXIT_CHECK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="dscatter", description=__doc__)
    top.add_argument("--config", help="key = value parameter file")
    top.add_argument("--manifest", help="where to write the run manifest")
    sub = top.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="generate a potential grid")
    p.add_argument("--kind", choices=("gaussian", "zero"), default="gaussian")
    p.add_argument("--amp", type=float, default=1.0)
    p.add_argument("--center", type=float, nargs=2, default=(0.0, 0.0),
                   metavar=("X1", "X2"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fft", help="forward or inverse transform of a grid")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--inverse", action="store_true")
    p.add_argument("--csv", help="also export the output as CSV")
    p.set_defaults(func=cmd_fft)

    p = sub.add_parser("cauchy", help="Cauchy-transform family operators")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--op", choices=("cauchy", "conj", "i1", "dbar", "partial"),
                   default="cauchy")
    p.set_defaults(func=cmd_cauchy)

    p = sub.add_parser("norms", help="weighted Sobolev / Lebesgue diagnostics")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.5)
    p.set_defaults(func=cmd_norms)

    def solver_flags(p):
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("scatter", help="R(q) on a k-lattice")
    p.add_argument("--q", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kn", type=int, default=None)
    p.add_argument("--kL", type=float, default=None)
    solver_flags(p)
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("inverse", help="inverse map on an x-lattice")
    p.add_argument("--r", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--xn", type=int, default=None)
    p.add_argument("--xL", type=float, default=None)
    solver_flags(p)
    p.set_defaults(func=cmd_inverse)

    p = sub.add_parser("expand", help="series terms and remainder on a k-lattice")
    p.add_argument("--q", required=True)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--kn", type=int, default=None)
    p.add_argument("--kL", type=float, default=None)
    p.add_argument("--out-prefix", dest="out_prefix", required=True)
    solver_flags(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("check", help="plancherel | roundtrip | dbar-k")
    p.add_argument("what", choices=("plancherel", "roundtrip", "dbar-k"))
    p.add_argument("--q", required=True)
    p.add_argument("--kn", type=int, default=None)
    p.add_argument("--kL", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    solver_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("matroid", help="verify the appendix families exactly")
    p.add_argument("--family", choices=("E1", "E2"), required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_matroid)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config = load_config(args.config) if args.config else {}
        return args.func(args)
    except CliError as exc:
        print(f"dscatter: {exc}", file=sys.stderr)
        return exc.code
    except (GridFormatError, GridSpecError) as exc:
        print(f"dscatter: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolveFailure as exc:
        print(f"dscatter: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"dscatter: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
