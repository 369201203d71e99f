"""Compare the compiled kernel backend against the pure-numpy fallback.

The sweep's per-k hot loop is FFT-dominated; the compiled extension fuses
the elementwise source assembly and pairing reductions around the FFTs.
This script times the primitives in isolation and a full small sweep under
both backends:

    python benchmarks/bench_backends.py

Select a backend for a whole process with DSCATTER_BACKEND=pure|compiled.
"""

import subprocess
import sys
import time

import numpy as np


def time_call(fn, *args, repeat=200):
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def bench_primitives():
    from dscatter import _kernels_pure as pure

    try:
        from dscatter import _fastkern as fast
    except ImportError:
        print("compiled backend not built; primitive comparison skipped")
        return

    rng = np.random.default_rng(0)
    for n, batch in ((128, 1), (128, 4), (256, 1)):
        q = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if batch == 1:
            rp = np.exp(1j * rng.standard_normal(n))
            cp = np.exp(1j * rng.standard_normal(n))
            f = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            out = np.zeros((2 * n, 2 * n), dtype=complex)
        else:
            rp = np.exp(1j * rng.standard_normal((batch, n)))
            cp = np.exp(1j * rng.standard_normal((batch, n)))
            f = rng.standard_normal((batch, n, n)) + 1j * rng.standard_normal((batch, n, n))
            out = np.zeros((batch, 2 * n, 2 * n), dtype=complex)
        t_fill_p = time_call(pure.fill_tk_source, out, rp, cp, q, f)
        t_fill_c = time_call(fast.fill_tk_source, out, rp, cp, q, f)
        t_pair_p = time_call(pure.pair_sum, rp, cp, q, f)
        t_pair_c = time_call(fast.pair_sum, rp, cp, q, f)
        fft_in = out.copy()
        t_fft = time_call(np.fft.fft2, fft_in, None, (-2, -1), repeat=20)
        print(
            f"n={n} batch={batch}: fill pure {1e3 * t_fill_p:7.3f} ms | "
            f"compiled {1e3 * t_fill_c:7.3f} ms ({t_fill_p / t_fill_c:4.1f}x)   "
            f"pair pure {1e3 * t_pair_p:7.3f} ms | compiled {1e3 * t_pair_c:7.3f} ms "
            f"({t_pair_p / t_pair_c:4.1f}x)   [one padded fft2: {1e3 * t_fft:6.2f} ms]"
        )


SWEEP_SNIPPET = r"""
import time
import numpy as np
import dscatter as ds

spec = ds.GridSpec(128, 8.0)
q = ds.make_grid(spec, lambda x1, x2: 0.5 * np.exp(-(x1**2 + x2**2)))
kspec = ds.GridSpec(16, 2.0)
ds.scatter_grid(q, ds.GridSpec(16, 2.0), ds.SolverOptions(residual_tolerance=1e-8))  # warm plans
t0 = time.perf_counter()
r, _ = ds.scatter_grid(q, kspec, ds.SolverOptions(residual_tolerance=1e-8))
dt = time.perf_counter() - t0
print(f"  backend={ds.backend_name():8s} 16x16 sweep at n=128: {dt:6.2f} s "
      f"({dt / 256 * 1e3:5.1f} ms per k-point)  checksum {abs(r.values.sum()):.12f}")
"""


def bench_sweep():
    for backend in ("compiled", "pure"):
        proc = subprocess.run(
            [sys.executable, "-c", SWEEP_SNIPPET],
            env={"DSCATTER_BACKEND": backend, "PATH": "/usr/bin:/bin"},
            capture_output=True,
            text=True,
        )
        out = proc.stdout.strip() or proc.stderr.strip()
        print(out)


if __name__ == "__main__":
    print("== primitive kernels ==")
    bench_primitives()
    print("== end-to-end sweep ==")
    bench_sweep()
