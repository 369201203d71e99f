# Fused per-k kernels for the scattering sweep hot loop.
# The FFTs stay in numpy (pocketfft); these loops remove the elementwise
# temporaries around them.

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef double complex zdouble


def fill_tk_source(cnp.ndarray out, cnp.ndarray rowphase, cnp.ndarray colphase,
                   cnp.ndarray q, cnp.ndarray f):
    if out.ndim == 2:
        _fill_one(out, rowphase, colphase, q, f)
    else:
        _fill_batch(out, rowphase, colphase, q, f)


def pair_sum(cnp.ndarray rowphase, cnp.ndarray colphase,
             cnp.ndarray q, cnp.ndarray mu):
    if mu.ndim == 2:
        return _pair_one(rowphase, colphase, q, mu)
    cdef Py_ssize_t b, nb = mu.shape[0]
    res = np.empty(nb, dtype=np.complex128)
    for b in range(nb):
        res[b] = _pair_one(rowphase[b], colphase[b], q, mu[b])
    return res


def _fill_one(zdouble[:, ::1] out, const zdouble[::1] rp, const zdouble[::1] cp,
              const zdouble[:, ::1] q, const zdouble[:, ::1] f):
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t i, j
    cdef zdouble r
    with nogil:
        for j in range(n):
            r = 0.5 * rp[j]
            for i in range(n):
                out[j, i] = r * cp[i] * q[j, i] * f[j, i].conjugate()


def _fill_batch(zdouble[:, :, ::1] out, const zdouble[:, ::1] rp, const zdouble[:, ::1] cp,
                const zdouble[:, ::1] q, const zdouble[:, :, ::1] f):
    cdef Py_ssize_t nb = out.shape[0]
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t b, i, j
    cdef zdouble r
    with nogil:
        for b in range(nb):
            for j in range(n):
                r = 0.5 * rp[b, j]
                for i in range(n):
                    out[b, j, i] = r * cp[b, i] * q[j, i] * f[b, j, i].conjugate()


def _pair_one(const zdouble[::1] rp, const zdouble[::1] cp, const zdouble[:, ::1] q,
              const zdouble[:, ::1] mu):
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t i, j
    cdef zdouble acc = 0
    cdef zdouble row
    with nogil:
        for j in range(n):
            row = 0
            for i in range(n):
                row = row + cp[i] * q[j, i] * mu[j, i].conjugate()
            acc = acc + rp[j] * row
    return complex(acc)
