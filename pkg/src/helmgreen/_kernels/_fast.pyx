# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tridiagonal kernels (Thomas recurrence, single and batched)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double _PIVOT_FLOOR = 1e-300


class _Singular(Exception):
    pass


def tridiag_solve(dl, d, du, b):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] dlv = np.ascontiguousarray(dl, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] dv = np.ascontiguousarray(d, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] duv = np.ascontiguousarray(du, dtype=np.complex128)
    b_arr = np.asarray(b, dtype=np.complex128)
    squeeze = b_arr.ndim == 1
    if squeeze:
        b_arr = b_arr[:, None]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] x = np.ascontiguousarray(b_arr).copy()
    cdef Py_ssize_t n = dv.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cp = np.empty(n - 1, dtype=np.complex128)
    cdef double complex piv
    cdef Py_ssize_t i, j
    piv = dv[0]
    if abs(piv) < _PIVOT_FLOOR:
        raise _Singular()
    cp[0] = duv[0] / piv
    for j in range(m):
        x[0, j] = x[0, j] / piv
    for i in range(1, n):
        piv = dv[i] - dlv[i - 1] * cp[i - 1]
        if abs(piv) < _PIVOT_FLOOR:
            raise _Singular()
        if i < n - 1:
            cp[i] = duv[i] / piv
        for j in range(m):
            x[i, j] = (x[i, j] - dlv[i - 1] * x[i - 1, j]) / piv
    for i in range(n - 2, -1, -1):
        for j in range(m):
            x[i, j] = x[i, j] - cp[i] * x[i + 1, j]
    if squeeze:
        return np.asarray(x)[:, 0]
    return np.asarray(x)


def tridiag_solve_batch(dl, du, diags, rhs):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] dlv = np.ascontiguousarray(dl, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] duv = np.ascontiguousarray(du, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] dv = np.ascontiguousarray(diags, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] x = np.ascontiguousarray(rhs, dtype=np.complex128).copy()
    cdef Py_ssize_t nb = dv.shape[0]
    cdef Py_ssize_t n = dv.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cp = np.empty(n - 1, dtype=np.complex128)
    cdef double complex piv
    cdef Py_ssize_t b, i
    for b in range(nb):
        piv = dv[b, 0]
        if abs(piv) < _PIVOT_FLOOR:
            raise _Singular()
        cp[0] = duv[0] / piv
        x[b, 0] = x[b, 0] / piv
        for i in range(1, n):
            piv = dv[b, i] - dlv[i - 1] * cp[i - 1]
            if abs(piv) < _PIVOT_FLOOR:
                raise _Singular()
            if i < n - 1:
                cp[i] = duv[i] / piv
            x[b, i] = (x[b, i] - dlv[i - 1] * x[b, i - 1]) / piv
        for i in range(n - 2, -1, -1):
            x[b, i] = x[b, i] - cp[i] * x[b, i + 1]
    return np.asarray(x)
