"""Pure-numpy implementations of the hot solver kernels.

These mirror the signatures of the compiled extension in ``_fast.pyx``.
The batched variants vectorize the Thomas recurrence across the batch
axis, so the Python-level loop is only over the N grid points.
"""

import numpy as np

from ..errors import SingularMatrixError

_PIVOT_FLOOR = 1e-300


def tridiag_solve(dl, d, du, b):
    """Solve a (complex) tridiagonal system by the Thomas algorithm.

    dl, du : sub/super-diagonals, length N-1
    d      : diagonal, length N
    b      : right-hand side, shape (N,) or (N, nrhs)
    """
    d = np.asarray(d, dtype=np.complex128)
    dl = np.asarray(dl, dtype=np.complex128)
    du = np.asarray(du, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    n = d.shape[0]
    cp = np.empty(n - 1, dtype=np.complex128)
    x = b.copy()
    piv = d[0]
    if abs(piv) < _PIVOT_FLOOR:
        raise SingularMatrixError("zero pivot in tridiagonal factorization")
    cp[0] = du[0] / piv
    x[0] = x[0] / piv
    for i in range(1, n):
        piv = d[i] - dl[i - 1] * cp[i - 1]
        if abs(piv) < _PIVOT_FLOOR:
            raise SingularMatrixError("zero pivot in tridiagonal factorization")
        if i < n - 1:
            cp[i] = du[i] / piv
        x[i] = (x[i] - dl[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - cp[i] * x[i + 1]
    return x


def tridiag_solve_batch(dl, du, diags, rhs):
    """Solve B independent tridiagonal systems sharing off-diagonals.

    dl, du : shared sub/super-diagonals, length N-1
    diags  : per-system diagonals, shape (B, N)
    rhs    : per-system right-hand sides, shape (B, N)
    """
    dl = np.asarray(dl, dtype=np.complex128)
    du = np.asarray(du, dtype=np.complex128)
    diags = np.asarray(diags, dtype=np.complex128)
    x = np.array(rhs, dtype=np.complex128, copy=True)
    nb, n = diags.shape
    cp = np.empty((nb, n - 1), dtype=np.complex128)
    piv = diags[:, 0].copy()
    _check_batch_pivots(piv)
    cp[:, 0] = du[0] / piv
    x[:, 0] /= piv
    for i in range(1, n):
        piv = diags[:, i] - dl[i - 1] * cp[:, i - 1]
        _check_batch_pivots(piv)
        if i < n - 1:
            cp[:, i] = du[i] / piv
        x[:, i] = (x[:, i] - dl[i - 1] * x[:, i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[:, i] -= cp[:, i] * x[:, i + 1]
    return x


def _check_batch_pivots(piv):
    if np.any(np.abs(piv) < _PIVOT_FLOOR):
        raise SingularMatrixError("zero pivot in batched tridiagonal factorization")
