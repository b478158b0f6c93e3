"""Kernel backend selection.

The compiled extension (``_fast``) is preferred; the numpy implementation
in ``pure`` is the fallback. ``HELMGREEN_PURE=1`` forces the fallback,
which is what the kernel benchmark uses to compare the two.
"""

import os

import numpy as np

from ..errors import SingularMatrixError
from . import pure

BACKEND = "pure"
_tridiag_solve = pure.tridiag_solve
_tridiag_solve_batch = pure.tridiag_solve_batch

if os.environ.get("HELMGREEN_PURE", "0") != "1":
    try:
        from . import _fast

        BACKEND = "compiled"
        _tridiag_solve = _fast.tridiag_solve
        _tridiag_solve_batch = _fast.tridiag_solve_batch
    except ImportError:
        pass


def tridiag_solve(dl, d, du, b):
    """Solve one tridiagonal system; b may carry multiple RHS columns."""
    try:
        return _tridiag_solve(dl, d, du, b)
    except Exception as exc:
        if isinstance(exc, SingularMatrixError):
            raise
        raise SingularMatrixError("tridiagonal factorization broke down") from None


def tridiag_solve_batch(dl, du, diags, rhs):
    """Solve a batch of systems sharing off-diagonals (shape (B, N))."""
    try:
        return _tridiag_solve_batch(dl, du, diags, rhs)
    except Exception as exc:
        if isinstance(exc, SingularMatrixError):
            raise
        raise SingularMatrixError("tridiagonal factorization broke down") from None


def cyclic_tridiag_solve(dl, d, du, corner_lo, corner_hi, b):
    """Cyclic tridiagonal solve (Sherman-Morrison on the wrap entries)."""
    d = np.asarray(d, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    n = d.shape[0]
    gamma = -d[0] if abs(d[0]) > 1e-300 else 1.0 + 0.0j
    dmod = d.copy()
    dmod[0] -= gamma
    dmod[-1] -= corner_lo * corner_hi / gamma
    u = np.zeros(n, dtype=np.complex128)
    u[0] = gamma
    u[-1] = corner_lo
    if b.ndim == 1:
        rhs = np.stack([b, u], axis=-1)
        sol = tridiag_solve(dl, dmod, du, rhs)
        y, q = sol[:, 0], sol[:, 1]
        vy = y[0] + corner_hi / gamma * y[-1]
        vq = q[0] + corner_hi / gamma * q[-1]
        return y - q * (vy / (1.0 + vq))
    rhs = np.concatenate([b, u[:, None]], axis=1)
    sol = tridiag_solve(dl, dmod, du, rhs)
    y, q = sol[:, :-1], sol[:, -1]
    vy = y[0] + corner_hi / gamma * y[-1]
    vq = q[0] + corner_hi / gamma * q[-1]
    return y - q[:, None] * (vy / (1.0 + vq))[None, :]
