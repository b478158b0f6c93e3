"""Discretized 1D Helmholtz operators at complex frequency.

The scalar reduction of -curl curl for transverse fields is +d^2/dx^2,
discretized with 2nd-order central differences. Dirichlet walls model the
closed cavity (tridiagonal, complex-symmetric); Bloch boundaries wrap the
stencil with quasi-periodic phases (cyclic tridiagonal).

Operator kinds:
  dispersive(z)        diag  z^2 eps(x, z) mu0       - 2/h^2
  two_freq(z, xi)      diag  z^2 eps0 mu0 + z mu0 xi [eps(x, xi) - eps0] - 2/h^2
  nondispersive(z, w0) diag  z^2 eps_d(x) mu0        - 2/h^2
  bloch(z, k)          dispersive diagonal, cyclic wrap entries exp(-+ikL)/h^2
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _kernels, dispersion
from .errors import ConfigError, DomainError, PeriodicityError
from .dispersion import build_nondispersive, density_eval_array

KINDS = ("dispersive", "two_freq", "nondispersive", "bloch")


@dataclass(frozen=True)
class Grid1D:
    L: float
    N: int
    boundary: str = "dirichlet"
    bloch_k: complex = 0.0

    def __post_init__(self):
        if self.N < 8:
            raise ConfigError("grid needs at least 8 points")
        if self.L <= 0:
            raise ConfigError("domain length must be > 0")
        if self.boundary not in ("dirichlet", "bloch"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")

    @property
    def h(self):
        if self.boundary == "dirichlet":
            return self.L / (self.N + 1)
        return self.L / self.N

    @property
    def points(self):
        if self.boundary == "dirichlet":
            return self.h * np.arange(1, self.N + 1)
        return self.h * np.arange(self.N)


@dataclass(frozen=True)
class DiscreteHelmholtz:
    grid: Grid1D
    model: dispersion.PermittivityModel
    kind: str
    z: complex
    xi: complex = None
    omega0: float = None
    diag: np.ndarray = field(repr=False, default=None)
    offdiag: np.ndarray = field(repr=False, default=None)  # shared sub/super diag
    corner_lo: complex = 0.0  # A[N-1, 0] (bloch only)
    corner_hi: complex = 0.0  # A[0, N-1] (bloch only)

    def dense(self):
        n = self.grid.N
        m = np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        if self.grid.boundary == "bloch":
            m[n - 1, 0] += self.corner_lo
            m[0, n - 1] += self.corner_hi
        return m

    def solve(self, source):
        """Banded solve H x = source; source may carry multiple columns."""
        if self.grid.boundary == "bloch":
            return _kernels.cyclic_tridiag_solve(
                self.offdiag, self.diag, self.offdiag,
                self.corner_lo, self.corner_hi, source,
            )
        return _kernels.tridiag_solve(self.offdiag, self.diag, self.offdiag, source)

    def solve_adjoint(self, source):
        """Solve H^dagger x = source."""
        b = np.conj(source)
        if self.grid.boundary == "bloch":
            # transpose swaps the wrap corners; off-diagonals are equal
            x = _kernels.cyclic_tridiag_solve(
                self.offdiag, self.diag, self.offdiag,
                self.corner_hi, self.corner_lo, b,
            )
        else:
            x = _kernels.tridiag_solve(self.offdiag, self.diag, self.offdiag, b)
        return np.conj(x)

    def residual(self, x, source):
        ax = self.diag * x
        ax[:-1] += self.offdiag * x[1:]
        ax[1:] += self.offdiag * x[:-1]
        if self.grid.boundary == "bloch":
            ax[-1] += self.corner_lo * x[0]
            ax[0] += self.corner_hi * x[-1]
        denom = np.linalg.norm(source)
        return float(np.linalg.norm(ax - source) / denom) if denom else 0.0


@dataclass(frozen=True)
class GreenSamples:
    grid: Grid1D
    z: complex
    values: np.ndarray = field(repr=False, default=None)


def permittivity_profile(model, x_points, z):
    """eps(x_i, z) over the grid points, grouped by layer density."""
    out = np.full(len(x_points), complex(model.background))
    eps0 = model.units.eps0
    cache = {}
    for i, x in enumerate(x_points):
        density = model.density_at(x)
        if density.is_vacuum:
            continue
        key = id(density)
        if key not in cache:
            cache[key] = complex(density_eval_array(density, np.asarray(z), eps0))
        out[i] += cache[key]
    return out


def _check_kind_domain(kind, z, xi, model, grid):
    c = model.units.c
    if kind in ("dispersive", "nondispersive"):
        if z.imag < 0:
            raise DomainError(f"{kind} operator requires Im z >= 0")
        if kind == "dispersive" and z.imag == 0 and not model.damped:
            raise DomainError("real-axis assembly requires a damped medium")
    elif kind == "two_freq":
        if z.imag <= 0 or xi.imag <= 0:
            raise DomainError("two-frequency operator requires Im z > 0 and Im xi > 0")
    elif kind == "bloch":
        k = complex(grid.bloch_k)
        if z.imag <= c * abs(k.imag):
            raise DomainError(
                f"Bloch operator requires Im z > c |Im k| = {c * abs(k.imag)}"
            )
    else:
        raise ConfigError(f"unknown operator kind {kind!r}")


def assemble(grid, model, kind, z, xi=None, omega0=None):
    """Banded matrix for one operator instance. Deterministic in its inputs."""
    z = complex(z)
    xi = complex(xi) if xi is not None else None
    _check_kind_domain(kind, z, xi, model, grid)
    h = grid.h
    x = grid.points
    eps0 = model.units.eps0
    mu0 = model.units.mu0
    offdiag = np.full(grid.N - 1, 1.0 / h**2, dtype=np.complex128)
    corner_lo = corner_hi = 0.0
    if kind in ("dispersive", "bloch"):
        if kind == "bloch":
            if grid.boundary != "bloch":
                raise ConfigError("bloch kind requires a bloch grid")
            _check_periodic(model, grid)
            k = complex(grid.bloch_k)
            corner_lo = np.exp(1j * k * grid.L) / h**2
            corner_hi = np.exp(-1j * k * grid.L) / h**2
        elif grid.boundary != "dirichlet":
            raise ConfigError("dispersive kind requires a dirichlet grid")
        diag = z * z * mu0 * permittivity_profile(model, x, z) - 2.0 / h**2
    elif kind == "two_freq":
        eps_xi = permittivity_profile(model, x, xi)
        diag = z * z * eps0 * mu0 + z * mu0 * xi * (eps_xi - eps0) - 2.0 / h**2
    else:  # nondispersive
        if omega0 is None:
            raise ConfigError("nondispersive kind requires omega0")
        eps_d = np.empty(grid.N)
        for i, xv in enumerate(x):
            density = model.density_at(xv)
            eps_d[i] = model.background + build_nondispersive(density, omega0, eps0) - eps0
        diag = z * z * mu0 * eps_d.astype(np.complex128) - 2.0 / h**2
    return DiscreteHelmholtz(
        grid=grid, model=model, kind=kind, z=z, xi=xi, omega0=omega0,
        diag=np.asarray(diag, dtype=np.complex128), offdiag=offdiag,
        corner_lo=corner_lo, corner_hi=corner_hi,
    )


def _check_periodic(model, grid):
    for x0, x1, _ in model.layers:
        if x0 < 0 or x1 > grid.L:
            raise PeriodicityError(
                f"layer [{x0}, {x1}] extends outside the unit cell [0, {grid.L}]"
            )


def solve(op, source):
    """Field radiated by a source vector: x = H^-1 source."""
    return op.solve(np.asarray(source, dtype=np.complex128))


def green_matrix(op):
    """GreenSamples with values[i][j] ~= G(x_i, x_j; z) via discrete deltas e_j / h."""
    rhs = np.eye(op.grid.N, dtype=np.complex128) / op.grid.h
    values = op.solve(rhs)
    return GreenSamples(grid=op.grid, z=op.z, values=values)


def coefficient(op, phi, psi):
    """Discrete coefficient h * sum conj(phi_i) (H^-1 psi)_i."""
    phi = np.asarray(phi, dtype=np.complex128)
    field_ = op.solve(np.asarray(psi, dtype=np.complex128))
    return complex(op.grid.h * np.vdot(phi, field_))


def norm_bound(op):
    """Proven bound 1 / (|z| eps0 mu0 Im z) on the inverse operator norm."""
    units = op.model.units
    if op.z.imag <= 0:
        return math.inf
    return 1.0 / (abs(op.z) * units.eps0 * units.mu0 * op.z.imag)


def inverse_norm(op, dense_cutoff=512, tol=1e-10, max_iter=10_000, seed=0):
    """Largest singular value of H^-1 (dense SVD below the cutoff, else power iteration)."""
    n = op.grid.N
    if n <= dense_cutoff:
        sv = scipy.linalg.svdvals(op.dense())
        return float(1.0 / sv[-1])
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = op.solve(op.solve_adjoint(v))
        new_lam = float(np.linalg.norm(w))
        v = w / new_lam
        if abs(new_lam - lam) <= tol * new_lam:
            return math.sqrt(new_lam)
        lam = new_lam
    raise RuntimeError("power iteration did not converge within the iteration cap")


def bloch_imag_eigs(k_imag, z, c=1.0):
    """Eigenvalues {Im z, Im z +- c |k''|} of the anti-Hermitian part of the free operator."""
    eta = complex(z).imag
    return (eta, eta + c * abs(k_imag), eta - c * abs(k_imag))


def resolvent_difference_ray(model, grid, eta, omega_ladder):
    """||z^2 (H_e(z)^-1 - H_0(z)^-1)|| along z = omega + i eta.

    Asymptotically capped by dchi/dt(0+) / (eps0 mu0 Im z)^2.
    """
    if eta <= 0:
        raise DomainError("ray requires eta > 0")
    vacuum = dispersion.vacuum_model(model.units)
    rhs = np.eye(grid.N, dtype=np.complex128)
    out = []
    for omega in omega_ladder:
        z = complex(omega, eta)
        inv_e = assemble(grid, model, "dispersive", z).solve(rhs)
        inv_0 = assemble(grid, vacuum, "dispersive", z).solve(rhs)
        sv = scipy.linalg.svdvals(z * z * (inv_e - inv_0))
        out.append(float(sv[0]))
    return out


def diagonal_batch(grid, model, kind, z_array, xi=None, omega0=None):
    """Per-z diagonals, shape (B, N), for batched contour solves (Dirichlet only)."""
    z = np.asarray(z_array, dtype=np.complex128)
    x = grid.points
    h = grid.h
    eps0 = model.units.eps0
    mu0 = model.units.mu0
    if kind == "dispersive":
        eps = np.full((z.size, grid.N), complex(model.background))
        cache = {}
        for i, xv in enumerate(x):
            density = model.density_at(xv)
            if density.is_vacuum:
                continue
            key = id(density)
            if key not in cache:
                cache[key] = density_eval_array(density, z, eps0)
            eps[:, i] += cache[key]
        diag = (z * z * mu0)[:, None] * eps - 2.0 / h**2
    elif kind == "nondispersive":
        eps_d = np.empty(grid.N)
        for i, xv in enumerate(x):
            density = model.density_at(xv)
            eps_d[i] = model.background + build_nondispersive(density, omega0, eps0) - eps0
        diag = (z * z * mu0)[:, None] * eps_d[None, :] - 2.0 / h**2
    else:
        raise ConfigError(f"batched diagonals not supported for kind {kind!r}")
    return diag


def solve_batch(grid, diag_batch, rhs_batch):
    """Batched Dirichlet solves sharing the 1/h^2 off-diagonals."""
    offdiag = np.full(grid.N - 1, 1.0 / grid.h**2, dtype=np.complex128)
    return _kernels.tridiag_solve_batch(offdiag, offdiag, diag_batch, rhs_batch)
