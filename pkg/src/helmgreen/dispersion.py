"""Dispersive permittivity models built from oscillator densities.

A medium is described by a nonnegative oscillator density sigma(nu):
discrete lines (undamped resonances, mirrored over +-nu) plus closed-form
Lorentz continuous parts. The permittivity is the superposition

    eps(z) = eps_b - integral sigma(nu) / (z^2 - nu^2) dnu ,

evaluable at any complex frequency z in the closed upper half-plane.
This module also provides the passivity margin, the time-domain
susceptibility (contour inversion), the sum rule weight, the
high-frequency deviation and the non-dispersive (gapped) construction.

Convention: a stored line (nu_j, w_j) carries weight w_j at +nu_j *and*
at -nu_j, so its permittivity contribution is -2 w_j / (z^2 - nu_j^2)
and its contribution to the total weight integral is 2 w_j.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import (
    ConfigError,
    DomainError,
    GapViolationError,
    PoleProximityError,
    QuadratureError,
)

POLE_FLOOR = 1e-12


@dataclass(frozen=True)
class UnitSystem:
    eps0: float = 1.0
    mu0: float = 1.0

    @property
    def c(self):
        return 1.0 / math.sqrt(self.eps0 * self.mu0)


NORMALIZED = UnitSystem(1.0, 1.0)
SI = UnitSystem(8.8541878128e-12, 1.25663706212e-6)

_UNIT_SYSTEMS = {"normalized": NORMALIZED, "si": SI}


@dataclass(frozen=True)
class OscillatorDensity:
    """Nonnegative density sigma(nu): discrete lines + Lorentz continuous parts.

    lines   : tuple of (nu_j, w_j), nu_j > 0, w_j > 0 (mirrored on access)
    lorentz : tuple of (wp, w1, gamma), all > 0
    gap_nu0 : lowest support frequency (0 if none)
    """

    lines: tuple = ()
    lorentz: tuple = ()
    gap_nu0: float = 0.0

    def __post_init__(self):
        for nu, w in self.lines:
            if nu <= 0 or w <= 0:
                raise ConfigError(f"line (nu={nu}, w={w}) must be strictly positive")
        for wp, w1, gamma in self.lorentz:
            if wp <= 0 or w1 <= 0 or gamma <= 0:
                raise ConfigError(
                    f"lorentz part (wp={wp}, w1={w1}, gamma={gamma}) must be strictly positive"
                )
        if self.gap_nu0 < 0:
            raise ConfigError("gap_nu0 must be >= 0")

    @property
    def is_vacuum(self):
        return not self.lines and not self.lorentz

    @property
    def min_gamma(self):
        return min((g for _, _, g in self.lorentz), default=math.inf)


VACUUM_DENSITY = OscillatorDensity()


@dataclass(frozen=True)
class PermittivityModel:
    """Layered 1D medium: background constant + per-interval oscillator densities."""

    background: float = 1.0
    layers: tuple = ()  # tuple of (x0, x1, OscillatorDensity)
    units: UnitSystem = field(default=NORMALIZED)

    def __post_init__(self):
        if self.background < self.units.eps0:
            raise ConfigError("background permittivity below the vacuum value")
        for x0, x1, density in self.layers:
            if not x1 > x0:
                raise ConfigError(f"empty layer interval [{x0}, {x1}]")
            if not isinstance(density, OscillatorDensity):
                raise ConfigError("layer density must be an OscillatorDensity")

    def density_at(self, x):
        for x0, x1, density in self.layers:
            if x0 <= x <= x1:
                return density
        return VACUUM_DENSITY

    @property
    def damped(self):
        """True when every resonance has damping (real-axis evaluation allowed)."""
        return all(not d.lines for _, _, d in self.layers)

    @property
    def min_gamma(self):
        return min((d.min_gamma for _, _, d in self.layers), default=math.inf)


def vacuum_model(units=NORMALIZED):
    return PermittivityModel(background=units.eps0, units=units)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12


# ---------------------------------------------------------------------------
# point evaluation


def _check_upper_half(z, density, allow_real):
    if z.imag < 0:
        raise DomainError(f"Im z = {z.imag} < 0: outside the upper half-plane")
    if z.imag == 0:
        if not allow_real:
            raise DomainError("real-axis evaluation not allowed here")
        if density.lines:
            raise DomainError("undamped lines cannot be evaluated on the real axis")


def _density_eval(density, z, eps0):
    """Permittivity contribution of one density (background excluded)."""
    val = 0.0 + 0.0j
    z2 = z * z
    for nu, w in density.lines:
        den = z2 - nu * nu
        if abs(den) < POLE_FLOOR:
            raise PoleProximityError(f"|z^2 - nu^2| = {abs(den)} below floor at nu = {nu}")
        val += -2.0 * w / den
    for wp, w1, gamma in density.lorentz:
        den = w1 * w1 - z2 - 1j * gamma * z
        if abs(den) < POLE_FLOOR:
            raise PoleProximityError("Lorentz denominator below pole floor")
        val += eps0 * wp * wp / den
    return val


def density_eval_array(density, z, eps0):
    """Vectorized `_density_eval` over an ndarray of frequencies (no pole checks)."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.zeros(z.shape, dtype=np.complex128)
    z2 = z * z
    for nu, w in density.lines:
        out += -2.0 * w / (z2 - nu * nu)
    for wp, w1, gamma in density.lorentz:
        out += eps0 * wp * wp / (w1 * w1 - z2 - 1j * gamma * z)
    return out


def eval_permittivity(model, x, z):
    """Closed-form permittivity eps(x, z), Im z >= 0."""
    z = complex(z)
    density = model.density_at(x)
    _check_upper_half(z, density, allow_real=True)
    return model.background + _density_eval(density, z, model.units.eps0)


def permittivity_derivative(model, x, z):
    """Analytic d eps / dz at Im z > 0."""
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("derivative requires Im z > 0")
    density = model.density_at(x)
    eps0 = model.units.eps0
    z2 = z * z
    val = 0.0 + 0.0j
    for nu, w in density.lines:
        val += 4.0 * w * z / (z2 - nu * nu) ** 2
    for wp, w1, gamma in density.lorentz:
        den = w1 * w1 - z2 - 1j * gamma * z
        val += eps0 * wp * wp * (2.0 * z + 1j * gamma) / den**2
    return val


def passivity_margin(model, x, z):
    """Im{ z [eps(x,z) - eps0] }; nonnegative in the upper half-plane."""
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("passivity margin requires Im z > 0")
    eps = eval_permittivity(model, x, z)
    return (z * (eps - model.units.eps0)).imag


def sigma_eval(density, nu, eps0=1.0):
    """Continuous part of sigma at real frequency nu (even, >= 0).

    Discrete lines are distributions and are reported separately by
    `lines_in_window`.
    """
    nu = np.asarray(nu, dtype=float)
    nu2 = nu * nu
    out = np.zeros_like(nu2)
    for wp, w1, gamma in density.lorentz:
        out += (
            eps0
            * wp**2
            * gamma
            * nu2
            / (math.pi * ((w1 * w1 - nu2) ** 2 + gamma * gamma * nu2))
        )
    return out if out.ndim else float(out)


def lines_in_window(density, nu_lo, nu_hi):
    """Mirrored discrete lines (nu, weight) with nu in [nu_lo, nu_hi]."""
    out = []
    for nu, w in density.lines:
        for signed in (nu, -nu):
            if nu_lo <= signed <= nu_hi:
                out.append((signed, w))
    return sorted(out)


# ---------------------------------------------------------------------------
# quadratures


def _quad_complex(f, a, b, points=None, epsabs=1e-12, epsrel=1e-10, limit=400):
    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=limit)
    if points is not None and not (math.isinf(a) or math.isinf(b)):
        kw["points"] = points
    re, re_err = integrate.quad(lambda t: f(t).real, a, b, **kw)
    im, im_err = integrate.quad(lambda t: f(t).imag, a, b, **kw)
    return complex(re, im), re_err + im_err


def kk_reconstruct_permittivity(density, z, quad=None, eps0=1.0):
    """Permittivity by quadrature of -int sigma(nu)/(z^2-nu^2) dnu.

    Discrete lines enter exactly; the Lorentz continuous parts are
    integrated numerically (even symmetry halves the range).
    """
    quad = quad or QuadratureSpec()
    z = complex(z)
    if z.imag <= 0:
        raise DomainError("Kramers-Kronig reconstruction requires Im z > 0")
    val = complex(eps0)
    for nu, w in density.lines:
        val += -2.0 * w / (z * z - nu * nu)
    if not density.lorentz:
        return val
    resonances = sorted(w1 for _, w1, _ in density.lorentz)
    cut = 10.0 * max(resonances[-1], abs(z)) + 10.0

    def integrand(nu):
        return sigma_eval(density, nu, eps0) / (z * z - nu * nu)

    scale = max(abs(val), 1.0)
    core, err1 = _quad_complex(
        integrand, 0.0, cut, points=resonances + [abs(z)],
        epsabs=quad.abs_tol * scale, epsrel=quad.rel_tol,
    )
    tail, err2 = _quad_complex(
        integrand, cut, math.inf, epsabs=quad.abs_tol * scale, epsrel=quad.rel_tol
    )
    est = err1 + err2
    if est > max(quad.abs_tol, quad.rel_tol * scale) * 1e3:
        raise QuadratureError(
            f"KK quadrature error estimate {est:.3e} above tolerance", estimate=est
        )
    return val - 2.0 * (core + tail)


def chi_dot_at_zero(density, eps0=1.0):
    """Total weight int sigma dnu = dchi/dt(0+): 2 w_j per line + eps0 wp^2 per Lorentz part."""
    return 2.0 * sum(w for _, w in density.lines) + eps0 * sum(
        wp * wp for wp, _, _ in density.lorentz
    )


def sigma_total_weight(density, eps0=1.0, quad=None):
    """Quadrature of int sigma dnu (continuous part) plus exact line weights."""
    quad = quad or QuadratureSpec()
    total = 2.0 * sum(w for _, w in density.lines)
    err = 0.0
    if density.lorentz:
        resonances = sorted(w1 for _, w1, _ in density.lorentz)
        cut = 50.0 * resonances[-1] + 50.0
        core, e1 = integrate.quad(
            lambda nu: sigma_eval(density, nu, eps0), 0.0, cut,
            points=resonances, epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=400,
        )
        tail, e2 = integrate.quad(
            lambda nu: sigma_eval(density, nu, eps0), cut, math.inf,
            epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=400,
        )
        total += 2.0 * (core + tail)
        err = 2.0 * (e1 + e2)
    return total, err


def high_freq_deviation(model, x, omega, eta):
    """z^2 [eps - eps_b] + dchi/dt(0+) at z = omega + i eta; -> 0 as omega grows.

    The deviation is taken against the model background so that it stays
    finite for backgrounds above the vacuum value.
    """
    if eta <= 0:
        raise DomainError("high-frequency deviation requires eta > 0")
    z = complex(omega, eta)
    density = model.density_at(x)
    eps = eval_permittivity(model, x, z)
    return z * z * (eps - model.background) + chi_dot_at_zero(density, model.units.eps0)


# ---------------------------------------------------------------------------
# time domain


def susceptibility(model, x, t_grid, contour=None):
    """Time-domain susceptibility chi(x, t) by contour inversion.

    Inverts eps(x, z) - eps_b along the horizontal line Im z = eta.
    Returns (values, error_estimate); values are real up to the estimate
    and vanish for t < 0 (causality).
    """
    from . import transforms

    density = model.density_at(x)
    if density.is_vacuum:
        t = np.atleast_1d(np.asarray(t_grid, dtype=float))
        return np.zeros_like(t), 0.0
    if contour is None:
        gamma_min = density.min_gamma
        eta = gamma_min / 2.0 if math.isfinite(gamma_min) else 1.0
        scales = [w1 for _, w1, _ in density.lorentz] + [nu for nu, _ in density.lines]
        omega_max = 400.0 * max(scales + [1.0])
        t_abs = max(float(np.max(np.abs(t_grid))), 1.0)
        n = int(min(4_000_000, max(40_000, 24.0 * omega_max * t_abs / math.pi)))
        contour = transforms.ContourSpec(eta=eta, omega_max=omega_max, n_points=n)

    def sampler(z):
        return density_eval_array(density, z, model.units.eps0)

    values, est = transforms.laplace_invert(sampler, contour, t_grid)
    return values.real, est + float(np.max(np.abs(values.imag)))


def lorentz_susceptibility_exact(wp, w1, gamma, t, eps0=1.0):
    """Closed-form damped-sinusoid susceptibility of one Lorentz oscillator."""
    t = np.asarray(t, dtype=float)
    wt = math.sqrt(w1 * w1 - gamma * gamma / 4.0)
    out = eps0 * wp * wp * np.exp(-gamma * t / 2.0) * np.sin(wt * t) / wt
    return np.where(t >= 0, out, 0.0)


# ---------------------------------------------------------------------------
# non-dispersive construction


def build_nondispersive(density, omega0, eps0=1.0):
    """Real dielectric constant eps0 + int_{|nu|>=nu0} sigma/(nu^2 - omega0^2) dnu.

    Requires a spectral gap nu0 > omega0 > 0 with all support above it,
    which in this representation restricts the density to discrete lines.
    """
    if density.is_vacuum:
        return eps0
    nu0 = density.gap_nu0
    if not (nu0 > omega0 > 0):
        raise DomainError(f"need nu0 > omega0 > 0, got nu0 = {nu0}, omega0 = {omega0}")
    if density.lorentz:
        raise GapViolationError(
            "Lorentz continuous parts have support at all frequencies and violate the gap"
        )
    for nu, _ in density.lines:
        if nu < nu0:
            raise GapViolationError(f"line at nu = {nu} lies inside the gap |nu| < {nu0}")
    value = eps0
    for nu, w in density.lines:
        value += 2.0 * w / (nu * nu - omega0 * omega0)
    return value


def xi_map(z, nu, omega0):
    """Dispersion-frequency map xi = nu + (omega0^2 - nu^2)/z.

    Im xi = Im z (nu^2 - omega0^2)/|z|^2, so the gap condition nu0 > omega0
    keeps xi in the upper half-plane whenever z is.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("xi map undefined at z = 0")
    return nu + (omega0 * omega0 - nu * nu) / z


# ---------------------------------------------------------------------------
# medium description files

_MEDIUM_KEYS = {"unit_system", "background_epsilon", "layers"}
_LAYER_KEYS = {"interval", "lorentz", "lines", "gap_nu0"}
_LORENTZ_KEYS = {"wp", "w1", "gamma"}
_LINE_KEYS = {"nu", "weight"}


def _check_keys(obj, allowed, where):
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def load_medium(path):
    """Parse a medium description file (JSON) into a PermittivityModel."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"medium file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"medium file {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("medium file must contain a JSON object")
    _check_keys(raw, _MEDIUM_KEYS, "medium file")
    unit_name = raw.get("unit_system", "normalized")
    if unit_name not in _UNIT_SYSTEMS:
        raise ConfigError(f"unknown unit_system {unit_name!r}")
    units = _UNIT_SYSTEMS[unit_name]
    background = float(raw.get("background_epsilon", units.eps0))
    layers = []
    for i, layer in enumerate(raw.get("layers", [])):
        _check_keys(layer, _LAYER_KEYS, f"layers[{i}]")
        if "interval" not in layer or len(layer["interval"]) != 2:
            raise ConfigError(f"layers[{i}] needs interval = [x0, x1]")
        x0, x1 = (float(v) for v in layer["interval"])
        lorentz = []
        for j, part in enumerate(layer.get("lorentz", [])):
            _check_keys(part, _LORENTZ_KEYS, f"layers[{i}].lorentz[{j}]")
            lorentz.append((float(part["wp"]), float(part["w1"]), float(part["gamma"])))
        lines = []
        for j, part in enumerate(layer.get("lines", [])):
            _check_keys(part, _LINE_KEYS, f"layers[{i}].lines[{j}]")
            lines.append((float(part["nu"]), float(part["weight"])))
        density = OscillatorDensity(
            lines=tuple(lines),
            lorentz=tuple(lorentz),
            gap_nu0=float(layer.get("gap_nu0", 0.0)),
        )
        layers.append((x0, x1, density))
    return PermittivityModel(background=background, layers=tuple(layers), units=units)
