import json
import math

import numpy as np
import pytest

from helmgreen import dispersion as dsp
from helmgreen import transforms as tr
from helmgreen.errors import ConfigError, DomainError, GapViolationError


def lorentz_model(wp=1.0, w1=2.0, gamma=0.1):
    density = dsp.OscillatorDensity(lorentz=((wp, w1, gamma),))
    return dsp.PermittivityModel(layers=((0.0, 1.0, density),))


def line_model(nu=3.0, w=1.0):
    density = dsp.OscillatorDensity(lines=(((nu, w)),))
    return dsp.PermittivityModel(layers=((0.0, 1.0, density),))


# ---------------------------------------------------------------------------
# point evaluation


def test_vacuum_permittivity_is_background():
    m = dsp.vacuum_model()
    for z in (1j, 2.0 + 0.5j, -3.0 + 1e-3j):
        assert dsp.eval_permittivity(m, 0.3, z) == 1.0


def test_lorentz_closed_form_values():
    m = lorentz_model()
    # denominator at z = i: 4 - (-1) - i*0.1*i = 5.1
    got = dsp.eval_permittivity(m, 0.5, 1j)
    assert got == pytest.approx(1.0 + 1.0 / 5.1, rel=1e-14)
    # on resonance, z = 2: denominator = -i*0.2, value 1 + 5i
    got = dsp.eval_permittivity(m, 0.5, 2.0 + 0.0j)
    assert got == pytest.approx(1.0 + 5.0j, rel=1e-14)


def test_line_contribution_is_mirrored():
    # one line at nu = 3 with weight 1 carries weight at +3 and -3, so the
    # closed form is -2w/(z^2 - nu^2) = 2/10 at z = i
    m = line_model()
    got = dsp.eval_permittivity(m, 0.5, 1j)
    assert got == pytest.approx(1.2, rel=1e-14)


def test_outside_layers_is_background():
    m = lorentz_model()
    assert dsp.eval_permittivity(m, 2.0, 1j) == 1.0


def test_lower_half_plane_rejected():
    with pytest.raises(DomainError):
        dsp.eval_permittivity(lorentz_model(), 0.5, 1.0 - 0.1j)


def test_real_axis_with_lines_rejected():
    with pytest.raises(DomainError):
        dsp.eval_permittivity(line_model(), 0.5, 2.0 + 0.0j)


def test_pole_proximity_raises():
    from helmgreen.errors import PoleProximityError

    with pytest.raises(PoleProximityError):
        dsp.eval_permittivity(line_model(nu=3.0), 0.5, 3.0 + 1e-15j)


def test_density_eval_array_matches_scalar():
    m = lorentz_model()
    density = m.density_at(0.5)
    zs = np.array([1j, 2.0 + 0.5j, -1.0 + 2.0j])
    arr = dsp.density_eval_array(density, zs, 1.0)
    for z, v in zip(zs, arr):
        assert v == pytest.approx(dsp.eval_permittivity(m, 0.5, z) - 1.0, rel=1e-14)


def test_derivative_matches_finite_difference():
    m = lorentz_model()
    z = 0.7 + 0.9j
    h = 1e-6
    fd = (dsp.eval_permittivity(m, 0.5, z + h) - dsp.eval_permittivity(m, 0.5, z - h)) / (2 * h)
    assert dsp.permittivity_derivative(m, 0.5, z) == pytest.approx(fd, rel=1e-8)


def test_schwarz_reflection():
    m = lorentz_model()
    for z in (0.3 + 0.8j, -1.2 + 0.4j, 2.0 + 2.0j):
        a = dsp.eval_permittivity(m, 0.5, z)
        b = dsp.eval_permittivity(m, 0.5, -np.conj(z))
        assert b == pytest.approx(np.conj(a), rel=1e-14)


# ---------------------------------------------------------------------------
# passivity and sigma


def test_passivity_margin_example():
    m = lorentz_model()
    assert dsp.passivity_margin(m, 0.5, 1j) == pytest.approx(1.0 / 5.1, rel=1e-12)


def test_passivity_margin_vacuum_zero():
    assert dsp.passivity_margin(dsp.vacuum_model(), 0.1, 0.5 + 0.5j) == 0.0


def test_passivity_sweep_small():
    rng = np.random.default_rng(3)
    m = lorentz_model()
    for _ in range(200):
        z = complex(rng.uniform(-10, 10), 10.0 ** rng.uniform(-2, 1))
        assert dsp.passivity_margin(m, 0.5, z) >= -1e-12


def test_sigma_eval_nonnegative_even():
    density = lorentz_model().density_at(0.5)
    nu = np.linspace(-20, 20, 401)
    s = dsp.sigma_eval(density, nu)
    assert np.all(s >= 0)
    assert np.allclose(s, s[::-1])


def test_sigma_eval_closed_form():
    # sigma_L(nu) = eps0 wp^2 gamma nu^2 / (pi [(w1^2-nu^2)^2 + gamma^2 nu^2])
    density = dsp.OscillatorDensity(lorentz=((1.0, 2.0, 0.1),))
    nu = 1.7
    expect = 0.1 * nu**2 / (math.pi * ((4.0 - nu**2) ** 2 + 0.01 * nu**2))
    assert dsp.sigma_eval(density, nu) == pytest.approx(expect, rel=1e-13)


def test_lines_in_window():
    density = dsp.OscillatorDensity(lines=((3.0, 1.0), (5.0, 0.5)))
    assert dsp.lines_in_window(density, -4.0, 4.0) == [(-3.0, 1.0), (3.0, 1.0)]
    assert dsp.lines_in_window(density, 4.0, 6.0) == [(5.0, 0.5)]


# ---------------------------------------------------------------------------
# Kramers-Kronig round trip and sum rule


def test_kk_reconstruction_matches_closed_form():
    m = lorentz_model()
    density = m.density_at(0.5)
    for z in (1.0 + 0.5j, 0.1 + 0.05j, -2.0 + 1.0j, 5.0 + 3.0j):
        recon = dsp.kk_reconstruct_permittivity(density, z)
        exact = dsp.eval_permittivity(m, 0.5, z)
        assert abs(recon - exact) / abs(exact) < 1e-8


def test_kk_reconstruction_lines_exact():
    m = line_model()
    recon = dsp.kk_reconstruct_permittivity(m.density_at(0.5), 1j)
    assert recon == pytest.approx(1.2, rel=1e-14)


def test_kk_requires_upper_half_plane():
    with pytest.raises(DomainError):
        dsp.kk_reconstruct_permittivity(lorentz_model().density_at(0.5), 2.0 + 0.0j)


def test_sum_rule():
    density = dsp.OscillatorDensity(
        lines=((3.0, 0.25),), lorentz=((1.0, 2.0, 0.1), (0.7, 4.0, 0.5))
    )
    total, err = dsp.sigma_total_weight(density)
    expect = dsp.chi_dot_at_zero(density)
    assert expect == pytest.approx(2.0 * 0.25 + 1.0 + 0.49, rel=1e-14)
    assert abs(total - expect) / expect < 1e-8


def test_high_freq_deviation_decays():
    m = lorentz_model()
    devs = [abs(dsp.high_freq_deviation(m, 0.5, w, 1.0)) for w in (10.0, 100.0, 1000.0)]
    assert devs[0] > devs[1] > devs[2]
    # residual ~ gamma/omega at fixed eta
    assert devs[2] < 2e-4


# ---------------------------------------------------------------------------
# time domain


def test_susceptibility_matches_exact_lorentz():
    m = lorentz_model(wp=1.0, w1=2.0, gamma=0.2)
    t = np.array([0.3, 1.0, 2.5, 5.0])
    chi, est = dsp.susceptibility(m, 0.5, t)
    exact = dsp.lorentz_susceptibility_exact(1.0, 2.0, 0.2, t)
    assert np.max(np.abs(chi - exact)) < 1e-5


def test_susceptibility_causal():
    m = lorentz_model(wp=1.0, w1=2.0, gamma=0.2)
    contour = tr.ContourSpec(eta=10.0, omega_max=400.0, n_points=100000)
    chi, _ = dsp.susceptibility(m, 0.5, [-2.0, -1.0], contour)
    assert np.max(np.abs(chi)) < 1e-8


def test_susceptibility_vacuum_zero():
    chi, est = dsp.susceptibility(dsp.vacuum_model(), 0.5, [1.0, 2.0])
    assert np.all(chi == 0.0) and est == 0.0


# ---------------------------------------------------------------------------
# non-dispersive construction


def test_build_nondispersive_value():
    # one mirrored line at nu = 3, weight 1, omega0 = 1: 1 + 2/(9-1) = 1.25
    density = dsp.OscillatorDensity(lines=((3.0, 1.0),), gap_nu0=2.5)
    val = dsp.build_nondispersive(density, 1.0)
    assert isinstance(val, float)
    assert val == pytest.approx(1.25, rel=1e-14)


def test_build_nondispersive_vacuum():
    assert dsp.build_nondispersive(dsp.OscillatorDensity(gap_nu0=2.0), 1.0) == 1.0


def test_build_nondispersive_requires_gap():
    density = dsp.OscillatorDensity(lines=((3.0, 1.0),), gap_nu0=0.0)
    with pytest.raises(DomainError):
        dsp.build_nondispersive(density, 1.0)


def test_build_nondispersive_rejects_lorentz():
    density = dsp.OscillatorDensity(lorentz=((1.0, 2.0, 0.1),), gap_nu0=1.5)
    with pytest.raises(GapViolationError):
        dsp.build_nondispersive(density, 1.0)


def test_build_nondispersive_rejects_line_in_gap():
    density = dsp.OscillatorDensity(lines=((1.2, 1.0),), gap_nu0=2.0)
    with pytest.raises(GapViolationError):
        dsp.build_nondispersive(density, 1.5)


def test_xi_map_imaginary_part_sign():
    z = 1.0 + 0.5j
    # Im xi = Im z (nu^2 - omega0^2)/|z|^2
    for nu, omega0 in ((3.0, 1.0), (4.0, 0.5)):
        xi = dsp.xi_map(z, nu, omega0)
        expect = z.imag * (nu**2 - omega0**2) / abs(z) ** 2
        assert xi.imag == pytest.approx(expect, rel=1e-13)
        assert xi.imag > 0


# ---------------------------------------------------------------------------
# medium files


def test_load_medium_round_trip(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({
        "background_epsilon": 1.5,
        "layers": [{
            "interval": [0.2, 0.8],
            "lorentz": [{"wp": 1.0, "w1": 2.0, "gamma": 0.1}],
            "lines": [{"nu": 5.0, "weight": 0.5}],
            "gap_nu0": 0.0,
        }],
    }))
    m = dsp.load_medium(str(path))
    assert m.background == 1.5
    density = m.density_at(0.5)
    assert density.lorentz == ((1.0, 2.0, 0.1),)
    assert density.lines == ((5.0, 0.5),)


def test_load_medium_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"background_epsilon": 1.0, "layres": []}))
    with pytest.raises(ConfigError):
        dsp.load_medium(str(path))


def test_load_medium_missing_file():
    with pytest.raises(ConfigError):
        dsp.load_medium("/nonexistent/medium.json")


def test_negative_weights_rejected():
    with pytest.raises(ConfigError):
        dsp.OscillatorDensity(lines=((3.0, -1.0),))
    with pytest.raises(ConfigError):
        dsp.OscillatorDensity(lorentz=((1.0, -2.0, 0.1),))
