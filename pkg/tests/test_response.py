import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpf, sin as mpsin
from scipy.optimize import brentq

from decobudget import units
from decobudget.errors import ConfigError, DomainError
from decobudget.response import (COLD_ATOM, MATTER_COHERENT, FormFactorParams, StructureMode,
                                 decoherence_factor, helm_ff, helm_radius, structure_function,
                                 uniform_sphere_ff, weak_charge_sq)

RB = dict(A=87, Z=37)
PARAMS = FormFactorParams.for_target(1e-6, 87)


def mp_one_minus_sinc(x):
    mp.dps = 40
    x = mpf(x)
    return float(1 - mpsin(x) / x)


def test_decoherence_factor_examples():
    assert decoherence_factor(0.0, 1.0) == 0.0
    assert decoherence_factor(1.0, 1.0) == pytest.approx(0.158529, abs=1e-6)
    assert decoherence_factor(1.0, 1.0) == pytest.approx(mp_one_minus_sinc(1.0), rel=1e-14)
    assert decoherence_factor(1e6, 1.0) == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("x0", [1e-4, 0.5])
def test_decoherence_factor_branches_agree(x0):
    below = decoherence_factor(x0 * (1 - 1e-12), 1.0)
    above = decoherence_factor(x0, 1.0)
    assert above == pytest.approx(below, rel=1e-10)
    assert above == pytest.approx(mp_one_minus_sinc(x0), rel=1e-10)


@given(st.floats(0, 1e4), st.floats(0, 10))
def test_decoherence_factor_range(q, dx):
    v = decoherence_factor(q, dx)
    assert 0.0 <= v <= 1.2172


@given(st.floats(1e-8, 50))
def test_decoherence_factor_matches_high_precision(x):
    assert decoherence_factor(x, 1.0) == pytest.approx(mp_one_minus_sinc(x), rel=1e-9, abs=1e-300)


def test_uniform_sphere_examples():
    assert uniform_sphere_ff(0.0) == 1.0
    j1 = lambda x: math.sin(x) / x**2 - math.cos(x) / x
    root = brentq(j1, 4.0, 5.0, xtol=1e-14)
    assert root == pytest.approx(4.4934, abs=1e-4)
    assert abs(uniform_sphere_ff(root)) < 1e-12
    assert abs(uniform_sphere_ff(10.0)) < 0.1
    assert abs(uniform_sphere_ff(10.0)) <= 3 / 10.0**2


@given(st.floats(0, 1e3))
def test_uniform_sphere_bounded(x):
    assert abs(uniform_sphere_ff(x)) <= 1.0


def test_uniform_sphere_series_continuity():
    x0 = 0.05
    assert uniform_sphere_ff(x0 * (1 - 1e-12)) == pytest.approx(uniform_sphere_ff(x0), rel=1e-10)


def test_helm_examples():
    assert helm_ff(0.0, 87) == 1.0
    r_n = helm_radius(87)
    assert r_n == pytest.approx(1.14 * 87 ** (1 / 3) * units.FM)
    s = 0.9 * units.FM
    q = 1.0 / r_n
    direct = 3 * (math.sin(1.0) - math.cos(1.0)) * math.exp(-0.5 * (q * s) ** 2)
    v = helm_ff(q, 87)
    assert 0 < v < 1
    assert v == pytest.approx(direct, rel=1e-12)
    assert abs(helm_ff(1e9, 87)) < 1e-3
    with pytest.raises(DomainError):
        helm_ff(1.0, 0)


def test_structure_examples():
    cold = StructureMode(COLD_ATOM, 1e5)
    coh = StructureMode(MATTER_COHERENT, 1e5)
    q = np.array([0.0, 1.0, 1e3, 1e6])
    assert np.all(structure_function(q, cold, "atoms", params=PARAMS, **RB) == 1e5)
    assert structure_function(0.0, coh, "atoms", params=PARAMS, **RB) == pytest.approx(1e5 + 1e10)
    assert structure_function(0.0, cold, "protons", params=PARAMS, **RB) == pytest.approx(1e5 * 37 * 38)
    nc = structure_function(0.0, coh, "neutrons-coherent", params=PARAMS, **RB)
    assert nc == pytest.approx(1e5 * 50**2 * (1 + 1e5))
    with pytest.raises(ConfigError):
        structure_function(0.0, cold, "quarks", params=PARAMS, **RB)


def test_coherent_floor_at_large_q():
    N = 1e4
    coh = StructureMode(MATTER_COHERENT, N)
    q = 1e3 / PARAMS.r_cloud
    S = structure_function(q, coh, "atoms", params=PARAMS, **RB)
    assert abs(S - N) <= N * N * 1e-4


@given(st.floats(0, 1e4), st.floats(1, 1e8))
def test_structure_floor(qr, N):
    coh = StructureMode(MATTER_COHERENT, N)
    S = structure_function(qr / PARAMS.r_cloud, coh, "atoms", params=PARAMS, **RB)
    assert S >= N * (1 - 1e-12)


def test_structure_continuity_in_q():
    coh = StructureMode(MATTER_COHERENT, 1e3)
    q = np.linspace(0, 50, 20001) / PARAMS.r_cloud
    S = structure_function(q, coh, "atoms", params=PARAMS, **RB)
    assert np.max(np.abs(np.diff(S))) < 1e-2 * S[0]


def test_average_matches_envelope():
    coh = StructureMode(MATTER_COHERENT, 10.0)
    x = np.linspace(2000, 2000 + 2 * np.pi, 4001)
    exact = structure_function(x / PARAMS.r_cloud, coh, "atoms", params=PARAMS, **RB)
    avg = structure_function(x / PARAMS.r_cloud, coh, "atoms", params=PARAMS, average_above=1e3, **RB)
    assert np.trapezoid(exact - 10, x) == pytest.approx(np.trapezoid(avg - 10, x), rel=1e-2)


def test_mode_validation_and_weak_charge():
    with pytest.raises(DomainError):
        StructureMode(COLD_ATOM, 0.5)
    with pytest.raises(ConfigError):
        StructureMode("entangled", 10)
    assert weak_charge_sq(87, 37) == 50**2
    assert weak_charge_sq(87, 37, "full") == pytest.approx((37 * (0.92 - 1) + 50) ** 2)
    with pytest.raises(ConfigError):
        weak_charge_sq(87, 37, "other")
