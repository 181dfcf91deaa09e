import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lamcas.materials import (DielectricModel, ThermalContext,
                              ZeroFrequencyDivergence, constant, drude,
                              ev_to_wavevector, plasma, vacuum)


def test_vacuum_identity():
    assert vacuum().eps(0.0) == 1.0
    assert vacuum().eps(0.37) == 1.0


def test_drude_algebraic_point():
    wp, gd = 0.0425, 2.18e-4
    model = drude(wp, gd)
    assert model.eps(gd) == pytest.approx(1.0 + wp ** 2 / (2.0 * gd ** 2), rel=1e-14)


def test_plasma_algebraic_point():
    model = plasma(0.0425)
    assert model.eps(0.0425) == pytest.approx(2.0, rel=1e-14)


def test_drude_zero_frequency_signals():
    with pytest.raises(ZeroFrequencyDivergence):
        drude(0.04, 2e-4).eps(0.0)


def test_eps_xi2_limits():
    assert drude(0.04, 2e-4).eps_xi2(0.0) == 0.0
    assert plasma(0.04).eps_xi2(0.0) == pytest.approx(0.04 ** 2, rel=1e-15)
    assert constant(4.0).eps_xi2(0.1) == pytest.approx(0.04, rel=1e-15)


def test_matsubara_values():
    ctx = ThermalContext(300.0)
    assert ctx.matsubara_xi(0) == 0.0
    # 2 pi k_B T / (hbar c) from the pinned constants
    assert ctx.matsubara_xi(1) == pytest.approx(8.2317e-4, rel=1e-4)
    assert ctx.matsubara_xi(2) == 2.0 * ctx.matsubara_xi(1)


def test_ev_to_wavevector():
    assert ev_to_wavevector(0.0) == 0.0
    assert ev_to_wavevector(8.39) == pytest.approx(0.042518, rel=1e-4)
    assert ev_to_wavevector(0.043) == pytest.approx(2.1791e-4, rel=1e-4)


@given(st.floats(1e-6, 1.0), st.floats(1e-6, 1.0))
@settings(max_examples=60, deadline=None)
def test_monotone_nonincreasing(x1, x2):
    lo, hi = sorted((x1, x2))
    for model in (drude(0.04, 2e-4), plasma(0.04), constant(3.0), vacuum()):
        a, b = model.eps(lo), model.eps(hi)
        assert a >= b >= 1.0 or math.isclose(a, b)


@given(st.floats(1e-4, 0.5))
@settings(max_examples=30, deadline=None)
def test_drude_to_plasma_limit(xi):
    wp = 0.0425
    target = plasma(wp).eps(xi)
    prev = None
    for gd in (1e-6, 1e-8, 1e-10):
        val = drude(wp, gd).eps(xi)
        err = abs(val - target) / target
        if prev is not None:
            assert err <= prev * 1.01
        prev = err
    assert prev < 1e-6


def test_validation_errors():
    with pytest.raises(ValueError):
        DielectricModel("constant", eps_const=0.5)
    with pytest.raises(ValueError):
        DielectricModel("drude", omega_p=0.1, gamma_d=0.0)
    with pytest.raises(ValueError):
        ThermalContext(0.0)
