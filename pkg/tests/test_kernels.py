import math

import numpy as np
import pytest
from scipy.integrate import quad

from lamcas.kernels import (cosw, cross_cc, cross_cs, cross_sc, cross_ss,
                            dsinw, planewave_seg, sinw)


def _c(eta, u):
    return math.cos(math.sqrt(eta) * u) if eta >= 0 else math.cosh(math.sqrt(-eta) * u)


def _s(eta, u):
    if abs(eta) < 1e-300:
        return u
    if eta > 0:
        g = math.sqrt(eta)
        return math.sin(g * u) / g
    g = math.sqrt(-eta)
    return math.sinh(g * u) / g


def test_basic_values():
    assert cosw(0.0, 1.3) == 1.0
    assert sinw(0.0, 1.3) == pytest.approx(1.3, rel=1e-15)
    assert cosw(4.0, 1.0) == pytest.approx(math.cos(2.0), rel=1e-14)
    assert cosw(-4.0, 1.0) == pytest.approx(math.cosh(2.0), rel=1e-14)
    assert sinw(-9.0, 0.5) == pytest.approx(math.sinh(1.5) / 3.0, rel=1e-14)


def test_dsinw_matches_finite_difference():
    for eta in (-2.0, -1e-5, 1e-7, 0.3, 9.0):
        h = 1e-6 * (1 + abs(eta))
        fd = (sinw(eta + h, 0.7) - sinw(eta - h, 0.7)) / (2 * h)
        assert dsinw(eta, 0.7) == pytest.approx(fd, rel=2e-7, abs=1e-12)


@pytest.mark.parametrize("a,b", [
    (4.0, 9.0), (4.0, 4.0 + 1e-9), (-3.0, 5.0), (-2.0, -7.0),
    (1e-9, 3.0), (1e-9, 1e-10), (0.0, 0.0), (25.0, 1e-8), (30.0, 30.0),
])
def test_cross_kernels_vs_quadrature(a, b):
    length = 1.7
    cases = (
        (cross_cc, lambda u: _c(a, u) * _c(b, u)),
        (cross_sc, lambda u: _s(a, u) * _c(b, u)),
        (cross_cs, lambda u: _c(a, u) * _s(b, u)),
        (cross_ss, lambda u: _s(a, u) * _s(b, u)),
    )
    for fn, ref in cases:
        want = quad(ref, 0.0, length, limit=200, epsabs=1e-14, epsrel=1e-13)[0]
        assert fn(a, b, length) == pytest.approx(want, rel=1e-10, abs=1e-13)


def test_planewave_seg_vs_quadrature():
    rng = np.random.default_rng(7)
    for _ in range(25):
        eta = rng.choice([rng.uniform(-0.01, 0.05), rng.uniform(-1e-6, 1e-6)])
        length = rng.uniform(20.0, 120.0)
        alphas = rng.uniform(-0.2, 0.2, size=4)
        # coincidence candidates alpha ~ +/- sqrt(eta)
        if eta > 0:
            alphas[0] = math.sqrt(eta) + 1e-9
        a_coef, b_coef = rng.normal(size=2) + 1j * rng.normal(size=2)
        got = planewave_seg(a_coef, b_coef, eta, alphas, length)
        for i, al in enumerate(alphas):
            f = lambda u: (a_coef * _c(eta, u) + b_coef * _s(eta, u)) * np.exp(-1j * al * u)
            want = quad(lambda u: f(u).real, 0, length, limit=300,
                        epsabs=1e-13, epsrel=1e-12)[0] \
                + 1j * quad(lambda u: f(u).imag, 0, length, limit=300,
                            epsabs=1e-13, epsrel=1e-12)[0]
            assert abs(got[i] - want) <= 1e-9 * (1.0 + abs(want))


def test_branch_invariance_of_entire_forms():
    # cos(sqrt(eta) L) and sin(sqrt(eta) L)/sqrt(eta) through either root sign
    for eta in (0.31, -0.77, 2.9e-5):
        for sign in (1.0, -1.0):
            g = sign * np.sqrt(complex(eta))
            assert cosw(eta, 1.1) == pytest.approx((np.cos(g * 1.1)).real, rel=1e-12)
            ref = (np.sin(g * 1.1) / g).real
            assert sinw(eta, 1.1) == pytest.approx(ref, rel=1e-12)
