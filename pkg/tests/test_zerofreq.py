import math

import numpy as np
import pytest

from lamcas.geometry import GratingGeometry, SpectralPoint
from lamcas.kernels import cosw, sinw
from lamcas.materials import ThermalContext, constant, drude, plasma, vacuum
from lamcas.modes import ModalFunction, Region
from lamcas.eigen import solve_eta_spectrum
from lamcas.scattering import (build_chain, grating_basis, homogeneous_basis,
                               stable_scattering)
from lamcas.zerofreq import (Laurent, material_expansion, theta_zero_frequency,
                             zero_frequency_root, zero_reflection,
                             zero_slice_columns)
from tests.conftest import GAMMA_D, OMEGA_P


def test_laurent_algebra():
    t = Laurent.var()
    x = (1.0 + 2.0 * t) * (3.0 - t)
    assert complex(x.coeff(0)) == 3.0
    assert complex(x.coeff(1)) == 5.0
    assert complex(x.coeff(2)) == -2.0
    inv = (1.0 + t).inv()
    for k, want in ((0, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)):
        assert complex(inv.coeff(k)) == pytest.approx(want)
    assert complex((t * t / t).coeff(1)) == 1.0


def test_material_expansion_matches_exact_inversion(gold):
    t_phys, xi2, w_shift = material_expansion(gold)
    tstar = GAMMA_D ** 2 / (4.0 * OMEGA_P ** 2)
    for tau in (1e-4, 1e-6):
        t_val = tstar * tau

        def val(lau):
            return sum(complex(lau.c[i]) * tau ** (lau.k0 + i)
                       for i in range(4)).real

        xi_exact = 0.5 * (-GAMMA_D + math.sqrt(
            GAMMA_D ** 2 + 4.0 * OMEGA_P ** 2 * t_val / (1.0 - t_val)))
        assert val(t_phys) == pytest.approx(t_val, rel=1e-12)
        assert val(xi2) == pytest.approx(xi_exact ** 2, rel=10.0 * t_val)
        w_exact = (1.0 / t_val - 1.0) * xi_exact ** 2
        assert val(w_shift) == pytest.approx(w_exact, rel=10.0 * t_val)


def test_zero_mode_shift_matches_hand_formula(gold, paper_geometry):
    p = paper_geometry.period
    a0 = 0.37 * math.pi / p
    eta = zero_frequency_root(gold, paper_geometry, a0, "zero", 0)
    q0 = 2.0 * (1.0 - math.cos(a0 * p)) / (paper_geometry.p1 * paper_geometry.p2)
    tstar = GAMMA_D ** 2 / (4.0 * OMEGA_P ** 2)
    assert complex(eta.coeff(1)).real == pytest.approx(q0 * tstar, rel=1e-12)


def test_groove_shift_matches_hand_formula(gold, paper_geometry):
    p = paper_geometry.period
    a0 = 0.37 * math.pi / p
    nu = 1
    eta0 = (nu * math.pi / paper_geometry.p1) ** 2
    eta = zero_frequency_root(gold, paper_geometry, a0, "groove", nu)
    # first-order balance of the regularized dispersion function
    delta = 4.0 * (cosw(eta0, paper_geometry.p2)
                   - (-1.0) ** nu * math.cos(a0 * p)) \
        / (paper_geometry.p1 * sinw(eta0, paper_geometry.p2))
    tstar = GAMMA_D ** 2 / (4.0 * OMEGA_P ** 2)
    assert complex(eta.coeff(1)).real == pytest.approx(delta * tstar, rel=1e-9)


def test_limit_columns_match_small_xi(paper_region, paper_geometry, gold):
    p = paper_geometry.period
    a0 = 0.37 * math.pi / p
    alphas = np.array([a0 + 2 * math.pi * nu / p for nu in (0, -1, 1, -2, 2)])
    cols = zero_slice_columns(paper_region, a0, alphas, 5)
    xi = GAMMA_D * 1e-5
    pt = SpectralPoint(xi, a0, 0.0, p)
    spec = solve_eta_spectrum("h", pt, paper_geometry, vacuum(), gold, 5)
    for c0, root in zip(cols, spec.roots):
        m = ModalFunction("h", root.eta, pt, paper_region)
        hy = np.atleast_1d(m.overlap_planewave(alphas, weighted=False)) / p
        exq = m.chi2 * np.atleast_1d(m.overlap_planewave(alphas, weighted=True)) / p
        col_s = np.concatenate([hy, exq])
        col_l = np.concatenate([c0.hy, c0.exq])
        i = int(np.argmax(np.abs(col_l)))
        ratio = col_s[i] / col_l[i]
        err = np.max(np.abs(col_s - ratio * col_l)) / np.max(np.abs(col_s))
        assert err < 5e-4, c0.label


def test_zero_reflection_continues_small_xi(paper_region, paper_geometry, gold):
    p = paper_geometry.period
    a0 = 0.37 * math.pi / p
    xi1 = ThermalContext(300.0).matsubara_xi(1)
    for ky in (0.0, 0.004):
        r0, kv = zero_reflection([(paper_region, paper_geometry.depth)], gold,
                                 a0, ky, 7)[:2]
        pt = SpectralPoint(xi1 * 1e-4, a0, ky, p)
        bm = homogeneous_basis(gold, pt, 7)
        bv = homogeneous_basis(vacuum(), pt, 7)
        bg = grating_basis(paper_region, pt, 7)
        rl, _ = stable_scattering(build_chain(bm, [(bg, paper_geometry.depth)],
                                              bv), pt, drive="gap")
        # the 00 physical channel agrees to the xi-linear corrections
        assert abs(rl[1, 1] - r0[0, 0]) < 5e-6


def test_zero_frequency_display_properties(paper_region, paper_geometry, gold):
    # R_ee = R_eh = R_he = 0 and 1 - R_hh_00 ~ alpha0 through the origin
    p = paper_geometry.period
    slopes = []
    for frac in (0.01, 0.02, 0.05, 0.1):
        a0 = frac * math.pi / p
        r, kv = zero_reflection([(paper_region, paper_geometry.depth)], gold,
                                a0, 0.0, 7)[:2]
        r00 = r[0, 0].real
        assert 0.0 < r00 < 1.0
        slopes.append((1.0 - r00) / a0)
    # linear through the origin: nearly constant slope
    assert max(slopes) / min(slopes) < 1.05


def test_theta_zero_frequency_contract(paper_region, paper_geometry, gold):
    p = paper_geometry.period
    a0 = 0.05 * math.pi / p
    th, e_phases, orders = theta_zero_frequency(paper_region, gold, a0, 0.0, 7)
    r_hh = -np.linalg.solve(th[(2, 2)], th[(2, 1)])
    r_ref, _kv = zero_reflection([(paper_region, paper_geometry.depth)], gold,
                                 a0, 0.0, 7)[:2]
    assert np.max(np.abs(r_hh - r_ref)) < 1e-12
    kv = np.sqrt(np.array([a0 + 2 * math.pi * nu / p for nu in orders]) ** 2)
    want = np.exp(-paper_geometry.depth * kv)
    assert np.max(np.abs(e_phases[(2, 2)] - want)) < 1e-12
    with pytest.raises(ValueError):
        theta_zero_frequency(Region(paper_geometry, vacuum(),
                                    plasma(OMEGA_P)), gold, a0, 0.0, 5)


def test_constant_eps_zero_frequency(paper_geometry):
    # regular route: finite permittivity solved directly at xi = 0
    diel = constant(6.0)
    region = Region(paper_geometry, vacuum(), diel)
    p = paper_geometry.period
    a0 = 0.3 * math.pi / p
    r0, kv = zero_reflection([(region, paper_geometry.depth)], diel, a0,
                             0.002, 5)[:2]
    xi1 = ThermalContext(300.0).matsubara_xi(1)
    pt = SpectralPoint(xi1 * 1e-4, a0, 0.002, p)
    bm = homogeneous_basis(diel, pt, 5)
    bv = homogeneous_basis(vacuum(), pt, 5)
    bg = grating_basis(region, pt, 5)
    rl, _ = stable_scattering(build_chain(bm, [(bg, paper_geometry.depth)], bv),
                              pt, drive="gap")
    assert abs(rl[1, 1] - r0[0, 0]) < 1e-5


def test_plasma_zero_frequency_h_sector(paper_geometry):
    # exact at ky = 0 (at ky > 0 the plasma e-sector stays alive at xi = 0
    # and couples, so the sector solve is an approximation there)
    pl = plasma(OMEGA_P)
    region = Region(paper_geometry, vacuum(), pl)
    p = paper_geometry.period
    a0 = 0.3 * math.pi / p
    r0, kv = zero_reflection([(region, paper_geometry.depth)], pl, a0, 0.0,
                             5)[:2]
    pt = SpectralPoint(OMEGA_P * 1e-4, a0, 0.0, p)
    bm = homogeneous_basis(pl, pt, 5)
    bv = homogeneous_basis(vacuum(), pt, 5)
    bg = grating_basis(region, pt, 5)
    rl, _ = stable_scattering(build_chain(bm, [(bg, paper_geometry.depth)], bv),
                              pt, drive="gap")
    assert abs(rl[1, 1] - r0[0, 0]) < 5e-6
