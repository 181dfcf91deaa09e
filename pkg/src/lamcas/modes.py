"""Exact grating eigenfunctions, adjoints, eigenvector columns, and the
closed-form overlaps used to build scattering matrices.

A mode is represented by its scalar potential U (a PiecewiseTrig), its
derivative, and a handful of scalars; the four-component eigenvectors of the
two polarizations are assembled from these on demand.  All inner products
reduce to closed-form piecewise-trig integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigen import EtaRoot, _grating_params, kappa_from_eta, solve_eta_spectrum
from .geometry import (GratingGeometry, PiecewiseConst, PiecewiseTrig,
                       SpectralPoint, cross_integral)
from .kernels import cosw, planewave_seg, sinw
from .materials import DielectricModel


class ModeConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Region:
    """Material layout of one z-slice: homogeneous medium or lamellar grating."""

    geom: GratingGeometry
    groove_model: DielectricModel
    tooth_model: DielectricModel

    @property
    def is_homogeneous(self):
        return self.geom.is_homogeneous or self.groove_model == self.tooth_model

    def inv_sigma_profile(self, pol, xi):
        g = 1.0 / _sigma_of(self.groove_model, pol, xi)
        t = 1.0 / _sigma_of(self.tooth_model, pol, xi)
        return PiecewiseConst.grating_profile(self.geom, g, t)

    def unit_profile(self):
        return PiecewiseConst.uniform(self.geom.period, 1.0)


def homogeneous_region(model: DielectricModel, period):
    geom = GratingGeometry(0.0, period, 0.0)
    return Region(geom, model, model)


def _sigma_of(model, pol, xi):
    return model.mu(xi) if pol == "e" else model.eps(xi)


def _mirror(breaks, etas, coeffs, odd):
    """Extend right-half segment data to the full period by parity."""
    n = len(etas)
    out_breaks = [-b for b in breaks[::-1]] + list(breaks[1:])
    out_etas = list(etas[::-1]) + list(etas)
    out_coeffs = []
    sign = -1.0 if odd else 1.0
    for i in range(n - 1, -1, -1):
        seg_len = breaks[i + 1] - breaks[i]
        a, b = coeffs[i]
        eta = etas[i]
        cl, sl = cosw(eta, seg_len), sinw(eta, seg_len)
        # f(-x) on the mirrored segment, times the parity sign
        out_coeffs.append([sign * (a * cl + b * sl), sign * (a * eta * sl - b * cl)])
    out_coeffs.extend(coeffs)
    return out_breaks, out_etas, out_coeffs


class ModalFunction:
    """One grating eigenfunction U^(s)[x, lambda] with eta a validated root.

    Built from the even/odd pair phi_e, phi_o; U depends on lambda only
    through eta, so a single instance serves both propagation directions.
    """

    def __init__(self, pol, eta, point: SpectralPoint, region: Region,
                 enforce_root=True):
        self.pol = pol
        self.eta = float(eta)
        self.point = point
        self.region = region
        geom = region.geom
        xi = point.xi
        s1, s2, w_shift = _grating_params(pol, xi, region.groove_model,
                                          region.tooth_model)
        self.sigma1, self.sigma2 = s1, s2
        self.eta2 = self.eta - w_shift
        self.chi2 = region.groove_model.eps_xi2(xi) * region.groove_model.mu(xi) + self.eta
        self.kappa = kappa_from_eta(self.eta, point, region.groove_model)

        p1, p2, p = geom.p1, geom.p2, geom.period
        h1, h = 0.5 * p1, 0.5 * p
        ratio = s2 / s1
        # phi_e / phi_o right-half data: groove [0, p1/2], tooth [p1/2, p/2]
        ec = cosw(self.eta, h1)
        es = -ratio * self.eta * sinw(self.eta, h1)
        oc = sinw(self.eta, h1)
        os = ratio * cosw(self.eta, h1)
        self.phi_e_edge = ec * cosw(self.eta2, 0.5 * p2) + es * sinw(self.eta2, 0.5 * p2)
        self.phi_o_edge = oc * cosw(self.eta2, 0.5 * p2) + os * sinw(self.eta2, 0.5 * p2)

        br = [0.0, h1, h]
        etas = [self.eta, self.eta2]
        phi_e = _mirror(br, etas, [[1.0, 0.0], [ec, es]], odd=False)
        phi_o = _mirror(br, etas, [[0.0, 1.0], [oc, os]], odd=True)
        self._phi_e = PiecewiseTrig(*phi_e)
        self._phi_o = PiecewiseTrig(*phi_o)

        cos_w = math.cos(0.5 * point.alpha0 * p)
        sin_w = math.sin(0.5 * point.alpha0 * p)
        scale_e = abs(ec) + abs(es) + 1.0
        scale_o = abs(oc) + abs(os) + 1.0
        if cos_w != 0.0 and abs(self.phi_e_edge) < 1e-14 * scale_e:
            raise ModeConstructionError(
                "normalization denominator vanishes (phi_e at p/2); degenerate mode")
        if sin_w != 0.0 and abs(self.phi_o_edge) < 1e-14 * scale_o:
            raise ModeConstructionError(
                "normalization denominator vanishes (phi_o at p/2); degenerate mode")

        inv_sigma = region.inv_sigma_profile(pol, xi)
        i_even = i_odd = 0.0
        if cos_w != 0.0:
            fe = self._phi_e.scaled(1.0 / self.phi_e_edge)
            i_even = cross_integral(fe, fe, inv_sigma, lo=0.0, hi=h).real
        if sin_w != 0.0:
            fo = self._phi_o.scaled(1.0 / self.phi_o_edge)
            i_odd = cross_integral(fo, fo, inv_sigma, lo=0.0, hi=h).real
        bracket = cos_w ** 2 * i_even + sin_w ** 2 * i_odd
        if bracket <= 0.0:
            raise ModeConstructionError(
                f"non-normalizable mode (norm bracket {bracket:.3e} <= 0); "
                "this flags a solver failure for a real root")
        self.norm_c = 1.0 / math.sqrt(bracket)

        coeffs = np.zeros((len(phi_e[1]), 2), dtype=complex)
        if cos_w != 0.0:
            coeffs += (0.5 * self.norm_c * cos_w / self.phi_e_edge) * np.asarray(
                phi_e[2], dtype=complex)
        if sin_w != 0.0:
            coeffs += (0.5j * self.norm_c * sin_w / self.phi_o_edge) * np.asarray(
                phi_o[2], dtype=complex)
        self.u = PiecewiseTrig(phi_e[0], phi_e[1], coeffs)
        self.du = self.u.derivative()
        # V*(x) = U(-x) and its derivative, used by every inner product
        self.v_star = self.u.reflect()
        self.dv_star = self.du.reflect().scaled(-1.0)

        if enforce_root:
            # pseudo-periodicity of the constructed mode certifies the root
            lo = complex(self.u.value(-h))
            hi = complex(self.u.value(h))
            ph = np.exp(1j * point.alpha0 * p)
            scale = max(abs(lo), abs(hi), 1e-300)
            if abs(hi - ph * lo) > 1e-6 * scale:
                raise ModeConstructionError(
                    f"eta={self.eta!r} does not satisfy pseudo-periodicity "
                    f"(defect {abs(hi - ph * lo) / scale:.2e}); not a root?")

    # -- basic evaluations ------------------------------------------------

    def phi_even(self, x):
        return np.real(self._phi_e.value(x))

    def phi_odd(self, x):
        return np.real(self._phi_o.value(x))

    def mode_u(self, x):
        return self.u.value(x)

    def mode_du(self, x):
        return self.du.value(x)

    def overlap_planewave(self, alphas, derivative=False, weighted=True):
        """int U(x) e^{-i alpha x} w(x) dx for an array of alphas.

        w is 1/sigma^(s)(x) when weighted (the paper's overlap integrals),
        otherwise 1.  Closed form via per-segment plane-wave kernels.
        """
        alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
        f = self.du if derivative else self.u
        if weighted:
            w = self.region.inv_sigma_profile(self.pol, self.point.xi)
        else:
            w = self.region.unit_profile()
        out = np.zeros(alphas.shape, dtype=complex)
        for i in range(len(f.etas)):
            x0, x1 = f.breaks[i], f.breaks[i + 1]
            if x1 <= x0:
                continue
            wv = complex(w.value_at(np.array([0.5 * (x0 + x1)]))[0])
            a, b = f.coeffs[i]
            seg = planewave_seg(a, b, f.etas[i], alphas, x1 - x0)
            out += wv * np.exp(-1j * alphas * x0) * seg
        if out.size == 1:
            return complex(out[0])
        return out


class HomogeneousMode:
    """Rayleigh plane-wave mode of a homogeneous region (paper normalization)."""

    def __init__(self, pol, order, point: SpectralPoint, region: Region):
        self.pol = pol
        self.order = order
        self.point = point
        self.region = region
        model = region.tooth_model  # == groove_model for homogeneous regions
        xi = point.xi
        p = region.geom.period
        self.alpha = point.alpha(order)
        self.eta = self.alpha ** 2
        self.eta2 = self.eta
        self.sigma1 = self.sigma2 = _sigma_of(model, pol, xi)
        self.chi2 = model.eps_xi2(xi) * model.mu(xi) + self.eta
        self.kappa = math.sqrt(model.eps_xi2(xi) * model.mu(xi)
                               + point.ky ** 2 + self.eta)
        amp = (-1.0) ** order * math.sqrt(self.sigma1 / (2.0 * p))
        self.u = PiecewiseTrig.plane_wave(self.alpha, p, amp)
        self.du = self.u.derivative()
        self.v_star = self.u.reflect()
        self.dv_star = self.du.reflect().scaled(-1.0)

    def overlap_planewave(self, alphas, derivative=False, weighted=True):
        alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
        f = self.du if derivative else self.u
        wv = 1.0 / self.sigma1 if weighted else 1.0
        a, b = f.coeffs[0]
        p = self.region.geom.period
        seg = planewave_seg(a, b, f.etas[0], alphas, p)
        out = wv * np.exp(-1j * alphas * (-0.5 * p)) * seg
        if out.size == 1:
            return complex(out[0])
        return out


# -- bi-orthogonal inner products ----------------------------------------


def bracket_integrals(mode_a, mode_b):
    """The two weighted integrals every <adjoint_A | Y_B> product needs.

    Same polarization: (I_a, I_b) with I_a = int V_A* U_B / sigma_A(x) and
    I_b the same with sigma_B(x).  Cross polarization: (P1, P2) with
    P1 = int (d/dx V_A*) U_B / (sigma_A sigma_B), P2 = int V_A* (d/dx U_B)
    over the same combined weight.
    """
    xi = mode_a.point.xi
    wa = mode_a.region.inv_sigma_profile(mode_a.pol, xi)
    wb = mode_b.region.inv_sigma_profile(mode_b.pol, xi)
    if mode_a.pol == mode_b.pol:
        ia = cross_integral(mode_a.v_star, mode_b.u, wa)
        ib = cross_integral(mode_a.v_star, mode_b.u, wb)
        return ia, ib
    w = wa * wb
    p1 = cross_integral(mode_a.dv_star, mode_b.u, w)
    p2 = cross_integral(mode_a.v_star, mode_b.du, w)
    return p1, p2


def bracket_value(mode_a, dir_a, mode_b, dir_b, parts=None):
    """<adjoint of mode_a at dir_a*lambda_a | eigenvector of mode_b at
    dir_b*lambda_b>, the bi-orthogonality product of the four-component
    columns (equals delta_ab * delta_dirs for modes of one region).
    """
    if parts is None:
        parts = bracket_integrals(mode_a, mode_b)
    xi = mode_a.point.xi
    if mode_a.pol == mode_b.pol:
        ia, ib = parts
        ratio = dir_a * dir_b * (mode_a.kappa / mode_b.kappa) * (mode_b.chi2 / mode_a.chi2)
        return ia + ratio * ib
    if xi == 0.0:
        raise ValueError("cross-polarization products are singular at xi = 0")
    p1, p2 = parts
    ky = mode_a.point.ky
    if ky == 0.0:
        return 0.0 + 0.0j
    pref = 1j * ky * dir_b / (xi * mode_b.kappa)
    if mode_a.pol == "h":
        pref = -pref
    return pref * ((mode_b.chi2 / mode_a.chi2) * p1 + p2)


def biorthogonality_product(mode_a, dir_a, mode_b, dir_b):
    """Operation-level alias for the adjoint/eigenvector product."""
    return bracket_value(mode_a, dir_a, mode_b, dir_b)


# -- four-component columns (for exports and structure tests) -------------


def assemble_eigenvector(mode, direction, x):
    """(E_x, E_y, H_x, H_y) of the eigenvector at lambda = direction*i*kappa.

    Shapes follow the polarization split: E_x = 0 for e, H_x = 0 for h.
    """
    if mode.kappa == 0.0:
        raise ValueError("grazing eigenvector undefined (1/lambda factors)")
    xi, ky = mode.point.xi, mode.point.ky
    if xi == 0.0:
        raise ValueError("eigenvector columns are singular at xi = 0; "
                         "use the zero-frequency path")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(mode.u.value(x))
    du = np.atleast_1d(mode.du.value(x))
    inv_sigma = mode.region.inv_sigma_profile(mode.pol, xi).value_at(x)
    d = float(direction)
    zero = np.zeros_like(u)
    if mode.pol == "e":
        ey = u
        hx = d * mode.chi2 / (xi * mode.kappa) * u * inv_sigma
        hy = -1j * d * ky / (xi * mode.kappa) * du * inv_sigma
        return np.stack([zero, ey, hx, hy])
    ex = -d * mode.chi2 / (xi * mode.kappa) * u * inv_sigma
    ey = 1j * d * ky / (xi * mode.kappa) * du * inv_sigma
    return np.stack([ex, ey, zero, u])


def assemble_adjoint(mode, direction, x):
    """The four adjoint components at lambda = direction*i*kappa."""
    if mode.kappa == 0.0:
        raise ValueError("grazing eigenvector undefined (1/lambda factors)")
    xi, ky = mode.point.xi, mode.point.ky
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(mode.v_star.conj().value(x))
    dv = np.atleast_1d(mode.dv_star.conj().value(x))
    inv_sigma = mode.region.inv_sigma_profile(mode.pol, xi).value_at(x)
    d = float(direction)
    zero = np.zeros_like(v)
    if mode.pol == "e":
        one = 1j * ky / mode.chi2 * dv * inv_sigma
        two = v * inv_sigma
        three = d * xi * mode.kappa / mode.chi2 * v
        return np.stack([one, two, three, zero])
    one = -d * xi * mode.kappa / mode.chi2 * v
    three = 1j * ky / mode.chi2 * dv * inv_sigma
    four = v * inv_sigma
    return np.stack([one, zero, three, four])


def grating_modes(pol, point, region: Region, count):
    """The lowest `count` modal functions of a grating region."""
    spectrum = solve_eta_spectrum(pol, point, region.geom, region.groove_model,
                                  region.tooth_model, count)
    return [ModalFunction(pol, r.eta, point, region) for r in spectrum.roots], spectrum
