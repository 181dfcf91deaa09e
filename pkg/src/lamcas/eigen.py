"""Transcendental dispersion equation for grating eigenvalues on the
imaginary frequency axis, asymptotic seeds, and validated spectra.

The working variable is eta = gamma_1^2 (squared transverse wavenumber in
the grooves); the equation is evaluated through entire functions of eta, so
no square-root branch is ever selected.  Eigenvalues are lambda = +/- i*kappa
with kappa = sqrt(eps1*mu1*xi^2 + ky^2 + eta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .geometry import GratingGeometry, SpectralPoint
from .kernels import cosw, sinw
from .materials import DielectricModel

DEDUP_RTOL = 1e-8       # |d_eta| < DEDUP_RTOL*(1+eta) merges two roots
RESIDUAL_RTOL = 1e-10   # |D(eta)| <= RESIDUAL_RTOL * local scale


class RootSearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class EtaRoot:
    eta: float
    pol: str
    seed_label: str
    seed_index: int


@dataclass(frozen=True)
class EtaSpectrum:
    point: SpectralPoint
    pol: str
    roots: tuple

    def etas(self):
        return np.array([r.eta for r in self.roots])

    def __len__(self):
        return len(self.roots)


def _sigma(model: DielectricModel, pol, xi):
    """sigma^(s) of the paper: mu for e, eps for h."""
    return model.mu(xi) if pol == "e" else model.eps(xi)


def _grating_params(pol, xi, groove_model, tooth_model):
    """(sigma1, sigma2, W) with W = [eps2*mu2 - eps1*mu1]*xi^2."""
    s1 = _sigma(groove_model, pol, xi)
    s2 = _sigma(tooth_model, pol, xi)
    w_shift = (tooth_model.eps_xi2(xi) * tooth_model.mu(xi)
               - groove_model.eps_xi2(xi) * groove_model.mu(xi))
    return s1, s2, w_shift


def dispersion_D(eta, pol, point: SpectralPoint, geom: GratingGeometry,
                 groove_model: DielectricModel, tooth_model: DielectricModel):
    """The real dispersion function whose zeros are the grating eigenvalues.

    Vectorized over eta.  Evaluated as

        -cos(alpha0*p) + C(eta,p1)*C(eta2,p2)
            - 0.5*[(s1/s2)*eta2 + (s2/s1)*eta] * S(eta,p1)*S(eta2,p2)

    with eta2 = eta - W; every factor is an entire function of eta, so the
    result cannot depend on any square-root sign choice.
    """
    s1, s2, w_shift = _grating_params(pol, point.xi, groove_model, tooth_model)
    eta = np.asarray(eta, dtype=float)
    eta2 = eta - w_shift
    p1, p2, p = geom.p1, geom.p2, geom.period
    if geom.is_homogeneous:
        e_eff = eta if geom.p2 == 0.0 else eta2
        return cosw(e_eff, p) - math.cos(point.alpha0 * p)
    cc = cosw(eta, p1) * cosw(eta2, p2)
    t_fac = 0.5 * ((s1 / s2) * eta2 + (s2 / s1) * eta)
    ss = sinw(eta, p1) * sinw(eta2, p2)
    return -math.cos(point.alpha0 * p) + cc - t_fac * ss


def _dispersion_scale(eta, pol, point, geom, groove_model, tooth_model):
    """Magnitude scale of the dispersion terms, for relative residuals."""
    s1, s2, w_shift = _grating_params(pol, point.xi, groove_model, tooth_model)
    eta = np.asarray(eta, dtype=float)
    eta2 = eta - w_shift
    p1, p2 = geom.p1, geom.p2
    if geom.is_homogeneous:
        return 2.0 * np.ones_like(eta)
    cc = np.abs(cosw(eta, p1) * cosw(eta2, p2))
    t_fac = 0.5 * (abs(s1 / s2) * np.abs(eta2) + abs(s2 / s1) * np.abs(eta))
    ss = np.abs(sinw(eta, p1) * sinw(eta2, p2))
    return 1.0 + cc + t_fac * ss


def seed_eta(pol, point: SpectralPoint, geom: GratingGeometry,
             groove_model: DielectricModel, tooth_model: DielectricModel, count):
    """Analytic asymptotic seeds (eta_guess, label) for the root search.

    h polarization with a metallic tooth: the groove family (nu*pi/p1)^2,
    the tooth family (nu*pi/p2)^2 + [eps-1]*xi^2, and the nu=0 mode from the
    low-frequency expansions; e polarization: Rayleigh values with a
    second-order correction of the dispersion function; at xi >> omega_p all
    seeds collapse to the Rayleigh set.
    """
    xi, a0, p = point.xi, point.alpha0, geom.period
    p1, p2 = geom.p1, geom.p2
    n_fam = count + 2
    seeds = []

    def rayleigh_seeds():
        out = []
        for nu in range(0, n_fam):
            out.append(((a0 + 2.0 * math.pi * nu / p) ** 2, "rayleigh_plus"))
            if nu > 0:
                out.append(((-a0 + 2.0 * math.pi * nu / p) ** 2, "rayleigh_minus"))
        return out

    if geom.is_homogeneous:
        return rayleigh_seeds()

    metallic = tooth_model.kind in ("drude", "plasma")
    w_shift = _grating_params(pol, xi, groove_model, tooth_model)[2]

    if pol == "h" and metallic and xi < 10.0 * tooth_model.omega_p:
        for nu in range(1, n_fam):
            seeds.append(((nu * math.pi / p1) ** 2, "groove"))
            seeds.append(((nu * math.pi / p2) ** 2 + w_shift, "tooth"))
        wp = tooth_model.omega_p
        if tooth_model.kind == "plasma":
            eta0 = 2.0 * xi ** 2 * (math.cosh(p2 * wp) - math.cos(a0 * p)) \
                / (wp * p1 * math.sinh(p2 * wp))
        else:
            gd = tooth_model.gamma_d
            eta0 = 2.0 * xi * gd * ((1.0 - math.cos(a0 * p)) / (wp ** 2 * p1 * p2)
                                    + 0.5 * (p2 / p1) * (xi / gd))
        seeds.append((eta0, "zero_mode"))
        if xi > tooth_model.omega_p:
            seeds.extend(rayleigh_seeds())
        return seeds

    # e polarization (or non-metallic tooth): Rayleigh values, optionally
    # polished by the quadratic expansion of the dispersion function.
    base = rayleigh_seeds()
    if not metallic:
        return base

    def dfun(e):
        return float(dispersion_D(e, pol, point, geom, groove_model, tooth_model))

    out = []
    for eta0, label in base:
        h = 1e-6 * (1.0 + abs(eta0))
        d0 = dfun(eta0)
        dp, dm = dfun(eta0 + h), dfun(eta0 - h)
        d1 = (dp - dm) / (2.0 * h)
        d2 = (dp - 2.0 * d0 + dm) / (h * h)
        disc = d1 * d1 - 4.0 * d0 * d2
        sign = -1.0 if label == "rayleigh_minus" else 1.0
        if disc >= 0.0 and (d1 - sign * math.sqrt(disc)) != 0.0:
            shift = -2.0 * d0 / (d1 - sign * math.sqrt(disc))
            if abs(shift) < 0.5 * (1.0 + abs(eta0)):
                out.append((eta0 + shift, label))
                continue
        out.append((eta0, label))
    return out


def _polish(fun, seed, scale):
    """Bracket a sign change around the seed and run brentq."""
    f0 = fun(seed)
    if f0 == 0.0:
        return seed
    h = 1e-6 * scale
    for _ in range(40):
        lo, hi = seed - h, seed + h
        flo, fhi = fun(lo), fun(hi)
        if np.sign(flo) != np.sign(fhi):
            return brentq(fun, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=200)
        if np.sign(flo) != np.sign(f0):
            return brentq(fun, lo, seed, xtol=1e-300, rtol=8.9e-16, maxiter=200)
        if np.sign(fhi) != np.sign(f0):
            return brentq(fun, seed, hi, xtol=1e-300, rtol=8.9e-16, maxiter=200)
        h *= 2.0
        if h > 0.2 * scale:
            return None
    return None


def _zero_xi_analytic_spectrum(pol, point, geom, groove_model, tooth_model, count):
    """Exact xi=0 eta sets for metallic teeth (no limiting procedure)."""
    p1, p2, p = geom.p1, geom.p2, geom.period
    roots = []
    if pol == "e":
        for nu in range(0, count + 2):
            roots.append(EtaRoot(point.alpha(nu) ** 2, pol, "rayleigh_plus", nu))
            if nu > 0:
                roots.append(EtaRoot(point.alpha(-nu) ** 2, pol, "rayleigh_minus", nu))
    else:
        shift = tooth_model.eps_xi2(0.0)  # omega_p^2 for plasma, 0 for Drude
        roots.append(EtaRoot(0.0, pol, "zero_mode", 0))
        for nu in range(1, count + 2):
            roots.append(EtaRoot((nu * math.pi / p1) ** 2, pol, "groove", nu))
            roots.append(EtaRoot((nu * math.pi / p2) ** 2 + shift, pol, "tooth", nu))
    roots.sort(key=lambda r: r.eta)
    dedup = []
    for r in roots:
        if dedup and abs(r.eta - dedup[-1].eta) < DEDUP_RTOL * (1.0 + abs(r.eta)):
            continue
        dedup.append(r)
    return EtaSpectrum(point, pol, tuple(dedup[:count]))


def solve_eta_spectrum(pol, point: SpectralPoint, geom: GratingGeometry,
                       groove_model: DielectricModel, tooth_model: DielectricModel,
                       count, eta_max=None):
    """The lowest `count` validated roots of the dispersion function.

    Seeds are polished with safeguarded bracketing/brentq; a uniform scan in
    sqrt(eta) backfills roots the seeds missed; duplicates are merged and the
    result is sorted ascending.  Residuals are checked relative to the local
    magnitude of the dispersion terms (the terms themselves grow like the
    tooth permittivity at small xi, so an absolute residual would be
    meaningless there).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    xi = point.xi
    metallic_tooth = tooth_model.kind in ("drude", "plasma")
    if groove_model.kind in ("drude", "plasma") and xi == 0.0 and not geom.is_homogeneous:
        raise ValueError("metallic grooves are not supported at xi = 0")
    if xi == 0.0 and metallic_tooth and not geom.is_homogeneous:
        # e polarization with a plasma tooth keeps W = omega_p^2 at xi = 0 and
        # stays a regular numeric problem; all other metallic cases are exact
        if pol == "h" or tooth_model.eps_xi2(0.0) == 0.0:
            return _zero_xi_analytic_spectrum(pol, point, geom, groove_model,
                                              tooth_model, count)

    p_min = min(geom.p1, geom.p2)
    if p_min == 0.0:
        p_min = geom.period
    if eta_max is None:
        eta_max = max(25.0, (count + 2) ** 2) * (math.pi / p_min) ** 2

    def dfun(e):
        return float(dispersion_D(e, pol, point, geom, groove_model, tooth_model))

    for _attempt in range(12):
        roots = {}

        def add_root(eta, label, index):
            if eta is None or not np.isfinite(eta) or eta < -1e-12 * (1.0 + abs(eta)):
                return
            eta = max(eta, 0.0)
            for known in list(roots):
                if abs(eta - known) < DEDUP_RTOL * (1.0 + abs(eta)):
                    return
            roots[eta] = (label, index)

        fam_counts = {}
        for eta0, label in seed_eta(pol, point, geom, groove_model, tooth_model, count):
            fam_counts[label] = fam_counts.get(label, 0) + 1
            if eta0 > 1.5 * eta_max:
                continue
            got = _polish(dfun, eta0, 1.0 + abs(eta0))
            add_root(got, label, fam_counts[label])

        # scan: resolve the fastest trig oscillation with >= 40 samples/period
        t_hi = math.sqrt(eta_max)
        n_t = max(64, int(40.0 * t_hi * p_min / math.pi) + 1)
        t = np.linspace(0.0, t_hi, n_t)
        vals = dispersion_D(t * t, pol, point, geom, groove_model, tooth_model)
        sgn = np.sign(vals)
        flips = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
        for i in flips:
            lo, hi = t[i] ** 2, t[i + 1] ** 2
            try:
                got = brentq(dfun, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=200)
            except ValueError:
                continue
            add_root(got, "scan", int(i))

        ordered = sorted(roots.items())
        validated = []
        for eta, (label, index) in ordered:
            scale = float(_dispersion_scale(eta, pol, point, geom,
                                            groove_model, tooth_model))
            scale *= 1.0 + abs(eta) * p_min * p_min
            resid = abs(dfun(eta))
            if resid > RESIDUAL_RTOL * scale:
                # steep-slope certificate: converged in eta to step tolerance
                h = 1e-7 * (1.0 + abs(eta))
                slope = abs(dfun(eta + h) - dfun(eta - h)) / (2.0 * h)
                if resid > slope * (1.0 + abs(eta)) * 1e-12:
                    continue
            validated.append(EtaRoot(eta, pol, label, index))
        if len(validated) >= count:
            return EtaSpectrum(point, pol, tuple(validated[:count]))
        eta_max *= 2.0
    raise RootSearchError(
        f"insufficient roots below eta_max for pol={pol}: "
        f"found {len(validated)}, need {count}")


def kappa_from_eta(eta, point: SpectralPoint, groove_model: DielectricModel):
    """kappa = sqrt(eps1*mu1*xi^2 + ky^2 + eta); lambda = +/- i*kappa."""
    base = groove_model.eps_xi2(point.xi) * groove_model.mu(point.xi)
    return math.sqrt(max(base + point.ky ** 2 + eta, 0.0))


def homogeneous_spectrum(model: DielectricModel, point: SpectralPoint,
                         period, count):
    """Rayleigh orders of a homogeneous region, ordered by ascending kappa.

    Returns a list of (order, alpha_order, kappa); the symmetric order set
    {0, -1, +1, ...} is truncated to `count` entries.
    """
    orders = [0]
    nu = 1
    while len(orders) < count + 4:
        orders.extend([-nu, nu])
        nu += 1
    base = model.eps_xi2(point.xi) * model.mu(point.xi) + point.ky ** 2
    entries = []
    for nu in orders:
        alpha = point.alpha0 + 2.0 * math.pi * nu / period
        entries.append((nu, alpha, math.sqrt(base + alpha * alpha)))
    entries.sort(key=lambda e: (e[2], abs(e[0]), -e[0]))
    return entries[:count]
