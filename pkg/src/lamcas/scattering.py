"""Theta (transfer) matrices, scattering operators, and reference solutions.

Bases are interleaved (e, r), (h, r) for rank r = 0..N-1, each polarization's
modes ordered by ascending kappa.  Every matrix entry is an adjoint/vector
product; the four direction combinations of one mode pair share two weighted
integrals, so a pair is summarized by raw arrays (IA, IB) (same polarization)
or (P1, P2) (cross polarization) plus kinematic scalars.  Because the modal
eta problem does not involve k_y, the raw arrays are k_y-independent and can
be reused across a quadrature row; only kappa = sqrt(chi^2 + k_y^2) changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .eigen import homogeneous_spectrum
from .geometry import SpectralPoint
from .materials import DielectricModel
from .modes import (HomogeneousMode, Region, bracket_integrals, grating_modes,
                    homogeneous_region)

COND_LIMIT = 1e12


class IllConditionedPivot(RuntimeError):
    pass


@dataclass
class ModeBasis:
    region: Region
    point: SpectralPoint
    n_per_pol: int
    modes_e: list
    modes_h: list
    orders: list | None = None  # Rayleigh orders for homogeneous bases

    @property
    def size(self):
        return 2 * self.n_per_pol

    def chi2(self):
        """Interleaved chi^2 = eps*mu*xi^2 + eta (so kappa^2 = chi^2 + ky^2)."""
        out = np.empty(self.size)
        out[0::2] = [m.chi2 for m in self.modes_e]
        out[1::2] = [m.chi2 for m in self.modes_h]
        return out

    def kappas(self, ky=None):
        if ky is None:
            ky = self.point.ky
        return np.sqrt(self.chi2() + ky * ky)

    def pol_is_e(self):
        mask = np.zeros(self.size, dtype=bool)
        mask[0::2] = True
        return mask


def homogeneous_basis(model: DielectricModel, point: SpectralPoint, n_per_pol):
    region = homogeneous_region(model, point.period)
    entries = homogeneous_spectrum(model, point, point.period, n_per_pol)
    orders = [e[0] for e in entries]
    modes_e = [HomogeneousMode("e", nu, point, region) for nu in orders]
    modes_h = [HomogeneousMode("h", nu, point, region) for nu in orders]
    return ModeBasis(region, point, n_per_pol, modes_e, modes_h, orders)


def grating_basis(region: Region, point: SpectralPoint, n_per_pol):
    if region.is_homogeneous:
        model = region.groove_model if region.geom.p2 == 0.0 else region.tooth_model
        if region.groove_model == region.tooth_model:
            model = region.groove_model
        return homogeneous_basis(model, point, n_per_pol)
    modes_e, _ = grating_modes("e", point, region, n_per_pol)
    modes_h, _ = grating_modes("h", point, region, n_per_pol)
    return ModeBasis(region, point, n_per_pol, modes_e, modes_h)


def _alpha_grid(basis: ModeBasis):
    return np.array([m.alpha for m in basis.modes_e])


def _jtables(gbasis: ModeBasis, alphas):
    """Overlap tables J[pol][kind][k, :] of one basis over an alpha grid.

    kind 0: int U e^{-i a x} / sigma(x) dx; 1: the same unweighted;
    kind 2/3: the d/dx U variants.  Homogeneous bases reduce to exact
    Kronecker entries (plane-wave orthogonality over one period).
    """
    if gbasis.orders is not None:
        p = gbasis.point.period
        own = np.array([m.alpha for m in gbasis.modes_e])
        match = np.abs(own[:, None] - alphas[None, :]) * p < 1e-9
        tables = {}
        for pol, modes in (("e", gbasis.modes_e), ("h", gbasis.modes_h)):
            j = np.zeros((4, len(modes), len(alphas)), dtype=complex)
            for k, m in enumerate(modes):
                amp = (-1.0) ** m.order * math.sqrt(m.sigma1 / (2.0 * p))
                j[1, k][match[k]] = amp * p
                j[3, k][match[k]] = 1j * m.alpha * amp * p
            j[0] = j[1] / modes[0].sigma1
            j[2] = j[3] / modes[0].sigma1
            tables[pol] = j
        return tables
    tables = {}
    for pol, modes in (("e", gbasis.modes_e), ("h", gbasis.modes_h)):
        j = np.empty((4, len(modes), len(alphas)), dtype=complex)
        for k, m in enumerate(modes):
            j[0, k] = m.overlap_planewave(alphas, derivative=False, weighted=True)
            j[2, k] = m.overlap_planewave(alphas, derivative=True, weighted=True)
            if m.region.is_homogeneous or pol == "e":
                s = m.sigma1  # e weight is 1/mu = 1; homogeneous weight constant
                j[1, k] = j[0, k] * s
                j[3, k] = j[2, k] * s
            else:
                j[1, k] = m.overlap_planewave(alphas, derivative=False, weighted=False)
                j[3, k] = m.overlap_planewave(alphas, derivative=True, weighted=False)
        tables[pol] = j
    return tables


def _jtables_cached(gbasis: ModeBasis, alphas):
    """Per-basis memo of the overlap tables (reused by every bracket table)."""
    cache = getattr(gbasis, "_jt_cache", None)
    key = alphas.tobytes()
    if cache is not None and cache[0] == key:
        return cache[1]
    jt = _jtables(gbasis, alphas)
    gbasis._jt_cache = (key, jt)
    return jt


@dataclass
class RawTable:
    """k_y-independent content of <adjoint_A[dA] | Y_B[dB]> for two bases.

    The bracket value is P + dA*dB*Q(ky) + dB*R(ky) with
      P = IA, Q = (kap_A/kap_B)*(chi_B/chi_A)*IB,
      R = sign_A * i*k_y/(xi*kap_B) * [(chi_B/chi_A)*P1 + P2],
    sign_A = +1 for an e row, -1 for an h row; the (IA, IB) arrays live on
    equal-polarization entries and (P1, P2) on cross-polarization ones.
    """

    ia: np.ndarray
    ib: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    chi_a: np.ndarray
    chi_b: np.ndarray
    sign_a: np.ndarray


@dataclass
class BracketTable:
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray

    def value(self, dir_a, dir_b):
        return self.p + (dir_a * dir_b) * self.q + dir_b * self.r


def table_at_ky(raw: RawTable, xi, ky):
    kap_a = np.sqrt(raw.chi_a + ky * ky)
    kap_b = np.sqrt(raw.chi_b + ky * ky)
    chi_ratio = raw.chi_b[None, :] / raw.chi_a[:, None]
    q = (kap_a[:, None] / kap_b[None, :]) * chi_ratio * raw.ib
    if ky == 0.0 or xi == 0.0:
        r = np.zeros_like(raw.ia)
    else:
        pref = raw.sign_a[:, None] * (1j * ky) / (xi * kap_b[None, :])
        r = pref * (chi_ratio * raw.p1 + raw.p2)
    return BracketTable(raw.ia, q, r)


def _amps(hom: ModeBasis, pol):
    modes = hom.modes_e if pol == "e" else hom.modes_h
    p = hom.point.period
    return np.array([(-1.0) ** m.order * math.sqrt(m.sigma1 / (2.0 * p))
                     for m in modes])


def raw_table(basis_a: ModeBasis, basis_b: ModeBasis, jt_cache=None):
    """RawTable of <adjoint_A | Y_B> for any combination of basis kinds."""
    n, m = basis_a.size, basis_b.size
    out = RawTable(np.zeros((n, m), complex), np.zeros((n, m), complex),
                   np.zeros((n, m), complex), np.zeros((n, m), complex),
                   basis_a.chi2(), basis_b.chi2(),
                   np.where(basis_a.pol_is_e(), 1.0, -1.0))
    a_hom, b_hom = basis_a.orders is not None, basis_b.orders is not None
    if a_hom:
        if b_hom and basis_a.orders != basis_b.orders:
            raise ValueError("homogeneous bases must share one Rayleigh order set")
        _fill_hom_to_grating(out, basis_a, basis_b, jt_cache)
    elif b_hom:
        _fill_grating_to_hom(out, basis_a, basis_b, jt_cache)
    else:
        _fill_grating_to_grating(out, basis_a, basis_b)
    return out


def _fill_hom_to_grating(out, hom, grat, jt):
    """A-side homogeneous; jt are B-side tables on hom's alpha grid."""
    if jt is None:
        jt = _jtables_cached(grat, _alpha_grid(hom))
    idx = np.arange(hom.n_per_pol)
    alp_a = _alpha_grid(hom)
    for sa in ("e", "h"):
        ra = 0 if sa == "e" else 1
        rows = 2 * idx + ra
        amp = _amps(hom, sa)
        inv_sig_a = 1.0 / (hom.modes_e[0] if sa == "e" else hom.modes_h[0]).sigma1
        for sb in ("e", "h"):
            rb = 0 if sb == "e" else 1
            cols = 2 * np.arange(grat.n_per_pol) + rb
            j = jt[sb]
            if sa == sb:
                out.ia[np.ix_(rows, cols)] = amp[:, None] * inv_sig_a * j[1].T
                out.ib[np.ix_(rows, cols)] = amp[:, None] * j[0].T
            else:
                if sa == "e":      # weight 1/(mu_A eps_B(x)) -> B-weighted tables
                    j0, j1, wconst = j[0].T, j[2].T, 1.0
                else:              # weight 1/(eps_A mu_B(x)) -> unweighted tables
                    j0, j1, wconst = j[1].T, j[3].T, inv_sig_a
                out.p1[np.ix_(rows, cols)] = (amp[:, None] * wconst
                                              * (-1j * alp_a[:, None]) * j0)
                out.p2[np.ix_(rows, cols)] = amp[:, None] * wconst * j1


def _fill_grating_to_hom(out, grat, hom, jt):
    if jt is None:
        jt = _jtables_cached(grat, _alpha_grid(hom))
    alp_b = _alpha_grid(hom)
    for sa in ("e", "h"):
        ra = 0 if sa == "e" else 1
        rows = 2 * np.arange(grat.n_per_pol) + ra
        j = jt[sa]
        for sb in ("e", "h"):
            rb = 0 if sb == "e" else 1
            cols = 2 * np.arange(hom.n_per_pol) + rb
            amp = _amps(hom, sb)
            inv_sig_b = 1.0 / (hom.modes_e[0] if sb == "e" else hom.modes_h[0]).sigma1
            if sa == sb:
                out.ia[np.ix_(rows, cols)] = amp[None, :] * j[0]
                out.ib[np.ix_(rows, cols)] = amp[None, :] * inv_sig_b * j[1]
            else:
                if sa == "e":      # weight 1/(mu_A(x) eps_B) -> unweighted tables
                    j0, j1, wconst = j[1], j[3], inv_sig_b
                else:              # weight 1/(eps_A(x) mu_B) -> A-weighted tables
                    j0, j1, wconst = j[0], j[2], 1.0
                out.p1[np.ix_(rows, cols)] = -wconst * amp[None, :] * j1
                out.p2[np.ix_(rows, cols)] = (wconst * amp[None, :]
                                              * (1j * alp_b[None, :]) * j0)


def _fill_grating_to_grating(out, basis_a, basis_b):
    """Generic closed-form piecewise integrals (multilayer interfaces)."""
    amodes = [m for pair in zip(basis_a.modes_e, basis_a.modes_h) for m in pair]
    bmodes = [m for pair in zip(basis_b.modes_e, basis_b.modes_h) for m in pair]
    for i, ma in enumerate(amodes):
        for j, mb in enumerate(bmodes):
            x, y = bracket_integrals(ma, mb)
            if ma.pol == mb.pol:
                out.ia[i, j] = x
                out.ib[i, j] = y
            else:
                out.p1[i, j] = x
                out.p2[i, j] = y


# -- theta matrices ---------------------------------------------------------


@dataclass
class GratingOperator:
    """G(d) = sum over modes and directions of |Y><adjoint| e^{-i lambda d}."""

    basis: ModeBasis
    depth: float

    def phases(self, direction, ky=None):
        return np.exp(direction * self.basis.kappas(ky) * self.depth)


def build_theta(basis_m: ModeBasis, gop: GratingOperator, basis_v: ModeBasis,
                point: SpectralPoint, ky=None):
    """The four theta blocks (paper convention: A_m-tilde = Theta * A_v).

    Raw transfer form; entries grow like exp(+kappa*d) for deep gratings,
    which is what the stabilized solve below avoids.
    """
    if ky is None:
        ky = point.ky
    lt = table_at_ky(raw_table(basis_m, gop.basis), point.xi, ky)
    rt = table_at_ky(raw_table(gop.basis, basis_v), point.xi, ky)
    th = {}
    for i, di in ((1, -1.0), (2, 1.0)):
        for j, dj in ((1, -1.0), (2, 1.0)):
            acc = None
            for dg in (1.0, -1.0):
                term = (lt.value(di, dg) * gop.phases(dg, ky)[None, :]) @ rt.value(dg, dj)
                acc = term if acc is None else acc + term
            th[(i, j)] = acc
    return th[(1, 1)], th[(1, 2)], th[(2, 1)], th[(2, 2)]


def condition_estimate(a):
    """1-norm condition estimate of a square complex matrix."""
    lu, piv = sla.lu_factor(a, check_finite=False)
    anorm = np.linalg.norm(a, 1)
    gecon = sla.get_lapack_funcs(("gecon",), (lu,))[0]
    rcond, _ = gecon(lu, anorm, norm="1")
    return 1.0 / max(rcond, 1e-300)


@dataclass
class ScatteringSet:
    r_left: np.ndarray
    r_right: np.ndarray
    t_left: np.ndarray
    t_right: np.ndarray
    condition: float


def scattering_from_theta(th11, th12, th21, th22):
    """Reflection/transmission operators via linear solves on the pivot block.

    Raises IllConditionedPivot when the pivot block's condition estimate
    exceeds 1e12 (deep gratings / high orders); the stabilized solve covers
    those.
    """
    cond = condition_estimate(th22)
    if cond > COND_LIMIT:
        raise IllConditionedPivot(
            f"pivotal matrix ill-conditioned (estimate {cond:.3e})")
    lu, piv = sla.lu_factor(th22, check_finite=False)
    r_left = -sla.lu_solve((lu, piv), th21, check_finite=False)
    t_right = sla.lu_solve((lu, piv), np.eye(th22.shape[0], dtype=complex),
                           check_finite=False)
    r_right = th12 @ t_right
    t_left = th11 + th12 @ r_left
    return ScatteringSet(r_left, r_right, t_left, t_right, cond)


def fresnel_reference(model_m: DielectricModel, xi, k_transverse):
    """(r_TE, r_TM) of a planar vacuum/medium interface on the imaginary axis.

    Sign convention of the modal pipeline's 00 block: r_TE -> -1 and
    r_TM -> +1 for a perfect mirror.  Drude at xi = 0 gives exactly (0, 1).
    """
    k2 = k_transverse * k_transverse
    kv = math.sqrt(xi * xi + k2)
    km = math.sqrt(model_m.eps_xi2(xi) * model_m.mu(xi) + k2)
    r_te = (kv - km) / (kv + km) if kv + km > 0.0 else 0.0
    if xi == 0.0 and model_m.kind in ("drude", "plasma"):
        r_tm = 1.0
    else:
        eps = model_m.eps(xi)
        r_tm = (eps * kv - km) / (eps * kv + km)
    return r_te, r_tm


# -- stabilized scattering solve --------------------------------------------
#
# The pivot block carries exp(+kappa*d) factors; referencing each layer's
# growing amplitudes at its far interface leaves a bounded system in which
# only exp(-kappa*d) <= 1 appears.  Solving it is algebraically identical to
# R = -Theta22^-1 Theta21 but stable at any depth (the per-column log-scale
# rescaling of the grating columns, in solved form).


@dataclass
class ChainCache:
    """k_y-independent data of a stack out | layer_S .. layer_1 | gap."""

    tables: list       # RawTable of <adjoint_layer_i | modes of region below>
    out_table: RawTable
    layers: list       # [(ModeBasis, depth)]
    basis_out: ModeBasis
    basis_gap: ModeBasis


def build_chain(basis_out: ModeBasis, layers, basis_gap: ModeBasis):
    tables = []
    prev = basis_gap
    for basis, _depth in layers:
        tables.append(raw_table(basis, prev))
        prev = basis
    return ChainCache(tables, raw_table(basis_out, prev), list(layers),
                      basis_out, basis_gap)


def stable_scattering(chain: ChainCache, point: SpectralPoint, drive="gap",
                      ky=None):
    """Reflection/transmission of the stack, bounded solve.

    drive="gap": incoming unit amplitudes from the gap side; returns
    (R, T) = (gap-side reflection, amplitudes transmitted into basis_out).
    drive="out": incoming from the basis_out side; returns (R, T) likewise
    referenced to the out side.  For the paper's operators: the left arrow
    R of the left structure is drive "gap" on (m_L | grating | gap); the
    right arrow R of the right structure is drive "out" on
    (gap | grating | m_R) with basis_out the gap basis.
    """
    if ky is None:
        ky = point.ky
    xi = point.xi
    sizes = [b.size for b, _d in chain.layers]
    n_gap = chain.basis_gap.size
    n_out = chain.basis_out.size
    if n_out != n_gap:
        raise ValueError("all bases must share one truncation size")
    tabs = [table_at_ky(t, xi, ky) for t in chain.tables]
    out_tab = table_at_ky(chain.out_table, xi, ky)
    decays = [np.exp(-b.kappas(ky) * d) for b, d in chain.layers]

    n_unk = n_gap
    total = n_unk + 2 * sum(sizes)
    a = np.zeros((total, total), dtype=complex)
    rhs = np.zeros((total, n_gap), dtype=complex)

    def hp(i):
        return n_unk + 2 * sum(sizes[:i])

    def hm(i):
        return hp(i) + sizes[i]

    row = 0
    t1 = tabs[0]
    for dg in (1.0, -1.0):
        a[row:row + sizes[0], :n_unk] = -t1.value(dg, 1.0)
        if dg > 0:
            a[row:row + sizes[0], hp(0):hp(0) + sizes[0]] = np.diag(decays[0])
        else:
            a[row:row + sizes[0], hm(0):hm(0) + sizes[0]] = np.eye(sizes[0])
        if drive == "gap":
            rhs[row:row + sizes[0]] = t1.value(dg, -1.0)
        row += sizes[0]

    for i in range(1, len(chain.layers)):
        t = tabs[i]
        for dg_next in (1.0, -1.0):
            a[row:row + sizes[i], hp(i - 1):hp(i - 1) + sizes[i - 1]] = \
                -t.value(dg_next, 1.0)
            a[row:row + sizes[i], hm(i - 1):hm(i - 1) + sizes[i - 1]] = \
                -t.value(dg_next, -1.0) * decays[i - 1][None, :]
            if dg_next > 0:
                a[row:row + sizes[i], hp(i):hp(i) + sizes[i]] = np.diag(decays[i])
            else:
                a[row:row + sizes[i], hm(i):hm(i) + sizes[i]] = np.eye(sizes[i])
            row += sizes[i]

    last = len(chain.layers) - 1
    a[row:row + n_out, hp(last):hp(last) + sizes[last]] = out_tab.value(1.0, 1.0)
    a[row:row + n_out, hm(last):hm(last) + sizes[last]] = \
        out_tab.value(1.0, -1.0) * decays[last][None, :]
    if drive == "out":
        rhs[row:row + n_out] = np.eye(n_out)
    row += n_out
    if row != total:
        raise AssertionError("stable_scattering system shape mismatch")

    sol = np.linalg.solve(a, rhs)
    a_gap_plus = sol[:n_unk]
    a_out_minus = (out_tab.value(-1.0, 1.0) @ sol[hp(last):hp(last) + sizes[last]]
                   + (out_tab.value(-1.0, -1.0) * decays[last][None, :])
                   @ sol[hm(last):hm(last) + sizes[last]])
    if drive == "gap":
        return a_gap_plus, a_out_minus
    return a_out_minus, a_gap_plus


# -- direct boundary-matching solve (plane-wave-projected test oracle) ------


def _component_projections(basis: ModeBasis, direction, alphas, jt=None):
    """alpha-projected tangential components (4, n_alpha, n_modes).

    Rows are (E_x, E_y, H_x, H_y); entry [c, g, m] is the projection
    (1/p) int F_c(x) exp(-i alpha_g x) dx of mode m at the given direction.
    """
    point = basis.point
    xi, ky = point.xi, point.ky
    p = point.period
    n_a = len(alphas)
    if jt is None:
        jt = _jtables(basis, alphas)
    cols = []
    for pol_bit in (0, 1):
        pol = "e" if pol_bit == 0 else "h"
        modes = basis.modes_e if pol_bit == 0 else basis.modes_h
        j = jt[pol]
        for k, m in enumerate(modes):
            c = np.zeros((4, n_a), dtype=complex)
            scal = direction * m.chi2 / (xi * m.kappa)
            scal_k = 1j * direction * ky / (xi * m.kappa)
            if pol == "e":
                c[1] = j[1][k] / p
                c[2] = scal * j[0][k] / p
                c[3] = -scal_k * j[2][k] / p
            else:
                c[0] = -scal * j[0][k] / p
                c[1] = scal_k * j[2][k] / p
                c[3] = j[1][k] / p
            cols.append(c)
    out = np.empty((4, n_a, len(cols)), dtype=complex)
    n = basis.n_per_pol
    for r in range(n):
        out[:, :, 2 * r] = cols[r]
        out[:, :, 2 * r + 1] = cols[n + r]
    return out


def boundary_solve(basis_m: ModeBasis, gop: GratingOperator, basis_v: ModeBasis):
    """Plane-wave-projected interface matching; returns (R_left, T_left).

    A genuinely different discretization of the same continuum problem
    (plane-wave test functions instead of adjoint projections); it converges
    to the theta-path operators as the truncation grows and coincides with
    them exactly for homogeneous stacks.
    """
    alphas = _alpha_grid(basis_v)
    n = basis_v.size
    m2 = gop.basis.size
    jt_g = _jtables(gop.basis, alphas)
    vin = _component_projections(basis_v, -1.0, alphas)
    vout = _component_projections(basis_v, +1.0, alphas)
    gplus = _component_projections(gop.basis, +1.0, alphas, jt_g)
    gminus = _component_projections(gop.basis, -1.0, alphas, jt_g)
    mout = _component_projections(basis_m, -1.0, alphas)
    kg = gop.basis.kappas()
    ph_p = np.exp(+kg * gop.depth)
    ph_m = np.exp(-kg * gop.depth)

    def flat(c):
        return c.reshape(4 * len(alphas), -1)

    n_rows = 8 * len(alphas)
    a = np.zeros((n_rows, n + 2 * m2 + n), dtype=complex)
    rhs = np.zeros((n_rows, n), dtype=complex)
    half = 4 * len(alphas)
    a[:half, :n] = flat(vout)
    a[:half, n:n + m2] = -flat(gplus)
    a[:half, n + m2:n + 2 * m2] = -flat(gminus)
    rhs[:half] = -flat(vin)
    a[half:, n:n + m2] = flat(gplus) * ph_p[None, :]
    a[half:, n + m2:n + 2 * m2] = flat(gminus) * ph_m[None, :]
    a[half:, n + 2 * m2:] = -flat(mout)
    sol = np.linalg.solve(a, rhs)
    return sol[:n], sol[n + 2 * m2:]
