"""Casimir free energy and pressure between two structures across a vacuum
gap: Matsubara sum, Brillouin-zone and transverse-wavevector quadratures,
inversion-free log-determinants, and closed-form asymptotic references.

The round-trip determinant is evaluated from the stabilized scattering
operators; this is the exact rearrangement of the two-determinant ratio
(numerator/denominator share their growing gap factors, which cancel), and
the literal two-determinant form is kept alongside for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
from scipy.special import roots_laguerre, roots_legendre

from .constants import (ENERGY_SI, HBAR_C_J_M, K_B_EV_PER_K, PRESSURE_SI,
                        ZETA_3, thermal_wavevector_unit)
from .geometry import GratingGeometry, SpectralPoint
from .materials import DielectricModel, ThermalContext, vacuum
from .modes import Region
from .scattering import (GratingOperator, build_chain, build_theta,
                         fresnel_reference, grating_basis, homogeneous_basis,
                         stable_scattering)
from .zerofreq import (_zero_orders, prepare_zero_slices,
                       zero_reflection_prepared)

K_B_J_PER_K = K_B_EV_PER_K * 1.602176634e-19


class ConvergenceWarningError(RuntimeError):
    pass


@dataclass(frozen=True)
class Structure:
    """A plane, a lamellar grating, or a multilayer stack of gratings.

    slices are ordered from the vacuum gap inward; every slice shares the
    common period.  A plane is the degenerate case with no slices.
    """

    backing: DielectricModel
    slices: tuple = ()

    @property
    def is_plane(self):
        return len(self.slices) == 0

    def period(self):
        if self.is_plane:
            return None
        return self.slices[0][0].period

    def max_tooth_kind(self):
        kinds = {self.backing.kind}
        for _geom, _groove, tooth in self.slices:
            kinds.add(tooth.kind)
        return kinds


def plane(model: DielectricModel):
    return Structure(backing=model)


def grating(geom: GratingGeometry, groove_model, tooth_model, backing=None):
    return Structure(backing=tooth_model if backing is None else backing,
                     slices=((geom, groove_model, tooth_model),))


def multilayer(slices, backing):
    return Structure(backing=backing, slices=tuple(slices))


@dataclass(frozen=True)
class Tolerances:
    matsubara_tail_rtol: float = 1e-3
    term_skip_rtol: float = 1e-14
    imag_residual_rtol: float = 1e-9


@dataclass(frozen=True)
class CasimirConfig:
    left: Structure
    right: Structure
    gap: float                   # nm
    temperature: float = 300.0   # K
    n_max: int = 11
    n_alpha: int = 30
    n_ky: int = 20
    ky_scale: float | None = None   # 1/nm; default 1/(2*gap)
    l_max: int = 41
    period: float | None = None     # required only for plane-plane
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.gap <= 0.0:
            raise ValueError("gap must be positive")
        if self.l_max < 1 or self.n_alpha < 2 or self.n_ky < 2:
            raise ValueError("l_max >= 1 and quadrature orders >= 2 required")
        periods = {s.period() for s in (self.left, self.right)} - {None}
        if len(periods) > 1:
            raise ValueError("left and right structures must share one period")
        if not periods and self.period is None:
            object.__setattr__(self, "period", 250.0)
        elif periods:
            p = periods.pop()
            if self.period is not None and abs(self.period - p) > 1e-9:
                raise ValueError("config period conflicts with the structures'")
            object.__setattr__(self, "period", p)

    def thermal(self):
        return ThermalContext(self.temperature)


def _structure_layers(structure: Structure, point, n):
    out = []
    for geom, groove_model, tooth_model in structure.slices:
        region = Region(geom, groove_model, tooth_model)
        out.append((grating_basis(region, point, n), geom.depth))
    return out


class NodeGroup:
    """Mode bases and coupling tables for one (xi, alpha0); k_y enters only
    through kinematic scalars, so a group serves a whole quadrature row."""

    def __init__(self, cfg: CasimirConfig, xi, alpha0):
        self.cfg = cfg
        self.point = SpectralPoint(xi, alpha0, 0.0, cfg.period)
        n = cfg.n_max
        self.basis_v = homogeneous_basis(vacuum(), self.point, n)
        bm_l = homogeneous_basis(cfg.left.backing, self.point, n)
        bm_r = homogeneous_basis(cfg.right.backing, self.point, n)
        layers_l = _structure_layers(cfg.left, self.point, n)
        layers_r = _structure_layers(cfg.right, self.point, n)
        if not layers_l:
            layers_l = [(homogeneous_basis(cfg.left.backing, self.point, n), 0.0)]
        if not layers_r:
            layers_r = [(homogeneous_basis(cfg.right.backing, self.point, n), 0.0)]
        self.chain_left = build_chain(bm_l, layers_l, self.basis_v)
        self.chain_right = build_chain(self.basis_v, list(reversed(layers_r)), bm_r)
        self.chi2_v = self.basis_v.chi2()

    def reflections(self, ky):
        r_left, _ = stable_scattering(self.chain_left, self.point, drive="gap", ky=ky)
        r_right, _ = stable_scattering(self.chain_right, self.point, drive="out", ky=ky)
        return r_left, r_right

    def integrand(self, ky, gaps, want_pressure=True, reflections=None):
        """log det(1 - R_left P R_right P) and its gap derivative, per gap."""
        r_left, r_right = self.reflections(ky) if reflections is None else reflections
        kappas = np.sqrt(self.chi2_v + ky * ky)
        out = np.empty((len(gaps), 2))
        eye = np.eye(len(kappas))
        for i, a in enumerate(gaps):
            p_dec = np.exp(-kappas * a)
            lp = r_left * p_dec[None, :]
            rp = r_right * p_dec[None, :]
            m = lp @ rp
            one_m = eye - m
            sign, logdet = np.linalg.slogdet(one_m)
            out[i, 0] = logdet
            if want_pressure:
                dm = (lp * (-kappas[None, :])) @ rp + lp @ (rp * (-kappas[None, :]))
                x = np.linalg.solve(one_m, dm)
                out[i, 1] = -np.trace(x).real
            else:
                out[i, 1] = 0.0
        return out


# -- zero-frequency (l = 0) node ---------------------------------------------


class ZeroNodeGroup:
    """The xi = 0 term: per-polarization-sector determinants built from the
    exact limit operators (cross-sector round trips are dropped; they vanish
    identically at k_y = 0 and carry O((k_y p)^2) weight elsewhere)."""

    def __init__(self, cfg: CasimirConfig, alpha0):
        self.cfg = cfg
        self.alpha0 = alpha0
        n = cfg.n_max
        self.orders = _zero_orders(n, alpha0, cfg.period, 0.0)
        self.alphas = np.array([alpha0 + 2.0 * math.pi * nu / cfg.period
                                for nu in self.orders])
        # cacheable (k_y-independent) sector data per side and polarization
        self._prepared = {}
        for side, structure in (("L", cfg.left), ("R", cfg.right)):
            for pol in ("h", "e"):
                self._prepared[(side, pol)] = self._prepare(structure, pol)

    def _prepare(self, structure: Structure, pol):
        if structure.is_plane:
            model = structure.backing
            if model.is_vacuum:
                return None
            if pol == "e" and model.kind in ("drude", "constant"):
                rte0 = [fresnel_reference(model, 0.0, abs(a))[0] for a in self.alphas]
                if max(abs(r) for r in rte0) == 0.0:
                    return None
            return ("plane", model)
        teeth = {tooth.kind for _g, _gr, tooth in structure.slices}
        if pol == "e" and teeth <= {"drude", "constant", "vacuum"}:
            return None  # [eps-1]*xi^2 -> 0: exactly transparent sector
        slices = [(Region(geom, groove, tooth), geom.depth)
                  for geom, groove, tooth in structure.slices]
        prep = prepare_zero_slices(slices, self.alpha0, self.alphas,
                                   self.cfg.n_max, pol)
        return ("grating", prep, structure.backing)

    def _sector_reflection(self, side, pol, ky):
        data = self._prepared[(side, pol)]
        if data is None:
            return None
        if data[0] == "plane":
            model = data[1]
            rs = []
            for a in self.alphas:
                k = math.sqrt(ky * ky + a * a)
                rte, rtm = fresnel_reference(model, 0.0, k)
                rs.append(rtm if pol == "h" else rte)
            r = np.diag(np.array(rs, dtype=complex))
            return None if np.max(np.abs(r)) == 0.0 else r
        _tag, prep, backing = data
        r, _kv = zero_reflection_prepared(prep, backing, self.alphas, ky, pol)
        return r

    def integrand(self, ky, gaps, want_pressure=True):
        cfg = self.cfg
        n = cfg.n_max
        kappas = np.sqrt(ky * ky + self.alphas ** 2)
        out = np.zeros((len(gaps), 2))
        eye = np.eye(n)
        for pol in ("h", "e"):
            r_l = self._sector_reflection("L", pol, ky)
            if r_l is None:
                continue
            r_r = self._sector_reflection("R", pol, ky)
            if r_r is None:
                continue
            for i, a in enumerate(gaps):
                p_dec = np.exp(-kappas * a)
                lp = r_l * p_dec[None, :]
                rp = r_r * p_dec[None, :]
                m = lp @ rp
                one_m = eye - m
                _s, logdet = np.linalg.slogdet(one_m)
                out[i, 0] += logdet
                if want_pressure:
                    dm = (lp * (-kappas[None, :])) @ rp \
                        + lp @ (rp * (-kappas[None, :]))
                    out[i, 1] += -np.trace(np.linalg.solve(one_m, dm)).real
        return out


# -- quadratures and the Matsubara loop --------------------------------------


def alpha_quadrature(cfg: CasimirConfig):
    x, w = roots_legendre(cfg.n_alpha)
    half = 0.5 * math.pi / cfg.period
    return half * (x + 1.0), half * w


def ky_quadrature(cfg: CasimirConfig, gap):
    x, w = roots_laguerre(cfg.n_ky)
    scale = cfg.ky_scale if cfg.ky_scale is not None else 1.0 / (2.0 * gap)
    return scale * x, scale * (w * np.exp(x))


def _group_for(cfg, l, alpha0):
    if l == 0:
        return ZeroNodeGroup(cfg, alpha0)
    xi = cfg.thermal().matsubara_xi(l)
    return NodeGroup(cfg, xi, alpha0)


def _group_row(cfg, l, alpha0, gaps, want_pressure):
    """Integral over k_y of the (log det, d/da log det) row of one group."""
    group = _group_for(cfg, l, alpha0)
    acc = {}
    for a in gaps:
        acc[a] = np.zeros(2)
    by_gap = {a: i for i, a in enumerate(gaps)}
    for a in gaps:
        nodes, weights = ky_quadrature(cfg, a)
        for ky, w in zip(nodes, weights):
            val = group.integrand(ky, [a], want_pressure)
            acc[a] += w * val[0]
    return np.array([acc[a] for a in gaps])


def matsubara_terms(cfg: CasimirConfig, gaps, want_pressure=True, workers=1,
                    l_values=None):
    """Per-l quadrature sums: terms[l][gap_index] = (logdet-int, d/da-int).

    The (l, alpha0) lattice is embarrassingly parallel; accumulation happens
    in a fixed sorted order, so the result is bit-identical for any worker
    count.  Unless explicit l_values are given, the sum stops early once two
    consecutive terms fall below the skip tolerance relative to the running
    total at every gap (the remaining terms are physically negligible).
    """
    a_nodes, a_weights = alpha_quadrature(cfg)
    explicit = l_values is not None
    l_list = list(l_values) if explicit else list(range(cfg.l_max + 1))

    pool = None
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        pool = ProcessPoolExecutor(max_workers=workers)

    col = 1 if want_pressure else 0
    terms = {}
    running = np.zeros(len(gaps))
    small_streak = 0
    try:
        for l in l_list:
            if pool is not None:
                futs = [pool.submit(_group_row, cfg, l, a_nodes[i], tuple(gaps),
                                    want_pressure) for i in range(len(a_nodes))]
                rows = [f.result() for f in futs]
            else:
                rows = [_group_row(cfg, l, a_nodes[i], tuple(gaps), want_pressure)
                        for i in range(len(a_nodes))]
            acc = np.zeros((len(gaps), 2))
            for i in range(len(a_nodes)):
                acc += a_weights[i] * rows[i]
            terms[l] = acc
            weight = 0.5 if l == 0 else 1.0
            running = running + weight * np.abs(acc[:, col])
            if not explicit and l >= 2:
                rel = np.max(np.abs(acc[:, col])
                             / np.maximum(running, 1e-300))
                small_streak = small_streak + 1 \
                    if rel < cfg.tolerances.term_skip_rtol else 0
                if small_streak >= 2:
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    return terms


def _matsubara_sum(cfg, terms, column):
    """Primed sum over l with a geometric tail estimate from the last terms."""
    total = 0.5 * terms[0][:, column]
    ls = sorted(k for k in terms if k > 0)
    for l in ls:
        total = total + terms[l][:, column]
    tail = np.zeros_like(total)
    if len(ls) >= 5:
        last = np.array([np.abs(terms[l][:, column]) for l in ls[-5:]])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(last[-2] > 0.0, last[-1] / last[-2], 0.0)
        ratio = np.clip(ratio, 0.0, 0.999)
        tail = last[-1] * ratio / (1.0 - ratio)
    return total, tail


def pressure(cfg: CasimirConfig, workers=1, gaps=None, report_tail=False):
    """Casimir pressure in Pa (negative = attractive).

    P = -(1/(pi^2 beta)) sum'_l int dk_y int dalpha0 d/da log det[...],
    with the a-derivative taken analytically through the gap phases.
    """
    gaps = [cfg.gap] if gaps is None else list(gaps)
    terms = matsubara_terms(cfg, gaps, want_pressure=True, workers=workers)
    total, tail = _matsubara_sum(cfg, terms, 1)
    unit = thermal_wavevector_unit(cfg.temperature) / (2.0 * math.pi)
    pref = -unit / math.pi ** 2
    vals = PRESSURE_SI * pref * total
    tail_rel = np.max(np.abs(tail) / np.maximum(np.abs(total), 1e-300))
    if tail_rel > cfg.tolerances.matsubara_tail_rtol:
        import warnings
        warnings.warn(f"Matsubara tail estimate {tail_rel:.2e} exceeds "
                      f"{cfg.tolerances.matsubara_tail_rtol:.1e}; raise l_max",
                      RuntimeWarning)
    if report_tail:
        return (vals, tail_rel) if len(gaps) > 1 else (float(vals[0]), tail_rel)
    return vals if len(gaps) > 1 else float(vals[0])


def free_energy(cfg: CasimirConfig, workers=1, gaps=None):
    """Casimir free energy per unit area in J/m^2 (negative, binding)."""
    gaps = [cfg.gap] if gaps is None else list(gaps)
    terms = matsubara_terms(cfg, gaps, want_pressure=False, workers=workers)
    total, _tail = _matsubara_sum(cfg, terms, 0)
    unit = thermal_wavevector_unit(cfg.temperature) / (2.0 * math.pi)
    pref = unit / math.pi ** 2
    vals = ENERGY_SI * pref * total
    return vals if len(gaps) > 1 else float(vals[0])


# -- explicit composite-pivotal / two-determinant path ------------------------


def vacuum_gap_phases(basis_v, a, ky=None):
    """Diagonal gap propagation factors e^{-kappa a} of the vacuum basis."""
    return np.exp(-basis_v.kappas(ky) * a)


def composite_pivotal(group: NodeGroup, ky, a):
    """Numerator and denominator matrices of the two-determinant form, with
    the shared per-column log scale factors pulled out.

    N = Th21_L P_dec Th12_R + Th22_L P_grow Th22_R,  D = Th22_L P_grow Th22_R;
    returns (N_scaled, D_scaled, col_log_scales).
    """
    point = group.point
    bm_l = group.chain_left.basis_out
    bg_l = group.chain_left.layers[0][0]
    d_l = group.chain_left.layers[0][1]
    bm_r = group.chain_right.basis_gap
    bg_r = group.chain_right.layers[0][0]
    d_r = group.chain_right.layers[0][1]
    bv = group.basis_v
    th_l = build_theta(bm_l, GratingOperator(bg_l, d_l), bv, point, ky=ky)
    th_r = build_theta(bv, GratingOperator(bg_r, d_r), bm_r, point, ky=ky)
    th21_l, th22_l = th_l[2], th_l[3]
    th12_r, th22_r = th_r[1], th_r[3]
    kap = bv.kappas(ky)
    p_dec = np.exp(-kap * a)
    term1 = (th21_l * p_dec[None, :]) @ th12_r
    # growing factors enter through per-column log scales only
    logs = kap * a
    grow_part = th22_l @ (np.exp(logs - logs.max())[:, None] * th22_r)
    scale = logs.max()
    n_scaled = term1 * math.exp(-scale) + grow_part
    d_scaled = grow_part
    return n_scaled, d_scaled, scale


def log_det_ratio_two_determinants(group: NodeGroup, ky, a):
    """log det N - log det D evaluated literally (shared scales cancel)."""
    n_scaled, d_scaled, _scale = composite_pivotal(group, ky, a)
    s1, ld1 = np.linalg.slogdet(n_scaled)
    s2, ld2 = np.linalg.slogdet(d_scaled)
    return ld1 - ld2


def log_det_ratio(group: NodeGroup, ky, a):
    """Production path: det(1 - R P R P) from the stabilized operators."""
    return float(group.integrand(ky, [a], want_pressure=False)[0, 0])


# -- independent references ----------------------------------------------------


def lifshitz_plane_plane(model_l: DielectricModel, model_r: DielectricModel,
                         a, temperature, n_k=120, l_max=None, rtol=1e-10):
    """Plane-plane pressure in Pa by the closed-form reflection kernel.

    Entirely independent of the modal machinery: Fresnel amplitudes and a
    Gauss-Laguerre transverse integral.
    """
    ctx = ThermalContext(temperature)
    x, w = roots_laguerre(n_k)
    scale = 1.0 / (2.0 * a)
    k = scale * x
    wk = scale * w * np.exp(x)

    def term(xi):
        kappa = np.sqrt(xi * xi + k * k)
        e2 = np.exp(-2.0 * kappa * a)
        s = np.zeros_like(k)
        rl = np.array([fresnel_reference(model_l, xi, kk) for kk in k])
        rr = np.array([fresnel_reference(model_r, xi, kk) for kk in k])
        for pol in (0, 1):
            prod = rl[:, pol] * rr[:, pol] * e2
            s = s + kappa * prod / (1.0 - prod)
        return float(np.sum(wk * k * s))

    total = 0.5 * term(0.0)
    l = 1
    while True:
        xi = ctx.matsubara_xi(l)
        t = term(xi)
        total += t
        if abs(t) < rtol * abs(total) or (l_max is not None and l >= l_max):
            break
        if l > 100000:
            raise ConvergenceWarningError("Lifshitz Matsubara sum did not converge")
        l += 1
    unit = thermal_wavevector_unit(temperature) / (2.0 * math.pi)
    return PRESSURE_SI * (-unit / math.pi) * total


def large_distance_asymptote(a, temperature):
    """-zeta(3) k_B T / (8 pi a^3) in Pa; a in nm."""
    a_m = a * 1e-9
    return -ZETA_3 * K_B_J_PER_K * temperature / (8.0 * math.pi * a_m ** 3)


def filling_factor_asymptote(a, filling, omega_p):
    """Short-distance plane-plane law scaled by the tooth filling factor.

    -1.79 * f * omega_p * hbar*c * pi / (720 a^3); omega_p in 1/nm, a in nm.
    """
    if not 0.0 <= filling <= 1.0:
        raise ValueError("filling factor must lie in [0, 1]")
    a_m = a * 1e-9
    wp_m = omega_p * 1e9
    return -1.79 * filling * wp_m * HBAR_C_J_M * math.pi / (720.0 * a_m ** 3)


def convergence_report(cfg: CasimirConfig, workers=1):
    """Pressure deltas under the documented truncation variations."""
    rows = []
    base = pressure(cfg, workers=workers)
    for l_max in (37, 41, 45):
        c = replace(cfg, l_max=l_max)
        val = pressure(c, workers=workers)
        rows.append(("l_max", l_max, val, abs(val - base) / abs(base)))
    for n_max in (7, 9, 11, 13):
        c = replace(cfg, n_max=n_max)
        val = pressure(c, workers=workers)
        rows.append(("n_max", n_max, val, abs(val - base) / abs(base)))
    for fac, na, nk in (("quad-50%", max(2, cfg.n_alpha // 2), max(2, cfg.n_ky // 2)),
                        ("quad+50%", cfg.n_alpha * 3 // 2, cfg.n_ky * 3 // 2)):
        c = replace(cfg, n_alpha=na, n_ky=nk)
        val = pressure(c, workers=workers)
        rows.append((fac, na * 1000 + nk, val, abs(val - base) / abs(base)))
    return base, rows
