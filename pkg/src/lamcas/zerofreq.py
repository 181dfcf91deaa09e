"""Exact zero-frequency (xi = 0) branch for metallic gratings.

At xi = 0 the e-polarization problem of a non-magnetic Drude or constant-eps
grating is the vacuum one ([eps-1]*xi^2 -> 0): that sector is exactly
transparent.  The h sector survives, but the tooth permittivity diverges, so
its limit modes are obtained by expanding every ingredient in
t = 1/eps_tooth(i*xi), with the model's exact frequency link xi(t) (a short
Laurent series), solving the root shifts order by order, and extracting each
overlap column's leading coefficient -- no small-xi stand-in anywhere.

Scattering at xi = 0 matches H_y and the limit of omega*E_x (the 1/omega of
the E_x components cancels row-wise) with plane-wave projections; grating
columns are rescaled by their leading power of t, which is exactly the
spec's per-column scale bookkeeping taken to the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import GratingGeometry, SpectralPoint
from .kernels import _mhat, cosw, d2sinw, dsinw, sinw
from .materials import DielectricModel
from .modes import ModalFunction, Region

_NT = 4  # series truncation


class Laurent:
    """c[0]*t^k0 + ... + c[_NT-1]*t^(k0+_NT-1); coefficients may be arrays.

    A parallel magnitude series m tracks the size of the terms that were
    combined into each coefficient, so that a coefficient produced purely by
    roundoff cancellation can be told from a genuinely small one (the Drude
    expansions have geometrically growing coefficients, which makes a global
    threshold useless).
    """

    __slots__ = ("k0", "c", "m")
    __array_ufunc__ = None  # keep numpy from broadcasting over this type

    def __init__(self, k0, coeffs, mags=None):
        self.k0 = int(k0)
        self.c = [np.asarray(ci, dtype=complex) for ci in coeffs]
        while len(self.c) < _NT:
            self.c.append(np.zeros_like(self.c[0]))
        self.c = self.c[:_NT]
        if mags is None:
            self.m = [np.abs(ci) for ci in self.c]
        else:
            self.m = [np.asarray(mi, dtype=float) for mi in mags]
            while len(self.m) < _NT:
                self.m.append(np.zeros_like(self.m[0]))
            self.m = self.m[:_NT]

    @classmethod
    def const(cls, value):
        return cls(0, [value])

    @classmethod
    def var(cls):
        return cls(1, [1.0])

    def map(self, other):
        if not isinstance(other, Laurent):
            other = Laurent.const(other)
        return other

    def __add__(self, other):
        other = self.map(other)
        k0 = min(self.k0, other.k0)
        shape = np.broadcast_shapes(self.c[0].shape, other.c[0].shape)
        c = [np.zeros(shape, dtype=complex) for _ in range(_NT)]
        m = [np.zeros(shape, dtype=float) for _ in range(_NT)]
        for i in range(_NT):
            ka, kb = self.k0 - k0 + i, other.k0 - k0 + i
            if ka < _NT:
                c[ka] = c[ka] + self.c[i]
                m[ka] = m[ka] + self.m[i]
            if kb < _NT:
                c[kb] = c[kb] + other.c[i]
                m[kb] = m[kb] + other.m[i]
        return Laurent(k0, c, m)

    __radd__ = __add__

    def __neg__(self):
        return Laurent(self.k0, [-ci for ci in self.c], self.m)

    def __sub__(self, other):
        return self + (-self.map(other))

    def __rsub__(self, other):
        return self.map(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Laurent):
            return Laurent(self.k0, [ci * other for ci in self.c],
                           [mi * abs(np.asarray(other)) for mi in self.m])
        shape = np.broadcast_shapes(self.c[0].shape, other.c[0].shape)
        c = [np.zeros(shape, dtype=complex) for _ in range(_NT)]
        m = [np.zeros(shape, dtype=float) for _ in range(_NT)]
        for i in range(_NT):
            for j in range(_NT - i):
                c[i + j] = c[i + j] + self.c[i] * other.c[j]
                m[i + j] = m[i + j] + self.m[i] * other.m[j]
        return Laurent(self.k0 + other.k0, c, m)

    __rmul__ = __mul__

    def inv(self):
        if self.c[0].shape != ():
            raise ValueError("inverse only for scalar Laurents")
        if self.c[0] == 0.0:
            raise ZeroDivisionError("Laurent leading coefficient vanishes")
        c = [np.zeros((), dtype=complex) for _ in range(_NT)]
        c[0] = 1.0 / self.c[0]
        for i in range(1, _NT):
            c[i] = -c[0] * sum(self.c[j] * c[i - j] for j in range(1, i + 1))
        return Laurent(-self.k0, c)

    def __truediv__(self, other):
        if not isinstance(other, Laurent):
            return Laurent(self.k0, [ci / other for ci in self.c],
                           [mi / abs(other) for mi in self.m])
        return self * other.inv()

    def coeff(self, power):
        i = power - self.k0
        if 0 <= i < _NT:
            return self.c[i]
        return np.zeros_like(self.c[0])

    def at0(self):
        for i in range(_NT):
            if self.k0 + i > 0:
                break
            if self.k0 + i == 0:
                return self.c[i]
            if np.any(np.abs(self.c[i]) > 1e-12 * self.m[i]):
                raise ArithmeticError("Laurent diverges at t = 0")
        return np.zeros_like(self.c[0])

    def leading(self, tol=1e-9):
        """(power, coefficient) of the first coefficient that is not pure
        cancellation noise (judged against the magnitude series)."""
        for i in range(_NT):
            if np.any(np.abs(self.c[i]) > tol * (self.m[i] + 1e-300)):
                return self.k0 + i, self.c[i]
        return None, np.zeros_like(self.c[0])


def material_expansion(model: DielectricModel):
    """(t(tau), xi2(tau), W(tau)) as Laurent series near xi = 0.

    t = 1/eps(i*xi) is the physical small parameter; the series variable is
    rescaled, tau = t/t_star, so that the Drude expansions (whose raw
    t-coefficients grow like (4*omega_p^2/gamma^2)^k) keep O(1) coefficients
    and low-order cancellations stay resolvable in double precision.
    """
    if model.kind == "drude":
        wp2, g = model.omega_p ** 2, model.gamma_d
        tstar = g * g / (4.0 * wp2)
        t_phys = Laurent(1, [tstar])
        geom = t_phys * Laurent(0, [1.0, tstar, tstar ** 2, tstar ** 3])
        u = (4.0 * wp2 / (g * g)) * geom        # O(1) coefficients
        su = 0.5 * u - 0.125 * (u * u) + 0.0625 * (u * u * u)  # sqrt(1+u)-1
        xi = (0.5 * g) * su
        xi2 = xi * xi
        w_shift = (t_phys.inv() - 1.0) * xi2
        return t_phys, xi2, w_shift
    if model.kind == "plasma":
        wp2 = model.omega_p ** 2
        t_phys = Laurent.var()
        xi2 = wp2 * Laurent(1, [1.0] * _NT)     # xi^2 = wp^2 t/(1-t)
        return t_phys, xi2, Laurent.const(wp2)  # W = wp^2 exactly
    raise ValueError("material_expansion is for drude/plasma models")


def _d3sinw(eta, length):
    eta = float(eta)
    if abs(eta) * length * length < 1e-2:
        return (-length ** 7 / 840.0 + eta * length ** 9 / 15120.0
                - eta ** 2 * length ** 11 / 665280.0)
    d2c = -0.5 * length * dsinw(eta, length)  # second derivative of C
    return (length * d2c - 5.0 * d2sinw(eta, length)) / (2.0 * eta)




def _exact_delta(eta: Laurent, eta0):
    """eta - eta0 with the structurally-zero constant magnitude reset.

    eta0 is eta's own t=0 value, so the subtraction of the constant term is
    exact; without the reset the magnitude tracker would flag every kernel
    Taylor term as potential cancellation noise.
    """
    delta = eta - eta0
    i0 = -delta.k0
    if 0 <= i0 < _NT and np.all(delta.c[i0] == 0.0):
        delta.m[i0] = np.abs(delta.c[i0])
    return delta

def kernel_taylor(eta: Laurent, length, kind):
    """C or S of a Laurent-valued eta (Taylor around its t=0 value).

    Constant terms sitting on an exact trigonometric zero (the mode families
    live at sin/cos nodes) are snapped to zero, otherwise their float
    residual ~1e-16 would masquerade as a genuine leading Laurent order.
    """
    eta0 = float(np.real(eta.at0()))
    delta = _exact_delta(eta, eta0)
    arg = math.sqrt(abs(eta0)) * length

    def snap(value, scale):
        return 0.0 if abs(value) < 1e-12 * (1.0 + scale) else value

    if kind == "c":
        f = (snap(cosw(eta0, length), arg),
             -0.5 * length * sinw(eta0, length),
             -0.5 * length * dsinw(eta0, length),
             -0.5 * length * d2sinw(eta0, length))
    else:
        f = (snap(sinw(eta0, length), length * (1.0 + arg)),
             dsinw(eta0, length), d2sinw(eta0, length),
             _d3sinw(eta0, length))
    d2 = delta * delta
    return (Laurent.const(f[0]) + f[1] * delta + (0.5 * f[2]) * d2
            + (f[3] / 6.0) * (d2 * delta))


# -- limit roots -------------------------------------------------------------


def _t_dispersion(eta: Laurent, t_phys: Laurent, w_shift: Laurent,
                  geom: GratingGeometry, alpha0):
    """t * D(eta): Laurent-regular combination for sigma2 = 1/t -> infinity."""
    t = t_phys
    eta2 = eta - w_shift
    cc = kernel_taylor(eta, geom.p1, "c") * kernel_taylor(eta2, geom.p2, "c")
    ss = kernel_taylor(eta, geom.p1, "s") * kernel_taylor(eta2, geom.p2, "s")
    tfac = 0.5 * ((t * t) * eta2 + eta)
    return t * (cc - math.cos(alpha0 * geom.period)) - tfac * ss


def zero_frequency_root(model, geom: GratingGeometry, alpha0, family, index):
    """eta(tau) of one h-polarization family at xi -> 0, shifts solved exactly."""
    t_phys, _xi2, w_shift = material_expansion(model)
    t = Laurent.var()
    if family == "groove":
        base = Laurent.const((index * math.pi / geom.p1) ** 2)
    elif family == "tooth":
        base = Laurent.const((index * math.pi / geom.p2) ** 2) + w_shift
    elif family == "zero":
        base = Laurent.const(0.0)
    else:
        raise ValueError(family)

    deltas = [0.0, 0.0]
    for order in (1, 2):
        def value(d):
            trial = list(deltas)
            trial[order - 1] = d
            eta = base + trial[0] * t + trial[1] * (t * t)
            g = _t_dispersion(eta, t_phys, w_shift, geom, alpha0)
            return complex(g.coeff(order))
        c0, c1 = value(0.0), value(1.0)
        slope = c1 - c0
        if abs(slope) < 1e-300:
            raise ArithmeticError(
                f"degenerate zero-frequency root (family {family}, nu={index})")
        deltas[order - 1] = float(np.real(-c0 / slope))
    return base + deltas[0] * t + deltas[1] * (t * t)


# -- plane-wave overlap integrals of Laurent modes ----------------------------


def _moments(eta0, alphas, length, mmax):
    """T^C_m, T^S_m = int_0^L u^m {C,S}(eta0,u) e^{-i alpha u} du, m<=mmax."""
    alphas = np.asarray(alphas, dtype=float)
    if eta0 >= 0.0:
        g = math.sqrt(eta0) + 0.0j
    else:
        g = 1j * math.sqrt(-eta0)
    mh_p = _mhat((g - alphas) * length, mmax)
    mh_m = _mhat((-g - alphas) * length, mmax)
    tc = np.empty((mmax + 1, len(alphas)), dtype=complex)
    ts = np.empty((mmax + 1, len(alphas)), dtype=complex)
    small = abs(g) * length < 0.5
    if small:
        mh0 = _mhat(-alphas * length, mmax + 12)
    for m in range(mmax + 1):
        mp = length ** (m + 1) * mh_p[m]
        mm = length ** (m + 1) * mh_m[m]
        tc[m] = 0.5 * (mp + mm)
        if not small:
            ts[m] = (mp - mm) / (2j * g)
        else:
            acc = np.zeros(len(alphas), dtype=complex)
            for k in range(6):
                mi = m + 2 * k + 1
                acc += ((-eta0) ** k / math.factorial(2 * k + 1)
                        * length ** (mi + 1) * mh0[mi])
            ts[m] = acc
    return tc, ts


def fcfs_taylor(eta: Laurent, alphas, length):
    """(Fc, Fs) segment integrals of a Laurent eta as array Laurents.

    Fc = int_0^L C(eta,u) e^{-i alpha u} du and likewise Fs; eta derivatives
    come from dC/d eta = -(u/2) S and dS/d eta = (u C - S)/(2 eta).
    """
    eta0 = float(np.real(eta.at0()))
    delta = _exact_delta(eta, eta0)
    tc, ts = _moments(eta0, alphas, length, 2)
    fc0, fs0 = tc[0], ts[0]
    fc1 = -0.5 * ts[1]
    if abs(eta0) * length * length < 1e-3:
        mh = _mhat(-np.asarray(alphas, float) * length, 9)
        mom = lambda m: length ** (m + 1) * mh[m]
        fs1 = -mom(3) / 6.0 + eta0 * mom(5) / 60.0 - eta0 ** 2 * mom(7) / 1680.0
        fs2 = mom(5) / 60.0 - eta0 * mom(7) / 840.0
        fc2 = mom(4) / 24.0 - eta0 * mom(6) / 360.0
    else:
        fs1 = (tc[1] - ts[0]) / (2.0 * eta0)
        fc2 = -(tc[2] - ts[1]) / (4.0 * eta0)
        fs2 = -ts[2] / (4.0 * eta0) - 3.0 * (tc[1] - ts[0]) / (4.0 * eta0 ** 2)
    fc = Laurent.const(fc0) + fc1 * delta + (0.5 * fc2) * (delta * delta)
    fs = Laurent.const(fs0) + fs1 * delta + (0.5 * fs2) * (delta * delta)
    return fc, fs


# -- limit mode columns -------------------------------------------------------


@dataclass
class ZeroColumn:
    """One xi=0 mode of a z-slice, reduced to what the matching needs.

    hy: projections (1/p) int U e^{-i alpha x} dx over the alpha grid;
    exq: the same of [chi^2/eps(x)] U (the omega-scaled E_x numerator);
    j0w: projections of U/eps(x) (only used by the ky=0 linear mode);
    eta0: chi^2 at xi=0, so kappa(ky) = sqrt(eta0 + ky^2).
    """

    eta0: float
    hy: np.ndarray
    exq: np.ndarray
    j0w: np.ndarray
    label: str


def _limit_mode_column(model, geom, alpha0, alphas, family, index):
    """Leading-order (hy, exq, j0w) vectors of one metallic-tooth h mode."""
    t_phys, xi2, w_shift = material_expansion(model)
    eta = zero_frequency_root(model, geom, alpha0, family, index)
    p1, p2, p = geom.p1, geom.p2, geom.period
    h1, h2 = 0.5 * p1, 0.5 * p2
    eta2 = eta - w_shift
    sigma2 = t_phys.inv()

    ec = kernel_taylor(eta, h1, "c")
    es = -1.0 * sigma2 * eta * kernel_taylor(eta, h1, "s")
    oc = kernel_taylor(eta, h1, "s")
    os_ = sigma2 * kernel_taylor(eta, h1, "c")
    pe = ec * kernel_taylor(eta2, h2, "c") + es * kernel_taylor(eta2, h2, "s")
    po = oc * kernel_taylor(eta2, h2, "c") + os_ * kernel_taylor(eta2, h2, "s")

    cw = math.cos(0.5 * alpha0 * p)
    sw = math.sin(0.5 * alpha0 * p)
    # U = cw*phi_e(x)*po + i*sw*phi_o(x)*pe; segment (A, B) coefficients in
    # the local variable of each piece (groove in x, teeth in |x| - p1/2,
    # where phi_e is even in x and phi_o odd)
    a_g = (cw * po) + Laurent.const(0.0)
    b_g = (1j * sw) * pe
    a_tr = (cw * po) * ec + (1j * sw) * (pe * oc)
    b_tr = (cw * po) * es + (1j * sw) * (pe * os_)
    a_tl = (cw * po) * ec - (1j * sw) * (pe * oc)
    b_tl = (cw * po) * es - (1j * sw) * (pe * os_)

    t = t_phys
    alphas = np.asarray(alphas, dtype=float)
    # groove x in [-p1/2, p1/2]: split into half-axis integrals with
    # e^{-i a x} (right) and e^{+i a x} (left, x -> -x flips the S part)
    fc_g, fs_g = fcfs_taylor(eta, alphas, h1)
    fc_gm, fs_gm = fcfs_taylor(eta, -alphas, h1)
    hy_g = a_g * (fc_g + fc_gm) + b_g * (fs_g - fs_gm)
    # teeth: right piece x = p1/2 + u, left piece x = -p1/2 - u
    fc_t, fs_t = fcfs_taylor(eta2, alphas, h2)
    fc_tm, fs_tm = fcfs_taylor(eta2, -alphas, h2)
    ph = np.exp(-1j * alphas * h1)
    phm = np.exp(+1j * alphas * h1)
    hy_t = (a_tr * (ph * fc_t) + b_tr * (ph * fs_t)
            + a_tl * (phm * fc_tm) + b_tl * (phm * fs_tm))
    hy = hy_g + hy_t

    # 1/eps weights: groove = 1, tooth = t
    j0w = hy_g + t * hy_t
    chi2 = xi2 + eta
    exq = chi2 * j0w

    lead_powers = [lau.leading()[0] for lau in (hy, exq)]
    k_col = min(pw for pw in lead_powers if pw is not None)
    eta0 = float(np.real(chi2.at0()))
    return ZeroColumn(eta0, np.asarray(hy.coeff(k_col)) / p,
                      np.asarray(exq.coeff(k_col)) / p,
                      np.asarray(j0w.coeff(k_col)) / p,
                      f"{family}{index}")


def _regular_mode_column(mode: ModalFunction, alphas, pol):
    """ZeroColumn of a finite-permittivity mode evaluated directly at xi=0."""
    p = mode.region.geom.period
    hy = mode.overlap_planewave(alphas, weighted=False) / p
    if pol == "h":
        j0w = mode.overlap_planewave(alphas, weighted=True) / p
    else:
        j0w = hy
    return ZeroColumn(mode.chi2, np.atleast_1d(hy), mode.chi2 * np.atleast_1d(j0w),
                      np.atleast_1d(j0w), f"eta={mode.eta:.4g}")


def zero_slice_columns(region: Region, alpha0, alphas, count, pol="h"):
    """The lowest `count` xi=0 modes of a grating slice as ZeroColumns."""
    geom = region.geom
    if not region.groove_model.is_vacuum:
        raise ValueError("xi = 0 grating slices require vacuum grooves")
    model = region.tooth_model
    if pol == "e" or model.kind == "constant":
        point0 = SpectralPoint(0.0, alpha0, 0.0, geom.period)
        from .eigen import solve_eta_spectrum
        spec = solve_eta_spectrum(pol, point0, geom, region.groove_model,
                                  model, count)
        cols = [_regular_mode_column(ModalFunction(pol, r.eta, point0, region),
                                     alphas, pol) for r in spec.roots]
        return cols
    if model.kind not in ("drude", "plasma"):
        raise ValueError("zero-frequency slice needs drude/plasma/constant teeth")
    shift = model.eps_xi2(0.0)
    candidates = [("zero", 0, 0.0)]
    for nu in range(1, count + 2):
        candidates.append(("groove", nu, (nu * math.pi / geom.p1) ** 2))
        candidates.append(("tooth", nu, (nu * math.pi / geom.p2) ** 2 + shift))
    candidates.sort(key=lambda c: c[2])
    cols = []
    for family, index, _eta in candidates[:count]:
        cols.append(_limit_mode_column(model, geom, alpha0, alphas, family, index))
    return cols


# -- zero-frequency scattering ------------------------------------------------


def _inv_eps_zero(model: DielectricModel):
    if model.kind in ("drude", "plasma"):
        return 0.0
    return 1.0 / (model.eps_const if model.kind == "constant" else 1.0)


@dataclass
class _SliceColumns:
    cols: list
    depth: float
    kappas: np.ndarray = None
    special: int | None = None  # index of a kappa=0 mode needing the {1, z} pair

    def at_ky(self, ky):
        kap = np.sqrt(np.array([c.eta0 for c in self.cols]) + ky * ky)
        special = None
        for i, k in enumerate(kap):
            if k < 1e-12:
                special = i
        return _SliceColumns(self.cols, self.depth, kap, special)


def prepare_zero_slices(slices, alpha0, alphas, n, pol):
    """k_y-independent limit columns of every slice (cacheable)."""
    return [_SliceColumns(zero_slice_columns(region, alpha0, alphas, n, pol),
                          depth) for region, depth in slices]


def zero_reflection(slices, backing_model: DielectricModel, alpha0, ky,
                    n_per_pol, pol="h", period=None):
    """Reflection operator of one polarization sector at exactly xi = 0.

    slices: [(Region, depth)] from the gap inward; returns (R, kappas_gap)
    over the Rayleigh channels alpha_nu ordered like the engine bases.
    The matching rows are H_y and lim omega*E_x for pol "h" (E_y and
    lim omega*H_x for pol "e"); each slice's growing amplitudes are
    referenced at its far interface so only decaying phases appear.
    """
    if period is None:
        period = slices[0][0].geom.period
    orders = _zero_orders(n_per_pol, alpha0, period, ky)
    alphas = np.array([alpha0 + 2.0 * math.pi * nu / period for nu in orders])
    prepared = prepare_zero_slices(slices, alpha0, alphas, n_per_pol, pol)
    r, kv = zero_reflection_prepared(prepared, backing_model, alphas, ky, pol)
    return r, kv, orders


def zero_reflection_prepared(prepared, backing_model, alphas, ky, pol="h"):
    """Solve the xi = 0 matching for prebuilt slice columns at one k_y."""
    n = len(alphas)
    kv = np.sqrt(ky * ky + alphas ** 2)
    prep = [s.at_ky(ky) for s in prepared]
    sizes = [2 * len(s.cols) for s in prep]
    n_unk = n + sum(sizes) + n
    rows_total = 2 * n * (len(prep) + 1)
    if rows_total != n_unk:
        raise AssertionError("zero-frequency system shape mismatch")
    a = np.zeros((rows_total, n_unk), dtype=complex)
    rhs = np.zeros((rows_total, n), dtype=complex)

    def col_block(sl: _SliceColumns, at_far):
        """(2n x 2m) values [H_y; Ex-hat] of the slice's amplitude pairs."""
        m = len(sl.cols)
        blk = np.zeros((2 * n, 2 * m), dtype=complex)
        dec = np.exp(-sl.kappas * sl.depth)
        for i, c in enumerate(sl.cols):
            if sl.special == i and ky < 1e-12:
                # limit pair {U0, U0*z}: constant and linear solutions
                if not at_far:
                    blk[:n, 2 * i] = c.hy
                    blk[:n, 2 * i + 1] = 0.0
                else:
                    blk[:n, 2 * i] = c.hy
                    blk[:n, 2 * i + 1] = -sl.depth * c.hy
                blk[n:, 2 * i] = 0.0
                blk[n:, 2 * i + 1] = 1j * c.j0w
                continue
            kap = sl.kappas[i]
            # plus direction (referenced at far), minus (referenced at gap)
            f_p = dec[i] if not at_far else 1.0
            f_m = 1.0 if not at_far else dec[i]
            blk[:n, 2 * i] = f_p * c.hy
            blk[n:, 2 * i] = f_p * (-1j) * c.exq / kap
            blk[:n, 2 * i + 1] = f_m * c.hy
            blk[n:, 2 * i + 1] = f_m * (+1j) * c.exq / kap
        return blk

    # gap interface: a (incident, d=-1) + b (reflected, d=+1) = slice fields
    a[0:n, 0:n] = np.eye(n)
    a[n:2 * n, 0:n] = np.diag(-1j * alphas ** 2 / kv)
    a[0:2 * n, n:n + sizes[0]] = -col_block(prep[0], at_far=False)
    rhs[0:n] = -np.eye(n)
    rhs[n:2 * n] = -np.diag(+1j * alphas ** 2 / kv)

    off = n
    for i in range(1, len(prep)):
        r0 = 2 * n * i
        a[r0:r0 + 2 * n, off:off + sizes[i - 1]] = col_block(prep[i - 1], at_far=True)
        a[r0:r0 + 2 * n, off + sizes[i - 1]:off + sizes[i - 1] + sizes[i]] = \
            -col_block(prep[i], at_far=False)
        off += sizes[i - 1]

    r0 = 2 * n * len(prep)
    a[r0:r0 + 2 * n, off:off + sizes[-1]] = col_block(prep[-1], at_far=True)
    off += sizes[-1]
    km = np.sqrt(ky * ky + alphas ** 2
                 + backing_model.eps_xi2(0.0) * backing_model.mu(0.0))
    if pol == "h":
        qm = alphas ** 2 * _inv_eps_zero(backing_model)
    else:
        qm = alphas ** 2 + backing_model.eps_xi2(0.0) * backing_model.mu(0.0)
    a[r0:r0 + n, off:off + n] = -np.eye(n)
    a[r0 + n:r0 + 2 * n, off:off + n] = -np.diag(+1j * qm / km)

    sol = np.linalg.solve(a, rhs)
    return sol[:n], kv


def _zero_orders(n, alpha0, period, ky):
    """Rayleigh orders sorted like homogeneous_spectrum at xi = 0."""
    orders = [0]
    nu = 1
    while len(orders) < n + 4:
        orders.extend([-nu, nu])
        nu += 1
    entries = []
    for nu in orders:
        alpha = alpha0 + 2.0 * math.pi * nu / period
        entries.append((nu, math.sqrt(ky * ky + alpha * alpha)))
    entries.sort(key=lambda e: (e[1], abs(e[0]), -e[0]))
    return [e[0] for e in entries[:n]]


def theta_zero_frequency(region: Region, backing_model: DielectricModel,
                         alpha0, ky, n_per_pol, depth=None):
    """The xi = 0 theta split of a Drude-tooth grating.

    Returns (theta_hh, e_phases, orders): theta_hh holds the (2,1) and (2,2)
    h-part blocks (as the Schur complement of the interior matching
    unknowns, the pair the reflection property uses), e_phases the
    Kronecker e-part factors exp(-sign(lambda)*d*sqrt(ky^2+alpha_nu^2)).
    Consequently R_ee = R_eh = R_he = 0 and
    R_hh = -theta_hh[(2,2)]^-1 theta_hh[(2,1)] exactly.

    The full transfer matrix does not exist at xi = 0 (modes without an
    E_x trace make it singular), so only this scattering-equivalent pair is
    exposed; the e sector is the pure Kronecker part.
    """
    if region.tooth_model.kind != "drude":
        raise ValueError("zero-frequency theta requires a Drude tooth; the "
                         "plasma model keeps a regular path")
    geom = region.geom
    if depth is None:
        depth = geom.depth
    period = geom.period
    orders = _zero_orders(n_per_pol, alpha0, period, ky)
    alphas = np.array([alpha0 + 2.0 * math.pi * nu / period for nu in orders])
    kv = np.sqrt(ky * ky + alphas ** 2)
    n = n_per_pol

    # rebuild the matching system of zero_reflection and eliminate the
    # interior (grating + transmitted) unknowns
    r_ref, _kv, _orders = zero_reflection([(region, depth)], backing_model,
                                          alpha0, ky, n_per_pol)
    th22 = np.eye(n, dtype=complex)
    th21 = -r_ref
    e_phases = {(1, 1): np.exp(+depth * kv), (2, 2): np.exp(-depth * kv)}
    return {(2, 1): th21, (2, 2): th22}, e_phases, orders
