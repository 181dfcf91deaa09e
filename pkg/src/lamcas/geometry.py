"""Grating geometry, spectral evaluation points, and piecewise-trig functions.

A PiecewiseTrig represents a function on one grating period that equals
a*C(eta, x-x0) + b*S(eta, x-x0) on each piece (C, S the entire cos/sinc
kernels).  Modal eigenfunctions, plane waves, and their derivatives are all
of this form, so overlap integrals reduce to closed-form segment integrals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import cosw, seg_cross, shift_coeffs, sinw


@dataclass(frozen=True)
class GratingGeometry:
    """1D lamellar grating: groove width p1, tooth width p2, depth."""

    p1: float
    p2: float
    depth: float

    def __post_init__(self):
        if self.p1 < 0.0 or self.p2 < 0.0:
            raise ValueError("p1 and p2 must be >= 0")
        if self.p1 + self.p2 <= 0.0:
            raise ValueError("period must be positive")
        if self.depth < 0.0:
            raise ValueError("depth must be >= 0")

    @property
    def period(self):
        return self.p1 + self.p2

    @property
    def is_homogeneous(self):
        return self.p1 == 0.0 or self.p2 == 0.0


@dataclass(frozen=True)
class SpectralPoint:
    """One (xi, alpha0, ky) node of the Matsubara x Brillouin x ky grid."""

    xi: float
    alpha0: float
    ky: float
    period: float

    def __post_init__(self):
        if self.xi < 0.0 or self.ky < 0.0:
            raise ValueError("xi and ky must be >= 0")
        if not (0.0 <= self.alpha0 <= np.pi / self.period * (1 + 1e-12)):
            raise ValueError("alpha0 must lie in [0, pi/p]")

    def alpha(self, order):
        """Rayleigh wavevector alpha0 + 2*pi*nu/p."""
        return self.alpha0 + 2.0 * np.pi * order / self.period


class PiecewiseConst:
    """Piecewise-constant weight on [-p/2, p/2]."""

    def __init__(self, breaks, values):
        self.breaks = np.asarray(breaks, dtype=float)
        self.values = np.asarray(values, dtype=complex)
        if len(self.values) != len(self.breaks) - 1:
            raise ValueError("need one value per interval")

    @classmethod
    def uniform(cls, period, value=1.0):
        h = 0.5 * period
        return cls([-h, h], [value])

    @classmethod
    def grating_profile(cls, geom: GratingGeometry, groove_value, tooth_value):
        h, h1 = 0.5 * geom.period, 0.5 * geom.p1
        if geom.p1 == 0.0:
            return cls([-h, h], [tooth_value])
        if geom.p2 == 0.0:
            return cls([-h, h], [groove_value])
        return cls([-h, -h1, h1, h], [tooth_value, groove_value, tooth_value])

    def value_at(self, x):
        idx = np.searchsorted(self.breaks, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        return self.values[idx]

    def __mul__(self, other):
        if not isinstance(other, PiecewiseConst):
            return PiecewiseConst(self.breaks, self.values * other)
        breaks = np.unique(np.concatenate([self.breaks, other.breaks]))
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        return PiecewiseConst(breaks, self.value_at(mids) * other.value_at(mids))


class PiecewiseTrig:
    """Per-segment a*C(eta, x - x0) + b*S(eta, x - x0) on [-p/2, p/2]."""

    def __init__(self, breaks, etas, coeffs):
        self.breaks = np.asarray(breaks, dtype=float)
        self.etas = np.asarray(etas, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=complex)
        if len(self.etas) != len(self.breaks) - 1 or self.coeffs.shape != (len(self.etas), 2):
            raise ValueError("inconsistent piecewise data")

    @classmethod
    def plane_wave(cls, alpha, period, amplitude=1.0):
        """amplitude * exp(i*alpha*x) on [-p/2, p/2]."""
        h = 0.5 * period
        a = amplitude * np.exp(-1j * alpha * h)
        return cls([-h, h], [alpha * alpha], [[a, 1j * alpha * a]])

    def value(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape, dtype=complex)
        idx = np.clip(np.searchsorted(self.breaks, x, side="right") - 1,
                      0, len(self.etas) - 1)
        for i in range(len(self.etas)):
            sel = idx == i
            if not np.any(sel):
                continue
            u = x[sel] - self.breaks[i]
            a, b = self.coeffs[i]
            cv = np.asarray([cosw(self.etas[i], ui) for ui in u])
            sv = np.asarray([sinw(self.etas[i], ui) for ui in u])
            out[sel] = a * cv + b * sv
        if out.size == 1:
            return complex(out[0])
        return out

    def derivative(self):
        """d/dx, again piecewise-trig: (a, b) -> (b, -a*eta)."""
        new = np.empty_like(self.coeffs)
        new[:, 0] = self.coeffs[:, 1]
        new[:, 1] = -self.coeffs[:, 0] * self.etas
        return PiecewiseTrig(self.breaks, self.etas, new)

    def reflect(self):
        """The function x -> f(-x)."""
        n = len(self.etas)
        breaks = -self.breaks[::-1]
        etas = self.etas[::-1]
        coeffs = np.empty_like(self.coeffs)
        for i in range(n):
            j = n - 1 - i
            seg_len = self.breaks[j + 1] - self.breaks[j]
            a, b = self.coeffs[j]
            eta = self.etas[j]
            cl, sl = cosw(eta, seg_len), sinw(eta, seg_len)
            coeffs[i, 0] = a * cl + b * sl
            coeffs[i, 1] = a * eta * sl - b * cl
        return PiecewiseTrig(breaks, etas, coeffs)

    def conj(self):
        return PiecewiseTrig(self.breaks, self.etas, np.conj(self.coeffs))

    def scaled(self, factor):
        return PiecewiseTrig(self.breaks, self.etas, self.coeffs * factor)


def cross_integral(f: PiecewiseTrig, g: PiecewiseTrig, weight: PiecewiseConst | None = None,
                   lo=None, hi=None):
    """int f(x) g(x) w(x) dx over [lo, hi] (default: the full period)."""
    pts = [f.breaks, g.breaks]
    if weight is not None:
        pts.append(weight.breaks)
    breaks = np.unique(np.concatenate(pts))
    if lo is not None or hi is not None:
        lo = breaks[0] if lo is None else lo
        hi = breaks[-1] if hi is None else hi
        breaks = np.unique(np.concatenate([[lo, hi], breaks[(breaks > lo) & (breaks < hi)]]))
    total = 0.0 + 0.0j
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    fi = np.clip(np.searchsorted(f.breaks, mids, side="right") - 1, 0, len(f.etas) - 1)
    gi = np.clip(np.searchsorted(g.breaks, mids, side="right") - 1, 0, len(g.etas) - 1)
    for s in range(len(breaks) - 1):
        length = breaks[s + 1] - breaks[s]
        if length <= 0.0:
            continue
        i, j = fi[s], gi[s]
        ea, eb = f.etas[i], g.etas[j]
        a1, b1 = shift_coeffs(*f.coeffs[i], ea, breaks[s] - f.breaks[i])
        a2, b2 = shift_coeffs(*g.coeffs[j], eb, breaks[s] - g.breaks[j])
        w = 1.0 if weight is None else complex(weight.value_at(np.array([mids[s]]))[0])
        total += w * seg_cross(a1, b1, ea, a2, b2, eb, length)
    return total
