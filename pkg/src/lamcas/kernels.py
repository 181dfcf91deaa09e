"""Entire-function trigonometric kernels.

Everything here is written in terms of eta = gamma^2 so that no square-root
branch is ever chosen:

    cosw(eta, L) = cos(sqrt(eta)*L)        (= cosh for eta < 0)
    sinw(eta, L) = sin(sqrt(eta)*L)/sqrt(eta)

are entire functions of eta, as are the segment integrals

    cross_cc(a, b, L) = int_0^L cosw(a,u)*cosw(b,u) du
    cross_sc(a, b, L) = int_0^L sinw(a,u)*cosw(b,u) du
    cross_ss(a, b, L) = int_0^L sinw(a,u)*sinw(b,u) du

which are evaluated through sin(tL)/t and (1-cos(tL))/t with guarded series
whenever an argument combination becomes small (the momentum-matching
coincidences alpha ~ +/-gamma).
"""

from __future__ import annotations

import cmath
import math

import numpy as np

_SERIES_CUT = 0.5  # |t|*L below which msinc/mvers switch to power series


def cosw(eta, length):
    """cos(sqrt(eta)*x) evaluated branch-free; eta real scalar or array."""
    if np.isscalar(eta) or getattr(eta, "ndim", 0) == 0:
        eta = float(eta)
        if eta >= 0.0:
            return math.cos(math.sqrt(eta) * length)
        return math.cosh(math.sqrt(-eta) * length)
    eta = np.asarray(eta, dtype=float)
    out = np.empty_like(eta)
    pos = eta >= 0.0
    out[pos] = np.cos(np.sqrt(eta[pos]) * length)
    out[~pos] = np.cosh(np.sqrt(-eta[~pos]) * length)
    return out


def sinw(eta, length):
    """sin(sqrt(eta)*x)/sqrt(eta) evaluated branch-free."""
    if np.isscalar(eta) or getattr(eta, "ndim", 0) == 0:
        eta = float(eta)
        z = eta * length * length
        if abs(z) < 1e-6:
            return length * (1.0 - z / 6.0 * (1.0 - z / 20.0 * (1.0 - z / 42.0)))
        if eta > 0.0:
            g = math.sqrt(eta)
            return math.sin(g * length) / g
        g = math.sqrt(-eta)
        return math.sinh(g * length) / g
    eta = np.asarray(eta, dtype=float)
    out = np.empty_like(eta)
    small = np.abs(eta) * length * length < 1e-6
    pos = (eta > 0.0) & ~small
    neg = (eta < 0.0) & ~small
    out[pos] = np.sin(np.sqrt(eta[pos]) * length) / np.sqrt(eta[pos])
    out[neg] = np.sinh(np.sqrt(-eta[neg]) * length) / np.sqrt(-eta[neg])
    z = eta[small] * length * length
    out[small] = length * (1.0 - z / 6.0 * (1.0 - z / 20.0 * (1.0 - z / 42.0)))
    return out


def dcosw(eta, length):
    """d/d(eta) of cosw."""
    return -0.5 * length * sinw(eta, length)


def dsinw(eta, length):
    """d/d(eta) of sinw."""
    eta = float(eta)
    if abs(eta) * length * length < 1e-4:
        l3 = length ** 3
        return -l3 / 6.0 + eta * length ** 5 / 60.0 - eta ** 2 * length ** 7 / 1680.0
    return (length * cosw(eta, length) - sinw(eta, length)) / (2.0 * eta)


def d2cosw(eta, length):
    return -0.5 * length * dsinw(eta, length)


def d2sinw(eta, length):
    eta = float(eta)
    if abs(eta) * length * length < 1e-3:
        return (length ** 5 / 60.0 - eta * length ** 7 / 840.0
                + eta ** 2 * length ** 9 / 30240.0)
    return (length * dcosw(eta, length) - 3.0 * dsinw(eta, length)) / (2.0 * eta)


def _trig_ratio_derivs(t, length, nmax, kind):
    """Derivatives 0..nmax of sin(tL)/t ("sinc") or (1-cos(tL))/t ("vers").

    Complex t.  Series for small |t|*L, otherwise the recurrence
    f_n = (g_n - n*f_{n-1})/t with g the numerator's n-th derivative.
    """
    out = [0j] * (nmax + 1)
    if abs(t) * length < _SERIES_CUT:
        # sinc: sum_k (-1)^k L^(2k+1) t^(2k) / (2k+1)!
        # vers: sum_k (-1)^(k+1) L^(2k) t^(2k-1) / (2k)!   (k >= 1)
        for n in range(nmax + 1):
            acc = 0j
            for k in range(0, 24):
                if kind == "sinc":
                    p = 2 * k
                    c = (-1.0) ** k * length ** (2 * k + 1) / math.factorial(2 * k + 1)
                else:
                    p = 2 * k + 1
                    c = (-1.0) ** k * length ** (2 * k + 2) / math.factorial(2 * k + 2)
                if p < n:
                    continue
                fac = 1.0
                for j in range(n):
                    fac *= (p - j)
                term = c * fac * t ** (p - n)
                acc += term
                if abs(term) < 1e-20 * (1.0 + abs(acc)) and k > 2:
                    break
            out[n] = acc
        return out
    tl = t * length
    if kind == "sinc":
        def gder(n):
            return length ** n * cmath.sin(tl + n * math.pi / 2.0)
        g0 = cmath.sin(tl)
    else:
        def gder(n):
            return -(length ** n) * cmath.cos(tl + n * math.pi / 2.0)
        g0 = 1.0 - cmath.cos(tl)
    out[0] = g0 / t
    for n in range(1, nmax + 1):
        out[n] = (gder(n) - n * out[n - 1]) / t
    return out


def msinc(t, length):
    """sin(t*L)/t for complex t, stable at small t."""
    if abs(t) * length < _SERIES_CUT:
        z = (t * length) ** 2
        return length * (1.0 - z / 6.0 + z * z / 120.0 - z ** 3 / 5040.0
                         + z ** 4 / 362880.0 - z ** 5 / 39916800.0)
    return cmath.sin(t * length) / t


def mvers(t, length):
    """(1 - cos(t*L))/t for complex t, stable at small t."""
    if abs(t) * length < _SERIES_CUT:
        z = (t * length) ** 2
        return t * length * length * (0.5 - z / 24.0 + z * z / 720.0
                                      - z ** 3 / 40320.0 + z ** 4 / 3628800.0)
    return (1.0 - cmath.cos(t * length)) / t


def _gam(eta):
    """Principal complex square root of a real eta."""
    return cmath.sqrt(complex(eta))


def cross_cc(a, b, length):
    """int_0^L cosw(a,u)*cosw(b,u) du for real a, b."""
    ga, gb = _gam(a), _gam(b)
    val = 0.5 * (msinc(ga - gb, length) + msinc(ga + gb, length))
    return val.real


def cross_sc(a, b, length):
    """int_0^L sinw(a,u)*cosw(b,u) du for real a, b."""
    ga, gb = _gam(a), _gam(b)
    if abs(ga) * length < 0.3:
        d = _trig_ratio_derivs(gb, length, 5, "vers")
        val = d[1] + a * d[3] / 6.0 + a * a * d[5] / 120.0
    else:
        val = (mvers(ga + gb, length) + mvers(ga - gb, length)) / (2.0 * ga)
    return val.real


def cross_cs(a, b, length):
    return cross_sc(b, a, length)


def cross_ss(a, b, length):
    """int_0^L sinw(a,u)*sinw(b,u) du for real a, b."""
    ga, gb = _gam(a), _gam(b)
    sa, sb = abs(ga) * length, abs(gb) * length
    if sa < 0.3 and sb < 0.3:
        acc = 0.0
        for m in range(9):
            cm = (-a) ** m / math.factorial(2 * m + 1)
            for n in range(9):
                acc += (cm * (-b) ** n / math.factorial(2 * n + 1)
                        * length ** (2 * m + 2 * n + 3) / (2 * m + 2 * n + 3))
        return acc
    if min(sa, sb) < 0.3:
        # expand in the small argument around the large one
        if sa < sb:
            small_sq, big = a, gb
        else:
            small_sq, big = b, ga
        d = _trig_ratio_derivs(big, length, 5, "sinc")
        val = -(d[1] + small_sq * d[3] / 6.0 + small_sq ** 2 * d[5] / 120.0) / big
        return val.real
    val = (msinc(ga - gb, length) - msinc(ga + gb, length)) / (2.0 * ga * gb)
    return val.real


def seg_cross(a1, b1, ea, a2, b2, eb, length):
    """int_0^L (a1*C(ea,u)+b1*S(ea,u)) * (a2*C(eb,u)+b2*S(eb,u)) du.

    Coefficients may be complex; ea, eb are real.
    """
    return (a1 * a2 * cross_cc(ea, eb, length)
            + a1 * b2 * cross_cs(ea, eb, length)
            + b1 * a2 * cross_sc(ea, eb, length)
            + b1 * b2 * cross_ss(ea, eb, length))


# 12-term reversed Horner coefficients of sum_k (iz)^k/(k+1)!
_EIC_COEF = [1.0 / math.factorial(k + 1) for k in range(14)]


def _eic(z):
    """(exp(i z) - 1)/(i z), entire; z complex array."""
    z = np.asarray(z, dtype=complex)
    iz = 1j * z
    small = np.abs(z) < 0.5
    zsafe = np.where(small, 1.0, iz)
    out = (np.exp(iz) - 1.0) / zsafe
    if np.any(small):
        acc = np.full(z.shape, _EIC_COEF[13], dtype=complex)
        for k in range(12, -1, -1):
            acc = acc * iz + _EIC_COEF[k]
        out = np.where(small, acc, out)
    return out


_MHAT_CACHE = {}


def _mhat_cached(alphas_length, mmax):
    """Moment integrals int_0^1 v^m e^{i z v} dv on a fixedz grid, cached.

    The grid (alpha*L values) repeats across every mode and overlap kind of
    one spectral group, so memoization removes almost all of the cost.
    """
    key = (alphas_length.tobytes(), mmax)
    hit = _MHAT_CACHE.get(key)
    if hit is not None:
        return hit
    if len(_MHAT_CACHE) > 256:
        _MHAT_CACHE.clear()
    out = _mhat(alphas_length, mmax)
    _MHAT_CACHE[key] = out
    return out


def _mhat(z, mmax):
    """m_hat[m] = int_0^1 v^m exp(i z v) dv for m = 0..mmax; z complex array."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((mmax + 1,) + z.shape, dtype=complex)
    big = np.abs(z) >= 1.0
    iz = 1j * z
    eiz = np.exp(iz)
    # recurrence (stable for |z| >= 1): m_hat[m] = (e^{iz} - m*m_hat[m-1])/(iz)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[0] = np.where(big, (eiz - 1.0) / iz, 0.0)
        for m in range(1, mmax + 1):
            out[m] = np.where(big, (eiz - m * out[m - 1]) / iz, 0.0)
    # series for |z| < 1: sum_k (iz)^k / (k! (m+k+1))
    if np.any(~big):
        zs = iz[~big]
        for m in range(mmax + 1):
            acc = np.full(zs.shape, 1.0 / (m + 1), dtype=complex)
            term = np.ones_like(zs)
            for k in range(1, 18):
                term = term * zs / k
                acc = acc + term / (m + k + 1)
            out[m][~big] = acc
    return out


def planewave_seg(acoef, bcoef, eta, alphas, length):
    """int_0^L (a*C(eta,u) + b*S(eta,u)) * exp(-i*alpha*u) du, array of alphas.

    The C part is always evaluated through the entire integral
    E(q) = L*eic(qL); the S part switches to an eta power series against
    moment integrals when |gamma|*L is small (the 1/gamma split would
    otherwise cancel catastrophically).
    """
    alphas = np.asarray(alphas, dtype=float)
    g = cmath.sqrt(complex(eta))
    e_plus = length * _eic((g - alphas) * length)
    e_minus = length * _eic((-g - alphas) * length)
    out = acoef * 0.5 * (e_plus + e_minus)
    if bcoef != 0.0:
        if abs(g) * length >= 0.5:
            out = out + bcoef * (e_plus - e_minus) / (2j * g)
        else:
            mh = _mhat_cached(-alphas * length, 14)
            acc = np.zeros_like(alphas, dtype=complex)
            for k in range(7):
                coef = (-eta) ** k / math.factorial(2 * k + 1) * length ** (2 * k + 2)
                acc = acc + coef * mh[2 * k + 1]
            out = out + bcoef * acc
    return out


def shift_coeffs(a, b, eta, offset):
    """Re-express a*C(eta,u+offset) + b*S(eta,u+offset) in powers of u.

    Returns (a', b') with the same value as a function of u, using the
    addition rules C(u+v) = C(u)C(v) - eta*S(u)S(v) and
    S(u+v) = S(u)C(v) + C(u)S(v).
    """
    cv = cosw(eta, offset)
    sv = sinw(eta, offset)
    return a * cv + b * sv, -a * eta * sv + b * cv
