"""Bessel functions J0, J1 and the Robin eigenvalue of a disk.

J0 and J1 use the power series for |x| <= SERIES_LIMIT and the Hankel
asymptotic expansion (optimally truncated) beyond it.  The switch sits at 12
rather than 8: at 8 the truncated asymptotic series is only good to ~5e-9,
at 12 both branches agree with reference values to ~1e-12.  Everything here is
self-contained; scipy.special is used only by the tests as a cross-check.
"""

import math

import numpy as np

from .errors import BracketFailure, InvalidParameters

SERIES_LIMIT = 12.0


def _series(x, nu):
    half = 0.5 * x
    term = half**nu / math.factorial(nu)
    total = term
    q = -half * half
    k = 0
    while abs(term) > 1e-18 * max(abs(total), 1e-300):
        k += 1
        term *= q / (k * (k + nu))
        total += term
        if k > 200:
            break
    return total


def _asymptotic(x, nu):
    mu = 4.0 * nu * nu
    p, q = 1.0, 0.0
    term = 1.0
    prev = math.inf
    k = 0
    while True:
        k += 1
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(term) >= prev or abs(term) < 1e-17:
            break
        prev = abs(term)
        # terms alternate between Q (odd k) and P (even k) with signs + - - + ...
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q += sign * term
        else:
            p += sign * term
    chi = x - (0.5 * nu + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def _bessel(x, nu):
    ax = abs(x)
    if ax <= SERIES_LIMIT:
        val = _series(ax, nu)
    else:
        val = _asymptotic(ax, nu)
    if nu == 1 and x < 0:
        val = -val
    return val


def j0(x):
    """Bessel function of the first kind, order 0."""
    if np.ndim(x):
        return np.array([_bessel(float(v), 0) for v in np.ravel(x)]).reshape(np.shape(x))
    return _bessel(float(x), 0)


def j1(x):
    """Bessel function of the first kind, order 1."""
    if np.ndim(x):
        return np.array([_bessel(float(v), 1) for v in np.ravel(x)]).reshape(np.shape(x))
    return _bessel(float(x), 1)


def _bisect(fn, lo, hi, xtol=0.0, maxiter=400):
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketFailure(f"no sign change on [{lo!r}, {hi!r}]")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol:
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def first_zero_j0():
    """First positive zero of J0, by bisection on [2, 3]."""
    return _bisect(j0, 2.0, 3.0)


J01 = first_zero_j0()


def bessel_disk_eigenvalue(R, beta):
    """First Robin eigenvalue of the disk of radius ``R``.

    Solves sqrt(lam) J1(sqrt(lam) R) = beta J0(sqrt(lam) R) for
    lam in (0, (j01/R)^2) by bisection on k = sqrt(lam).
    """
    if not (R > 0 and beta > 0):
        raise InvalidParameters(f"need R > 0 and beta > 0, got R={R}, beta={beta}")

    def char(k):
        return k * j1(k * R) - beta * j0(k * R)

    # bisection runs until the bracket stops shrinking, so lam is resolved to
    # within a few ulps (well below 1e-12 absolute for the ranges used here)
    k = _bisect(char, 0.0, J01 / R)
    return k * k


def disk_radius_for_area(area):
    return math.sqrt(area / math.pi)
