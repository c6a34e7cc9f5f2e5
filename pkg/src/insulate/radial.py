"""Closed-form states and energies for concentric ball configurations.

Omega = B_{R0}, A = B_{R1}, constant source f, Robin coefficient beta, in
dimension n = 2 or 3.  Inside Omega the temperature is c - f r^2/(2n); in the
layer it is a + b log r (n=2) or a + b/r (n=3).  These are the ground truth
for every FEM comparison in the test suite.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import InvalidRadii, SolverFailure

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _sphere_area(n):
    # surface measure of the unit sphere in R^n
    return {2: 2.0 * math.pi, 3: 4.0 * math.pi}[n]


@dataclass(frozen=True)
class RadialSolution:
    n: int
    R0: float
    R1: float
    f: float
    beta: float
    c: float
    a: float
    b: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inner = self.c - self.f * r**2 / (2 * self.n)
        with np.errstate(divide="ignore"):
            if self.n == 2:
                outer = self.a + self.b * np.log(np.where(r > 0, r, 1.0))
            else:
                outer = self.a + self.b / np.where(r > 0, r, 1.0)
        out = np.where(r <= self.R0, inner, outer)
        return out if out.ndim else float(out)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        inner = -self.f * r / self.n
        rr = np.where(r > 0, r, 1.0)
        outer = self.b / rr if self.n == 2 else -self.b / rr**2
        out = np.where(r <= self.R0, inner, outer)
        return out if out.ndim else float(out)

    def outer_trace(self):
        return float(self(self.R1))

    def matching_residuals(self):
        """(continuity at R0, flux continuity at R0, Robin residual at R1 divided by 1 + beta)."""
        R0, R1, n = self.R0, self.R1, self.n
        u_in = self.c - self.f * R0**2 / (2 * n)
        if n == 2:
            u_out = self.a + self.b * math.log(R0)
            du_out = self.b / R0
            robin = self.b / R1 + self.beta * (self.a + self.b * math.log(R1))
        else:
            u_out = self.a + self.b / R0
            du_out = -self.b / R0**2
            robin = -self.b / R1**2 + self.beta * (self.a + self.b / R1)
        du_in = -self.f * R0 / n
        return (u_in - u_out, du_in - du_out, robin / (1.0 + self.beta))


def _check_args(n, R0, R1, beta):
    if n not in (2, 3):
        raise InvalidRadii(f"dimension must be 2 or 3, got {n}")
    if not (R0 > 0 and R1 >= R0):
        raise InvalidRadii(f"need 0 < R0 <= R1, got R0={R0}, R1={R1}")
    if not beta > 0:
        raise InvalidRadii(f"beta must be positive, got {beta}")


def radial_state(n, R0, R1, f, beta):
    """Exact solution of the state problem on concentric balls."""
    _check_args(n, R0, R1, beta)
    if n == 2:
        b = -f * R0**2 / 2.0
        a = -b / (beta * R1) - b * math.log(R1)
        c = a + b * math.log(R0) + f * R0**2 / 4.0
    else:
        b = f * R0**3 / 3.0
        a = b / (beta * R1**2) - b / R1
        c = a + b / R0 + f * R0**2 / 6.0
    sol = RadialSolution(n, float(R0), float(R1), float(f), float(beta), c, a, b)
    scale = max(1.0, abs(c), abs(a), abs(b))
    if max(abs(x) for x in sol.matching_residuals()) > 1e-14 * scale * 4:
        raise SolverFailure(f"radial matching conditions violated: {sol.matching_residuals()}")
    return sol


def source_integral(sol):
    """int_Omega f u, closed form."""
    n, R0, f = sol.n, sol.R0, sol.f
    return _sphere_area(n) * f * (sol.c * R0**n / n - f * R0 ** (n + 2) / (2 * n * (n + 2)))


def source_integral_quadrature(sol):
    w = _sphere_area(sol.n)
    val, _ = integrate.quad(lambda r: sol.f * sol(r) * w * r ** (sol.n - 1), 0.0, sol.R0,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def layer_volume(n, R0, R1):
    return _sphere_area(n) / n * (R1**n - R0**n)


def checked_source_integral(sol):
    """Closed form, cross-checked against adaptive quadrature to 1e-10."""
    exact = source_integral(sol)
    quad = source_integral_quadrature(sol)
    if abs(exact - quad) > 1e-10 * max(1.0, abs(exact)):
        raise SolverFailure(f"oracle self-check failed: closed form {exact!r} vs quadrature {quad!r}")
    return exact


def radial_energy(n, R0, R1, f, beta, C0):
    """Total energy of the concentric configuration, -int f u + C0 |A \\ Omega|."""
    sol = radial_state(n, R0, R1, f, beta)
    return -checked_source_integral(sol) + C0 * layer_volume(n, R0, R1)


def radial_energy_terms(n, R0, R1, f, beta, C0):
    """The four energy terms evaluated directly from the closed form.

    Returns a dict with dirichlet, robin, source (= 2 int f u), volume_penalty
    and total.
    """
    sol = radial_state(n, R0, R1, f, beta)
    w = _sphere_area(n)
    inner = w * (f / n) ** 2 * R0 ** (n + 2) / (n + 2)
    if n == 2:
        layer = w * sol.b**2 * math.log(R1 / R0)
    else:
        layer = w * sol.b**2 * (1.0 / R0 - 1.0 / R1)
    robin = beta * sol.outer_trace() ** 2 * w * R1 ** (n - 1)
    source = 2.0 * source_integral(sol)
    volume = C0 * layer_volume(n, R0, R1)
    return {
        "dirichlet": inner + layer,
        "robin": robin,
        "source": source,
        "volume_penalty": volume,
        "total": inner + layer + robin - source + volume,
    }


def radial_energy_derivative(n, R0, R1, f, beta, C0):
    """d/dR1 of the total energy, closed form."""
    w = _sphere_area(n)
    if n == 2:
        dc = f * R0**2 / 2.0 * (1.0 / R1 - 1.0 / (beta * R1**2))
    else:
        dc = f * R0**3 / 3.0 * (1.0 / R1**2 - 2.0 / (beta * R1**3))
    # only c depends on R1 in int f u = w f (c R0^n/n - ...)
    return -w * f * R0**n / n * dc + C0 * w * R1 ** (n - 1)


def _search_ceiling(n, R0, f, C0):
    # beyond this radius the penalty term's derivative dominates for every beta
    if n == 2:
        return max(2.0 * R0, f**2 * R0**3 / (4.0 * C0) * 1.01)
    return max(2.0 * R0, (f**2 * R0**6 / (9.0 * C0)) ** 0.25 * 1.01)


def golden_section(fn, lo, hi, xtol):
    """Minimize a unimodal ``fn`` on [lo, hi]; returns (x, f(x), lo, hi)."""
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    while hi - lo > xtol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = fn(x2)
    if f1 <= f2:
        return x1, f1, lo, hi
    return x2, f2, lo, hi


def radial_optimal_radius(n, R0, f, beta, C0, r_max=None, rtol=1e-10):
    """Outer radius minimizing the concentric-ball energy.

    A dense scan locates the global basin (the energy need not be unimodal),
    then golden-section refines it.  R0 itself is returned when insulation does
    not pay.
    """
    _check_args(n, R0, R0, beta)
    if r_max is None:
        r_max = _search_ceiling(n, R0, f, C0)

    def energy(r):
        return radial_energy(n, R0, r, f, beta, C0)

    grid = np.linspace(R0, r_max, 801)
    vals = np.array([energy(r) for r in grid])
    i = int(np.argmin(vals))
    if i == 0 and vals[1] >= vals[0]:
        lo, hi = grid[0], grid[1]
    else:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    x, fx, _, _ = golden_section(energy, lo, hi, rtol * R0)
    if fx > vals[0] or x - R0 <= 2 * rtol * R0:
        return float(R0)
    step = 1e-5 * R0
    if x + step < r_max:
        slope = (energy(x + step) - energy(x - step)) / (2 * step)
        if abs(slope) >= 1e-6 * max(1.0, abs(fx)):
            raise SolverFailure(f"radial optimum not stationary: dF/dR1 = {slope!r} at R1 = {x!r}")
    return float(x)


def profile_table(sol, n_points=201):
    """(r, u(r)) samples on [0, R1] for CSV dumps."""
    r = np.linspace(0.0, sol.R1, n_points)
    return np.column_stack([r, sol(r)])
