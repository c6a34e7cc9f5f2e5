"""Explicit quantitative bounds for minimizers, checked against computed states,
and the two abstract decay thresholds as standalone utilities."""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditionViolated, EmptyGrid, InvalidParameters
from .fem import assemble_mass
from .state import MAX_PRINCIPLE_TOL, energy, zero_data_dirichlet

PASS = "PASS"
FAIL = "FAIL"
NOT_APPLICABLE = "NOT_APPLICABLE"


# ---------------------------------------------------------------- support / L2

def _support_rhs(M, omega_area, lam, C0, n):
    return C0 * lam * omega_area ** (2.0 / n) * (M ** (1.0 - 2.0 / n) - M ** (-2.0 / n) * omega_area)


def support_measure_bound(f_l2_norm, omega_area, beta, C0, lambda_beta_ball, n=2, rtol=1e-9):
    """Largest M >= |Omega| with ||f||^2 >= C0 lam |Omega|^{2/n} (M^{1-2/n} - M^{-2/n} |Omega|).

    Any configuration with nonpositive energy has |A| <= M.  In two dimensions
    the right side saturates at C0 lam |Omega|, so a finite M exists only under
    the strict condition ||f||^2 < C0 lam |Omega|; otherwise ConditionViolated.
    ``beta`` enters only through ``lambda_beta_ball``.
    """
    if not (omega_area > 0 and C0 > 0 and lambda_beta_ball > 0 and beta > 0):
        raise InvalidParameters("area, C0, beta and lambda must be positive")
    f2 = f_l2_norm**2
    if n == 2 and not f2 < C0 * lambda_beta_ball * omega_area:
        raise ConditionViolated(
            f"||f||^2 = {f2:.6g} is not below C0 lambda |Omega| = {C0 * lambda_beta_ball * omega_area:.6g}")

    def g(M):
        return f2 - _support_rhs(M, omega_area, lambda_beta_ball, C0, n)

    lo, hi = omega_area, 2.0 * omega_area
    while g(hi) >= 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise ConditionViolated("support inequality admits arbitrarily large sets")
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return lo


def support_bound_n2_closed_form(f_l2_norm, omega_area, C0, lambda_beta_ball):
    """|Omega| / (1 - ||f||^2 / (C0 lam |Omega|)), the two-dimensional solution."""
    q = f_l2_norm**2 / (C0 * lambda_beta_ball * omega_area)
    if q >= 1:
        raise ConditionViolated("two-dimensional existence condition fails")
    return omega_area / (1.0 - q)


def l2_norm_bound(f_l2_norm, omega_area, lambda_beta_ball, c, n=2):
    """C(M) <= 2 c^{2/n} ||f|| / (lam |Omega|)."""
    return 2.0 * c ** (2.0 / n) * f_l2_norm / (lambda_beta_ball * omega_area)


# ------------------------------------------------------- decay thresholds

def stampacchia_threshold(C, alpha, theta, g0, classical=False):
    """Level beyond which a decreasing g with g(h) <= C (h-k)^-alpha g(k)^theta vanishes.

    The default is the closed form C^{1/a} g0^{(theta-1)/a} 2^{theta(theta-1)}.
    It is a valid threshold for theta >= 2; ``classical=True`` returns the
    factor 2^{theta/(theta-1)} from the dyadic level iteration, valid for every
    theta > 1 (the two coincide at theta = 2).
    """
    if not (C > 0 and alpha > 0 and theta > 1 and g0 >= 0):
        raise InvalidParameters(f"need C, alpha > 0, theta > 1, g0 >= 0; got {C}, {alpha}, {theta}, {g0}")
    power = theta / (theta - 1.0) if classical else theta * (theta - 1.0)
    return C ** (1.0 / alpha) * g0 ** ((theta - 1.0) / alpha) * 2.0**power


def stampacchia_levels(C, alpha, theta, g0, n_levels):
    """Dyadic levels k_j = d (1 - 2^-j) and the guaranteed decay g(k_j) <= g0 2^{-j alpha/(theta-1)},
    with d the classical threshold."""
    d = stampacchia_threshold(C, alpha, theta, g0, classical=True)
    j = np.arange(n_levels + 1)
    return d * (1.0 - 2.0 ** (-j)), g0 * 2.0 ** (-j * alpha / (theta - 1.0))


def diffineq_threshold(C, alpha, sigma, t1, g_t1, sharp=False):
    """Time t0 such that an increasing g with g <= C t^alpha (g')^sigma on [0, t1] vanishes on [0, t0].

    The default is the closed form with the constant C; separating variables
    actually produces C^{1/sigma}, which ``sharp=True`` uses.  The two agree at
    C = 1, and the default is a valid (smaller) threshold whenever C >= 1.
    """
    if not (C > 0 and alpha > sigma > 1 and t1 > 0 and g_t1 >= 0):
        raise InvalidParameters(f"need C > 0, alpha > sigma > 1, t1 > 0, g(t1) >= 0; got {C}, {alpha}, {sigma}, {t1}, {g_t1}")
    k = C ** (1.0 / sigma) if sharp else C
    base = k * (alpha - sigma) / (sigma - 1.0) * g_t1 ** ((sigma - 1.0) / sigma) + t1 ** ((sigma - alpha) / sigma)
    return base ** (sigma / (sigma - alpha))


def diffineq_extremal(C, alpha, sigma, t1, g_t1, t):
    """The extremal g solving g = C t^alpha (g')^sigma with g(t1) = g_t1, zero below the sharp t0."""
    t = np.asarray(t, dtype=float)
    q = (sigma - 1.0) / sigma
    e = (sigma - alpha) / sigma
    with np.errstate(divide="ignore"):
        te = np.where(t > 0, t, 0.0) ** e
    inner = g_t1**q + (sigma - 1.0) / (C ** (1.0 / sigma) * (alpha - sigma)) * (t1**e - te)
    return np.maximum(inner, 0.0) ** (1.0 / q)


# ------------------------------------------------------------------ sublevels

def sublevel_areas(mesh, values, t_grid, region=None):
    """|{u < t}| for each t, exact for piecewise-linear u (triangle clipping)."""
    tris = mesh.triangles if region is None else mesh.triangles[mesh.regions == int(region)]
    area = mesh.signed_areas() if region is None else mesh.signed_areas()[mesh.regions == int(region)]
    u = np.sort(np.asarray(values, dtype=float)[tris], axis=1)
    u0, u1, u2 = u[:, 0], u[:, 1], u[:, 2]
    out = []
    with np.errstate(divide="ignore", invalid="ignore"):
        for t in np.atleast_1d(t_grid):
            frac = np.where(t >= u2, 1.0, 0.0)
            low = (t > u0) & (t <= u1)
            frac = np.where(low, (t - u0) ** 2 / ((u1 - u0) * (u2 - u0)), frac)
            high = (t > u1) & (t < u2)
            frac = np.where(high, 1.0 - (u2 - t) ** 2 / ((u2 - u0) * (u2 - u1)), frac)
            out.append(float(np.sum(area * frac)))
    return np.array(out)


@dataclass
class SublevelScan:
    t: np.ndarray
    volumes: np.ndarray
    slope: float
    ratio_spread: float
    status: str


def sublevel_volume_scan(sol=None, t_grid=None, mesh=None, values=None, max_spread=10.0):
    """Omega-sublevel volumes of a state (or of any nodal field on ``mesh``).

    Returns the least-squares slope C of |U_t| ~ C t through the origin.  The
    scan passes when |U_t|/t is bounded on the grid: the spread max/min over the
    nonempty sublevels is at most ``max_spread`` (all-empty sublevels pass).
    """
    if t_grid is None or len(t_grid) == 0:
        raise EmptyGrid("sublevel scan needs a nonempty t grid")
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0):
        raise EmptyGrid("sublevel levels must be positive")
    if mesh is None:
        mesh, values = sol.omega_values()
    vols = sublevel_areas(mesh, values, t)
    slope = float(t @ vols / (t @ t))
    floor = 1e-12 * mesh.area()
    ratios = vols[vols > floor] / t[vols > floor]
    spread = float(ratios.max() / ratios.min()) if ratios.size else 1.0
    return SublevelScan(t, vols, slope, spread, PASS if spread <= max_spread else FAIL)


# ------------------------------------------------------------ state checks

def lower_bound_check(sol):
    """(min nodal u on A, flag); PASS iff the minimum is positive beyond 1e-8 max u."""
    d0 = float(sol.u.min())
    if not (sol.f.value > 0) or sol.max_u <= 0:
        return d0, NOT_APPLICABLE
    return d0, PASS if d0 > MAX_PRINCIPLE_TOL * sol.max_u else FAIL


def linf_ceiling(f_sup, diameter, beta):
    """Sanity ceiling 10 (||f||_inf diam^2/4 + ||f||_inf diam / beta)."""
    return 10.0 * (f_sup * diameter**2 / 4.0 + f_sup * diameter / beta)


def linf_check(sol, u=None):
    v = sol.u if u is None else u
    observed = float(np.max(v))
    ceiling = linf_ceiling(sol.f.sup_norm(), sol.mesh.diameter(), sol.beta)
    ok = math.isfinite(observed) and observed <= ceiling
    return observed, ceiling, PASS if ok else FAIL


@dataclass
class Check:
    name: str
    status: str
    observed: float
    bound: float

    def row(self):
        return [self.name, self.status, f"{self.observed:.17g}", f"{self.bound:.17g}"]


@dataclass
class BoundsReport:
    support_bound_c: float
    l2_bound_CM: float
    n2_condition: str
    f_l2_squared: float
    condition_rhs: float
    area_A: float
    linf_observed: float
    l2_observed: float
    delta0_observed: float
    max_principle_margin: float
    sublevel_slope: float
    energy_total: float
    checks: list = field(default_factory=list)

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def any_fail(self):
        return any(c.status == FAIL for c in self.checks)

    def to_text(self):
        lines = []
        for key in ("support_bound_c", "l2_bound_CM", "n2_condition", "f_l2_squared", "condition_rhs",
                    "area_A", "linf_observed", "l2_observed", "delta0_observed", "max_principle_margin",
                    "sublevel_slope", "energy_total"):
            val = getattr(self, key)
            lines.append(f"{key} = {val}" if isinstance(val, str) else f"{key} = {val:.17g}")
        for c in self.checks:
            lines.append(f"{c.name} = {c.status} observed={c.observed:.17g} bound={c.bound:.17g}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["check", "status", "observed", "bound"])
            for c in self.checks:
                w.writerow(c.row())


def verify_state(sol, C0, guard, box_bound=None, shape=None, u_override=None, n_levels=16):
    """Evaluate every bound on a solved configuration.

    ``guard`` is the two-dimensional existence check (carrying ||f||^2,
    lambda_beta(B) and |Omega|).  ``u_override`` replaces the nodal field for
    the pointwise checks, which is how a corrupted solution is exercised.
    """
    u = sol.u if u_override is None else np.asarray(u_override, dtype=float)
    rep_energy = energy(sol, C0)
    area_A = sol.mesh.area()
    f_norm = math.sqrt(guard.f_l2_squared)
    checks = []

    applicable = guard.status == "SATISFIED" and rep_energy.total <= 0
    if guard.status == "SATISFIED":
        c = support_measure_bound(f_norm, guard.area, sol.beta, C0, guard.lambda_ball, n=2)
        CM = l2_norm_bound(f_norm, guard.area, guard.lambda_ball, c, n=2)
    else:
        c = CM = math.inf

    l2 = float(np.sqrt(u @ (assemble_mass(sol.mesh) @ u)))
    status = (PASS if area_A <= c else FAIL) if applicable else NOT_APPLICABLE
    checks.append(Check("support_measure", status, area_A, c))
    status = (PASS if l2 <= CM else FAIL) if applicable else NOT_APPLICABLE
    checks.append(Check("l2_norm", status, l2, CM))

    d0 = float(u.min())
    max_u = float(u.max())
    if not sol.f.value > 0 or max_u <= 0:
        status = NOT_APPLICABLE
    else:
        status = PASS if d0 > MAX_PRINCIPLE_TOL * max_u else FAIL
    checks.append(Check("lower_bound_delta0", status, d0, MAX_PRINCIPLE_TOL * max_u))

    sub, u0 = zero_data_dirichlet(sol)
    margin = float(np.min(u[sub.parent_index] - u0))
    floor = -MAX_PRINCIPLE_TOL * max(max_u, 0.0)
    checks.append(Check("max_principle", PASS if margin >= floor else FAIL, margin, floor))

    linf, ceiling, status = linf_check(sol, u)
    checks.append(Check("linf", status, linf, ceiling))

    trace_max = float(np.max(u[sub.parent_index][np.unique(sub.boundary_edges)]))
    if trace_max > 0:
        grid = trace_max * np.arange(1, n_levels + 1) / n_levels
        scan = sublevel_volume_scan(mesh=sub, values=u[sub.parent_index], t_grid=grid)
        slope, status, spread = scan.slope, scan.status, scan.ratio_spread
    else:
        slope, status, spread = math.nan, NOT_APPLICABLE, math.nan
    checks.append(Check("sublevel_linear", status, spread, 10.0))

    if box_bound is not None and shape is not None:
        extent = shape.coefficient_bound() if not shape.is_empty() else 0.0
        checks.append(Check("bounded_box", PASS if extent <= box_bound else FAIL, extent, box_bound))

    return BoundsReport(
        support_bound_c=c, l2_bound_CM=CM, n2_condition=guard.status, f_l2_squared=guard.f_l2_squared,
        condition_rhs=guard.rhs, area_A=area_A, linf_observed=linf, l2_observed=l2,
        delta0_observed=d0, max_principle_margin=margin, sublevel_slope=slope,
        energy_total=rep_energy.total, checks=checks)
