"""Outer minimization of the total energy over insulation layer shapes."""

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bessel import bessel_disk_eigenvalue, disk_radius_for_area
from .fem import SourceField
from .geometry import LayerShape, RadialShape, mesh_layered, write_table
from .radial import golden_section
from .state import energy, solve_state

SATISFIED = "SATISFIED"
VIOLATED = "VIOLATED"


def evaluate_shape(omega, shape, f, beta, C0, h, tol=1e-10):
    """Mesh A(shape), solve the state and return (EnergyReport, StateSolution)."""
    mesh = mesh_layered(omega, shape, h)
    sol = solve_state(mesh, f, beta, tol=tol)
    return energy(sol, C0), sol


def evaluate_shape_energy(omega, shape, f, beta, C0, h, tol=1e-10):
    return evaluate_shape(omega, shape, f, beta, C0, h, tol)[0]


def search_box(omega, beta):
    """Upper bound on t0 + sum |a_k| + |b_k| (bounded support of minimizers)."""
    return 10.0 / beta + omega_diameter(omega)


def omega_diameter(omega, n=720):
    p = omega.boundary_points(n)
    d = p[:, None, :] - p[None, :, :]
    return float(np.sqrt((d**2).sum(-1)).max())


@dataclass
class GuardResult:
    status: str
    f_l2_squared: float
    rhs: float
    lambda_ball: float
    area: float

    def __str__(self):
        return f"{self.status}: ||f||^2 = {self.f_l2_squared:.17g}, C0 lambda(B) |Omega| = {self.rhs:.17g}"


def f_l2_squared(f, omega, n_theta=512, n_radial=48):
    """||f||^2 over a star-shaped Omega by polar Gauss-Legendre quadrature."""
    if f.is_constant:
        return f.value**2 * omega.area()
    x, w = np.polynomial.legendre.leggauss(n_radial)
    theta = np.linspace(0.0, 2 * math.pi, n_theta, endpoint=False)
    rho = omega(theta)
    s = 0.5 * (x + 1.0)
    r = rho[:, None] * s[None, :]
    pts = omega.center + r[..., None] * np.stack([np.cos(theta), np.sin(theta)], axis=1)[:, None, :]
    vals = f(pts.reshape(-1, 2)).reshape(r.shape) ** 2
    radial = (vals * r * (0.5 * w)[None, :]).sum(axis=1) * rho
    return float(radial.mean() * 2 * math.pi)


def n2_existence_guard(f, omega, beta, C0, f_norm_squared=None):
    """Compare ||f||^2_{L2(Omega)} with C0 lambda_beta(B) |Omega| (strict inequality)."""
    area = omega.area() if isinstance(omega, RadialShape) else float(omega)
    if f_norm_squared is None:
        f_norm_squared = f_l2_squared(f, omega)
    lam = bessel_disk_eigenvalue(disk_radius_for_area(area), beta)
    rhs = C0 * lam * area
    # strict inequality; values within 1e-12 relative of equality count as violated
    ok = f_norm_squared < rhs and rhs - f_norm_squared > 1e-12 * max(rhs, f_norm_squared)
    return GuardResult(SATISFIED if ok else VIOLATED, float(f_norm_squared), float(rhs), lam, area)


def radial_profile_search(R0, f_const, beta, C0, h, xtol=None, tol=1e-10, f=None, n_scan=9):
    """Golden-section search for the best concentric layer, using FEM energies.

    R1 ranges over [R0, R0 + 10/beta + 2 R0] (the bounded search box).  A coarse
    scan of ``n_scan`` radii picks the basin, which golden-section then refines.
    Returns (R1_star, energy, (lo, hi)) with hi - lo <= xtol (default 1e-3 R0).
    """
    if f is None:
        f = SourceField.constant(f_const)
    omega = RadialShape.disk(R0)
    xtol = 1e-3 * R0 if xtol is None else xtol

    cache = {}

    def fem_energy(R1):
        if R1 not in cache:
            cache[R1] = evaluate_shape_energy(omega, LayerShape.constant(R1 - R0), f, beta, C0, h, tol).total
        return cache[R1]

    grid = np.linspace(R0, R0 + search_box(omega, beta), n_scan)
    i = int(np.argmin([fem_energy(r) for r in grid]))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_scan - 1)]
    x, fx, lo, hi = golden_section(fem_energy, lo, hi, xtol)
    f0 = fem_energy(R0)
    if f0 <= fx:
        return R0, f0, (lo, hi)
    return x, fx, (lo, hi)


@dataclass
class Evaluation:
    params: np.ndarray
    shape: LayerShape
    report: object


@dataclass
class OptimizationTrace:
    evaluations: list = field(default_factory=list)
    accepted: list = field(default_factory=list)
    best_index: int = -1
    converged: bool = False
    budget_exhausted: bool = False
    message: str = ""
    guard: GuardResult = None
    kmax: int = 0

    @property
    def n_evaluations(self):
        return len(self.evaluations)

    @property
    def best(self):
        return self.evaluations[self.best_index]

    @property
    def best_shape(self):
        return self.best.shape

    @property
    def best_total(self):
        return self.best.report.total

    def record(self, params, shape, report):
        self.evaluations.append(Evaluation(np.array(params, dtype=float), shape, report))
        if self.best_index < 0 or report.total < self.best_total:
            self.best_index = len(self.evaluations) - 1

    def csv_header(self):
        names = ["t0"]
        for k in range(1, self.kmax + 1):
            names += [f"a{k}", f"b{k}"]
        return ["iteration"] + names + ["dirichlet", "robin", "source", "volume_penalty", "total"]

    def csv_rows(self):
        rows = []
        for i, ev in enumerate(self.evaluations):
            r = ev.report
            rows.append([str(i)] + [f"{p:.17g}" for p in ev.shape.as_vector()]
                        + [f"{x:.17g}" for x in (r.dirichlet, r.robin, r.source, r.volume_penalty, r.total)])
        return rows

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.csv_header())
            w.writerows(self.csv_rows())

    def write_best_shape(self, path, n=360):
        write_table(path, self.best_shape.table(n))


def _initial_simplex(x0, R0, rng):
    n = x0.size
    scale = max(x0[0], 0.1 * R0)
    steps = np.full(n, 0.25 * scale)
    steps[0] = max(0.25 * x0[0], 0.1 * R0)
    steps *= 1.0 + 0.1 * rng.uniform(-1.0, 1.0, size=n)
    simplex = np.tile(x0, (n + 1, 1))
    simplex[1:] += np.diag(steps)
    return simplex


def optimize_shape(omega, initial, f, beta, C0, h, budget=400, seed=0, tol=1e-10,
                   xatol=None, fatol=1e-9):
    """Nelder-Mead over (t0, a_1, b_1, ..., a_K, b_K).

    Every distinct shape is evaluated once (clamped-to-zero shapes share the
    zero-shape evaluation).  The uninsulated shape and ``initial`` are always
    evaluated, so the best total never exceeds either.  Parameters outside the
    bounded search box score +inf.  When ``budget`` evaluations are used up the
    best-so-far is returned with ``budget_exhausted`` set.
    """
    if budget < 50:
        raise ValueError("budget must allow at least 50 evaluations")
    R0 = omega.mean_radius()
    box = search_box(omega, beta)
    xatol = 1e-4 * R0 if xatol is None else xatol
    trace = OptimizationTrace(kmax=initial.kmax)
    trace.guard = n2_existence_guard(f, omega, beta, C0)
    if trace.guard.status == VIOLATED:
        warnings.warn(f"existence condition for n=2 violated ({trace.guard}); optimizing anyway",
                      RuntimeWarning, stacklevel=2)
    cache = {}

    class _Budget(Exception):
        pass

    def objective(x):
        shape = LayerShape.from_vector(x)
        if shape.coefficient_bound() > box:
            return math.inf
        shape = shape.canonical()
        key = tuple(shape.as_vector().tolist())
        if key not in cache:
            if len(cache) >= budget:
                raise _Budget()
            report = evaluate_shape_energy(omega, shape, f, beta, C0, h, tol)
            cache[key] = report.total
            trace.record(x, shape, report)
        return cache[key]

    x0 = initial.as_vector()
    objective(np.zeros_like(x0))
    objective(x0)
    simplex = _initial_simplex(x0, R0, np.random.default_rng(seed))

    def callback(xk):
        trace.accepted.append((len(trace.accepted), float(objective(xk))))

    try:
        res = minimize(objective, x0, method="Nelder-Mead", callback=callback,
                       options={"initial_simplex": simplex, "xatol": xatol, "fatol": fatol,
                                "maxfev": 100 * budget, "maxiter": 100 * budget, "adaptive": False})
        trace.converged = bool(res.success)
        trace.message = str(res.message)
    except _Budget:
        trace.budget_exhausted = True
        trace.message = f"evaluation budget of {budget} exhausted"
        warnings.warn(trace.message + "; returning best shape found so far", RuntimeWarning, stacklevel=2)
    return trace
