"""First Robin eigenvalue by inverse power iteration, and the eigenvalue
comparison checks built on it (ball scaling, Faber-Krahn)."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_disk_eigenvalue, disk_radius_for_area
from .errors import InvalidRadii, IterationStall, ZeroVector
from .fem import assemble_boundary_mass, assemble_mass, assemble_stiffness, pcg
from .geometry import Boundary


@dataclass(frozen=True)
class EigenResult:
    lam: float
    vector: np.ndarray
    iterations: int
    residual: float


def _robin_operators(mesh, beta):
    K = assemble_stiffness(mesh)
    B = assemble_boundary_mass(mesh, Boundary.OUTER)
    M = assemble_mass(mesh)
    return (K + beta * B).tocsr(), M


def robin_eigenvalue(mesh, beta, lam_tol=1e-10, res_tol=1e-8, maxit=500, inner_tol=1e-12):
    """Smallest eigenpair of (K + beta B) v = lam M v.

    Inverse iteration with shift 0 and CG inner solves.  Stops once successive
    eigenvalue estimates agree to ``lam_tol`` (relative) and the eigen-residual
    ||(K + beta B) v - lam M v|| is at most ``res_tol`` ||v||.  The eigenvector is
    M-normalized with positive mean.
    """
    if not beta > 0:
        raise InvalidRadii(f"beta must be positive, got {beta}")
    A, M = _robin_operators(mesh, beta)
    v = np.ones(mesh.n_vertices)
    v /= math.sqrt(v @ (M @ v))
    lam_old = v @ (A @ v)
    for it in range(1, maxit + 1):
        # the next iterate is close to v / lam, a good starting guess for CG
        w, _ = pcg(A, M @ v, x0=v / lam_old, tol=inner_tol)
        v = w / math.sqrt(w @ (M @ w))
        lam = float(v @ (A @ v))
        res = float(np.linalg.norm(A @ v - lam * (M @ v)))
        if abs(lam - lam_old) <= lam_tol * abs(lam) and res <= res_tol * np.linalg.norm(v):
            if v.sum() < 0:
                v = -v
            return EigenResult(lam, v, it, res)
        lam_old = lam
    raise IterationStall(f"inverse iteration did not converge in {maxit} steps (last residual {res:.3e})")


def rayleigh_quotient(mesh, beta, v):
    v = np.asarray(v, dtype=float)
    A, M = _robin_operators(mesh, beta)
    den = v @ (M @ v)
    if not den > 0:
        raise ZeroVector("Rayleigh quotient of the zero vector")
    return float((v @ (A @ v)) / den)


def scaling_bound_check(r, R, beta, h=None, mesher=None):
    """(R/r)^2 lam_beta(B_R) - lam_beta(B_r) in two dimensions.

    Eigenvalues come from the Bessel oracle; with ``h`` and a ``mesher``
    (callable radius, h -> Mesh) they are computed by finite elements instead.
    """
    if not 0 < r < R:
        raise InvalidRadii(f"need 0 < r < R, got r={r}, R={R}")
    if h is None or mesher is None:
        lam_R = bessel_disk_eigenvalue(R, beta)
        lam_r = bessel_disk_eigenvalue(r, beta)
    else:
        lam_R = robin_eigenvalue(mesher(R, h * R), beta).lam
        lam_r = robin_eigenvalue(mesher(r, h * r), beta).lam
    return (R / r) ** 2 * lam_R - lam_r


@dataclass(frozen=True)
class FaberKrahnResult:
    area: float
    beta: float
    lam: float
    lam_ball: float

    @property
    def gap(self):
        return self.lam - self.lam_ball

    @property
    def relative_gap(self):
        return self.gap / self.lam


def faber_krahn_gap(mesh, beta, eig=None):
    """lam_beta(Omega) - lam_beta(B) for the disk B with |B| = |Omega|."""
    if eig is None:
        eig = robin_eigenvalue(mesh, beta)
    area = mesh.area()
    lam_ball = bessel_disk_eigenvalue(disk_radius_for_area(area), beta)
    return FaberKrahnResult(area, float(beta), eig.lam, lam_ball)


CATALOG_HEADER = ["shape_id", "area", "beta", "lambda", "oracle_lambda", "gap"]


def catalog_row(shape_id, result, is_disk=False):
    oracle = f"{result.lam_ball:.17g}" if is_disk else ""
    return [shape_id, f"{result.area:.17g}", f"{result.beta:.17g}", f"{result.lam:.17g}", oracle,
            f"{result.gap:.17g}"]


def write_catalog(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CATALOG_HEADER)
        w.writerows(rows)
