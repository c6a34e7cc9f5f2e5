"""P1 finite elements: assembly of stiffness, mass, boundary mass and load, and a
Jacobi-preconditioned conjugate gradient solver for SPD systems."""

import math
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import (
    DegenerateTriangle,
    MaxIterationsExceeded,
    NotPositiveDefinite,
    ValidationError,
)
from .geometry import DEGENERATE_AREA, Boundary, Region


@dataclass(frozen=True)
class SourceField:
    """Heat source f: either a positive constant or a Gaussian bump.

    GAUSSIAN evaluates amplitude * exp(-|x - center|^2 / (2 width^2)).
    """

    kind: str = "const"
    value: float = 1.0
    center: tuple = (0.0, 0.0)
    width: float = 1.0
    allow_degenerate: bool = False

    def __post_init__(self):
        if self.kind not in ("const", "gaussian"):
            raise ValidationError(f"unknown source kind {self.kind!r}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.kind == "gaussian" and not self.width > 0:
            raise ValidationError("gaussian width must be positive")
        if not self.allow_degenerate and not self.value > 0:
            raise ValidationError(f"source must be strictly positive, got value {self.value}")

    @classmethod
    def constant(cls, value, allow_degenerate=False):
        return cls("const", float(value), allow_degenerate=allow_degenerate)

    @classmethod
    def gaussian(cls, center, width, amplitude, allow_degenerate=False):
        return cls("gaussian", float(amplitude), tuple(center), float(width), allow_degenerate)

    @property
    def is_constant(self):
        return self.kind == "const"

    def __call__(self, xy):
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        if self.kind == "const":
            return np.full(xy.shape[0], self.value)
        d2 = ((xy - np.asarray(self.center)) ** 2).sum(axis=1)
        return self.value * np.exp(-d2 / (2.0 * self.width**2))

    def scaled(self, factor):
        return SourceField(self.kind, self.value * factor, self.center, self.width, self.allow_degenerate)

    def sup_norm(self):
        return abs(self.value)

    def l2_norm(self, mesh, region=Region.OMEGA):
        """||f||_{L2(Omega)} with the same midpoint rule as the load vector."""
        keep = mesh.regions == int(region)
        areas = mesh.signed_areas()[keep]
        vals = self(mesh.centroids()[keep])
        return math.sqrt(float(np.sum(areas * vals**2)))

    def integral(self, mesh, region=Region.OMEGA):
        keep = mesh.regions == int(region)
        return float(np.sum(mesh.signed_areas()[keep] * self(mesh.centroids()[keep])))

    def describe(self):
        if self.kind == "const":
            return f"const {self.value:.17g}"
        cx, cy = self.center
        return f"gaussian {cx:.17g} {cy:.17g} {self.width:.17g} {self.value:.17g}"


def _gradients(mesh, tris):
    p = mesh.vertices[tris]
    x, y = p[..., 0], p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    if np.any(area <= DEGENERATE_AREA * mesh.h**2):
        raise DegenerateTriangle(f"triangle with area {area.min():.3e} in assembly")
    return b, c, area


def _scatter(tris, local, n):
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def _select(mesh, region):
    if region is None:
        return mesh.triangles
    return mesh.triangles[mesh.regions == int(region)]


def local_stiffness(b, c, area):
    return (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area[:, None, None])


def assemble_stiffness(mesh, region=None):
    """K_ij = int grad phi_i . grad phi_j over the (optionally filtered) mesh."""
    tris = _select(mesh, region)
    b, c, area = _gradients(mesh, tris)
    return _scatter(tris, local_stiffness(b, c, area), mesh.n_vertices)


_MASS_REF = (np.ones((3, 3)) + np.eye(3)) / 12.0


def assemble_mass(mesh, region=None):
    """Consistent P1 mass matrix, area/12 * [[2,1,1],[1,2,1],[1,1,2]] per triangle."""
    tris = _select(mesh, region)
    _, _, area = _gradients(mesh, tris)
    return _scatter(tris, area[:, None, None] * _MASS_REF, mesh.n_vertices)


def assemble_boundary_mass(mesh, tag=Boundary.OUTER):
    """int over tagged edges of phi_i phi_j, L/6 * [[2,1],[1,2]] per edge."""
    edges = mesh.tagged_edges(tag)
    n = mesh.n_vertices
    if edges.size == 0:
        return sp.csr_matrix((n, n))
    length = np.linalg.norm(mesh.vertices[edges[:, 1]] - mesh.vertices[edges[:, 0]], axis=1)
    local = length[:, None, None] / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    rows = np.repeat(edges, 2, axis=1).ravel()
    cols = np.tile(edges, (1, 2)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_load(mesh, f, region=Region.OMEGA):
    """F_i = int_Omega f phi_i with one-point (centroid) quadrature per triangle."""
    tris = _select(mesh, region)
    _, _, area = _gradients(mesh, tris)
    vals = f(mesh.vertices[tris].mean(axis=1)) * area / 3.0
    return np.bincount(tris.ravel(), weights=np.repeat(vals, 3), minlength=mesh.n_vertices)


def symmetry_defect(A):
    """max |A - A^T| relative to max |A|."""
    A = sp.csr_matrix(A)
    scale = abs(A).max() if A.nnz else 0.0
    if scale == 0:
        return 0.0
    D = A - A.T
    return float(abs(D).max() / scale) if D.nnz else 0.0


def pcg(A, b, x0=None, tol=1e-10, maxiter=None, callback=None):
    """Jacobi-preconditioned conjugate gradients.

    Stops when ||b - A x|| <= tol ||b||.  Returns (x, info) where info carries
    ``iterations`` and ``residual`` (relative).  Negative or zero curvature
    p^T A p <= 0 raises NotPositiveDefinite; running out of iterations raises
    MaxIterationsExceeded with the best iterate attached.
    """
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    n = b.size
    if maxiter is None:
        maxiter = max(1000, 10 * n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), {"iterations": 0, "residual": 0.0}
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise NotPositiveDefinite("nonpositive diagonal entry")
    inv_diag = 1.0 / diag
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    best_x, best_res = x.copy(), np.linalg.norm(r) / bnorm
    for it in range(1, maxiter + 1):
        if best_res <= tol:
            return x, {"iterations": it - 1, "residual": best_res}
        Ap = A @ p
        curv = p @ Ap
        if curv <= 0:
            raise NotPositiveDefinite(f"nonpositive curvature {curv:.3e} at CG iteration {it}")
        alpha = rz / curv
        x = x + alpha * p
        r = r - alpha * Ap
        if callback is not None:
            callback(x)
        res = np.linalg.norm(r) / bnorm
        if res < best_res:
            best_x, best_res = x.copy(), res
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    # recompute the true residual before giving up: the recurrence may drift
    true_res = np.linalg.norm(b - A @ x) / bnorm
    if true_res <= tol:
        return x, {"iterations": maxiter, "residual": true_res}
    raise MaxIterationsExceeded(f"CG did not reach tol={tol} in {maxiter} iterations (residual {best_res:.3e})",
                                x=best_x, residual=best_res, iterations=maxiter)


def solve_spd(A, b, tol=1e-10, maxiter=None, x0=None):
    """Solve A x = b for SPD A; guarantees ||A x - b|| <= tol ||b|| on return."""
    if not 0 < tol < 1:
        raise ValidationError(f"tol must lie in (0, 1), got {tol}")
    x, info = pcg(A, b, x0=x0, tol=tol, maxiter=maxiter)
    # the recursive residual can drift from the true one; polish if needed
    bnorm = np.linalg.norm(b)
    for _ in range(3):
        r = b - A @ x
        if bnorm == 0 or np.linalg.norm(r) <= tol * bnorm:
            break
        dx, _ = pcg(A, r, tol=tol * bnorm / max(np.linalg.norm(r), 1e-300), maxiter=maxiter)
        x = x + dx
    return x


def write_matrix_market(path, A, comment=""):
    scipy.io.mmwrite(path, sp.coo_matrix(A), comment=comment, field="real", precision=17)
