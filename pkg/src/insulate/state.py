"""Stationary heat problem on an insulated configuration A with Robin loss on dA.

The discrete state solves (K + beta B_outer) u = F where F carries the source
on Omega only; the layer is a passive conductor.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import MeshMismatch, SolverFailure, ValidationError
from .fem import (
    assemble_boundary_mass,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    solve_spd,
)
from .geometry import Boundary, Mesh, Region

MAX_PRINCIPLE_TOL = 1e-8


@dataclass(eq=False)
class StateSolution:
    mesh: Mesh
    u: np.ndarray
    beta: float
    f: object
    solver_residual: float
    tol: float
    K: sp.csr_matrix = field(repr=False)
    B: sp.csr_matrix = field(repr=False)
    F: np.ndarray = field(repr=False)

    @property
    def max_u(self):
        return float(self.u.max()) if self.u.size else 0.0

    def source_integral(self, u=None):
        """int_Omega f u (same quadrature as the load vector)."""
        return float(self.F @ (self.u if u is None else u))

    def flux_balance(self):
        """(beta * int_{dA} u, int_Omega f); equal for the exact discrete solution."""
        ones = np.ones(self.mesh.n_vertices)
        return float(self.beta * (ones @ (self.B @ self.u))), float(self.F.sum())

    def flux_defect(self):
        lhs, rhs = self.flux_balance()
        return abs(lhs - rhs) / max(abs(rhs), 1e-300)

    def l2_norm(self, region=None):
        M = assemble_mass(self.mesh, region)
        return float(np.sqrt(self.u @ (M @ self.u)))

    def omega_values(self):
        """Nodal values on the OMEGA submesh, with that submesh."""
        sub = self.mesh.submesh(Region.OMEGA)
        return sub, self.u[sub.parent_index]

    def outer_trace(self):
        return self.u[self.mesh.boundary_vertices(Boundary.OUTER)]


@dataclass(frozen=True)
class EnergyReport:
    dirichlet: float
    robin: float
    source: float
    volume_penalty: float
    total: float
    solver_residual: float = 0.0

    @classmethod
    def from_parts(cls, dirichlet, robin, source, volume_penalty, solver_residual=0.0):
        total = dirichlet + robin - source + volume_penalty
        return cls(float(dirichlet), float(robin), float(source), float(volume_penalty), float(total),
                   float(solver_residual))

    def as_dict(self):
        return {
            "dirichlet": self.dirichlet,
            "robin": self.robin,
            "source": self.source,
            "volume_penalty": self.volume_penalty,
            "total": self.total,
            "solver_residual": self.solver_residual,
        }

    def to_text(self):
        return "".join(f"{k} = {v:.17g}\n" for k, v in self.as_dict().items())


def state_system(mesh, f, beta):
    K = assemble_stiffness(mesh)
    B = assemble_boundary_mass(mesh, Boundary.OUTER)
    F = assemble_load(mesh, f, Region.OMEGA)
    return K, B, F


def solve_state(mesh, f, beta, tol=1e-10, check=True):
    """Discrete temperature on A; checks the residual and the maximum principle."""
    if not beta > 0:
        raise ValidationError(f"beta must be positive, got {beta}")
    K, B, F = state_system(mesh, f, beta)
    A = (K + beta * B).tocsr()
    u = solve_spd(A, F, tol=tol)
    fnorm = np.linalg.norm(F)
    res = float(np.linalg.norm(A @ u - F) / fnorm) if fnorm > 0 else 0.0
    sol = StateSolution(mesh, u, float(beta), f, res, tol, K, B, F)
    if check:
        if res > tol:
            raise SolverFailure(f"state residual {res:.3e} exceeds tol {tol:.3e}")
        if u.size and u.min() < -MAX_PRINCIPLE_TOL * max(sol.max_u, 0.0):
            raise SolverFailure(f"discrete maximum principle violated: min u = {u.min():.3e}")
    return sol


def energy(sol, C0, u=None):
    """Four energy terms evaluated from assembled quadratic forms."""
    v = sol.u if u is None else np.asarray(u, dtype=float)
    dirichlet = v @ (sol.K @ v)
    robin = sol.beta * (v @ (sol.B @ v))
    source = 2.0 * (sol.F @ v)
    penalty = C0 * sol.mesh.area(Region.LAYER) if np.any(sol.mesh.regions == Region.LAYER) else 0.0
    return EnergyReport.from_parts(dirichlet, robin, source, penalty, sol.solver_residual)


def reduced_energy_residual(sol, u=None):
    """|int|grad u|^2 + beta int u^2 - int f u| / max(1, int f u)."""
    v = sol.u if u is None else np.asarray(u, dtype=float)
    quad = v @ (sol.K @ v) + sol.beta * (v @ (sol.B @ v))
    fu = sol.F @ v
    return float(abs(quad - fu) / max(1.0, abs(fu)))


def solve_dirichlet(mesh, f, boundary_data, tol=1e-10):
    """Solve -Lap v = f on ``mesh`` with v prescribed on its boundary vertices.

    ``boundary_data`` is a scalar, a callable of points, or a nodal array over
    all mesh vertices (only boundary entries are read).
    """
    bnd = np.unique(mesh.boundary_edges)
    n = mesh.n_vertices
    if callable(boundary_data):
        g = np.asarray(boundary_data(mesh.vertices[bnd]), dtype=float)
    else:
        data = np.asarray(boundary_data, dtype=float)
        if data.ndim == 0:
            g = np.full(bnd.size, float(data))
        elif data.shape == (n,):
            g = data[bnd]
        else:
            raise MeshMismatch(f"boundary data has shape {data.shape}, mesh has {n} vertices")
    if np.any(g < 0):
        raise ValidationError("boundary data must be nonnegative")
    K = assemble_stiffness(mesh)
    F = assemble_load(mesh, f, region=None)
    interior = np.setdiff1d(np.arange(n), bnd)
    v = np.zeros(n)
    v[bnd] = g
    if interior.size:
        K_II = K[interior][:, interior]
        rhs = F[interior] - K[interior][:, bnd] @ g
        v[interior] = solve_spd(K_II, rhs, tol=tol) if np.linalg.norm(rhs) > 0 else 0.0
    return v


def maximum_principle_check(sol, u0, omega_mesh=None):
    """min over Omega nodes of (u - u0).

    ``u0`` lives on the OMEGA submesh of the configuration; ``omega_mesh`` (the
    submesh used to compute u0) is rebuilt when not given.
    """
    if omega_mesh is None:
        omega_mesh = sol.mesh.submesh(Region.OMEGA)
    u0 = np.asarray(u0, dtype=float)
    if omega_mesh.parent_index is None or u0.shape != (omega_mesh.n_vertices,):
        raise MeshMismatch("u0 is not a nodal field on the OMEGA submesh of the configuration")
    if omega_mesh.parent_index.max() >= sol.mesh.n_vertices:
        raise MeshMismatch("OMEGA submesh does not belong to this configuration")
    return float(np.min(sol.u[omega_mesh.parent_index] - u0))


def zero_data_dirichlet(sol, tol=1e-10):
    """u0 of the Dirichlet problem on Omega with zero boundary data."""
    sub = sol.mesh.submesh(Region.OMEGA)
    return sub, solve_dirichlet(sub, sol.f, 0.0, tol=tol)
