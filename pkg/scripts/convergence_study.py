"""Mesh convergence of the state solver against the concentric closed form.

For an annulus configuration (Omega = B_R0, A = B_R1, constant f) this solves
on a sequence of mesh sizes and reports the relative L2 error, the observed
order, the flux-balance defect and the energy error.

    python scripts/convergence_study.py --beta 1 --R1 2 --out results/convergence.csv
"""

import argparse
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from insulate.fem import SourceField, assemble_mass
from insulate.geometry import LayerShape, RadialShape, mesh_layered
from insulate.radial import radial_energy, radial_state
from insulate.state import energy, solve_state


@dataclass
class ConvergenceSettings:
    R0: float = 1.0
    R1: float = 2.0
    f: float = 1.0
    beta: float = 1.0
    C0: float = 0.05
    h_levels: list = field(default_factory=lambda: [0.16, 0.08, 0.04, 0.02])
    out: str = "convergence.csv"


def run(s):
    omega = RadialShape.disk(s.R0)
    exact = radial_state(2, s.R0, s.R1, s.f, s.beta)
    E_exact = radial_energy(2, s.R0, s.R1, s.f, s.beta, s.C0)
    rows, prev = [], None
    for h in s.h_levels:
        mesh = mesh_layered(omega, LayerShape.constant(s.R1 - s.R0), h)
        sol = solve_state(mesh, SourceField.constant(s.f), s.beta)
        ue = exact(np.linalg.norm(mesh.vertices, axis=1))
        M = assemble_mass(mesh)
        err = math.sqrt((sol.u - ue) @ (M @ (sol.u - ue)) / (ue @ (M @ ue)))
        order = math.log(prev[1] / err) / math.log(prev[0] / h) if prev else math.nan
        e_err = abs(energy(sol, s.C0).total - E_exact) / abs(E_exact)
        rows.append([h, mesh.n_vertices, err, order, sol.flux_defect(), e_err])
        print(f"h={h:<6g} nodes={mesh.n_vertices:<7d} L2={err:.3e} order={order:.3f} "
              f"flux={sol.flux_defect():.1e} energy={e_err:.2e}")
        prev = (h, err)
    with open(s.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["h", "nodes", "l2_error", "order", "flux_defect", "energy_rel_error"])
        w.writerows([[f"{x:.17g}" if isinstance(x, float) else x for x in r] for r in rows])
    return rows


def main():
    d = ConvergenceSettings()
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--R0", type=float, default=d.R0)
    p.add_argument("--R1", type=float, default=d.R1)
    p.add_argument("--f", type=float, default=d.f)
    p.add_argument("--beta", type=float, default=d.beta)
    p.add_argument("--C0", type=float, default=d.C0)
    p.add_argument("--h", type=float, nargs="+", default=d.h_levels, dest="h_levels")
    p.add_argument("--out", default=d.out)
    run(ConvergenceSettings(**vars(p.parse_args())))


if __name__ == "__main__":
    main()
