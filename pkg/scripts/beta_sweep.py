"""Optimal concentric insulation radius as a function of the Robin coefficient.

For each beta this reports the closed-form optimum R1*, the finite element
golden-section estimate, the existence-condition status and the large-beta
limit R0^2 f / (2 sqrt(C0)).

    python scripts/beta_sweep.py --C0 0.05 --out results/beta_sweep.csv
"""

import argparse
import csv
import math
from dataclasses import dataclass, field

from insulate.fem import SourceField
from insulate.geometry import RadialShape
from insulate.optimize import n2_existence_guard, radial_profile_search
from insulate.radial import radial_energy, radial_optimal_radius


@dataclass
class SweepSettings:
    R0: float = 1.0
    f: float = 1.0
    C0: float = 0.05
    h: float = 0.08
    betas: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0, 8.0, 20.0, 100.0])
    fem: bool = True
    out: str = "beta_sweep.csv"


def run(s):
    limit = s.R0**2 * s.f / (2.0 * math.sqrt(s.C0))
    source = SourceField.constant(s.f)
    rows = []
    for beta in s.betas:
        R_star = radial_optimal_radius(2, s.R0, s.f, beta, s.C0)
        F_star = radial_energy(2, s.R0, R_star, s.f, beta, s.C0)
        R_fem = radial_profile_search(s.R0, s.f, beta, s.C0, s.h)[0] if s.fem else math.nan
        guard = n2_existence_guard(source, RadialShape.disk(s.R0), beta, s.C0)
        rows.append([beta, R_star, F_star, R_fem, guard.status])
        print(f"beta={beta:<7g} R1*={R_star:.6f} F*={F_star:.6f} fem R1={R_fem:.6f} {guard.status}")
    print(f"large-beta limit of R1*: {limit:.6f}")
    with open(s.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["beta", "R1_star", "F_star", "R1_fem", "n2_condition"])
        for r in rows:
            w.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in r])
    return rows


def main():
    d = SweepSettings()
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--R0", type=float, default=d.R0)
    p.add_argument("--f", type=float, default=d.f)
    p.add_argument("--C0", type=float, default=d.C0)
    p.add_argument("--h", type=float, default=d.h)
    p.add_argument("--betas", type=float, nargs="+", default=d.betas)
    p.add_argument("--no-fem", dest="fem", action="store_false")
    p.add_argument("--out", default=d.out)
    run(SweepSettings(**vars(p.parse_args())))


if __name__ == "__main__":
    main()
