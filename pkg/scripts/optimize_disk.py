"""Shape optimization of the insulating layer around a disk, checked against the
concentric closed form.

Runs Nelder-Mead over (t0, a_k, b_k), then reports the best layer, its Fourier
energy, the energy gap to the radial optimum and the bound checks on the best
configuration.  Trace and bounds are written as CSV.

    python scripts/optimize_disk.py --beta 4 --C0 0.05 --h 0.08 --outdir results/opt_beta4
"""

import argparse
import os
import warnings
from dataclasses import dataclass

from insulate.bounds import verify_state
from insulate.fem import SourceField
from insulate.geometry import LayerShape, RadialShape
from insulate.optimize import evaluate_shape, n2_existence_guard, optimize_shape, search_box
from insulate.radial import radial_energy, radial_optimal_radius


@dataclass
class OptimizeSettings:
    R0: float = 1.0
    f: float = 1.0
    beta: float = 4.0
    C0: float = 0.05
    h: float = 0.08
    kmax: int = 2
    t0: float = 0.5
    budget: int = 300
    seed: int = 0
    outdir: str = "opt_disk"


def run(s):
    omega = RadialShape.disk(s.R0)
    f = SourceField.constant(s.f)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        trace = optimize_shape(omega, LayerShape.constant(s.t0, s.kmax), f, s.beta, s.C0, s.h,
                               budget=s.budget, seed=s.seed)
    for w in caught:
        print(f"warning: {w.message}")
    best = trace.best_shape
    R_star = radial_optimal_radius(2, s.R0, s.f, s.beta, s.C0)
    F_star = radial_energy(2, s.R0, R_star, s.f, s.beta, s.C0)
    print(f"evaluations {trace.n_evaluations}, converged {trace.converged}, budget exhausted {trace.budget_exhausted}")
    print(f"best layer {best!r}")
    print(f"thickness t0 {best.t0:.6f} vs radial optimum {R_star - s.R0:.6f}")
    print(f"Fourier energy {best.fourier_energy():.3e} (t0^2 = {best.t0 ** 2:.3e})")
    print(f"energy {trace.best_total:.8f} vs radial optimum {F_star:.8f} "
          f"(rel gap {(trace.best_total - F_star) / abs(F_star):+.2e})")

    _, sol = evaluate_shape(omega, best, f, s.beta, s.C0, s.h)
    report = verify_state(sol, s.C0, n2_existence_guard(f, omega, s.beta, s.C0), search_box(omega, s.beta), best)
    for c in report.checks:
        print(f"  {c.name:<20} {c.status:<15} observed={c.observed:.6g} bound={c.bound:.6g}")
    os.makedirs(s.outdir, exist_ok=True)
    trace.write_csv(os.path.join(s.outdir, "trace.csv"))
    trace.write_best_shape(os.path.join(s.outdir, "best_shape.txt"))
    report.write_csv(os.path.join(s.outdir, "bounds.csv"))
    return trace, report


def main():
    d = OptimizeSettings()
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, value in vars(d).items():
        p.add_argument(f"--{name}", type=type(value), default=value)
    run(OptimizeSettings(**vars(p.parse_args())))


if __name__ == "__main__":
    main()
