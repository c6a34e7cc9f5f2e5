"""``insulate <command> --config FILE [--sequential] [--out DIR]``.

Exit codes: 0 success, 1 configuration, 2 mesh, 3 solver, 4 a verification
check failed.
"""

import argparse
import csv
import math
import os
import platform
import sys
import warnings

import numpy as np
import scipy
import shapely

from . import __version__
from .bounds import verify_state
from .config import COMMANDS, parse_config
from .errors import InsulateError
from .fem import assemble_mass
from .geometry import Region, mesh_layered, mesh_polygon, mesh_star, write_vtk
from .optimize import evaluate_shape, n2_existence_guard, optimize_shape, search_box
from .radial import (
    profile_table,
    radial_energy_terms,
    radial_optimal_radius,
    radial_state,
)
from .spectral import catalog_row, faber_krahn_gap, robin_eigenvalue, write_catalog
from .state import energy, reduced_energy_residual, solve_state

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MESH = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


def _fmt(x):
    return f"{x:.17g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_manifest(path, cfg, sequential):
    header = [
        "# insulate run manifest; rerun with: insulate <command> --config <this file>",
        f"# insulate {__version__}; python {platform.python_version()}; numpy {np.__version__};"
        f" scipy {scipy.__version__}; shapely {shapely.__version__}",
        f"# sequential = {'true' if sequential else 'false'}",
    ]
    _write_text(path, "\n".join(header + cfg.manifest_lines()) + "\n")


def _energy_row(rep):
    return [_fmt(rep.dirichlet), _fmt(rep.robin), _fmt(rep.source), _fmt(rep.volume_penalty),
            _fmt(rep.total), _fmt(rep.solver_residual)]


ENERGY_HEADER = ["dirichlet", "robin", "source", "volume_penalty", "total", "solver_residual"]


def _cmd_solve(cfg, out):
    rep, sol = evaluate_shape(cfg.omega, cfg.layer, cfg.f, cfg.beta, cfg.C0, cfg.h, cfg.tol)
    lhs, rhs = sol.flux_balance()
    _write_csv(os.path.join(out, "energy.csv"), ENERGY_HEADER + ["flux_lhs", "flux_rhs", "reduced_residual"],
               [_energy_row(rep) + [_fmt(lhs), _fmt(rhs), _fmt(reduced_energy_residual(sol))]])
    _write_text(os.path.join(out, "energy.txt"), rep.to_text())
    write_vtk(os.path.join(out, "state.vtk"), sol.mesh, {"u": sol.u})
    return EXIT_OK


def _cmd_eigen(cfg, out):
    mesh = mesh_polygon(cfg.polygon, cfg.h) if cfg.polygon is not None else mesh_star(cfg.omega, cfg.h)
    eig = robin_eigenvalue(mesh, cfg.beta)
    fk = faber_krahn_gap(mesh, cfg.beta, eig)
    shape_id = cfg.omega_spec.split()[0]
    write_catalog(os.path.join(out, "eigen.csv"), [catalog_row(shape_id, fk, is_disk=cfg.is_disk)])
    write_vtk(os.path.join(out, "eigenvector.vtk"), mesh, {"v": eig.vector})
    return EXIT_OK


def _cmd_optimize(cfg, out):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        trace = optimize_shape(cfg.omega, cfg.layer, cfg.f, cfg.beta, cfg.C0, cfg.h,
                               budget=cfg.budget, seed=cfg.seed, tol=cfg.tol)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    trace.write_csv(os.path.join(out, "trace.csv"))
    trace.write_best_shape(os.path.join(out, "best_shape.txt"))
    best = trace.best_shape
    rep, sol = evaluate_shape(cfg.omega, best, cfg.f, cfg.beta, cfg.C0, cfg.h, cfg.tol)
    report = verify_state(sol, cfg.C0, trace.guard, search_box(cfg.omega, cfg.beta), best)
    report.write_csv(os.path.join(out, "bounds.csv"))
    summary = [
        f"evaluations = {trace.n_evaluations}",
        f"converged = {'true' if trace.converged else 'false'}",
        f"budget_exhausted = {'true' if trace.budget_exhausted else 'false'}",
        f"n2_condition = {trace.guard.status}",
        f"f_l2_squared = {_fmt(trace.guard.f_l2_squared)}",
        f"condition_rhs = {_fmt(trace.guard.rhs)}",
        f"best_params = {' '.join(_fmt(p) for p in best.as_vector())}",
    ]
    _write_text(os.path.join(out, "optimize.txt"), "\n".join(summary) + "\n" + rep.to_text() + report.to_text())
    write_vtk(os.path.join(out, "best_state.vtk"), sol.mesh, {"u": sol.u})
    return EXIT_VERIFY if report.any_fail else EXIT_OK


def _cmd_verify(cfg, out):
    rep, sol = evaluate_shape(cfg.omega, cfg.layer, cfg.f, cfg.beta, cfg.C0, cfg.h, cfg.tol)
    guard = n2_existence_guard(cfg.f, cfg.omega, cfg.beta, cfg.C0)
    u = sol.u * cfg.inject_u_scale if cfg.inject_u_scale != 1.0 else None
    report = verify_state(sol, cfg.C0, guard, search_box(cfg.omega, cfg.beta), cfg.layer, u_override=u)
    report.write_csv(os.path.join(out, "bounds.csv"))
    _write_text(os.path.join(out, "bounds.txt"), report.to_text())
    for c in report.checks:
        print(f"{c.name}: {c.status}")
    return EXIT_VERIFY if report.any_fail else EXIT_OK


def _cmd_oracle(cfg, out):
    R0, f = cfg.omega.mean_radius(), cfg.f.value
    R1 = R0 + cfg.layer_t0
    sol = radial_state(cfg.n, R0, R1, f, cfg.beta)
    terms = radial_energy_terms(cfg.n, R0, R1, f, cfg.beta, cfg.C0)
    R1_star = radial_optimal_radius(cfg.n, R0, f, cfg.beta, cfg.C0)
    star = radial_energy_terms(cfg.n, R0, R1_star, f, cfg.beta, cfg.C0)
    _write_csv(os.path.join(out, "oracle.csv"),
               ["n", "R0", "R1", "c", "a", "b", "dirichlet", "robin", "source", "volume_penalty", "total",
                "R1_star", "total_star"],
               [[str(cfg.n), _fmt(R0), _fmt(R1), _fmt(sol.c), _fmt(sol.a), _fmt(sol.b)]
                + [_fmt(terms[k]) for k in ("dirichlet", "robin", "source", "volume_penalty", "total")]
                + [_fmt(R1_star), _fmt(star["total"])]])
    _write_csv(os.path.join(out, "profile.csv"), ["r", "u"],
               [[_fmt(r), _fmt(u)] for r, u in profile_table(sol)])
    return EXIT_OK


def convergence_table(cfg):
    """Rows (h, relative L2 error vs the closed form, observed order)."""
    R0 = cfg.omega.mean_radius()
    exact = radial_state(2, R0, R0 + cfg.layer_t0, cfg.f.value, cfg.beta)
    rows, prev = [], None
    for h in cfg.h_levels:
        mesh = mesh_layered(cfg.omega, cfg.layer, h)
        sol = solve_state(mesh, cfg.f, cfg.beta, tol=cfg.tol)
        ue = exact(np.linalg.norm(mesh.vertices - cfg.omega.center, axis=1))
        M = assemble_mass(mesh)
        err = math.sqrt(((sol.u - ue) @ (M @ (sol.u - ue))) / (ue @ (M @ ue)))
        order = math.log(prev[1] / err) / math.log(prev[0] / h) if prev else math.nan
        rows.append((h, err, order))
        prev = (h, err)
    return rows


def _cmd_convergence(cfg, out):
    rows = convergence_table(cfg)
    _write_csv(os.path.join(out, "convergence.csv"), ["h", "l2_error", "order"],
               [[_fmt(h), _fmt(e), "" if math.isnan(o) else _fmt(o)] for h, e, o in rows])
    return EXIT_OK


HANDLERS = {
    "solve": _cmd_solve,
    "eigen": _cmd_eigen,
    "optimize": _cmd_optimize,
    "verify": _cmd_verify,
    "oracle": _cmd_oracle,
    "convergence": _cmd_convergence,
}


def run(cfg, out_dir, sequential=True):
    """Execute a parsed configuration, writing artifacts and a manifest to ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    write_manifest(os.path.join(out_dir, "manifest.cfg"), cfg, sequential)
    return HANDLERS[cfg.command](cfg, out_dir)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser():
    p = _Parser(prog="insulate", description="Optimal thermal insulation experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="flat key = value configuration file")
    p.add_argument("--sequential", action="store_true",
                   help="deterministic single-threaded execution (the only mode implemented)")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, args.command)
        return run(cfg, args.out, args.sequential)
    except InsulateError as exc:
        print(f"insulate: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"insulate: numerical failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"insulate: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
