"""Flat ``key = value`` run configuration with validation and manifest output."""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError
from .fem import SourceField
from .geometry import LayerShape, RadialShape

COMMANDS = ("solve", "eigen", "optimize", "verify", "oracle", "convergence")

KEYS = (
    "command", "omega", "layer", "layer_fourier", "kmax", "f", "beta", "C0", "h", "tol", "budget",
    "seed", "allow_degenerate", "inject_u_scale", "h_levels", "n",
)


@dataclass
class RunConfig:
    command: str
    omega_spec: str
    f_spec: str
    beta: float
    C0: float
    h: float
    tol: float = 1e-10
    budget: int = 400
    seed: int = 0
    kmax: int = 2
    layer_t0: float = 0.0
    layer_fourier: list = field(default_factory=list)
    allow_degenerate: bool = False
    inject_u_scale: float = 1.0
    h_levels: list = field(default_factory=list)
    n: int = 2
    base_dir: str = "."

    # derived objects, filled by parse
    omega: object = field(default=None, repr=False)
    polygon: np.ndarray = field(default=None, repr=False)
    f: SourceField = field(default=None, repr=False)

    @property
    def layer(self):
        coeffs = list(self.layer_fourier) + [0.0] * (2 * self.kmax - len(self.layer_fourier))
        return LayerShape(self.layer_t0, coeffs[0::2][: self.kmax], coeffs[1::2][: self.kmax])

    @property
    def is_disk(self):
        return self.omega is not None and self.omega.is_disk()

    @property
    def R0(self):
        return _equivalent_radius(self.omega, self.polygon)

    def manifest_lines(self):
        def fmt(x):
            return f"{x:.17g}"

        lines = [
            f"command = {self.command}",
            f"omega = {self.omega_spec}",
            f"layer = {fmt(self.layer_t0)}",
            f"layer_fourier = {' '.join(fmt(c) for c in self.layer_fourier)}",
            f"kmax = {self.kmax}",
            f"f = {self.f_spec}",
            f"beta = {fmt(self.beta)}",
            f"C0 = {fmt(self.C0)}",
            f"h = {fmt(self.h)}",
            f"tol = {fmt(self.tol)}",
            f"budget = {self.budget}",
            f"seed = {self.seed}",
            f"allow_degenerate = {'true' if self.allow_degenerate else 'false'}",
            f"inject_u_scale = {fmt(self.inject_u_scale)}",
            f"h_levels = {' '.join(fmt(x) for x in self.h_levels)}",
            f"n = {self.n}",
        ]
        return lines


def _equivalent_radius(omega, polygon):
    """Radius of the disk with the same area as Omega (mean radius for star shapes)."""
    if omega is not None:
        return omega.mean_radius()
    area = 0.5 * abs(np.sum(polygon[:, 0] * np.roll(polygon[:, 1], -1) - np.roll(polygon[:, 0], -1) * polygon[:, 1]))
    return math.sqrt(area / math.pi)


def _tokens(raw):
    """Split a config file into (lineno, key, value) triples."""
    seen = {}
    for lineno, line in enumerate(raw.splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ParseError(f"line {lineno}: expected 'key = value', got {text!r}")
        key, value = (s.strip() for s in text.split("=", 1))
        if key not in KEYS:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ParseError(f"line {lineno}: duplicate key {key!r} (first on line {seen[key][0]})")
        seen[key] = (lineno, value)
    return seen


def _number(entries, key, default, problems, kind=float):
    if key not in entries:
        return default
    lineno, value = entries[key]
    try:
        return kind(value)
    except ValueError:
        problems.append(f"{key} (line {lineno}): not a valid {kind.__name__}: {value!r}")
        return default


def _floats(entries, key, problems):
    if key not in entries or not entries[key][1]:
        return []
    lineno, value = entries[key]
    try:
        return [float(x) for x in value.split()]
    except ValueError:
        problems.append(f"{key} (line {lineno}): expected numbers, got {value!r}")
        return []


def _bool(entries, key, problems):
    if key not in entries:
        return False
    value = entries[key][1].lower()
    if value in ("true", "yes", "1"):
        return True
    if value in ("false", "no", "0"):
        return False
    problems.append(f"{key}: expected true/false, got {value!r}")
    return False


def _parse_omega(spec, base_dir, problems):
    parts = spec.split()
    if not parts:
        problems.append("omega: empty shape description")
        return None, None
    kind, args = parts[0], parts[1:]
    try:
        nums = [float(a) for a in args] if kind != "table" else []
    except ValueError:
        problems.append(f"omega: non-numeric parameters in {spec!r}")
        return None, None
    try:
        if kind == "disk" and len(nums) in (1, 3):
            center = nums[1:3] if len(nums) == 3 else (0.0, 0.0)
            if not nums[0] > 0:
                problems.append("omega: disk radius must be positive")
                return None, None
            return RadialShape.disk(nums[0], center), None
        if kind == "ellipse" and len(nums) == 2:
            if not (nums[0] > 0 and nums[1] > 0):
                problems.append("omega: ellipse semi-axes must be positive")
                return None, None
            return RadialShape.ellipse(nums[0], nums[1]), None
        if kind == "polygon" and len(nums) >= 6 and len(nums) % 2 == 0:
            return None, np.array(nums).reshape(-1, 2)
        if kind == "table" and len(args) == 1:
            path = args[0] if os.path.isabs(args[0]) else os.path.join(base_dir, args[0])
            return RadialShape.from_table(path), None
    except (OSError, ValueError) as exc:
        problems.append(f"omega: {exc}")
        return None, None
    problems.append(f"omega: cannot parse {spec!r} (use 'disk R', 'ellipse a b', 'polygon x y ...' or 'table path')")
    return None, None


def _parse_source(spec, allow_degenerate, problems):
    parts = spec.split()
    try:
        if parts and parts[0] == "const" and len(parts) == 2:
            return SourceField.constant(float(parts[1]), allow_degenerate)
        if parts and parts[0] == "gaussian" and len(parts) == 5:
            cx, cy, width, amp = (float(p) for p in parts[1:])
            return SourceField.gaussian((cx, cy), width, amp, allow_degenerate)
    except ValidationError as exc:
        problems.extend(f"f: {p}" for p in exc.problems)
        return None
    except ValueError:
        pass
    problems.append(f"f: cannot parse {spec!r} (use 'const v' or 'gaussian cx cy width amp')")
    return None


def parse_config_text(raw, command=None, base_dir="."):
    entries = _tokens(raw)
    problems = []

    cmd = entries.get("command", (0, command))[1]
    if command is not None and cmd != command:
        problems.append(f"command: config says {cmd!r} but {command!r} was requested")
    if cmd not in COMMANDS:
        problems.append(f"command: must be one of {', '.join(COMMANDS)}, got {cmd!r}")
    for key in ("omega", "f", "beta", "C0"):
        if key not in entries:
            problems.append(f"{key}: required key missing")

    beta = _number(entries, "beta", math.nan, problems)
    C0 = _number(entries, "C0", math.nan, problems)
    tol = _number(entries, "tol", 1e-10, problems)
    budget = _number(entries, "budget", 400, problems, int)
    seed = _number(entries, "seed", 0, problems, int)
    kmax = _number(entries, "kmax", 2, problems, int)
    n = _number(entries, "n", 2, problems, int)
    t0 = _number(entries, "layer", 0.0, problems)
    inject = _number(entries, "inject_u_scale", 1.0, problems)
    fourier = _floats(entries, "layer_fourier", problems)
    h_levels = _floats(entries, "h_levels", problems)
    allow = _bool(entries, "allow_degenerate", problems)

    omega_spec = entries.get("omega", (0, ""))[1]
    f_spec = entries.get("f", (0, ""))[1]
    omega, polygon = _parse_omega(omega_spec, base_dir, problems) if omega_spec else (None, None)
    if omega_spec.split()[:1] == ["table"] and len(omega_spec.split()) == 2:
        # manifests live elsewhere, so pin the table path
        omega_spec = "table " + os.path.abspath(os.path.join(base_dir, omega_spec.split()[1]))
    f = _parse_source(f_spec, allow, problems) if f_spec else None

    if "beta" in entries and not beta > 0:
        problems.append(f"beta: must be positive, got {beta}")
    if "C0" in entries and not C0 > 0:
        problems.append(f"C0: must be positive, got {C0}")
    if not 0 < tol < 1:
        problems.append(f"tol: must lie in (0, 1), got {tol}")
    if budget < 50:
        problems.append(f"budget: must be at least 50, got {budget}")
    if not 0 <= kmax <= 8:
        problems.append(f"kmax: must lie in 0..8, got {kmax}")
    if len(fourier) % 2 or len(fourier) > 2 * max(kmax, 0):
        problems.append(f"layer_fourier: expected at most kmax={kmax} pairs 'a_k b_k', got {len(fourier)} numbers")
    if not t0 >= 0:
        problems.append(f"layer: mean thickness must be nonnegative, got {t0}")
    if n not in (2, 3):
        problems.append(f"n: dimension must be 2 or 3, got {n}")
    if n == 3 and cmd != "oracle":
        problems.append("n: dimension 3 is available only for the oracle command")
    if not inject > 0:
        problems.append(f"inject_u_scale: must be positive, got {inject}")
    if polygon is not None and cmd != "eigen":
        problems.append("omega: polygon domains support only the eigen command")
    if cmd in ("oracle", "convergence") and omega is not None and not (omega.is_disk() and f is not None and f.is_constant):
        problems.append(f"{cmd}: needs a disk omega and a constant source")

    R0 = _equivalent_radius(omega, polygon) if omega is not None or polygon is not None else None
    h = _number(entries, "h", 0.05 * R0 if R0 else math.nan, problems)
    if R0 is not None and not h > 0:
        problems.append(f"h: must be positive, got {h}")
    if not h_levels and R0:
        h_levels = [0.08 * R0, 0.04 * R0, 0.02 * R0]
    if any(not x > 0 for x in h_levels) or len(h_levels) < 2 and cmd == "convergence":
        problems.append("h_levels: need at least two positive mesh sizes")

    if problems:
        raise ValidationError(problems)
    return RunConfig(
        command=cmd, omega_spec=omega_spec, f_spec=f.describe(), beta=beta, C0=C0, h=h, tol=tol,
        budget=budget, seed=seed, kmax=kmax, layer_t0=t0, layer_fourier=fourier, allow_degenerate=allow,
        inject_u_scale=inject, h_levels=h_levels, n=n, base_dir=base_dir, omega=omega, polygon=polygon, f=f,
    )


def parse_config(path, command=None):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(raw, command, base_dir=os.path.dirname(os.path.abspath(path)))
