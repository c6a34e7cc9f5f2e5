"""Shapes and triangular meshes of Omega and of insulated configurations A.

Star-shaped sets are radial graphs rho(theta) about a center.  Disks and
layered configurations use a structured polar mesh whose construction is exactly
mirror symmetric about the x-axis through the center; polygons are meshed with
a Delaunay triangulation of boundary and lattice points.
"""

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
import shapely
from scipy.interpolate import CubicSpline
from scipy.spatial import Delaunay, cKDTree

from .errors import (
    EpsTooLarge,
    MeshFailure,
    NonPositiveRadius,
    NonSimplePolygon,
    SelfIntersection,
    UnknownTag,
    ValidationError,
)

TWO_PI = 2.0 * math.pi
MAX_FOURIER_MODES = 8
# relative area below which a triangle is considered degenerate
DEGENERATE_AREA = 1e-14
# thickness below SNAP * h is treated as no insulation at that angle; thinner
# slivers would give layer triangles with aspect ratio beyond 1e3 and a
# stiffness matrix too ill-conditioned for the 1e-10 residual contract
THICKNESS_SNAP = 1e-3


class Region(IntEnum):
    OMEGA = 0
    LAYER = 1


class Boundary(IntEnum):
    INNER = 1
    OUTER = 2


@dataclass(frozen=True, eq=False)
class RadialShape:
    """Star-shaped domain {center + r (cos t, sin t): 0 <= r < rho(t)}.

    ``theta`` and ``values`` form a periodic sample table (last entry repeats the
    first at theta = 2 pi); rho is its periodic cubic spline.
    """

    center: np.ndarray
    theta: np.ndarray
    values: np.ndarray
    _spline: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(2)
        theta = np.asarray(self.theta, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if theta.shape != values.shape or theta.size < 4:
            raise ValidationError("radius table needs at least 4 matching samples")
        if np.any(values <= 0):
            raise NonPositiveRadius("radius samples must be positive")
        if abs(theta[0]) > 1e-12 or abs(theta[-1] - TWO_PI) > 1e-9 or np.any(np.diff(theta) <= 0):
            raise ValidationError("radius table must cover [0, 2 pi] with increasing angles")
        if abs(values[0] - values[-1]) > 1e-12 * values[0]:
            raise ValidationError("radius table is not periodic (first != last value)")
        values = values.copy()
        values[-1] = values[0]
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_spline", CubicSpline(theta, values, bc_type="periodic"))

    @property
    def n_samples(self):
        return self.theta.size - 1

    def __call__(self, theta):
        return self._spline(np.mod(theta, TWO_PI))

    def derivative(self, theta):
        return self._spline(np.mod(theta, TWO_PI), 1)

    @classmethod
    def from_function(cls, fn, n_samples=256, center=(0.0, 0.0)):
        theta = np.linspace(0.0, TWO_PI, n_samples + 1)
        values = np.asarray(fn(theta[:-1]), dtype=float) * np.ones(n_samples)
        return cls(center, theta, np.append(values, values[0]))

    @classmethod
    def disk(cls, radius, center=(0.0, 0.0), n_samples=16):
        if not radius > 0:
            raise NonPositiveRadius(f"radius must be positive, got {radius}")
        return cls.from_function(lambda t: np.full_like(t, float(radius)), n_samples, center)

    @classmethod
    def ellipse(cls, a, b, center=(0.0, 0.0), n_samples=512):
        if not (a > 0 and b > 0):
            raise NonPositiveRadius("semi-axes must be positive")
        return cls.from_function(
            lambda t: a * b / np.sqrt((b * np.cos(t)) ** 2 + (a * np.sin(t)) ** 2), n_samples, center)

    @classmethod
    def from_table(cls, path, center=(0.0, 0.0)):
        theta, values = read_table(path)
        if abs(theta[-1] - TWO_PI) > 1e-9:
            theta = np.append(theta, TWO_PI)
            values = np.append(values, values[0])
        return cls(center, theta, values)

    def is_disk(self, rtol=1e-12):
        return bool(np.ptp(self.values) <= rtol * self.values.max())

    def max_radius(self, n=4096):
        return float(self(np.linspace(0.0, TWO_PI, n, endpoint=False)).max())

    def mean_radius(self):
        return math.sqrt(self.area() / math.pi)

    def area(self, n=4096):
        t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        return float(0.5 * np.mean(self(t) ** 2) * TWO_PI)

    def boundary_points(self, n):
        t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        r = self(t)
        return self.center + np.column_stack([r * np.cos(t), r * np.sin(t)])

    def perimeter(self, n=8192):
        p = self.boundary_points(n)
        return float(np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1).sum())


@dataclass(eq=False)
class LayerShape:
    """Layer thickness t(theta) = max(0, t0 + sum_k a_k cos k theta + b_k sin k theta)."""

    t0: float
    a: np.ndarray = field(default_factory=lambda: np.zeros(0))
    b: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.t0 = float(self.t0)
        self.a = np.atleast_1d(np.asarray(self.a, dtype=float)).copy()
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float)).copy()
        if self.a.shape != self.b.shape:
            raise ValidationError("cosine and sine coefficient lists differ in length")
        if self.a.size > MAX_FOURIER_MODES:
            raise ValidationError(f"at most {MAX_FOURIER_MODES} Fourier modes supported")

    @property
    def kmax(self):
        return self.a.size

    @classmethod
    def constant(cls, t, kmax=0):
        return cls(t, np.zeros(kmax), np.zeros(kmax))

    @classmethod
    def from_vector(cls, vec):
        vec = np.asarray(vec, dtype=float)
        k = (vec.size - 1) // 2
        return cls(vec[0], vec[1:1 + 2 * k:2], vec[2:2 + 2 * k:2])

    def as_vector(self):
        out = np.empty(1 + 2 * self.kmax)
        out[0] = self.t0
        out[1::2] = self.a
        out[2::2] = self.b
        return out

    def raw(self, theta):
        theta = np.asarray(theta, dtype=float)
        val = np.full_like(theta, self.t0)
        for k in range(self.kmax):
            val = val + self.a[k] * np.cos((k + 1) * theta) + self.b[k] * np.sin((k + 1) * theta)
        return val

    def __call__(self, theta):
        return np.maximum(self.raw(theta), 0.0)

    def fourier_energy(self):
        return float(np.sum(self.a**2 + self.b**2))

    def coefficient_bound(self):
        """t0 + sum |a_k| + |b_k|, an upper bound for the thickness."""
        return float(self.t0 + np.abs(self.a).sum() + np.abs(self.b).sum())

    def reflected(self):
        """Mirror image theta -> -theta."""
        return LayerShape(self.t0, self.a, -self.b)

    def is_empty(self, n=2048):
        return bool(np.all(self(np.linspace(0.0, TWO_PI, n, endpoint=False)) == 0.0))

    def canonical(self, n=2048):
        """The same configuration with clamped-away parameters removed.

        Any parameter vector whose thickness vanishes everywhere describes A = Omega;
        all of them are reported as the zero shape.
        """
        if self.is_empty(n):
            return LayerShape.constant(0.0, self.kmax)
        return LayerShape(self.t0, self.a, self.b)

    def table(self, n=360):
        t = np.linspace(0.0, TWO_PI, n, endpoint=False)
        return np.column_stack([t, self(t)])

    def __repr__(self):
        return f"LayerShape(t0={self.t0!r}, a={self.a.tolist()!r}, b={self.b.tolist()!r})"


@dataclass(eq=False)
class Mesh:
    vertices: np.ndarray
    triangles: np.ndarray
    regions: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    h: float
    parent_index: np.ndarray = None

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    def signed_areas(self):
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def area(self, region=None):
        areas = self.signed_areas()
        if region is not None:
            areas = areas[self.regions == int(region)]
        return float(areas.sum())

    def has_tag(self, tag):
        return bool(np.any(self.boundary_tags == int(tag)))

    def boundary_length(self, tag=Boundary.OUTER):
        edges = self.tagged_edges(tag)
        d = self.vertices[edges[:, 1]] - self.vertices[edges[:, 0]]
        return float(np.linalg.norm(d, axis=1).sum())

    def tagged_edges(self, tag):
        if int(tag) not in (int(Boundary.INNER), int(Boundary.OUTER)):
            raise UnknownTag(f"unknown boundary tag {tag!r}")
        return self.boundary_edges[self.boundary_tags == int(tag)]

    def boundary_vertices(self, tag=Boundary.OUTER):
        return np.unique(self.tagged_edges(tag))

    def edges(self):
        e = np.concatenate([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def euler_characteristic(self):
        """V - E + T; equals 1 - (number of holes) for a planar triangulated domain."""
        return self.n_vertices - self.edges().shape[0] + self.n_triangles

    def circumradii(self):
        p = self.vertices[self.triangles]
        a = np.linalg.norm(p[:, 1] - p[:, 2], axis=1)
        b = np.linalg.norm(p[:, 0] - p[:, 2], axis=1)
        c = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
        return a * b * c / (4.0 * np.abs(self.signed_areas()))

    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)

    def diameter(self):
        hull = self.vertices[np.unique(self.boundary_edges)]
        if hull.shape[0] > 2000:
            hull = hull[:: hull.shape[0] // 2000 + 1]
        d = hull[:, None, :] - hull[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    def submesh(self, region):
        """Mesh of the triangles with the given region tag.

        ``parent_index[i]`` is the index in this mesh of submesh vertex i.  All
        boundary edges of the submesh are tagged OUTER.
        """
        keep = self.regions == int(region)
        tris = self.triangles[keep]
        used = np.unique(tris)
        remap = -np.ones(self.n_vertices, dtype=np.int64)
        remap[used] = np.arange(used.size)
        sub_tris = remap[tris]
        edges, tags = _boundary_from_topology(sub_tris, np.full(sub_tris.shape[0], int(region)))
        return Mesh(self.vertices[used].copy(), sub_tris, np.full(sub_tris.shape[0], int(region)),
                    edges, np.full(edges.shape[0], int(Boundary.OUTER)), self.h, parent_index=used)

    def validate(self, holes=0):
        """Check every mesh invariant; raises MeshFailure on the first violation."""
        areas = self.signed_areas()
        if np.any(areas <= DEGENERATE_AREA * self.h**2):
            raise MeshFailure(f"degenerate or inverted triangle (min area {areas.min():.3e})")
        edges, tags = _boundary_from_topology(self.triangles, self.regions)
        mine = {tuple(e) for e in np.sort(self.boundary_edges, axis=1).tolist()}
        if mine != {tuple(e) for e in np.sort(edges, axis=1).tolist()}:
            raise MeshFailure("stored boundary edges do not match mesh topology")
        outer_deg = np.bincount(self.tagged_edges(Boundary.OUTER).ravel(), minlength=self.n_vertices)
        if np.any(outer_deg % 2):
            raise MeshFailure("OUTER boundary edges do not form closed loops")
        # INNER arcs may end where the layer pinches off, but only on dA
        inner_deg = np.bincount(self.tagged_edges(Boundary.INNER).ravel(), minlength=self.n_vertices)
        if np.any((inner_deg % 2 == 1) & (outer_deg == 0)):
            raise MeshFailure("INNER boundary arc ends away from the outer boundary")
        if self.euler_characteristic() + 1 != 2 - holes:
            raise MeshFailure(f"Euler characteristic {self.euler_characteristic()} inconsistent with {holes} holes")
        return True


def _boundary_from_topology(triangles, regions):
    """OUTER edges lie on one triangle; INNER edges separate OMEGA from LAYER."""
    e = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    owner = np.tile(np.arange(triangles.shape[0]), 3)
    key = np.sort(e, axis=1)
    order = np.lexsort((key[:, 1], key[:, 0]))
    key, owner, e = key[order], owner[order], e[order]
    same_next = np.all(key[1:] == key[:-1], axis=1)
    starts = np.concatenate([[True], ~same_next])
    idx = np.flatnonzero(starts)
    counts = np.diff(np.append(idx, key.shape[0]))
    if np.any(counts > 2):
        raise MeshFailure("non-manifold edge shared by more than two triangles")
    out_edges, out_tags = [], []
    single = idx[counts == 1]
    out_edges.append(e[single])
    out_tags.append(np.full(single.size, int(Boundary.OUTER)))
    pairs = idx[counts == 2]
    r0 = regions[owner[pairs]]
    r1 = regions[owner[pairs + 1]]
    inner = pairs[r0 != r1]
    out_edges.append(e[inner])
    out_tags.append(np.full(inner.size, int(Boundary.INNER)))
    edges = np.concatenate(out_edges).astype(np.int64).reshape(-1, 2)
    tags = np.concatenate(out_tags).astype(np.int64)
    return edges, tags


def _orient(vertices, triangles):
    p = vertices[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    area = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    flip = area < 0
    triangles = triangles.copy()
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return triangles


def _half_zipper(ring_a, ring_b):
    """Upper-half (angles in [0, pi]) triangles between two concentric rings.

    ``ring_a``/``ring_b`` are index arrays of the full rings, uniformly spaced in
    angle from 0, with even length (ring_a may have length 1: the center).
    """
    tris = []
    nb = len(ring_b)
    if len(ring_a) == 1:
        c = ring_a[0]
        for k in range(nb // 2):
            tris.append((c, ring_b[k], ring_b[k + 1]))
        return tris
    na = len(ring_a)
    i = k = 0
    while i < na // 2 or k < nb // 2:
        next_a = (i + 1) / na if i < na // 2 else math.inf
        next_b = (k + 1) / nb if k < nb // 2 else math.inf
        if next_b <= next_a:
            tris.append((ring_a[i], ring_b[k], ring_b[k + 1]))
            k += 1
        else:
            tris.append((ring_a[i], ring_b[k], ring_a[i + 1]))
            i += 1
    return tris


def _ring_sizes(n_theta, n_rings):
    sizes = []
    for j in range(1, n_rings + 1):
        n = n_theta if j == n_rings else max(6, 2 * round(n_theta * j / (2 * n_rings)))
        if sizes:
            n = max(n, sizes[-1])
        sizes.append(min(n, n_theta))
    return sizes


def _star_mesh(omega, layer, h):
    if not h > 0:
        raise ValidationError("mesh size h must be positive")
    rho_max = omega.max_radius()
    probe = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
    t_max = float(layer(probe).max()) if layer is not None else 0.0
    n_theta = 2 * max(4, math.ceil(math.pi * (rho_max + t_max) / h))
    n_rings = max(1, math.ceil(rho_max / h))
    sizes = _ring_sizes(n_theta, n_rings)

    pts = [omega.center.copy()]
    rings = [np.array([0])]
    for j, n in enumerate(sizes, start=1):
        phi = TWO_PI * np.arange(n) / n
        r = omega(phi) * (j / n_rings)
        start = len(pts)
        pts.extend(omega.center + np.column_stack([r * np.cos(phi), r * np.sin(phi)]))
        rings.append(np.arange(start, start + n))
    tris = []
    for ra, rb in zip(rings[:-1], rings[1:]):
        tris.extend(_half_zipper(ra, rb))
    tris = np.array(tris, dtype=np.int64)
    tris = _mirror(tris, rings)
    regions = [np.full(tris.shape[0], int(Region.OMEGA))]
    all_tris = [tris]

    if layer is not None and t_max > THICKNESS_SNAP * h:
        phi = TWO_PI * np.arange(n_theta) / n_theta
        base = omega(phi)
        t = layer(phi)
        t = np.where(t < THICKNESS_SNAP * h, 0.0, t)
        n_layers = max(1, math.ceil(t.max() / h))
        levels = [rings[-1]]
        for l in range(1, n_layers + 1):
            r = base + t * (l / n_layers)
            idx = levels[0].copy()
            grow = t > 0
            new = np.arange(len(pts), len(pts) + int(grow.sum()))
            idx[grow] = new
            pts.extend(omega.center + np.column_stack([r[grow] * np.cos(phi[grow]), r[grow] * np.sin(phi[grow])]))
            levels.append(idx)
        lay = []
        half = n_theta // 2
        for l in range(n_layers):
            lo, hi = levels[l], levels[l + 1]
            for k in range(n_theta):
                k1 = (k + 1) % n_theta
                p, q, r_, s = lo[k], lo[k1], hi[k], hi[k1]
                if k < half:
                    lay.extend([(p, q, s), (p, s, r_)])
                else:
                    lay.extend([(p, q, r_), (q, s, r_)])
        lay = np.array(lay, dtype=np.int64)
        keep = (lay[:, 0] != lay[:, 1]) & (lay[:, 1] != lay[:, 2]) & (lay[:, 0] != lay[:, 2])
        lay = lay[keep]
        all_tris.append(lay)
        regions.append(np.full(lay.shape[0], int(Region.LAYER)))

    vertices = np.array(pts, dtype=float)
    triangles = _orient(vertices, np.concatenate(all_tris))
    regions = np.concatenate(regions)
    edges, tags = _boundary_from_topology(triangles, regions)
    mesh = Mesh(vertices, triangles, regions, edges, tags, float(h))
    try:
        mesh.validate()
    except MeshFailure as exc:
        if "Euler" in str(exc) or "non-manifold" in str(exc):
            raise SelfIntersection(f"radial mesh is not a simple domain: {exc}") from exc
        raise
    return mesh


def _mirror(tris, rings):
    """Add the reflection theta -> -theta of upper-half triangles."""
    n_total = sum(len(r) for r in rings)
    mirror = np.arange(n_total)
    for ring in rings:
        n = len(ring)
        if n > 1:
            mirror[ring] = ring[(n - np.arange(n)) % n]
    mirrored = mirror[tris][:, [0, 2, 1]]
    return np.concatenate([tris, mirrored])


def mesh_disk(radius, h, center=(0.0, 0.0)):
    """Structured mesh of a disk; every triangle is OMEGA, the rim is OUTER."""
    if not radius > 0:
        raise NonPositiveRadius(f"radius must be positive, got {radius}")
    if not 0 < h < radius:
        raise ValidationError(f"need 0 < h < radius, got h={h}")
    return _star_mesh(RadialShape.disk(radius, center), None, h)


def mesh_star(omega, h):
    """Mesh of a star-shaped Omega alone."""
    return _star_mesh(omega, None, h)


def mesh_layered(omega, layer, h):
    """Mesh of A = Omega plus a radial layer of thickness ``layer(theta)``.

    Triangles inside Omega are OMEGA, the rest LAYER.  Where the thickness is
    zero the layer is absent and d(Omega) is part of the OUTER boundary.
    """
    return _star_mesh(omega, layer, h)


def mesh_polygon(vertices, h):
    """Delaunay mesh of a simple counterclockwise polygon."""
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise NonSimplePolygon("polygon needs at least three 2D vertices")
    if np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    ring = shapely.LinearRing(pts)
    poly = shapely.Polygon(pts)
    if not ring.is_simple or not poly.is_valid:
        raise NonSimplePolygon("polygon boundary self-intersects")
    shoelace = 0.5 * np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1])
    if shoelace <= 0:
        raise NonSimplePolygon("polygon vertices must be counterclockwise")

    bnd = []
    for p, q in zip(pts, np.roll(pts, -1, axis=0)):
        n = max(1, math.ceil(np.linalg.norm(q - p) / h))
        s = np.arange(n)[:, None] / n
        bnd.append(p + s * (q - p))
    bnd = np.concatenate(bnd)
    n_bnd = bnd.shape[0]

    xmin, ymin = pts.min(axis=0)
    xmax, ymax = pts.max(axis=0)
    dy = h * math.sqrt(3.0) / 2.0
    rows = []
    for j, y in enumerate(np.arange(ymin + dy / 2, ymax, dy)):
        x = np.arange(xmin + (h / 2 if j % 2 else 0.0), xmax + h, h)
        rows.append(np.column_stack([x, np.full_like(x, y)]))
    lattice = np.concatenate(rows) if rows else np.zeros((0, 2))
    if lattice.size:
        inside = shapely.contains_xy(poly, lattice[:, 0], lattice[:, 1])
        lattice = lattice[inside]
        dist = shapely.distance(shapely.points(lattice), ring)
        lattice = lattice[dist >= 0.55 * h]

    # ghost frame keeps polygon boundary points off the convex hull
    pad = 3.0 * h + 0.1 * max(xmax - xmin, ymax - ymin)
    frame = np.array([[xmin - pad, ymin - pad], [xmax + pad, ymin - pad],
                      [xmax + pad, ymax + pad], [xmin - pad, ymax + pad]])
    allpts = np.concatenate([bnd, lattice, frame])
    tri = Delaunay(allpts).simplices.astype(np.int64)
    tri = tri[np.all(tri < allpts.shape[0] - 4, axis=1)]
    cent = allpts[tri].mean(axis=1)
    tri = tri[shapely.contains_xy(poly, cent[:, 0], cent[:, 1])]

    used = np.unique(tri)
    remap = -np.ones(allpts.shape[0], dtype=np.int64)
    remap[used] = np.arange(used.size)
    vertices_out = allpts[used]
    triangles = _orient(vertices_out, remap[tri])
    regions = np.full(triangles.shape[0], int(Region.OMEGA))
    edges, tags = _boundary_from_topology(triangles, regions)

    want = {tuple(sorted((remap[i], remap[(i + 1) % n_bnd]))) for i in range(n_bnd)}
    got = {tuple(e) for e in np.sort(edges, axis=1).tolist()}
    if np.any(remap[:n_bnd] < 0) or want != got:
        raise MeshFailure("polygon boundary was not recovered by the triangulation")
    mesh = Mesh(vertices_out, triangles, regions, edges, tags, float(h))
    mesh.validate(holes=0)
    return mesh


class _BoundaryDistance:
    """Euclidean distance to a closed polyline (dense sampling of a curve)."""

    def __init__(self, points):
        self.p = points
        self.q = np.roll(points, -1, axis=0)
        self.tree = cKDTree(points)
        self.n = points.shape[0]

    def __call__(self, x):
        x = np.atleast_2d(x)
        _, idx = self.tree.query(x, k=min(4, self.n))
        idx = np.atleast_2d(idx)
        best = np.full(x.shape[0], np.inf)
        for col in range(idx.shape[1]):
            for seg in (idx[:, col], (idx[:, col] - 1) % self.n):
                a, b = self.p[seg], self.q[seg]
                ab = b - a
                s = np.clip(np.einsum("ij,ij->i", x - a, ab) / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
                d = np.linalg.norm(x - (a + s[:, None] * ab), axis=1)
                best = np.minimum(best, d)
        return best


def tubular_volume(omega, eps, n_theta=720, n_radial=240, n_boundary=8192):
    """Area of {x in Omega : d(x, dOmega) <= eps}.

    Polar quadrature over Omega: along each ray the crossings of
    d(x, dOmega) = eps are bracketed on a sample grid and refined by bisection,
    the radial integral of r dr over the sublevel intervals is exact, and the
    angular integral uses the periodic trapezoid rule.
    """
    if not eps > 0:
        raise EpsTooLarge("eps must be positive")
    dist = _BoundaryDistance(omega.boundary_points(n_boundary))
    theta = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    rho = omega(theta)
    if eps >= inradius(omega):
        raise EpsTooLarge(f"eps={eps} is not smaller than the inradius of Omega")
    # every boundary point is at least rho_min from the center, so the tube
    # lies in r >= rho_min - eps and the sampling can start there
    r_start = max(0.0, float(omega.values.min()) * (1.0 - 1e-3) - eps)
    s = np.linspace(0.0, 1.0, n_radial + 1)
    rays = r_start + s[None, :] * (rho[:, None] - r_start)
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    xy = omega.center + rays[..., None] * dirs[:, None, :]
    d = dist(xy.reshape(-1, 2)).reshape(rays.shape)
    d[:, -1] = 0.0

    g = d - eps
    sign_change = np.flatnonzero(((g[:, :-1] > 0) != (g[:, 1:] > 0)).ravel())
    ray_id, col = np.divmod(sign_change, n_radial)
    lo = rays[ray_id, col].copy()
    hi = rays[ray_id, col + 1].copy()
    g_lo = g[ray_id, col]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        pts = omega.center + mid[:, None] * dirs[ray_id]
        gm = dist(pts) - eps
        same = (gm > 0) == (g_lo > 0)
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        g_lo = np.where(same, gm, g_lo)
    roots = 0.5 * (lo + hi)

    # per ray: sum of (r_out^2 - r_in^2)/2 over intervals where d < eps
    integrand = np.zeros(n_theta)
    inside_at_start = g[:, 0] < 0
    for k in range(n_theta):
        cuts = np.sort(roots[ray_id == k])
        pts = np.concatenate([[r_start], cuts, [rho[k]]])
        below = inside_at_start[k]
        acc = 0.0
        for r_a, r_b in zip(pts[:-1], pts[1:]):
            if below:
                acc += 0.5 * (r_b**2 - r_a**2)
            below = not below
        integrand[k] = acc
    return float(integrand.mean() * TWO_PI)


def inradius(omega, n_theta=128, n_radial=48):
    """Approximate inradius (largest sampled distance to the boundary)."""
    dist = _BoundaryDistance(omega.boundary_points(4096))
    theta = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    s = np.linspace(0.0, 1.0, n_radial, endpoint=False)
    r = s[None, :] * omega(theta)[:, None]
    xy = omega.center + r[..., None] * np.column_stack([np.cos(theta), np.sin(theta)])[:, None, :]
    return float(dist(xy.reshape(-1, 2)).max())


def read_table(path):
    """Two-column whitespace table ``theta value``; '#' starts a comment."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 'theta value', got {line!r}")
            rows.append((float(parts[0]), float(parts[1])))
    if not rows:
        raise ValidationError(f"{path}: empty table")
    arr = np.array(sorted(rows))
    return arr[:, 0], arr[:, 1]


def write_table(path, table):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t, v in table:
            fh.write(f"{t:.17g} {v:.17g}\n")


def write_vtk(path, mesh, point_data=None, title="insulate mesh"):
    """Legacy ASCII VTK unstructured grid with region tags as cell data."""
    point_data = point_data or {}
    n, t = mesh.n_vertices, mesh.n_triangles
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {n} double"]
    lines += [f"{x:.17g} {y:.17g} 0" for x, y in mesh.vertices]
    lines.append(f"CELLS {t} {4 * t}")
    lines += [f"3 {i} {j} {k}" for i, j, k in mesh.triangles]
    lines.append(f"CELL_TYPES {t}")
    lines += ["5"] * t
    lines += [f"CELL_DATA {t}", "SCALARS region int 1", "LOOKUP_TABLE default"]
    lines += [str(int(r)) for r in mesh.regions]
    if point_data:
        lines.append(f"POINT_DATA {n}")
        for name, values in point_data.items():
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [f"{v:.17g}" for v in np.asarray(values, dtype=float)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
