import math

import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy.sparse.linalg import spsolve

from insulate.errors import DegenerateTriangle, MaxIterationsExceeded, NotPositiveDefinite, ValidationError
from insulate.fem import (
    SourceField,
    assemble_boundary_mass,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    pcg,
    solve_spd,
    symmetry_defect,
    write_matrix_market,
)
from insulate.geometry import Boundary, Mesh, Region, mesh_polygon

# int over the unit disk of exp(-r^2 / (2 * 0.5^2)) = 0.5 pi (1 - e^-2) (frozen)
GAUSSIAN_DISK_INTEGRAL = 1.3582121610010784


def reference_triangle():
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    t = np.array([[0, 1, 2]])
    return Mesh(v, t, np.array([0]), np.array([[0, 1], [1, 2], [2, 0]]), np.full(3, 2), 1.0)


def test_reference_element_matrices():
    m = reference_triangle()
    K = assemble_stiffness(m).toarray()
    np.testing.assert_allclose(K, [[1, -0.5, -0.5], [-0.5, 0.5, 0], [-0.5, 0, 0.5]], atol=1e-15)
    M = assemble_mass(m).toarray()
    np.testing.assert_allclose(M, (np.ones((3, 3)) + np.eye(3)) / 24, atol=1e-15)
    B = assemble_boundary_mass(m, Boundary.OUTER).toarray()
    # perimeter 2 + sqrt 2
    assert B.sum() == pytest.approx(2 + math.sqrt(2), rel=1e-14)


@pytest.mark.parametrize("mesh_name", ["disk_mesh_coarse", "annulus_mesh"])
def test_global_matrix_properties(mesh_name, request):
    mesh = request.getfixturevalue(mesh_name)
    K = assemble_stiffness(mesh)
    M = assemble_mass(mesh)
    B = assemble_boundary_mass(mesh, Boundary.OUTER)
    ones = np.ones(mesh.n_vertices)
    assert np.abs(K @ ones).max() < 1e-12
    assert ones @ (M @ ones) == pytest.approx(mesh.area(), rel=1e-13)
    assert ones @ (B @ ones) == pytest.approx(mesh.boundary_length(Boundary.OUTER), rel=1e-13)
    for A in (K, M, B):
        assert symmetry_defect(A) < 1e-14
    # linear functions have exact gradients: int |grad x|^2 = |A|
    x = mesh.vertices[:, 0]
    assert x @ (K @ x) == pytest.approx(mesh.area(), rel=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_stiffness_energy_of_affine_functions(a, b, c):
    mesh = mesh_polygon([(0, 0), (2, 0), (2, 1), (0, 1)], 0.25)
    v = a + b * mesh.vertices[:, 0] + c * mesh.vertices[:, 1]
    K = assemble_stiffness(mesh)
    assert v @ (K @ v) == pytest.approx((b * b + c * c) * 2.0, rel=1e-10, abs=1e-12)


def test_region_restricted_assembly(annulus_mesh):
    ones = np.ones(annulus_mesh.n_vertices)
    M_om = assemble_mass(annulus_mesh, Region.OMEGA)
    assert ones @ (M_om @ ones) == pytest.approx(annulus_mesh.area(Region.OMEGA), rel=1e-13)
    F = assemble_load(annulus_mesh, SourceField.constant(2.0))
    assert F.sum() == pytest.approx(2 * annulus_mesh.area(Region.OMEGA), rel=1e-13)
    layer_nodes = np.setdiff1d(np.arange(annulus_mesh.n_vertices),
                               np.unique(annulus_mesh.triangles[annulus_mesh.regions == Region.OMEGA]))
    assert np.all(F[layer_nodes] == 0)


def test_gaussian_load_integral(disk_mesh_fine):
    f = SourceField.gaussian((0.0, 0.0), 0.5, 1.0)
    assert assemble_load(disk_mesh_fine, f).sum() == pytest.approx(GAUSSIAN_DISK_INTEGRAL, rel=2e-3)
    assert f.integral(disk_mesh_fine) == pytest.approx(GAUSSIAN_DISK_INTEGRAL, rel=2e-3)


def test_source_validation():
    with pytest.raises(ValidationError):
        SourceField.constant(0.0)
    with pytest.raises(ValidationError):
        SourceField.constant(-1.0)
    assert SourceField.constant(0.0, allow_degenerate=True).sup_norm() == 0.0
    with pytest.raises(ValidationError):
        SourceField.gaussian((0, 0), 0.0, 1.0)
    with pytest.raises(ValidationError):
        SourceField("cubic", 1.0)


def test_source_norms(disk_mesh_fine):
    f = SourceField.constant(3.0)
    assert f.l2_norm(disk_mesh_fine) == pytest.approx(3.0 * math.sqrt(disk_mesh_fine.area()), rel=1e-13)
    assert f.scaled(2.0).value == 6.0
    assert SourceField.gaussian((1, 2), 0.5, 3.0).describe() == "gaussian 1 2 0.5 3"


def test_degenerate_triangle_rejected():
    v = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    m = Mesh(v, np.array([[0, 1, 2]]), np.array([0]), np.zeros((0, 2), int), np.zeros(0, int), 1.0)
    with pytest.raises(DegenerateTriangle):
        assemble_stiffness(m)


def random_spd(rng, n):
    Q = rng.standard_normal((n, n))
    return sp.csr_matrix(Q @ Q.T + n * np.eye(n))


@given(st.integers(2, 40), st.integers(0, 10_000))
def test_pcg_matches_direct_solve(n, seed):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n)
    b = rng.standard_normal(n)
    x = solve_spd(A, b, tol=1e-12)
    np.testing.assert_allclose(x, spsolve(A.tocsc(), b), rtol=1e-8, atol=1e-10)
    assert np.linalg.norm(A @ x - b) <= 1e-12 * np.linalg.norm(b)


def test_pcg_zero_rhs_and_callback(rng):
    A = random_spd(rng, 10)
    x, info = pcg(A, np.zeros(10))
    assert np.all(x == 0) and info["iterations"] == 0
    seen = []
    pcg(A, rng.standard_normal(10), callback=lambda xk: seen.append(xk.copy()))
    assert len(seen) >= 1


def test_pcg_rejects_indefinite():
    A = sp.csr_matrix(np.diag([1.0, -1.0]))
    with pytest.raises(NotPositiveDefinite):
        pcg(A, np.ones(2))
    A = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NotPositiveDefinite):
        pcg(A, np.array([1.0, -1.0]))


def test_pcg_iteration_limit_carries_best_iterate(rng):
    n = 60
    A = sp.csr_matrix(np.diag(np.logspace(0, 6, n)) + 1e-3 * np.ones((n, n)))
    with pytest.raises(MaxIterationsExceeded) as exc:
        pcg(A, np.ones(n), tol=1e-14, maxiter=2)
    assert exc.value.x.shape == (n,)
    assert exc.value.iterations == 2


def test_solve_spd_tol_validation():
    with pytest.raises(ValidationError):
        solve_spd(sp.eye(2), np.ones(2), tol=0.0)


def test_matrix_market_roundtrip(tmp_path, disk_mesh_coarse):
    K = assemble_stiffness(disk_mesh_coarse)
    path = tmp_path / "K.mtx"
    write_matrix_market(path, K, comment="stiffness")
    back = scipy.io.mmread(path).tocsr()
    assert abs(back - K).max() < 1e-15 * abs(K).max()
