import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from insulate.bounds import (
    FAIL,
    NOT_APPLICABLE,
    PASS,
    diffineq_extremal,
    diffineq_threshold,
    l2_norm_bound,
    linf_ceiling,
    stampacchia_levels,
    stampacchia_threshold,
    sublevel_areas,
    sublevel_volume_scan,
    support_bound_n2_closed_form,
    support_measure_bound,
    verify_state,
)
from insulate.errors import ConditionViolated, EmptyGrid, InvalidParameters
from insulate.fem import SourceField
from insulate.geometry import LayerShape, RadialShape, mesh_layered, mesh_polygon
from insulate.optimize import n2_existence_guard
from insulate.state import solve_dirichlet, solve_state


# ----------------------------------------------------------- Stampacchia

def extremal_family(g0, H, alpha, theta):
    """g(h) = g0 (1 - h/H)_+^p, p = alpha/(theta-1), and the smallest C it satisfies."""
    p = alpha / (theta - 1.0)
    C = g0 ** (1 - theta) * H**alpha * p**p * alpha**alpha / (p + alpha) ** (p + alpha)

    def g(h):
        return g0 * np.maximum(1.0 - np.asarray(h) / H, 0.0) ** p

    return g, C


def test_stampacchia_closed_form_value():
    assert stampacchia_threshold(1, 1, 2, 1) == 4.0
    assert stampacchia_threshold(1, 1, 2, 1, classical=True) == 4.0


@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.3, 4.0), st.floats(1.05, 6.0), st.integers(0, 1000))
def test_extremal_family_satisfies_hypothesis(g0, H, alpha, theta, seed):
    g, C = extremal_family(g0, H, alpha, theta)
    rng = np.random.default_rng(seed)
    k = rng.uniform(0, H, 400)
    h = k + rng.uniform(0, H, 400)
    lhs = g(h)
    rhs = C * (h - k) ** (-alpha) * g(k) ** theta
    assert np.all(lhs <= rhs * (1 + 1e-9))


@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.3, 4.0), st.floats(1.05, 6.0))
def test_classical_threshold_kills_extremal(g0, H, alpha, theta):
    g, C = extremal_family(g0, H, alpha, theta)
    d = stampacchia_threshold(C, alpha, theta, g0, classical=True)
    assert d >= H * (1 - 1e-12)
    assert g(d * (1 + 1e-9)) == 0.0


@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.3, 4.0), st.floats(2.0, 6.0))
def test_closed_form_threshold_kills_extremal_for_theta_at_least_two(g0, H, alpha, theta):
    g, C = extremal_family(g0, H, alpha, theta)
    d = stampacchia_threshold(C, alpha, theta, g0)
    assert d >= H * (1 - 1e-12)
    assert g(d * (1 + 1e-9)) == 0.0


def test_closed_form_threshold_fails_below_theta_two():
    # theta = 1.2: the extremal g is still positive past the closed-form level
    g, C = extremal_family(1.0, 1.0, 1.0, 1.2)
    d = stampacchia_threshold(C, 1.0, 1.2, 1.0)
    assert d < 0.5
    assert g(d) > 0
    assert g(stampacchia_threshold(C, 1.0, 1.2, 1.0, classical=True)) == 0.0


def test_extremal_is_sharp_for_classical_factor_at_theta_two():
    g, C = extremal_family(1.0, 1.0, 1.0, 2.0)
    assert stampacchia_threshold(C, 1.0, 2.0, 1.0, classical=True) == pytest.approx(1.0, rel=1e-12)


@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.3, 4.0), st.floats(1.05, 6.0))
def test_dyadic_levels_bound_the_extremal(g0, H, alpha, theta):
    g, C = extremal_family(g0, H, alpha, theta)
    k, bound = stampacchia_levels(C, alpha, theta, g0, 12)
    assert k[0] == 0 and np.all(np.diff(k) > 0)
    assert np.all(g(k) <= bound * (1 + 1e-9))


@pytest.mark.parametrize("args", [(0, 1, 2, 1), (1, 0, 2, 1), (1, 1, 1, 1), (1, 1, 2, -1)])
def test_stampacchia_invalid(args):
    with pytest.raises(InvalidParameters):
        stampacchia_threshold(*args)


# -------------------------------------------------- differential inequality

def test_diffineq_closed_form_value():
    assert diffineq_threshold(1, 2, 1.5, 1, 1) == 0.125
    assert diffineq_threshold(1, 2, 1.5, 1, 1, sharp=True) == 0.125


diff_params = st.tuples(st.floats(0.2, 5.0), st.floats(1.1, 3.0), st.floats(0.1, 3.0), st.floats(0.5, 3.0),
                        st.floats(0.1, 3.0))


@given(diff_params)
def test_extremal_solves_equation_with_equality(params):
    C, sigma, gap, t1, g1 = params
    alpha = sigma + gap
    t0 = diffineq_threshold(C, alpha, sigma, t1, g1, sharp=True)
    assume(t1 - t0 > 1e-3 * t1)
    t = np.linspace(t0 + 0.2 * (t1 - t0), t1, 9)
    step = 1e-6 * t1
    dg = (diffineq_extremal(C, alpha, sigma, t1, g1, t + step)
          - diffineq_extremal(C, alpha, sigma, t1, g1, t - step)) / (2 * step)
    g = diffineq_extremal(C, alpha, sigma, t1, g1, t)
    np.testing.assert_allclose(g, C * t**alpha * dg**sigma, rtol=1e-5)
    assert diffineq_extremal(C, alpha, sigma, t1, g1, t1) == pytest.approx(g1, rel=1e-12)


@given(diff_params)
def test_extremal_vanishes_exactly_below_sharp_threshold(params):
    C, sigma, gap, t1, g1 = params
    alpha = sigma + gap
    t0 = diffineq_threshold(C, alpha, sigma, t1, g1, sharp=True)
    assert diffineq_extremal(C, alpha, sigma, t1, g1, t0 * (1 - 1e-9)) == 0.0
    assert diffineq_extremal(C, alpha, sigma, t1, g1, min(t0 * (1 + 1e-3), t1)) > 0.0


def test_extremal_matches_ode_integration():
    C, alpha, sigma, t1, g1 = 2.0, 2.5, 1.5, 1.0, 0.7
    t0 = diffineq_threshold(C, alpha, sigma, t1, g1, sharp=True)

    def rhs(t, y):
        return [(max(y[0], 0.0) / (C * t**alpha)) ** (1.0 / sigma)]

    ts = np.linspace(t1, t0 + 0.05 * (t1 - t0), 30)
    sol = solve_ivp(rhs, (t1, ts[-1]), [g1], t_eval=ts, rtol=1e-11, atol=1e-13)
    np.testing.assert_allclose(sol.y[0], diffineq_extremal(C, alpha, sigma, t1, g1, ts), rtol=1e-6, atol=1e-9)


@given(diff_params, st.floats(1.0, 10.0))
def test_closed_form_threshold_valid_for_C_at_least_one(params, C):
    _, sigma, gap, t1, g1 = params
    alpha = sigma + gap
    t0 = diffineq_threshold(C, alpha, sigma, t1, g1)
    assert t0 <= diffineq_threshold(C, alpha, sigma, t1, g1, sharp=True) * (1 + 1e-12)
    assert diffineq_extremal(C, alpha, sigma, t1, g1, t0 * (1 - 1e-9)) == 0.0


def test_closed_form_threshold_fails_for_small_C():
    C, alpha, sigma, t1, g1 = 0.1, 2.0, 1.5, 1.0, 1.0
    t0 = diffineq_threshold(C, alpha, sigma, t1, g1)
    assert diffineq_extremal(C, alpha, sigma, t1, g1, t0) > 0.0


@pytest.mark.parametrize("args", [(0, 2, 1.5, 1, 1), (1, 1.5, 1.5, 1, 1), (1, 2, 1.0, 1, 1), (1, 2, 1.5, 0, 1)])
def test_diffineq_invalid(args):
    with pytest.raises(InvalidParameters):
        diffineq_threshold(*args)


# ------------------------------------------------------------ support / L2

@given(st.floats(0.1, 3.0), st.floats(0.5, 5.0), st.floats(0.2, 5.0), st.floats(0.01, 0.99))
def test_support_bound_two_dimensional_closed_form(area, C0, lam, q):
    f_norm = math.sqrt(q * C0 * lam * area)
    c = support_measure_bound(f_norm, area, 1.0, C0, lam, n=2)
    assert c == pytest.approx(support_bound_n2_closed_form(f_norm, area, C0, lam), rel=1e-8)
    assert c >= area


@given(st.floats(0.1, 3.0), st.floats(0.1, 5.0), st.floats(0.2, 5.0), st.floats(0.01, 10.0))
def test_support_bound_three_dimensional_root(area, C0, lam, f_norm):
    c = support_measure_bound(f_norm, area, 1.0, C0, lam, n=3)

    def rhs(M):
        return C0 * lam * area ** (2 / 3) * (M ** (1 / 3) - M ** (-2 / 3) * area)

    # the right side increases in M, so the root is bracketed by c (1 -+ rtol)
    assert c >= area
    assert rhs(c) <= f_norm**2 <= rhs(c * (1 + 2e-9))


def test_support_bound_needs_condition():
    with pytest.raises(ConditionViolated):
        support_measure_bound(2.0, 1.0, 1.0, 1.0, 1.0, n=2)
    with pytest.raises(ConditionViolated):
        support_bound_n2_closed_form(2.0, 1.0, 1.0, 1.0)
    with pytest.raises(InvalidParameters):
        support_measure_bound(1.0, 1.0, 1.0, 0.0, 1.0)


def test_support_bound_decreases_with_penalty():
    cs = [support_measure_bound(1.0, math.pi, 1.0, C0, 1.577, n=2) for C0 in (0.5, 1.0, 2.0, 10.0)]
    assert all(x > y for x, y in zip(cs, cs[1:]))


def test_l2_bound_formula():
    assert l2_norm_bound(3.0, 2.0, 1.5, 4.0, n=2) == pytest.approx(2 * 4.0 * 3.0 / 3.0)


def test_linf_ceiling_arithmetic():
    assert linf_ceiling(2.0, 3.0, 4.0) == pytest.approx(10 * (2 * 9 / 4 + 2 * 3 / 4))


# ------------------------------------------------------------- sublevels

@given(st.floats(0.0, 2.5))
def test_sublevel_areas_exact_for_linear_fields(t):
    mesh = mesh_polygon([(0, 0), (2, 0), (2, 1), (0, 1)], 0.2)
    x = mesh.vertices[:, 0]
    assert sublevel_areas(mesh, x, [t])[0] == pytest.approx(min(t, 2.0), abs=1e-12)
    y = mesh.vertices[:, 1]
    # |{x + y < t}| on [0,2]x[0,1] = int_0^1 clip(t - y, 0, 2) dy
    exact = quad(lambda s: min(max(t - s, 0.0), 2.0), 0.0, 1.0, points=[t, t - 2])[0] if t > 0 else 0.0
    assert sublevel_areas(mesh, x + y, [t])[0] == pytest.approx(exact, abs=1e-10)


def test_dirichlet_sublevels_grow_linearly(disk_mesh_fine):
    # u0 = (1 - r^2)/4 on the unit disk: |{u0 < t}| = 4 pi t
    v = solve_dirichlet(disk_mesh_fine, SourceField.constant(1.0), 0.0)
    t = np.linspace(0.01, 0.2, 8)
    scan = sublevel_volume_scan(mesh=disk_mesh_fine, values=v, t_grid=t)
    np.testing.assert_allclose(scan.volumes, 4 * math.pi * t, rtol=2e-3)
    assert scan.slope == pytest.approx(4 * math.pi, rel=2e-3)
    assert scan.status == PASS and scan.ratio_spread < 1.01


def test_sublevel_scan_grid_errors(disk_mesh_coarse):
    v = np.zeros(disk_mesh_coarse.n_vertices)
    with pytest.raises(EmptyGrid):
        sublevel_volume_scan(mesh=disk_mesh_coarse, values=v, t_grid=[])
    with pytest.raises(EmptyGrid):
        sublevel_volume_scan(mesh=disk_mesh_coarse, values=v, t_grid=[0.0, 0.1])


def test_sublevel_scan_flags_superlinear_growth(disk_mesh_coarse):
    # a field vanishing quadratically at the rim violates |U_t| <= C t
    r = np.linalg.norm(disk_mesh_coarse.vertices, axis=1)
    scan = sublevel_volume_scan(mesh=disk_mesh_coarse, values=(1 - r) ** 2, t_grid=np.geomspace(1e-4, 0.5, 12))
    assert scan.status == FAIL


# ------------------------------------------------------------ verify_state

@pytest.fixture(scope="module")
def interior_optimum_state():
    omega = RadialShape.disk(1.0)
    f = SourceField.constant(1.0)
    mesh = mesh_layered(omega, LayerShape.constant(0.0400645), 0.05)
    guard = n2_existence_guard(f, omega, 20.0, 0.22)
    return solve_state(mesh, f, 20.0), guard


def test_all_bounds_hold_on_interior_optimum(interior_optimum_state):
    sol, guard = interior_optimum_state
    assert guard.status == "SATISFIED"
    rep = verify_state(sol, 0.22, guard, box_bound=10 / 20 + 2, shape=LayerShape.constant(0.0400645))
    statuses = {c.name: c.status for c in rep.checks}
    assert statuses == {name: PASS for name in ("support_measure", "l2_norm", "lower_bound_delta0", "max_principle",
                                               "linf", "sublevel_linear", "bounded_box")}
    assert not rep.any_fail
    assert rep.area_A <= rep.support_bound_c
    assert "support_measure = PASS" in rep.to_text()


def test_corrupted_field_fails(interior_optimum_state):
    sol, guard = interior_optimum_state
    rep = verify_state(sol, 0.22, guard, u_override=sol.u - 0.5 * sol.u.max())
    assert rep.check("lower_bound_delta0").status == FAIL
    assert rep.check("max_principle").status == FAIL
    assert rep.any_fail


def test_violated_condition_is_not_applicable(disk_mesh_coarse, unit_source, tmp_path):
    sol = solve_state(disk_mesh_coarse, unit_source, 1.0)
    guard = n2_existence_guard(unit_source, RadialShape.disk(1.0), 1.0, 0.05)
    assert guard.status == "VIOLATED"
    rep = verify_state(sol, 0.05, guard)
    assert rep.check("support_measure").status == NOT_APPLICABLE
    assert rep.check("l2_norm").status == NOT_APPLICABLE
    assert rep.check("max_principle").status == PASS
    path = tmp_path / "bounds.csv"
    rep.write_csv(path)
    assert path.read_text().splitlines()[0] == "check,status,observed,bound"
    with pytest.raises(KeyError):
        rep.check("nonexistent")
