import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize

from insulate.errors import InvalidRadii
from insulate.radial import (
    checked_source_integral,
    layer_volume,
    profile_table,
    radial_energy,
    radial_energy_derivative,
    radial_energy_terms,
    radial_optimal_radius,
    radial_state,
    source_integral_quadrature,
)

# roots of f^2 R0^4 (1/R1 - 1/(beta R1^2)) = 4 C0 R1 (R0 = f = 1), by brentq (frozen)
STATIONARY_R1 = {(4.0, 0.05): 2.0986620564775174, (20.0, 0.22): 1.0400644966210302, (2.0, 0.05): 1.923636745873765}

radii = st.tuples(st.floats(0.2, 3.0), st.floats(0.0, 3.0)).map(lambda p: (p[0], p[0] + p[1]))


def test_outer_trace_flux_balance():
    sol = radial_state(2, 1.0, 2.0, 1.0, 1.0)
    assert sol.outer_trace() == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("n, expected", [(2, 0.5), (3, 1.0 / 3.0)])
def test_no_layer_trace(n, expected):
    sol = radial_state(n, 1.0, 1.0, 1.0, 1.0)
    assert sol(1.0) == pytest.approx(expected, abs=1e-15)


def test_zero_source_gives_zero():
    sol = radial_state(2, 1.0, 1.7, 0.0, 2.0)
    assert np.all(sol(np.linspace(0, 1.7, 20)) == 0.0)


@given(st.sampled_from([2, 3]), radii, st.floats(0.1, 5.0), st.floats(0.05, 20.0))
def test_matching_conditions(n, r, f, beta):
    R0, R1 = r
    sol = radial_state(n, R0, R1, f, beta)
    scale = max(1.0, abs(sol.c), abs(sol.a), abs(sol.b))
    for res in sol.matching_residuals():
        assert abs(res) <= 4e-14 * scale
    assert np.all(sol(np.linspace(0, R1, 50)) > 0)


def test_five_eighths_pi():
    assert radial_energy(2, 1.0, 1.0, 1.0, 1.0, 0.0) == pytest.approx(-5 * math.pi / 8, rel=1e-14)
    sol = radial_state(2, 1.0, 1.0, 1.0, 1.0)
    assert source_integral_quadrature(sol) == pytest.approx(5 * math.pi / 8, rel=1e-13)


def test_penalty_is_annulus_area():
    assert radial_energy_terms(2, 1.0, 2.0, 1.0, 1.0, 0.3)["volume_penalty"] == pytest.approx(0.9 * math.pi)
    assert layer_volume(3, 1.0, 2.0) == pytest.approx(4 * math.pi / 3 * 7)


def test_cheap_insulation_helps():
    assert radial_energy(2, 1.0, 1.5, 1.0, 1.0, 1e-3) < radial_energy(2, 1.0, 1.0, 1.0, 1.0, 1e-3)


@given(st.sampled_from([2, 3]), radii, st.floats(0.1, 5.0), st.floats(0.05, 20.0), st.floats(0.0, 2.0))
def test_reduced_identity(n, r, f, beta, C0):
    R0, R1 = r
    terms = radial_energy_terms(n, R0, R1, f, beta, C0)
    total = radial_energy(n, R0, R1, f, beta, C0)
    assert terms["total"] == pytest.approx(total, rel=1e-12, abs=1e-12)
    # testing the weak form with u itself: dirichlet + robin = int f u
    assert terms["dirichlet"] + terms["robin"] == pytest.approx(terms["source"] / 2, rel=1e-12)


@given(st.sampled_from([2, 3]), radii, st.floats(0.1, 5.0), st.floats(0.05, 20.0))
def test_closed_form_matches_quadrature(n, r, f, beta):
    sol = radial_state(n, r[0], r[1], f, beta)
    checked_source_integral(sol)


def test_dirichlet_term_by_quadrature():
    sol = radial_state(3, 1.0, 2.5, 2.0, 0.7)
    grad = integrate.quad(lambda r: sol.derivative(r) ** 2 * 4 * math.pi * r**2, 0, 2.5, points=[1.0])[0]
    assert radial_energy_terms(3, 1.0, 2.5, 2.0, 0.7, 0.0)["dirichlet"] == pytest.approx(grad, rel=1e-10)


@given(st.sampled_from([2, 3]), radii, st.floats(0.1, 3.0), st.floats(0.1, 10.0), st.floats(0.001, 1.0))
def test_derivative_matches_finite_difference(n, r, f, beta, C0):
    R0, R1 = r
    R1 = max(R1, R0 + 1e-3)
    step = 1e-6 * R1
    fd = (radial_energy(n, R0, R1 + step, f, beta, C0) - radial_energy(n, R0, R1 - step, f, beta, C0)) / (2 * step)
    assert radial_energy_derivative(n, R0, R1, f, beta, C0) == pytest.approx(fd, rel=1e-5, abs=1e-6)


@pytest.mark.parametrize("key", sorted(STATIONARY_R1))
def test_interior_optimum_solves_stationarity(key):
    beta, C0 = key
    assert radial_optimal_radius(2, 1.0, 1.0, beta, C0) == pytest.approx(STATIONARY_R1[key], rel=1e-6)


def test_spec_benchmark_has_boundary_optimum():
    # for beta = 1, C0 = 0.05 the energy increases with R1: dF/dR1 > 0 on [1, inf)
    grid = np.linspace(1.0, 30.0, 3000)
    assert np.all(radial_energy_derivative(2, 1.0, grid, 1.0, 1.0, 0.05) > 0)
    assert radial_optimal_radius(2, 1.0, 1.0, 1.0, 0.05) == 1.0


def test_huge_penalty_returns_R0():
    assert radial_optimal_radius(2, 1.0, 1.0, 1.0, 1e6) == 1.0
    assert radial_optimal_radius(3, 1.0, 1.0, 1.0, 1e6) == 1.0


def test_optimum_nondecreasing_in_beta():
    r = [radial_optimal_radius(2, 1.0, 1.0, b, 0.05) for b in (0.5, 1.0, 2.0, 4.0, 20.0)]
    assert all(x <= y for x, y in zip(r, r[1:]))


def test_large_beta_limit():
    # beta -> inf: f^2 R0^4 / R1 = 4 C0 R1, so R1 -> R0^2 f / (2 sqrt(C0))
    assert radial_optimal_radius(2, 1.0, 1.0, 1e3, 0.05) == pytest.approx(2.2355678096946177, rel=1e-6)
    assert abs(radial_optimal_radius(2, 1.0, 1.0, 1e6, 0.05) - 1 / (2 * math.sqrt(0.05))) < 1e-4


def test_global_minimum_is_found_past_local_maximum():
    # C0 = 1e-3: stationary points at 1.00405 (local max) and 15.2854 (min)
    assert radial_optimal_radius(2, 1.0, 1.0, 1.0, 1e-3) == pytest.approx(15.285436282781642, rel=1e-6)


def test_optimum_beats_scan_n3():
    R = radial_optimal_radius(3, 1.0, 1.0, 4.0, 0.05)
    grid = np.linspace(1.0, 6.0, 2001)
    assert radial_energy(3, 1.0, R, 1.0, 4.0, 0.05) <= min(radial_energy(3, 1.0, g, 1.0, 4.0, 0.05) for g in grid) + 1e-12
    res = optimize.minimize_scalar(lambda x: radial_energy(3, 1.0, x, 1.0, 4.0, 0.05), bounds=(1.0, 6.0), method="bounded",
                                   options={"xatol": 1e-10})
    assert R == pytest.approx(res.x, rel=1e-5)


@pytest.mark.parametrize("args", [(4, 1.0, 2.0, 1.0, 1.0), (2, 0.0, 1.0, 1.0, 1.0), (2, 2.0, 1.0, 1.0, 1.0),
                                  (2, 1.0, 2.0, 1.0, 0.0)])
def test_invalid_radii(args):
    with pytest.raises(InvalidRadii):
        radial_state(*args)


def test_profile_table_endpoints():
    sol = radial_state(2, 1.0, 2.0, 1.0, 1.0)
    tab = profile_table(sol, 11)
    assert tab[0, 0] == 0.0 and tab[-1, 0] == 2.0
    assert tab[-1, 1] == pytest.approx(0.25)
