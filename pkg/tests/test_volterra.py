import logging

import numpy as np
import pytest

from memkernel.errors import SolverError
from memkernel.timegrid import TimeGrid, convolve, lift1
from memkernel.volterra import (
    bound_M,
    check_bounds,
    resolvent,
    resolvent_neumann,
    solve_first_kind,
    solve_second_kind,
)

from conftest import random_nonnegative_kernel


def test_second_kind_discrete_residual_vanishes(unit_grid, rng):
    kernel = unit_grid.zeros().with_values(rng.normal(size=unit_grid.size))
    rhs = unit_grid.sample(np.cos)
    x = solve_second_kind(2.0, kernel, rhs)
    residual = 2.0 * x + convolve(kernel, x) - rhs
    assert residual.max_abs() < 1e-12 * max(1.0, x.max_abs())


def test_second_kind_with_zero_kernel_returns_scaled_rhs(unit_grid):
    rhs = unit_grid.sample(np.sin)
    np.testing.assert_allclose(solve_second_kind(4.0, unit_grid.zeros(), rhs).values, rhs.values / 4.0)


def test_second_kind_degenerate_diagonal(unit_grid):
    with pytest.raises(SolverError):
        solve_second_kind(0.0, unit_grid.constant(1.0), unit_grid.constant(1.0))


def test_second_kind_closed_form():
    # x + 1*x = 1 gives x = exp(-t)
    grid = TimeGrid(1.0, 400)
    x = solve_second_kind(1.0, grid.constant(1.0), grid.constant(1.0))
    np.testing.assert_allclose(x.values, np.exp(-grid.nodes), atol=5e-6)


@pytest.mark.parametrize("analytic", [True, False])
def test_first_kind_linear_kernel(unit_grid, analytic):
    kernel = unit_grid.sample(lambda t: 1.0 + t)
    rhs = unit_grid.sample(lambda t: t + t**2 / 2)
    kwargs = {}
    if analytic:
        kwargs = {"kernel_prime": unit_grid.constant(1.0), "rhs_prime": unit_grid.sample(lambda t: 1.0 + t)}
    x = solve_first_kind(kernel, rhs, **kwargs)
    np.testing.assert_allclose(x.values, 1.0, atol=1e-10)


def test_first_kind_needs_nonzero_kernel_at_origin(unit_grid):
    with pytest.raises(SolverError):
        solve_first_kind(unit_grid.sample(lambda t: t), unit_grid.sample(lambda t: t**2))


def test_first_kind_needs_vanishing_rhs_at_origin(unit_grid):
    with pytest.raises(SolverError):
        solve_first_kind(unit_grid.constant(1.0), unit_grid.sample(lambda t: 1.0 + t))


def test_resolvent_rejects_unlifted_kernel(unit_grid):
    with pytest.raises(ValueError):
        resolvent(unit_grid.constant(1.0), 1.0)


@pytest.mark.parametrize("lam", [1.0, np.pi**2, 4 * np.pi**2])
def test_resolvent_identity(rng, lam):
    grid = TimeGrid(1.0, 800)
    for _ in range(20):
        h = random_nonnegative_kernel(grid, rng)
        h1 = lift1(h.trace)
        rk = resolvent(h1, lam, source=h.trace)
        for _ in range(5):
            x = grid.zeros().with_values(rng.normal(size=grid.size))
            y = x + lam * convolve(rk.k, x)
            back = y - lam * convolve(h1, y)
            assert (back - x).max_abs() <= 1e-8 * x.max_abs()


@pytest.mark.parametrize("lam", [0.4, 1.0])
def test_neumann_series_matches_resolvent(unit_grid, lam):
    h1 = lift1(unit_grid.constant(1.0))
    direct = resolvent(h1, lam).k
    series = resolvent_neumann(h1, lam, 20)
    np.testing.assert_allclose(series.values, direct.values, atol=1e-8)


def test_neumann_needs_a_term(unit_grid):
    with pytest.raises(ValueError):
        resolvent_neumann(unit_grid.zeros(), 1.0, 0)


def test_resolvent_of_unit_kernel_closed_form():
    # k = t^2/2 + (k * t^2/2) has transform 1/(s^3 - 1)
    grid = TimeGrid(1.0, 800)
    t = grid.nodes
    rk = resolvent(lift1(grid.constant(1.0)), 1.0)
    root3 = np.sqrt(3.0)
    exact = (np.exp(t) - np.exp(-t / 2) * (np.cos(root3 * t / 2) + root3 * np.sin(root3 * t / 2))) / 3
    np.testing.assert_allclose(rk.k.values, exact, atol=1e-6)


@pytest.mark.parametrize("lam", [1.0, np.pi**2])
def test_resolvent_of_nonnegative_kernel_is_nonnegative(rng, lam):
    grid = TimeGrid(1.0, 400)
    for _ in range(20):
        h = random_nonnegative_kernel(grid, rng)
        k = resolvent(lift1(h.trace), lam, source=h.trace).k
        assert np.min(k.values) >= -1e-10


def test_bound_M():
    assert bound_M(TimeGrid(1.0, 10).constant(1.0)) == pytest.approx(1.0)
    assert bound_M(TimeGrid(2.0, 10).constant(-1.0)) == pytest.approx(4.0)


@pytest.mark.parametrize("lam", [1.0, np.pi**2])
def test_bounds_hold_for_nonnegative_kernel(lam):
    grid = TimeGrid(1.0, 800)
    h = grid.constant(1.0)
    report = check_bounds(resolvent(lift1(h), lam, source=h), bound_M(h))
    assert report.precondition_ok
    assert report.pointwise_ok
    assert report.l2_ok
    assert report.holds
    assert report.to_dict()["minMargin"] > 0


def test_bounds_flag_sign_indefinite_kernel(unit_grid, caplog):
    h = unit_grid.sample(lambda t: 1.0 - 2.0 * t)
    with caplog.at_level(logging.WARNING, logger="memkernel.volterra"):
        report = check_bounds(resolvent(lift1(h), 1.0, source=h), bound_M(h))
    assert not report.precondition_ok
    assert "sign-indefinite" in report.precondition_message
    assert "sign-indefinite" in caplog.text
