import numpy as np
import pytest

from memkernel.timegrid import (
    GridFunction,
    Kernel,
    TimeGrid,
    convolve,
    cumulative,
    differentiate,
    integral,
    lift1,
)


def test_grid_nodes_and_step():
    grid = TimeGrid(2.0, 8)
    assert grid.dt == 0.25
    assert grid.size == 9
    assert grid.nodes[-1] == 2.0
    assert grid.refined(2).steps == 16


@pytest.mark.parametrize("horizon,steps", [(0.0, 10), (-1.0, 10), (1.0, 1), (1.0, 2.5)])
def test_invalid_grid(horizon, steps):
    with pytest.raises(ValueError):
        TimeGrid(horizon, steps)


def test_grid_function_is_read_only(unit_grid):
    f = unit_grid.constant(1.0)
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_grid_function_arithmetic(unit_grid):
    t = unit_grid.sample(lambda t: t)
    g = 2.0 * t - 1.0 + t / 2.0
    np.testing.assert_allclose(g.values, 2.5 * unit_grid.nodes - 1.0, atol=1e-14)
    np.testing.assert_allclose((-g).values, -g.values)
    assert (1.0 - t).initial == 1.0


def test_grid_mismatch_is_rejected():
    a = TimeGrid(1.0, 10).constant(1.0)
    b = TimeGrid(1.0, 20).constant(1.0)
    with pytest.raises(ValueError):
        convolve(a, b)
    with pytest.raises(ValueError):
        a + b


def test_wrong_sample_count():
    with pytest.raises(ValueError):
        GridFunction(TimeGrid(1.0, 10), np.zeros(5))


def test_convolution_of_constants_is_exact(unit_grid):
    one = unit_grid.constant(1.0)
    np.testing.assert_allclose(convolve(one, one).values, unit_grid.nodes, atol=1e-14)


def test_convolution_is_symmetric(unit_grid, rng):
    a = unit_grid.zeros().with_values(rng.normal(size=unit_grid.size))
    b = unit_grid.zeros().with_values(rng.normal(size=unit_grid.size))
    np.testing.assert_allclose(convolve(a, b).values, convolve(b, a).values, atol=1e-13)
    assert convolve(a, b).initial == 0.0


def test_convolution_is_second_order():
    errors = []
    for steps in (100, 200):
        grid = TimeGrid(1.0, steps)
        c = convolve(grid.sample(np.exp), grid.sample(np.sin))
        t = grid.nodes
        exact = 0.5 * (np.exp(t) - np.sin(t) - np.cos(t))
        errors.append(np.max(np.abs(c.values - exact)))
    assert 3.8 < errors[0] / errors[1] < 4.2


def test_lift_of_one_is_half_t_squared(unit_grid):
    np.testing.assert_allclose(lift1(unit_grid.constant(1.0)).values, unit_grid.nodes**2 / 2, atol=1e-14)


def test_lift_of_t_converges_at_second_order():
    errors = []
    for steps in (100, 200):
        grid = TimeGrid(1.0, steps)
        lifted = lift1(grid.sample(lambda t: t))
        errors.append(np.max(np.abs(lifted.values - grid.nodes**3 / 6)))
    assert errors[1] <= 1e-5
    assert 1.9 <= np.log2(errors[0] / errors[1]) <= 2.1


def test_second_difference_undoes_lift(unit_grid):
    r = unit_grid.sample(np.cos)
    np.testing.assert_allclose(differentiate(lift1(r), 2).values, r.values, atol=1e-3)


def test_first_derivative_converges_at_second_order():
    errors = []
    for steps in (100, 200):
        grid = TimeGrid(1.0, steps)
        errors.append(np.max(np.abs(differentiate(grid.sample(np.sin), 1).values - np.cos(grid.nodes))))
    assert 1.9 <= np.log2(errors[0] / errors[1]) <= 2.1


def test_cumulative_and_integral(unit_grid):
    two_t = unit_grid.sample(lambda t: 2 * t)
    np.testing.assert_allclose(cumulative(two_t).values, unit_grid.nodes**2, atol=1e-14)
    assert integral(two_t) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("order,power", [(1, 2), (2, 3), (3, 4)])
def test_differentiate_is_exact_for_low_degree_polynomials(order, power):
    grid = TimeGrid(1.0, 20)
    g = grid.sample(lambda t: t**power)
    coeff = np.prod(range(power - order + 1, power + 1))
    expected = coeff * grid.nodes ** (power - order)
    np.testing.assert_allclose(differentiate(g, order).values, expected, atol=1e-8)


@pytest.mark.parametrize("order,steps", [(1, 3), (2, 3), (3, 5)])
def test_differentiate_rejects_coarse_grids(order, steps):
    with pytest.raises(ValueError):
        differentiate(TimeGrid(1.0, steps).constant(1.0), order)


def test_differentiate_rejects_unknown_order(unit_grid):
    with pytest.raises(ValueError):
        differentiate(unit_grid.constant(1.0), 4)


def test_kernel_prime_prefers_analytic_derivative(unit_grid):
    trace = unit_grid.sample(lambda t: t**2)
    analytic = unit_grid.sample(lambda t: 2 * t)
    assert Kernel(trace, derivative=analytic).prime() is analytic
    np.testing.assert_allclose(Kernel(trace).prime().values, analytic.values, atol=1e-12)


def test_kernel_role_and_sign(unit_grid):
    with pytest.raises(ValueError):
        Kernel(unit_grid.constant(1.0), role="k")
    assert Kernel(unit_grid.constant(1.0)).is_nonnegative()
    assert not Kernel(unit_grid.sample(lambda t: 0.5 - t)).is_nonnegative()
