import numpy as np
import pytest
from scipy.integrate import trapezoid

from memkernel.spectral import (
    ModalProblemData,
    SpectralOperator,
    dirichlet_laplacian_1d,
    project,
    spatial_grid,
    synthesize,
    truncate_noisy,
    zero_data,
)


def test_dirichlet_eigenvalues():
    op = dirichlet_laplacian_1d(3)
    np.testing.assert_allclose(op.eigenvalues, [np.pi**2, 4 * np.pi**2, 9 * np.pi**2])
    assert op.lambda0 == pytest.approx(np.pi**2)
    assert op.measure_slot == 0
    assert op.has_basis


def test_measure_index_bounds():
    with pytest.raises(ValueError):
        dirichlet_laplacian_1d(3, measure_index=4)
    with pytest.raises(ValueError):
        SpectralOperator((1.0,), measure_index=0)


def test_zero_measured_eigenvalue_is_rejected():
    with pytest.raises(ValueError, match="nonzero"):
        SpectralOperator((0.0, 1.0), measure_index=1)
    assert SpectralOperator((0.0, 1.0), measure_index=2).lambda0 == 1.0


def test_require_positive():
    dirichlet_laplacian_1d(4).require_positive()
    with pytest.raises(ValueError):
        SpectralOperator((2.0, -1.0)).require_positive()


def test_project_inverts_synthesize():
    op = dirichlet_laplacian_1d(3)
    points = spatial_grid(101)
    coeffs = np.array([1.0, -0.5, 0.25])
    np.testing.assert_allclose(project(synthesize(coeffs, op, points), op), coeffs, atol=1e-12)


def test_project_needs_resolution():
    op = dirichlet_laplacian_1d(4)
    with pytest.raises(ValueError):
        project(np.zeros(10), op)


def test_operator_without_basis_cannot_project():
    op = SpectralOperator((1.0, 2.0))
    with pytest.raises(ValueError):
        project(np.zeros(50), op)
    with pytest.raises(ValueError):
        op.eigenfunctions(spatial_grid(5))


def test_truncate_noisy():
    np.testing.assert_array_equal(truncate_noisy([1.0, 2.0, 3.0], 1), [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(truncate_noisy([1.0, 2.0, 3.0], 3), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        truncate_noisy([1.0], 2)


def test_modal_data_shapes(unit_grid):
    op = dirichlet_laplacian_1d(2)
    forcing = (unit_grid.zeros(), unit_grid.zeros())
    with pytest.raises(ValueError):
        ModalProblemData(op, np.zeros(3), np.zeros(2), np.zeros(2), forcing)
    with pytest.raises(ValueError):
        ModalProblemData(op, np.zeros(2), np.zeros(2), np.zeros(2), forcing[:1])


def test_require_measurable(unit_grid):
    data = zero_data(dirichlet_laplacian_1d(2), unit_grid)
    with pytest.raises(ValueError, match=r"\(u_0,phi\)=0 violates condition \(1\.7\)"):
        data.require_measurable()


def test_forcing_derivative_falls_back_to_differences(unit_grid):
    op = dirichlet_laplacian_1d(1)
    f = unit_grid.sample(lambda t: t**2)
    data = ModalProblemData(op, [1.0], [0.0], [0.0], (f,))
    np.testing.assert_allclose(data.forcing_derivative(0).values, 2 * unit_grid.nodes, atol=1e-12)
    assert data.zero_order_at(0) == 0.0


def test_eigenfunctions_are_orthonormal():
    op = dirichlet_laplacian_1d(8)
    x = spatial_grid(2000)
    phi = op.eigenfunctions(x)
    gram = trapezoid(phi[:, None, :] * phi[None, :, :], x, axis=2)
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-8)


def test_second_difference_matches_eigenvalue():
    op = dirichlet_laplacian_1d(8)
    x = spatial_grid(2000)
    dx = x[1] - x[0]
    phi = op.eigenfunctions(x)
    second = (phi[:, 2:] - 2 * phi[:, 1:-1] + phi[:, :-2]) / dx**2
    for j, lam in enumerate(op.eigenvalues):
        assert np.max(np.abs(second[j] + lam * phi[j, 1:-1])) <= 0.2 * lam**2 * dx**2


def test_project_parabola():
    op = dirichlet_laplacian_1d(5)
    x = spatial_grid(401)
    j = np.arange(1, 6)
    expected = np.sqrt(2.0) * 2.0 / (j * np.pi) ** 3 * (1 - (-1.0) ** j)
    np.testing.assert_allclose(project(x * (1 - x), op), expected, atol=1e-6)


def test_random_coefficients_survive_synthesis(rng):
    op = dirichlet_laplacian_1d(5)
    points = spatial_grid(101)
    coeffs = rng.uniform(-1.0, 1.0, size=5)
    np.testing.assert_allclose(project(synthesize(coeffs, op, points), op), coeffs, atol=1e-8)


def test_truncation_of_noisy_data_stays_within_noise_level(rng):
    delta = 1e-3
    clean = rng.uniform(-1.0, 1.0, size=6)
    noisy = clean + delta * rng.uniform(-1.0, 1.0, size=6)
    gap = np.abs(truncate_noisy(noisy, 2) - truncate_noisy(clean, 2))
    assert np.all(gap[:2] <= delta)
    assert np.all(gap[2:] == 0.0)
