"""The self-adjoint operator A through finitely many eigenpairs.

A is stored as an ordered eigenvalue list, optionally with the closed-form
eigenfunctions of -d^2/dx^2 on (0, 1) with Dirichlet conditions,
phi_j(x) = sqrt(2) sin(j pi x), lambda_j = (j pi)^2. The measurement
functional is (., phi_{j0}).
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .errors import SolverError
from .timegrid import GridFunction, differentiate

NO_BASIS = "none"
DIRICHLET_LAPLACIAN_1D = "dirichletLaplacian1d"
BASES = (NO_BASIS, DIRICHLET_LAPLACIAN_1D)

# project() needs at least this many spatial samples per mode.
POINTS_PER_MODE = 8


@dataclass(frozen=True)
class SpectralOperator:
    eigenvalues: Tuple[float, ...]
    basis: str = NO_BASIS
    measure_index: int = 1

    def __post_init__(self):
        eigenvalues = tuple(float(lam) for lam in self.eigenvalues)
        object.__setattr__(self, "eigenvalues", eigenvalues)
        if not eigenvalues:
            raise ValueError("A spectral operator needs at least one eigenvalue.")
        if self.basis not in BASES:
            raise ValueError(f"Unknown spatial basis {self.basis!r}; expected one of {BASES}.")
        if not 1 <= self.measure_index <= len(eigenvalues):
            raise ValueError(
                f"Measurement index {self.measure_index} outside 1..{len(eigenvalues)}."
            )
        if eigenvalues[self.measure_index - 1] == 0.0:
            raise ValueError("The measured eigenvalue lambda_0 must be nonzero.")

    @property
    def mode_count(self):
        return len(self.eigenvalues)

    @property
    def measure_slot(self):
        """Zero-based position of the measured mode."""
        return self.measure_index - 1

    @property
    def lambda0(self):
        return self.eigenvalues[self.measure_slot]

    @property
    def has_basis(self):
        return self.basis != NO_BASIS

    def require_positive(self):
        """Positive nondecreasing eigenvalues, as the mixed problems assume."""
        lam = np.asarray(self.eigenvalues)
        if np.any(lam <= 0) or np.any(np.diff(lam) < 0):
            raise ValueError(
                "Mixed problems need positive nondecreasing eigenvalues, "
                f"got {list(self.eigenvalues)}."
            )

    def eigenfunctions(self, points) -> np.ndarray:
        """Matrix of phi_j(x_i), shape (mode_count, len(points))."""
        if not self.has_basis:
            raise ValueError("This operator carries no spatial basis.")
        x = np.asarray(points, dtype=float)
        j = np.arange(1, self.mode_count + 1)[:, None]
        return np.sqrt(2.0) * np.sin(j * np.pi * x[None, :])


@dataclass(frozen=True)
class ModalProblemData:
    """Fourier coefficients of u0, u1, u2 and f on the eigenbasis of A.

    `zero_order` holds the eigenvalues a_j of a zeroth-order operator A0
    sharing the basis (the generalized equation u'' = A0 u + h*Au + f);
    `forcing_prime` optionally carries analytic traces of f'.
    """

    op: SpectralOperator
    u0: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    forcing: Tuple[GridFunction, ...]
    forcing_prime: Optional[Tuple[GridFunction, ...]] = None
    zero_order: Optional[np.ndarray] = None

    def __post_init__(self):
        count = self.op.mode_count
        for name in ("u0", "u1", "u2", "zero_order"):
            value = getattr(self, name)
            if value is None:
                continue
            arr = np.array(value, dtype=float, copy=True)
            if arr.shape != (count,):
                raise ValueError(f"{name} needs {count} modal coefficients, got shape {arr.shape}.")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("forcing", "forcing_prime"):
            traces = getattr(self, name)
            if traces is None:
                continue
            traces = tuple(traces)
            if len(traces) != count:
                raise ValueError(f"{name} needs {count} traces, got {len(traces)}.")
            if any(trace.grid != traces[0].grid for trace in traces):
                raise ValueError(f"All {name} traces must share one time grid.")
            object.__setattr__(self, name, traces)
        if self.forcing_prime is not None and self.forcing_prime[0].grid != self.grid:
            raise ValueError("forcing_prime must live on the forcing grid.")

    @property
    def grid(self):
        return self.forcing[0].grid

    @property
    def mode_count(self):
        return self.op.mode_count

    def zero_order_at(self, slot):
        return 0.0 if self.zero_order is None else float(self.zero_order[slot])

    def forcing_derivative(self, slot) -> GridFunction:
        if self.forcing_prime is not None:
            return self.forcing_prime[slot]
        return differentiate(self.forcing[slot], 1)

    def require_measurable(self):
        """Kernel identification needs (u0, phi) != 0."""
        slot = self.op.measure_slot
        if self.u0[slot] == 0.0:
            raise SolverError("(u_0,phi)=0 violates condition (1.7).", {"mode": self.op.measure_index})


def zero_data(op: SpectralOperator, grid) -> ModalProblemData:
    zeros = np.zeros(op.mode_count)
    return ModalProblemData(op, zeros, zeros, zeros, tuple(grid.zeros() for _ in range(op.mode_count)))


def dirichlet_laplacian_1d(mode_count: int, measure_index: int = 1) -> SpectralOperator:
    """-d^2/dx^2 on (0, 1) with u(0)=u(1)=0: lambda_j = (j pi)^2."""
    if mode_count < 1:
        raise ValueError(f"Need at least one mode, got {mode_count}.")
    eigenvalues = tuple((j * np.pi) ** 2 for j in range(1, mode_count + 1))
    return SpectralOperator(eigenvalues, DIRICHLET_LAPLACIAN_1D, measure_index)


def spatial_grid(points: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def _require_resolved(values, op: SpectralOperator):
    if not op.has_basis:
        raise ValueError("Projection needs an operator with a spatial basis.")
    if len(values) < POINTS_PER_MODE * op.mode_count:
        raise ValueError(
            f"{len(values)} spatial samples under-resolve {op.mode_count} modes "
            f"(need at least {POINTS_PER_MODE * op.mode_count})."
        )


def project(values: Sequence[float], op: SpectralOperator) -> np.ndarray:
    """Coefficients (v, phi_j) of samples on the uniform grid of [0, 1]."""
    values = np.asarray(values, dtype=float)
    _require_resolved(values, op)
    x = spatial_grid(len(values))
    return trapezoid(op.eigenfunctions(x) * values[None, :], x, axis=1)


def synthesize(coeffs: Sequence[float], op: SpectralOperator, points) -> np.ndarray:
    """sum_j coeffs_j phi_j(x) at each point."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (op.mode_count,):
        raise ValueError(f"Expected {op.mode_count} coefficients, got shape {coeffs.shape}.")
    points = np.asarray(points, dtype=float)
    if not op.has_basis:
        raise ValueError("Synthesis needs an operator with a spatial basis.")
    return coeffs @ op.eigenfunctions(points)


def truncate_noisy(coeffs: Sequence[float], keep: int) -> np.ndarray:
    """Spectral projection onto the first `keep` modes."""
    coeffs = np.array(coeffs, dtype=float, copy=True)
    if not 0 <= keep <= len(coeffs):
        raise ValueError(f"Cannot keep {keep} of {len(coeffs)} modes.")
    coeffs[keep:] = 0.0
    return coeffs
