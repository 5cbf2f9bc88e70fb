"""Direct Cauchy problems solved mode by mode, and the measurement g(t).

Each Fourier coefficient of u'' = A0 u + h*Au + f obeys

    u_j(t) = u0_j + t c_j + f~_j(t) + (a_j t + lambda_j h^(1)) * u_j(t),

with f~ = lift1(f) and h^(1) = lift1(h). The lifted kernel vanishes at t=0,
so the fixed-point form is marched explicitly.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import SolverError
from .spectral import ModalProblemData, SpectralOperator
from .timegrid import (
    GridFunction,
    Kernel,
    TimeGrid,
    convolve,
    cumulative,
    differentiate,
    lift1,
)
from .volterra import solve_second_kind

logger = logging.getLogger(__name__)

MEASURED_SAMPLED = "measured-sampled"
ANALYTIC = "analytic"

# l(0) must vanish for the first-order reduction.
L0_TOL = 1e-10


@dataclass(frozen=True)
class ModalSolution:
    op: SpectralOperator
    modes: Tuple[GridFunction, ...]
    crosscheck: Optional[float] = None

    def __post_init__(self):
        modes = tuple(self.modes)
        if len(modes) != self.op.mode_count:
            raise ValueError(f"Expected {self.op.mode_count} modal traces, got {len(modes)}.")
        if any(mode.grid != modes[0].grid for mode in modes):
            raise ValueError("All modal traces must share one time grid.")
        object.__setattr__(self, "modes", modes)

    @property
    def grid(self) -> TimeGrid:
        return self.modes[0].grid

    def as_array(self) -> np.ndarray:
        """Shape (mode_count, grid.size)."""
        return np.vstack([mode.values for mode in self.modes])

    def final_coefficients(self) -> np.ndarray:
        return np.array([mode.final for mode in self.modes])


@dataclass(frozen=True)
class MeasurementTrace:
    """g(t) = (u(t), phi) with optional analytic derivatives g', g'', g'''."""

    g: GridFunction
    g1: Optional[GridFunction] = None
    g2: Optional[GridFunction] = None
    g3: Optional[GridFunction] = None
    source: str = MEASURED_SAMPLED

    def __post_init__(self):
        if self.source not in (MEASURED_SAMPLED, ANALYTIC):
            raise ValueError(f"Unknown measurement source {self.source!r}.")
        for trace in (self.g1, self.g2, self.g3):
            if trace is not None and trace.grid != self.g.grid:
                raise ValueError("Derivative traces must share the measurement grid.")

    @property
    def grid(self):
        return self.g.grid

    def analytic(self, order) -> Optional[GridFunction]:
        return (None, self.g1, self.g2, self.g3)[order]

    def derivative(self, order) -> Tuple[GridFunction, str]:
        """(trace, provenance) of g^(order): analytic if supplied, else finite differences."""
        trace = self.analytic(order)
        if trace is not None:
            return trace, ANALYTIC
        return differentiate(self.g, order), "finite-difference"

    def consistency_defect(self) -> float:
        """Largest mismatch between supplied derivatives and differences of the lower trace."""
        defect = 0.0
        lower = self.g
        for order in (1, 2, 3):
            trace = self.analytic(order)
            if trace is None:
                break
            defect = max(defect, float(np.max(np.abs(differentiate(lower, 1).values - trace.values))))
            lower = trace
        return defect

    def shifted(self, delta: float) -> "MeasurementTrace":
        return MeasurementTrace(self.g + delta, self.g1, self.g2, self.g3, self.source)


def map_modes(func: Callable[[int], object], count: int, workers: int = 1) -> List[object]:
    """Apply func to every mode slot; results come back in ascending slot order."""
    if workers <= 1 or count <= 1:
        return [func(slot) for slot in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, range(count)))


def solve_mode_ivp2(
    lam: float,
    h: Kernel,
    u0: float,
    c: float,
    f: GridFunction,
    zero_order: float = 0.0,
) -> GridFunction:
    """One mode of u'' = a u + lambda h*u + f with u(0)=u0, u'(0)=c."""
    grid = f.grid
    if h.grid != grid:
        raise ValueError(f"Kernel grid {h.grid} differs from forcing grid {grid}.")
    t = grid.sample(lambda t: t)
    lifted = float(lam) * lift1(h.trace) + float(zero_order) * t
    rhs = float(u0) + float(c) * t + lift1(f)
    return solve_second_kind(1.0, -lifted, rhs)


def solve_ivp2(data: ModalProblemData, h: Kernel, workers: int = 1) -> ModalSolution:
    """u'' = h*Au (+ A0 u) + f, u(0)=u0, u'(0)=u1, every mode independently."""

    def solve(slot):
        return solve_mode_ivp2(
            data.op.eigenvalues[slot],
            h,
            data.u0[slot],
            data.u1[slot],
            data.forcing[slot],
            data.zero_order_at(slot),
        )

    solution = ModalSolution(data.op, map_modes(solve, data.mode_count, workers))
    logger.debug("u''(0)=f(0) defect: %.3e", acceleration_defect(solution, data))
    return solution


def _first_order_direct(lam, h1: GridFunction, u0, f: GridFunction) -> GridFunction:
    """March u = u0 + 1*f + lambda h1*u with h1 = int_0^t l."""
    return solve_second_kind(1.0, -float(lam) * h1, float(u0) + cumulative(f))


def solve_ivp1(data: ModalProblemData, l: Kernel, workers: int = 1) -> ModalSolution:
    """u' = l*Au + f, u(0)=u0, with l(0)=0, through the second-order reduction.

    With h = l', u'(0) = f(0) and forcing f', the problem becomes
    u'' = h*Au + f'. The result is cross-checked against a direct march of
    the first-order fixed-point form.
    """
    if abs(l.initial_value) > L0_TOL:
        raise SolverError(
            f"First-order kernel must satisfy l(0)=0, got l(0)={l.initial_value:.3e}.",
            {"l0": l.initial_value},
        )
    h = Kernel(l.prime(), role="h", provenance=f"derivative of {l.provenance}")
    h1 = cumulative(l.trace)

    def solve(slot):
        lam = data.op.eigenvalues[slot]
        f = data.forcing[slot]
        reduced = solve_mode_ivp2(lam, h, data.u0[slot], f.initial, data.forcing_derivative(slot))
        direct = _first_order_direct(lam, h1, data.u0[slot], f)
        return reduced, float(np.max(np.abs(reduced.values - direct.values)))

    results = map_modes(solve, data.mode_count, workers)
    crosscheck = max(gap for _, gap in results)
    logger.debug("First-order reduction vs direct march: max gap %.3e", crosscheck)
    return ModalSolution(data.op, tuple(trace for trace, _ in results), crosscheck)


def measure(sol: ModalSolution) -> MeasurementTrace:
    """g = (u, phi_{j0}) = u_{j0} on an orthonormal basis."""
    return MeasurementTrace(sol.modes[sol.op.measure_slot], source=MEASURED_SAMPLED)


def measure_A0(sol: ModalSolution, lambda00: float) -> MeasurementTrace:
    """g0 = (u, A0* phi) = lambda00 g when phi is also an eigenvector of A0*."""
    return MeasurementTrace(float(lambda00) * sol.modes[sol.op.measure_slot], source=MEASURED_SAMPLED)


def residual_ivp2(sol: ModalSolution, h: Kernel, data: ModalProblemData) -> float:
    """max over modes and nodes of |u_j'' - a_j u_j - lambda_j h*u_j - f_j|."""
    worst = 0.0
    for slot, mode in enumerate(sol.modes):
        lam = data.op.eigenvalues[slot]
        residual = (
            differentiate(mode, 2)
            - data.zero_order_at(slot) * mode
            - lam * convolve(h.trace, mode)
            - data.forcing[slot]
        )
        worst = max(worst, residual.max_abs())
    return worst


def acceleration_defect(sol: ModalSolution, data: ModalProblemData) -> float:
    """max_j |u_j''(0) - a_j u_j(0) - f_j(0)|; the equation forces it to vanish."""
    if sol.grid.steps < 4:
        return 0.0
    return max(
        abs(differentiate(mode, 2).initial - data.zero_order_at(slot) * mode.initial - data.forcing[slot].initial)
        for slot, mode in enumerate(sol.modes)
    )
