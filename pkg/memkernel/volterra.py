"""Volterra equations of the first and second kind, resolvent kernels and
their growth bounds.

Second-kind equations c*x + K*x = r are marched forward node by node with the
same trapezoidal weights as timegrid.convolve, so the discrete residual
vanishes to rounding. Kernels that vanish at t=0 (every lift h^(1)) give a
diagonal equal to c and the march is explicit.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from .errors import SolverError
from .timegrid import GridFunction, _require_same_grid, convolve, differentiate

logger = logging.getLogger(__name__)

DIAGONAL_TOL = 1e-12
POSITIVITY_SLACK = 1e-10
BOUND_SLACK = 1e-8
FIRST_KIND_CONSISTENCY = 1e-8
LIFT_ORIGIN_TOL = 1e-12


@dataclass(frozen=True)
class ResolventKernel:
    """k_j with (I - lambda H)^-1 = I + lambda K, H x = h1*x, K x = k*x."""

    lam: float
    k: GridFunction
    source_lift: GridFunction
    source: Optional[GridFunction] = None


@dataclass
class BoundReport:
    """Node-wise verdicts for 0 <= k(t) <= M exp(lambda M t) and the L2 bound."""

    M: float
    lam: float
    upper: np.ndarray
    margins: np.ndarray
    lower_ok: np.ndarray
    l2_value: float
    l2_bound: float
    precondition_ok: bool
    precondition_message: str = ""

    @property
    def pointwise_ok(self):
        return bool(np.all(self.margins >= 0.0) and np.all(self.lower_ok))

    @property
    def l2_ok(self):
        return self.l2_value <= self.l2_bound

    @property
    def holds(self):
        return self.pointwise_ok and self.l2_ok

    def to_dict(self):
        return {
            "M": self.M,
            "lambda": self.lam,
            "pointwiseOk": self.pointwise_ok,
            "l2Ok": self.l2_ok,
            "l2Value": self.l2_value,
            "l2Bound": self.l2_bound,
            "minMargin": float(np.min(self.margins)),
            "preconditionOk": self.precondition_ok,
            "preconditionMessage": self.precondition_message,
        }


def solve_second_kind(c: float, kernel: GridFunction, rhs: GridFunction) -> GridFunction:
    """Solve c*x(t) + int_0^t kernel(t-s) x(s) ds = rhs(t) by forward marching."""
    _require_same_grid(kernel, rhs)
    c = float(c)
    dt = kernel.grid.dt
    K, r = kernel.values, rhs.values
    diagonal = c + 0.5 * dt * K[0]
    cutoff = DIAGONAL_TOL * max(1.0, abs(c))
    if abs(c) < cutoff or abs(diagonal) < cutoff:
        raise SolverError(
            f"Degenerate Volterra diagonal (c={c:.3e}, c + dt/2*kernel(0)={diagonal:.3e}); "
            "the second-kind equation is not solvable by marching "
            "(for identification this means g(0)=0).",
            {"c": c, "diagonal": diagonal},
        )

    x = np.zeros_like(r)
    x[0] = r[0] / c
    for n in range(1, len(r)):
        history = 0.5 * K[n] * x[0] + np.dot(K[n - 1:0:-1], x[1:n])
        x[n] = (r[n] - dt * history) / diagonal
    return rhs.with_values(x)


def solve_first_kind(
    kernel: GridFunction,
    rhs: GridFunction,
    kernel_prime: Optional[GridFunction] = None,
    rhs_prime: Optional[GridFunction] = None,
) -> GridFunction:
    """Solve int_0^t kernel(t-s) x(s) ds = rhs(t) by reduction to the second kind.

    Differentiating gives kernel(0) x + kernel' * x = rhs'. Analytic
    derivative traces are used when passed, finite differences otherwise.
    """
    _require_same_grid(kernel, rhs)
    k0 = kernel.initial
    if abs(k0) < DIAGONAL_TOL * max(1.0, kernel.max_abs()):
        raise SolverError(
            f"First-kind kernel vanishes at t=0 (kernel(0)={k0:.3e}); "
            "reduction to the second kind needs kernel(0) != 0.",
            {"kernel0": k0},
        )
    scale = rhs.max_abs()
    if abs(rhs.initial) > FIRST_KIND_CONSISTENCY * scale:
        raise SolverError(
            f"Inconsistent first-kind data: rhs(0)={rhs.initial:.3e} must vanish.",
            {"rhs0": rhs.initial},
        )
    if kernel_prime is None:
        kernel_prime = differentiate(kernel, 1)
    if rhs_prime is None:
        rhs_prime = differentiate(rhs, 1)
    return solve_second_kind(k0, kernel_prime, rhs_prime)


def resolvent(h1: GridFunction, lam: float, source: Optional[GridFunction] = None) -> ResolventKernel:
    """Resolvent kernel k = h1 + lam * (k*h1) of a lifted kernel h1 (h1(0)=0)."""
    if abs(h1.initial) > LIFT_ORIGIN_TOL * max(1.0, h1.max_abs()):
        raise ValueError(f"Lifted kernel must vanish at t=0, got h1(0)={h1.initial:.3e}.")
    lam = float(lam)
    k = solve_second_kind(1.0, -lam * h1, h1)
    return ResolventKernel(lam=lam, k=k, source_lift=h1, source=source)


def resolvent_neumann(h1: GridFunction, lam: float, m_max: int) -> GridFunction:
    """Partial Neumann sum k ~ sum_{m=1}^{m_max} lam^(m-1) h_m, h_m = h1 * h_(m-1)."""
    if m_max < 1:
        raise ValueError(f"Neumann series needs at least one term, got m_max={m_max}.")
    term = h1
    total = h1.values.copy()
    for m in range(2, m_max + 1):
        term = convolve(h1, term)
        total += float(lam) ** (m - 1) * term.values
    return h1.with_values(total)


def bound_M(h: GridFunction) -> float:
    """M = T * int_0^T |h(t)| dt."""
    return h.grid.horizon * float(trapezoid(np.abs(h.values), dx=h.grid.dt))


def check_bounds(rk: ResolventKernel, M: float) -> BoundReport:
    """Check 0 <= k <= M exp(lambda M t) node-wise and int k^2 <= M exp(2 lambda M T)/(2 lambda)."""
    grid = rk.k.grid
    t = grid.nodes
    k = rk.k.values
    lam = rk.lam

    reasons = []
    sign_source = rk.source if rk.source is not None else rk.source_lift
    if np.min(sign_source.values) < -POSITIVITY_SLACK:
        reasons.append("kernel is sign-indefinite (needs h >= 0)")
    if lam <= 0:
        reasons.append(f"lambda={lam} is not positive")
    message = "; ".join(reasons)
    if message:
        logger.warning("Resolvent bound hypotheses violated: %s", message)

    with np.errstate(over="ignore"):
        upper = M * np.exp(lam * M * t) * (1.0 + BOUND_SLACK)
        l2_bound = M * np.exp(2.0 * lam * M * grid.horizon) / (2.0 * lam) if lam > 0 else np.inf
    l2_bound = float(l2_bound) * (1.0 + BOUND_SLACK)
    l2_value = float(trapezoid(k**2, dx=grid.dt))
    return BoundReport(
        M=float(M),
        lam=lam,
        upper=upper,
        margins=upper - k,
        lower_ok=k >= -POSITIVITY_SLACK,
        l2_value=l2_value,
        l2_bound=l2_bound,
        precondition_ok=not reasons,
        precondition_message=message,
    )
