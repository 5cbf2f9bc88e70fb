"""Mixed problems: u(0)=u0 or u'(0)=u1 together with u(T)=u2 for
u'' = h*Au + f, and u(T)=u2 for u' = l*Au + f with l(0)=0, solved mode
by mode through resolvent kernels.

For every mode the solution is affine in the unknown initial datum c,
u_j = y0 + c y1, where y0 and y1 come from the resolvent representation.
The endpoint condition fixes c = (u2 - y0(T)) / y1(T); y1(T) is the
solvability denominator.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .direct import ModalSolution, map_modes
from .errors import SolverError
from .spectral import ModalProblemData
from .timegrid import GridFunction, Kernel, convolve, cumulative, integral, lift1
from .volterra import bound_M, resolvent

logger = logging.getLogger(__name__)

UNIQUE = "unique"
NONUNIQUE = "nonunique"
UNSOLVABLE = "unsolvable"

ORDER1 = "order1"
ORDER2 = "order2"

# Which datum the second-order problem prescribes at t=0.
LEFT_VALUE = "value"
LEFT_VELOCITY = "velocity"
LEFT_CONDITIONS = (LEFT_VALUE, LEFT_VELOCITY)

DEFAULT_TOL = 1e-10
U_BOUND_SLACK = 1e-8
L0_TOL = 1e-10


@dataclass
class BvpModeReport:
    mode: int
    denominator: float
    numerator: float
    c: float
    status: str

    def to_dict(self):
        return {
            "mode": self.mode,
            "denominator": self.denominator,
            "numerator": self.numerator,
            "status": self.status,
            "c": self.c,
        }


@dataclass
class ConvergenceReport:
    order: str
    horizon: float
    M: float
    lambdas: np.ndarray
    L: np.ndarray
    terms: np.ndarray
    partial_sums: np.ndarray = field(init=False)
    tail_sum: float = field(init=False)

    def __post_init__(self):
        # ascending j, fixed order
        self.partial_sums = np.cumsum(self.terms)
        self.tail_sum = float(self.partial_sums[-1])

    @property
    def band_limit(self):
        """Largest 1-based mode index with a nonzero term (0 if none)."""
        nonzero = np.flatnonzero(self.terms)
        return int(nonzero[-1]) + 1 if nonzero.size else 0

    @property
    def growing(self):
        """True when the last nonzero term is not smaller than its predecessor."""
        nonzero = self.terms[self.terms != 0]
        return bool(nonzero.size >= 2 and nonzero[-1] >= nonzero[-2])

    def to_dict(self):
        return {
            "order": self.order,
            "M": self.M,
            "L": self.L.tolist(),
            "terms": self.terms.tolist(),
            "partialSums": self.partial_sums.tolist(),
            "tailSum": self.tail_sum,
            "bandLimit": self.band_limit,
            "growing": self.growing,
        }


def _classify(mode, y0: GridFunction, y1: GridFunction, u2, tol, denominator_scale):
    denominator = y1.final
    numerator = float(u2) - y0.final
    if abs(denominator) > tol * denominator_scale:
        c = numerator / denominator
        return y0 + c * y1, BvpModeReport(mode, denominator, numerator, c, UNIQUE)
    numerator_scale = max(1.0, abs(float(u2)), y0.max_abs())
    status = NONUNIQUE if abs(numerator) <= tol * numerator_scale else UNSOLVABLE
    if status == UNSOLVABLE:
        logger.warning(
            "Mode %d unsolvable: denominator %.3e, numerator %.3e", mode, denominator, numerator
        )
    return y0, BvpModeReport(mode, denominator, numerator, 0.0, status)


def _bvp2_parts(lam, h: Kernel, u0, f: GridFunction):
    grid = f.grid
    rk = resolvent(lift1(h.trace), lam, source=h.trace)
    t = grid.sample(lambda t: t)
    base = float(u0) + lift1(f)
    y0 = base + rk.lam * convolve(rk.k, base)
    y1 = t + rk.lam * convolve(rk.k, t)
    scale = max(grid.horizon, abs(rk.lam) * integral(rk.k.with_values(np.abs(rk.k.values))) * grid.horizon)
    return y0, y1, scale


def bvp2_denominator(lam, h: Kernel) -> float:
    """T + lambda int_0^T k(T-s) s ds."""
    _, y1, _ = _bvp2_parts(lam, h, 0.0, h.grid.zeros())
    return y1.final


def solve_mode_bvp2(
    lam: float, h: Kernel, u0: float, u2: float, f: GridFunction, tol: float = DEFAULT_TOL, mode: int = 1
) -> Tuple[GridFunction, BvpModeReport]:
    """One mode of u'' = lambda h*u + f with u(0)=u0, u(T)=u2."""
    y0, y1, scale = _bvp2_parts(lam, h, u0, f)
    return _classify(mode, y0, y1, u2, tol, scale)


def _bvp2_velocity_parts(lam, h: Kernel, u1, f: GridFunction):
    grid = f.grid
    rk = resolvent(lift1(h.trace), lam, source=h.trace)
    base = float(u1) * grid.sample(lambda t: t) + lift1(f)
    ones = grid.constant(1.0)
    y0 = base + rk.lam * convolve(rk.k, base)
    y1 = ones + rk.lam * convolve(rk.k, ones)
    scale = max(1.0, abs(rk.lam) * integral(rk.k.with_values(np.abs(rk.k.values))))
    return y0, y1, scale


def bvp2_velocity_denominator(lam, h: Kernel) -> float:
    """1 + lambda int_0^T k(s) ds."""
    _, y1, _ = _bvp2_velocity_parts(lam, h, 0.0, h.grid.zeros())
    return y1.final


def solve_mode_bvp2_velocity(
    lam: float, h: Kernel, u1: float, u2: float, f: GridFunction, tol: float = DEFAULT_TOL, mode: int = 1
) -> Tuple[GridFunction, BvpModeReport]:
    """One mode of u'' = lambda h*u + f with u'(0)=u1, u(T)=u2; c is the recovered u(0)."""
    y0, y1, scale = _bvp2_velocity_parts(lam, h, u1, f)
    return _classify(mode, y0, y1, u2, tol, scale)


def _bvp1_parts(lam, l: Kernel, f: GridFunction):
    if abs(l.initial_value) > L0_TOL:
        raise SolverError(
            f"First-order kernel must satisfy l(0)=0, got l(0)={l.initial_value:.3e}.",
            {"l0": l.initial_value},
        )
    rk = resolvent(cumulative(l.trace), lam, source=l.trace)
    forcing = cumulative(f)
    ones = f.grid.constant(1.0)
    y0 = forcing + rk.lam * convolve(rk.k, forcing)
    y1 = ones + rk.lam * convolve(rk.k, ones)
    scale = max(1.0, abs(rk.lam) * integral(rk.k.with_values(np.abs(rk.k.values))))
    return y0, y1, scale


def bvp1_denominator(lam, l: Kernel) -> float:
    """1 + lambda int_0^T k(s) ds."""
    _, y1, _ = _bvp1_parts(lam, l, l.grid.zeros())
    return y1.final


def solve_mode_bvp1(
    lam: float, l: Kernel, f: GridFunction, u2: float, tol: float = DEFAULT_TOL, mode: int = 1
) -> Tuple[GridFunction, BvpModeReport]:
    """One mode of u' = lambda l*u + f with u(T)=u2; c is the recovered u(0)."""
    y0, y1, scale = _bvp1_parts(lam, l, f)
    return _classify(mode, y0, y1, u2, tol, scale)


def _solve_all(data: ModalProblemData, solve_mode, workers):
    if any(lam <= 0 for lam in data.op.eigenvalues):
        logger.warning("Nonpositive eigenvalues present; positivity does not guarantee uniqueness.")
    results = map_modes(solve_mode, data.mode_count, workers)
    reports = [report for _, report in results]
    solution = ModalSolution(data.op, tuple(trace for trace, _ in results))
    offending = [report.mode for report in reports if report.status == UNSOLVABLE]
    if offending:
        raise SolverError(
            f"Mixed problem unsolvable for modes {offending}: the solvability denominator "
            "vanishes while the numerator does not.",
            {"modes": offending, "reports": [report.to_dict() for report in reports]},
        )
    return solution, reports


def _require_left(left):
    if left not in LEFT_CONDITIONS:
        raise ValueError(f"Unknown left condition {left!r}; expected one of {LEFT_CONDITIONS}.")


def _solve_mode_bvp2_left(data: ModalProblemData, h: Kernel, slot, tol, left):
    lam, f, u2 = data.op.eigenvalues[slot], data.forcing[slot], data.u2[slot]
    if left == LEFT_VELOCITY:
        return solve_mode_bvp2_velocity(lam, h, data.u1[slot], u2, f, tol, slot + 1)
    return solve_mode_bvp2(lam, h, data.u0[slot], u2, f, tol, slot + 1)


def solve_bvp2(
    data: ModalProblemData, h: Kernel, tol: float = DEFAULT_TOL, workers: int = 1, left: str = LEFT_VALUE
) -> Tuple[ModalSolution, List[BvpModeReport]]:
    """u'' = h*Au + f, u(T)=u2, and u(0)=u0 (left="value") or u'(0)=u1 (left="velocity")."""
    _require_left(left)

    def solve(slot):
        return _solve_mode_bvp2_left(data, h, slot, tol, left)

    return _solve_all(data, solve, workers)


def solve_bvp1(
    data: ModalProblemData, l: Kernel, tol: float = DEFAULT_TOL, workers: int = 1
) -> Tuple[ModalSolution, List[BvpModeReport]]:
    """u' = l*Au + f, u(T)=u2, l(0)=0."""

    def solve(slot):
        return solve_mode_bvp1(data.op.eigenvalues[slot], l, data.forcing[slot], data.u2[slot], tol, slot + 1)

    return _solve_all(data, solve, workers)


@dataclass
class SignConditionReport:
    """Node-wise verdicts of the two sufficient sign conditions."""

    name: str
    first: np.ndarray
    second: np.ndarray
    provenance: dict

    @property
    def first_holds(self):
        return bool(np.all(self.first))

    @property
    def second_holds(self):
        return bool(np.all(self.second))

    @property
    def holds(self):
        return self.first_holds and self.second_holds

    def to_dict(self):
        return {
            "name": self.name,
            "holds": self.holds,
            "firstHolds": self.first_holds,
            "secondHolds": self.second_holds,
            "firstFailures": int(np.count_nonzero(~self.first)),
            "secondFailures": int(np.count_nonzero(~self.second)),
            "provenance": self.provenance,
        }


def _sign_report(name, first, second, provenance):
    return SignConditionReport(name, np.asarray(first, dtype=bool), np.asarray(second, dtype=bool), provenance)


def _require_matching(g, fphi):
    if fphi.grid != g.grid:
        raise ValueError("(f'(t),phi) must be sampled on the measurement grid.")


def check_sign_conditions2(g, fphi: GridFunction, lambda0: float) -> SignConditionReport:
    """g(0)g'(t) < 0 and lambda0 g(0)[g'''(t) - lambda0 g'(t) - (f'(t),phi)] > 0."""
    _require_matching(g, fphi)
    g1, p1 = g.derivative(1)
    g3, p3 = g.derivative(3)
    g0 = g.g.initial
    first = g0 * g1.values < 0
    second = lambda0 * g0 * (g3.values - lambda0 * g1.values - fphi.values) > 0
    return _sign_report("second-order", first, second, {"g1": p1, "g3": p3})


def check_sign_conditions1(g, fphi: GridFunction, lambda0: float) -> SignConditionReport:
    """g(0)g'(t) < 0 and lambda0 g(0)[g''(t) - (f'(t),phi)] > 0."""
    _require_matching(g, fphi)
    g1, p1 = g.derivative(1)
    g2, p2 = g.derivative(2)
    g0 = g.g.initial
    first = g0 * g1.values < 0
    second = lambda0 * g0 * (g2.values - fphi.values) > 0
    return _sign_report("first-order", first, second, {"g1": p1, "g2": p2})


def convergence_diagnostic(
    data: ModalProblemData, h: Kernel, which: str = ORDER2, tol: float = DEFAULT_TOL, left: str = LEFT_VALUE
) -> ConvergenceReport:
    """Per-mode L_j and terms L_j lambda_j^3 exp(2 lambda_j M T).

    For `order2`, L_j = u_j(0)^2 + T^2 u_j'(0)^2 + sup|1*1*f_j|^2 with the
    datum not prescribed by `left` taken from the solve. For `order1`, h
    is the first-order kernel l; M is taken from l' and the forcing term
    is 1*f.
    """
    data.op.require_positive()
    _require_left(left)
    grid = data.grid
    T = grid.horizon
    lambdas = np.asarray(data.op.eigenvalues)
    L = np.empty(data.mode_count)

    if which == ORDER2:
        M = bound_M(h.trace)
        for slot in range(data.mode_count):
            _, report = _solve_mode_bvp2_left(data, h, slot, tol, left)
            if left == LEFT_VELOCITY:
                value0, slope0 = report.c, data.u1[slot]
            else:
                value0, slope0 = data.u0[slot], report.c
            lifted = lift1(data.forcing[slot])
            L[slot] = value0**2 + T**2 * slope0**2 + lifted.max_abs() ** 2
    elif which == ORDER1:
        M = bound_M(h.prime())
        for slot in range(data.mode_count):
            _, report = solve_mode_bvp1(lambdas[slot], h, data.forcing[slot], data.u2[slot], tol, slot + 1)
            lifted = cumulative(data.forcing[slot])
            L[slot] = data.u2[slot] ** 2 + report.c**2 + lifted.max_abs() ** 2
    else:
        raise ValueError(f"Unknown problem order {which!r}; expected {ORDER1!r} or {ORDER2!r}.")

    with np.errstate(over="ignore", invalid="ignore"):
        terms = L * lambdas**3 * np.exp(2.0 * lambdas * M * T)
    terms = np.where(L == 0.0, 0.0, terms)
    return ConvergenceReport(which, T, M, lambdas, L, terms)


def u_bound_margins(sol: ModalSolution, report: ConvergenceReport) -> np.ndarray:
    """6 L_j [1 + 0.5 M T lambda_j exp(2 lambda_j M T)] (1+eps) - sup_t |u_j(t)|^2."""
    sup_sq = np.array([mode.max_abs() ** 2 for mode in sol.modes])
    lam, M, T = report.lambdas, report.M, report.horizon
    with np.errstate(over="ignore", invalid="ignore"):
        bound = 6.0 * report.L * (1.0 + 0.5 * M * T * lam * np.exp(2.0 * lam * M * T))
    bound = np.where(report.L == 0.0, 0.0, bound) * (1.0 + U_BOUND_SLACK)
    return bound - sup_sq


def check_u_bound(sol: ModalSolution, report: ConvergenceReport) -> bool:
    return bool(np.all(u_bound_margins(sol, report) >= 0.0))
