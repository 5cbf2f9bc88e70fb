"""Recovery of the memory kernel from the measurement g(t) = (u(t), phi).

Projecting the equation onto phi gives g'' - lambda0 h*g = psi, a
first-kind Volterra equation h*g = p for the kernel. Differentiating once
turns it into g(0) h + g' * h = p', which is marched forward. The
first-order equation yields g(0) l + g' * l = w' in the same way.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .direct import ANALYTIC, MeasurementTrace
from .errors import SolverError
from .spectral import ModalProblemData
from .timegrid import GridFunction, Kernel, cumulative, differentiate, lift1
from .volterra import solve_first_kind, solve_second_kind

logger = logging.getLogger(__name__)

G0_TOL = 1e-10
FINITE_DIFFERENCE = "finite-difference"

SECOND_ORDER = "second-order"
FIRST_ORDER = "first-order"
BVP_FIRST_ORDER = "bvp-first-order"
COMPATIBILITY_MODES = (SECOND_ORDER, FIRST_ORDER, BVP_FIRST_ORDER)

EQUAL = "equal"
NONZERO = "nonzero"


@dataclass(frozen=True)
class IdentificationInput:
    """Data for kernel recovery: g, psi = (f, phi), lambda0 and the IP0 extras."""

    g: MeasurementTrace
    psi: GridFunction
    lambda0: float
    g0: Optional[GridFunction] = None
    lambda00: Optional[float] = None
    fprime0phi: float = 0.0
    psi_prime: Optional[GridFunction] = None

    def __post_init__(self):
        if self.lambda0 == 0:
            raise ValueError("lambda0 must be nonzero.")
        if self.psi.grid != self.g.grid:
            raise ValueError("psi must be sampled on the measurement grid.")
        for name in ("g0", "psi_prime"):
            trace = getattr(self, name)
            if trace is not None and trace.grid != self.g.grid:
                raise ValueError(f"{name} must be sampled on the measurement grid.")

    @property
    def grid(self):
        return self.g.grid

    def psi_derivative(self):
        if self.psi_prime is not None:
            return self.psi_prime, ANALYTIC
        return differentiate(self.psi, 1), FINITE_DIFFERENCE


@dataclass
class CompatibilityCheck:
    name: str
    expected: float
    actual: float
    tolerance: float
    relation: str = EQUAL

    @property
    def defect(self):
        return abs(self.expected - self.actual)

    @property
    def passed(self):
        if self.relation == NONZERO:
            return abs(self.actual) > self.tolerance
        return self.defect <= self.tolerance

    def to_dict(self):
        return {
            "name": self.name,
            "relation": self.relation,
            "expected": self.expected,
            "actual": self.actual,
            "defect": self.defect,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class CompatibilityReport:
    mode: str
    checks: List[CompatibilityCheck] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def failures(self):
        return [check for check in self.checks if not check.passed]

    def by_name(self, name) -> CompatibilityCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self):
        return {
            "mode": self.mode,
            "pass": self.passed,
            "checks": [check.to_dict() for check in self.checks],
            "provenance": self.provenance,
        }


def _require_g0(g: MeasurementTrace):
    g0 = g.g.initial
    if abs(g0) < G0_TOL * max(1.0, g.g.max_abs()):
        raise SolverError(
            f"(u_0,phi)=0 violates condition (1.7): g(0)={g0:.3e}, identification needs g(0) != 0.",
            {"g0": g0},
        )
    return g0


def _march_kernel(inp: IdentificationInput, rhs_prime: GridFunction, role, provenance) -> Kernel:
    g0 = _require_g0(inp.g)
    g1, p1 = inp.g.derivative(1)
    if inp.g.source == ANALYTIC and inp.g.g1 is not None:
        defect = inp.g.consistency_defect()
        logger.debug("Analytic derivative consistency defect: %.3e", defect)
    trace = solve_second_kind(g0, g1, rhs_prime)
    label = ANALYTIC if provenance == ANALYTIC and p1 == ANALYTIC else FINITE_DIFFERENCE
    return Kernel(trace, role=role, provenance=f"identified:{label}")


def _source_prime(inp: IdentificationInput, zero_order_prime: Optional[GridFunction] = None):
    """(g''' - g0' - psi')/lambda0, from analytic traces or one stencil each."""
    g3, p3 = inp.g.derivative(3)
    psi1, pp = inp.psi_derivative()
    numerator = g3 - psi1
    if zero_order_prime is not None:
        numerator = numerator - zero_order_prime
    provenance = ANALYTIC if p3 == ANALYTIC and pp == ANALYTIC else FINITE_DIFFERENCE
    return numerator / inp.lambda0, provenance


def identify_h(inp: IdentificationInput) -> Kernel:
    """Solve g(0) h + g' * h = p' with p = (g'' - psi)/lambda0."""
    _require_g0(inp.g)
    p_prime, provenance = _source_prime(inp)
    return _march_kernel(inp, p_prime, "h", provenance)


def _zero_order_trace(inp: IdentificationInput):
    """g0(t) and its derivative, from the datum or from lambda00 * g."""
    if inp.g0 is not None:
        return inp.g0, differentiate(inp.g0, 1), FINITE_DIFFERENCE
    if inp.lambda00 is None:
        raise ValueError("IP0 identification needs the datum g0 or the eigenvalue lambda00.")
    g1, p1 = inp.g.derivative(1)
    return inp.lambda00 * inp.g.g, inp.lambda00 * g1, p1


def identify_h_ip0(inp: IdentificationInput) -> Kernel:
    """Same pipeline as identify_h with q = (g'' - g0 - psi)/lambda0."""
    _require_g0(inp.g)
    _, g0_prime, p0 = _zero_order_trace(inp)
    q_prime, provenance = _source_prime(inp, g0_prime)
    if p0 != ANALYTIC:
        provenance = FINITE_DIFFERENCE
    return _march_kernel(inp, q_prime, "h", provenance)


def _extrapolate_ends(values: np.ndarray) -> np.ndarray:
    """Replace the two nodes at each end by the quadratic through the next three."""
    out = values.copy()
    out[1] = 3.0 * out[2] - 3.0 * out[3] + out[4]
    out[0] = 6.0 * out[2] - 8.0 * out[3] + 3.0 * out[4]
    out[-2] = 3.0 * out[-3] - 3.0 * out[-4] + out[-5]
    out[-1] = 6.0 * out[-3] - 8.0 * out[-4] + 3.0 * out[-5]
    return out


def identify_h_firstkind(inp: IdentificationInput) -> Kernel:
    """Solve g * h1 = [g - g(0) - t g'(0) - psi^(1)]/lambda0 and return h = h1''.

    The right side's derivative is assembled as [g' - g'(0) - 1*psi]/lambda0
    instead of differencing the right side itself.
    """
    g0 = _require_g0(inp.g)
    grid = inp.grid
    if grid.steps < 8:
        raise ValueError(f"The first-kind route needs at least 8 steps, got {grid.steps}.")
    g1, p1 = inp.g.derivative(1)
    t = grid.sample(lambda t: t)
    rhs = (inp.g.g - g0 - g1.initial * t - lift1(inp.psi)) / inp.lambda0
    rhs_prime = (g1 - g1.initial - cumulative(inp.psi)) / inp.lambda0
    h1 = solve_first_kind(inp.g.g, rhs, kernel_prime=g1, rhs_prime=rhs_prime)
    h = _extrapolate_ends(differentiate(h1, 2).values)
    return Kernel(grid.zeros().with_values(h), role="h", provenance=f"identified:first-kind:{p1}")


def identify_l(inp: IdentificationInput) -> Kernel:
    """Solve g(0) l + g' * l = w' with w = (g' - psi)/lambda0."""
    _require_g0(inp.g)
    g2, p2 = inp.g.derivative(2)
    psi1, pp = inp.psi_derivative()
    provenance = ANALYTIC if p2 == ANALYTIC and pp == ANALYTIC else FINITE_DIFFERENCE
    return _march_kernel(inp, (g2 - psi1) / inp.lambda0, "l", provenance)


def l0_from_data(inp: IdentificationInput) -> float:
    """l(0) = (g''(0) - (f'(0),phi)) / (g(0) lambda0)."""
    g0 = _require_g0(inp.g)
    g2, _ = inp.g.derivative(2)
    return (g2.initial - inp.fprime0phi) / (g0 * inp.lambda0)


def _derivative_tolerance(g: MeasurementTrace, order, tolerance):
    if tolerance is not None:
        return tolerance
    if g.analytic(order) is not None:
        return 1e-8 * max(1.0, g.g.max_abs())
    scale = max(1.0, g.g.max_abs())
    if g.grid.steps >= 6:
        scale = max(scale, differentiate(g.g, 3).max_abs())
    return 10.0 * g.grid.dt**2 * scale


def check_compatibility(
    inp: IdentificationInput, modal: ModalProblemData, mode: str = SECOND_ORDER, tolerance: Optional[float] = None
) -> CompatibilityReport:
    """Compare the measurement with the modal data it must reproduce."""
    if mode not in COMPATIBILITY_MODES:
        raise ValueError(f"Unknown compatibility mode {mode!r}; expected one of {COMPATIBILITY_MODES}.")
    g = inp.g
    slot = modal.op.measure_slot
    f_phi = modal.forcing[slot]
    exact_tol = tolerance if tolerance is not None else 1e-10 * max(1.0, g.g.max_abs())
    report = CompatibilityReport(mode)

    def add(name, expected, actual, tol, relation=EQUAL):
        report.checks.append(CompatibilityCheck(name, float(expected), float(actual), float(tol), relation))

    def derivative_at(order, index=0):
        trace, provenance = g.derivative(order)
        report.provenance[f"g{order}"] = provenance
        return trace[index], _derivative_tolerance(g, order, tolerance)

    if mode in (SECOND_ORDER, FIRST_ORDER):
        add("g(0)=(u0,phi)", modal.u0[slot], g.g.initial, exact_tol)
    if mode == SECOND_ORDER:
        value, tol = derivative_at(1)
        add("g'(0)=(u1,phi)", modal.u1[slot], value, tol)
        value, tol = derivative_at(2)
        add("g''(0)=(f(0),phi)", f_phi.initial, value, tol)
    else:
        value, tol = derivative_at(1)
        add("g'(0)=(f(0),phi)", f_phi.initial, value, tol)
    if mode == BVP_FIRST_ORDER:
        value, tol = derivative_at(2)
        add("g''(0)-(f'(0),phi)=0", 0.0, value - inp.fprime0phi, tol)
        add("g(T)=(u2,phi)", modal.u2[slot], g.g.final, exact_tol)
    add("g(0)!=0", 0.0, g.g.initial, G0_TOL * max(1.0, g.g.max_abs()), NONZERO)

    for failure in report.failures():
        logger.info("Compatibility check failed: %s (defect %.3e)", failure.name, failure.defect)
    return report
