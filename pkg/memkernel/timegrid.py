"""Uniform time grids, sampled functions and the quadratures built on them.

All convolutions use trapezoidal product integration,

    (a*b)(t_n) ~ dt * [a_n b_0 / 2 + sum_{i=1}^{n-1} a_{n-i} b_i + a_0 b_n / 2],

which is second-order accurate, symmetric in its arguments and exact for
constant integrands.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

# Minimum step counts for differentiate(); index = derivative order.
_MIN_STEPS = {1: 4, 2: 4, 3: 6}


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_n = n * T / N on [0, T]."""

    horizon: float
    steps: int

    def __post_init__(self):
        if not np.isfinite(self.horizon) or self.horizon <= 0:
            raise ValueError(f"Grid horizon must be positive, got {self.horizon}.")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"Grid needs at least 2 steps, got {self.steps}.")
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def dt(self):
        return self.horizon / self.steps

    @property
    def size(self):
        return self.steps + 1

    @property
    def nodes(self):
        nodes = np.arange(self.size) * self.dt
        nodes[-1] = self.horizon
        return nodes

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        values = np.broadcast_to(np.asarray(func(self.nodes), dtype=float), (self.size,))
        return GridFunction(self, values)

    def constant(self, value: float) -> "GridFunction":
        return GridFunction(self, np.full(self.size, float(value)))

    def zeros(self) -> "GridFunction":
        return self.constant(0.0)

    def refined(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.horizon, self.steps * factor)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples of a function at every node of a TimeGrid (read-only)."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != (self.grid.size,):
            raise ValueError(
                f"Expected {self.grid.size} samples for a {self.grid.steps}-step grid, "
                f"got shape {values.shape}."
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Grid function values must be finite.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.grid.size

    def __getitem__(self, index):
        return self.values[index]

    @property
    def initial(self):
        return float(self.values[0])

    @property
    def final(self):
        return float(self.values[-1])

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def _other_values(self, other):
        if isinstance(other, GridFunction):
            _require_same_grid(self, other)
            return other.values
        return float(other)

    def __add__(self, other):
        return self.with_values(self.values + self._other_values(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_values(self.values - self._other_values(other))

    def __rsub__(self, other):
        return self.with_values(self._other_values(other) - self.values)

    def __mul__(self, scalar):
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self.with_values(self.values / float(scalar))

    def __neg__(self):
        return self.with_values(-self.values)


@dataclass(frozen=True)
class Kernel:
    """A grid function playing the memory kernel h (second order) or l (first order).

    `derivative` optionally carries an analytic derivative trace; `provenance`
    records where the samples came from (e.g. "analytic", "csv",
    "identified:finite-difference").
    """

    trace: GridFunction
    role: str = "h"
    derivative: Optional[GridFunction] = None
    provenance: str = "given"

    def __post_init__(self):
        if self.role not in ("h", "l"):
            raise ValueError(f"Kernel role must be 'h' or 'l', got {self.role!r}.")
        if self.derivative is not None:
            _require_same_grid(self.trace, self.derivative)

    @property
    def grid(self):
        return self.trace.grid

    @property
    def initial_value(self):
        return self.trace.initial

    def is_nonnegative(self, slack=1e-10):
        return bool(np.min(self.trace.values) >= -slack)

    def prime(self) -> GridFunction:
        """Analytic derivative when supplied, second-order differences otherwise."""
        if self.derivative is not None:
            return self.derivative
        return differentiate(self.trace, 1)


def _require_same_grid(a: GridFunction, b: GridFunction):
    if a.grid != b.grid:
        raise ValueError(f"Grid mismatch: {a.grid} vs {b.grid}.")


def convolve(a: GridFunction, b: GridFunction) -> GridFunction:
    """Trapezoidal product quadrature of (a*b)(t) = int_0^t a(t-s) b(s) ds."""
    _require_same_grid(a, b)
    x, y = a.values, b.values
    full = np.convolve(x, y)[: a.grid.size]
    values = a.grid.dt * (full - 0.5 * x * y[0] - 0.5 * x[0] * y)
    values[0] = 0.0
    return a.with_values(values)


def lift1(r: GridFunction) -> GridFunction:
    """r^(1)(t) = int_0^t (t-s) r(s) ds, i.e. the convolution of r with t."""
    return convolve(r.grid.sample(lambda t: t), r)


def cumulative(r: GridFunction) -> GridFunction:
    """(1*r)(t) = int_0^t r(s) ds by the cumulative trapezoid rule."""
    return r.with_values(cumulative_trapezoid(r.values, dx=r.grid.dt, initial=0.0))


def integral(r: GridFunction) -> float:
    return float(trapezoid(r.values, dx=r.grid.dt))


def differentiate(g: GridFunction, order: int = 1) -> GridFunction:
    """Second-order finite differences: central inside, one-sided at the ends."""
    if order not in _MIN_STEPS:
        raise ValueError(f"Derivative order must be 1, 2 or 3, got {order}.")
    steps = g.grid.steps
    if steps < _MIN_STEPS[order]:
        raise ValueError(
            f"Grid with {steps} steps is too coarse for a derivative of order {order} "
            f"(needs {_MIN_STEPS[order]})."
        )
    v, dt = g.values, g.grid.dt

    if order == 1:
        return g.with_values(np.gradient(v, dt, edge_order=2))

    out = np.empty_like(v)
    if order == 2:
        out[1:-1] = v[2:] - 2.0 * v[1:-1] + v[:-2]
        out[0] = 2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]
        out[-1] = 2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]
        return g.with_values(out / dt**2)

    forward = np.array([-2.5, 9.0, -12.0, 7.0, -1.5])
    out[2:-2] = 0.5 * (v[4:] - 2.0 * v[3:-1] + 2.0 * v[1:-3] - v[:-4])
    out[0] = forward @ v[0:5]
    out[1] = forward @ v[1:6]
    out[-1] = -forward @ v[-1:-6:-1]
    out[-2] = -forward @ v[-2:-7:-1]
    return g.with_values(out / dt**3)
