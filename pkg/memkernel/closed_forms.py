"""The catalogue of named closed forms used for kernels and forcing.

Every form is evaluated on a TimeGrid together with derivatives up to
third order, so callers can pass analytic traces instead of differencing.

    const   {"value": c}                      c
    linear  {"a": a, "b": b}                  a + b t
    poly    {"coeffs": [c0, c1, ...]}         c0 + c1 t + c2 t^2 + ...
    exp     {"a": a, "b": b}                  a exp(b t)
    sin     {"a": a, "w": w, "phase": p}      a sin(w t + p)
"""
from typing import Mapping, Sequence, Union

import numpy as np
from numpy.polynomial import Polynomial

from .timegrid import GridFunction, TimeGrid

MAX_ORDER = 3

_PARAMETERS = {
    "const": ("value",),
    "linear": ("a", "b"),
    "poly": ("coeffs",),
    "exp": ("a", "b"),
    "sin": ("a", "w", "phase"),
}
_DEFAULTS = {"phase": 0.0, "b": 0.0}

FORMS = tuple(_PARAMETERS)

Params = Union[Mapping[str, object], Sequence[object], None]


def normalize(form: str, params: Params) -> dict:
    """Named parameters of a form; positional lists are matched in catalogue order."""
    if form not in _PARAMETERS:
        raise ValueError(f"Unknown closed form {form!r}; expected one of {FORMS}.")
    names = _PARAMETERS[form]
    if params is None:
        params = {}
    if not isinstance(params, Mapping):
        params = list(params)
        if form == "poly":
            params = {"coeffs": params}
        else:
            if len(params) > len(names):
                raise ValueError(f"{form} takes at most {len(names)} parameters, got {len(params)}.")
            params = dict(zip(names, params))
    unknown = set(params) - set(names)
    if unknown:
        raise ValueError(f"Unknown parameters {sorted(unknown)} for closed form {form!r}.")
    out = {}
    for name in names:
        if name in params:
            value = params[name]
        elif name in _DEFAULTS:
            value = _DEFAULTS[name]
        else:
            raise ValueError(f"Closed form {form!r} needs parameter {name!r}.")
        out[name] = [float(c) for c in value] if name == "coeffs" else float(value)
    if form == "poly" and not out["coeffs"]:
        raise ValueError("poly needs at least one coefficient.")
    return out


def _values(form, p, t, order):
    if form == "const":
        return np.full_like(t, p["value"] if order == 0 else 0.0)
    if form == "linear":
        if order == 0:
            return p["a"] + p["b"] * t
        return np.full_like(t, p["b"] if order == 1 else 0.0)
    if form == "poly":
        return Polynomial(p["coeffs"]).deriv(order)(t)
    if form == "exp":
        return p["a"] * p["b"] ** order * np.exp(p["b"] * t)
    # d^k/dt^k sin(wt + p) = w^k sin(wt + p + k pi/2)
    return p["a"] * p["w"] ** order * np.sin(p["w"] * t + p["phase"] + 0.5 * order * np.pi)


def evaluate(form: str, params: Params, grid: TimeGrid, order: int = 0) -> GridFunction:
    """Samples of the order-th derivative of the named form."""
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"Closed-form derivatives go up to order {MAX_ORDER}, got {order}.")
    p = normalize(form, params)
    return grid.sample(lambda t: _values(form, p, np.asarray(t, dtype=float), order))


def evaluate_all(form: str, params: Params, grid: TimeGrid):
    """(f, f', f'', f''') as GridFunctions."""
    return tuple(evaluate(form, params, grid, order) for order in range(MAX_ORDER + 1))
