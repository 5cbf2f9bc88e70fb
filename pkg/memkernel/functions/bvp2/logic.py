"""u'' = h*Au + f with u(T)=u2 and either u(0)=u0 or u'(0)=u1.

Besides the modal solution the run reports the per-mode solvability
denominators, the convergence diagnostic, the resolvent bounds of the
measured mode, the sign conditions on g and the kernel recovered back
from the computed measurement.
"""
import logging
import sys

import numpy as np

from memkernel.bvp import (
    LEFT_VALUE,
    ORDER2,
    check_sign_conditions2,
    convergence_diagnostic,
    solve_bvp2,
    u_bound_margins,
)
from memkernel.direct import measure
from memkernel.errors import SolverError
from memkernel.functions.common import (
    RunResult,
    build_grid,
    build_kernel,
    build_modal_data,
    build_operator,
    identification_input,
    kernel_error,
    script_main,
    write_solution,
)
from memkernel.identify import identify_h
from memkernel.timegrid import lift1
from memkernel.volterra import bound_M, check_bounds, resolvent

logger = logging.getLogger(__name__)

KIND = "bvp2"


def mixed_diagnostics(data, kernel, sol, which, tolerance, left=LEFT_VALUE):
    """Convergence diagnostic and u-bound margins when every eigenvalue is positive."""
    if any(lam <= 0 for lam in data.op.eigenvalues):
        logger.info("Skipping the convergence diagnostic: nonpositive eigenvalues.")
        return None
    report = convergence_diagnostic(data, kernel, which, tolerance, left)
    margins = u_bound_margins(sol, report)
    out = report.to_dict()
    out["uBoundMargins"] = margins.tolist()
    out["uBoundHolds"] = bool(np.all(margins >= 0.0))
    return out


def recover_kernel(identify, params, data, sol, reference):
    """Identify the kernel back from the computed measurement."""
    try:
        recovered = identify(identification_input(params, data, measure(sol)))
    except SolverError as e:
        logger.info("Kernel recovery skipped: %s", e)
        return None, {"skipped": str(e)}
    return recovered, {"maxError": kernel_error(recovered, reference), "provenance": recovered.provenance}


def run(params, out_dir):
    grid = build_grid(params)
    op = build_operator(params)
    data = build_modal_data(params, op, grid)
    h = build_kernel(params, grid, "h")
    tolerance = params.get("tolerance")

    left = params.get("leftCondition", LEFT_VALUE)
    sol, reports = solve_bvp2(data, h, tolerance, workers=params.get("workers", 1), left=left)
    result = RunResult(KIND, out_dir, observable=sol.as_array()[:, grid.steps // 2])
    write_solution(result, sol)

    slot = op.measure_slot
    rk = resolvent(lift1(h.trace), op.lambda0, source=h.trace)
    bounds = check_bounds(rk, bound_M(h.trace))
    signs = check_sign_conditions2(measure(sol), data.forcing_derivative(slot), op.lambda0)
    recovered, recovery = recover_kernel(identify_h, params, data, sol, h)
    if recovered is not None:
        result.error = recovery["maxError"]

    result.diagnostics = {
        "modes": [report.to_dict() for report in reports],
        "leftCondition": left,
        "convergence": mixed_diagnostics(data, h, sol, ORDER2, tolerance, left),
        "resolventBounds": bounds.to_dict(),
        "signConditions": signs.to_dict(),
        "kernelRecovery": recovery,
    }
    result.summary = [f"mode {r.mode}: {r.status}, denominator {r.denominator:.6e}, c {r.c:.6e}" for r in reports]
    result.summary.append(f"resolvent bounds on the measured mode hold: {bounds.holds}")
    result.summary.append(f"sign conditions hold: {signs.holds}")
    if recovered is not None:
        result.summary.append(f"max kernel error after recovery: {result.error:.3e}")
    return result


def main(argv=None):
    return script_main(__file__, run, argv)


if __name__ == "__main__":
    sys.exit(main())
