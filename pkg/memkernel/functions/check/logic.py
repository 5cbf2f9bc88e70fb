"""Compatibility and sign-condition checks on synthetic measurements.

The direct problem selected by checkMode is solved, the measurement is
optionally shifted by a constant, and the resulting g is checked against
the modal data it must reproduce.
"""
import sys

from memkernel.bvp import check_sign_conditions1, check_sign_conditions2, solve_bvp1
from memkernel.direct import measure, solve_ivp1, solve_ivp2
from memkernel.functions.common import (
    RunResult,
    build_grid,
    build_kernel,
    build_modal_data,
    build_operator,
    identification_input,
    script_main,
)
from memkernel.identify import BVP_FIRST_ORDER, FIRST_ORDER, check_compatibility

KIND = "check"


def run(params, out_dir):
    grid = build_grid(params)
    op = build_operator(params)
    data = build_modal_data(params, op, grid)
    mode = params.get("checkMode")
    workers = params.get("workers", 1)

    if mode == BVP_FIRST_ORDER:
        sol, _ = solve_bvp1(data, build_kernel(params, grid, "l"), params.get("tolerance"), workers)
    elif mode == FIRST_ORDER:
        sol = solve_ivp1(data, build_kernel(params, grid, "l"), workers)
    else:
        sol = solve_ivp2(data, build_kernel(params, grid, "h"), workers)

    g = measure(sol).shifted(float(params.get("measurementShift") or 0.0))
    inp = identification_input(params, data, g)
    report = check_compatibility(inp, data, mode)
    fphi = data.forcing_derivative(op.measure_slot)
    if mode == FIRST_ORDER or mode == BVP_FIRST_ORDER:
        signs = check_sign_conditions1(g, fphi, op.lambda0)
    else:
        signs = check_sign_conditions2(g, fphi, op.lambda0)

    result = RunResult(KIND, out_dir, observable=g.g.values[[0, -1]])
    result.diagnostics = {"compatibility": report.to_dict(), "signConditions": signs.to_dict()}
    result.summary = [f"mode: {mode}"]
    for check in report.checks:
        verdict = "pass" if check.passed else "FAIL"
        result.summary.append(f"{check.name}: {verdict} (defect {check.defect:.3e}, tolerance {check.tolerance:.3e})")
    result.summary.append(f"sign conditions hold: {signs.holds}")
    return result


def main(argv=None):
    return script_main(__file__, run, argv)


if __name__ == "__main__":
    sys.exit(main())
