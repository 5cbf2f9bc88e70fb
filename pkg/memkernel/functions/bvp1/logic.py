"""u' = l*Au + f with u(T)=u2 and l(0)=0; u(0) is recovered per mode."""
import sys

from memkernel.bvp import ORDER1, check_sign_conditions1, solve_bvp1
from memkernel.direct import measure
from memkernel.functions.bvp2.logic import mixed_diagnostics, recover_kernel
from memkernel.functions.common import (
    RunResult,
    build_grid,
    build_kernel,
    build_modal_data,
    build_operator,
    identification_input,
    script_main,
    write_solution,
)
from memkernel.identify import BVP_FIRST_ORDER, check_compatibility, identify_l

KIND = "bvp1"


def run(params, out_dir):
    grid = build_grid(params)
    op = build_operator(params)
    data = build_modal_data(params, op, grid)
    l = build_kernel(params, grid, "l")
    tolerance = params.get("tolerance")

    sol, reports = solve_bvp1(data, l, tolerance, workers=params.get("workers", 1))
    result = RunResult(KIND, out_dir, observable=sol.as_array()[:, 0])
    write_solution(result, sol)

    slot = op.measure_slot
    g = measure(sol)
    signs = check_sign_conditions1(g, data.forcing_derivative(slot), op.lambda0)
    compatibility = check_compatibility(identification_input(params, data, g), data, BVP_FIRST_ORDER)
    recovered, recovery = recover_kernel(identify_l, params, data, sol, l)
    if recovered is not None:
        result.error = recovery["maxError"]

    result.diagnostics = {
        "modes": [report.to_dict() for report in reports],
        "convergence": mixed_diagnostics(data, l, sol, ORDER1, tolerance),
        "signConditions": signs.to_dict(),
        "compatibility": compatibility.to_dict(),
        "kernelRecovery": recovery,
    }
    result.summary = [f"mode {r.mode}: {r.status}, denominator {r.denominator:.6e}, u(0) {r.c:.6e}" for r in reports]
    result.summary.append(f"sign conditions hold: {signs.holds}")
    result.summary.append(f"compatibility checks pass: {compatibility.passed}")
    if recovered is not None:
        result.summary.append(f"max kernel error after recovery: {result.error:.3e}")
    return result


def main(argv=None):
    return script_main(__file__, run, argv)


if __name__ == "__main__":
    sys.exit(main())
