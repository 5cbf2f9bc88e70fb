"""Synthesize g from a known kernel, identify the kernel back, report the error."""
import sys

from memkernel import csvio
from memkernel.direct import measure, solve_ivp1, solve_ivp2
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
from memkernel.functions.identify_h.logic import FIRST_KIND, kernel_observable
from memkernel.identify import (
    FIRST_ORDER,
    SECOND_ORDER,
    check_compatibility,
    identify_h,
    identify_h_firstkind,
    identify_l,
)

KIND = "roundtrip"
SECOND_ORDER_EQUATION = "secondOrder"
FIRST_ORDER_EQUATION = "firstOrder"


def run(params, out_dir):
    grid = build_grid(params)
    op = build_operator(params)
    data = build_modal_data(params, op, grid)
    data.require_measurable()
    workers = params.get("workers", 1)
    route = params.get("route")

    if params.get("equation") == FIRST_ORDER_EQUATION:
        true_kernel = build_kernel(params, grid, "l")
        sol = solve_ivp1(data, true_kernel, workers=workers)
        inp = identification_input(params, data, measure(sol))
        recovered = identify_l(inp)
        mode = FIRST_ORDER
    else:
        true_kernel = build_kernel(params, grid, "h")
        sol = solve_ivp2(data, true_kernel, workers=workers)
        inp = identification_input(params, data, measure(sol))
        recovered = identify_h_firstkind(inp) if route == FIRST_KIND else identify_h(inp)
        mode = SECOND_ORDER

    result = RunResult(KIND, out_dir, error=kernel_error(recovered, true_kernel), observable=kernel_observable(recovered))
    write_solution(result, sol)
    csvio.write_kernel(result.path("kernel.csv"), recovered)
    compatibility = check_compatibility(inp, data, mode)
    result.diagnostics = {
        "equation": params.get("equation"),
        "route": route,
        "maxKernelError": result.error,
        "kernelProvenance": recovered.provenance,
        "compatibility": compatibility.to_dict(),
    }
    result.summary = [
        f"equation: {params.get('equation')}, route: {route}, steps: {grid.steps}",
        f"max kernel error: {result.error:.3e}",
        f"compatibility checks pass: {compatibility.passed}",
    ]
    return result


def main(argv=None):
    return script_main(__file__, run, argv)


if __name__ == "__main__":
    sys.exit(main())
