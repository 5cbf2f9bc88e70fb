"""u'' = A0 u + h*Au + f with u(0)=u0, u'(0)=u1."""
import sys

from memkernel.direct import acceleration_defect, measure, residual_ivp2, solve_ivp2
from memkernel.functions.common import (
    RunResult,
    build_grid,
    build_kernel,
    build_modal_data,
    build_operator,
    script_main,
    write_solution,
)

KIND = "ivp2"


def run(params, out_dir):
    grid = build_grid(params)
    op = build_operator(params)
    data = build_modal_data(params, op, grid)
    h = build_kernel(params, grid, "h")

    sol = solve_ivp2(data, h, workers=params.get("workers", 1))
    result = RunResult(KIND, out_dir, observable=sol.final_coefficients())
    write_solution(result, sol)

    g = measure(sol).g
    residual = residual_ivp2(sol, h, data)
    defect = acceleration_defect(sol, data)
    result.diagnostics = {
        "kernelProvenance": h.provenance,
        "residual": residual,
        "accelerationDefect": defect,
        "measurement": {"g0": g.initial, "gT": g.final},
    }
    result.summary = [
        f"modes: {op.mode_count}, steps: {grid.steps}, horizon: {grid.horizon}",
        f"max residual of u'' - h*Au - f: {residual:.3e}",
        f"u''(0) - f(0) defect: {defect:.3e}",
        f"g(T): {g.final:.17g}",
    ]
    return result


def main(argv=None):
    return script_main(__file__, run, argv)


if __name__ == "__main__":
    sys.exit(main())
