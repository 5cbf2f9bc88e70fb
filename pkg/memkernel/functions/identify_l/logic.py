"""Recover the first-order kernel l, and l(0) from the data alone."""
import sys

from memkernel.functions.common import (
    RunResult,
    build_grid,
    build_measurement,
    build_modal_data,
    build_operator,
    identification_input,
    script_main,
)
from memkernel.functions.identify_h.logic import report_kernel
from memkernel.identify import check_compatibility, identify_l, l0_from_data

KIND = "identify-l"


def run(params, out_dir):
    grid = build_grid(params)
    op = build_operator(params)
    data = build_modal_data(params, op, grid)
    inp = identification_input(params, data, build_measurement(params, grid))

    recovered = identify_l(inp)
    l0 = l0_from_data(inp)
    result = RunResult(KIND, out_dir)
    result.diagnostics["l0FromData"] = l0
    result.diagnostics["l0Recovered"] = recovered.initial_value
    result.summary.append(f"l(0) from data: {l0:.6e}, recovered l(0): {recovered.initial_value:.6e}")
    compatibility = check_compatibility(inp, data, params.get("checkMode"))
    return report_kernel(result, recovered, params, grid, compatibility)


def main(argv=None):
    return script_main(__file__, run, argv)


if __name__ == "__main__":
    sys.exit(main())
