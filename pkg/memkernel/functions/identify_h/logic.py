"""Recover h from g(t) = (u(t), phi), psi = (f, phi) and lambda0."""
import sys

import numpy as np

from memkernel import csvio
from memkernel.functions.common import (
    RunResult,
    build_grid,
    build_kernel,
    build_measurement,
    build_modal_data,
    build_operator,
    identification_input,
    kernel_error,
    script_main,
)
from memkernel.identify import check_compatibility, identify_h, identify_h_firstkind

KIND = "identify-h"
SECOND_KIND = "secondKind"
FIRST_KIND = "firstKind"


def kernel_observable(kernel):
    """Kernel samples at t = T/2 and t = T, comparable across refinements."""
    values = kernel.trace.values
    return np.array([values[kernel.grid.steps // 2], values[-1]])


def report_kernel(result, recovered, params, grid, compatibility):
    """Shared tail of the identification kinds: CSV, reference error, diagnostics."""
    csvio.write_kernel(result.path("kernel.csv"), recovered)
    result.observable = kernel_observable(recovered)
    result.diagnostics["kernelProvenance"] = recovered.provenance
    result.diagnostics["compatibility"] = compatibility.to_dict()
    result.summary.append(f"recovered {recovered.role}({grid.horizon}) = {recovered.trace.final:.17g}")
    result.summary.append(f"compatibility checks pass: {compatibility.passed}")
    if params.get("referenceKernel"):
        reference = build_kernel(params, grid, recovered.role)
        result.error = kernel_error(recovered, reference)
        result.diagnostics["maxKernelError"] = result.error
        result.summary.append(f"max kernel error: {result.error:.3e}")
    return result


def run(params, out_dir):
    grid = build_grid(params)
    op = build_operator(params)
    data = build_modal_data(params, op, grid)
    inp = identification_input(params, data, build_measurement(params, grid))

    route = params.get("route", SECOND_KIND)
    recovered = identify_h_firstkind(inp) if route == FIRST_KIND else identify_h(inp)
    result = RunResult(KIND, out_dir)
    result.diagnostics["route"] = route
    result.summary.append(f"route: {route}")
    compatibility = check_compatibility(inp, data, params.get("checkMode"))
    return report_kernel(result, recovered, params, grid, compatibility)


def main(argv=None):
    return script_main(__file__, run, argv)


if __name__ == "__main__":
    sys.exit(main())
