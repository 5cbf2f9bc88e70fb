"""Round trip for u'' = A0 u + h*Au + f when phi is also an eigenvector of A0*.

The additional datum g0 = (u, A0* phi) is either measured from the synthetic
solution or replaced by lambda00 * g.
"""
import sys

from memkernel import csvio
from memkernel.direct import measure, measure_A0, solve_ivp2
from memkernel.errors import ConfigError
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
from memkernel.functions.identify_h.logic import kernel_observable
from memkernel.identify import identify_h_ip0

KIND = "ip0"
MEASURED = "measured"
EIGENVALUE = "eigenvalue"


def run(params, out_dir):
    grid = build_grid(params)
    op = build_operator(params)
    data = build_modal_data(params, op, grid)
    data.require_measurable()
    if data.zero_order is None:
        raise ConfigError("'zeroOrderEigenvalues' is required for the ip0 kind.")
    h = build_kernel(params, grid, "h")
    lambda00 = data.zero_order_at(op.measure_slot)
    configured = params.get("lambda00")
    if configured not in (None, "") and float(configured) != lambda00:
        raise ConfigError(
            f"'lambda00'={configured} differs from the zero-order eigenvalue {lambda00} of the measured mode."
        )

    sol = solve_ivp2(data, h, workers=params.get("workers", 1))
    g0 = measure_A0(sol, lambda00).g if params.get("zeroOrderDatum") == MEASURED else None
    inp = identification_input(dict(params, lambda00=lambda00), data, measure(sol), g0=g0)
    recovered = identify_h_ip0(inp)

    result = RunResult(KIND, out_dir, error=kernel_error(recovered, h), observable=kernel_observable(recovered))
    write_solution(result, sol)
    csvio.write_kernel(result.path("kernel.csv"), recovered)
    result.diagnostics = {
        "lambda00": lambda00,
        "zeroOrderDatum": params.get("zeroOrderDatum"),
        "maxKernelError": result.error,
        "kernelProvenance": recovered.provenance,
    }
    result.summary = [
        f"lambda00: {lambda00}, g0 from: {params.get('zeroOrderDatum')}",
        f"max kernel error: {result.error:.3e}",
    ]
    return result


def main(argv=None):
    return script_main(__file__, run, argv)


if __name__ == "__main__":
    sys.exit(main())
