"""Shared plumbing for the function kinds: building solver inputs from a
params dict, writing artifacts and the standalone script entry point."""
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .. import closed_forms, csvio
from ..direct import ANALYTIC, MEASURED_SAMPLED, MeasurementTrace
from ..errors import ConfigError, SolverError
from ..identify import IdentificationInput
from ..spectral import (
    DIRICHLET_LAPLACIAN_1D,
    ModalProblemData,
    SpectralOperator,
    dirichlet_laplacian_1d,
    project,
    spatial_grid,
    synthesize,
    truncate_noisy,
)
from ..timegrid import Kernel, TimeGrid
from .schema import load_schema, parse_json_field, resolve

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "MEMKERNEL_OUTPUT_DIR"
# Run settings that must not change the bytes of any artifact.
NOT_ECHOED = ("outputDirectory", "workers")
FIELD_POINTS = 101

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_CONFIG = 3


@dataclass
class RunResult:
    """What a kind's run() produced; the CLI turns it into files."""

    kind: str
    out_dir: str
    diagnostics: dict = field(default_factory=dict)
    summary: List[str] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)
    error: Optional[float] = None
    observable: Optional[np.ndarray] = None

    def path(self, name):
        """Register an artifact and return where to write it."""
        if name not in self.artifacts:
            self.artifacts.append(name)
        return os.path.join(self.out_dir, name)

    def to_dict(self):
        return {
            "kind": self.kind,
            "outputDirectory": self.out_dir,
            "artifacts": self.artifacts + ["diagnostics.json", "summary.txt", "manifest.json"],
            "error": self.error,
            "summary": self.summary,
        }


def get_file_path(params, base_name):
    """The configured file path for `base_name`, or None when it is given inline."""
    if params.get(f"{base_name}UseFilePath"):
        path = params.get(f"{base_name}FilePath")
        if not path:
            raise ConfigError(f"File path for '{base_name}' is missing.")
        return path
    return None


def output_directory(params) -> str:
    out_dir = os.environ.get(OUTPUT_DIR_ENV) or params.get("outputDirectory") or "memkernel_output"
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def build_grid(params) -> TimeGrid:
    try:
        return TimeGrid(params["horizon"], params["steps"])
    except ValueError as e:
        raise ConfigError(str(e)) from e


def build_operator(params) -> SpectralOperator:
    try:
        if params.get("basis") == DIRICHLET_LAPLACIAN_1D:
            return dirichlet_laplacian_1d(params["modeCount"], params["measureIndex"])
        eigenvalues = parse_json_field(params, "eigenvalues")
        if not eigenvalues:
            raise ConfigError("'eigenvalues' is required when no spatial basis is selected.")
        return SpectralOperator(tuple(eigenvalues), measure_index=params["measureIndex"])
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"Invalid operator: {e}") from e


def _closed_form(form, raw_params, grid, order=0):
    try:
        return closed_forms.evaluate(form, raw_params, grid, order)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid closed form {form!r} with parameters {raw_params!r}: {e}") from e


def build_kernel(params, grid: TimeGrid, role: str = "h") -> Kernel:
    path = get_file_path(params, "kernel")
    if path:
        columns = csvio.read_time_columns(path, grid)
        name = role if role in columns else next(iter(columns), None)
        if name is None:
            raise ConfigError(f"Kernel CSV {path} has no value column.")
        return Kernel(grid.zeros().with_values(columns[name]), role=role, provenance="csv")
    form = params.get("kernelForm")
    raw = parse_json_field(params, "kernelParams")
    return Kernel(
        _closed_form(form, raw, grid),
        role=role,
        derivative=_closed_form(form, raw, grid, 1),
        provenance=f"{ANALYTIC}:{form}",
    )


def _coefficients(params, name, op: SpectralOperator):
    path = params.get(f"{name}FieldFilePath") if params.get("dataUseFilePath") else None
    if path:
        try:
            return project(csvio.read_field(path), op)
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"Cannot project {path}: {e}") from e
    values = parse_json_field(params, name)
    if values is None:
        return np.zeros(op.mode_count)
    values = np.asarray(values, dtype=float)
    if values.shape != (op.mode_count,):
        raise ConfigError(f"'{name}' needs {op.mode_count} modal coefficients, got {values.tolist()}.")
    return values


def _forcing(params, op: SpectralOperator, grid: TimeGrid):
    path = get_file_path(params, "forcing")
    if path:
        columns = csvio.read_time_columns(path, grid)
        traces = tuple(
            grid.zeros().with_values(columns.get(f"mode_{j}", np.zeros(grid.size)))
            for j in range(1, op.mode_count + 1)
        )
        return traces, None
    entries = parse_json_field(params, "forcing") or []
    if len(entries) > op.mode_count:
        raise ConfigError(f"'forcing' lists {len(entries)} modes, the operator has {op.mode_count}.")
    traces, primes = [], []
    for entry in entries:
        if not isinstance(entry, dict) or "form" not in entry:
            raise ConfigError(f"Each forcing entry needs a 'form', got {entry!r}.")
        traces.append(_closed_form(entry["form"], entry.get("params"), grid))
        primes.append(_closed_form(entry["form"], entry.get("params"), grid, 1))
    for _ in range(op.mode_count - len(entries)):
        traces.append(grid.zeros())
        primes.append(grid.zeros())
    return tuple(traces), tuple(primes)


def build_modal_data(params, op: SpectralOperator, grid: TimeGrid) -> ModalProblemData:
    u0, u1, u2 = (_coefficients(params, name, op) for name in ("u0", "u1", "u2"))
    level = float(params.get("noiseLevel") or 0.0)
    if level > 0:
        rng = np.random.default_rng(params.get("noiseSeed"))
        noise = level * rng.standard_normal((3, op.mode_count))
        u0, u1, u2 = u0 + noise[0], u1 + noise[1], u2 + noise[2]
        logger.info("Added noise of level %.3e to the modal data (seed %s).", level, params.get("noiseSeed"))
    keep = int(params.get("keepModes") or 0)
    if keep:
        try:
            u0, u1, u2 = (truncate_noisy(values, keep) for values in (u0, u1, u2))
        except ValueError as e:
            raise ConfigError(str(e)) from e
    forcing, forcing_prime = _forcing(params, op, grid)
    zero_order = parse_json_field(params, "zeroOrderEigenvalues")
    try:
        return ModalProblemData(op, u0, u1, u2, forcing, forcing_prime, zero_order)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def build_measurement(params, grid: TimeGrid) -> MeasurementTrace:
    analytic = bool(params.get("analyticDerivatives"))
    path = get_file_path(params, "measurement")
    if path:
        columns = csvio.read_time_columns(path, grid)
        if "g" not in columns:
            raise ConfigError(f"Measurement CSV {path} needs a 'g' column.")
        traces = [grid.zeros().with_values(columns["g"])]
        for name in ("g1", "g2", "g3"):
            present = analytic and name in columns
            traces.append(grid.zeros().with_values(columns[name]) if present else None)
        source = ANALYTIC if any(trace is not None for trace in traces[1:]) else MEASURED_SAMPLED
        return MeasurementTrace(*traces, source=source)
    form = params.get("measurementForm")
    raw = parse_json_field(params, "measurementParams")
    g = _closed_form(form, raw, grid)
    if not analytic:
        return MeasurementTrace(g, source=MEASURED_SAMPLED)
    derivatives = [_closed_form(form, raw, grid, order) for order in (1, 2, 3)]
    return MeasurementTrace(g, *derivatives, source=ANALYTIC)


def identification_input(params, data: ModalProblemData, g: MeasurementTrace, g0=None) -> IdentificationInput:
    """psi and (f'(0),phi) are read off the measured mode of the forcing."""
    slot = data.op.measure_slot
    psi_prime = None
    if params.get("analyticDerivatives") and data.forcing_prime is not None:
        psi_prime = data.forcing_prime[slot]
    lambda00 = params.get("lambda00")
    return IdentificationInput(
        g=g,
        psi=data.forcing[slot],
        lambda0=data.op.lambda0,
        g0=g0,
        lambda00=None if lambda00 is None or lambda00 == "" else float(lambda00),
        fprime0phi=data.forcing_derivative(slot).initial,
        psi_prime=psi_prime,
    )


def write_solution(result: RunResult, sol, name="solution.csv"):
    csvio.write_solution(result.path(name), sol)
    if sol.op.has_basis:
        points = spatial_grid(FIELD_POINTS)
        csvio.write_field(result.path("field.csv"), points, synthesize(sol.final_coefficients(), sol.op, points))


def kernel_error(recovered: Kernel, reference: Kernel) -> float:
    return float(np.max(np.abs(recovered.trace.values - reference.trace.values)))


def write_outputs(result: RunResult, params) -> RunResult:
    """diagnostics.json, summary.txt and the manifest with artifact hashes."""
    csvio.write_json(result.path("diagnostics.json"), result.diagnostics)
    with open(result.path("summary.txt"), "w") as f:
        f.write(f"kind: {result.kind}\n")
        for line in result.summary:
            f.write(f"{line}\n")
    manifest = {
        "kind": result.kind,
        "config": {key: params[key] for key in sorted(params) if key not in NOT_ECHOED},
        "artifacts": {name: csvio.sha256(os.path.join(result.out_dir, name)) for name in sorted(result.artifacts)},
    }
    csvio.write_json(os.path.join(result.out_dir, "manifest.json"), manifest)
    return result


def exit_code(error: Exception) -> int:
    if isinstance(error, SolverError):
        return EXIT_SOLVER
    return EXIT_CONFIG


def load_params(params_path: str) -> dict:
    try:
        with open(params_path, "r") as f:
            params = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Failed to read or parse parameters file: {e}") from e
    if not isinstance(params, dict):
        raise ConfigError("The parameters file must hold a JSON object.")
    return params


def script_main(script_file: str, run: Callable, argv=None) -> int:
    """Entry point of a standalone logic.py: one argument, the params JSON path."""
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print(json.dumps({"error": "Expected a single argument: the path to the parameters JSON file."}))
        return EXIT_CONFIG
    try:
        raw = load_params(argv[0])
        schema = load_schema(os.path.join(os.path.dirname(os.path.abspath(script_file)), "ui_structure.json"))
        params = resolve(raw, schema, os.path.dirname(os.path.abspath(argv[0])))
        result = write_outputs(run(params, output_directory(params)), params)
    except ValueError as e:
        print(json.dumps({"error": str(e)}))
        return exit_code(e)
    print(csvio.dumps(result.to_dict()))
    return EXIT_OK
