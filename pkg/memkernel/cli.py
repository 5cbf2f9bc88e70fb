"""Command-line front end.

    python -m memkernel run <params.json>
    python -m memkernel refine <params.json> --levels 3
    python -m memkernel demo <name>

A params file names its `kind`; the function manifest maps the kind to a
logic module and its ui_structure.json, which supplies defaults and
validation. Results go to stdout as JSON, logs to stderr.
"""
import argparse
import csv
import importlib
import json
import logging
import math
import os
import sys
from typing import List, Optional

import numpy as np

from . import __version__, csvio
from .errors import ConfigError
from .functions.common import (
    EXIT_CONFIG,
    EXIT_OK,
    exit_code,
    load_params,
    output_directory,
    write_outputs,
)
from .functions.schema import load_schema, resolve

logger = logging.getLogger(__name__)

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
MANIFEST_PATH = os.path.join(REPO_ROOT, "memkernel_function_manifest.json")
DEMO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "demos")

# Errors at or below this level count as exact in the refinement table.
EXACT_TOL = 1e-12
EXACT = "exact"


def load_manifest(path: str = MANIFEST_PATH) -> dict:
    """kind -> manifest entry, with uiFile and scriptFile made absolute."""
    try:
        with open(path, "r") as f:
            entries = json.load(f)["functions"]
    except (OSError, KeyError, json.JSONDecodeError) as e:
        raise ConfigError(f"Failed to read function manifest {path}: {e}") from e
    root = os.path.dirname(os.path.abspath(path))
    kinds = {}
    for entry in entries:
        entry = dict(entry)
        entry["module"] = os.path.splitext(entry["scriptFile"])[0].replace("/", ".")
        entry["uiFile"] = os.path.join(root, entry["uiFile"])
        kinds[entry["value"]] = entry
    return kinds


def prepare(config_path: str, workers: Optional[int] = None, manifest: Optional[dict] = None):
    """Read, default and validate a params file; returns (params, logic module)."""
    manifest = manifest if manifest is not None else load_manifest()
    raw = load_params(config_path)
    kind = raw.get("kind")
    if kind not in manifest:
        raise ConfigError(f"Unknown kind {kind!r}; expected one of {sorted(manifest)}.")
    entry = manifest[kind]
    params = resolve(raw, load_schema(entry["uiFile"]), os.path.dirname(os.path.abspath(config_path)))
    if workers is not None:
        params["workers"] = workers
    return params, importlib.import_module(entry["module"])


def run(config_path: str, workers: Optional[int] = None) -> dict:
    """Execute one scenario and write its artifacts; returns the result summary."""
    params, logic = prepare(config_path, workers)
    logger.info("Running %s from %s", params["kind"], config_path)
    result = logic.run(params, output_directory(params))
    return write_outputs(result, params).to_dict()


def _observed_orders(errors: List[float]) -> List[object]:
    orders = [None]
    for coarse, fine in zip(errors, errors[1:]):
        if coarse <= EXACT_TOL and fine <= EXACT_TOL:
            orders.append(EXACT)
        elif fine == 0.0 or coarse == 0.0:
            orders.append(None)
        else:
            orders.append(math.log2(coarse / fine))
    return orders


def refine(config_path: str, levels: int, workers: Optional[int] = None) -> dict:
    """Rerun at N, 2N, ..., 2^(levels-1) N and tabulate errors and observed orders.

    Kinds with an oracle (a known kernel) report its error; otherwise each
    level is compared with the next finer one.
    """
    if levels < 2:
        raise ConfigError(f"Refinement needs at least 2 levels, got {levels}.")
    params, logic = prepare(config_path, workers)
    out_dir = output_directory(params)
    base_steps = params["steps"]

    results = []
    for level in range(levels):
        steps = base_steps * 2**level
        level_params = dict(params, steps=steps)
        level_dir = os.path.join(out_dir, f"steps_{steps}")
        os.makedirs(level_dir, exist_ok=True)
        results.append(write_outputs(logic.run(level_params, level_dir), level_params))
        logger.info("Level %d (N=%d) done", level, steps)

    if all(result.error is not None for result in results):
        rows = [(base_steps * 2**i, r.error) for i, r in enumerate(results)]
        oracle = "reference"
    else:
        rows = [
            (base_steps * 2**i, float(np.max(np.abs(coarse.observable - fine.observable))))
            for i, (coarse, fine) in enumerate(zip(results, results[1:]))
        ]
        oracle = "next-level"
    orders = _observed_orders([error for _, error in rows])

    path = os.path.join(out_dir, "refine.csv")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["steps", "dt", "error", "order"])
        for (steps, error), order in zip(rows, orders):
            dt = params["horizon"] / steps
            cell = "" if order is None else order if order == EXACT else csvio.FLOAT_FORMAT % order
            writer.writerow([steps, csvio.FLOAT_FORMAT % dt, csvio.FLOAT_FORMAT % error, cell])

    table = [
        {"steps": steps, "dt": params["horizon"] / steps, "error": error, "order": order}
        for (steps, error), order in zip(rows, orders)
    ]
    return {"kind": params["kind"], "oracle": oracle, "table": table, "refineFile": path}


def demo_names() -> List[str]:
    return sorted(os.path.splitext(name)[0] for name in os.listdir(DEMO_DIR) if name.endswith(".json"))


def demo(name: str, workers: Optional[int] = None) -> dict:
    path = os.path.join(DEMO_DIR, f"{name}.json")
    if not os.path.exists(path):
        raise ConfigError(f"Unknown demo {name!r}; available: {demo_names()}.")
    return run(path, workers)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memkernel",
        description="Direct, inverse and mixed problems for u'' = h*Au + f and u' = l*Au + f.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug output to stderr")
    parser.add_argument("--workers", type=int, default=None, help="threads for independent modes")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run one scenario")
    run_parser.add_argument("config", help="path to the params JSON file")

    refine_parser = sub.add_parser("refine", help="grid refinement study of a scenario")
    refine_parser.add_argument("config", help="path to the params JSON file")
    refine_parser.add_argument("--levels", type=int, default=3, help="number of grids N, 2N, ... (>= 2)")

    demo_parser = sub.add_parser("demo", help="run a bundled scenario")
    demo_parser.add_argument("name", help="demo name, e.g. second-order-initial")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.workers is not None and args.workers < 1:
        print(json.dumps({"error": f"--workers must be at least 1, got {args.workers}."}))
        return EXIT_CONFIG
    try:
        if args.command == "run":
            payload = run(args.config, args.workers)
        elif args.command == "refine":
            payload = refine(args.config, args.levels, args.workers)
        else:
            payload = demo(args.name, args.workers)
    except ValueError as e:
        logger.debug("Run failed", exc_info=True)
        print(json.dumps({"error": str(e)}))
        return exit_code(e)
    print(csvio.dumps(payload))
    return EXIT_OK
