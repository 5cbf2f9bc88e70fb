import hashlib
import json
import os

import pytest

from memkernel import cli
from memkernel.functions.common import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, OUTPUT_DIR_ENV
from memkernel.functions.ivp2 import logic as ivp2_logic

ROUNDTRIP = {"kind": "roundtrip", "steps": 400, "modeCount": 1, "u0": [1.0], "kernelForm": "const", "kernelParams": [1.0]}


def invoke(capsys, *argv):
    code = cli.main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_roundtrip_recovers_constant_kernel(write_params, capsys):
    code, payload = invoke(capsys, "run", write_params(ROUNDTRIP))
    assert code == EXIT_OK
    assert payload["kind"] == "roundtrip"
    assert payload["error"] <= 5e-3
    assert "kernel.csv" in payload["artifacts"]


def test_identification_without_initial_measurement_fails(write_params, capsys):
    params = {"kind": "identify-h", "measurementForm": "poly", "measurementParams": [0.0, 1.0]}
    code, payload = invoke(capsys, "run", write_params(params))
    assert code == EXIT_SOLVER
    assert "(1.7)" in payload["error"]


def test_first_order_kernel_must_vanish_at_zero(write_params, capsys):
    params = {"kind": "bvp1", "u2": [1.0], "kernelForm": "const", "kernelParams": [1.0]}
    code, payload = invoke(capsys, "run", write_params(params))
    assert code == EXIT_SOLVER
    assert "l(0)=0" in payload["error"]


@pytest.mark.parametrize(
    "params",
    [
        {"kind": "no-such-kind"},
        dict(ROUNDTRIP, steps=3),
        dict(ROUNDTRIP, steps=100.5),
        dict(ROUNDTRIP, route="thirdKind"),
        {"kind": "identify-h"},
        dict(ROUNDTRIP, kernelUseFilePath=True, kernelFilePath="missing.csv"),
    ],
)
def test_invalid_configuration_exits_with_config_status(write_params, capsys, params):
    code, payload = invoke(capsys, "run", write_params(params))
    assert code == EXIT_CONFIG
    assert payload["error"]


def test_missing_params_file(tmp_path, capsys):
    code, payload = invoke(capsys, "run", str(tmp_path / "absent.json"))
    assert code == EXIT_CONFIG
    assert "parameters file" in payload["error"]


def test_refinement_shows_second_order(write_params, capsys):
    code, payload = invoke(capsys, "refine", write_params(dict(ROUNDTRIP, steps=100)), "--levels", "3")
    assert code == EXIT_OK
    assert payload["oracle"] == "reference"
    assert [row["steps"] for row in payload["table"]] == [100, 200, 400]
    assert payload["table"][0]["order"] is None
    for row in payload["table"][1:]:
        assert 1.7 <= row["order"] <= 2.3
    with open(payload["refineFile"]) as f:
        assert f.readline().strip() == "steps,dt,error,order"


def test_refinement_of_zero_kernel_is_exact(write_params, capsys):
    params = dict(ROUNDTRIP, steps=50, kernelParams=[0.0])
    code, payload = invoke(capsys, "refine", write_params(params), "--levels", "2")
    assert code == EXIT_OK
    assert payload["table"][1]["order"] == "exact"


def test_refinement_of_first_kind_route(write_params, capsys):
    # re-extrapolated end nodes keep the route near second order, above the 0.8 to 1.4 of the raw stencils
    params = dict(ROUNDTRIP, steps=100, route="firstKind")
    code, payload = invoke(capsys, "refine", write_params(params), "--levels", "3")
    assert code == EXIT_OK
    assert all(row["order"] >= 0.8 for row in payload["table"][1:])


def test_refinement_without_oracle_compares_levels(write_params, capsys):
    params = {"kind": "ivp2", "steps": 50, "modeCount": 2, "u0": [1.0, 0.5]}
    code, payload = invoke(capsys, "refine", write_params(params), "--levels", "3")
    assert code == EXIT_OK
    assert payload["oracle"] == "next-level"
    assert len(payload["table"]) == 2


def test_refinement_needs_two_levels(write_params, capsys):
    code, _ = invoke(capsys, "refine", write_params(ROUNDTRIP), "--levels", "1")
    assert code == EXIT_CONFIG


def test_workers_do_not_change_outputs(write_params, tmp_path, capsys):
    params = {"kind": "ivp2", "modeCount": 4, "u0": [1.0, 0.5, 0.25, 0.1], "kernelForm": "exp", "kernelParams": [1.0, -1.0]}
    outputs = []
    for workers in ("1", "3"):
        out_dir = tmp_path / f"workers_{workers}"
        path = write_params(dict(params, outputDirectory=str(out_dir)), name=f"w{workers}.json")
        code, payload = invoke(capsys, "--workers", workers, "run", path)
        assert code == EXIT_OK
        outputs.append({name: (out_dir / name).read_bytes() for name in payload["artifacts"]})
    assert "manifest.json" in outputs[0]
    assert outputs[0] == outputs[1]


def test_output_directory_from_environment(write_params, tmp_path, monkeypatch, capsys):
    target = tmp_path / "from_env"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(target))
    code, payload = invoke(capsys, "run", write_params({"kind": "ivp2", "u0": [1.0]}))
    assert code == EXIT_OK
    assert payload["outputDirectory"] == str(target)
    assert (target / "diagnostics.json").exists()


def test_manifest_hashes_match_artifacts(write_params, capsys):
    code, payload = invoke(capsys, "run", write_params(ROUNDTRIP))
    assert code == EXIT_OK
    out_dir = payload["outputDirectory"]
    with open(os.path.join(out_dir, "manifest.json")) as f:
        manifest = json.load(f)
    assert manifest["kind"] == "roundtrip"
    assert "outputDirectory" not in manifest["config"]
    for name, digest in manifest["artifacts"].items():
        with open(os.path.join(out_dir, name), "rb") as f:
            assert hashlib.sha256(f.read()).hexdigest() == digest


@pytest.mark.parametrize("name", cli.demo_names())
def test_demos_run(name, tmp_path, monkeypatch, capsys):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    monkeypatch.chdir(tmp_path)
    code, payload = invoke(capsys, "demo", name)
    assert code == EXIT_OK
    assert payload["outputDirectory"] == f"memkernel_output/{name}"
    for artifact in payload["artifacts"]:
        assert (tmp_path / payload["outputDirectory"] / artifact).exists()


def test_velocity_mixed_demo(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    monkeypatch.chdir(tmp_path)
    code, payload = invoke(capsys, "demo", "second-order-mixed")
    assert code == EXIT_OK
    diagnostics = read_diagnostics(payload)
    assert diagnostics["leftCondition"] == "velocity"
    assert all(mode["status"] == "unique" for mode in diagnostics["modes"])
    assert all(mode["denominator"] >= 1.0 for mode in diagnostics["modes"])


def test_unknown_demo(capsys):
    code, payload = invoke(capsys, "demo", "no-such-demo")
    assert code == EXIT_CONFIG
    assert "available" in payload["error"]


def test_demo_catalogue():
    assert cli.demo_names() == [
        "first-order-initial",
        "first-order-mixed",
        "second-order-initial",
        "second-order-mixed",
    ]


def test_manifest_lists_every_kind():
    kinds = cli.load_manifest()
    assert set(kinds) == {"ivp2", "ivp1", "bvp2", "bvp1", "identify-h", "identify-l", "ip0", "roundtrip", "check"}
    assert kinds["identify-h"]["module"] == "memkernel.functions.identify_h.logic"
    assert all(os.path.exists(entry["uiFile"]) for entry in kinds.values())


def test_standalone_script_entry_point(write_params, tmp_path, capsys):
    code = ivp2_logic.main([write_params({"kind": "ivp2", "u0": [1.0]})])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert "solution.csv" in payload["artifacts"]
    assert ivp2_logic.main([]) == EXIT_CONFIG


def read_diagnostics(payload):
    with open(os.path.join(payload["outputDirectory"], "diagnostics.json")) as f:
        return json.load(f)


def test_first_order_initial_problem(write_params, capsys):
    code, payload = invoke(capsys, "run", write_params({"kind": "ivp1", "u0": [1.0]}))
    assert code == EXIT_OK
    assert read_diagnostics(payload)["reductionCrosscheck"] <= 1e-3


@pytest.mark.parametrize("datum", ["measured", "eigenvalue"])
def test_zero_order_roundtrip(write_params, capsys, datum):
    params = {"kind": "ip0", "u0": [1.0], "zeroOrderEigenvalues": [1.0], "zeroOrderDatum": datum}
    code, payload = invoke(capsys, "run", write_params(params))
    assert code == EXIT_OK
    assert payload["error"] <= 5e-3


def test_zero_order_eigenvalue_must_match(write_params, capsys):
    params = {"kind": "ip0", "u0": [1.0], "zeroOrderEigenvalues": [1.0], "lambda00": 2.0}
    code, payload = invoke(capsys, "run", write_params(params))
    assert code == EXIT_CONFIG
    assert "lambda00" in payload["error"]


def test_identify_l_from_closed_form(write_params, capsys):
    params = {"kind": "identify-l", "u0": [1.0], "measurementParams": [1.0, 0.0, 1.0], "analyticDerivatives": True}
    code, payload = invoke(capsys, "run", write_params(params))
    assert code == EXIT_OK
    assert "kernel.csv" in payload["artifacts"]


def test_check_detects_shifted_measurement(write_params, capsys):
    params = {"kind": "check", "u0": [1.0], "measurementShift": 1e-2}
    code, payload = invoke(capsys, "run", write_params(params))
    assert code == EXIT_OK
    checks = {check["name"]: check for check in read_diagnostics(payload)["compatibility"]["checks"]}
    assert not checks["g(0)=(u0,phi)"]["pass"]
    assert checks["g(0)=(u0,phi)"]["defect"] == pytest.approx(1e-2, abs=1e-6)
