import json
import math
from pathlib import Path

import pytest

from fsk.core import (
    FuzzySphereKit,
    RunConfig,
    convergence_cutoffs,
    convergence_suite,
    dump_sections,
    dumps,
    projector_suite,
    products_suite,
    run_hash,
    table_csv,
    write_atomic,
)
from fsk.errors import ConfigError


def test_config_validation():
    assert RunConfig().validate().resolved_k == 36.0
    assert RunConfig(k=2.5).resolved_k == 2.5
    for bad in (dict(dim=1), dict(cutoff=-1), dict(tol=0.0), dict(suite="nope"), dict(fmt="xml"), dict(k=-1.0)):
        with pytest.raises(ConfigError):
            RunConfig(**bad).validate()


def test_run_hash_ignores_output_path():
    a = RunConfig(output="a.json")
    b = RunConfig(output="b.json")
    assert run_hash(a, "build") == run_hash(b, "build")
    assert run_hash(a, "build") != run_hash(a, "check")
    assert run_hash(a, "build") != run_hash(RunConfig(cutoff=3), "build")


def test_serialization_helpers(tmp_path):
    text = dumps({"b": 1.5, "a": complex(0, 2)})
    assert text.endswith("\n")
    assert json.loads(text) == {"a": [0.0, 2.0], "b": 1.5}
    assert table_csv(("x", "y"), [(1, 0.1)]) == "x,y\n1,0.1\n"

    target = write_atomic(tmp_path / "sub" / "out.txt", "hello\n")
    assert target.read_text() == "hello\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.txt"]


def test_build_flow_and_ledger(temp_project):
    kit = FuzzySphereKit(project_dir=str(temp_project))
    path = kit.build(RunConfig(dim=3, cutoff=2))
    assert path is not None
    payload = json.loads(Path(path).read_text())
    assert payload["N"] == 9
    assert Path(path).parent == temp_project / "fsk_out"

    # Same configuration, same bytes
    first = Path(path).read_bytes()
    again = kit.build(RunConfig(dim=3, cutoff=2))
    assert again == path
    assert Path(again).read_bytes() == first

    runs = kit.list_runs(limit=5)
    assert any(r["command"] == "build" for r in runs)
    assert kit.verify_run(run_hash(RunConfig(dim=3, cutoff=2), "build")) is True


def test_check_flow(temp_project):
    kit = FuzzySphereKit(project_dir=str(temp_project))
    assert kit.check(RunConfig(dim=3, cutoff=2, output="report.json")) is True
    report = json.loads((temp_project / "report.json").read_text())
    assert report["passed"] is True
    assert report["suites"][0]["suite"] == "relations"

    assert kit.check(RunConfig(dim=3, cutoff=2, output="broken.json"), inject_error=True) is False
    broken = json.loads((temp_project / "broken.json").read_text())
    assert "x_selfadjoint" in broken["suites"][0]["failures"]


def test_isomorphism_and_radial_suites(temp_project):
    kit = FuzzySphereKit(project_dir=str(temp_project))
    for suite in ("isomorphism", "radial"):
        reports = kit.run_checks(RunConfig(dim=3, cutoff=2, suite=suite))
        assert reports[0].suite == suite
        assert reports[0].passed, reports[0].failures()


def test_spectrum_csv(temp_project):
    kit = FuzzySphereKit(project_dir=str(temp_project))
    path = kit.spectrum(RunConfig(dim=3, cutoff=2, fmt="csv", output="spectrum.csv"))
    lines = Path(path).read_text().strip().splitlines()
    assert lines[0] == "l,r2,multiplicity"
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert values == pytest.approx([37 / 36, 13 / 12, 4 / 9])
    with pytest.raises(ConfigError):
        kit.spectrum(RunConfig(), observable="L2")


def test_projector_suite_passes():
    report = projector_suite(3, 1e-10)
    assert report.passed, report.failures()
    assert "braid3_traceFreeSym" in report.residuals


def test_products_suite_passes(alg_3_2):
    report = products_suite(alg_3_2, 1e-10)
    assert report.passed, report.failures()


def test_convergence_cutoffs_fit_budget():
    assert convergence_cutoffs(3) == [2, 3, 4, 5, 6]
    assert convergence_cutoffs(4) == [2, 3, 4, 5]
    assert convergence_cutoffs(8) == [2, 3]


def test_convergence_suite_passes():
    report = convergence_suite(3, 1e-10)
    assert report.passed, report.failures()
    assert report.info["cutoffs"] == [2, 3, 4, 5, 6]
    assert report.info["norm_residuals"][-1] < 0.1
    assert "final_residual" in report.residuals


def test_dump_sections(alg_3_2):
    sections = dump_sections(alg_3_2, ("frames", "products", "projectors"))
    frames = sections["frames"]
    assert [f["l"] for f in frames] == [0, 1, 2]
    assert len(frames[2]["indices"]) == 5
    assert frames[1]["h_l"] == pytest.approx(4 * math.pi / 3)
    assert len(sections["products"]) == 9
    one_one = next(p for p in sections["products"] if p["l"] == 1 and p["m"] == 1)
    assert one_one["coefficients"]["0"] == pytest.approx(1 / 3)
    assert [p["order"] for p in sections["projectors"]] == [0, 1, 2]
    assert dump_sections(alg_3_2, ()) == {}


def test_build_with_dump_sections(temp_project):
    kit = FuzzySphereKit(project_dir=str(temp_project))
    plain = kit.build(RunConfig(dim=3, cutoff=1))
    dumped = kit.build(RunConfig(dim=3, cutoff=1, dump=("frames",)))
    assert plain != dumped
    payload = json.loads(Path(dumped).read_text())
    assert [f["l"] for f in payload["frames"]] == [0, 1]
    assert "frames" not in json.loads(Path(plain).read_text())
    with pytest.raises(ConfigError):
        RunConfig(dump=("everything",)).validate()
