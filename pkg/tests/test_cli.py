import json

import jsonschema
import pytest

from interaction_groups.cli import bundled_configs, emit, load_schema, main, parse_report, report_document, run


def _load(name):
    from importlib import resources
    return json.loads(resources.files("interaction_groups").joinpath(f"configs/{name}.json").read_text())


@pytest.mark.parametrize("name", bundled_configs())
def test_bundled_configs_exit_zero(name, tmp_path):
    assert main(["--config", name, "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / f"{name}.report.json").read_text())
    jsonschema.validate(doc, load_schema("report"))
    assert (tmp_path / f"{name}.report.txt").exists()


def test_fock_config_reports_finding(tmp_path):
    assert main(["--config", "fock_counterexample", "--out", str(tmp_path), "--format", "json"]) == 0
    doc = json.loads((tmp_path / "fock_counterexample.report.json").read_text())
    assert doc["summary"]["finding"] == 1
    assert not (tmp_path / "fock_counterexample.report.txt").exists()


def test_deterministic_and_round_trip(tmp_path):
    cfg = _load("m2_z2_flip_gns")
    first = emit(report_document(run(cfg), cfg))
    second = emit(report_document(run(cfg), cfg))
    assert first == second
    report, doc = parse_report(first)
    assert emit({**doc, **report.to_dict()}) == first


def _write(tmp_path, cfg):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return str(p)


def test_non_square_matrix_exits_2(tmp_path, capsys):
    cfg = _load("m2_z2_flip")
    cfg["interaction"][0]["map"]["matrix"] = [[1, 0, 0], [0, 1, 0]]
    assert main(["--config", _write(tmp_path, cfg)]) == 2
    assert "interaction.0.map.matrix" in capsys.readouterr().err


@pytest.mark.parametrize("mutate, field", [
    (lambda c: c.update(window="x"), "window"),
    (lambda c: c.update(scenario="nope"), "scenario"),
    (lambda c: c["interaction"][0]["map"].update(matrix=[[1, 0], [0, 1]]), "interaction.0.map.matrix"),
    (lambda c: c.pop("interaction"), "interaction"),
])
def test_config_errors_name_the_field(tmp_path, capsys, mutate, field):
    cfg = _load("m2_z2_flip")
    mutate(cfg)
    assert main(["--config", _write(tmp_path, cfg)]) == 2
    assert field in capsys.readouterr().err


def test_failing_checks_exit_1(tmp_path):
    cfg = _load("m2_z2_flip")
    # transpose on M_2 is positive but not an interaction
    cfg["interaction"][0]["map"]["matrix"] = [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]
    assert main(["--config", _write(tmp_path, cfg)]) == 1


def test_missing_config_file():
    assert main(["--config", "/nonexistent/cfg.json"]) == 2


def test_z2_interaction_config(tmp_path):
    u = [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]
    cfg = {"scenario": "verify-interaction", "group": {"kind": "free_abelian", "rank": 1},
           "algebra": {"blocks": [2]}, "window": 2, "max_length": 2,
           "interaction": [{"element": 1, "map": {"ad": u}}, {"element": -1, "map": {"ad": u}}]}
    assert main(["--config", _write(tmp_path, cfg)]) == 0


def test_list_configs(capsys):
    assert main(["--list-configs"]) == 0
    assert "m2_z2_flip" in capsys.readouterr().out.split()
