"""Scenario runner: config handling, report formats, exit codes, determinism."""

import json

from netpublic.cli import main


def _write(path, body):
    path.write_text(json.dumps(body), encoding="utf-8")
    return str(path)


def _base_config(**overrides):
    cfg = {
        "benefit": {"family": "log"},
        "c": 1.0,
        "k": 0.4,
        "n": 10,
        "dist": {"kind": "uniform"},
        "seed": 3,
        "mode": "exact",
        "command": "solve",
        "output": {"path": "", "format": "json"},
    }
    cfg.update(overrides)
    return cfg


def test_conflicting_k_and_grid_is_config_error(tmp_path):
    cfg = _base_config(k_grid=[0.3, 0.5])
    cfg["output"]["path"] = str(tmp_path / "o.json")
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 2


def test_missing_output_is_config_error(tmp_path):
    cfg = _base_config()
    del cfg["output"]
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 2


def test_unknown_command_is_config_error(tmp_path):
    cfg = _base_config(command="optimize")
    cfg["output"]["path"] = str(tmp_path / "o.json")
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 2


def test_explicit_types_must_span_unit_interval(tmp_path):
    cfg = _base_config()
    del cfg["dist"], cfg["n"]
    cfg["types"] = [0.1, 0.5, 1.0]
    cfg["output"]["path"] = str(tmp_path / "o.json")
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 2


def test_subsidy_requires_json(tmp_path):
    cfg = _base_config(command="subsidy", subsidy={"budget": 0.5})
    cfg["output"] = {"path": str(tmp_path / "o.csv"), "format": "csv"}
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 2


def test_solve_above_threshold_reports_empty(tmp_path):
    cfg = _base_config(k=5.0)
    out = tmp_path / "o.json"
    cfg["output"]["path"] = str(out)
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 0
    body = json.loads(out.read_text())
    assert body["records"][0]["classification"] == "Empty"
    assert body["records"][0]["contributor_count"] == 0
    assert "profile" in body["records"][0]


def test_solve_empty_record_csv_row(tmp_path):
    cfg = _base_config(k=5.0, n=5)
    out = tmp_path / "o.csv"
    cfg["output"] = {"path": str(out), "format": "csv"}
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 0
    header, row = out.read_text().splitlines()
    fields = row.split(",")
    assert fields[1] == "Empty"
    assert fields[6] == ""  # no contributors
    float(fields[3]), float(fields[4])  # welfare fields present and numeric


def test_sweep_csv_columns_and_determinism(tmp_path):
    cfg = _base_config(command="sweep_k", n=20, mode="structural")
    del cfg["k"]
    cfg["k_grid"] = [0.3, 0.6, 0.9]
    out = tmp_path / "o.csv"
    cfg["output"] = {"path": str(out), "format": "csv"}
    cfg_path = _write(tmp_path / "c.json", cfg)
    assert main(["--config", cfg_path]) == 0
    first = out.read_bytes()
    lines = first.decode().splitlines()
    assert lines[0] == (
        "k,classification,contributor_count,welfare_sum,welfare_avg,"
        "polarization,contributor_types"
    )
    assert len(lines) == 4
    assert lines[1].startswith("0.3,")
    assert main(["--config", cfg_path]) == 0
    assert out.read_bytes() == first


def test_seed_override_changes_output(tmp_path):
    cfg = _base_config()
    out = tmp_path / "o.json"
    cfg["output"]["path"] = str(out)
    cfg_path = _write(tmp_path / "c.json", cfg)
    assert main(["--config", cfg_path]) == 0
    a = out.read_bytes()
    assert main(["--config", cfg_path, "--seed", "4"]) == 0
    assert out.read_bytes() != a


def test_solve_then_verify_roundtrip(tmp_path):
    cfg = _base_config(n=8)
    solve_out = tmp_path / "solve.json"
    cfg["output"]["path"] = str(solve_out)
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 0
    recorded = json.loads(solve_out.read_text())["records"][0]["classification"]

    vcfg = _base_config(n=8, command="verify", verify_profile=str(solve_out))
    verify_out = tmp_path / "verify.json"
    vcfg["output"]["path"] = str(verify_out)
    assert main(["--config", _write(tmp_path / "v.json", vcfg)]) == 0
    reverified = json.loads(verify_out.read_text())["records"][0]["classification"]
    assert reverified == recorded


def test_law_of_few_report(tmp_path):
    cfg = _base_config(command="law_of_few", k=0.9, law_of_few={"n_list": [10, 20]})
    out = tmp_path / "o.json"
    cfg["output"]["path"] = str(out)
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 0
    body = json.loads(out.read_text())
    assert [row["n"] for row in body["law_of_few"]] == [10, 20]


def test_subsidy_report(tmp_path):
    cfg = _base_config(command="subsidy", n=6, k=0.8,
                       subsidy={"budget": 0.5, "target_grid": 3, "level_grid": 4})
    out = tmp_path / "o.json"
    cfg["output"]["path"] = str(out)
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 0
    body = json.loads(out.read_text())
    assert body["spent"] <= body["budget"] + 1e-9
    assert set(body) >= {"regime", "subsidies", "recipients", "classification", "profile"}


def test_extensions_weighted_report(tmp_path):
    cfg = _base_config(command="extensions", n=6, k=0.5,
                       extensions={"variant": "weighted"})
    out = tmp_path / "o.json"
    cfg["output"]["path"] = str(out)
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 0
    body = json.loads(out.read_text())
    assert len(body["recipients"]) in (0, 2)


def test_unwritable_output_is_io_error(tmp_path):
    cfg = _base_config(n=4, k=5.0)
    cfg["output"]["path"] = str(tmp_path)  # a directory, not a file
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 5


def test_two_way_extension_size_limit_is_config_error(tmp_path):
    cfg = _base_config(command="extensions", n=6, extensions={"variant": "two_way"})
    cfg["output"]["path"] = str(tmp_path / "o.json")
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 2


def test_threads_env_validated(tmp_path, monkeypatch):
    monkeypatch.setenv("NETPUBLIC_THREADS", "lots")
    cfg = _base_config()
    cfg["output"]["path"] = str(tmp_path / "o.json")
    assert main(["--config", _write(tmp_path / "c.json", cfg)]) == 2
