"""Command-line client: exit codes, CSV output, and server delegation."""

import json

import pytest

from lcpa import harness
from lcpa.cli import main
from lcpa.scenario import default_scenario, save_scenario


def _fit_csv(tmp_path):
    path = tmp_path / "points.csv"
    rows = ["sample_size,error"] + [f"{v},{5.0 * v ** -0.5}"
                                    for v in (50, 100, 400, 900)]
    path.write_text("\n".join(rows) + "\n")
    return str(path)


def test_fit_prints_parameters(tmp_path, capsys):
    assert main(["fit", _fit_csv(tmp_path)]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    assert out[0] == "scale,exponent,mse"
    scale, exponent, mse = map(float, out[1].split(","))
    assert scale == pytest.approx(5.0, abs=1e-3)
    assert exponent == pytest.approx(0.5, abs=1e-3)
    assert mse < 1e-10


def test_fit_missing_file_is_a_named_error(tmp_path, capsys):
    assert main(["fit", str(tmp_path / "absent.csv")]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_run_writes_csv_to_stdout(capsys):
    assert main(["run", "--scheme", "water_filling", "--draws", "2",
                 "--diag-mode", "realized"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().split("\n")
    assert "model predictions" in lines[0]
    assert lines[1].split(",")[:3] == ["draw", "scheme", "objective"]
    assert len(lines) == 2 + 2 + 1  # two draws plus the scheme mean


def test_run_output_file_matches_library(tmp_path):
    target = tmp_path / "alloc.csv"
    assert main(["run", "--scheme", "max_min", "--seed", "4",
                 "--output", str(target)]) == 0
    sc = default_scenario()
    want = harness.allocations_to_csv(harness.run(sc, "max_min", seed=4), sc)
    assert target.read_text() == want


def test_run_scenario_file_round_trip(tmp_path, capsys):
    ini = tmp_path / "profile.ini"
    ini.write_text(save_scenario(default_scenario()))
    assert main(["run", "--scheme", "asymptotic",
                 "--scenario", str(ini)]) == 0
    assert "asymptotic" in capsys.readouterr().out


def test_run_rejects_unknown_scheme_as_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--scheme", "fastest"])
    assert exc.value.code == 2
    assert "invalid choice" in capsys.readouterr().err


def test_run_domain_failure_returns_one(tmp_path, capsys):
    ini = tmp_path / "bad.ini"
    ini.write_text("[system]\nusers = 2\n")
    assert main(["run", "--scheme", "mm", "--scenario", str(ini)]) == 1
    assert "unrecognized system key" in capsys.readouterr().err


def test_compare_accepts_comma_and_repeat_schemes(capsys):
    assert main(["compare", "--scheme", "water_filling,max_min",
                 "--scheme", "asymptotic", "--draws", "1"]) == 0
    body = capsys.readouterr().out
    for scheme in ("water_filling", "max_min", "asymptotic"):
        assert f"0,{scheme}" in body


def test_sweep_tabulates_values(capsys):
    assert main(["sweep", "--param", "T", "--values", "5,10",
                 "--scheme", "water_filling"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[1].startswith("param,value,scheme")
    assert lines[2].startswith("T,5,water_filling")
    assert lines[3].startswith("T,10,water_filling")


def test_sweep_rejects_bad_param(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--param", "Q", "--values", "1",
              "--scheme", "water_filling"])
    assert exc.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    from lcpa import __version__
    assert capsys.readouterr().out.strip() == __version__


class _Response:
    """Stand-in for httpx's response, backed by the in-process app."""

    def __init__(self, status_code, payload):
        self.status_code = status_code
        self._payload = payload
        self.text = json.dumps(payload)

    def json(self):
        return self._payload


def _install_fake_server(monkeypatch):
    from fastapi.testclient import TestClient

    from lcpa.service import create_app

    client = TestClient(create_app(), raise_server_exceptions=False)

    def fake_post(url, json=None, timeout=None):
        path = url.replace("http://fake", "")
        got = client.post(path, json=json)
        return _Response(got.status_code, got.json())

    import httpx

    monkeypatch.setattr(httpx, "post", fake_post)


def test_server_mode_produces_identical_bytes(monkeypatch, capsys):
    _install_fake_server(monkeypatch)
    assert main(["run", "--scheme", "water_filling", "--seed", "2",
                 "--draws", "2", "--diag-mode", "realized",
                 "--server", "http://fake"]) == 0
    remote = capsys.readouterr().out
    assert main(["run", "--scheme", "water_filling", "--seed", "2",
                 "--draws", "2", "--diag-mode", "realized"]) == 0
    local = capsys.readouterr().out
    assert remote == local


def test_server_mode_fit(monkeypatch, tmp_path, capsys):
    _install_fake_server(monkeypatch)
    assert main(["fit", _fit_csv(tmp_path), "--server", "http://fake"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    assert float(out[1].split(",")[1]) == pytest.approx(0.5, abs=1e-3)


def test_server_mode_surfaces_remote_errors(monkeypatch, capsys):
    _install_fake_server(monkeypatch)
    assert main(["compare", "--scheme", "water_filling", "--draws", "0",
                 "--server", "http://fake"]) == 1
    err = capsys.readouterr().err
    assert "server returned 422" in err
