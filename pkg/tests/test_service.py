"""HTTP facade: endpoints mirror the library and reject bad input with 422."""

import math

import pytest
from fastapi.testclient import TestClient

from lcpa import __version__, harness
from lcpa.scenario import default_scenario, save_scenario
from lcpa.service import create_app

client = TestClient(create_app(), raise_server_exceptions=False)


def test_health_reports_version():
    got = client.get("/health")
    assert got.status_code == 200
    assert got.json() == {"status": "ok", "version": __version__}


def test_fit_from_inline_points():
    points = [[v, 5.0 * v ** -0.5] for v in (50, 100, 400, 900, 2500)]
    got = client.post("/fit", json={"points": points})
    assert got.status_code == 200
    body = got.json()
    assert body["scale"] == pytest.approx(5.0, abs=1e-3)
    assert body["exponent"] == pytest.approx(0.5, abs=1e-3)
    assert body["mse"] < 1e-10


def test_fit_from_csv_text():
    csv_text = "sample_size,error\n100,0.5\n400,0.25\n1600,0.125\n"
    got = client.post("/fit", json={"csv": csv_text})
    assert got.status_code == 200
    assert got.json()["exponent"] == pytest.approx(0.5, abs=1e-3)


def test_fit_requires_exactly_one_source():
    assert client.post("/fit", json={}).status_code == 422
    both = client.post("/fit", json={"points": [[10, 0.5], [20, 0.4]],
                                     "csv": "10,0.5\n"})
    assert both.status_code == 422
    assert "exactly one" in both.json()["detail"]


def test_run_returns_allocations_and_csv():
    got = client.post("/run", json={"scheme": "water_filling", "draws": 2,
                                    "seed": 3, "diag_mode": "realized"})
    assert got.status_code == 200
    body = got.json()
    assert [a["draw"] for a in body["allocations"]] == [0, 1]
    for a in body["allocations"]:
        assert a["scheme"] == "water_filling"
        assert sum(a["powers"]) == pytest.approx(0.02, rel=1e-8)
        assert a["objective"] == pytest.approx(max(a["predicted_errors"]),
                                               rel=1e-12)
    assert body["csv"].startswith("#")
    assert "model predictions" in body["csv"]


def test_run_matches_library_csv_exactly():
    got = client.post("/run", json={"scheme": "max_min", "seed": 9,
                                    "draws": 2, "diag_mode": "realized"})
    sc = default_scenario()
    want = harness.allocations_to_csv(
        harness.run(sc, "max_min", seed=9, draws=2, diag_mode="realized"), sc)
    assert got.json()["csv"] == want


def test_run_accepts_inline_scenario():
    ini = save_scenario(default_scenario().with_updates(duration=10.0))
    got = client.post("/run", json={"scheme": "asymptotic",
                                    "scenario_ini": ini})
    assert got.status_code == 200
    longer = got.json()["allocations"][0]["objective"]
    base = client.post("/run", json={"scheme": "asymptotic"}).json()
    assert longer < base["allocations"][0]["objective"]


def test_run_domain_errors_are_422():
    got = client.post("/run", json={"scheme": "fastest"})
    assert got.status_code == 422
    assert "unknown scheme" in got.json()["detail"]
    bad_ini = client.post("/run", json={"scheme": "mm",
                                        "scenario_ini": "[system]\nusers = 2\n"})
    assert bad_ini.status_code == 422
    assert "unrecognized system key" in bad_ini.json()["detail"]


def test_run_schema_errors_are_422():
    assert client.post("/run", json={"scheme": "mm", "draws": 0}).status_code == 422
    assert client.post("/run", json={"scheme": "mm",
                                     "diag_mode": "noisy"}).status_code == 422


def test_compare_rows_are_draw_major():
    got = client.post("/compare", json={"schemes": ["water_filling", "max_min"],
                                        "draws": 2, "diag_mode": "realized"})
    assert got.status_code == 200
    rows = got.json()["allocations"]
    assert [(r["draw"], r["scheme"]) for r in rows] == [
        (0, "water_filling"), (0, "max_min"),
        (1, "water_filling"), (1, "max_min")]


def test_compare_requires_schemes():
    got = client.post("/compare", json={"schemes": []})
    assert got.status_code == 422
    assert "no schemes" in got.json()["detail"]


def test_sweep_end_to_end():
    got = client.post("/sweep", json={"param": "T", "values": [5.0, 10.0],
                                      "schemes": ["water_filling"]})
    assert got.status_code == 200
    rows = got.json()["rows"]
    assert [r["value"] for r in rows] == [5.0, 10.0]
    assert rows[0]["mean_objective"] > rows[1]["mean_objective"]
    assert all(len(r["mean_errors"]) == 2 for r in rows)
    assert got.json()["csv"].count("\n") == 4  # note, header, two rows


def test_sweep_rejects_unknown_param():
    got = client.post("/sweep", json={"param": "Z", "values": [1],
                                      "schemes": ["mm"]})
    assert got.status_code == 422


def test_infeasible_bounds_surface_as_422():
    ini = save_scenario(default_scenario().with_updates(
        rate_bounds=((0.0, math.inf), (1e7, math.inf))))
    got = client.post("/run", json={"scheme": "mm", "scenario_ini": ini})
    assert got.status_code == 422
    assert "bounds_infeasible" in got.json()["detail"]
