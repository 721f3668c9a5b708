import json
import math
from pathlib import Path
from typing import Any, Dict, List

import pytest

from ellipse_rigidity import __version__
from ellipse_rigidity.errors import ConfigError, ResultParseError
from ellipse_rigidity.sweep import (
    SweepConfig,
    build_config,
    e_grid,
    first_crossing,
    load_config_file,
    read_results,
    render_csv,
    run_sweep,
)

# desk-scale settings, the defaults are C = 100, q_cap = 30, maxq = 500
SMALL: Dict[str, Any] = {
    "gamma_values": [3.5, 3.1],
    "C_cutoff": 10,
    "q_cap": 6,
    "maxq": 30,
    "workers": 2,
}


def small_config(tmp_path: Path, **overrides: Any) -> SweepConfig:
    values = dict(SMALL, e_values=[0.0, 0.3], cache_dir=tmp_path / "cache")
    values.update(overrides)
    return build_config(values)


def test_e_grid() -> None:
    assert e_grid(0.0, 0.9, 0.1) == [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    assert e_grid(0.32, 0.40, 0.01) == [0.32, 0.33, 0.34, 0.35, 0.36, 0.37, 0.38, 0.39, 0.4]
    assert e_grid(0.5, 0.5, 0.1) == [0.5]
    with pytest.raises(ConfigError):
        e_grid(0.0, 0.5, 0.0)
    with pytest.raises(ConfigError):
        e_grid(0.5, 0.1, 0.1)


def test_build_config_grid() -> None:
    config = build_config({"e_min": 0.2, "e_max": 0.4, "e_step": 0.1})
    assert config.e_values == [0.2, 0.3, 0.4]
    assert config.gamma_values == [3.5]
    assert config.kappa_j == 3000
    with pytest.raises(ConfigError, match="e_step"):
        build_config({"e_min": 0.2, "e_max": 0.4})


@pytest.mark.parametrize("values, match", [
    ({}, "no eccentricities"),
    ({"e_values": []}, "no eccentricities"),
    ({"e_values": [1.0]}, "outside"),
    ({"e_values": [0.3], "gamma_values": [4.0]}, "gamma"),
    ({"e_values": [0.3], "q_cap": 600}, "maxq"),
    ({"e_values": [0.3], "q_min": 0}, "q_min"),
    ({"e_values": [0.3], "workers": 0}, "workers"),
    ({"e_values": [0.3], "colour": "red"}, "colour"),
])
def test_invalid_config(values: Dict[str, Any], match: str) -> None:
    with pytest.raises(ConfigError, match=match):
        build_config(values)


def test_duplicates_removed() -> None:
    config = build_config({"e_values": [0.1, 0.2, 0.1], "gamma_values": [3.5, 3.5]})
    assert config.e_values == [0.1, 0.2]
    assert config.gamma_values == [3.5]


def test_load_config_file(tmp_path: Path) -> None:
    path = tmp_path / "sweep.conf"
    path.write_text(
        "# gamma 3.01 refinement\n"
        "\n"
        "e_values = 0.32, 0.33\n"
        "gamma_values = 3.01\n"
        "q_cap = 20\n"
        "below_half = none\n"
        "cache_dir = /tmp/somewhere\n"
    )
    values = load_config_file(path)
    assert values == {
        "e_values": [0.32, 0.33],
        "gamma_values": [3.01],
        "q_cap": 20,
        "below_half": None,
        "cache_dir": Path("/tmp/somewhere"),
    }
    assert build_config(values).policy.below_half is None


@pytest.mark.parametrize("text, match", [
    ("maxq = 10\nwidth = 3\n", ":2: unknown key"),
    ("maxq\n", ":1: expected"),
    ("maxq = lots\n", ":1: bad value"),
])
def test_bad_config_file(tmp_path: Path, text: str, match: str) -> None:
    path = tmp_path / "bad.conf"
    path.write_text(text)
    with pytest.raises(ConfigError, match=match):
        load_config_file(path)


def test_run_sweep(tmp_path: Path) -> None:
    csv_path = tmp_path / "out.csv"
    json_path = tmp_path / "out.json"
    result = run_sweep(small_config(tmp_path, csv_path=csv_path, json_path=json_path))
    assert [(r["eccentricity"], r["gamma"]) for r in result.rows] == [
        (0.0, 3.5), (0.0, 3.1), (0.3, 3.5), (0.3, 3.1),
    ]
    circle = result.rows[0]
    assert circle["max_norm"] == pytest.approx(0.7220, abs=5e-3)
    assert circle["argmax_q"] == 1
    assert circle["verdict"] == "injective-evidence"
    for row in result.rows:
        assert 1 <= len(row["terms"]) <= 6
        assert row["max_norm"] == max(t["norm"] for t in row["terms"])

    lines = csv_path.read_text().splitlines()
    assert lines[0] == "eccentricity,gamma,max_norm,argmax_q,stop_reason,verdict"
    assert lines[1].startswith("0,3.5,0.72")
    assert len(lines) == 5

    data = json.loads(json_path.read_text())
    assert data["provenance"]["version"] == __version__
    assert data["provenance"]["config"]["C_cutoff"] == 10
    assert len(data["rows"][2]["terms"]) == len(result.rows[2]["terms"])
    assert len(list((tmp_path / "cache").glob("*.cache"))) == 2


def test_csv_is_deterministic(tmp_path: Path) -> None:
    cold = run_sweep(small_config(tmp_path))
    warm = run_sweep(small_config(tmp_path))
    other = run_sweep(small_config(tmp_path, cache_dir=tmp_path / "elsewhere", workers=1))
    assert render_csv(cold.rows) == render_csv(warm.rows) == render_csv(other.rows)
    assert [r["terms"] for r in cold.rows] == [r["terms"] for r in warm.rows]


def test_empty_sweep_writes_nothing(tmp_path: Path) -> None:
    csv_path = tmp_path / "out.csv"
    with pytest.raises(ConfigError):
        run_sweep(SweepConfig(e_values=[], csv_path=csv_path, cache_dir=tmp_path))
    assert not csv_path.exists()


def test_read_results_round_trip(tmp_path: Path) -> None:
    config = small_config(tmp_path, csv_path=tmp_path / "r.csv", json_path=tmp_path / "r.json")
    result = run_sweep(config)
    from_csv = read_results(tmp_path / "r.csv")
    from_json = read_results(tmp_path / "r.json")
    assert [r["eccentricity"] for r in from_csv] == [0.0, 0.0, 0.3, 0.3]
    assert [r["stop_reason"] for r in from_csv] == [r["stop_reason"] for r in result.rows]
    assert from_csv[2]["max_norm"] == pytest.approx(result.rows[2]["max_norm"], rel=1e-5)
    assert from_csv[0]["terms"] == []
    assert from_json == result.rows


def test_read_results_errors(tmp_path: Path) -> None:
    bad_csv = tmp_path / "bad.csv"
    bad_csv.write_text(
        "eccentricity,gamma,max_norm,argmax_q,stop_reason,verdict\n"
        "0.1,3.5,0.72,1,circle-agreement,injective-evidence\n"
        "0.2,3.5,oops,1,circle-agreement,injective-evidence\n"
    )
    with pytest.raises(ResultParseError) as info:
        read_results(bad_csv)
    assert info.value.line == 3
    assert "bad.csv:3:" in str(info.value)

    short_csv = tmp_path / "short.csv"
    short_csv.write_text("eccentricity,gamma,max_norm,argmax_q,stop_reason,verdict\n0.1,3.5\n")
    with pytest.raises(ResultParseError, match=":2:"):
        read_results(short_csv)

    header = tmp_path / "header.csv"
    header.write_text("e,norm\n")
    with pytest.raises(ResultParseError, match=":1:"):
        read_results(header)

    bad_json = tmp_path / "bad.json"
    bad_json.write_text('{\n  "rows": [\n    {"eccentricity": 0.1,,}\n  ]\n}\n')
    with pytest.raises(ResultParseError) as info:
        read_results(bad_json)
    assert info.value.line == 3


def row(e: float, gamma: float, norm: float) -> Dict[str, Any]:
    return {
        "eccentricity": e, "gamma": gamma, "max_norm": norm, "argmax_q": 3,
        "stop_reason": "q-cap", "verdict": "inconclusive", "wall_time": 0.0,
        "kappa_flags": 0, "terms": [],
    }


def test_first_crossing() -> None:
    rows = [
        row(0.27, 3.5, 0.9308), row(0.28, 3.5, 0.9695), row(0.29, 3.5, 1.0216),
        row(0.30, 3.5, 1.0757), row(0.33, 3.1, 1.0107), row(0.32, 3.1, 0.9683),
    ]
    assert first_crossing(rows, 3.5) == 0.29
    assert first_crossing(rows, 3.1) == 0.33
    assert first_crossing(rows, 3.01) is None


@pytest.fixture(scope="module")
def crossover_rows(tmp_path_factory: pytest.TempPathFactory) -> List[Dict[str, Any]]:
    """gamma = 3.5, 3.1, 3.01 在 e = 0.00 .. 0.40（步长 0.01）上的完整扫描"""
    config = build_config({
        "e_min": 0.0,
        "e_max": 0.40,
        "e_step": 0.01,
        "gamma_values": [3.5, 3.1, 3.01],
        "cache_dir": tmp_path_factory.mktemp("cache"),
    })
    return list(run_sweep(config).rows)


def norm_at(rows: List[Dict[str, Any]], e: float, gamma: float) -> float:
    return next(
        r["max_norm"] for r in rows
        if math.isclose(r["eccentricity"], e) and math.isclose(r["gamma"], gamma)
    )


@pytest.mark.slow
@pytest.mark.parametrize("gamma, crossing", [(3.5, 0.29), (3.1, 0.33), (3.01, 0.34)])
def test_grid_crossings(crossover_rows: List[Dict[str, Any]], gamma: float, crossing: float) -> None:
    assert first_crossing(crossover_rows, gamma) == pytest.approx(crossing, abs=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("e, gamma, expected", [
    (0.28, 3.5, 0.9695),
    (0.29, 3.5, 1.0216),
    (0.25, 3.1, 0.7345),
    (0.32, 3.1, 0.9683),
    (0.33, 3.1, 1.0107),
    (0.32, 3.01, 0.9382),
    (0.33, 3.01, 0.9775),
    (0.34, 3.01, 1.0183),
])
def test_grid_spot_values(
        crossover_rows: List[Dict[str, Any]], e: float, gamma: float, expected: float) -> None:
    assert norm_at(crossover_rows, e, gamma) == pytest.approx(expected, rel=0.02)


@pytest.mark.slow
def test_grid_argmax(crossover_rows: List[Dict[str, Any]]) -> None:
    """gamma = 3.5：e <= 0.22 时最大项在 q = 1，之后在 q = 3"""
    rows = [r for r in crossover_rows if math.isclose(r["gamma"], 3.5)]
    assert len(rows) == 41
    for r in rows:
        expected = 1 if r["eccentricity"] <= 0.22 + 1e-9 else 3
        assert r["argmax_q"] == expected, r["eccentricity"]
