from pathlib import Path
from typing import Any, Dict, List

from ellipse_rigidity.plot import group_series, plot_norms, sidecar_path

GAMMA_35_NORMS = [0.7220, 0.7215, 0.7202, 1.0757, 1.7370, 2.6304, 3.7642, 5.1015, 6.4986, 7.5732]


def rows_for(gamma: float, pairs: List[tuple]) -> List[Dict[str, Any]]:
    return [
        {"eccentricity": e, "gamma": gamma, "max_norm": norm, "argmax_q": 1,
         "stop_reason": "q-cap", "verdict": "inconclusive", "wall_time": 0.0,
         "kappa_flags": 0, "terms": []}
        for e, norm in pairs
    ]


def test_group_series() -> None:
    rows = rows_for(3.5, [(0.2, 0.7202), (0.0, 0.7220)]) + rows_for(3.1, [(0.1, 0.7)])
    series = group_series(rows)
    assert list(series) == [3.1, 3.5]
    assert series[3.5] == [(0.0, 0.7220), (0.2, 0.7202)]


def test_plot_single_series(tmp_path: Path) -> None:
    rows = rows_for(3.5, [(i / 10, norm) for i, norm in enumerate(GAMMA_35_NORMS)])
    svg = tmp_path / "gamma35.svg"
    data_path = plot_norms(rows, svg)
    assert data_path == sidecar_path(svg) == tmp_path / "gamma35.dat"
    text = svg.read_text()
    assert text.startswith("<?xml")
    assert "<svg" in text
    lines = data_path.read_text().splitlines()
    assert lines[0] == "# gamma eccentricity max_norm"
    assert lines[1] == "3.5 0 0.722"
    assert lines[4] == "3.5 0.3 1.0757"
    assert len(lines) == 11


def test_plot_is_reproducible(tmp_path: Path) -> None:
    rows = rows_for(3.5, [(0.28, 0.9695), (0.29, 1.0216)]) + rows_for(3.01, [(0.34, 1.0183)])
    plot_norms(rows, tmp_path / "a.svg")
    plot_norms(rows, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    assert (tmp_path / "a.dat").read_bytes() == (tmp_path / "b.dat").read_bytes()


def test_empty_plot(tmp_path: Path) -> None:
    svg = tmp_path / "empty.svg"
    data_path = plot_norms([], svg)
    assert "<svg" in svg.read_text()
    assert data_path.read_text() == "# gamma eccentricity max_norm\n"
