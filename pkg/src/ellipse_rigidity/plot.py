#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Xiang Wang <ramwin@qq.com>

"""
max_q N_q against eccentricity, one series per gamma, as a static SVG.

Only the object API is used (no pyplot state), so plotting is safe from any
thread.  A fixed hash salt and no Date metadata keep the SVG bytes stable.
"""

import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .types import SweepRowData

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
_SVG_RC = {"svg.hashsalt": "ellipse-rigidity", "svg.fonttype": "path"}


def group_series(rows: Iterable[SweepRowData]) -> Dict[float, List[Tuple[float, float]]]:
    """gamma -> [(e, max_norm)]，按 e 排序"""
    series: Dict[float, List[Tuple[float, float]]] = defaultdict(list)
    for row in rows:
        series[row["gamma"]].append((row["eccentricity"], row["max_norm"]))
    return {gamma: sorted(points) for gamma, points in sorted(series.items())}


def sidecar_path(svg_path: PathLike) -> Path:
    return Path(svg_path).with_suffix(".dat")


def write_plot_data(rows: Iterable[SweepRowData], path: PathLike) -> Path:
    path = Path(path)
    lines = ["# gamma eccentricity max_norm"]
    for gamma, points in group_series(rows).items():
        for e, norm in points:
            lines.append(f"{gamma:.6g} {e:.6g} {norm:.6g}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def plot_norms(rows: Iterable[SweepRowData], svg_path: PathLike) -> Path:
    """
    画出 max N_q 与离心率的关系并写出 SVG 和 ``.dat`` 数据文件

    Args:
        rows: sweep 结果行，可以为空（只画坐标轴和 y = 1 参考线）
        svg_path: 输出 SVG 路径

    Returns:
        Path: 数据文件路径
    """
    rows = list(rows)
    svg_path = Path(svg_path)
    series = group_series(rows)

    with matplotlib.rc_context(_SVG_RC):
        figure = Figure(figsize=(6.4, 4.8))
        FigureCanvasSVG(figure)
        ax = figure.add_subplot(1, 1, 1)
        for gamma, points in series.items():
            es = [p[0] for p in points]
            norms = [p[1] for p in points]
            ax.plot(es, norms, marker="o", markersize=3, label=f"gamma = {gamma:g}")
        ax.axhline(1.0, color="black", linestyle="--", linewidth=0.8)
        ax.set_xlim(0.0, 1.0)
        ax.set_xlabel("eccentricity")
        ax.set_ylabel("max norm term")
        ax.set_title("Norm terms vs eccentricity")
        if series:
            ax.legend(loc="upper left")
        figure.savefig(svg_path, format="svg", metadata={"Date": None})

    data_path = write_plot_data(rows, sidecar_path(svg_path))
    logger.info("wrote %s (%d series) and %s", svg_path, len(series), data_path)
    return data_path
