# SPDX-FileCopyrightText: 2025-present Xiang Wang <ramwin@qq.com>
#
# SPDX-License-Identifier: MIT

"""
Eccentricity / gamma sweeps of max_q N_q, and their CSV / JSON files.

The kappa table of each eccentricity is computed (or read from the cache)
once and shared by every gamma; the (e, gamma) scans then run on a thread
pool.  CSV output only depends on the configuration, so repeated runs give
the same bytes.
"""

import csv
import dataclasses
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .__about__ import __version__
from .cache import EccentricityCache, default_cache_dir
from .ellipse_geometry import EllipseSpec, make_ellipse
from .errors import ConfigError, DomainError, ResultParseError
from .isospectral_operator import (
    C_CUTOFF,
    KAPPA_THRESHOLD,
    MAXQ,
    KappaTable,
    StopPolicy,
    check_gamma,
    decay_exponent,
    rigidity_scan,
)
from .types import NormTermData, SweepRowData
from .worker import PoolWork

logger = logging.getLogger(__name__)

CSV_FIELDS = ("eccentricity", "gamma", "max_norm", "argmax_q", "stop_reason", "verdict")
GRID_DECIMALS = 10

PathLike = Union[str, Path]


def e_grid(e_min: float, e_max: float, e_step: float) -> List[float]:
    """
    闭区间 [e_min, e_max] 上的等距网格

    用整数步数生成并四舍五入到 10 位小数，避免 0.1 累加带来的漂移。
    """
    if not e_step > 0.0:
        raise ConfigError(f"e_step must be positive, got {e_step!r}")
    if e_max < e_min:
        raise ConfigError(f"e_max={e_max!r} is below e_min={e_min!r}")
    count = int(math.floor((e_max - e_min) / e_step + 1e-9))
    return [round(e_min + i * e_step, GRID_DECIMALS) for i in range(count + 1)]


def _parse_floats(text: str) -> List[float]:
    return [float(item) for item in text.split(",") if item.strip()]


def _parse_optional_float(text: str) -> Optional[float]:
    if text.strip().lower() in ("none", "off", ""):
        return None
    return float(text)


_CONFIG_PARSERS = {
    "e_values": _parse_floats,
    "gamma_values": _parse_floats,
    "e_min": float,
    "e_max": float,
    "e_step": float,
    "C_cutoff": int,
    "kappa_threshold": float,
    "maxq": int,
    "q_cap": int,
    "q_min": int,
    "circle_accord": float,
    "below_half": _parse_optional_float,
    "workers": int,
    "cache_dir": Path,
    "csv_path": Path,
    "json_path": Path,
}


def load_config_file(path: PathLike) -> Dict[str, Any]:
    """
    读取 ``key = value`` 格式的配置文件

    Args:
        path: 配置文件路径，``#`` 开头的行和空行被忽略

    Returns:
        dict: 已转换类型的配置项，可直接传给 ``build_config``

    Raises:
        ConfigError: 未知的 key、格式错误或无法读取
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key not in _CONFIG_PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_PARSERS[key](raw.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _dedupe(values: Iterable[float]) -> List[float]:
    seen: List[float] = []
    for value in values:
        if value not in seen:
            seen.append(value)
    return seen


@dataclass
class SweepConfig:
    e_values: List[float]
    gamma_values: List[float] = field(default_factory=lambda: [3.5])
    C_cutoff: int = C_CUTOFF  # noqa: N815
    kappa_threshold: float = KAPPA_THRESHOLD
    maxq: int = MAXQ
    q_cap: int = 30
    q_min: int = 4
    circle_accord: float = 0.10
    below_half: Optional[float] = 0.5
    workers: int = 4
    cache_dir: Optional[Path] = None
    csv_path: Optional[Path] = None
    json_path: Optional[Path] = None

    def validate(self) -> "SweepConfig":
        if not self.e_values:
            raise ConfigError("no eccentricities to sweep")
        if not self.gamma_values:
            raise ConfigError("no gamma values to sweep")
        for e in self.e_values:
            if not 0.0 <= e < 1.0:
                raise ConfigError(f"eccentricity {e!r} outside [0, 1)")
        for gamma in self.gamma_values:
            try:
                check_gamma(gamma)
            except DomainError as exc:
                raise ConfigError(str(exc)) from exc
        if self.C_cutoff < 1:
            raise ConfigError(f"C_cutoff must be >= 1, got {self.C_cutoff}")
        if not self.kappa_threshold > 0.0:
            raise ConfigError(f"kappa_threshold must be positive, got {self.kappa_threshold}")
        if self.maxq < 3:
            raise ConfigError(f"maxq must be >= 3, got {self.maxq}")
        if not 1 <= self.q_min <= self.q_cap:
            raise ConfigError(f"need 1 <= q_min <= q_cap, got {self.q_min}, {self.q_cap}")
        if self.q_cap > self.maxq:
            raise ConfigError(f"q_cap={self.q_cap} exceeds maxq={self.maxq}")
        if not self.circle_accord > 0.0:
            raise ConfigError(f"circle_accord must be positive, got {self.circle_accord}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        self.e_values = _dedupe(float(e) for e in self.e_values)
        self.gamma_values = _dedupe(float(g) for g in self.gamma_values)
        return self

    @property
    def policy(self) -> StopPolicy:
        return StopPolicy(
            circle_accord=self.circle_accord,
            below_half=self.below_half,
            q_cap=self.q_cap,
            q_min=self.q_min,
            c_cutoff=self.C_cutoff,
        )

    @property
    def kappa_j(self) -> int:
        return self.C_cutoff * self.q_cap

    def snapshot(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        for key in ("cache_dir", "csv_path", "json_path"):
            if data[key] is not None:
                data[key] = str(data[key])
        return data


def build_config(values: Mapping[str, Any]) -> SweepConfig:
    """
    由配置项构造并校验 ``SweepConfig``

    ``e_min/e_max/e_step`` 与 ``e_values`` 二选一；同时给出时以列表为准。
    """
    values = dict(values)
    grid = {key: values.pop(key) for key in ("e_min", "e_max", "e_step") if key in values}
    if "e_values" not in values and grid:
        missing = {"e_min", "e_max", "e_step"} - set(grid)
        if missing:
            raise ConfigError(f"eccentricity grid needs {', '.join(sorted(missing))}")
        values["e_values"] = e_grid(grid["e_min"], grid["e_max"], grid["e_step"])
    values.setdefault("e_values", [])
    try:
        config = SweepConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return config.validate()


@dataclass
class SweepResult:
    rows: List[SweepRowData]
    provenance: Dict[str, Any]

    def as_dict(self) -> Dict[str, Any]:
        return {"provenance": self.provenance, "rows": self.rows}


class _EccentricityJob:
    def __init__(self, config: SweepConfig, cache_dir: Path, e: float) -> None:
        self.ellipse: EllipseSpec = make_ellipse(e)
        self.cache = EccentricityCache(
            cache_dir, self.ellipse, maxq=config.maxq, threshold=config.kappa_threshold
        )
        self.kappa: Optional[KappaTable] = None


class _KappaWork(PoolWork[_EccentricityJob, _EccentricityJob]):
    def __init__(self, config: SweepConfig) -> None:
        super().__init__(max_workers=config.workers)
        self.config = config

    def handle(self, task: _EccentricityJob) -> _EccentricityJob:
        task.kappa = task.cache.kappa(self.config.kappa_j)
        return task


class _ScanWork(PoolWork[Tuple[_EccentricityJob, float], SweepRowData]):
    def __init__(self, config: SweepConfig) -> None:
        super().__init__(max_workers=config.workers)
        self.config = config

    def handle(self, task: Tuple[_EccentricityJob, float]) -> SweepRowData:
        job, gamma = task
        started = time.perf_counter()
        scan = rigidity_scan(
            job.ellipse,
            gamma,
            self.config.policy,
            kappa=job.kappa,
            orbits=job.cache.orbits(),
        )
        slope = decay_exponent(scan)
        if slope is not None:
            logger.info("%s gamma=%g: terms after the peak decay like q^%.3f",
                        job.ellipse, gamma, slope)
            if slope > 0.0:
                logger.warning("%s gamma=%g: norm terms grow after q=%d",
                               job.ellipse, gamma, scan.argmax_q)
        return {
            "eccentricity": scan.e,
            "gamma": scan.gamma,
            "max_norm": scan.max_norm,
            "argmax_q": scan.argmax_q,
            "stop_reason": scan.stop_reason.value,
            "verdict": scan.verdict.value,
            "wall_time": time.perf_counter() - started,
            "kappa_flags": scan.kappa_flags,
            "terms": list(scan.terms),
        }


def run_sweep(config: SweepConfig) -> SweepResult:
    """
    对每个 (e, gamma) 计算 max_q N_q，并按配置写出 CSV / JSON

    Args:
        config: 扫描配置，会先校验

    Returns:
        SweepResult: 行顺序为 e 在外、gamma 在内，与配置顺序一致
    """
    config.validate()
    cache_dir = config.cache_dir or default_cache_dir()
    logger.info(
        "sweep: %d eccentricities x %d gammas, cache %s",
        len(config.e_values), len(config.gamma_values), cache_dir,
    )
    jobs = [_EccentricityJob(config, cache_dir, e) for e in config.e_values]
    jobs = _KappaWork(config).run(jobs)
    tasks = [(job, gamma) for job in jobs for gamma in config.gamma_values]
    rows = _ScanWork(config).run(tasks)
    for job in jobs:
        job.cache.flush()

    result = SweepResult(
        rows=rows,
        provenance={"config": config.snapshot(), "version": __version__},
    )
    if config.csv_path is not None:
        write_csv(result, config.csv_path)
    if config.json_path is not None:
        write_json(result, config.json_path)
    logger.info("sweep finished: %d rows", len(rows))
    return result


def _g6(value: float) -> str:
    return f"{value:.6g}"


def render_csv(rows: Sequence[SweepRowData]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([
            _g6(row["eccentricity"]),
            _g6(row["gamma"]),
            _g6(row["max_norm"]),
            row["argmax_q"],
            row["stop_reason"],
            row["verdict"],
        ])
    return buffer.getvalue()


def write_csv(result: SweepResult, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(render_csv(result.rows), encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def write_json(result: SweepResult, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(
        json.dumps(result.as_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    logger.info("wrote %s", path)
    return path


def _row_from_mapping(data: Mapping[str, Any], path: str, lineno: int) -> SweepRowData:
    try:
        terms: List[NormTermData] = [
            {"q": int(t["q"]), "norm": float(t["norm"]), "circle": float(t["circle"])}
            for t in data.get("terms", [])
        ]
        return {
            "eccentricity": float(data["eccentricity"]),
            "gamma": float(data["gamma"]),
            "max_norm": float(data["max_norm"]),
            "argmax_q": int(data["argmax_q"]),
            "stop_reason": str(data["stop_reason"]),
            "verdict": str(data["verdict"]),
            "wall_time": float(data.get("wall_time", 0.0)),
            "kappa_flags": int(data.get("kappa_flags", 0)),
            "terms": terms,
        }
    except KeyError as exc:
        raise ResultParseError(path, lineno, f"missing field {exc.args[0]}") from exc
    except (TypeError, ValueError) as exc:
        raise ResultParseError(path, lineno, str(exc)) from exc


def _read_csv(path: Path, text: str) -> List[SweepRowData]:
    lines = text.splitlines()
    if not lines:
        raise ResultParseError(str(path), 1, "empty file")
    header = next(csv.reader([lines[0]]))
    if tuple(header) != CSV_FIELDS:
        raise ResultParseError(str(path), 1, f"unexpected header {','.join(header)}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = next(csv.reader([line]))
        if len(cells) != len(CSV_FIELDS):
            raise ResultParseError(
                str(path), lineno, f"expected {len(CSV_FIELDS)} fields, got {len(cells)}"
            )
        rows.append(_row_from_mapping(dict(zip(CSV_FIELDS, cells)), str(path), lineno))
    return rows


def _read_json(path: Path, text: str) -> List[SweepRowData]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ResultParseError(str(path), exc.lineno, exc.msg) from exc
    if not isinstance(data, dict) or not isinstance(data.get("rows"), list):
        raise ResultParseError(str(path), 1, "expected an object with a 'rows' list")
    rows = []
    for row in data["rows"]:
        if not isinstance(row, dict):
            raise ResultParseError(str(path), 1, "row is not an object")
        rows.append(_row_from_mapping(row, str(path), 1))
    return rows


def read_results(path: PathLike) -> List[SweepRowData]:
    """读取 ``write_csv`` / ``write_json`` 写出的结果文件（按后缀区分）"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ResultParseError(str(path), 0, f"cannot read: {exc}") from exc
    if path.suffix.lower() == ".json":
        return _read_json(path, text)
    return _read_csv(path, text)


def first_crossing(rows: Iterable[SweepRowData], gamma: float) -> Optional[float]:
    """Smallest eccentricity whose max norm reaches 1 for this gamma."""
    hits = [
        row["eccentricity"]
        for row in rows
        if math.isclose(row["gamma"], gamma) and row["max_norm"] >= 1.0
    ]
    return min(hits) if hits else None
