#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Xiang Wang <ramwin@qq.com>

"""
Per-eccentricity disk cache for lambda_q and the kappa table.

One plain-text file per (e, maxq, threshold); floats are written with 17
significant digits so a warm run reads back exactly the numbers a cold run
computed.  The last line is a sha256 of everything above it: files that fail
the check were cut short or edited and are recomputed, never reused.
"""

import hashlib
import logging
import os
import tempfile
import threading
import weakref
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .ellipse_geometry import EllipseSpec
from .errors import CacheError
from .isospectral_operator import (
    KAPPA_THRESHOLD,
    MAXQ,
    KappaStatus,
    KappaTable,
    OrbitSource,
    kappa_table,
    orbit_source,
)

logger = logging.getLogger(__name__)

CACHE_ENV = "ELLIPSE_RIGIDITY_CACHE"
SUFFIX = ".cache"
_HEADER = "# ellipse-rigidity cache v2"

PathLike = Union[str, "os.PathLike[str]"]


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "ellipse-rigidity"


def cache_filename(e: float, maxq: int, threshold: float) -> str:
    key = f"{float(e)!r}|{int(maxq)}|{float(threshold)!r}"
    digest = hashlib.sha1(key.encode("utf-8")).hexdigest()[:12]
    return f"e{float(e):.6f}-{digest}{SUFFIX}"


def _fmt(value: float) -> str:
    return f"{value:.17g}"


class _PathLock:
    """可弱引用的 RLock；最后一个持有者释放后从登记表中消失"""

    __slots__ = ("_rlock", "__weakref__")

    def __init__(self) -> None:
        self._rlock = threading.RLock()

    def __enter__(self) -> bool:
        return self._rlock.acquire()

    def __exit__(self, *exc: Any) -> None:
        self._rlock.release()


class EccentricityCache:
    """
    一个离心率对应一个缓存文件

    同一进程内按文件路径加锁（读-算-写整体互斥），写入先落临时文件再
    ``os.replace``，因此不会读到半个文件。

    Usage:
        >>> cache = EccentricityCache(cache_dir, ellipse)
        >>> table = cache.kappa(3000)          # 冷缓存时计算并写盘
        >>> lambdas = cache.lambdas()          # q -> lambda_q
    """

    _locks: "weakref.WeakValueDictionary[Path, _PathLock]" = weakref.WeakValueDictionary()
    _locks_guard = threading.Lock()

    def __init__(
        self,
        cache_dir: PathLike,
        ellipse: EllipseSpec,
        *,
        maxq: int = MAXQ,
        threshold: float = KAPPA_THRESHOLD,
    ) -> None:
        self.ellipse = ellipse
        self.maxq = maxq
        self.threshold = threshold
        self.cache_dir = Path(cache_dir)
        self.path = self.cache_dir / cache_filename(ellipse.e, maxq, threshold)
        self._lambdas: Dict[int, float] = {}
        self._kappa: Optional[KappaTable] = None
        self._loaded = False
        with self._locks_guard:
            lock = self._locks.get(self.path)
            if lock is None:
                lock = self._locks[self.path] = _PathLock()
        self.lock = lock

    # ---------------- 公共 API ----------------
    def lambdas(self) -> Dict[int, float]:
        """q -> lambda_q 的快照"""
        with self.lock:
            self._ensure_loaded()
            return dict(self._lambdas)

    def remember(self, q: int, lam: float) -> None:
        with self.lock:
            self._ensure_loaded()
            self._lambdas.setdefault(q, lam)

    def orbits(self) -> OrbitSource:
        """读缓存里的 lambda_q 建轨道，新解出的 lambda_q 加锁写回"""
        return orbit_source(self.ellipse, self.lambdas(), self.remember)

    def kappa(self, J: int) -> KappaTable:  # noqa: N803
        """
        获取至少覆盖 j <= J 的 kappa 表，不够时重新计算并写盘

        Args:
            J: 需要的最大 j

        Returns:
            KappaTable: 恰好 J 项
        """
        with self.lock:
            self._ensure_loaded()
            if self._kappa is not None and self._kappa.J >= J:
                logger.info("cache hit: %s kappa J=%d", self.path.name, J)
                return self._kappa.truncated(J)
            logger.info("cache miss: %s kappa J=%d", self.path.name, J)
            table = kappa_table(
                self.ellipse, J, self.threshold, maxq=self.maxq, lambdas=self._lambdas
            )
            self._kappa = table
            self._write()
            return table

    def flush(self) -> None:
        with self.lock:
            self._ensure_loaded()
            self._write()

    def clear(self) -> None:
        with self.lock:
            self.path.unlink(missing_ok=True)
            self._lambdas.clear()
            self._kappa = None
            self._loaded = True

    # ---------------- 内部 ----------------
    def _ensure_loaded(self) -> None:
        if self._loaded:
            return
        self._loaded = True
        if not self.path.exists():
            return
        try:
            raw = self.path.read_bytes()
        except OSError as exc:
            raise CacheError(f"cannot read cache file {self.path}: {exc}") from exc
        parsed = self._parse(raw)
        if parsed is None:
            logger.warning("discarding corrupt cache file %s", self.path)
            self.path.unlink(missing_ok=True)
            return
        self._lambdas.update(parsed[0])
        self._kappa = parsed[1]

    def _parse(
        self, raw: bytes
    ) -> Optional[Tuple[Dict[int, float], Optional[KappaTable]]]:
        if not raw.startswith(_HEADER.encode("ascii") + b"\n"):
            return None
        body, sep, last = raw.rstrip(b"\n").rpartition(b"\n")
        if not sep or not last.startswith(b"checksum = "):
            return None
        body += b"\n"
        expected = last[len(b"checksum = "):].decode("ascii", "replace").strip()
        if hashlib.sha256(body).hexdigest() != expected:
            return None

        lambdas: Dict[int, float] = {}
        kappa_rows: Dict[int, Tuple[float, KappaStatus, int]] = {}
        kappa_j = 0
        q_used = 0
        try:
            for line in body.decode("utf-8").splitlines():
                if not line or line.startswith("#"):
                    continue
                key, _, value = line.partition(" = ")
                words = key.split()
                if words[0] == "lambda":
                    lambdas[int(words[1])] = float(value)
                elif words[0] == "kappa":
                    number, status, q_at = value.split()
                    kappa_rows[int(words[1])] = (float(number), KappaStatus(status), int(q_at))
                elif words[0] == "kappa_J":
                    kappa_j = int(value)
                elif words[0] == "kappa_q_used":
                    q_used = int(value)
        except (ValueError, IndexError):
            return None

        table = None
        if kappa_j:
            if sorted(kappa_rows) != list(range(1, kappa_j + 1)):
                return None
            rows = [kappa_rows[j] for j in range(1, kappa_j + 1)]
            table = KappaTable(
                J=kappa_j,
                kappa=np.array([r[0] for r in rows]),
                status=[r[1] for r in rows],
                q_at=[r[2] for r in rows],
                q_used=q_used,
            )
        return lambdas, table

    def _render(self) -> bytes:
        lines: List[str] = [
            _HEADER,
            f"e = {_fmt(self.ellipse.e)}",
            f"maxq = {self.maxq}",
            f"threshold = {_fmt(self.threshold)}",
        ]
        for q in sorted(self._lambdas):
            lines.append(f"lambda {q} = {_fmt(self._lambdas[q])}")
        if self._kappa is not None:
            table = self._kappa
            lines.append(f"kappa_J = {table.J}")
            lines.append(f"kappa_q_used = {table.q_used}")
            for j in range(1, table.J + 1):
                lines.append(
                    f"kappa {j} = {_fmt(float(table.kappa[j - 1]))} "
                    f"{table.status[j - 1].value} {table.q_at[j - 1]}"
                )
        body = ("\n".join(lines) + "\n").encode("utf-8")
        return body + f"checksum = {hashlib.sha256(body).hexdigest()}\n".encode("ascii")

    def _write(self) -> None:
        data = self._render()
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.cache_dir, prefix=".tmp-", suffix=SUFFIX)
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                os.replace(tmp, self.path)
            except BaseException:
                Path(tmp).unlink(missing_ok=True)
                raise
        except OSError as exc:
            raise CacheError(f"cannot write cache file {self.path}: {exc}") from exc
        logger.debug("wrote %s (%d lambdas)", self.path.name, len(self._lambdas))


def clear_cache(cache_dir: PathLike) -> int:
    """删除目录下所有缓存文件，返回删除数量"""
    directory = Path(cache_dir)
    if not directory.is_dir():
        return 0
    removed = 0
    for path in sorted(directory.glob(f"*{SUFFIX}")):
        try:
            path.unlink()
        except OSError as exc:
            raise CacheError(f"cannot remove {path}: {exc}") from exc
        removed += 1
    logger.info("removed %d cache files from %s", removed, directory)
    return removed
