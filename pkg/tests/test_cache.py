import gc
import hashlib
import logging
from pathlib import Path

import numpy as np
import pytest

from ellipse_rigidity import cache as cache_module
from ellipse_rigidity.cache import (
    CACHE_ENV,
    EccentricityCache,
    cache_filename,
    clear_cache,
    default_cache_dir,
)
from ellipse_rigidity.ellipse_geometry import EllipseSpec

MAXQ = 40


@pytest.fixture
def cache_dir(tmp_path: Path) -> Path:
    return tmp_path / "cache"


def no_compute(*args, **kwargs):
    raise AssertionError("kappa_table should not be called on a warm cache")


def test_cold_then_warm(cache_dir: Path, ellipse: EllipseSpec, monkeypatch: pytest.MonkeyPatch) -> None:
    cold = EccentricityCache(cache_dir, ellipse, maxq=MAXQ).kappa(8)
    files = list(cache_dir.glob("*.cache"))
    assert len(files) == 1

    monkeypatch.setattr(cache_module, "kappa_table", no_compute)
    warm_cache = EccentricityCache(cache_dir, ellipse, maxq=MAXQ)
    warm = warm_cache.kappa(8)
    np.testing.assert_array_equal(cold.kappa, warm.kappa)
    assert cold.status == warm.status
    assert cold.q_at == warm.q_at
    assert cold.q_used == warm.q_used
    # every period that was built had its lambda stored
    assert cold.q_used in warm_cache.lambdas()
    assert set(warm_cache.lambdas()) <= set(range(3, MAXQ + 1))

    shorter = warm_cache.kappa(4)
    assert shorter.J == 4
    np.testing.assert_array_equal(shorter.kappa, cold.kappa[:4])


def test_longer_request_recomputes(cache_dir: Path, ellipse: EllipseSpec) -> None:
    cache = EccentricityCache(cache_dir, ellipse, maxq=MAXQ)
    short = cache.kappa(4)
    long = cache.kappa(8)
    assert long.J == 8
    np.testing.assert_array_equal(long.kappa[:4], short.kappa)
    reread = EccentricityCache(cache_dir, ellipse, maxq=MAXQ)
    assert reread.kappa(8).J == 8


def test_lambdas_reused(cache_dir: Path, ellipse: EllipseSpec) -> None:
    first = EccentricityCache(cache_dir, ellipse, maxq=MAXQ)
    first.kappa(6)
    second = EccentricityCache(cache_dir, ellipse, maxq=MAXQ)
    # a different J misses the kappa entry but keeps every lambda_q
    table = second.kappa(10)
    assert first.lambdas().items() <= second.lambdas().items()
    assert table.J == 10


@pytest.mark.parametrize("damage", ["flip", "truncate", "no-checksum"])
def test_corrupt_file_is_recomputed(
    cache_dir: Path,
    ellipse: EllipseSpec,
    caplog: pytest.LogCaptureFixture,
    damage: str,
) -> None:
    cold = EccentricityCache(cache_dir, ellipse, maxq=MAXQ).kappa(6)
    path = next(cache_dir.glob("*.cache"))
    raw = path.read_bytes()
    if damage == "flip":
        index = raw.index(b"lambda 3 = ") + len(b"lambda 3 = ") + 3
        raw = raw[:index] + (b"1" if raw[index:index + 1] != b"1" else b"2") + raw[index + 1:]
    elif damage == "truncate":
        raw = raw[: len(raw) // 2]
    else:
        raw = raw[: raw.rindex(b"checksum = ")]
    path.write_bytes(raw)

    with caplog.at_level(logging.WARNING, logger="ellipse_rigidity.cache"):
        again = EccentricityCache(cache_dir, ellipse, maxq=MAXQ).kappa(6)
    assert "corrupt" in caplog.text
    np.testing.assert_array_equal(cold.kappa, again.kappa)
    # rewritten with a valid checksum
    assert path.read_bytes().startswith(b"# ellipse-rigidity cache v2")


def test_file_format(cache_dir: Path, ellipse: EllipseSpec) -> None:
    cache = EccentricityCache(cache_dir, ellipse, maxq=MAXQ)
    cache.kappa(4)
    lines = cache.path.read_text().splitlines()
    assert lines[0] == "# ellipse-rigidity cache v2"
    assert lines[-1].startswith("checksum = ")
    assert "kappa_J = 4" in lines
    assert any(line.startswith("kappa 1 = 0 symmetry 0") for line in lines)
    lam = float(next(line for line in lines if line.startswith("lambda 3 = ")).split(" = ")[1])
    assert lam == cache.lambdas()[3]


def test_filename_keys() -> None:
    name = cache_filename(0.3, 500, 1e-6)
    assert name == cache_filename(0.3, 500, 1e-6)
    assert name.startswith("e0.300000-")
    assert name.endswith(".cache")
    assert name != cache_filename(0.3, 400, 1e-6)
    assert name != cache_filename(0.3, 500, 1e-7)
    assert name != cache_filename(0.30000001, 500, 1e-6)


def test_clear(cache_dir: Path, ellipse: EllipseSpec, circle: EllipseSpec) -> None:
    assert clear_cache(cache_dir) == 0
    EccentricityCache(cache_dir, ellipse, maxq=MAXQ).kappa(2)
    EccentricityCache(cache_dir, circle, maxq=MAXQ).kappa(2)
    (cache_dir / "notes.txt").write_text("keep me")
    assert clear_cache(cache_dir) == 2
    assert list(cache_dir.glob("*.cache")) == []
    assert (cache_dir / "notes.txt").exists()


def test_default_dir(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.setenv(CACHE_ENV, str(tmp_path))
    assert default_cache_dir() == tmp_path
    monkeypatch.delenv(CACHE_ENV)
    assert default_cache_dir() == Path.home() / ".cache" / "ellipse-rigidity"


def test_lambdas_snapshot_and_remember(cache_dir: Path, ellipse: EllipseSpec) -> None:
    cache = EccentricityCache(cache_dir, ellipse, maxq=MAXQ)
    snapshot = cache.lambdas()
    snapshot[7] = 0.1
    assert 7 not in cache.lambdas()

    orbit = cache.orbits()(7)
    assert cache.lambdas()[7] == orbit.lambda_q
    # a stored value is never overwritten
    cache.remember(7, 0.1)
    assert cache.lambdas()[7] == orbit.lambda_q
    cache.flush()
    assert EccentricityCache(cache_dir, ellipse, maxq=MAXQ).lambdas() == {7: orbit.lambda_q}


def test_path_locks_are_shared_then_released(cache_dir: Path, ellipse: EllipseSpec) -> None:
    first = EccentricityCache(cache_dir, ellipse, maxq=MAXQ)
    second = EccentricityCache(cache_dir, ellipse, maxq=MAXQ)
    assert first.lock is second.lock
    path = first.path
    assert path in EccentricityCache._locks
    del first, second
    gc.collect()
    assert path not in EccentricityCache._locks


def test_old_format_is_recomputed(cache_dir: Path, ellipse: EllipseSpec, caplog: pytest.LogCaptureFixture) -> None:
    cache = EccentricityCache(cache_dir, ellipse, maxq=MAXQ)
    cache.kappa(4)
    body = cache.path.read_bytes().replace(b"cache v2", b"cache v1", 1)
    body = body[: body.rindex(b"checksum = ")]
    body += b"checksum = " + hashlib.sha256(body).hexdigest().encode("ascii") + b"\n"
    cache.path.write_bytes(body)
    with caplog.at_level(logging.WARNING, logger="ellipse_rigidity.cache"):
        assert EccentricityCache(cache_dir, ellipse, maxq=MAXQ).kappa(4).J == 4
    assert "corrupt" in caplog.text
    assert cache.path.read_bytes().startswith(b"# ellipse-rigidity cache v2\n")
