# SPDX-FileCopyrightText: 2025-present Xiang Wang <ramwin@qq.com>
#
# SPDX-License-Identifier: MIT

"""
Elliptic integrals and Jacobi functions in double precision.

Everything is built on one descending Landen / AGM sequence per parameter
``m``::

    a0 = 1, b0 = sqrt(1 - m), c0 = sqrt(m)
    a(n+1) = (a + b) / 2, b(n+1) = sqrt(a b), c(n+1) = (a - b) / 2

The sequence depends on ``m`` only, so it is cached and shared by the
complete integrals, the incomplete integrals and the amplitude.  ``phi`` and
``u`` may be numpy arrays; ``m`` is always a scalar parameter (not the
modulus ``k = sqrt(m)``).
"""

import logging
import math
from functools import lru_cache
from typing import NamedTuple, Tuple

import numpy as np

from .errors import DomainError
from .types import ArrayLike, Modulus

logger = logging.getLogger(__name__)

_EPS = 2.0 ** -53
_MAX_STEPS = 64
_ZETA_TERMS = 1000


class JacobiValues(NamedTuple):
    sn: ArrayLike
    cn: ArrayLike
    am: ArrayLike


def check_modulus(m: float) -> Modulus:
    m = float(m)
    if not 0.0 <= m < 1.0:
        raise DomainError(f"elliptic parameter m={m!r} outside [0, 1)")
    return Modulus(m)


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two positive numbers."""
    for _ in range(_MAX_STEPS):
        if abs(a - b) <= _EPS * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


@lru_cache(maxsize=4096)
def _landen_sequence(m: float) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    a, b, c = 1.0, math.sqrt(1.0 - m), math.sqrt(m)
    big_a = [a]
    big_c = [c]
    while c > _EPS * a:
        if len(big_a) > _MAX_STEPS:
            raise ArithmeticError(f"AGM did not converge for m={m!r}")
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        big_a.append(a)
        big_c.append(c)
    return tuple(big_a), tuple(big_c)


@lru_cache(maxsize=4096)
def _complete(m: float) -> Tuple[float, float]:
    big_a, big_c = _landen_sequence(m)
    k = math.pi / (2.0 * big_a[-1])
    series = math.fsum(2.0 ** (n - 1) * cn * cn for n, cn in enumerate(big_c))
    return k, k * (1.0 - series)


def complete_K(m: float) -> float:  # noqa: N802
    """K(m) = F(pi/2 | m)."""
    return _complete(check_modulus(m))[0]


def complete_E(m: float) -> float:  # noqa: N802
    """E(m) = E(pi/2 | m)."""
    return _complete(check_modulus(m))[1]


def _as_output(values: np.ndarray, scalar: bool) -> ArrayLike:
    if scalar:
        return float(values)
    return values


def _incomplete(phi: ArrayLike, m: float) -> Tuple[ArrayLike, ArrayLike]:
    m = check_modulus(m)
    scalar = np.ndim(phi) == 0
    phi = np.asarray(phi, dtype=float)
    big_a, big_c = _landen_sequence(m)
    k, e = _complete(m)

    # phi = turns * pi + rest, rest in [-pi/2, pi/2]
    turns = np.floor(phi / math.pi + 0.5)
    rest = phi - turns * math.pi
    sign = np.where(rest < 0.0, -1.0, 1.0)
    angle = np.abs(rest)

    b = math.sqrt(1.0 - m)
    sines = np.zeros_like(angle)
    power = 1.0
    for n in range(1, len(big_a)):
        a_prev = big_a[n - 1]
        # continuous branch of atan(b/a tan(angle)), always within pi/2 of angle
        step = np.arctan2(b * np.sin(angle), a_prev * np.cos(angle))
        step += 2.0 * math.pi * np.rint((angle - step) / (2.0 * math.pi))
        angle = angle + step
        b = math.sqrt(a_prev * b)
        power *= 2.0
        sines += big_c[n] * np.sin(angle)

    f_rest = angle / (power * big_a[-1])
    e_rest = f_rest * (e / k) + sines
    f_val = 2.0 * k * turns + sign * f_rest
    e_val = 2.0 * e * turns + sign * e_rest
    return _as_output(f_val, scalar), _as_output(e_val, scalar)


def incomplete_F(phi: ArrayLike, m: float) -> ArrayLike:  # noqa: N802
    """
    F(phi | m) for any real amplitude.

    Extended past [0, pi/2] by oddness and F(phi + pi) = F(phi) + 2K(m).
    """
    return _incomplete(phi, m)[0]


def incomplete_E(phi: ArrayLike, m: float) -> ArrayLike:  # noqa: N802
    """E(phi | m), extended with E(phi + pi) = E(phi) + 2E(m)."""
    return _incomplete(phi, m)[1]


def amplitude(u: ArrayLike, m: float) -> ArrayLike:
    """am(u | m): the continuous increasing inverse of ``incomplete_F``."""
    m = check_modulus(m)
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=float)
    big_a, big_c = _landen_sequence(m)
    top = len(big_a) - 1
    angle = (2.0 ** top) * big_a[top] * u
    for n in range(top, 0, -1):
        angle = 0.5 * (angle + np.arcsin(big_c[n] / big_a[n] * np.sin(angle)))
    return _as_output(angle, scalar)


def jacobi(u: ArrayLike, m: float) -> JacobiValues:
    am = amplitude(u, m)
    return JacobiValues(sn=np.sin(am) if np.ndim(am) else math.sin(am),
                        cn=np.cos(am) if np.ndim(am) else math.cos(am),
                        am=am)


@lru_cache(maxsize=256)
def riemann_zeta(gamma: float) -> float:
    """
    zeta(gamma) for real gamma > 1.

    Sums the first terms directly and closes the tail with the
    Euler-Maclaurin expansion of the integral bound; the neglected
    remainder is below 1e-20 for the 1000-term head.
    """
    s = float(gamma)
    if not s > 1.0:
        raise DomainError(f"zeta needs gamma > 1, got {gamma!r}")
    n = np.arange(_ZETA_TERMS, 0, -1, dtype=float)
    head = math.fsum(n ** -s)
    big_n = float(_ZETA_TERMS)
    tail = (
        big_n ** (1.0 - s) / (s - 1.0)
        - 0.5 * big_n ** -s
        + s * big_n ** (-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * big_n ** (-s - 3.0) / 720.0
    )
    return head + tail
