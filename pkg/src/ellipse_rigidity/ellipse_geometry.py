#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Xiang Wang <ramwin@qq.com>

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .elliptic_special import complete_E, complete_K, incomplete_E, incomplete_F
from .errors import DomainError
from .types import ArrayLike, Point

_WRAP_EPS = 4.0 * 2.0 ** -52


@dataclass(frozen=True)
class EllipseSpec:
    """
    周长为 1 的椭圆

    以离心率 ``e`` 参数化，其余字段由 ``make_ellipse`` 推出。
    ``complete_k`` / ``complete_e`` 缓存 K(e^2)、E(e^2)。
    """
    e: float
    a: float
    b: float
    c: float
    complete_k: float
    complete_e: float

    @property
    def m(self) -> float:
        return self.e * self.e

    def __str__(self) -> str:
        return f"ellipse(e={self.e:g})"


class BoundaryPoint(NamedTuple):
    phi: float
    position: Point
    s: float
    x: float
    rho: float
    mu: float


def make_ellipse(e: float) -> EllipseSpec:
    """
    构造周长为 1 的椭圆

    Args:
        e: 离心率，0 <= e < 1

    Returns:
        EllipseSpec: a = 1/(4E(e^2))，b = a*sqrt(1-e^2)，c = a*e
    """
    e = float(e)
    if not 0.0 <= e < 1.0:
        raise DomainError(f"eccentricity e={e!r} outside [0, 1)")
    m = e * e
    big_k = complete_K(m)
    big_e = complete_E(m)
    a = 1.0 / (4.0 * big_e)
    return EllipseSpec(
        e=e,
        a=a,
        b=a * math.sqrt(1.0 - m),
        c=a * e,
        complete_k=big_k,
        complete_e=big_e,
    )


def perimeter(ellipse: EllipseSpec) -> float:
    return 4.0 * ellipse.a * ellipse.complete_e


def wrap_unit(x: ArrayLike) -> ArrayLike:
    """Reduce into [0, 1); rounding just below a whole turn counts as 0."""
    r = np.mod(x, 1.0)
    r = np.where(r >= 1.0 - _WRAP_EPS, 0.0, r)
    if np.ndim(x) == 0:
        return float(r)
    return r


def lazutkin_coordinate(ellipse: EllipseSpec, phi: ArrayLike) -> ArrayLike:
    """x(phi) = (F(phi | e^2) - K(e^2)) / (4K(e^2)) mod 1; x = 0 at P."""
    big_k = ellipse.complete_k
    return wrap_unit((incomplete_F(phi, ellipse.m) - big_k) / (4.0 * big_k))


def lazutkin_weight(ellipse: EllipseSpec, phi: ArrayLike) -> ArrayLike:
    m = ellipse.m
    return 2.0 * ellipse.complete_k * np.sqrt((1.0 - m) / (1.0 - m * np.sin(phi) ** 2))


def radius_of_curvature(ellipse: EllipseSpec, phi: ArrayLike) -> ArrayLike:
    m = ellipse.m
    return ellipse.a / math.sqrt(1.0 - m) * (1.0 - m * np.sin(phi) ** 2) ** 1.5


def lazutkin_constant(ellipse: EllipseSpec) -> float:
    """C = [4 K(e^2) a^(1/3) (1 - e^2)^(1/3)]^(-1)."""
    return 1.0 / (
        4.0 * ellipse.complete_k * ellipse.a ** (1.0 / 3.0) * (1.0 - ellipse.m) ** (1.0 / 3.0)
    )


def boundary_point(ellipse: EllipseSpec, phi: float) -> BoundaryPoint:
    """
    Point X(phi) = (a sin phi, -b cos phi); phi = pi/2 is P = (a, 0).

    Arc length ``s`` is measured counter-clockwise from P.
    """
    phi = float(phi)
    a, m = ellipse.a, ellipse.m
    return BoundaryPoint(
        phi=phi,
        position=(a * math.sin(phi), -ellipse.b * math.cos(phi)),
        s=a * (incomplete_E(phi, m) - ellipse.complete_e),
        x=lazutkin_coordinate(ellipse, phi),
        rho=radius_of_curvature(ellipse, phi),
        mu=lazutkin_weight(ellipse, phi),
    )


def tangent(ellipse: EllipseSpec, point: Point) -> Point:
    """Counter-clockwise tangent (a cos phi, b sin phi) written in x, y."""
    x, y = point
    return (-y * ellipse.a / ellipse.b, x * ellipse.b / ellipse.a)


def on_ellipse_residual(ellipse: EllipseSpec, point: Point) -> float:
    x, y = point
    return abs((x / ellipse.a) ** 2 + (y / ellipse.b) ** 2 - 1.0)
