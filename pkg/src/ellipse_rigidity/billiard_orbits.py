# SPDX-FileCopyrightText: 2025-present Xiang Wang <ramwin@qq.com>
#
# SPDX-License-Identifier: MIT

"""
Periodic billiard orbits of rotation number 1/q inside the ellipse.

Orbits come from the confocal caustic C_lambda: pick lambda_q with rotation
number 1/q by bisection, then place the collision points with the Jacobi
functions of parameter m_lambda.  q = 2 (bouncing ball along the major axis)
and q = 1 (the single point P) are fixed by convention.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .ellipse_geometry import (
    EllipseSpec,
    lazutkin_coordinate,
    lazutkin_weight,
    on_ellipse_residual,
    tangent,
)
from .elliptic_special import amplitude, complete_K, incomplete_F
from .errors import ConvergenceError, DegenerateOrbitError, DomainError
from .types import FloatArray, Point

logger = logging.getLogger(__name__)

OMEGA_TOL = 1e-13
MAX_BISECTION = 200
ON_ELLIPSE_TOL = 1e-9


@dataclass(frozen=True)
class Caustic:
    lam: float
    m_lambda: float
    delta_lambda: float
    omega: float


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    """
    周期 q、旋转数 1/q 的周期轨道

    ``phi_amp`` 是碰撞点在椭圆上的振幅参数，``theta`` 是入射边与切线的夹角
    （即反射角），``x`` 是 Lazutkin 坐标，``x[0] = 0`` 对应 P。
    """
    ellipse: EllipseSpec
    q: int
    caustic: Optional[Caustic]
    u: FloatArray
    phi_amp: FloatArray
    points: List[Point]
    x: FloatArray
    theta: FloatArray
    reflection_residual: float = field(default=0.0)

    @property
    def lambda_q(self) -> Optional[float]:
        return None if self.caustic is None else self.caustic.lam

    @property
    def mu(self) -> FloatArray:
        return np.asarray(lazutkin_weight(self.ellipse, self.phi_amp), dtype=float)

    @property
    def length(self) -> float:
        if self.q == 1:
            return 0.0
        pts = np.asarray(self.points)
        edges = np.roll(pts, -1, axis=0) - pts
        return float(np.hypot(edges[:, 0], edges[:, 1]).sum())


def rotation_number(ellipse: EllipseSpec, lam: float) -> Caustic:
    """
    Rotation number of orbits tangent to C_lambda, 0 < lambda < b.

    m_lambda = (a^2 - b^2)/(a^2 - lambda^2),
    delta_lambda = 2F(asin(lambda/b) | m_lambda),
    omega = delta_lambda / (4K(m_lambda)).
    """
    lam = float(lam)
    a, b = ellipse.a, ellipse.b
    if not 0.0 < lam < b:
        raise DomainError(f"caustic parameter lambda={lam!r} outside (0, {b!r})")
    m_lambda = (a * a - b * b) / (a * a - lam * lam)
    delta = 2.0 * incomplete_F(math.asin(lam / b), m_lambda)
    return Caustic(
        lam=lam,
        m_lambda=m_lambda,
        delta_lambda=delta,
        omega=delta / (4.0 * complete_K(m_lambda)),
    )


def solve_caustic(
    ellipse: EllipseSpec,
    q: int,
    *,
    tol: float = OMEGA_TOL,
    max_iter: int = MAX_BISECTION,
) -> Caustic:
    """
    按二分法求 lambda_q，使旋转数等于 1/q

    Args:
        ellipse: 椭圆
        q: 周期，必须 >= 3（q = 1, 2 由 ``build_orbit`` 约定处理）
        tol: 旋转数残差容限
        max_iter: 最大二分次数

    Returns:
        Caustic: |omega - 1/q| <= tol

    Raises:
        ConvergenceError: 区间无法再缩小或迭代次数耗尽
    """
    if q < 3:
        raise DomainError(f"solve_caustic needs q >= 3, got q={q}; use build_orbit")
    target = 1.0 / q
    lo, hi = 0.0, ellipse.b
    best: Optional[Caustic] = None
    for iteration in range(max_iter):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        best = rotation_number(ellipse, mid)
        residual = best.omega - target
        if abs(residual) <= tol:
            logger.debug("lambda_%d found after %d bisections", q, iteration + 1)
            return best
        if residual < 0.0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"no caustic with omega = 1/{q} for {ellipse}",
        bracket=(lo, hi),
        residual=None if best is None else best.omega - target,
    )


def reflection_angles(
    ellipse: EllipseSpec, points: Sequence[Point]
) -> Tuple[FloatArray, float]:
    """
    Angles between the incoming edge and the oriented tangent at each point.

    Returns the angles in (0, pi) and the law-of-reflection residual
    max |incoming - outgoing|.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise DegenerateOrbitError("reflection needs at least two collision points")
    for point in points:
        if on_ellipse_residual(ellipse, point) > ON_ELLIPSE_TOL:
            raise DegenerateOrbitError(f"point {point} is not on {ellipse}")

    incoming = pts - np.roll(pts, 1, axis=0)
    outgoing = np.roll(pts, -1, axis=0) - pts
    if (np.hypot(incoming[:, 0], incoming[:, 1]) == 0.0).any():
        raise DegenerateOrbitError("zero-length edge in orbit")

    tx = -pts[:, 1] * ellipse.a / ellipse.b
    ty = pts[:, 0] * ellipse.b / ellipse.a
    # incoming leaves the domain (right of the tangent), outgoing enters it
    theta_in = np.arctan2(-(tx * incoming[:, 1] - ty * incoming[:, 0]),
                          tx * incoming[:, 0] + ty * incoming[:, 1])
    theta_out = np.arctan2(tx * outgoing[:, 1] - ty * outgoing[:, 0],
                           tx * outgoing[:, 0] + ty * outgoing[:, 1])
    residual = float(np.max(np.abs(theta_in - theta_out)))
    return theta_in, residual


def build_orbit(
    ellipse: EllipseSpec,
    q: int,
    caustic: Optional[Caustic] = None,
) -> PeriodicOrbit:
    """
    Collision points, Lazutkin coordinates and angles of the 1/q orbit.

    ``caustic`` may carry a cached lambda_q; it is solved otherwise.
    """
    if q <= 0:
        raise DomainError(f"period q must be positive, got {q}")
    a = ellipse.a
    if q == 1:
        return PeriodicOrbit(
            ellipse=ellipse,
            q=1,
            caustic=None,
            u=np.array([ellipse.complete_k]),
            phi_amp=np.array([0.5 * math.pi]),
            points=[(a, 0.0)],
            x=np.array([0.0]),
            theta=np.array([0.5 * math.pi]),
        )
    if q == 2:
        return PeriodicOrbit(
            ellipse=ellipse,
            q=2,
            caustic=None,
            u=np.array([ellipse.complete_k, 3.0 * ellipse.complete_k]),
            phi_amp=np.array([0.5 * math.pi, 1.5 * math.pi]),
            points=[(a, 0.0), (-a, 0.0)],
            x=np.array([0.0, 0.5]),
            theta=np.array([0.5 * math.pi, 0.5 * math.pi]),
        )

    if caustic is None:
        caustic = solve_caustic(ellipse, q)
    m_lambda = caustic.m_lambda
    n = np.arange(q, dtype=float)
    u = 4.0 * complete_K(m_lambda) * (n / q + 0.25)
    phi_amp = np.asarray(amplitude(u, m_lambda), dtype=float)
    xs = a * np.sin(phi_amp)
    ys = -ellipse.b * np.cos(phi_amp)
    points = [(float(px), float(py)) for px, py in zip(xs, ys)]
    # u[0] = K exactly, so the first point is P up to rounding
    points[0] = (a, 0.0)
    x = np.asarray(lazutkin_coordinate(ellipse, phi_amp), dtype=float)
    x[0] = 0.0
    theta, residual = reflection_angles(ellipse, points)
    return PeriodicOrbit(
        ellipse=ellipse,
        q=q,
        caustic=caustic,
        u=u,
        phi_amp=phi_amp,
        points=points,
        x=x,
        theta=theta,
        reflection_residual=residual,
    )


def billiard_step(
    ellipse: EllipseSpec, point: Point, direction: Point
) -> Tuple[Point, Point]:
    """
    One bounce: reflect ``direction`` (arriving at ``point``) across the
    tangent and follow the chord to the next collision.
    """
    tx, ty = tangent(ellipse, point)
    norm = math.hypot(tx, ty)
    tx, ty = tx / norm, ty / norm
    dx, dy = direction
    proj = dx * tx + dy * ty
    rx, ry = 2.0 * proj * tx - dx, 2.0 * proj * ty - dy
    x0, y0 = point
    a2, b2 = ellipse.a ** 2, ellipse.b ** 2
    qa = rx * rx / a2 + ry * ry / b2
    qb = 2.0 * (x0 * rx / a2 + y0 * ry / b2)
    qc = x0 * x0 / a2 + y0 * y0 / b2 - 1.0
    if qa == 0.0:
        raise DegenerateOrbitError("zero direction in billiard step")
    # product of the roots is qc/qa ~ 0; take the far root
    far = -qb / qa
    s = far - (qc / qa) / far if far != 0.0 else far
    if s <= 0.0:
        raise DegenerateOrbitError(f"chord from {point} leaves the table")
    return (x0 + s * rx, y0 + s * ry), (rx, ry)


def closure_residual(orbit: PeriodicOrbit) -> float:
    """Max distance between iterated billiard bounces and the formula points."""
    if orbit.q == 1:
        return 0.0
    pts = orbit.points
    point = pts[0]
    direction = (pts[0][0] - pts[-1][0], pts[0][1] - pts[-1][1])
    worst = 0.0
    for n in range(1, orbit.q + 1):
        point, direction = billiard_step(orbit.ellipse, point, direction)
        expected = pts[n % orbit.q]
        worst = max(worst, math.hypot(point[0] - expected[0], point[1] - expected[1]))
    return worst


def winding_number(points: Sequence[Point]) -> int:
    """Turns of the closed polygon around the origin."""
    pts = np.asarray(points, dtype=float)
    angles = np.arctan2(pts[:, 1], pts[:, 0])
    steps = np.diff(np.append(angles, angles[0]))
    steps = (steps + math.pi) % (2.0 * math.pi) - math.pi
    return int(round(steps.sum() / (2.0 * math.pi)))


def turning_number(points: Sequence[Point]) -> int:
    """Total turning of the edge directions in units of 2 pi."""
    pts = np.asarray(points, dtype=float)
    edges = np.roll(pts, -1, axis=0) - pts
    headings = np.arctan2(edges[:, 1], edges[:, 0])
    steps = np.diff(np.append(headings, headings[0]))
    steps = (steps + math.pi) % (2.0 * math.pi) - math.pi
    return int(round(steps.sum() / (2.0 * math.pi)))


def max_lazutkin_deviation(orbit: PeriodicOrbit) -> float:
    """max_n |x[n] - n/q|, which goes to 0 as q grows."""
    n = np.arange(orbit.q)
    return float(np.max(np.abs(orbit.x - n / orbit.q)))
