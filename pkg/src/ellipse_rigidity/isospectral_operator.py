# SPDX-FileCopyrightText: 2025-present Xiang Wang <ramwin@qq.com>
#
# SPDX-License-Identifier: MIT

"""
Linearised isospectral operator of the ellipse and its distance to Id.

For the 1/q orbit with Lazutkin coordinates x_n, weights mu_n and reflection
angles theta_n::

    T[q, j] = sum_n cos(2 pi j x_n) sin(theta_n) / mu_n
    kappa_j = lim_q q^2 T[q, j]
    N_q     = q^gamma sum_{j <= C q} j^-gamma |T[q, j] - delta_qj - kappa_j / q^2|

and ||T~ - Id|| on h_gamma is max_q N_q.  A value below 1 is evidence that the
reduced operator is invertible, hence injective.
"""

import enum
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Mapping, MutableMapping, Optional

import numpy as np

from .billiard_orbits import Caustic, PeriodicOrbit, build_orbit, rotation_number
from .ellipse_geometry import EllipseSpec
from .elliptic_special import riemann_zeta
from .errors import DomainError, KappaTableTooShort
from .types import FloatArray, NormTermData

logger = logging.getLogger(__name__)

KAPPA_THRESHOLD = 1e-6
MAXQ = 500
C_CUTOFF = 100
FIRST_CAUSTIC_Q = 3


class KappaStatus(str, enum.Enum):
    SYMMETRY = "symmetry"
    CONVERGED = "converged"
    NOT_CONVERGED = "not-converged"
    BEYOND_MAXQ = "beyond-maxq"


class StopReason(str, enum.Enum):
    CIRCLE_AGREEMENT = "circle-agreement"
    BELOW_HALF = "below-half"
    Q_CAP = "q-cap"


class Verdict(str, enum.Enum):
    INJECTIVE_EVIDENCE = "injective-evidence"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class TRow:
    q: int
    J: int  # noqa: N815
    values: FloatArray


@dataclass(frozen=True, eq=False)
class KappaTable:
    """
    Marvizi-Melrose 系数 kappa_j 表，下标 j-1 对应 kappa_j

    ``status`` 记录每一项的来源：奇数 j 由对称性直接置零；偶数 j 在相邻
    q 的差小于阈值时收敛；到 ``maxq`` 仍未收敛的项被标记，但仍可使用。
    j >= maxq 的偶数项没有可用的周期，记为 ``beyond-maxq``，取 0，不计入
    ``flagged``。
    """
    J: int  # noqa: N815
    kappa: FloatArray
    status: List[KappaStatus]
    q_at: List[int]
    q_used: int

    @property
    def converged(self) -> List[bool]:
        return [s in (KappaStatus.SYMMETRY, KappaStatus.CONVERGED) for s in self.status]

    @property
    def flagged(self) -> int:
        return sum(1 for s in self.status if s is KappaStatus.NOT_CONVERGED)

    def truncated(self, J: int) -> "KappaTable":  # noqa: N803
        if J > self.J:
            raise KappaTableTooShort(J, self.J)
        return KappaTable(
            J=J,
            kappa=self.kappa[:J].copy(),
            status=self.status[:J],
            q_at=self.q_at[:J],
            q_used=self.q_used,
        )


@dataclass(frozen=True)
class StopPolicy:
    """
    Norm-scan stopping rule, checked in this order from ``q_min`` on:
    circle agreement within ``circle_accord``, a term below ``below_half``
    (``None`` turns it off), and always the hard cap ``q_cap``.
    """
    circle_accord: float = 0.10
    below_half: Optional[float] = 0.5
    q_cap: int = 30
    q_min: int = 4
    c_cutoff: int = C_CUTOFF


@dataclass(frozen=True)
class NormScan:
    e: float
    gamma: float
    terms: List[NormTermData]
    max_norm: float
    argmax_q: int
    stop_reason: StopReason
    verdict: Verdict
    kappa_flags: int = 0
    policy: StopPolicy = field(default_factory=StopPolicy)

    def as_dict(self) -> dict:
        data = asdict(self)
        data["stop_reason"] = self.stop_reason.value
        data["verdict"] = self.verdict.value
        return data


def _fourier_sum(orbit: PeriodicOrbit, js: np.ndarray) -> FloatArray:
    weights = np.sin(orbit.theta) / orbit.mu
    phases = 2.0 * math.pi * np.outer(js.astype(float), orbit.x)
    # row-wise sum keeps every entry independent of how many j are requested
    return (np.cos(phases) * weights).sum(axis=1)


def t_row(orbit: PeriodicOrbit, J: int) -> TRow:  # noqa: N803
    """T[q, j] for j = 1..J."""
    if J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    js = np.arange(1, J + 1)
    return TRow(q=orbit.q, J=J, values=_fourier_sum(orbit, js))


def circle_coefficient(q: int) -> float:
    """c_q: 1/pi for q = 1, sin(pi/q)/(pi/q) otherwise."""
    if q < 1:
        raise DomainError(f"period q must be positive, got {q}")
    if q == 1:
        return 1.0 / math.pi
    return math.sin(math.pi / q) / (math.pi / q)


def circle_t_entry(q: int, j: int) -> float:
    if j < 1:
        raise DomainError(f"harmonic j must be positive, got {j}")
    return circle_coefficient(q) if j % q == 0 else 0.0


def circle_norm_term(q: int, gamma: float) -> float:
    """Closed form of N_q for the circle: 1 + c_q (zeta(gamma) - 2)."""
    return 1.0 + circle_coefficient(q) * (riemann_zeta(gamma) - 2.0)


OrbitSource = Callable[[int], PeriodicOrbit]
LambdaSink = Callable[[int, float], None]


def orbit_source(
    ellipse: EllipseSpec,
    lambdas: Optional[Mapping[int, float]] = None,
    remember: Optional[LambdaSink] = None,
) -> OrbitSource:
    """
    Orbit factory that reads lambda_q from ``lambdas`` and hands every newly
    solved one to ``remember``.

    Usually both come from the per-eccentricity cache, so lambda_q is only
    solved once per ellipse.
    """
    def build(q: int) -> PeriodicOrbit:
        if lambdas is None or q < FIRST_CAUSTIC_Q:
            return build_orbit(ellipse, q)
        lam = lambdas.get(q)
        caustic: Optional[Caustic] = None
        if lam is not None:
            caustic = rotation_number(ellipse, lam)
        orbit = build_orbit(ellipse, q, caustic)
        if lam is None and remember is not None and orbit.lambda_q is not None:
            remember(q, orbit.lambda_q)
        return orbit

    return build


def _circle_kappa(J: int) -> KappaTable:  # noqa: N803
    status = [KappaStatus.SYMMETRY if j % 2 else KappaStatus.CONVERGED for j in range(1, J + 1)]
    return KappaTable(J=J, kappa=np.zeros(J), status=status, q_at=[0] * J, q_used=0)


def kappa_table(
    ellipse: EllipseSpec,
    J: int,  # noqa: N803
    threshold: float = KAPPA_THRESHOLD,
    *,
    maxq: int = MAXQ,
    lambdas: Optional[MutableMapping[int, float]] = None,
) -> KappaTable:
    """
    估计 kappa_j = lim q^2 T[q, j]，j = 1..J

    对每个偶数 j，只用 q > j 的轨道比较（q <= j 时该项被圆的混叠项
    c_q [q | j] 主导）；第一次 |q^2 T[q,j] - (q+1)^2 T[q+1,j]| < threshold
    时取 q 处的值。奇数 j 因椭圆的对称性恒为 0；圆的 kappa 全为 0。

    Args:
        ellipse: 椭圆
        J: 需要的最大 j
        threshold: 相邻 q 的收敛阈值
        maxq: 使用的最大周期
        lambdas: 可选的 lambda_q 缓存映射，会被就地补全

    Returns:
        KappaTable: 未收敛的项被标记为 ``not-converged``，j >= maxq 的偶数项
        为 ``beyond-maxq``
    """
    if J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    if not threshold > 0.0:
        raise DomainError(f"threshold must be positive, got {threshold}")
    if ellipse.e == 0.0:
        logger.debug("%s: kappa is identically 0", ellipse)
        return _circle_kappa(J)
    js = np.arange(1, J + 1)
    kappa = np.zeros(J)
    even = (js % 2 == 0)
    # j >= maxq has no admissible period q > j
    beyond = even & (js >= maxq)
    pending = even & ~beyond
    status = [
        KappaStatus.SYMMETRY if not is_even else
        KappaStatus.BEYOND_MAXQ if is_beyond else KappaStatus.NOT_CONVERGED
        for is_even, is_beyond in zip(even, beyond)
    ]
    q_at = [0] * J
    last = np.full(J, np.nan)
    remember = None if lambdas is None else lambdas.__setitem__
    source = orbit_source(ellipse, lambdas, remember)
    q_used = 0

    for q in range(FIRST_CAUSTIC_Q, maxq + 1):
        if not pending.any():
            break
        active = pending & (js < q)
        if not active.any():
            # keep comparisons between consecutive periods only
            last = np.full(J, np.nan)
            continue
        orbit = source(q)
        q_used = q
        current = np.full(J, np.nan)
        current[active] = q * q * _fourier_sum(orbit, js[active])
        with np.errstate(invalid="ignore"):
            hit = active & (np.abs(current - last) < threshold)
        for index in np.flatnonzero(hit):
            kappa[index] = last[index]
            status[index] = KappaStatus.CONVERGED
            q_at[index] = q - 1
        pending &= ~hit
        last = current

    for index in np.flatnonzero(pending):
        if not np.isnan(last[index]):
            kappa[index] = last[index]
            q_at[index] = q_used
    flagged = int(pending.sum())
    if flagged:
        logger.warning(
            "%s: %d kappa entries not converged by q=%d (threshold %g)",
            ellipse, flagged, maxq, threshold,
        )
    logger.debug(
        "%s: kappa table J=%d built up to q=%d, %d entries beyond maxq",
        ellipse, J, q_used, int(beyond.sum()),
    )
    return KappaTable(J=J, kappa=kappa, status=status, q_at=q_at, q_used=q_used)


def check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 3.0 < gamma < 4.0:
        raise DomainError(f"gamma={gamma!r} outside (3, 4)")
    return gamma


def norm_term(
    ellipse: EllipseSpec,
    q: int,
    gamma: float,
    kappa: KappaTable,
    C_cutoff: int = C_CUTOFF,  # noqa: N803
    *,
    orbit: Optional[PeriodicOrbit] = None,
) -> float:
    """
    N_q = q^gamma sum_{j=1}^{C q} j^-gamma |T[q,j] - delta_qj - kappa_j/q^2|.

    Dropping the tail past J = C q costs O(C^(1 - gamma)).
    """
    gamma = check_gamma(gamma)
    big_j = C_cutoff * q
    if kappa.J < big_j:
        raise KappaTableTooShort(big_j, kappa.J)
    if orbit is None:
        orbit = build_orbit(ellipse, q)
    js = np.arange(1, big_j + 1)
    values = _fourier_sum(orbit, js)
    values[q - 1] -= 1.0
    values -= kappa.kappa[:big_j] / (q * q)
    weights = js.astype(float) ** -gamma
    return float(q ** gamma * np.sum(weights * np.abs(values)))


def rigidity_scan(
    ellipse: EllipseSpec,
    gamma: float,
    policy: Optional[StopPolicy] = None,
    *,
    kappa: Optional[KappaTable] = None,
    orbits: Optional[OrbitSource] = None,
) -> NormScan:
    """
    Evaluate N_q for q = 1, 2, ... until the stop policy fires.

    ``kappa`` must cover j <= c_cutoff * q_cap; it is computed here when not
    given.  Every computed term is kept, including any late growth.
    """
    gamma = check_gamma(gamma)
    policy = policy or StopPolicy()
    if policy.q_cap < 1:
        raise DomainError(f"q_cap must be >= 1, got {policy.q_cap}")
    if kappa is None:
        kappa = kappa_table(ellipse, policy.c_cutoff * policy.q_cap)
    source = orbits or orbit_source(ellipse)

    terms: List[NormTermData] = []
    stop_reason = StopReason.Q_CAP
    for q in range(1, policy.q_cap + 1):
        value = norm_term(
            ellipse, q, gamma, kappa, policy.c_cutoff, orbit=source(q)
        )
        circle = circle_norm_term(q, gamma)
        terms.append({"q": q, "norm": value, "circle": circle})
        logger.debug("%s gamma=%g: N_%d = %.6f (circle %.6f)", ellipse, gamma, q, value, circle)
        if q < policy.q_min:
            continue
        if abs(value - circle) / circle < policy.circle_accord:
            stop_reason = StopReason.CIRCLE_AGREEMENT
            break
        if policy.below_half is not None and value < policy.below_half:
            stop_reason = StopReason.BELOW_HALF
            break

    best = max(terms, key=lambda term: term["norm"])
    max_norm = best["norm"]
    verdict = Verdict.INJECTIVE_EVIDENCE if max_norm < 1.0 else Verdict.INCONCLUSIVE
    scan = NormScan(
        e=ellipse.e,
        gamma=gamma,
        terms=terms,
        max_norm=max_norm,
        argmax_q=best["q"],
        stop_reason=stop_reason,
        verdict=verdict,
        kappa_flags=sum(
            1 for s in kappa.status[: policy.c_cutoff * len(terms)]
            if s is KappaStatus.NOT_CONVERGED
        ),
        policy=policy,
    )
    logger.info(
        "%s gamma=%g: max N_q = %.4f at q=%d (%s, %s)",
        ellipse, gamma, max_norm, scan.argmax_q, stop_reason.value, verdict.value,
    )
    return scan


def decay_exponent(scan: NormScan) -> Optional[float]:
    """
    Least-squares slope of log N_q against log q after the peak.

    Only a diagnostic of how fast the terms fall off; ``None`` with fewer
    than three points.
    """
    tail = [t for t in scan.terms if t["q"] > scan.argmax_q and t["norm"] > 0.0]
    if len(tail) < 3:
        return None
    logs_q = np.log([t["q"] for t in tail])
    logs_n = np.log([t["norm"] for t in tail])
    slope, _ = np.polyfit(logs_q, logs_n, 1)
    return float(slope)
