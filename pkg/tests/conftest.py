import numpy as np
import pytest

from ellipse_rigidity.ellipse_geometry import EllipseSpec, make_ellipse
from ellipse_rigidity.isospectral_operator import KappaStatus, KappaTable


@pytest.fixture
def circle() -> EllipseSpec:
    return make_ellipse(0.0)


@pytest.fixture
def ellipse() -> EllipseSpec:
    return make_ellipse(0.3)


@pytest.fixture
def zero_kappa() -> KappaTable:
    """圆的 kappa 恒为 0，省去逐 q 计算"""
    big_j = 100 * 30
    return KappaTable(
        J=big_j,
        kappa=np.zeros(big_j),
        status=[KappaStatus.SYMMETRY] * big_j,
        q_at=[0] * big_j,
        q_used=0,
    )
