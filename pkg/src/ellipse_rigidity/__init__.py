# SPDX-FileCopyrightText: 2025-present Xiang Wang <ramwin@qq.com>
#
# SPDX-License-Identifier: MIT

from .__about__ import __version__
from .billiard_orbits import PeriodicOrbit, build_orbit, solve_caustic
from .cache import EccentricityCache
from .ellipse_geometry import EllipseSpec, make_ellipse
from .errors import RigidityError
from .isospectral_operator import (
    KappaTable,
    NormScan,
    StopPolicy,
    kappa_table,
    norm_term,
    rigidity_scan,
    t_row,
)
from .sweep import SweepConfig, SweepResult, run_sweep
from .worker import PoolWork
