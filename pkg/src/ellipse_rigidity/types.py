#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Xiang Wang <ramwin@qq.com>


from typing import (
        List,
        NewType,
        Tuple,
        TypedDict,
        Union,
        )

import numpy as np
import numpy.typing as npt


Modulus = NewType("Modulus", float)
Point = Tuple[float, float]
FloatArray = npt.NDArray[np.float64]
ArrayLike = Union[float, FloatArray]


class NormTermData(TypedDict):
    """单个周期 q 的范数项"""
    q: int
    norm: float
    circle: float


class SweepRowData(TypedDict):
    """sweep 结果中的一行，对应一个 (e, gamma)"""
    eccentricity: float
    gamma: float
    max_norm: float
    argmax_q: int
    stop_reason: str
    verdict: str
    wall_time: float
    kappa_flags: int
    terms: List[NormTermData]
