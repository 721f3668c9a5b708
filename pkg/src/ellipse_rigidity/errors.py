#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# Xiang Wang <ramwin@qq.com>

from typing import Optional, Tuple


class RigidityError(Exception):
    """所有错误的基类，``exit_code`` 供命令行使用"""
    exit_code = 1


class DomainError(RigidityError, ValueError):
    exit_code = 2


class ConfigError(DomainError):
    exit_code = 2


class ConvergenceError(RigidityError, ArithmeticError):
    exit_code = 3

    def __init__(
        self,
        message: str,
        *,
        bracket: Optional[Tuple[float, float]] = None,
        residual: Optional[float] = None,
    ) -> None:
        super().__init__(message)
        self.bracket = bracket
        self.residual = residual


class DegenerateOrbitError(RigidityError, ValueError):
    exit_code = 3


class KappaTableTooShort(RigidityError, ValueError):
    exit_code = 3

    def __init__(self, required: int, available: int) -> None:
        super().__init__(
            f"kappa table covers j <= {available}, need J = {required}"
        )
        self.required = required
        self.available = available


class ResultParseError(RigidityError, ValueError):
    exit_code = 4

    def __init__(self, path: str, line: int, reason: str) -> None:
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line


class CacheError(RigidityError, OSError):
    exit_code = 4
