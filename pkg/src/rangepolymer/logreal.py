"""Nonnegative reals carried as their logarithm.

Confinement probabilities decay like ``cos(pi/T)**n`` and leave the range of
double precision long before the interesting regimes are reached, so every
probability or weight in the package is handled through :class:`LogReal` or
through plain arrays of logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

NEG_INF = -math.inf


@total_ordering
@dataclass(frozen=True)
class LogReal:
    """A nonnegative real ``exp(log_value)``; ``log_value = -inf`` encodes 0."""

    log_value: float

    def __post_init__(self):
        if math.isnan(self.log_value) or self.log_value == math.inf:
            raise ValueError(f"invalid log value {self.log_value!r}")

    @classmethod
    def from_float(cls, x: float) -> "LogReal":
        if x < 0:
            raise ValueError("LogReal only represents nonnegative numbers")
        return cls(math.log(x) if x > 0 else NEG_INF)

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(NEG_INF)

    @classmethod
    def one(cls) -> "LogReal":
        return cls(0.0)

    @property
    def value(self) -> float:
        """Linear-scale value (may underflow to 0.0 or overflow to inf)."""
        return math.exp(self.log_value) if self.log_value < 709.0 else math.inf

    def is_zero(self) -> bool:
        return self.log_value == NEG_INF

    def __add__(self, other: "LogReal") -> "LogReal":
        return LogReal(float(np.logaddexp(self.log_value, other.log_value)))

    def __sub__(self, other: "LogReal") -> "LogReal":
        a, b = self.log_value, other.log_value
        if b == NEG_INF:
            return self
        if b > a:
            raise ValueError("difference would be negative")
        if a == b:
            return LogReal.zero()
        return LogReal(a + math.log1p(-math.exp(b - a)))

    def __mul__(self, other: "LogReal") -> "LogReal":
        if self.is_zero() or other.is_zero():
            return LogReal.zero()
        return LogReal(self.log_value + other.log_value)

    def __truediv__(self, other: "LogReal") -> "LogReal":
        if other.is_zero():
            raise ZeroDivisionError("division by LogReal zero")
        if self.is_zero():
            return self
        return LogReal(self.log_value - other.log_value)

    def __lt__(self, other: "LogReal") -> bool:
        return self.log_value < other.log_value

    def __float__(self) -> float:
        return self.value

    def __repr__(self) -> str:
        return f"LogReal(log={self.log_value!r})"


def log_sum(logs) -> float:
    """``log(sum(exp(logs)))`` that tolerates empty input and all ``-inf``."""
    a = np.asarray(logs, dtype=float).ravel()
    if a.size == 0:
        return NEG_INF
    m = a.max()
    if m == NEG_INF:
        return NEG_INF
    return float(m + np.log(np.exp(a - m).sum()))


def log_signed_sum(logs, signs) -> tuple[float, float]:
    """Sum ``sign_i * exp(log_i)`` at a common offset.

    Returns ``(log|s|, sign(s))``; the offset is the largest log so the linear
    combination is formed on numbers of order one.
    """
    a = np.asarray(logs, dtype=float)
    s = np.asarray(signs, dtype=float)
    m = a.max() if a.size else NEG_INF
    if m == NEG_INF:
        return NEG_INF, 0.0
    total = float(np.sum(s * np.exp(a - m)))
    if total == 0.0:
        return NEG_INF, 0.0
    return m + math.log(abs(total)), math.copysign(1.0, total)
