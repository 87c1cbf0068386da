"""Law of the range endpoints ``(M_n^-, M_n^+)`` of an n-step walk from 0.

The event ``E_x^y(n) = {R_n = [-x, y]}`` has probability

    f_n(x+1, T+2) - f_n(x, T+1) - f_n(x+1, T+1) + f_n(x, T),   T = x + y,

where ``f_n(z, T) = P_z(tau > n)`` is strip confinement.  This module
evaluates it exactly, in bulk (one amplitude shell at a time), and against
its three-regime large-``T`` approximations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .logreal import NEG_INF, LogReal
from .ruin import (
    EXACT_DP_MAX_N,
    Estimate,
    Validity,
    confinement_dp_linear,
    decay_rate,
    log_confinement_dp,
    log_confinement_spectral,
)

SUPERCRITICAL_MIN = 10.0
SUBCRITICAL_MAX = 0.1


@dataclass(frozen=True)
class RangeEvent:
    """The event that the range of the n-step walk is exactly ``[-x, y]``."""

    x: int
    y: int
    n: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise DomainError(f"endpoints must be nonnegative, got x={self.x}, y={self.y}")
        if self.n < 1:
            raise DomainError(f"horizon n={self.n} must be >= 1")

    @property
    def T(self) -> int:
        return self.x + self.y

    @property
    def two_w(self) -> int:
        """Twice the range center ``(y - x) / 2``."""
        return self.y - self.x


class RegimeKind(enum.Enum):
    SUPERCRITICAL = "supercritical"  # n / T**3 -> infinity
    CRITICAL = "critical"  # n / T**3 -> alpha
    SUBCRITICAL = "subcritical"  # n / T**3 -> 0


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    alpha: float | None = None

    def __post_init__(self):
        if self.kind is RegimeKind.CRITICAL and not (self.alpha and self.alpha > 0):
            raise DomainError("critical regime needs alpha > 0")

    @classmethod
    def classify(cls, n, T, super_min=SUPERCRITICAL_MIN, sub_max=SUBCRITICAL_MAX) -> "Regime":
        r = n / T**3
        if r >= super_min:
            return cls(RegimeKind.SUPERCRITICAL)
        if r <= sub_max:
            return cls(RegimeKind.SUBCRITICAL)
        return cls(RegimeKind.CRITICAL, r)

    @classmethod
    def supercritical(cls):
        return cls(RegimeKind.SUPERCRITICAL)

    @classmethod
    def subcritical(cls):
        return cls(RegimeKind.SUBCRITICAL)

    @classmethod
    def critical(cls, alpha):
        return cls(RegimeKind.CRITICAL, alpha)


class ConfinementTables:
    """Memoised ``f_n(., T)`` over every start point, for a fixed horizon ``n``.

    ``engine`` selects the confinement engine: ``"spectral"``, ``"dp"`` or
    ``"auto"``.  Auto uses the float DP (exact on dyadics) for
    ``n <= EXACT_DP_MAX_N`` and the spectral series above.  In exact mode the
    tables hold linear values so the four-term difference is also exact.
    """

    def __init__(self, n: int, engine: str = "auto"):
        if engine not in ("auto", "spectral", "dp"):
            raise ValueError(f"unknown engine {engine!r}")
        self.n = n
        self.engine = engine
        self.exact = engine == "auto" and n <= EXACT_DP_MAX_N
        self._cache = {}

    def __call__(self, T: int) -> np.ndarray:
        tab = self._cache.get(T)
        if tab is None:
            tab = self._compute(T)
            self._cache[T] = tab
        return tab

    def _compute(self, T):
        if T < 2:
            # a strip of width 0 or 1 has no interior
            return np.zeros(T + 1) if self.exact else np.full(T + 1, NEG_INF)
        if self.exact:
            return confinement_dp_linear(T, self.n)
        if self.engine == "dp":
            return log_confinement_dp(T, self.n)
        return log_confinement_spectral(T, self.n)

    def discard_below(self, T):
        for key in [k for k in self._cache if k < T]:
            del self._cache[key]


def _four_terms(T, tables):
    x = np.arange(T + 1)
    f2, f1, f0 = tables(T + 2), tables(T + 1), tables(T)
    return f2[x + 1], f1[x], f1[x + 1], f0[x]


def range_shell_dyadic(T: int, n: int) -> np.ndarray:
    """``P(E_x^{T-x}(n))`` for ``x = 0..T`` as exact dyadic floats (``n <= 53``)."""
    if n > EXACT_DP_MAX_N:
        raise DomainError(f"dyadic evaluation needs n <= {EXACT_DP_MAX_N}, got n={n}")
    if T < 0 or n < 1:
        raise DomainError(f"need T >= 0 and n >= 1, got T={T}, n={n}")
    if T == 0 or T > n:
        return np.zeros(T + 1)
    a, b, c, d = _four_terms(T, ConfinementTables(n))
    val = ((a - b) - c) + d
    x = np.arange(T + 1)
    val[T + np.minimum(x, T - x) > n] = 0.0
    return val[np.minimum(x, T - x)]


def range_event_fraction(e: RangeEvent) -> Fraction:
    """``P(E_x^y(n))`` as an exact fraction, for ``n <= 53``."""
    return Fraction(float(range_shell_dyadic(e.T, e.n)[e.x]))


def log_range_shell(T: int, n: int, tables: ConfinementTables | None = None) -> np.ndarray:
    """``log P(E_x^{T-x}(n))`` for ``x = 0..T``.

    Exact zeros (``-inf``) are returned where the event is unreachable, i.e.
    when the shortest path touching both ends, ``T + min(x, y)`` steps, is
    longer than ``n``.
    """
    if T < 0 or n < 1:
        raise DomainError(f"need T >= 0 and n >= 1, got T={T}, n={n}")
    out = np.full(T + 1, NEG_INF)
    if T == 0 or T > n:
        return out
    tables = tables or ConfinementTables(n)
    x = np.arange(T + 1)
    a, b, c, d = _four_terms(T, tables)
    reachable = T + np.minimum(x, T - x) <= n
    if tables.exact:
        val = ((a - b) - c) + d
        with np.errstate(divide="ignore"):
            logs = np.where(val > 0, np.log(np.where(val > 0, val, 1.0)), NEG_INF)
    else:
        stack = np.vstack([a, b, c, d])
        m = stack.max(axis=0)
        safe_m = np.where(np.isfinite(m), m, 0.0)
        val = (
            np.exp(a - safe_m) - np.exp(b - safe_m) - np.exp(c - safe_m) + np.exp(d - safe_m)
        )
        with np.errstate(divide="ignore"):
            logs = np.where(val > 0, safe_m + np.log(np.where(val > 0, val, 1.0)), NEG_INF)
    out[reachable] = logs[reachable]
    # P(E_x^y) = P(E_y^x); mirror the lower half so the symmetry is exact
    return out[np.minimum(x, T - x)]


def range_event_exact(e: RangeEvent, engine: str = "auto") -> LogReal:
    """``P_0(R_n = [-x, y])`` exactly (up to float rounding)."""
    T = e.T
    if T == 0 or T > e.n:
        return LogReal.zero()
    return LogReal(float(log_range_shell(T, e.n, ConfinementTables(e.n, engine))[e.x]))


def _range_validity(n, T, kind):
    r3 = n / T**3
    actual = Regime.classify(n, T).kind
    ok = actual is kind and n / T**2 >= 1.0
    note = "" if ok else f"n/T^3={r3:.3g} classifies as {actual.value}"
    return Validity(n / T**2, r3, ok, note)


def _log_pos(v):
    return math.log(v) if v > 0 else NEG_INF


def theta_asymptotic(
    e: RangeEvent, r: Regime, subcritical_decay: str = "printed", symmetrize: bool = True
) -> Estimate:
    """Large-``T`` approximation of ``P(E_x^y(n))`` in regime ``r``.

    Super-critical: ``(4/pi) sin(pi(x+1)/T) e^{-g(T+2)n}``.
    Critical: ``(4/pi)(e^{a pi^2}-1)[e^{a pi^2} sin(pi(x+1)/T) - sin(pi x/T)] e^{-g(T)n}``.
    Sub-critical: ``(4 pi^3 n^2/T^6)[sin(pi x/T) + T^2/(pi n)] e^{-g(T')n}`` with
    ``T' = T`` (``subcritical_decay="printed"``) or ``T' = T + 1``
    (``"derived"``, the factor pulled out when expanding the four-term
    difference).  Values where the bracket is nonpositive are returned as 0
    and flagged.

    The formulas are written for the endpoint nearer the origin, so by
    default they are evaluated at ``min(x, y)``, using
    ``P(E_x^y) = P(E_y^x)``; ``symmetrize=False`` evaluates them at ``x``.
    """
    T, x, n = e.T, e.x, e.n
    if symmetrize:
        x = min(x, e.y)
    if T < 3:
        raise DomainError("range asymptotics need T >= 3")
    validity = _range_validity(n, T, r.kind)
    if r.kind is RegimeKind.SUPERCRITICAL:
        s = math.sin(math.pi * (x + 1) / T)
        lv = math.log(4 / math.pi) + _log_pos(s) - decay_rate(T + 2) * n
    elif r.kind is RegimeKind.CRITICAL:
        ea = math.exp(r.alpha * math.pi**2)
        br = ea * math.sin(math.pi * (x + 1) / T) - math.sin(math.pi * x / T)
        lv = math.log(4 / math.pi) + math.log(ea - 1) + _log_pos(br) - decay_rate(T) * n
    else:
        if subcritical_decay not in ("printed", "derived"):
            raise ValueError(f"unknown subcritical_decay {subcritical_decay!r}")
        shift = 0 if subcritical_decay == "printed" else 1
        br = math.sin(math.pi * x / T) + T**2 / (math.pi * n)
        lv = (
            math.log(4 * math.pi**3) + 2 * math.log(n) - 6 * math.log(T) + _log_pos(br)
            - decay_rate(T + shift) * n
        )
    if lv == NEG_INF:
        validity = Validity(validity.n_over_T2, validity.n_over_T3, False, "formula nonpositive at this x")
    return Estimate(LogReal(lv), validity)


def psi(alpha):
    """``(4/pi)(1 - e^{-alpha})**2``."""
    return 4.0 / math.pi * (-math.expm1(-alpha)) ** 2


def range_event_simplified(e: RangeEvent) -> Estimate:
    """``psi(n pi^2/T^3) sin(pi x/T) e^{-g(T+2)n}``; blind at ``x = 0``."""
    T, x, n = e.T, e.x, e.n
    if T < 3:
        raise DomainError("range asymptotics need T >= 3")
    s = math.sin(math.pi * x / T)
    kind = Regime.classify(n, T).kind
    validity = _range_validity(n, T, kind)
    if not 0 < x < T:
        validity = Validity(validity.n_over_T2, validity.n_over_T3, False, "x/T not bounded away from 0")
    lv = math.log(psi(n * math.pi**2 / T**3)) + _log_pos(s) - decay_rate(T + 2) * n
    return Estimate(LogReal(lv), validity)


def range_event_boundary(y: int, n: int, r: Regime) -> Estimate:
    """Asymptotics of ``P(E_0^y(n))``, the range having the origin as lower end."""
    T = y
    if T < 3:
        raise DomainError("range asymptotics need T >= 3")
    validity = _range_validity(n, T, r.kind)
    if r.kind is RegimeKind.SUPERCRITICAL:
        return theta_asymptotic(RangeEvent(0, y, n), r)
    if r.kind is RegimeKind.CRITICAL:
        ea = math.exp(r.alpha * math.pi**2)
        lv = math.log(4 / math.pi) + r.alpha * math.pi**2 + math.log(ea - 1)
        lv += math.log(math.sin(math.pi / T)) - decay_rate(T) * n
    else:
        lv = math.log(4 * n * math.pi / T**3) + math.log(math.sin(math.pi / (T + 2))) - decay_rate(T + 1) * n
    return Estimate(LogReal(lv), validity)


@dataclass(frozen=True)
class CenterLaw:
    """Conditional law of the center ``W_n`` given ``T_n = t``."""

    t: int
    n: int
    two_w: np.ndarray  # ascending, same parity as t
    pmf: np.ndarray
    limit_density: np.ndarray  # (pi/2) cos(pi w / t)

    @property
    def w(self):
        return self.two_w / 2.0


def center_conditional_pmf(t: int, n: int, tables: ConfinementTables | None = None) -> CenterLaw:
    """Exact ``P(W_n = w | T_n = t)`` over ``2w in [-t, t]``, with the cosine limit."""
    if t < 1 or n < 1:
        raise DomainError(f"need t >= 1 and n >= 1, got t={t}, n={n}")
    if n <= EXACT_DP_MAX_N and (tables is None or tables.exact):
        p = range_shell_dyadic(t, n)
    else:
        logs = log_range_shell(t, n, tables)
        p = np.exp(logs - logs.max()) if logs.max() > NEG_INF else np.zeros(t + 1)
    if not p.sum() > 0:
        raise DomainError(f"P(T_n = {t}) = 0 for n = {n}")
    x = np.arange(t + 1)
    two_w = t - 2 * x
    p = p / p.sum()
    order = np.argsort(two_w)
    two_w, p = two_w[order], p[order]
    dens = math.pi / 2 * np.cos(math.pi * two_w / (2.0 * t))
    return CenterLaw(t, n, two_w, p, dens)
