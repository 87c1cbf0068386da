"""Gambler's ruin and strip confinement for the simple symmetric walk.

A walk started at ``z`` in the strip ``[0, T]`` is absorbed at ``0`` or ``T``;
``tau`` is the absorption time. Three independent exact engines are provided:

* :func:`confinement_exact` / :func:`feller_exit_pmf` -- the trigonometric
  (spectral) series of the exit-time law,
* :func:`confinement_dp` -- dynamic programming on the absorbing chain,
* :func:`bruteforce_enumerate` -- walking all ``2**n`` sign sequences,

together with the sharp large-time asymptotics (:func:`ruin_asymptotic`,
:func:`confinement_asymptotic`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, ResourceError
from .logreal import NEG_INF, LogReal, log_signed_sum

DP_BUDGET = 2 * 10**8
BRUTEFORCE_MAX_N = 24
# float DP on counts/2**m stays exact while counts fit the 53-bit mantissa
EXACT_DP_MAX_N = 53
# n / T**2 above which the asymptotic forms are flagged as in-regime
ASYMPTOTIC_MIN_N_OVER_T2 = 1.0
# relative log-magnitude below which higher spectral modes are dropped
_SPECTRAL_CUTOFF = -80.0


class ExitSide(enum.Enum):
    BOTTOM = "bottom"  # tau = tau_0
    TOP = "top"  # tau = tau_T
    EITHER = "either"  # tau, whichever side
    SURVIVE = "survive"  # tau > n


@dataclass(frozen=True)
class StripQuery:
    """Start point ``z``, strip width ``T`` and horizon ``n``."""

    z: int
    T: int
    n: int

    def __post_init__(self):
        if self.T < 2:
            raise DomainError(f"strip width T={self.T} must be >= 2")
        if not 0 <= self.z <= self.T:
            raise DomainError(f"start z={self.z} outside [0, {self.T}]")
        if self.n < 0:
            raise DomainError(f"horizon n={self.n} must be >= 0")

    @property
    def interior(self) -> bool:
        return 0 < self.z < self.T

    def parity_ok(self, side: ExitSide) -> bool:
        """Whether exit on ``side`` at exactly time ``n`` is parity-compatible."""
        if side is ExitSide.BOTTOM:
            return (self.n - self.z) % 2 == 0
        if side is ExitSide.TOP:
            return (self.n - (self.T - self.z)) % 2 == 0
        raise ValueError(side)


@dataclass(frozen=True)
class Validity:
    """How far an asymptotic evaluation sits inside its regime."""

    n_over_T2: float
    n_over_T3: float
    in_regime: bool
    note: str = ""


@dataclass(frozen=True)
class Estimate:
    """An asymptotic value together with its validity report."""

    value: LogReal
    validity: Validity

    @property
    def log_value(self) -> float:
        return self.value.log_value


def strip_validity(T, n, threshold=ASYMPTOTIC_MIN_N_OVER_T2) -> Validity:
    r2 = n / T**2
    ok = r2 >= threshold
    return Validity(r2, n / T**3, ok, "" if ok else f"n/T^2={r2:.3g} < {threshold}")


def decay_rate(T) -> float:
    """``g(T) = -log cos(pi/T)``, the per-step cost of staying in a strip of width T.

    Accepts real ``T`` (the partition asymptotics evaluate it at non-integers).
    """
    if T <= 2:
        raise DomainError(f"g(T) needs T > 2, got T={T}")
    return -math.log1p(-2.0 * math.sin(math.pi / (2.0 * T)) ** 2)


def _log_cos_modes(T, k):
    # log cos(pi k / T) without the cancellation of log(1 - small)
    return np.log1p(-2.0 * np.sin(np.pi * k / (2.0 * T)) ** 2)


def _require_interior(q: StripQuery):
    if not q.interior:
        raise DomainError(f"z={q.z} is on the boundary of [0, {q.T}]: already absorbed")


def _log_bottom_pmf(z, T, n):
    # Feller's series, folded onto 1 <= k < T/2.  The k = T/2 mode only
    # survives through cos**(n-1) at n = 1 and is added back explicitly.
    if (n - z) % 2 or n < z:
        # wrong parity, or 0 is out of reach: the series would only return
        # cancellation noise here
        return NEG_INF
    k = np.arange(1, (T + 1) // 2)
    logs, signs = [], []
    if k.size:
        logc = _log_cos_modes(T, k)
        sz = np.sin(np.pi * k * z / T)
        sk = np.sin(np.pi * k / T)
        with np.errstate(divide="ignore"):
            logs = list(math.log(2.0 / T) + (n - 1) * logc + np.log(np.abs(sz)) + np.log(sk))
        signs = list(np.sign(sz))
    if T % 2 == 0 and n == 1:
        mid = math.sin(math.pi * z / 2)
        if mid != 0.0:
            logs.append(math.log(abs(mid) / T))
            signs.append(math.copysign(1.0, mid))
    if not logs:
        return NEG_INF
    lv, sign = log_signed_sum(logs, signs)
    return lv if sign > 0 else NEG_INF


def feller_exit_pmf(q: StripQuery, side: ExitSide) -> LogReal:
    """``P_z(tau = tau_side = n)`` from the trigonometric series.

    ``side`` is BOTTOM, TOP or EITHER.  Parity-incompatible times give an
    exact zero.  The top exit is evaluated as the bottom exit from ``T - z``.
    """
    _require_interior(q)
    if q.n < 1:
        raise DomainError("exit time n must be >= 1")
    if side is ExitSide.BOTTOM:
        return LogReal(_log_bottom_pmf(q.z, q.T, q.n))
    if side is ExitSide.TOP:
        return LogReal(_log_bottom_pmf(q.T - q.z, q.T, q.n))
    if side is ExitSide.EITHER:
        return feller_exit_pmf(q, ExitSide.BOTTOM) + feller_exit_pmf(q, ExitSide.TOP)
    raise DomainError(f"feller_exit_pmf does not handle side={side}")


def log_confinement_spectral(T: int, n: int) -> np.ndarray:
    """``log P_z(tau > n)`` for every ``z = 0..T`` from the spectral series.

    For each mode ``k < T/2`` the exit-time series over times ``> n`` is a
    geometric series of step two, summed in closed form per exit side.  The
    dominant mode is factored out so the result never underflows.
    """
    if T < 2 or n < 0:
        raise DomainError(f"need T >= 2 and n >= 0, got T={T}, n={n}")
    z = np.arange(T + 1)
    out = np.full(T + 1, NEG_INF)
    if n == 0:
        out[1:T] = 0.0
        return out
    k = np.arange(1, (T + 1) // 2)
    if k.size == 0:
        return out
    logc = _log_cos_modes(T, k)
    rel = n * (logc - logc[0])
    keep = rel > _SPECTRAL_CUTOFF - 2.0 * math.log(T)
    k, logc, rel = k[keep], logc[keep], rel[keep]
    c = np.exp(logc)
    sk = np.sin(np.pi * k / T)
    zi = z[1:T, None]
    # first exit time > n on each side is n+1 or n+2 depending on parity
    a_bot = ((n - zi) % 2 == 0).astype(float)
    a_top = ((n - (T - zi)) % 2 == 0).astype(float)
    alt = np.where(k % 2 == 1, 1.0, -1.0)
    bracket = c**a_bot + alt * c**a_top
    terms = (2.0 / T) * np.sin(np.pi * zi * k / T) / sk * bracket * np.exp(rel)
    total = terms.sum(axis=1)
    with np.errstate(divide="ignore"):
        out[1:T] = np.where(total > 0, n * logc[0] + np.log(np.where(total > 0, total, 1.0)), NEG_INF)
    # rounding can push the series a few ulps above 1 at small n
    return np.minimum(out, 0.0)


def confinement_exact(q: StripQuery) -> LogReal:
    """``P_z(tau > n)``; zero on the boundary, one at ``n = 0`` in the interior."""
    if not q.interior:
        return LogReal.zero()
    return LogReal(float(log_confinement_spectral(q.T, q.n)[q.z]))


def log_confinement_dp(T: int, n: int, budget: int = DP_BUDGET) -> np.ndarray:
    """``log P_z(tau > n)`` for every ``z`` by backward dynamic programming.

    ``u_{m+1}(z) = (u_m(z-1) + u_m(z+1)) / 2`` with ``u = 0`` on the boundary.
    The row is rescaled by ``2**512`` whenever its maximum drops below
    ``2**-512``; scaling by a power of two keeps dyadic values exact.
    """
    if T < 2 or n < 0:
        raise DomainError(f"need T >= 2 and n >= 0, got T={T}, n={n}")
    if n * T > budget:
        raise ResourceError(
            f"DP needs n*T = {n * T} cell updates, budget is {budget}",
            required=n * T,
            budget=budget,
        )
    u = np.zeros(T + 1)
    u[1:T] = 1.0
    lift = 0
    tiny = 2.0**-512
    for _ in range(n):
        nxt = np.zeros_like(u)
        nxt[1:T] = 0.5 * (u[0 : T - 1] + u[2 : T + 1])
        u = nxt
        top = u.max()
        if top == 0.0:
            break
        if top < tiny:
            u *= 2.0**512
            lift += 512
    with np.errstate(divide="ignore"):
        return np.log(u) - lift * math.log(2.0)


def confinement_dp_linear(T: int, n: int) -> np.ndarray:
    """Exact dyadic ``P_z(tau > n)`` as floats; only for ``n <= EXACT_DP_MAX_N``."""
    if n > EXACT_DP_MAX_N:
        raise DomainError(f"exact float DP limited to n <= {EXACT_DP_MAX_N}")
    u = np.zeros(T + 1)
    u[1:T] = 1.0
    for _ in range(n):
        nxt = np.zeros_like(u)
        nxt[1:T] = 0.5 * (u[0 : T - 1] + u[2 : T + 1])
        u = nxt
    return u


def confinement_dp(q: StripQuery, budget: int = DP_BUDGET) -> LogReal:
    """``P_z(tau > n)`` by dynamic programming (independent of the spectral engine)."""
    if not q.interior:
        return LogReal.zero()
    return LogReal(float(log_confinement_dp(q.T, q.n, budget)[q.z]))


def _walk_chunks(n, chunk_bits=16):
    """Yield arrays of partial sums for all 2**n sign sequences, chunk by chunk."""
    if n == 0:
        yield np.zeros((1, 0), dtype=np.int16)
        return
    low = min(n, chunk_bits)
    low_codes = np.arange(2**low, dtype=np.int64)
    low_bits = ((low_codes[:, None] >> np.arange(low)) & 1).astype(np.int16)
    high = n - low
    for h in range(2**high):
        high_bits = ((h >> np.arange(high)) & 1).astype(np.int16)
        bits = np.concatenate([low_bits, np.broadcast_to(high_bits, (low_bits.shape[0], high))], axis=1)
        yield np.cumsum(2 * bits - 1, axis=1)


def bruteforce_count(q: StripQuery, side: ExitSide) -> int:
    """Number of the ``2**n`` equally likely paths realising the event."""
    if q.n > BRUTEFORCE_MAX_N:
        raise ResourceError(
            f"enumeration of 2**{q.n} paths exceeds 2**{BRUTEFORCE_MAX_N}",
            required=q.n,
            budget=BRUTEFORCE_MAX_N,
        )
    z, T, n = q.z, q.T, q.n
    if not q.interior:
        # tau = 0: only "exit at time 0" events are possible
        hit_bottom = z == 0
        if n != 0 or side is ExitSide.SURVIVE:
            return 0
        if side is ExitSide.EITHER:
            return 1
        return int(hit_bottom == (side is ExitSide.BOTTOM))
    total = 0
    for sums in _walk_chunks(n):
        pos = z + sums
        absorbed = (pos <= 0) | (pos >= T)
        if side is ExitSide.SURVIVE:
            total += int((~absorbed.any(axis=1)).sum())
            continue
        if n == 0:
            continue
        before = absorbed[:, :-1].any(axis=1)
        last = pos[:, -1]
        fresh = ~before
        if side is ExitSide.BOTTOM:
            total += int((fresh & (last == 0)).sum())
        elif side is ExitSide.TOP:
            total += int((fresh & (last == T)).sum())
        else:
            total += int((fresh & ((last == 0) | (last == T))).sum())
    return total


def bruteforce_probability(q: StripQuery, side: ExitSide) -> Fraction:
    return Fraction(bruteforce_count(q, side), 2**q.n)


def bruteforce_enumerate(q: StripQuery, side: ExitSide) -> LogReal:
    """Ground-truth probability of the event by walking every sign sequence."""
    c = bruteforce_count(q, side)
    if c == 0:
        return LogReal.zero()
    return LogReal(math.log(c) - q.n * math.log(2.0))


def _sharp_exit(z, T, n):
    return math.log(2.0 / T) + math.log(math.sin(z * math.pi / T)) + math.log(math.tan(math.pi / T)) - decay_rate(T) * n


def ruin_asymptotic(q: StripQuery, side: ExitSide) -> Estimate:
    """Sharp large-time form ``(2/T) sin(z pi/T) tan(pi/T) e^{-g(T) n}`` with parity.

    Valid for every ``z`` in ``[0, T]``: the reflection ``z -> T - z`` leaves
    ``sin(z pi / T)`` unchanged, so only the parity indicator depends on side.
    """
    if q.T < 3:
        raise DomainError("ruin asymptotics need T >= 3")
    if side not in (ExitSide.BOTTOM, ExitSide.TOP):
        raise DomainError(f"ruin_asymptotic handles BOTTOM or TOP, got {side}")
    validity = strip_validity(q.T, q.n)
    if q.z in (0, q.T) or not q.parity_ok(side):
        return Estimate(LogReal.zero(), validity)
    return Estimate(LogReal(_sharp_exit(q.z, q.T, q.n)), validity)


def confinement_asymptotic(q: StripQuery, form: str = "sharp") -> Estimate:
    """Large-time confinement ``P_z(tau > n)``.

    ``form="sharp"`` uses the parity-resolved prefactor (odd ``T``:
    ``(2/T) sin(z pi/T) / tan(pi/2T)``; even ``T``: ``(4/T) sin(z pi/T)
    cos(pi/T)**a / sin(pi/T)`` with ``a = 1{n - z even}``).  ``form="simple"``
    uses ``(4/pi) sin(z pi/T)``, accurate to ``O(T**-2)``.
    """
    if q.T < 3:
        raise DomainError("confinement asymptotics need T >= 3")
    validity = strip_validity(q.T, q.n)
    if not q.interior:
        return Estimate(LogReal.zero(), validity)
    T, z, n = q.T, q.z, q.n
    log_sin = math.log(math.sin(z * math.pi / T))
    decay = -n * decay_rate(T)
    if form == "simple":
        return Estimate(LogReal(math.log(4.0 / math.pi) + log_sin + decay), validity)
    if form != "sharp":
        raise ValueError(f"unknown form {form!r}")
    if T % 2 == 1:
        pref = math.log(2.0 / T) - math.log(math.tan(math.pi / (2 * T)))
    else:
        a = 1 if (n - z) % 2 == 0 else 0
        pref = math.log(4.0 / T) + a * math.log(math.cos(math.pi / T)) - math.log(math.sin(math.pi / T))
    return Estimate(LogReal(pref + log_sin + decay), validity)
