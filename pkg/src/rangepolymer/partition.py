"""The range-penalised polymer measure ``dP_{n,h} = e^{-h|R_n|} dP / Z_{n,h}``.

Exact partition function and joint law of the amplitude ``T_n`` and center
``W_n`` (summed shell by shell over ``T = x + y`` with a certified
truncation), together with the asymptotic formulas for ``Z_{n,h}`` in the
weak (``h_n << n^{1/4}``), critical (``h_n ~ n^{1/4}``) and strong
(``h_n >> n^{1/4}``) penalisation regimes and the limit laws of the
fluctuations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import gof
from .errors import DomainError, ResourceError
from .logreal import NEG_INF, LogReal, log_sum
from .range_law import ConfinementTables, log_range_shell, psi
from .ruin import decay_rate

CELL_BUDGET = 20_000_000


class PenaltyRegime(enum.Enum):
    WEAK = "weak"
    CRITICAL = "critical"
    STRONG = "strong"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class PenaltyScheme:
    """Either an explicit ``h`` (regime named by the caller) or ``h_n = h_hat * n**gamma``."""

    h: float | None = None
    h_hat: float | None = None
    gamma: float | None = None
    declared: PenaltyRegime | None = None

    def __post_init__(self):
        if self.h is not None:
            if self.h <= 0:
                raise DomainError(f"penalty h={self.h} must be > 0")
            if self.h_hat is not None or self.gamma is not None:
                raise DomainError("give either h or (h_hat, gamma), not both")
        elif self.h_hat is None or self.gamma is None:
            raise DomainError("power-law scheme needs h_hat and gamma")
        elif self.h_hat <= 0:
            raise DomainError(f"h_hat={self.h_hat} must be > 0")

    @classmethod
    def explicit(cls, h, regime=None):
        return cls(h=h, declared=PenaltyRegime(regime) if regime else None)

    @classmethod
    def power_law(cls, h_hat, gamma):
        return cls(h_hat=h_hat, gamma=gamma)

    def h_at(self, n) -> float:
        return self.h if self.h is not None else self.h_hat * n**self.gamma

    def regime(self) -> PenaltyRegime:
        """Asymptotic regime; explicit schemes must have declared one."""
        if self.h is not None:
            if self.declared is None:
                raise DomainError("a single (n, h) pair has no limit behaviour: declare the regime")
            return self.declared
        g = self.gamma
        if -0.5 < g < 0.25:
            return PenaltyRegime.WEAK
        if g == 0.25:
            return PenaltyRegime.CRITICAL
        if 0.25 < g < 1:
            return PenaltyRegime.STRONG
        return PenaltyRegime.DEGENERATE

    def weak_condition(self, n) -> bool:
        """``h_n >= n^{-1/2} (log n)^{3/2}``, the lower bound the weak results assume."""
        return self.h_at(n) >= n**-0.5 * math.log(n) ** 1.5


@dataclass(frozen=True)
class CriticalQuantities:
    t_star: float  # optimal amplitude (n pi^2 / h)^{1/3}
    a_n: float  # Gaussian fluctuation width
    t_o: float  # t_star - 2
    t_o_frac: float  # fractional part of t_star - 2
    delta_n: float  # 1{t_o_frac >= 1/2} - t_o_frac

    @property
    def floor_t_o(self) -> int:
        return math.floor(self.t_o)


def scales(n: int, h: float) -> CriticalQuantities:
    if n < 1 or h <= 0:
        raise DomainError(f"need n >= 1 and h > 0, got n={n}, h={h}")
    t_star = (n * math.pi**2 / h) ** (1 / 3)
    a_n = (n * math.pi**2 / h**4) ** (1 / 6) / math.sqrt(3)
    t_o = t_star - 2
    frac = t_o - math.floor(t_o)
    delta = (1.0 if frac >= 0.5 else 0.0) - frac
    return CriticalQuantities(t_star, a_n, t_o, frac, delta)


def phi(T, n, h):
    """Energy-entropy balance ``h T + n pi^2 / (2 T^2)``, minimal at ``t_star``."""
    return h * T + n * math.pi**2 / (2.0 * T * T)


def bar_phi(T, n, h):
    """Lattice-corrected balance ``h (T+1) + n pi^2 / (2 (T+2)^2)``, minimal at ``t_star - 2``."""
    return h * (T + 1) + n * math.pi**2 / (2.0 * (T + 2) ** 2)


def _log_cosh_minus_one(h):
    # cosh(h) - 1 = e^h (1 - e^{-h})^2 / 2, safe for large h
    return h + 2.0 * math.log(-math.expm1(-h)) - math.log(2.0)


@dataclass
class JointLaw:
    """Sparse table of ``Z_{n,h}(T_n = t, W_n = two_w / 2)``.

    ``log_weight`` holds the unnormalised log masses ``-h (t+1) + log P(E)``;
    ``log_normalizer`` is their log-sum and ``log_truncation`` a certified
    upper bound on the log of the mass outside the table.
    """

    n: int
    h: float
    t: np.ndarray
    two_w: np.ndarray
    log_weight: np.ndarray
    log_normalizer: float
    log_truncation: float

    @property
    def truncation_fraction(self) -> float:
        return math.exp(self.log_truncation - self.log_normalizer)

    def pmf(self) -> np.ndarray:
        return np.exp(self.log_weight - self.log_normalizer)

    def marginal_t(self):
        """``(t values, P(T_n = t))`` in ascending ``t``."""
        ts, inv = np.unique(self.t, return_inverse=True)
        return ts, np.bincount(inv, weights=self.pmf(), minlength=ts.size)

    def marginal_two_w(self):
        ws, inv = np.unique(self.two_w, return_inverse=True)
        return ws, np.bincount(inv, weights=self.pmf(), minlength=ws.size)

    def log_restricted(self, mask) -> float:
        return log_sum(self.log_weight[np.asarray(mask, dtype=bool)])

    def cell(self, t: int, two_w: int) -> LogReal:
        hit = np.flatnonzero((self.t == t) & (self.two_w == two_w))
        return LogReal(float(self.log_weight[hit[0]])) if hit.size else LogReal.zero()

    def fluctuation_pmf(self, origin: int):
        """``(s, P(T_n - origin = s))`` for the amplitude offset from ``origin``."""
        ts, p = self.marginal_t()
        return ts - origin, p


def _log_upper_tail(hi, n, h):
    # sum_{T > hi} e^{-h(T+1)} P(T_n = T) <= e^{-h(hi+2)} P(T_n > hi) / (1 - e^{-h}) ...
    # with P(T_n > hi) <= 4 exp(-ceil((hi+1)/2)^2 / (2n)) by reflection + Hoeffding.
    if hi >= n:
        return NEG_INF
    m = math.ceil((hi + 1) / 2)
    tail_prob = min(0.0, math.log(4.0) - m * m / (2.0 * n))
    return -h * (hi + 2) - math.log(-math.expm1(-h)) + tail_prob


def _log_lower_tail(lo, n, h):
    # shells T < lo: P(T_n = T) <= (T+1) max_z f_n(z, T+2) <= (T+1)^{3/2} cos(pi/(T+2))^n,
    # which increases in T, so each is bounded by the T = lo - 1 value.
    if lo <= 1:
        return NEG_INF
    env = 1.5 * math.log(lo)
    env += -n * decay_rate(lo + 1) if lo + 1 > 2 else NEG_INF
    return math.log(lo - 1) - 2.0 * h + min(0.0, env)


def partition_exact(
    n: int,
    h: float,
    rel_tol: float = 1e-12,
    engine: str = "auto",
    budget: int = CELL_BUDGET,
) -> tuple[LogReal, JointLaw]:
    """Exact ``log Z_{n,h}`` and the joint law of ``(T_n, 2 W_n)``.

    Shells ``T = x + y`` are added outward from ``round(t_star)``, each one
    complete over ``x``, until the certified bound on the omitted mass is at
    most ``rel_tol`` times the accumulated sum.
    """
    if n < 1 or h <= 0:
        raise DomainError(f"need n >= 1 and h > 0, got n={n}, h={h}")
    if not 0 < rel_tol < 1:
        raise DomainError("rel_tol must be in (0, 1)")
    q = scales(n, h)
    tables = ConfinementTables(n, engine)
    start = min(max(int(round(q.t_star)), 1), n)
    shells = {}
    cells = 0

    def add(T):
        nonlocal cells
        cells += T + 1
        if cells > budget:
            raise ResourceError(
                f"partition needs more than {budget} cells (n={n}, h={h})", required=cells, budget=budget
            )
        shells[T] = -h * (T + 1) + log_range_shell(T, n, tables)

    add(start)
    lo = hi = start
    total = log_sum(shells[start])
    while True:
        up = _log_upper_tail(hi, n, h)
        down = _log_lower_tail(lo, n, h)
        bound = float(np.logaddexp(up, down))
        if total > NEG_INF and bound <= math.log(rel_tol) + total:
            break
        if up >= down:
            hi += 1
            add(hi)
            total = float(np.logaddexp(total, log_sum(shells[hi])))
        else:
            lo -= 1
            add(lo)
            total = float(np.logaddexp(total, log_sum(shells[lo])))
        tables.discard_below(lo)
    Ts = sorted(shells)
    t = np.concatenate([np.full(T + 1, T) for T in Ts])
    two_w = np.concatenate([T - 2 * np.arange(T + 1) for T in Ts])
    logw = np.concatenate([shells[T] for T in Ts])
    keep = np.isfinite(logw)
    law = JointLaw(n, h, t[keep], two_w[keep], logw[keep], log_sum(logw[keep]), bound)
    return LogReal(law.log_normalizer), law


def partition_restricted(n, h, predicate, law: JointLaw | None = None, rel_tol=1e-12) -> LogReal:
    """``Z_{n,h}(A)`` for ``A = {predicate(T_n, 2 W_n)}``.

    ``predicate`` is applied to the integer arrays ``t`` and ``two_w`` and must
    return a boolean mask.
    """
    if law is None:
        _, law = partition_exact(n, h, rel_tol)
    return LogReal(law.log_restricted(predicate(law.t, law.two_w)))


def probability(law: JointLaw, predicate) -> float:
    """``P_{n,h}(A)`` from a computed joint law."""
    return math.exp(law.log_restricted(predicate(law.t, law.two_w)) - law.log_normalizer)


def varsigma(t, q: CriticalQuantities):
    """``|t - t_o_frac| / t_o * 1{t in {0,1}} + (t - t_o_frac)^2``."""
    t = np.asarray(t, dtype=float)
    d = t - q.t_o_frac
    return np.abs(d) / q.t_o * np.isin(t, (0.0, 1.0)) + d * d


def local_partition_weak(t: int, two_w: int, n: int, h: float) -> LogReal:
    """Model for the cell ``(floor(t_star) + t, two_w / 2)`` when ``h`` is weak.

    ``psi_n cos(pi w / t_star) exp(-t^2 / (2 a_n^2))`` with
    ``psi_n = psi(h) exp(-h (t_star + 1) - g(t_star + 2) n)``.
    """
    q = scales(n, h)
    c = math.cos(math.pi * two_w / (2.0 * q.t_star))
    if c <= 0:
        return LogReal.zero()
    log_psi_n = math.log(psi(h)) - h * (q.t_star + 1) - decay_rate(q.t_star + 2) * n
    return LogReal(log_psi_n + math.log(c) - t * t / (2 * q.a_n**2))


def local_partition_strong(t: int, two_w: int, n: int, h: float) -> LogReal:
    """Model for the cell ``(floor(t_star - 2) + t, two_w / 2)`` when ``h`` is strong.

    ``bar_psi_n cos(pi w / t_star) exp(-varsigma(t) / (2 a_n^2))`` with
    ``bar_psi_n = psi(h) exp(-h (t_star - 1) - g(t_star) n)``.
    """
    q = scales(n, h)
    c = math.cos(math.pi * two_w / (2.0 * q.t_star))
    if c <= 0:
        return LogReal.zero()
    log_bar_psi = math.log(psi(h)) - h * (q.t_star - 1) - decay_rate(q.t_star) * n
    return LogReal(log_bar_psi + math.log(c) - float(varsigma(t, q)) / (2 * q.a_n**2))


def z_asymptotic_weak(n: int, h: float) -> LogReal:
    """``(16 sqrt2 / sqrt(3 pi)) ((cosh h - 1)/h) sqrt(n) exp(-3/2 h t_star)``."""
    q = scales(n, h)
    lv = math.log(16 * math.sqrt(2) / math.sqrt(3 * math.pi)) + _log_cosh_minus_one(h) - math.log(h)
    return LogReal(lv + 0.5 * math.log(n) - 1.5 * h * q.t_star)


def strong_phi(t, q: CriticalQuantities):
    """``6 + pi^2/12 + 3/2 [|t - t_o_frac| / t_o + (t - t_o_frac)^2]``."""
    d = t - q.t_o_frac
    return 6 + math.pi**2 / 12 + 1.5 * (abs(d) / q.t_o + d * d)


def strong_selector(q: CriticalQuantities) -> int:
    """The dominant offset used by the strong-regime asymptotics: ``1{t_o_frac >= 1/2 + 1/t_o}``."""
    return int(q.t_o_frac >= 0.5 + 1 / q.t_o)


def z_asymptotic_strong(n: int, h: float, form: str = "printed") -> LogReal:
    """Strong-regime asymptotics of ``Z_{n,h}``.

    ``(16/pi^{4/3}) (1 + 1{t_o_frac = 1/2}) ((cosh h - 1)/h^{1/3}) n^{1/3}
    exp(-3/2 h t_star - E)``.  With ``form="printed"``,
    ``E = strong_phi(strong_selector) pi n / t_star^4``.  With
    ``form="derived"``, ``E = (pi^2/12 + 3/2 varsigma(t)) pi^2 n / t_star^4``
    at the offset ``t`` picked by :func:`strong_support_set`.  The ``pi^2/12``
    is the quartic term of ``g(T)`` and ``3 pi^2 n / (2 t_star^4) =
    1/(2 a_n^2)``.
    """
    q = scales(n, h)
    twin = 1.0 + (1.0 if q.t_o_frac == 0.5 else 0.0)
    lv = math.log(16 / math.pi ** (4 / 3)) + math.log(twin) + _log_cosh_minus_one(h) - math.log(h) / 3
    lv += math.log(n) / 3 - 1.5 * h * q.t_star
    u = n / q.t_star**4
    if form == "printed":
        lv -= strong_phi(strong_selector(q), q) * math.pi * u
    elif form == "derived":
        t = min(strong_support_set(n, h))
        lv -= (math.pi**2 / 12 + 1.5 * float(varsigma(t, q))) * math.pi**2 * u
    else:
        raise ValueError(f"unknown form {form!r}")
    return LogReal(lv)


def theta_n(a: float, q: CriticalQuantities, tol: float = 1e-17) -> float:
    """``sum_{t in Z} exp(-varsigma(t) / (2 a^2))`` with a Gaussian-tail stop."""
    return math.exp(log_theta_n(a, q, tol))


def log_theta_n(a: float, q: CriticalQuantities, tol: float = 1e-17) -> float:
    """Logarithm of :func:`theta_n`, finite even when every term underflows."""
    return _log_theta_partial(a, q, -math.inf, math.inf, tol)


def _log_theta_partial(a, q, r, s, tol=1e-17):
    """Log of the theta series restricted to ``r <= t <= s``; ``-inf`` if empty."""
    c = 1.0 / (2 * a * a)
    centre = round(q.t_o_frac)
    top, acc = -math.inf, 0.0  # running log-sum-exp: top + log(acc)
    d = 0
    while True:
        terms = [centre + d] if d == 0 else [centre - d, centre + d]
        for t in terms:
            if r <= t <= s:
                e = -c * float(varsigma(t, q))
                if e > top:
                    acc = acc * math.exp(top - e) + 1.0
                    top = e
                else:
                    acc += math.exp(e - top)
        if centre - d < r and centre + d > s:
            return top + math.log(acc) if acc > 0 else -math.inf
        # every omitted t has |t - t_o_frac| >= d + 1/2
        m = d + 0.5
        log_tail = math.log(2.0) - c * m * m - math.log(-math.expm1(-c * (2 * m + 1)))
        if acc > 0 and log_tail <= math.log(tol) + top + math.log(acc):
            return top + math.log(acc)
        if d > 10**6:
            raise ResourceError("theta series did not converge")
        d += 1


def z_asymptotic_critical(n: int, h: float, a: float | None = None) -> LogReal:
    """``(16/pi^{4/3}) ((cosh h - 1)/h^{1/3}) n^{1/3} exp(-3/2 h t_star) theta_n(a)``.

    ``a`` defaults to ``a_n`` (equal to the limit when ``h = h_hat n^{1/4}``).
    """
    q = scales(n, h)
    a = q.a_n if a is None else a
    lv = math.log(16 / math.pi ** (4 / 3)) + _log_cosh_minus_one(h) - math.log(h) / 3
    lv += math.log(n) / 3 - 1.5 * h * q.t_star + _log_theta_partial(a, q, -math.inf, math.inf)
    return LogReal(lv)


def critical_fluct_pmf(n: int, h: float, r, s, a: float | None = None) -> float:
    """Limit of ``P(r <= T_n - floor(t_star - 2) <= s)`` in the critical regime."""
    q = scales(n, h)
    a = q.a_n if a is None else a
    return math.exp(_log_theta_partial(a, q, r, s) - _log_theta_partial(a, q, -math.inf, math.inf))


def strong_support_set(n: int, h: float) -> frozenset:
    """Offsets of ``T_n - floor(t_star - 2)`` carrying the strong-regime mass."""
    return support_set_from_frac(scales(n, h).t_o_frac)


def support_set_from_frac(frac: float) -> frozenset:
    if frac < 0.5:
        return frozenset({0})
    if frac > 0.5:
        return frozenset({1})
    return frozenset({0, 1})


@dataclass(frozen=True)
class FluctuationReport:
    t_points: np.ndarray  # (t - t_star) / a_n
    t_pmf: np.ndarray
    w_points: np.ndarray  # w / t_star
    w_pmf: np.ndarray
    ks_t: float
    tv_t: float
    ks_w: float
    tv_w: float
    dependence: float


def dependence_measure(law: JointLaw) -> float:
    """``max |P(t, w) - P(t) P(w | parity t)|`` over lattice cells.

    ``2w`` and ``t`` always share parity, so the product is formed with the
    center marginal restricted to the parity class of ``t``.
    """
    p = law.pmf()
    ts, pt = law.marginal_t()
    ws, pw = law.marginal_two_w()
    par = ws % 2
    pw_par = pw.copy()
    for k in (0, 1):
        sel = par == k
        tot = pw[sel].sum()
        if tot > 0:
            pw_par[sel] /= tot
    joint = np.zeros((ts.size, ws.size))
    joint[np.searchsorted(ts, law.t), np.searchsorted(ws, law.two_w)] = p
    allowed = (ts[:, None] % 2) == par[None, :]
    prod = pt[:, None] * pw_par[None, :] * allowed
    return float(np.max(np.abs(joint - prod)))


def fluctuation_law(n: int, h: float, law: JointLaw | None = None) -> FluctuationReport:
    """Exact laws of ``(T_n - t_star)/a_n`` and ``W_n / t_star`` with distances to their limits."""
    if law is None:
        _, law = partition_exact(n, h)
    q = scales(n, h)
    ts, pt = law.marginal_t()
    ws, pw = law.marginal_two_w()
    tp = (ts - q.t_star) / q.a_n
    wp = ws / (2.0 * q.t_star)
    rt = gof.gof_stats((tp, pt), gof.GAUSSIAN)
    rw = gof.gof_stats((wp, pw), gof.COSINE_CENTER)
    return FluctuationReport(tp, pt, wp, pw, rt.ks, rt.tv, rw.ks, rw.tv, dependence_measure(law))
