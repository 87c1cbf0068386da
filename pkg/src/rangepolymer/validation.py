"""Executable checks: the numbered acceptance criteria plus extra oracle checks.

Every check returns a :class:`CheckResult`; nothing here is tuned to pass.
Asymptotic statements are checked by trends across instances, exact ones
against enumeration.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import gof
from .errors import DomainError
from .partition import (
    critical_fluct_pmf,
    fluctuation_law,
    partition_exact,
    probability,
    scales,
    strong_support_set,
    theta_n,
    varsigma,
    z_asymptotic_weak,
)
from .range_law import (
    ConfinementTables,
    RangeEvent,
    Regime,
    center_conditional_pmf,
    log_range_shell,
    range_event_exact,
    theta_asymptotic,
)
from .ruin import (
    ExitSide,
    StripQuery,
    bruteforce_enumerate,
    feller_exit_pmf,
    log_confinement_dp,
    log_confinement_spectral,
    ruin_asymptotic,
)
from .sampler import ConditionedSampler, chi_square_gof, sample_range


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.key}: {self.title} -- {self.detail}"


def _rel(a_log, b_log):
    """Relative error ``|e^a / e^b - 1|`` with 0/0 = 0 and x/0 = inf."""
    if a_log == -math.inf and b_log == -math.inf:
        return 0.0
    if b_log == -math.inf or a_log == -math.inf:
        return math.inf
    return abs(math.expm1(a_log - b_log))


def strictly_decreasing(xs):
    return all(b < a for a, b in zip(xs, xs[1:]))


def _fmt(xs):
    return "[" + ", ".join(f"{x:.4g}" for x in xs) + "]"


@functools.lru_cache(maxsize=16)
def _law(n, h):
    return partition_exact(n, h)


def _walk_ranges(n):
    """``(x, y)`` arrays of the range endpoints for all ``2^n`` walks."""
    steps = ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1) * 2 - 1
    pos = np.cumsum(steps, axis=1)
    return -np.minimum(pos.min(axis=1), 0), np.maximum(pos.max(axis=1), 0)


def brute_partition(n, h):
    """``E[e^{-h |R_n|}]`` by enumerating every path."""
    x, y = _walk_ranges(n)
    sizes, counts = np.unique(x + y + 1, return_counts=True)
    return math.log(np.sum(counts * np.exp(-h * sizes))) - n * math.log(2)


# -- acceptance criteria ----------------------------------------------------


def criterion_1():
    worst, cases = 0.0, 0
    for T in range(2, 9):
        for n in range(0, 17):
            dp = log_confinement_dp(T, n)
            sp = log_confinement_spectral(T, n)
            for z in range(T + 1):
                bf = bruteforce_enumerate(StripQuery(z, T, n), ExitSide.SURVIVE).log_value
                worst = max(worst, _rel(dp[z], bf), _rel(sp[z], bf))
                cases += 1
    return worst <= 1e-12, f"max rel err {worst:.3g} over {cases} (z,T,n)", {"max_rel_err": worst}


def criterion_2():
    errs = []
    for n in (10, 50, 200):
        tables = ConfinementTables(n)
        total = sum(np.exp(log_range_shell(T, n, tables)).sum() for T in range(1, n + 1))
        errs.append(abs(total - 1.0))
    p = range_event_exact(RangeEvent(1, 1, 3)).value
    ok = max(errs) <= 1e-10 and p == 0.25
    return ok, f"|sum-1| = {_fmt(errs)}; P(E_1^1(3)) = {p!r}", {"sum_err": errs, "p113": p}


def criterion_3():
    worst = 0.0
    for n in range(1, 17):
        for h in (0.1, 0.5, 1.0, 2.0):
            lz, _ = partition_exact(n, h)
            worst = max(worst, _rel(lz.log_value, brute_partition(n, h)))
    # closed forms; a log/exp round trip cannot be bit-exact, so allow a few ulps
    closed = 0.0
    for h in (0.1, 0.5, 1.0, 2.0, 3.7):
        closed = max(closed, abs(partition_exact(1, h)[0].value / math.exp(-2 * h) - 1))
        z2 = 0.5 * math.exp(-2 * h) + 0.5 * math.exp(-3 * h)
        closed = max(closed, abs(partition_exact(2, h)[0].value / z2 - 1))
    ok = worst <= 1e-12 and closed <= 4 * 2.0**-52
    return ok, f"max rel err vs 2^n sum {worst:.3g}; closed forms {closed:.3g}", {
        "max_rel_err": worst,
        "closed_form_err": closed,
    }


def sup_ruin_error(T, n):
    errs = []
    for z in range(1, T):
        q = StripQuery(z, T, n)
        if not q.parity_ok(ExitSide.BOTTOM):
            continue
        exact = feller_exit_pmf(q, ExitSide.BOTTOM).log_value
        errs.append(_rel(ruin_asymptotic(q, ExitSide.BOTTOM).log_value, exact))
    return max(errs)


def criterion_4():
    ok, parts, m = True, [], {}
    for T in (20, 50):
        lo, hi = sup_ruin_error(T, 2 * T * T), sup_ruin_error(T, 10 * T * T)
        ok &= hi * 5 <= lo
        parts.append(f"T={T}: {lo:.3g} -> {hi:.3g} (x{lo / hi:.3g})")
        m[T] = (lo, hi)
    return ok, "; ".join(parts), m


def sup_theta_error(T, n, regime, **kw):
    logs = log_range_shell(T, n)
    errs = [
        _rel(logs[x], theta_asymptotic(RangeEvent(x, T - x, n), regime, **kw).log_value) for x in range(T + 1)
    ]
    return max(errs)


THETA_CASES = {
    "supercritical": [(30, 10**5), (30, 10**6)],
    "critical": [(40, 40**3), (80, 80**3)],
    "subcritical": [(T, math.ceil(0.25 * T * T * math.log(T))) for T in (100, 200)],
}


def criterion_5():
    ok, parts, m = True, [], {}
    for name, cases in THETA_CASES.items():
        errs = []
        for T, n in cases:
            r = {"supercritical": Regime.supercritical(), "critical": Regime.critical(1.0)}.get(
                name, Regime.subcritical()
            )
            errs.append(sup_theta_error(T, n, r))
        ok &= strictly_decreasing(errs)
        parts.append(f"{name} {_fmt(errs)}")
        m[name] = errs
    return ok, "; ".join(parts), m


WEAK_NS = (10**3, 10**4, 10**5)


def _weak_h(n):
    return n**-0.3


def criterion_6():
    ratios = [math.exp(_law(n, _weak_h(n))[0].log_value - z_asymptotic_weak(n, _weak_h(n)).log_value) for n in WEAK_NS]
    ok = 0.8 <= ratios[-1] <= 1.2 and abs(ratios[-1] - 1) < abs(ratios[0] - 1)
    return ok, f"Z/Z_weak along n={WEAK_NS}: {_fmt(ratios)}", {"ratios": ratios}


def criterion_7():
    ks = [fluctuation_law(n, _weak_h(n), _law(n, _weak_h(n))[1]).ks_t for n in WEAK_NS]
    ok = strictly_decreasing(ks) and ks[-1] < 0.05
    return ok, f"KS(T-law, N(0,1)) = {_fmt(ks)}, need < 0.05 at n=1e5", {"ks": ks}


def center_tv(t):
    n = math.ceil(0.25 * t * t * math.log(t))
    law = center_conditional_pmf(t, n)
    return gof.gof_stats((law.two_w / (2.0 * t), law.pmf), gof.COSINE_CENTER).tv


def criterion_8():
    tvs = [center_tv(t) for t in (40, 80)]
    ok = tvs[1] < tvs[0] and tvs[1] < 0.05
    return ok, f"TV(center law, cosine) at t=40,80: {_fmt(tvs)}", {"tv": tvs}


STRONG_NS = (10**4, 10**5, 10**6)


def strong_offsets(n, h):
    _, law = _law(n, h)
    return law.fluctuation_pmf(scales(n, h).floor_t_o)


def criterion_9():
    masses, argmax_in, sets = [], [], []
    for n in STRONG_NS:
        h = n**0.4
        s, p = strong_offsets(n, h)
        A = strong_support_set(n, h)
        masses.append(float(p[np.isin(s, sorted(A))].sum()))
        argmax_in.append(int(s[np.argmax(p)]) in A)
        sets.append(sorted(A))
    ok = masses[-1] > 0.9 and strictly_decreasing([-m for m in masses]) and all(argmax_in)
    return ok, f"mass(A_n) = {_fmt(masses)}, A_n = {sets}, argmax in A_n: {argmax_in}", {
        "mass": masses,
        "argmax_in": argmax_in,
    }


def critical_sup_error(n):
    h = n**0.25
    q = scales(n, h)
    s, p = strong_offsets(n, h)
    th = theta_n(q.a_n, q)
    errs = []
    for t in range(-2, 4):
        model = math.exp(-float(varsigma(t, q)) / (2 * q.a_n**2)) / th
        errs.append(abs(p[s == t].sum() / model - 1))
    return max(errs)


def criterion_10():
    errs = [critical_sup_error(n) for n in STRONG_NS]
    return strictly_decreasing(errs), f"sup rel err over t in -2..3: {_fmt(errs)}", {"errs": errs}


def criterion_11():
    dev = [fluctuation_law(n, _weak_h(n), _law(n, _weak_h(n))[1]).dependence for n in WEAK_NS]
    return strictly_decreasing(dev), f"max |joint - product| = {_fmt(dev)}", {"dependence": dev}


def conditioned_path_worst(max_n=12):
    worst = 0.0
    for n in range(1, max_n + 1):
        steps = ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1) * 2 - 1
        x, y = _walk_ranges(n)
        for (xx, yy), idx in _group(x, y).items():
            sampler = ConditionedSampler(RangeEvent(xx, yy, n))
            k = len(idx)
            for i in idx:
                worst = max(worst, abs(sampler.path_probability(steps[i]) * k - 1))
    return worst


def _group(x, y):
    out = {}
    for i, key in enumerate(zip(x.tolist(), y.tolist())):
        out.setdefault(key, []).append(i)
    return out


def criterion_12():
    worst = conditioned_path_worst()
    n = 10**4
    _, law = _law(n, _weak_h(n))
    batch = sample_range(law, seed=20240611, count=10**5)
    _, pval = chi_square_gof(batch, law)
    again = sample_range(law, seed=20240611, count=10**5, workers=3)
    same = batch.to_bytes() == again.to_bytes()
    ok = worst <= 1e-12 and pval > 0.01 and same
    return ok, f"path prob err {worst:.3g}; chi-square p = {pval:.3g}; reproducible: {same}", {
        "path_err": worst,
        "p_value": pval,
        "reproducible": same,
    }


CRITERIA = {
    "1": ("oracle triangle (enumeration / DP / spectral)", criterion_1),
    "2": ("range-law completeness", criterion_2),
    "3": ("partition oracle", criterion_3),
    "4": ("ruin asymptotics sharpen with n/T^2", criterion_4),
    "5": ("Theta_n convergence in three regimes", criterion_5),
    "6": ("weak-regime Z asymptotics", criterion_6),
    "7": ("Gaussian amplitude fluctuations", criterion_7),
    "8": ("cosine center law", criterion_8),
    "9": ("strong-regime collapse onto A_n", criterion_9),
    "10": ("critical-regime discrete law", criterion_10),
    "11": ("asymptotic independence of T and W", criterion_11),
    "12": ("sampler exactness and reproducibility", criterion_12),
}


# -- extra checks (not numbered) -----------------------------------------------


def check_feller():
    worst = 0.0
    for T in range(2, 9):
        for n in range(1, 13):
            for z in range(1, T):
                q = StripQuery(z, T, n)
                for side in (ExitSide.BOTTOM, ExitSide.TOP):
                    worst = max(worst, _rel(feller_exit_pmf(q, side).log_value, bruteforce_enumerate(q, side).log_value))
    return worst <= 1e-12, f"exit pmf vs enumeration max rel err {worst:.3g}", {"max_rel_err": worst}


def check_restricted():
    worst = 0.0
    for n in range(1, 13):
        x, y = _walk_ranges(n)
        for h in (0.5, 2.0):
            _, law = partition_exact(n, h)
            for t in range(1, n + 1):
                sel = (x + y) == t
                brute = sel.sum() / 2**n * math.exp(-h * (t + 1))
                got = math.exp(law.log_restricted(law.t == t)) if (law.t == t).any() else 0.0
                worst = max(worst, abs(got - brute) / max(brute, 1e-300))
    return worst <= 1e-12, f"Z(T_n = t) vs enumeration max rel err {worst:.3g}", {"max_rel_err": worst}


def check_critical_window():
    ratios = []
    for n in STRONG_NS:
        h = n**0.25
        fl = scales(n, h).floor_t_o
        exact = probability(_law(n, h)[1], lambda t, w: (t - fl >= -1) & (t - fl <= 2))
        ratios.append(exact / critical_fluct_pmf(n, h, -1, 2))
    ok = max(abs(r - 1) for r in ratios) < 0.01
    return ok, f"P(-1 <= T_n - floor(T*-2) <= 2) / theta-partial: {_fmt(ratios)}", {"ratios": ratios}


def check_center_large_n():
    tvs = []
    for t in (40, 80, 160):
        law = center_conditional_pmf(t, t**3)
        tvs.append(gof.gof_stats((law.two_w / (2.0 * t), law.pmf), gof.COSINE_CENTER).tv)
    ok = strictly_decreasing(tvs) and tvs[-1] < 0.05
    return ok, f"TV(center law, cosine) at n = t^3, t=40,80,160: {_fmt(tvs)}", {"tv": tvs}


EXTRA = {
    "feller": ("exit-time pmf against enumeration", check_feller, "oracle"),
    "restricted": ("restricted partition against enumeration", check_restricted, "oracle"),
    "critical-window": ("critical window probability", check_critical_window, "limits"),
    "center-large-n": ("cosine center law when n >> t^2 log t", check_center_large_n, "limits"),
}

SUITES = {
    "oracle": ["1", "2", "3", "feller", "restricted"],
    "asymptotics": ["4", "5", "6"],
    "limits": ["7", "8", "9", "10", "11", "critical-window", "center-large-n"],
    "sampler": ["12"],
    "acceptance": list(CRITERIA),
}
SUITES["full"] = SUITES["acceptance"] + [k for k in EXTRA]


# wall-clock limits (seconds) that are part of the criteria themselves
RUNTIME_BUDGET = {"1": 120.0, "4": 60.0, "5": 600.0, "6": 900.0}


def run_check(key: str) -> CheckResult:
    if key in CRITERIA:
        title, fn = CRITERIA[key]
        label = f"criterion {key}"
    elif key in EXTRA:
        title, fn, _ = EXTRA[key]
        label = key
    else:
        raise DomainError(f"unknown check {key!r}")
    start = time.perf_counter()
    ok, detail, metrics = fn()
    seconds = time.perf_counter() - start
    budget = RUNTIME_BUDGET.get(key)
    if budget is not None:
        ok = ok and seconds <= budget
        detail += f"; runtime limit {budget:.0f}s {'met' if seconds <= budget else 'exceeded'}"
    return CheckResult(label, title, bool(ok), detail, metrics, seconds)


def run_suite(name: str):
    if name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return [run_check(k) for k in SUITES[name]]
