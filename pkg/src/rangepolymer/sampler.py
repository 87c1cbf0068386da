"""Exact samplers for the polymer range and for walks conditioned on their range.

Randomness comes from numpy's Philox-4x64 counter-based generator.  A batch
is cut into fixed chunks of ``CHUNK`` draws; chunk ``c`` of seed ``s`` uses
key ``s`` and starting counter ``(0, 0, c, 0)``.  Draws therefore depend only
on ``(seed, count)`` and never on how many workers produced them.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError, ResourceError
from .partition import JointLaw
from .range_law import RangeEvent

CHUNK = 1 << 16
PATH_DP_BUDGET = 50_000_000
WORKERS_ENV = "RANGEPOLYMER_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed {seed} must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, chunk, 0]))


def _chunked(seed, count, fn, workers):
    """``fn(rng, start, stop)`` over fixed chunks, concatenated in index order."""
    bounds = [(c, c * CHUNK, min(count, (c + 1) * CHUNK)) for c in range(-(-count // CHUNK))]

    def run(b):
        c, lo, hi = b
        return fn(chunk_generator(seed, c), lo, hi)

    workers = workers or default_workers()
    if workers == 1 or len(bounds) == 1:
        parts = [run(b) for b in bounds]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, bounds))
    return np.concatenate(parts)


@dataclass(frozen=True)
class SampleBatch:
    seed: int
    count: int
    t: np.ndarray
    two_w: np.ndarray

    @property
    def draws(self):
        return list(zip(self.t.tolist(), self.two_w.tolist()))

    def to_bytes(self) -> bytes:
        return np.stack([self.t, self.two_w]).astype("<i8").tobytes()


def sample_range(law: JointLaw, seed: int, count: int, workers: int | None = None) -> SampleBatch:
    """``count`` i.i.d. draws of ``(T_n, 2 W_n)`` by inverse CDF on the exact table."""
    if count < 1:
        raise DomainError("count must be >= 1")
    if law.t.size == 0 or not np.isfinite(law.log_normalizer):
        raise DomainError("cannot sample from an empty law")
    p = law.pmf()
    if not np.isfinite(p).all() or p.sum() <= 0:
        raise DomainError("cannot sample from an empty law")
    cdf = np.cumsum(p)
    cdf /= cdf[-1]

    def draw(rng, lo, hi):
        idx = np.searchsorted(cdf, rng.random(hi - lo), side="right")
        return np.minimum(idx, cdf.size - 1)

    idx = _chunked(seed, count, draw, workers)
    return SampleBatch(seed, count, law.t[idx].copy(), law.two_w[idx].copy())


def chi_square_gof(batch: SampleBatch, law: JointLaw, min_expected: float = 5.0):
    """Pearson chi-square of the batch against the law it was drawn from.

    Cells with expected count below ``min_expected`` are pooled into one bin.
    Returns ``(statistic, p_value)``.
    """
    p = law.pmf()
    p = p / p.sum()
    key = {(int(t), int(w)): i for i, (t, w) in enumerate(zip(law.t, law.two_w))}
    idx = np.fromiter((key[d] for d in zip(batch.t.tolist(), batch.two_w.tolist())), int, batch.count)
    obs = np.bincount(idx, minlength=p.size).astype(float)
    exp = p * batch.count
    big = exp >= min_expected
    obs_b, exp_b = obs[big], exp[big]
    if (~big).any():
        obs_b = np.append(obs_b, obs[~big].sum())
        exp_b = np.append(exp_b, exp[~big].sum())
    res = stats.chisquare(obs_b, exp_b * obs_b.sum() / exp_b.sum())
    return float(res.statistic), float(res.pvalue)


@dataclass(frozen=True)
class ConditionedPath:
    steps: np.ndarray  # int8 array of +-1
    x: int
    y: int

    @property
    def positions(self):
        return np.concatenate([[0], np.cumsum(self.steps)])


class ConditionedSampler:
    """Walk conditioned on ``R_n = [-x, y]`` via a backward h-transform.

    State is (position, visited-flags) with bit 0 for ``-x`` and bit 1 for
    ``y``.  ``V[m, f, i]`` is proportional to the probability that from
    position ``i - x`` with flags ``f`` at time ``m`` the walk stays in
    ``[-x, y]`` and has both flags set at time ``n``.  Each layer is rescaled
    to max 1; only ratios within a layer are used.
    """

    def __init__(self, e: RangeEvent, budget: int = PATH_DP_BUDGET):
        self.e = e
        n, T = e.n, e.T
        if 4 * (n + 1) * (T + 1) > budget:
            raise ResourceError(f"path DP needs {4 * (n + 1) * (T + 1)} cells", 4 * (n + 1) * (T + 1), budget)
        bits = np.zeros(T + 1, dtype=np.int64)
        bits[0] |= 1
        bits[T] |= 2
        self.bits = bits
        V = np.zeros((n + 1, 4, T + 1))
        V[n, 3, :] = 1.0
        flags = np.arange(4)[:, None]
        for m in range(n - 1, -1, -1):
            nxt = V[m + 1]
            cur = np.zeros((4, T + 1))
            if T > 0:
                cur[:, :T] += 0.5 * nxt[flags | bits[None, 1:], np.arange(1, T + 1)[None, :]]
                cur[:, 1:] += 0.5 * nxt[flags | bits[None, :T], np.arange(T)[None, :]]
            top = cur.max()
            V[m] = cur / top if top > 0 else cur
        self.V = V
        self.start = (int(bits[e.x]), e.x)
        if V[0, self.start[0], self.start[1]] <= 0:
            raise DomainError(f"P(E_{e.x}^{e.y}({n})) = 0")

    def _step_prob_up(self, m, f, i):
        """Probability of a +1 step at time ``m`` from state ``(f, i)`` (vectorised)."""
        T = self.e.T
        up = np.where(i < T, self.V[m + 1][f | self.bits[np.minimum(i + 1, T)], np.minimum(i + 1, T)], 0.0)
        dn = np.where(i > 0, self.V[m + 1][f | self.bits[np.maximum(i - 1, 0)], np.maximum(i - 1, 0)], 0.0)
        return up / (up + dn)

    def sample(self, u: np.ndarray) -> np.ndarray:
        """Paths driven by uniforms ``u`` of shape ``(k, n)``; returns int8 steps."""
        k, n = u.shape
        f = np.full(k, self.start[0], dtype=np.int64)
        i = np.full(k, self.start[1], dtype=np.int64)
        steps = np.empty((k, n), dtype=np.int8)
        for m in range(n):
            s = np.where(u[:, m] < self._step_prob_up(m, f, i), 1, -1)
            steps[:, m] = s
            i = i + s
            f = f | self.bits[i]
        return steps

    def path_probability(self, steps) -> float:
        """Probability the sampler outputs ``steps``; 0 for inadmissible paths."""
        steps = np.asarray(steps)
        if steps.shape != (self.e.n,) or not np.isin(steps, (-1, 1)).all():
            return 0.0
        f, i = self.start
        prob = 1.0
        for m, s in enumerate(steps.tolist()):
            pu = float(self._step_prob_up(m, np.array([f]), np.array([i]))[0])
            prob *= pu if s == 1 else 1.0 - pu
            if prob == 0.0:
                return 0.0
            i += s
            f |= int(self.bits[i])
        return prob


def sample_paths_conditioned(e: RangeEvent, seed: int, count: int, workers: int | None = None):
    """``count`` independent exact draws from the walk conditioned on ``E_x^y(n)``."""
    if count < 1:
        raise DomainError("count must be >= 1")
    sampler = ConditionedSampler(e)
    steps = _chunked(seed, count, lambda rng, lo, hi: sampler.sample(rng.random((hi - lo, e.n))), workers)
    return [ConditionedPath(s, e.x, e.y) for s in steps]


def sample_path_conditioned(e: RangeEvent, seed: int) -> ConditionedPath:
    return sample_paths_conditioned(e, seed, 1, workers=1)[0]


def conditioned_path_probability(e: RangeEvent, steps) -> float:
    return ConditionedSampler(e).path_probability(steps)


def realized_range(steps):
    pos = np.concatenate([[0], np.cumsum(steps)])
    return int(-pos.min()), int(pos.max())
