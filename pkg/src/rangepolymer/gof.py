"""Distances between lattice laws and binned continuous references."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError

GAUSSIAN = "gaussian"
COSINE_CENTER = "cosine"
TABLE = "table"


def cell_edges(points):
    """Cell boundaries for a sorted lattice: midpoints, open at both ends."""
    p = np.asarray(points, dtype=float)
    mids = 0.5 * (p[1:] + p[:-1])
    return np.concatenate([[-np.inf], mids, [np.inf]])


def gaussian_cell_masses(points):
    """Standard normal mass of each lattice cell."""
    return np.diff(ndtr(cell_edges(points)))


def cosine_cdf(u):
    u = np.clip(np.asarray(u, dtype=float), -0.5, 0.5)
    return 0.5 * (1.0 + np.sin(np.pi * u))


def cosine_cell_masses(points):
    """Mass of each lattice cell under the density (pi/2) cos(pi u) on [-1/2, 1/2]."""
    return np.diff(cosine_cdf(cell_edges(points)))


def ks_distance(p, q):
    """Kolmogorov-Smirnov distance between two pmfs on the same sorted lattice."""
    return float(np.max(np.abs(np.cumsum(p) - np.cumsum(q)))) if len(p) else 0.0


def tv_distance(p, q):
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


@dataclass(frozen=True)
class GofReport:
    ks: float
    tv: float
    size: int  # sample count, or 0 for an exact law


def _as_lattice_law(data, support):
    if isinstance(data, tuple):
        pts, pmf = (np.asarray(a, dtype=float) for a in data)
        if pts.size == 0:
            raise DomainError("empty law")
        order = np.argsort(pts)
        return pts[order], pmf[order] / pmf.sum(), 0
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("empty sample")
    if support is None:
        pts, counts = np.unique(x, return_counts=True)
    else:
        pts = np.sort(np.asarray(support, dtype=float))
        idx = np.searchsorted(pts, x)
        if np.any(idx >= pts.size) or np.any(pts[np.minimum(idx, pts.size - 1)] != x):
            raise DomainError("samples fall outside the declared support")
        counts = np.bincount(idx, minlength=pts.size)
    return pts, counts / x.size, x.size


def gof_stats(data, reference=GAUSSIAN, support=None, table=None) -> GofReport:
    """KS and total-variation distance of a lattice law to a reference.

    ``data`` is either a 1-D array of samples or a ``(points, pmf)`` tuple for
    an exact law.  ``reference`` is ``"gaussian"`` (standard normal),
    ``"cosine"`` (density ``(pi/2) cos(pi u)`` on ``[-1/2, 1/2]``) or
    ``"table"`` with ``table=(points, pmf)``.  Continuous references are
    binned on the cells of the law's own lattice.
    """
    pts, p, size = _as_lattice_law(data, support)
    if reference == GAUSSIAN:
        q = gaussian_cell_masses(pts)
    elif reference == COSINE_CENTER:
        q = cosine_cell_masses(pts)
    elif reference == TABLE:
        if table is None:
            raise DomainError("table reference needs table=(points, pmf)")
        tp, tq = (np.asarray(a, dtype=float) for a in table)
        grid = np.union1d(pts, tp)
        p = _embed(pts, p, grid)
        q = _embed(tp, tq / tq.sum(), grid)
    else:
        raise ValueError(f"unknown reference {reference!r}")
    return GofReport(ks_distance(p, q), tv_distance(p, q), size)


def _embed(pts, pmf, grid):
    out = np.zeros(grid.size)
    out[np.searchsorted(grid, pts)] = pmf
    return out
