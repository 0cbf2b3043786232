"""Sample statistics: moments, coefficient of variation, KS and TV distances."""
from __future__ import annotations

import math
from typing import Callable, Mapping

import numpy as np

from .errors import DegenerateSampleError, InsufficientDataError

__all__ = ["moments", "raw_moments", "ks_distance", "tv_distance", "Moments"]


class Moments(tuple):
    """(E[X], E[X^2], E[X^3], c_V) with named access."""

    __slots__ = ()

    def __new__(cls, m1, m2, m3, cv):
        return super().__new__(cls, (float(m1), float(m2), float(m3), float(cv)))

    mean = property(lambda self: self[0])
    m2 = property(lambda self: self[1])
    m3 = property(lambda self: self[2])
    cv = property(lambda self: self[3])


def raw_moments(gaps: np.ndarray) -> Moments:
    """Moments of any nonempty sample (no size check)."""
    x = np.asarray(gaps, dtype=float)
    m1 = float(x.mean())
    m2 = float(np.mean(x * x))
    m3 = float(np.mean(x * x * x))
    if m1 == 0.0:
        raise DegenerateSampleError("mean gap is zero; c_V undefined")
    # centred second moment: same quantity as E[X^2] - E[X]^2 without cancellation
    cv = math.sqrt(float(np.mean((x - m1) ** 2))) / m1
    return Moments(m1, m2, m3, cv)


def moments(gaps) -> Moments:
    """Raw sample moments E[X], E[X^2], E[X^3] and c_V = sd / mean."""
    x = np.asarray(gaps, dtype=float).ravel()
    if x.size < 2:
        raise InsufficientDataError(f"moments need at least 2 gaps, got {x.size}")
    return raw_moments(x)


def ks_distance(samples, cdf: Callable[[np.ndarray], np.ndarray],
                cdf_left: Callable[[np.ndarray], np.ndarray] | None = None,
                tol: float = 0.0, max_points: int | None = None) -> float:
    """sup_x |ECDF(x) - F(x)| over the sample, checking both step sides.

    ``cdf_left`` gives F(x-) for laws with atoms (defaults to ``cdf``).
    ``tol`` forgives floating-point jitter of sample values sitting on an
    atom: sorted values closer than ``tol`` to their neighbour form one
    cluster, F is also tried at ``hi + tol`` (right side) and ``lo - tol``
    (left side) of each cluster and the smaller discrepancy kept.  With ``max_points``, F is evaluated at
    that many order statistics only; between them the bound
    ``max(ECDF(b-) - F(a), F(b-) - ECDF(a))`` is used, so the result is a
    rigorous upper bound on the exact statistic.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise InsufficientDataError("ks_distance needs at least one sample")
    left_fn = cdf_left if cdf_left is not None else cdf
    u, counts = np.unique(x, return_counts=True)
    u_lo = u_hi = u
    if tol > 0 and u.size > 1:
        start = np.concatenate(([True], np.diff(u) > tol))
        counts = np.add.reduceat(counts, np.flatnonzero(start))
        u_lo, u_hi = u[start], u[np.concatenate((start[1:], [True]))]
    cum = np.cumsum(counts)
    c_right = cum / n
    c_left = (cum - counts) / n
    m = u_lo.size
    if max_points is not None and m > max_points:
        idx = np.unique(np.linspace(0, m - 1, max_points).round().astype(int))
    else:
        idx = np.arange(m)
    fr = np.asarray(cdf(u_hi[idx]), dtype=float)
    fl = np.asarray(left_fn(u_lo[idx]), dtype=float)
    dr = np.abs(c_right[idx] - fr)
    dl = np.abs(c_left[idx] - fl)
    if tol > 0:
        dr = np.minimum(dr, np.abs(c_right[idx] - np.asarray(cdf(u_hi[idx] + tol), dtype=float)))
        dl = np.minimum(dl, np.abs(c_left[idx] - np.asarray(left_fn(u_lo[idx] - tol), dtype=float)))
    d = float(max(dr.max(), dl.max()))
    if idx.size < m and idx.size > 1:
        # F and the ECDF are monotone between consecutive evaluated points a < b
        a, b = idx[:-1], idx[1:]
        gap_bound = np.maximum(c_left[b] - fr[:-1], fl[1:] - c_right[a])
        d = max(d, float(gap_bound.max()))
    return min(max(d, 0.0), 1.0)


def tv_distance(p: Mapping[int, float], q: Mapping[int, float]) -> float:
    """Total variation 0.5 * sum |p - q| over the union of supports."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
