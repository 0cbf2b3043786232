"""Inter-generation time laws.

Every law is nonnegative and exposes vectorised ``pdf``/``cdf``, its mean,
inverse-CDF sampling, and the integrated survival function

    G(y) = integral_0^y (1 - F(w)) dw,      G(y) = y for y < 0,

from which the renewal excess (residual-life) CDF ``G(x) / mean`` follows.
Point-mass laws (deterministic, empirical) set ``discrete = True``; their
``pdf`` returns atom masses at the atoms and zero elsewhere.

Laws also build *shift evaluators*: objects computing ``sum_j w_j F(x - s_j)``
and ``sum_j w_j G(x - s_j)`` for a sorted shift set, which is the workhorse of
the single-user inter-arrival law.  Families whose pieces are polynomial or
exponential use prefix sums over the sorted shifts; the rest fall back to a
chunked direct evaluation.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.special import lambertw

from .errors import ExcessMassWarning, InvalidParameterError

__all__ = [
    "Distribution",
    "DistributionSpec",
    "Deterministic",
    "Uniform",
    "Exponential",
    "Pareto",
    "BoundedPareto",
    "Empirical",
    "make_distribution",
    "eval_pdf",
    "eval_cdf",
    "sample",
    "excess_cdf",
    "load_empirical_csv",
    "write_empirical_csv",
    "FAMILIES",
]

# elements per block in direct (points x shifts) evaluation
_CHUNK = 1 << 22


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _ret(a: np.ndarray):
    return float(a) if np.ndim(a) == 0 else a


class Distribution:
    """Base class for a nonnegative inter-generation law."""

    family: str = ""
    discrete: bool = False

    # -- interface -----------------------------------------------------
    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cdf_left(self, x: np.ndarray) -> np.ndarray:
        return self._cdf(x)

    def _sf(self, x: np.ndarray) -> np.ndarray:
        return 1.0 - self._cdf(x)

    def _isf(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _ppf(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _length_biased_ppf(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        """Point-mass locations and masses (empty for continuous laws)."""
        return np.empty(0), np.empty(0)

    @property
    def breakpoints(self) -> np.ndarray:
        """Points where the density jumps or the law has atoms."""
        lo, hi = self.support
        return np.array([p for p in (lo, hi) if math.isfinite(p)])

    # -- public vectorised API -----------------------------------------
    def pdf(self, x):
        return _ret(self._pdf(_arr(x)))

    def cdf(self, x):
        return _ret(self._cdf(_arr(x)))

    def cdf_left(self, x):
        """Left limit F(x-); differs from ``cdf`` only at atoms."""
        return _ret(self._cdf_left(_arr(x)))

    def integrated_survival(self, y):
        """G(y) = int_0^y (1 - F(w)) dw, with G(y) = y for y < 0."""
        return _ret(self._isf(_arr(y)))

    def ppf(self, u):
        return _ret(self._ppf(_arr(u)))

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-CDF draw(s) using ``rng``."""
        return _ret(self._ppf(rng.random(size)))

    def sample_residual(self, rng: np.random.Generator, size=None):
        """Draw(s) from the equilibrium residual-life law.

        Uses the length-biased interval times an independent uniform, which
        is exact for every family.
        """
        u = rng.random(size)
        v = rng.random(size)
        return _ret(self._length_biased_ppf(_arr(u)) * v)

    def shift_evaluator(self, shifts: np.ndarray, weights: np.ndarray) -> "ShiftEvaluator":
        return DirectShiftEvaluator(self, shifts, weights)

    def to_spec(self) -> "DistributionSpec":
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_spec().params_repr()})"


@dataclass(frozen=True)
class DistributionSpec:
    """Serializable description of an inter-generation law.

    ``family`` is one of :data:`FAMILIES`; ``params`` holds that family's
    named parameters (``samples`` is a tuple for empirical laws).
    """

    family: str
    params: tuple[tuple[str, Any], ...] = field(default=())

    @classmethod
    def of(cls, family: str, **params) -> "DistributionSpec":
        items = []
        for k, v in sorted(params.items()):
            if isinstance(v, (list, np.ndarray)):
                v = tuple(float(e) for e in v)
            items.append((k, v))
        return cls(family, tuple(items))

    @property
    def kwargs(self) -> dict[str, Any]:
        return dict(self.params)

    def params_repr(self) -> str:
        parts = []
        for k, v in self.params:
            if isinstance(v, tuple):
                parts.append(f"{k}=<{len(v)} values>")
            else:
                parts.append(f"{k}={v!r}")
        return ", ".join(parts)

    def to_dict(self) -> dict[str, Any]:
        return {"family": self.family,
                "params": {k: list(v) if isinstance(v, tuple) else v for k, v in self.params}}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], base_dir: Path | None = None) -> "DistributionSpec":
        params = dict(d.get("params", {}))
        if d["family"] == "empirical" and "csv_ref" in params:
            path = Path(params.pop("csv_ref"))
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            params["samples"] = load_empirical_csv(path)
        return cls.of(d["family"], **params)


class ShiftEvaluator:
    """Evaluates weighted sums of a law evaluated at ``x - s_j``."""

    def __init__(self, base: Distribution, shifts: np.ndarray, weights: np.ndarray):
        self.base = base
        self.shifts = np.asarray(shifts, dtype=float)
        self.weights = np.asarray(weights, dtype=float)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def cdf_left(self, x: np.ndarray) -> np.ndarray:
        return self.cdf(x)

    def sf(self, x: np.ndarray) -> np.ndarray:
        """Weighted survival; exactly zero once every term has left its support."""
        return self.weights.sum() - self.cdf(x)

    def isf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class DirectShiftEvaluator(ShiftEvaluator):
    """Straight (points x shifts) evaluation, chunked to bound memory."""

    def _apply(self, fn, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        m = max(len(self.shifts), 1)
        step = max(1, _CHUNK // m)
        for i in range(0, flat.size, step):
            blk = flat[i:i + step, None] - self.shifts[None, :]
            out[i:i + step] = fn(blk) @ self.weights
        return out.reshape(x.shape)

    def pdf(self, x) -> np.ndarray:
        """Weighted density.  Points are handled in sorted blocks and each block
        only sees the shifts that put it inside the base support."""
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        order = np.argsort(flat, kind="stable")
        xs = flat[order]
        srt = np.argsort(self.shifts, kind="stable")
        s, w = self.shifts[srt], self.weights[srt]
        lo, hi = self.base.support
        out = np.zeros(flat.size)
        step = max(1, min(512, _CHUNK // max(len(s), 1)))
        for i in range(0, xs.size, step):
            blk = xs[i:i + step]
            j0 = int(np.searchsorted(s, blk[0] - hi, "left"))
            j1 = int(np.searchsorted(s, blk[-1] - lo, "right"))
            if j1 > j0:
                out[order[i:i + step]] = self.base._pdf(blk[:, None] - s[None, j0:j1]) @ w[j0:j1]
        return out.reshape(x.shape)

    def cdf(self, x):
        return self._apply(self.base._cdf, x)

    def cdf_left(self, x):
        return self._apply(self.base._cdf_left, x)

    def sf(self, x):
        return self._apply(self.base._sf, x)

    def isf(self, x):
        return self._apply(self.base._isf, x)


class _PrefixShiftEvaluator(ShiftEvaluator):
    """Shared prefix sums of w, w*s and w*s^2 over sorted shifts."""

    def __init__(self, base, shifts, weights):
        super().__init__(base, shifts, weights)
        if np.any(np.diff(self.shifts) < 0):
            order = np.argsort(self.shifts, kind="stable")
            self.shifts = self.shifts[order]
            self.weights = self.weights[order]
        s, w = self.shifts, self.weights
        self._W = np.concatenate(([0.0], np.cumsum(w)))
        self._WS = np.concatenate(([0.0], np.cumsum(w * s)))
        self._WSS = np.concatenate(([0.0], np.cumsum(w * s * s)))

    def sf(self, x):
        return self._W[-1] - self.cdf(x)

    def _idx(self, v, side):
        return np.searchsorted(self.shifts, v, side=side)

    @staticmethod
    def _rng(P, i, j):
        return P[j] - P[i]


class _DeterministicShifts(_PrefixShiftEvaluator):
    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return self._W[self._idx(x - self.base.period, "right")]

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        return self._W[self._idx(x - self.base.period, "left")]

    def isf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.base.period
        i = self._idx(x - p, "right")
        M = len(self.shifts)
        return p * self._W[i] + x * self._rng(self._W, i, M) - self._rng(self._WS, i, M)


class _UniformShifts(_PrefixShiftEvaluator):
    def _groups(self, x):
        a, b = self.base.a, self.base.b
        ib = self._idx(x - b, "right")
        ia = self._idx(x - a, "left")
        ia = np.maximum(ia, ib)
        return ib, ia

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        a, D = self.base.a, self.base.b - self.base.a
        ib, ia = self._groups(x)
        W2 = self._rng(self._W, ib, ia)
        S2 = self._rng(self._WS, ib, ia)
        return self._W[ib] + ((x - a) * W2 - S2) / D

    def isf(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.base.a, self.base.b
        D = b - a
        M = len(self.shifts)
        ib, ia = self._groups(x)
        W3 = self._W[ib]
        W2 = self._rng(self._W, ib, ia)
        S2 = self._rng(self._WS, ib, ia)
        Q2 = self._rng(self._WSS, ib, ia)
        W1 = self._rng(self._W, ia, M)
        S1 = self._rng(self._WS, ia, M)
        X = x - a
        z1 = X * W2 - S2
        z2 = X * X * W2 - 2.0 * X * S2 + Q2
        return 0.5 * (a + b) * W3 + (a * W2 + z1 - z2 / (2.0 * D)) + (x * W1 - S1)


class _ExponentialShifts(_PrefixShiftEvaluator):
    def __init__(self, base, shifts, weights):
        super().__init__(base, shifts, weights)
        lam = base.rate
        self._ref = float(self.shifts[-1]) if len(self.shifts) else 0.0
        self._E = np.concatenate(([0.0], np.cumsum(self.weights * np.exp(lam * (self.shifts - self._ref)))))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        i = self._idx(x, "right")
        decay = np.exp(-self.base.rate * (x - self._ref))
        return self._W[i] - decay * self._E[i]

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        i = self._idx(x, "right")
        decay = np.exp(-self.base.rate * (x - self._ref))
        return (self._W[-1] - self._W[i]) + decay * self._E[i]

    def isf(self, x):
        x = np.asarray(x, dtype=float)
        i = self._idx(x, "right")
        M = len(self.shifts)
        lam = self.base.rate
        decay = np.exp(-lam * (x - self._ref))
        active = (self._W[i] - decay * self._E[i]) / lam
        return active + x * self._rng(self._W, i, M) - self._rng(self._WS, i, M)


class _EmpiricalShifts(_PrefixShiftEvaluator):
    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for u, m in zip(*self.base.atoms):
            out += m * self._W[self._idx(x - u, "right")]
        return out

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for u, m in zip(*self.base.atoms):
            out += m * self._W[self._idx(x - u, "left")]
        return out

    def isf(self, x):
        x = np.asarray(x, dtype=float)
        M = len(self.shifts)
        out = np.zeros(x.shape)
        for u, m in zip(*self.base.atoms):
            i = self._idx(x - u, "right")
            out += m * (u * self._W[i] + x * self._rng(self._W, i, M) - self._rng(self._WS, i, M))
        return out


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise InvalidParameterError(f"{name} must be a finite positive number, got {value!r}")
    return value


class Deterministic(Distribution):
    family = "deterministic"
    discrete = True

    def __init__(self, period: float):
        self.period = _positive("period", period)

    @property
    def mean(self):
        return self.period

    @property
    def support(self):
        return self.period, self.period

    @property
    def atoms(self):
        return np.array([self.period]), np.array([1.0])

    @property
    def breakpoints(self):
        return np.array([self.period])

    def _pdf(self, x):
        return (x == self.period).astype(float)

    def _cdf(self, x):
        return (x >= self.period).astype(float)

    def _cdf_left(self, x):
        return (x > self.period).astype(float)

    def _isf(self, y):
        return np.minimum(y, self.period)

    def _ppf(self, u):
        return np.full(np.shape(u), self.period)

    def _length_biased_ppf(self, u):
        return np.full(np.shape(u), self.period)

    def shift_evaluator(self, shifts, weights):
        return _DeterministicShifts(self, shifts, weights)

    def to_spec(self):
        return DistributionSpec.of(self.family, period=self.period)


class Uniform(Distribution):
    family = "uniform"

    def __init__(self, a: float, b: float):
        self.a = _positive("a", a)
        self.b = _positive("b", b)
        if not self.a < self.b:
            raise InvalidParameterError(f"uniform requires a < b, got a={self.a}, b={self.b}")

    @property
    def mean(self):
        return 0.5 * (self.a + self.b)

    @property
    def support(self):
        return self.a, self.b

    def _pdf(self, x):
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def _cdf(self, x):
        return np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)

    def _isf(self, y):
        a, b = self.a, self.b
        z = np.clip(y - a, 0.0, b - a)
        return np.minimum(y, a) + z - z * z / (2.0 * (b - a))

    def _ppf(self, u):
        return self.a + u * (self.b - self.a)

    def _length_biased_ppf(self, u):
        return np.sqrt(self.a ** 2 + u * (self.b ** 2 - self.a ** 2))

    def shift_evaluator(self, shifts, weights):
        return _UniformShifts(self, shifts, weights)

    def to_spec(self):
        return DistributionSpec.of(self.family, a=self.a, b=self.b)


class Exponential(Distribution):
    family = "exponential"

    def __init__(self, rate: float):
        self.rate = _positive("rate", rate)

    @property
    def mean(self):
        return 1.0 / self.rate

    @property
    def support(self):
        return 0.0, math.inf

    def _pdf(self, x):
        y = np.maximum(x, 0.0)
        y *= -self.rate
        np.exp(y, out=y)
        y *= self.rate
        y[x < 0] = 0.0
        return y

    def _cdf(self, x):
        return np.where(x >= 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def _sf(self, x):
        return np.exp(-self.rate * np.maximum(x, 0.0))

    def _isf(self, y):
        return np.where(y >= 0, -np.expm1(-self.rate * np.maximum(y, 0.0)) / self.rate, y)

    def _ppf(self, u):
        return -np.log1p(-u) / self.rate

    def _length_biased_ppf(self, u):
        # Gamma(2, rate) quantile: 1 - (1 + z) e^{-z} = u
        y = lambertw(-(1.0 - u) / math.e, k=-1).real
        return (-1.0 - y) / self.rate

    def shift_evaluator(self, shifts, weights):
        return _ExponentialShifts(self, shifts, weights)

    def to_spec(self):
        return DistributionSpec.of(self.family, rate=self.rate)


class Pareto(Distribution):
    """Pareto law with shape ``shape`` > 1 and minimum ``scale``."""

    family = "pareto"

    def __init__(self, shape: float, scale: float):
        self.shape = _positive("shape", shape)
        self.scale = _positive("scale", scale)
        if not self.shape > 1:
            raise InvalidParameterError(f"pareto requires shape > 1 for a finite mean, got {self.shape}")

    @classmethod
    def with_mean(cls, shape: float, mean: float) -> "Pareto":
        return cls(shape, (shape - 1.0) * mean / shape)

    @property
    def mean(self):
        return self.scale * self.shape / (self.shape - 1.0)

    @property
    def support(self):
        return self.scale, math.inf

    def _pdf(self, x):
        a, al = self.scale, self.shape
        y = np.maximum(x, a)
        np.power(y, -(al + 1.0), out=y)
        y *= al * a ** al
        y[x < a] = 0.0
        return y

    def _cdf(self, x):
        a, al = self.scale, self.shape
        xs = np.maximum(x, a)
        return np.where(x >= a, 1.0 - (a / xs) ** al, 0.0)

    def _sf(self, x):
        a, al = self.scale, self.shape
        return (a / np.maximum(x, a)) ** al

    def _isf(self, y):
        a, al = self.scale, self.shape
        ys = np.maximum(y, a)
        tail = a + a * ((ys / a) ** (1.0 - al) - 1.0) / (1.0 - al)
        return np.where(y <= a, y, tail)

    def _ppf(self, u):
        return self.scale * (1.0 - u) ** (-1.0 / self.shape)

    def _length_biased_ppf(self, u):
        return self.scale * (1.0 - u) ** (-1.0 / (self.shape - 1.0))

    def to_spec(self):
        return DistributionSpec.of(self.family, shape=self.shape, scale=self.scale)


def _bounded_power_ppf(u, beta, lo, hi):
    """Inverse CDF of the density proportional to x^(-beta-1) on [lo, hi]."""
    if abs(beta) < 1e-12:
        return lo * (hi / lo) ** u
    return lo * (1.0 - u * (1.0 - (lo / hi) ** beta)) ** (-1.0 / beta)


class BoundedPareto(Distribution):
    family = "bounded_pareto"

    def __init__(self, shape: float, lower: float, upper: float):
        self.shape = _positive("shape", shape)
        self.lower = _positive("lower", lower)
        self.upper = _positive("upper", upper)
        if not self.lower < self.upper:
            raise InvalidParameterError(
                f"bounded_pareto requires lower < upper, got L={self.lower}, H={self.upper}")
        self._norm = 1.0 / (1.0 - (self.lower / self.upper) ** self.shape)

    @property
    def mean(self):
        al, L, H = self.shape, self.lower, self.upper
        if abs(al - 1.0) < 1e-12:
            return L * H * math.log(H / L) / (H - L)
        return self._norm * al * L ** al * (L ** (1.0 - al) - H ** (1.0 - al)) / (al - 1.0)

    @property
    def support(self):
        return self.lower, self.upper

    def _pdf(self, x):
        al, L, H = self.shape, self.lower, self.upper
        y = np.clip(x, L, H)
        np.power(y, -(al + 1.0), out=y)
        y *= self._norm * al * L ** al
        y[(x < L) | (x > H)] = 0.0
        return y

    def _cdf(self, x):
        al, L, H = self.shape, self.lower, self.upper
        xs = np.clip(x, L, H)
        return np.where(x < L, 0.0, np.where(x >= H, 1.0, self._norm * (1.0 - (L / xs) ** al)))

    def _isf(self, y):
        al, L, H = self.shape, self.lower, self.upper
        ys = np.clip(y, L, H)
        if abs(al - 1.0) < 1e-12:
            integral_f = self._norm * ((ys - L) - L * np.log(ys / L))
        else:
            integral_f = self._norm * ((ys - L) - L * ((ys / L) ** (1.0 - al) - 1.0) / (1.0 - al))
        body = ys - integral_f
        return np.where(y <= L, y, np.where(y >= H, self.mean, body))

    def _ppf(self, u):
        return _bounded_power_ppf(u, self.shape, self.lower, self.upper)

    def _length_biased_ppf(self, u):
        return _bounded_power_ppf(u, self.shape - 1.0, self.lower, self.upper)

    def to_spec(self):
        return DistributionSpec.of(self.family, shape=self.shape, lower=self.lower, upper=self.upper)


class Empirical(Distribution):
    """Step ECDF of observed inter-generation times.

    Each observation is a point mass of weight 1/N; the excess CDF of this
    law is piecewise linear and computed exactly.
    """

    family = "empirical"
    discrete = True

    def __init__(self, samples: Sequence[float]):
        xs = np.sort(np.asarray(samples, dtype=float).ravel())
        if xs.size < 2:
            raise InvalidParameterError("empirical law needs at least 2 samples")
        if not np.all(np.isfinite(xs)) or xs[0] < 0:
            raise InvalidParameterError("empirical samples must be finite and >= 0")
        if xs[-1] <= 0:
            raise InvalidParameterError("empirical samples must not all be zero")
        self.samples = xs
        self._values, counts = np.unique(xs, return_counts=True)
        self._masses = counts / xs.size
        self._M = np.concatenate(([0.0], np.cumsum(self._masses)))
        self._MU = np.concatenate(([0.0], np.cumsum(self._masses * self._values)))
        self._mean = float(xs.mean())

    @property
    def mean(self):
        return self._mean

    @property
    def support(self):
        return float(self._values[0]), float(self._values[-1])

    @property
    def atoms(self):
        return self._values, self._masses

    @property
    def breakpoints(self):
        return self._values

    def _pdf(self, x):
        i = np.searchsorted(self._values, x, side="left")
        ic = np.minimum(i, len(self._values) - 1)
        hit = (i < len(self._values)) & (self._values[ic] == x)
        return np.where(hit, self._masses[ic], 0.0)

    def _cdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.samples.size

    def _cdf_left(self, x):
        return np.searchsorted(self.samples, x, side="left") / self.samples.size

    def _isf(self, y):
        i = np.searchsorted(self._values, y, side="right")
        return self._MU[i] + y * (1.0 - self._M[i])

    def _ppf(self, u):
        n = self.samples.size
        idx = np.clip(np.floor(u * n).astype(int), 0, n - 1)
        return self.samples[idx]

    def _length_biased_ppf(self, u):
        cum = np.cumsum(self.samples)
        idx = np.searchsorted(cum, u * cum[-1], side="right")
        return self.samples[np.clip(idx, 0, self.samples.size - 1)]

    def shift_evaluator(self, shifts, weights):
        if len(self._values) <= 4 * max(len(shifts), 1):
            return _EmpiricalShifts(self, shifts, weights)
        return DirectShiftEvaluator(self, shifts, weights)

    def to_spec(self):
        return DistributionSpec.of(self.family, samples=self.samples)


_BUILDERS = {
    "deterministic": lambda p: Deterministic(p["period"]),
    "uniform": lambda p: Uniform(p["a"], p["b"]),
    "exponential": lambda p: Exponential(p["rate"]),
    "pareto": lambda p: Pareto(p["shape"], p["scale"]),
    "bounded_pareto": lambda p: BoundedPareto(p["shape"], p["lower"], p["upper"]),
    "empirical": lambda p: Empirical(p["samples"]),
}
FAMILIES = tuple(_BUILDERS)


def make_distribution(spec: DistributionSpec | Distribution) -> Distribution:
    """Realize a :class:`DistributionSpec`; laws pass through unchanged."""
    if isinstance(spec, Distribution):
        return spec
    try:
        builder = _BUILDERS[spec.family]
    except KeyError:
        raise InvalidParameterError(f"unknown distribution family {spec.family!r}") from None
    try:
        return builder(spec.kwargs)
    except KeyError as exc:
        raise InvalidParameterError(f"{spec.family} is missing parameter {exc.args[0]!r}") from None


def eval_pdf(d: Distribution, x):
    return d.pdf(x)


def eval_cdf(d: Distribution, x):
    return d.cdf(x)


def sample(d: Distribution, stream: np.random.Generator, size=None):
    return d.sample(stream, size)


def excess_cdf(d: Distribution, mean_interarrival: float, x, tol: float = 1e-9):
    """(1/mean_interarrival) * int_0^x (1 - F(w)) dw.

    Not clamped: when ``mean_interarrival`` is smaller than the true mean,
    the limit exceeds one and an :class:`ExcessMassWarning` is issued.
    """
    if d.mean / mean_interarrival > 1.0 + tol:
        warnings.warn(
            f"excess CDF limit {d.mean / mean_interarrival:.12g} exceeds 1 "
            f"(mean_interarrival={mean_interarrival!r} < law mean {d.mean!r})",
            ExcessMassWarning, stacklevel=2)
    x = _arr(x)
    return _ret(np.where(x > 0, d._isf(np.maximum(x, 0.0)), 0.0) / mean_interarrival)


def load_empirical_csv(path: str | Path) -> np.ndarray:
    """Read a one-column ``dt_seconds`` CSV of inter-generation times."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "dt_seconds" not in reader.fieldnames:
            raise InvalidParameterError(f"{path}: expected a 'dt_seconds' header column")
        values = [float(row["dt_seconds"]) for row in reader if row["dt_seconds"].strip()]
    return np.asarray(values, dtype=float)


def write_empirical_csv(path: str | Path, samples: Sequence[float]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dt_seconds"])
        for v in samples:
            w.writerow([repr(float(v))])
