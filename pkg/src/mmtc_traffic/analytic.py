"""Analytic inter-arrival and batch-size laws at the base station.

Single-user law: the inter-generation law convolved with a symmetric
shift set (``scenario.shift_set``).  Its renewal excess law is

    F_e(x) = lam * int_0^x (1 - F'(w)) dw = lam * sum_j w_j [G(x - s_j) - G(-s_j)]

where ``G`` is the integrated survival of the base law.  The right-hand
identity is exact and is the default route; ``method="quad"`` integrates
``1 - F'`` adaptively over the mixture breakpoints instead and serves as
the oracle for it.

Two aggregation laws are kept side by side:

* ``PAPER_PRODUCT``: the product of per-user excess CDFs (the law of the
  maximum), evaluated verbatim and never clamped.
* ``EXACT_MIN``: ``1 - prod(1 - F_e)``, the law of the minimum residual.
"""
from __future__ import annotations

import csv
import enum
import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .distributions import DirectShiftEvaluator, Exponential, Pareto
from .errors import DomainError, InvalidParameterError
from .quadrature import cumulative_integral, integrate
from .scenario import CellConfig, PacketPmf, Scenario, ShiftMixture, UserClass, shift_set

__all__ = [
    "AggregateMode",
    "ExcessLaw",
    "AnalyticModel",
    "arrival_batch_pmf",
    "BatchResult",
    "AnalyticReport",
    "single_user_pdf",
    "single_user_cdf",
    "single_user_mean",
    "numeric_mean",
    "user_excess_cdf",
    "negative_mass",
    "aggregate_cdf",
    "homogeneous_aggregate_cdf",
    "exponential_closed_form_cdf",
    "pareto_closed_form_cdf",
    "closed_form_domain",
    "batch_pmf",
    "pairwise_win_prob",
    "analytic_report",
    "homogeneous_scenario",
]


class AggregateMode(enum.Enum):
    PAPER_PRODUCT = "paper"  # product of excess CDFs (law of the maximum)
    EXACT_MIN = "exact"      # complement product (law of the minimum)

    @classmethod
    def parse(cls, v) -> "AggregateMode":
        if isinstance(v, cls):
            return v
        key = str(v).lower()
        aliases = {"paperproduct": "paper", "exactmin": "exact"}
        return cls(aliases.get(key, key))


# -- single-user law --------------------------------------------------------

def single_user_pdf(mix: ShiftMixture, x):
    """sum_j w_j f(x - s_j); atom masses for point-mass base laws."""
    xa = np.asarray(x, dtype=float)
    out = DirectShiftEvaluator(mix.base, mix.shifts, mix.weights).pdf(xa)
    return float(out) if out.ndim == 0 else out


def single_user_cdf(mix: ShiftMixture, x):
    xa = np.asarray(x, dtype=float)
    out = mix.evaluator.cdf(xa)
    return float(out) if np.ndim(out) == 0 else out


def single_user_mean(mix: ShiftMixture) -> float:
    """mean(base) + sum w*s; the compensated sum makes symmetric sets exact."""
    return mix.base.mean + math.fsum((mix.weights * mix.shifts).tolist())


BREAKPOINT_BUDGET = 20000


def _mixture_points(mix: ShiftMixture, every_shift: bool = False, envelope: bool = False) -> np.ndarray:
    """Quadrature breakpoints of the single-user law.

    Point-mass bases jump at every shifted atom, so all are returned.  For
    continuous bases the shifted copies of a density edge only create
    kinks in the CDF, and the edge, min-shifted and max-shifted positions
    suffice.  ``envelope`` forces the short list for any base.
    """
    bp = mix.base.breakpoints
    if bp.size == 0:
        return np.empty(0)
    s = mix.shifts
    if envelope or not (mix.base.discrete or every_shift):
        s = np.unique(np.array([s[0], 0.0, s[-1]]))
    return np.unique((s[:, None] + bp[None, :]).ravel())


def numeric_mean(mix: ShiftMixture, atol: float = 1e-10, rtol: float = 1e-9) -> float:
    """Mean of the single-user law from its density: ``int x f'(x) dx``.

    Point-mass bases are summed atom by atom instead of integrated.
    """
    base = mix.base
    if base.discrete:
        at, m = base.atoms
        return float(np.sum(mix.weights[:, None] * m[None, :] * (mix.shifts[:, None] + at[None, :])))
    lo, hi = base.support
    a = lo + float(mix.shifts[0])
    b = hi + float(mix.shifts[-1])
    pts = _mixture_points(mix, every_shift=True)
    if math.isfinite(b):
        return integrate(lambda x: x * single_user_pdf(mix, x), a, b, points=pts, atol=atol, rtol=rtol)
    # Beyond the last shift the density is smooth.  The tail is taken by parts,
    # X S(X) + int_X^inf S, with x = X e^u so power-law tails decay geometrically.
    cut = max(lo + float(mix.shifts[-1]), 0.0) + base.mean
    body = integrate(lambda x: x * single_user_pdf(mix, x), a, cut, points=pts, atol=atol, rtol=rtol)
    sf = mix.evaluator.sf

    def log_tail(u):
        x = cut * np.exp(np.minimum(u, 700.0))
        return np.where(np.isfinite(x), sf(np.minimum(x, np.finfo(float).max)) * x, 0.0)

    tail = cut * float(sf(np.array([cut]))[0]) + integrate(log_tail, 0.0, math.inf, atol=atol, rtol=rtol)
    return float(body + tail)


def negative_mass(mix: ShiftMixture) -> float:
    """P(single-user gap < 0) = sum_j w_j F((-s_j)-)."""
    return float(mix.evaluator.cdf_left(np.zeros(1))[0])


class ExcessLaw:
    """Excess (residual-life) law of one user's arrival process at rate ``lam``."""

    def __init__(self, mix: ShiftMixture, lam: float):
        if not lam > 0:
            raise InvalidParameterError("traffic rate must be > 0")
        self.mix = mix
        self.lam = float(lam)
        self._g0 = float(mix.evaluator.isf(np.zeros(1))[0])

    @property
    def limit(self) -> float:
        """F_e(inf); above one when the single-user law has negative mass."""
        return self.lam * (self.mix.base.mean - self._g0)

    @property
    def upper(self) -> float:
        """Point beyond which the excess density vanishes (may be inf)."""
        return self.mix.base.support[1] + float(self.mix.shifts[-1])

    @cached_property
    def breakpoints(self) -> np.ndarray:
        p = _mixture_points(self.mix)
        return p[(p > 0) & np.isfinite(p)]

    @cached_property
    def envelope_breakpoints(self) -> np.ndarray:
        p = _mixture_points(self.mix, envelope=True)
        return p[(p > 0) & np.isfinite(p)]

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        out = np.where(x > 0, self.lam * (self.mix.evaluator.isf(xp) - self._g0), 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf_quad(self, x, atol: float = 1e-10, rtol: float = 1e-10) -> np.ndarray:
        """Same quantity by adaptive quadrature of ``lam * (1 - F')``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < 0):
            raise DomainError("excess CDF requires x >= 0")
        return cumulative_integral(self.pdf, x, points=self.breakpoints, start=0.0,
                                   atol=atol, rtol=rtol)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        sf = np.maximum(self.mix.evaluator.sf(np.maximum(x, 0.0)), 0.0)
        out = np.where(x >= 0, self.lam * sf, 0.0)
        return float(out) if out.ndim == 0 else out


def user_excess_cdf(mix: ShiftMixture, lam: float, x, method: str = "exact"):
    """lam * int_0^x (1 - single_user_cdf(w)) dw."""
    law = ExcessLaw(mix, lam)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("excess CDF requires x >= 0")
    if method == "exact":
        return law.cdf(xa)
    if method == "quad":
        out = law.cdf_quad(xa.ravel()).reshape(xa.shape)
        return float(out) if out.ndim == 0 else out
    raise ValueError(f"unknown method {method!r}")


# -- scenario-level model ---------------------------------------------------

class AnalyticModel:
    """Per-class mixtures and excess laws for one scenario (cached)."""

    def __init__(self, scenario: Scenario):
        if not scenario.classes:
            raise InvalidParameterError("scenario has no classes")
        self.scenario = scenario
        n = scenario.n
        self.mixtures = [shift_set(c, scenario.cell, n) for c in scenario.classes]
        self.excess = [ExcessLaw(m, c.traffic_rate) for m, c in zip(self.mixtures, scenario.classes)]
        self.pops = np.array([c.population for c in scenario.classes], dtype=float)

    @property
    def n_classes(self) -> int:
        return len(self.excess)

    @cached_property
    def breakpoints(self) -> np.ndarray:
        """Union of the class breakpoints.

        Beyond BREAKPOINT_BUDGET points (large empirical traces) the per-atom
        lists are replaced by their envelopes and adaptive refinement
        resolves the remaining kinks and small steps.
        """
        if not self.excess:
            return np.empty(0)
        full = np.unique(np.concatenate([e.breakpoints for e in self.excess]))
        if full.size <= BREAKPOINT_BUDGET:
            return full
        self.breakpoints_thinned = True
        return np.unique(np.concatenate([e.envelope_breakpoints for e in self.excess]))

    breakpoints_thinned = False

    @property
    def upper(self) -> float:
        return max(e.upper for e in self.excess)

    def class_cdfs(self, x: np.ndarray) -> np.ndarray:
        """Excess CDFs, shape (len(x), n_classes).

        The last large evaluation is memoised: the KS statistics of the
        different modes all evaluate the same sample points.
        """
        x = np.asarray(x, dtype=float)
        if x.size < 1024:
            return np.stack([e.cdf(x) for e in self.excess], axis=-1)
        key = (x.shape, hashlib.blake2b(x.tobytes(), digest_size=16).digest())
        if self._memo is None or self._memo[0] != key:
            self._memo = (key, np.stack([e.cdf(x) for e in self.excess], axis=-1))
        return self._memo[1]

    _memo = None

    def class_pdfs(self, x: np.ndarray) -> np.ndarray:
        return np.stack([e.pdf(x) for e in self.excess], axis=-1)

    def survival(self, x) -> np.ndarray:
        """prod_c (1 - F_e,c)^pop_c with each factor clipped at zero."""
        x = np.asarray(x, dtype=float)
        q = np.clip(1.0 - self.class_cdfs(x), 0.0, 1.0)
        with np.errstate(divide="ignore"):
            logs = np.log(q) @ self.pops
        return np.exp(logs)

    def cdf(self, x, mode: AggregateMode | str = AggregateMode.EXACT_MIN):
        mode = AggregateMode.parse(mode)
        x = np.asarray(x, dtype=float)
        if mode is AggregateMode.EXACT_MIN:
            q = np.clip(1.0 - self.class_cdfs(x), 0.0, 1.0)
            with np.errstate(divide="ignore"):
                logs = np.log(q) @ self.pops
            out = -np.expm1(logs)
        else:
            f = self.class_cdfs(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                logs = np.where(f > 0, np.log(np.where(f > 0, f, 1.0)), -np.inf) @ self.pops
            out = np.exp(logs)
        out = np.where(x > 0, out, 0.0)
        return float(out) if out.ndim == 0 else out

    def palm_cdf(self, x):
        """Stationary law of the gap between consecutive merged arrivals.

        For independent stationary renewal streams, the gap following an
        arrival of a class-c user exceeds x when that user's own next gap
        exceeds x and every other user's residual does:

            1 - F(x) = sum_c (pop_c lam_c / Lam) (1 - F'_c(x))
                       (1 - F_e,c)^(pop_c - 1) prod_{d != c} (1 - F_e,d)^pop_d.

        With a single user this is the single-user law.
        """
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        q = np.clip(1.0 - self.class_cdfs(xp), 0.0, 1.0)
        own = np.stack([np.maximum(m.evaluator.sf(xp), 0.0) for m in self.mixtures], axis=-1)
        lams = np.array([e.lam for e in self.excess])
        share = self.pops * lams / float(self.pops @ lams)
        C = self.n_classes
        expo = np.tile(self.pops, (C, 1)) - np.eye(C)
        surv = np.zeros(xp.shape)
        for c in range(C):
            surv = surv + share[c] * own[..., c] * np.prod(q ** expo[c], axis=-1)
        out = np.where(x >= 0, 1.0 - surv, 0.0)
        return float(out) if out.ndim == 0 else out

    # moments of the ExactMin law: E[X^k] = k int x^(k-1) S(x) dx
    def exact_moments(self) -> tuple[float, float, float]:
        s_scale = 1.0 / float(self.pops @ [e.lam for e in self.excess])

        def f(x):
            s = self.survival(x)
            return np.stack([s, 2.0 * x * s, 3.0 * x * x * s], axis=-1)

        upper = self.upper
        if math.isfinite(upper):
            # S is nonincreasing, so int_t^upper k x^(k-1) S <= S(t) upper^k; drop
            # the tail once that bound is below 1e-13 of the scale s_scale^k
            def ok(t):
                return all(self.survival(t) * upper ** k <= 1e-13 * s_scale ** k for k in (1, 2, 3))

            lo, hi = 0.0, upper
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                lo, hi = (lo, mid) if ok(mid) else (mid, hi)
            upper = hi
        pts = self.breakpoints
        vals = integrate(f, 0.0, upper if math.isfinite(upper) else math.inf,
                         points=np.concatenate(([s_scale], pts)), atol=1e-14, rtol=1e-9)
        return tuple(float(v) for v in vals)

    def exact_quantile(self, p: float) -> float:
        """Smallest x with ExactMin CDF >= p (bisection)."""
        lo, hi = 0.0, 1.0 / float(self.pops @ [e.lam for e in self.excess])
        while self.cdf(hi) < p:
            lo, hi = hi, hi * 2.0
            if hi > 1e15:
                raise DomainError(f"ExactMin law does not reach probability {p}")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.cdf(mid) >= p:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-12 * hi:
                break
        return hi


_MODEL_CACHE: dict[int, tuple[Scenario, AnalyticModel]] = {}


def _model(scenario: Scenario) -> AnalyticModel:
    hit = _MODEL_CACHE.get(id(scenario))
    if hit is not None and hit[0] is scenario:
        return hit[1]
    m = AnalyticModel(scenario)
    if len(_MODEL_CACHE) >= 16:
        _MODEL_CACHE.pop(next(iter(_MODEL_CACHE)))
    _MODEL_CACHE[id(scenario)] = (scenario, m)
    return m


def aggregate_cdf(scenario: Scenario, mode: AggregateMode | str, x):
    """Aggregated inter-arrival CDF over the population-expanded scenario."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("aggregate CDF requires x >= 0")
    return _model(scenario).cdf(x, mode)


def homogeneous_scenario(user_class: UserClass, cell: CellConfig, n: int) -> Scenario:
    return Scenario(cell, (user_class.with_population(n),), name=user_class.label)


def homogeneous_aggregate_cdf(user_class: UserClass, cell: CellConfig, n: int,
                              mode: AggregateMode | str, x):
    """n i.i.d. users: F_e^n (PAPER_PRODUCT) or 1 - (1 - F_e)^n (EXACT_MIN)."""
    mode = AggregateMode.parse(mode)
    mix = shift_set(user_class, cell, n)
    fe = np.asarray(ExcessLaw(mix, user_class.traffic_rate).cdf(np.asarray(x, dtype=float)))
    if mode is AggregateMode.PAPER_PRODUCT:
        out = fe ** n
    else:
        with np.errstate(divide="ignore"):
            out = -np.expm1(n * np.log1p(-np.minimum(fe, 1.0)))
    return float(out) if out.ndim == 0 else out


# -- closed forms -----------------------------------------------------------

def closed_form_domain(user_class: UserClass, cell: CellConfig, n: int) -> float:
    """Smallest x at which the closed forms hold (largest positive shift plus support start)."""
    mix = shift_set(user_class, cell, n)
    lo = mix.base.support[0]
    return max(0.0, lo + float(mix.shifts[-1]))


def _aggregate_from_fe(fe, n, mode):
    mode = AggregateMode.parse(mode)
    fe = np.asarray(fe, dtype=float)
    if mode is AggregateMode.PAPER_PRODUCT:
        return fe ** n
    with np.errstate(divide="ignore"):
        return -np.expm1(n * np.log1p(-np.minimum(fe, 1.0)))


def exponential_closed_form_cdf(user_class: UserClass, cell: CellConfig, n: int, x,
                                mode: AggregateMode | str = AggregateMode.PAPER_PRODUCT,
                                literal: bool = False):
    """Aggregated CDF for exponential inter-generation times.

    Default: F_e(x) = A (1 - e^{-lam x}) + lam C with
    A = sum w e^{lam s} and C = sum_{s>0} w (s + (1 - e^{lam s}) / lam),
    exact for x >= max shift; smaller x falls back to the mixture path.
    ``literal=True`` evaluates lam^n [(1-A) x + (A/lam)(1 - e^{-lam x})]^n,
    which ignores the truncation of the shifted densities at zero.
    """
    law = user_class.law
    if not isinstance(law, Exponential):
        raise DomainError(f"class {user_class.label!r} is not exponential")
    lam = law.rate
    mix = shift_set(user_class, cell, n)
    s, w = mix.shifts, mix.weights
    A = float(np.sum(w * np.exp(lam * s)))
    x = np.asarray(x, dtype=float)
    if literal:
        inner = (1.0 - A) * x + (A / lam) * -np.expm1(-lam * x)
        out = lam ** n * inner ** n if AggregateMode.parse(mode) is AggregateMode.PAPER_PRODUCT else \
            _aggregate_from_fe(lam * inner, n, mode)
        return float(out) if out.ndim == 0 else out
    pos = s > 0
    C = float(np.sum(w[pos] * (s[pos] + -np.expm1(lam * s[pos]) / lam)))
    fe_closed = A * -np.expm1(-lam * x) + lam * C
    x0 = max(0.0, float(s[-1]))
    below = x < x0
    fe = fe_closed
    if np.any(below):
        fe = np.where(below, ExcessLaw(mix, lam).cdf(np.maximum(x, 0.0)), fe_closed)
    out = _aggregate_from_fe(np.where(x > 0, fe, 0.0), n, mode)
    return float(out) if out.ndim == 0 else out


def pareto_closed_form_cdf(user_class: UserClass, cell: CellConfig, n: int, x,
                           mode: AggregateMode | str = AggregateMode.PAPER_PRODUCT,
                           literal: bool = False):
    """Aggregated CDF for Pareto inter-generation times.

    Each shifted term contributes lam * [G(x - B) - G(-B)] with
    G(y) = mean - a^alpha y^(1-alpha) / (alpha - 1) for y >= a and G(y) = y
    below, so for x >= a + max shift

        F_e(x) = 1 - lam a^alpha / (alpha - 1) * sum w (x - B)^(1-alpha) - lam D,

    D = sum w G(-B).  Smaller x falls back to the mixture path.
    ``literal=True`` keeps the untruncated per-term expression
    x - a^alpha[(x-B)^(1-alpha) - (-B)^(1-alpha)]/(alpha-1) - a^alpha (-B)^(-alpha) x
    for B < 0 and uses the exact term integral for B >= 0, where that
    expression is not real-valued or diverges.
    """
    law = user_class.law
    if not isinstance(law, Pareto):
        raise DomainError(f"class {user_class.label!r} is not Pareto")
    al, a = law.shape, law.scale
    lam = user_class.traffic_rate
    mix = shift_set(user_class, cell, n)
    s, w = mix.shifts, mix.weights
    x = np.asarray(x, dtype=float)
    xf = np.atleast_1d(x).ravel()
    D = float(np.sum(w * law._isf(-s)))
    if literal:
        neg = s < 0
        B = s[neg]
        xm = xf[:, None] - B[None, :]
        terms = (xf[:, None]
                 + a ** al * (xm ** (1 - al) - (-B[None, :]) ** (1 - al)) / (1 - al)
                 - a ** al * (-B[None, :]) ** (-al) * xf[:, None])
        lit = terms @ w[neg]
        rest = (law._isf(xf[:, None] - s[None, ~neg]) - law._isf(-s[None, ~neg])) @ w[~neg]
        fe = lam * (lit + rest)
    else:
        x0 = a + max(0.0, float(s[-1]))
        fe = np.empty_like(xf)
        ok = xf >= x0
        if np.any(ok):
            # chunk the (points x shifts) power sum to bound memory
            acc = np.empty(int(ok.sum()))
            xo = xf[ok]
            step = max(1, (1 << 22) // max(len(s), 1))
            for i in range(0, xo.size, step):
                acc[i:i + step] = ((xo[i:i + step, None] - s[None, :]) ** (1.0 - al)) @ w
            fe[ok] = 1.0 - lam * a ** al / (al - 1.0) * acc - lam * D + (lam * law.mean - 1.0)
        if np.any(~ok):
            fe[~ok] = ExcessLaw(mix, lam).cdf(np.maximum(xf[~ok], 0.0))
    fe = np.where(xf > 0, fe, 0.0)
    out = _aggregate_from_fe(fe, n, mode).reshape(x.shape)
    return float(out) if out.ndim == 0 else out


# -- batch sizes ------------------------------------------------------------

@dataclass
class BatchResult:
    """Batch-size law at the base station and the per-user win probabilities."""

    mode: AggregateMode
    pmf: PacketPmf
    per_user: np.ndarray        # p_i for one user of each class
    log_per_user: np.ndarray    # natural log of the same (survives underflow)
    populations: np.ndarray
    log_sum_pi: float           # log of sum over all users of p_i

    @property
    def sum_pi(self) -> float:
        return math.exp(self.log_sum_pi) if math.isfinite(self.log_sum_pi) else 0.0


def _mix_batch(scenario: Scenario, weights: np.ndarray) -> PacketPmf:
    acc: dict[int, float] = {}
    for c, wc in zip(scenario.classes, weights):
        for v, p in zip(c.packets.values, c.packets.probs):
            acc[v] = acc.get(v, 0.0) + wc * p
    vals = tuple(sorted(acc))
    return PacketPmf(vals, tuple(acc[v] for v in vals))


def arrival_batch_pmf(scenario: Scenario) -> PacketPmf:
    """Batch-size law of a typical arrival: classes weighted by pop_c * lambda_c."""
    w = np.array([c.population * c.traffic_rate for c in scenario.classes])
    return _mix_batch(scenario, w / w.sum())


def _pair_matrix(model: AnalyticModel) -> np.ndarray:
    """P[c, d] = int_0^inf F_e,c(x) f_e,d(x) dx for all class pairs."""
    C = model.n_classes

    def f(x):
        F = model.class_cdfs(x)
        g = model.class_pdfs(x)
        return (F[:, :, None] * g[:, None, :]).reshape(len(x), C * C)

    upper = model.upper
    top = upper if math.isfinite(upper) else math.inf
    vals = integrate(f, 0.0, top, points=model.breakpoints, atol=1e-12, rtol=1e-10)
    return np.asarray(vals, dtype=float).reshape(C, C)


def pairwise_win_prob(i: int, j: int, scenario: Scenario) -> float:
    """int_0^inf F_e,i f_e,j: probability-like weight that class i beats class j."""
    if i == j and scenario.classes[i].population < 2:
        raise InvalidParameterError("pairwise win probability needs two distinct users")
    model = _model(scenario)
    ei, ej = model.excess[i], model.excess[j]

    def f(x):
        return ei.cdf(x) * ej.pdf(x)

    pts = np.unique(np.concatenate((ei.breakpoints, ej.breakpoints)))
    top = ej.upper if math.isfinite(ej.upper) else math.inf
    return integrate(f, 0.0, top, points=pts, atol=1e-12, rtol=1e-10)


def batch_pmf(scenario: Scenario, mode: AggregateMode | str = AggregateMode.EXACT_MIN) -> BatchResult:
    """Batch-size pmf at the base station.

    PAPER_PRODUCT: p_c = P(c,c)^(pop_c - 1) prod_{d != c} P(c,d)^pop_d, reported as-is.
    EXACT_MIN: p_c = int f_c (1 - F_c)^(pop_c - 1) prod_{d != c} (1 - F_d)^pop_d.
    The pmf is sum_c pop_c p_c pmf_c; in EXACT_MIN mode it is normalized.
    """
    mode = AggregateMode.parse(mode)
    model = _model(scenario)
    pops = model.pops
    C = model.n_classes
    if mode is AggregateMode.PAPER_PRODUCT:
        P = _pair_matrix(model)
        expo = np.tile(pops, (C, 1)) - np.eye(C)
        with np.errstate(divide="ignore"):
            logP = np.where(P > 0, np.log(np.where(P > 0, P, 1.0)), -np.inf)
        logp = np.where(expo > 0, logP * expo, 0.0).sum(axis=1)
    else:
        expo = np.tile(pops, (C, 1)) - np.eye(C)

        def f(x):
            F = model.class_cdfs(x)
            g = model.class_pdfs(x)
            q = np.clip(1.0 - F, 0.0, 1.0)
            # out[:, c] = g_c * prod_d q_d^expo[c, d]
            out = np.empty((len(x), C))
            for c in range(C):
                out[:, c] = g[:, c] * np.prod(q ** expo[c][None, :], axis=1)
            return out

        upper = model.upper
        top = upper if math.isfinite(upper) else math.inf
        scale = 1.0 / float(pops @ [e.lam for e in model.excess])
        pts = np.concatenate(([scale], model.breakpoints))
        vals = np.atleast_1d(integrate(f, 0.0, top, points=pts, atol=1e-13, rtol=1e-10))
        with np.errstate(divide="ignore"):
            logp = np.log(np.maximum(vals, 0.0))
    p = np.exp(logp)
    with np.errstate(divide="ignore"):
        lw = logp + np.log(pops)
    finite = np.isfinite(lw)
    log_sum = float(np.logaddexp.reduce(lw[finite])) if np.any(finite) else -math.inf
    weights = pops * p
    if mode is AggregateMode.EXACT_MIN:
        weights = weights / weights.sum()
    return BatchResult(mode, _mix_batch(scenario, weights), p, logp, pops, log_sum)


# -- report -----------------------------------------------------------------

@dataclass
class AnalyticReport:
    scenario: str
    grid: np.ndarray
    cdf_paper: np.ndarray
    cdf_exact: np.ndarray
    batch_exact: BatchResult
    batch_paper: BatchResult
    diagnostics: dict = field(default_factory=dict)

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x_seconds", "cdf_paper", "cdf_exact"])
            for row in zip(self.grid.tolist(), self.cdf_paper.tolist(), self.cdf_exact.tolist()):
                w.writerow([repr(v) for v in row])

    def write_batch_csv(self, path: str | Path) -> None:
        pe, pp = self.batch_exact.pmf.as_dict(), self.batch_paper.pmf.as_dict()
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["packets", "pmf_exact", "pmf_paper"])
            for k in sorted(set(pe) | set(pp)):
                w.writerow([k, repr(pe.get(k, 0.0)), repr(pp.get(k, 0.0))])

    def write_json(self, path: str | Path) -> None:
        from .io import write_json
        write_json(path, self.diagnostics)


def geometric_grid(hi: float, points: int = 512, lo: float = 1e-6) -> np.ndarray:
    if hi <= lo:
        hi = lo * 10.0
    return np.geomspace(lo, hi, points)


def analytic_report(scenario: Scenario, points: int = 512, batch: bool = True) -> AnalyticReport:
    """Aggregated CDFs on a geometric grid plus batch laws and diagnostics."""
    model = _model(scenario)
    x_hi = model.exact_quantile(0.9999)
    grid = geometric_grid(x_hi, points)
    cp = model.cdf(grid, AggregateMode.PAPER_PRODUCT)
    ce = model.cdf(grid, AggregateMode.EXACT_MIN)
    m1, m2, m3 = model.exact_moments()
    neg = [negative_mass(m) for m in model.mixtures]
    diag = {
        "negative_mass": max(neg),
        "negative_mass_per_class": {c.label: v for c, v in zip(scenario.classes, neg)},
        "excess_limit_per_class": {c.label: e.limit for c, e in zip(scenario.classes, model.excess)},
        "max_cdf_value": float(np.max(cp)),
        "cdf_valid": bool(np.max(cp) <= 1.0 + 1e-9),
        "shift_terms_per_class": {c.label: len(m) for c, m in zip(scenario.classes, model.mixtures)},
        "breakpoints_thinned": bool(model.breakpoints_thinned),
        "exact_mean": m1,
        "exact_m2": m2,
        "exact_m3": m3,
        "exact_cv": math.sqrt(max(m2 - m1 * m1, 0.0)) / m1,
        "total_rate": scenario.total_rate,
    }
    be = bp = None
    if batch:
        be = batch_pmf(scenario, AggregateMode.EXACT_MIN)
        bp = batch_pmf(scenario, AggregateMode.PAPER_PRODUCT)
        diag["sum_pi_paper"] = bp.sum_pi
        diag["log10_sum_pi_paper"] = bp.log_sum_pi / math.log(10.0)
        diag["sum_pi_exact"] = be.sum_pi
        if len(scenario.classes) == 1:
            # n * lam^(n-1) * (int F_e (1 - F'))^(n-1) = n * P^(n-1)
            n = scenario.n
            P = math.exp(bp.log_per_user[0] / (n - 1)) if n > 1 else 1.0
            diag["homogeneous_identity"] = n * P ** (n - 1) if n > 1 else 1.0
    return AnalyticReport(scenario.name, grid, cp, ce, be, bp, diag)
