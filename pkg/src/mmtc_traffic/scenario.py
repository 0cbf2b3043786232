"""Cell and user-population data model.

Units: time in seconds, rates in kbps, packet size in kbits, distances in km.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .distributions import Distribution, DistributionSpec, make_distribution
from .errors import InvalidParameterError

__all__ = [
    "CellConfig",
    "RatePmf",
    "PacketPmf",
    "FixedDistance",
    "UniformDistance",
    "UserClass",
    "Scenario",
    "ShiftMixture",
    "Finding",
    "validate_scenario",
    "equal_share_rate",
    "propagation_delay",
    "shift_set",
    "load_rate_table",
    "rate_pmf_from_table",
    "write_rate_table",
    "SHIFT_MERGE_TOL",
]

SHIFT_MERGE_TOL = 1e-12
_NORM_TOL = 1e-9


@dataclass(frozen=True)
class CellConfig:
    total_blocks: int = 275
    packet_size_kbits: float = 5.0
    frame_duration: float = 0.010
    signal_speed_km_s: float = 3.0e5

    @property
    def K(self) -> int:
        return self.total_blocks

    @property
    def theta(self) -> float:
        return self.packet_size_kbits


@dataclass(frozen=True)
class RatePmf:
    """Per-block rate law: strictly increasing levels with probabilities."""

    rates: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Levels with positive probability."""
        r = np.asarray(self.rates)
        p = np.asarray(self.probs)
        keep = p > 0
        return r[keep], p[keep]

    def inverse_cdf(self, u: np.ndarray) -> np.ndarray:
        r, p = self.support()
        cum = np.cumsum(p)
        cum[-1] = 1.0
        return r[np.minimum(np.searchsorted(cum, u, side="right"), len(r) - 1)]


@dataclass(frozen=True)
class PacketPmf:
    """Batch-size law over positive packet counts."""

    values: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    @classmethod
    def uniform(cls, lo: int, hi: int) -> "PacketPmf":
        """Uniform on the integers lo..hi inclusive."""
        vals = tuple(range(int(lo), int(hi) + 1))
        return cls(vals, tuple(1.0 / len(vals) for _ in vals))

    @classmethod
    def fixed(cls, k: int) -> "PacketPmf":
        return cls((int(k),), (1.0,))

    @property
    def n_max(self) -> int:
        return max(self.values)

    def as_dict(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for v, p in zip(self.values, self.probs):
            out[v] = out.get(v, 0.0) + p
        return out

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs)
        keep = p > 0
        return v[keep], p[keep]

    def inverse_cdf(self, u: np.ndarray) -> np.ndarray:
        v, p = self.support()
        cum = np.cumsum(p)
        cum[-1] = 1.0
        return v[np.minimum(np.searchsorted(cum, u, side="right"), len(v) - 1)].astype(np.int64)

    @property
    def mean(self) -> float:
        v, p = self.support()
        return float(v @ p / p.sum())


@dataclass(frozen=True)
class FixedDistance:
    km: float

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, float(self.km))

    def bounds(self) -> tuple[float, float]:
        return self.km, self.km


@dataclass(frozen=True)
class UniformDistance:
    d_min: float
    d_max: float

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.d_min, self.d_max, size)

    def bounds(self) -> tuple[float, float]:
        return self.d_min, self.d_max


@dataclass(frozen=True)
class UserClass:
    """A homogeneous population of mMTC devices."""

    label: str
    population: int
    inter_gen: DistributionSpec
    traffic_rate: float
    packets: PacketPmf
    rates: RatePmf
    distance: FixedDistance | UniformDistance = FixedDistance(0.0)

    @cached_property
    def law(self) -> Distribution:
        return make_distribution(self.inter_gen)

    @classmethod
    def build(cls, label, population, inter_gen: DistributionSpec | Distribution,
              packets, rates, distance=FixedDistance(0.0), traffic_rate=None) -> "UserClass":
        """Construct a class, deriving ``traffic_rate`` from the law's mean if omitted."""
        if isinstance(inter_gen, Distribution):
            inter_gen = inter_gen.to_spec()
        if traffic_rate is None:
            traffic_rate = 1.0 / make_distribution(inter_gen).mean
        return cls(label, int(population), inter_gen, float(traffic_rate), packets, rates, distance)

    def with_population(self, population: int) -> "UserClass":
        return UserClass(self.label, int(population), self.inter_gen, self.traffic_rate,
                         self.packets, self.rates, self.distance)


@dataclass(frozen=True)
class Scenario:
    cell: CellConfig
    classes: tuple[UserClass, ...]
    name: str = "scenario"

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def n(self) -> int:
        return sum(c.population for c in self.classes)

    @property
    def total_rate(self) -> float:
        return sum(c.population * c.traffic_rate for c in self.classes)

    def class_of_user(self, user: int) -> int:
        """Index of the class containing population-expanded user ``user``."""
        edges = np.cumsum([c.population for c in self.classes])
        if not 0 <= user < edges[-1]:
            raise IndexError(f"user index {user} outside 0..{edges[-1] - 1}")
        return int(np.searchsorted(edges, user, side="right"))


@dataclass(frozen=True)
class ShiftMixture:
    """Single-user inter-arrival law: weighted shifted copies of ``base``.

    ``shifts`` are sorted ascending and symmetric about zero with matched
    weights.
    """

    base: Distribution
    shifts: np.ndarray
    weights: np.ndarray

    @cached_property
    def evaluator(self):
        return self.base.shift_evaluator(self.shifts, self.weights)

    @property
    def terms(self) -> list[tuple[float, float]]:
        return list(zip(self.shifts.tolist(), self.weights.tolist()))

    def __len__(self) -> int:
        return len(self.shifts)

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other


@dataclass(frozen=True)
class Finding:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


def equal_share_rate(cell: CellConfig, n: int, r: float) -> float:
    """Per-user data rate K*r/n under equal sharing of the blocks."""
    return cell.total_blocks * r / n


def propagation_delay(d: float, c: float = 3.0e5) -> float:
    return d / c


def _merge_sorted(shifts: np.ndarray, weights: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(shifts, kind="stable")
    s, w = shifts[order], weights[order]
    if s.size == 0:
        return s, w
    new_group = np.concatenate(([True], np.diff(s) > tol))
    gid = np.cumsum(new_group) - 1
    wsum = np.bincount(gid, weights=w)
    ssum = np.bincount(gid, weights=w * s)
    return ssum / wsum, wsum


def shift_set(user_class: UserClass, cell: CellConfig, n: int,
              tol: float = SHIFT_MERGE_TOL) -> ShiftMixture:
    """Enumerate (n*Theta/K) * (k/r_i - l/r_j) over all (i, k, j, l).

    Weights are p_N(k) p_R(r_i) p_N(l) p_R(r_j); shifts closer than ``tol``
    seconds are merged.  The result is made exactly symmetric by mirroring
    the positive half.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    r, pr = user_class.rates.support()
    k, pk = user_class.packets.support()
    ratio = (k[:, None] / r[None, :]).ravel()
    pw = (pk[:, None] * pr[None, :]).ravel()
    ratio, pw = _merge_sorted(ratio, pw, 0.0)
    const = n * cell.packet_size_kbits / cell.total_blocks
    diffs = (ratio[:, None] - ratio[None, :]).ravel() * const
    w = (pw[:, None] * pw[None, :]).ravel()
    s, w = _merge_sorted(diffs, w, tol)
    # enforce exact symmetry: keep the positive half and the zero group, mirror
    pos = s > tol / 2
    zero = np.abs(s) <= tol / 2
    sp, wp = s[pos], w[pos]
    w0 = w[zero].sum()
    parts_s = [-sp[::-1]]
    parts_w = [wp[::-1]]
    if w0 > 0:
        parts_s.append(np.zeros(1))
        parts_w.append(np.array([w0]))
    parts_s.append(sp)
    parts_w.append(wp)
    shifts = np.concatenate(parts_s)
    weights = np.concatenate(parts_w)
    keep = weights > 0
    return ShiftMixture(user_class.law, shifts[keep], weights[keep])


def validate_scenario(s: Scenario) -> list[Finding]:
    """Check every invariant; an empty list means the scenario is valid."""
    out: list[Finding] = []
    c = s.cell
    if not (isinstance(c.total_blocks, (int, np.integer)) and c.total_blocks >= 1):
        out.append(Finding("cell.K", "total_blocks must be an integer >= 1"))
    if not c.packet_size_kbits > 0:
        out.append(Finding("cell.theta_kbits", "packet size must be > 0"))
    if not c.frame_duration > 0:
        out.append(Finding("cell.frame_s", "frame duration must be > 0"))
    if not c.signal_speed_km_s > 0:
        out.append(Finding("cell.c_km_s", "signal speed must be > 0"))
    if not s.classes:
        out.append(Finding("classes", "scenario has no user classes (n must be >= 1)"))
    for i, uc in enumerate(s.classes):
        pre = f"classes[{i}]({uc.label})"
        if uc.population < 1:
            out.append(Finding(f"{pre}.population", "population must be >= 1"))
        law = None
        try:
            law = make_distribution(uc.inter_gen)
        except InvalidParameterError as exc:
            out.append(Finding(f"{pre}.inter_gen", str(exc)))
        if not uc.traffic_rate > 0:
            out.append(Finding(f"{pre}.lambda", "traffic rate must be > 0"))
        elif law is not None and abs(uc.traffic_rate * law.mean - 1.0) > 1e-6:
            out.append(Finding(f"{pre}.lambda",
                               f"rate/mean mismatch: lambda*mean = {uc.traffic_rate * law.mean:.9g} != 1"))
        rp = uc.rates
        if len(rp.rates) != len(rp.probs) or not rp.rates:
            out.append(Finding(f"{pre}.rates", "rate levels and probabilities differ in length"))
        else:
            if np.any(np.diff(rp.rates) <= 0):
                out.append(Finding(f"{pre}.rates", "rate levels must be strictly increasing"))
            if any(r <= 0 for r in rp.rates):
                out.append(Finding(f"{pre}.rates", "rate levels must be > 0"))
            if any(p < 0 for p in rp.probs):
                out.append(Finding(f"{pre}.rates", "rate probabilities must be >= 0"))
            if abs(sum(rp.probs) - 1.0) > _NORM_TOL:
                out.append(Finding(f"{pre}.rates", f"rate pmf not normalized (sum={sum(rp.probs):.12g})"))
        pp = uc.packets
        if len(pp.values) != len(pp.probs) or not pp.values:
            out.append(Finding(f"{pre}.packets", "packet values and probabilities differ in length"))
        else:
            if any(v < 1 for v in pp.values):
                out.append(Finding(f"{pre}.packets", "packet counts must be >= 1"))
            if any(p < 0 for p in pp.probs):
                out.append(Finding(f"{pre}.packets", "packet probabilities must be >= 0"))
            if abs(sum(pp.probs) - 1.0) > _NORM_TOL:
                out.append(Finding(f"{pre}.packets", f"packet pmf not normalized (sum={sum(pp.probs):.12g})"))
        lo, hi = uc.distance.bounds()
        if isinstance(uc.distance, UniformDistance):
            if not (0 < lo < hi):
                out.append(Finding(f"{pre}.distance", "distance range must satisfy 0 < d_min < d_max"))
        elif lo < 0:
            out.append(Finding(f"{pre}.distance", "distance must be >= 0"))
    return out


def load_rate_table(path: str | Path) -> tuple[tuple[float, ...], list[tuple[float, ...]]]:
    """Read a rate table: header row of kbps levels, one pmf row per user type.

    A leading label column (non-numeric header cell) is tolerated and skipped.
    """
    with Path(path).open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise InvalidParameterError(f"{path}: need a header of rate levels and at least one pmf row")

    def _is_num(cell):
        try:
            float(cell)
            return True
        except ValueError:
            return False

    skip = 0 if _is_num(rows[0][0]) else 1
    levels = tuple(float(c) for c in rows[0][skip:])
    pmfs = [tuple(float(c) for c in r[skip:]) for r in rows[1:]]
    for i, p in enumerate(pmfs):
        if len(p) != len(levels):
            raise InvalidParameterError(f"{path}: row {i + 1} has {len(p)} entries, expected {len(levels)}")
    return levels, pmfs


def write_rate_table(path: str | Path, levels: Sequence[float], pmfs: Sequence[Sequence[float]]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["R_kbps", *[repr(float(v)) for v in levels]])
        for i, p in enumerate(pmfs, 1):
            w.writerow([f"type{i}", *[repr(float(v)) for v in p]])


def rate_pmf_from_table(path: str | Path, row: int) -> RatePmf:
    """Rate pmf of 1-based user type ``row`` from a rate-table CSV."""
    levels, pmfs = load_rate_table(path)
    if not 1 <= row <= len(pmfs):
        raise InvalidParameterError(f"{path}: user type {row} not in 1..{len(pmfs)}")
    return RatePmf(levels, pmfs[row - 1])
