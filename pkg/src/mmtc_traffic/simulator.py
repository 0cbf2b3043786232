"""Monte-Carlo generator of per-user uplink arrivals and their superposition.

Each generation instant t of a user produces one arrival at

    t' = t + N * Theta / U + d / c,   U = K * R / n,

with the batch size N and the per-block rate R drawn afresh per
generation.  Generation epochs are renewal epochs of the class law,
starting from t = 0 (synchronized) or from the equilibrium residual
(``start="stationary"``).

Random streams are keyed by (seed, run, class, purpose) through
``SeedSequence.spawn_key``, so results do not depend on evaluation order
or thread count, and classes that share a law and batch pmf see the same
generation epochs and batch sizes (common random numbers).
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidParameterError
from .scenario import CellConfig, Scenario, UserClass
from .stats import Moments, raw_moments

__all__ = [
    "SimConfig",
    "ArrivalStream",
    "RunStats",
    "SimResult",
    "simulate_user",
    "simulate_class",
    "merge_streams",
    "simulate_run",
    "run_scenario",
    "default_horizon",
    "user_distances",
    "thread_count",
]

_GEN, _PACKETS, _RATES, _DIST, _START = range(5)
STARTS = ("synchronized", "stationary")


def thread_count() -> int:
    """Worker threads from ``MMTC_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("MMTC_THREADS", "1")))
    except ValueError:
        return 1


def default_horizon(scenario: Scenario) -> float:
    """About 10^3 merged arrivals per run and at least 10 mean generations of the slowest class."""
    lam_min = min(c.traffic_rate for c in scenario.classes)
    return max(1e3 / scenario.total_rate, 10.0 / lam_min)


@dataclass(frozen=True)
class SimConfig:
    runs: int = 100
    horizon: float | None = None    # seconds; None means default_horizon
    seed: int = 0
    warmup: float = 0.0
    start: str = "synchronized"
    keep_gaps: bool = False         # retain merged gaps of every run
    keep_user_gaps: int = 0         # users per class whose own gaps are retained

    def __post_init__(self):
        if self.runs < 1:
            raise InvalidParameterError("runs must be >= 1")
        if self.warmup < 0:
            raise InvalidParameterError("warmup must be >= 0")
        if self.horizon is not None and not self.horizon > self.warmup:
            raise InvalidParameterError("horizon must exceed warmup")
        if self.start not in STARTS:
            raise InvalidParameterError(f"start must be one of {STARTS}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")

    def resolved_horizon(self, scenario: Scenario) -> float:
        h = default_horizon(scenario) if self.horizon is None else float(self.horizon)
        if not h > self.warmup:
            raise InvalidParameterError("horizon must exceed warmup")
        return h


@dataclass
class ArrivalStream:
    """Arrival epochs (nondecreasing), batch sizes, user ids and per-user sequence numbers."""

    epochs: np.ndarray
    sizes: np.ndarray
    users: np.ndarray
    seq: np.ndarray | None = None

    def __post_init__(self):
        self.epochs = np.asarray(self.epochs, dtype=float)
        self.sizes = np.asarray(self.sizes, dtype=np.int64)
        self.users = np.asarray(self.users, dtype=np.int64)
        if self.seq is None:
            self.seq = np.zeros(self.epochs.size, dtype=np.int64)
        if not (self.epochs.size == self.sizes.size == self.users.size == self.seq.size):
            raise ValueError("arrival stream fields differ in length")

    def __len__(self) -> int:
        return self.epochs.size

    @classmethod
    def empty(cls) -> "ArrivalStream":
        z = np.empty(0)
        return cls(z, z.astype(np.int64), z.astype(np.int64), z.astype(np.int64))

    def gaps(self) -> np.ndarray:
        return np.diff(self.epochs)

    def user_gaps(self, user: int) -> np.ndarray:
        """Gaps between one user's consecutive arrivals, in generation order."""
        m = self.users == user
        order = np.argsort(self.seq[m], kind="stable")
        return np.diff(self.epochs[m][order])


def _renewal_epochs(law, pop: int, horizon: float, rng: np.random.Generator,
                    start: str, rng_start: np.random.Generator) -> list[np.ndarray]:
    """Generation epochs of ``pop`` users as a (pop, k) matrix.

    Columns are drawn in blocks until every user's last epoch passes the
    horizon; callers mask entries beyond it.
    """
    mean = law.mean
    block = max(4, int(np.ceil(1.25 * horizon / mean)) + 4)
    if start == "stationary":
        first = np.asarray(law.sample_residual(rng_start, pop), dtype=float).reshape(pop)
        cols = [first[:, None]]
        last = first.copy()
    else:
        cols = []
        last = np.zeros(pop)
    while np.any(last <= horizon):
        inc = np.asarray(law.sample(rng, (pop, block)), dtype=float)
        blk = last[:, None] + np.cumsum(inc, axis=1)
        cols.append(blk)
        last = blk[:, -1]
        block = max(4, block // 2)
    return np.concatenate(cols, axis=1) if cols else np.empty((pop, 0))


def user_distances(scenario: Scenario, seed: int) -> list[np.ndarray]:
    """Per-user distances (km), fixed for a given seed and independent of the run."""
    out = []
    for ci, c in enumerate(scenario.classes):
        rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(ci, _DIST)))
        out.append(np.asarray(c.distance.sample(rng, c.population), dtype=float))
    return out


def simulate_class(user_class: UserClass, cell: CellConfig, n: int, horizon: float,
                   rng_gen: np.random.Generator, rng_packets: np.random.Generator,
                   rng_rates: np.random.Generator, distances: np.ndarray,
                   start: str = "synchronized", rng_start: np.random.Generator | None = None,
                   user_offset: int = 0) -> ArrivalStream:
    """Arrivals of every user of one class in (0, horizon], unsorted across users."""
    pop = int(distances.size)
    if horizon <= 0 or pop == 0:
        return ArrivalStream.empty()
    law = user_class.law
    t = _renewal_epochs(law, pop, horizon, rng_gen, start, rng_start or rng_gen)
    users, seq = np.nonzero(t <= horizon)
    gen = t[users, seq]
    k = gen.size
    sizes = user_class.packets.inverse_cdf(rng_packets.random(k))
    rates = user_class.rates.inverse_cdf(rng_rates.random(k))
    u_rate = cell.total_blocks * rates / n
    arr = gen + sizes * cell.packet_size_kbits / u_rate + distances[users] / cell.signal_speed_km_s
    keep = arr <= horizon
    return ArrivalStream(arr[keep], sizes[keep], users[keep] + user_offset, seq[keep])


def simulate_user(user_class: UserClass, user_index: int, cell: CellConfig, n: int,
                  horizon: float, stream: np.random.Generator, distance_km: float | None = None,
                  start: str = "synchronized") -> ArrivalStream:
    """One user's arrival stream; every draw comes from ``stream``.

    The distance is drawn from the class law unless ``distance_km`` is given.
    """
    if horizon <= 0:
        return ArrivalStream.empty()
    if distance_km is None:
        d = np.asarray(user_class.distance.sample(stream, 1), dtype=float).reshape(1)
    else:
        d = np.array([float(distance_km)])
    s = simulate_class(user_class, cell, n, horizon, stream, stream, stream, d, start, stream,
                       user_offset=user_index)
    order = np.argsort(s.epochs, kind="stable")
    return ArrivalStream(s.epochs[order], s.sizes[order], s.users[order], s.seq[order])


def merge_streams(streams: Sequence[ArrivalStream]) -> ArrivalStream:
    """Global sort by epoch; ties go to the lower user id, then the earlier generation."""
    streams = [s for s in streams if len(s)]
    if not streams:
        return ArrivalStream.empty()
    ep = np.concatenate([s.epochs for s in streams])
    sz = np.concatenate([s.sizes for s in streams])
    us = np.concatenate([s.users for s in streams])
    sq = np.concatenate([s.seq for s in streams])
    order = np.lexsort((sq, us, ep))
    return ArrivalStream(ep[order], sz[order], us[order], sq[order])


@dataclass
class RunStats:
    """Statistics of one run (or the across-run average when ``run == -1``)."""

    run: int
    mean: float
    m2: float
    m3: float
    cv: float
    arrivals: int
    rate: float                         # arrivals / (horizon - warmup)
    batch_hist: dict[int, int] = field(default_factory=dict)
    gaps: np.ndarray | None = None

    @property
    def moments(self) -> Moments:
        return Moments(self.mean, self.m2, self.m3, self.cv)

    def batch_pmf(self) -> dict[int, float]:
        tot = sum(self.batch_hist.values())
        return {k: v / tot for k, v in sorted(self.batch_hist.items())} if tot else {}


@dataclass
class SimResult:
    scenario: str
    config: SimConfig
    horizon: float
    runs: list[RunStats]
    aggregate: RunStats
    user_gaps: dict[int, np.ndarray] = field(default_factory=dict)   # class index -> gaps

    def pooled_gaps(self) -> np.ndarray:
        parts = [r.gaps for r in self.runs if r.gaps is not None]
        return np.concatenate(parts) if parts else np.empty(0)

    def write_csv(self, path: str | Path) -> None:
        """One row per run plus the aggregate row (run = "mean")."""
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["run", "E_X", "E_X2", "E_X3", "c_V", "arrivals", "arrival_rate"])
            for r in self.runs + [self.aggregate]:
                label = "mean" if r.run < 0 else r.run
                w.writerow([label, repr(r.mean), repr(r.m2), repr(r.m3), repr(r.cv),
                            r.arrivals if r.run >= 0 else repr(float(r.arrivals)), repr(r.rate)])

    def write_gaps_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["gap_seconds"])
            for v in self.pooled_gaps().tolist():
                w.writerow([repr(v)])


def _streams(seed: int, run: int, ci: int):
    mk = lambda p: np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(run, ci, p)))
    return mk(_GEN), mk(_PACKETS), mk(_RATES), mk(_START)


def simulate_run(scenario: Scenario, horizon: float, seed: int, run: int,
                 distances: list[np.ndarray] | None = None,
                 start: str = "synchronized") -> ArrivalStream:
    """Merged arrival stream of one run."""
    if distances is None:
        distances = user_distances(scenario, seed)
    n = scenario.n
    parts = []
    offset = 0
    for ci, c in enumerate(scenario.classes):
        g, p, r, s0 = _streams(seed, run, ci)
        parts.append(simulate_class(c, scenario.cell, n, horizon, g, p, r, distances[ci],
                                    start, s0, user_offset=offset))
        offset += c.population
    return merge_streams(parts)


def _one_run(scenario, cfg: SimConfig, horizon, distances, run):
    stream = simulate_run(scenario, horizon, cfg.seed, run, distances, cfg.start)
    m = stream.epochs > cfg.warmup
    ep = stream.epochs[m]
    if ep.size < 2:
        raise InsufficientDataError(
            f"run {run}: {ep.size} arrival(s) after warmup; increase the horizon")
    gaps = np.diff(ep)
    mo = raw_moments(gaps)
    vals, cnt = np.unique(stream.sizes[m], return_counts=True)
    stats = RunStats(run, mo.mean, mo.m2, mo.m3, mo.cv, int(ep.size),
                     ep.size / (horizon - cfg.warmup),
                     {int(v): int(c) for v, c in zip(vals, cnt)},
                     gaps if cfg.keep_gaps else None)
    ug = {}
    if cfg.keep_user_gaps:
        first = 0
        for ci, c in enumerate(scenario.classes):
            sel = []
            for u in range(first, first + min(cfg.keep_user_gaps, c.population)):
                sel.append(stream.user_gaps(u))
            ug[ci] = np.concatenate(sel) if sel else np.empty(0)
            first += c.population
    return stats, ug


def run_scenario(scenario: Scenario, sim: SimConfig) -> SimResult:
    """Simulate ``sim.runs`` independent runs and average their statistics."""
    horizon = sim.resolved_horizon(scenario)
    distances = user_distances(scenario, sim.seed)
    work = lambda r: _one_run(scenario, sim, horizon, distances, r)
    nthreads = min(thread_count(), sim.runs)
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            results = list(ex.map(work, range(sim.runs)))
    else:
        results = [work(r) for r in range(sim.runs)]
    runs = [r for r, _ in results]
    hist: dict[int, int] = {}
    for r in runs:
        for k, v in r.batch_hist.items():
            hist[k] = hist.get(k, 0) + v
    arr = np.array([[r.mean, r.m2, r.m3, r.cv, r.arrivals, r.rate] for r in runs])
    avg = arr.mean(axis=0)
    agg = RunStats(-1, float(avg[0]), float(avg[1]), float(avg[2]), float(avg[3]),
                   float(avg[4]), float(avg[5]), dict(sorted(hist.items())))
    user_gaps: dict[int, np.ndarray] = {}
    if sim.keep_user_gaps:
        for ci in range(len(scenario.classes)):
            user_gaps[ci] = np.concatenate([ug[ci] for _, ug in results])
    return SimResult(scenario.name, sim, horizon, runs, agg, user_gaps)
