"""Reference scenarios: per-block rate table, homogeneous channel studies,
the heterogeneous six-type cell, and the trace-driven check.

Uniform inter-generation laws with rate lam are taken as U(0.5/lam, 1.5/lam)
throughout (mean 1/lam); batch-size ranges "(lo, hi)" are uniform on the
integers lo..hi inclusive.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .distributions import DistributionSpec, Empirical, load_empirical_csv
from .errors import InvalidParameterError, MissingInputError
from .scenario import (CellConfig, PacketPmf, RatePmf, Scenario, UniformDistance, UserClass)

__all__ = [
    "RATE_LEVELS_KBPS",
    "RATE_TABLE",
    "rate_pmf",
    "uniform_spec",
    "bounded_pareto_spec",
    "BOUNDED_PARETO_PARAMS",
    "TABLE4_TYPES",
    "PresetCase",
    "table2_cases",
    "table3_cases",
    "table4_scenario",
    "fig7_scenario",
    "FIG7_DEVICES",
    "fig7_required_files",
    "PRESETS",
    "DEFAULT_DISTANCE",
]

RATE_LEVELS_KBPS = (48.0, 73.6, 121.8, 192.2, 282.0, 378.0, 474.2, 712.0, 772.2, 874.8,
                    1063.8, 1249.6, 1448.4, 1640.6, 1778.4)

RATE_TABLE = (
    (0, 0, 0, 0, 0, 0, 0.01, 0.05, 0.11, 0.13, 0.14, 0.18, 0.06, 0.11, 0.21),
    (0, 0, 0, 0, 0, 0.01, 0.02, 0.06, 0.13, 0.14, 0.2, 0.21, 0.07, 0.09, 0.07),
    (0.01, 0, 0, 0, 0, 0.01, 0.01, 0.02, 0.06, 0.13, 0.17, 0.18, 0.08, 0.18, 0.15),
    (0, 0, 0, 0, 0, 0.02, 0.03, 0.13, 0.06, 0.2, 0.32, 0.11, 0.01, 0.09, 0.03),
    (0, 0, 0, 0, 0, 0, 0.04, 0.07, 0.13, 0.17, 0.22, 0.2, 0.05, 0.06, 0.06),
    (0, 0, 0, 0, 0.01, 0.03, 0.11, 0.12, 0.19, 0.15, 0.15, 0.12, 0.05, 0.04, 0.03),
)

DEFAULT_DISTANCE = UniformDistance(0.1, 3.0)

# (alpha, L, H) per nominal generation rate
BOUNDED_PARETO_PARAMS = {
    0.01: (1.95, 48.75, 10000.0),
    0.05: (1.95, 9.81, 2000.0),
    0.1: (1.95, 4.905, 1000.0),
}

# label, lam, N range, family, population
TABLE4_TYPES = (
    ("type1", 0.01, (10, 20), "uniform", 250),
    ("type2", 0.02, (10, 15), "deterministic", 250),
    ("type3", 0.03, (10, 25), "exponential", 250),
    ("type4", 0.011, (10, 20), "deterministic", 250),
    ("type5", 0.019, (10, 15), "exponential", 250),
    ("type6", 0.015, (10, 15), "uniform", 250),
)

FIG7_DEVICES = 21
FIG7_PACKETS = 30


def rate_pmf(user_type: int) -> RatePmf:
    """Per-block rate pmf of user type 1..6."""
    if not 1 <= user_type <= len(RATE_TABLE):
        raise InvalidParameterError(f"user type must be in 1..{len(RATE_TABLE)}")
    return RatePmf(RATE_LEVELS_KBPS, RATE_TABLE[user_type - 1])


def uniform_spec(lam: float) -> DistributionSpec:
    return DistributionSpec.of("uniform", a=0.5 / lam, b=1.5 / lam)


def bounded_pareto_spec(lam: float) -> DistributionSpec:
    al, lo, hi = BOUNDED_PARETO_PARAMS[lam]
    return DistributionSpec.of("bounded_pareto", shape=al, lower=lo, upper=hi)


def _family_spec(family: str, lam: float) -> DistributionSpec:
    if family == "uniform":
        return uniform_spec(lam)
    if family == "deterministic":
        return DistributionSpec.of("deterministic", period=1.0 / lam)
    if family == "exponential":
        return DistributionSpec.of("exponential", rate=lam)
    raise InvalidParameterError(f"no preset law for family {family!r}")


@dataclass(frozen=True)
class PresetCase:
    """One scenario of a preset plus the labels that group its report rows."""

    group: str        # e.g. "lam=0.01"
    row: str          # e.g. "type1"
    scenario: Scenario


def _homogeneous(label, spec, user_type, n, packets, cell, name):
    uc = UserClass.build(label, n, spec, packets, rate_pmf(user_type), DEFAULT_DISTANCE)
    return Scenario(cell, (uc,), name=name)


def table2_cases(n: int = 1500, lams=(0.01, 0.05, 0.1), types=(1, 3, 5),
                 cell: CellConfig = CellConfig()) -> list[PresetCase]:
    """Homogeneous uniform-law cells, one per (rate, user type)."""
    out = []
    for lam in lams:
        for t in types:
            name = f"table2_lam{lam:g}_type{t}"
            out.append(PresetCase(f"lam={lam:g}", f"type{t}",
                                  _homogeneous(f"type{t}", uniform_spec(lam), t, n,
                                               PacketPmf.uniform(10, 20), cell, name)))
    return out


def table3_cases(n: int = 1500, lams=(0.01, 0.05, 0.1), types=(2, 4, 6),
                 cell: CellConfig = CellConfig()) -> list[PresetCase]:
    """Homogeneous bounded-Pareto cells; the class rate is 1/mean of the law."""
    out = []
    for lam in lams:
        for t in types:
            name = f"table3_lam{lam:g}_type{t}"
            out.append(PresetCase(f"lam={lam:g}", f"type{t}",
                                  _homogeneous(f"type{t}", bounded_pareto_spec(lam), t, n,
                                               PacketPmf.uniform(10, 20), cell, name)))
    return out


def table4_scenario(rate_scale: float = 1.0, population: int | None = None,
                    distance: UniformDistance = DEFAULT_DISTANCE,
                    cell: CellConfig = CellConfig(), name: str = "table4") -> Scenario:
    """Six heterogeneous classes; user type i uses rate-table row i."""
    if not rate_scale > 0:
        raise InvalidParameterError("rate scale must be > 0")
    classes = []
    for i, (label, lam, (lo, hi), fam, pop) in enumerate(TABLE4_TYPES, 1):
        lam_s = lam * rate_scale
        classes.append(UserClass.build(label, population or pop, _family_spec(fam, lam_s),
                                       PacketPmf.uniform(lo, hi), rate_pmf(i), distance))
    return Scenario(cell, tuple(classes), name=name)


def fig7_required_files(trace_dir: str | Path) -> list[Path]:
    d = Path(trace_dir)
    return [d / f"device_{i:02d}.csv" for i in range(1, FIG7_DEVICES + 1)]


def fig7_scenario(trace_dir: str | Path, seed: int = 0,
                  cell: CellConfig = CellConfig()) -> Scenario:
    """One single-user class per trace device, empirical law, 30 packets per batch.

    Each device gets a user type (rate-table row) drawn with ``seed``.
    """
    files = fig7_required_files(trace_dir)
    missing = [f for f in files if not f.is_file()]
    if missing:
        raise MissingInputError(missing)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(7,)))
    types = rng.integers(1, len(RATE_TABLE) + 1, size=len(files))
    classes = []
    for f, t in zip(files, types):
        law = Empirical(load_empirical_csv(f))
        classes.append(UserClass.build(f.stem, 1, law, PacketPmf.fixed(FIG7_PACKETS),
                                       rate_pmf(int(t)), DEFAULT_DISTANCE))
    return Scenario(cell, tuple(classes), name="fig7")


PRESETS: dict[str, Callable[..., object]] = {
    "table2": table2_cases,
    "table3": table3_cases,
    "table4": table4_scenario,
    "fig7": fig7_scenario,
}
