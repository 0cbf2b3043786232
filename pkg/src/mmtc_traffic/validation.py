"""Analytic-versus-simulated comparison, preset runs and parameter sweeps."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analytic import AggregateMode, AnalyticReport, _model, analytic_report, arrival_batch_pmf
from .distributions import DistributionSpec
from .errors import InvalidParameterError
from .io import write_json, write_rows
from .presets import fig7_scenario, table2_cases, table3_cases, table4_scenario
from .scenario import Scenario, UniformDistance, UserClass
from .simulator import SimConfig, SimResult, run_scenario, thread_count
from .stats import ks_distance, tv_distance

__all__ = [
    "ComparisonReport",
    "compare",
    "PresetResult",
    "run_preset",
    "SweepSpec",
    "SweepResult",
    "run_sweep",
    "rescale_rates",
    "TABLE2_REFERENCE",
    "TABLE3_REFERENCE",
    "PRESET_NAMES",
]

PRESET_NAMES = ("table2", "table3", "table4", "fig7")

# published (E[X], E[X^2], E[X^3], c_V) per nominal rate, first user type
TABLE2_REFERENCE = {0.01: (0.068, 0.037, 2.95, 2.59),
                    0.05: (0.0136, 0.0015, 0.0236, 2.59),
                    0.1: (0.0068, 3.72e-4, 0.003, 2.59)}
TABLE3_REFERENCE = {0.01: (0.0697, 0.156, 253.45, 4.83),
                    0.05: (0.014, 0.0063, 2.02, 4.83),
                    0.1: (0.007, 0.0016, 0.25, 4.83)}

KS_POINTS = 5000


def _cv_se(sim: SimResult) -> float:
    cvs = np.array([r.cv for r in sim.runs])
    return float(cvs.std(ddof=1) / math.sqrt(cvs.size)) if cvs.size > 1 else float("nan")


@dataclass
class ComparisonReport:
    scenario_id: str
    analytic: AnalyticReport
    sim: SimResult
    ks_paper: float
    ks_exact: float
    ks_stationary: float
    tv_exact: float | None
    tv_paper: float | None
    tv_stationary: float | None
    moments: dict
    diagnostics: dict
    deviations: list[str] = field(default_factory=list)

    @property
    def matching_mode(self) -> str:
        """Aggregation mode with the smaller KS distance to the simulated gaps."""
        return "exact" if self.ks_exact <= self.ks_paper else "paper"

    def summary(self) -> dict:
        return {
            "scenario": self.scenario_id,
            **self.moments,
            "ks_exact": self.ks_exact,
            "ks_paper": self.ks_paper,
            "ks_stationary": self.ks_stationary,
            "matching_mode": self.matching_mode,
            "tv_batch_exact": self.tv_exact,
            "tv_batch_paper": self.tv_paper,
            "tv_batch_stationary": self.tv_stationary,
        }

    def diagnostics_block(self) -> dict:
        d = dict(self.diagnostics)
        d["matching_mode"] = self.matching_mode
        d["ks_exact"] = self.ks_exact
        d["ks_paper"] = self.ks_paper
        d["ks_stationary"] = self.ks_stationary
        d["deviations"] = list(self.deviations)
        return d

    def write(self, out_dir: str | Path, prefix: str | None = None) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        p = prefix or self.scenario_id
        files = {
            "cdf": out / f"{p}_cdf.csv",
            "ecdf": out / f"{p}_ecdf.csv",
            "runs": out / f"{p}_runs.csv",
            "summary": out / f"{p}_summary.csv",
            "diag": out / f"{p}_diagnostics.json",
        }
        self.analytic.write_csv(files["cdf"])
        grid = self.analytic.grid
        ecdf = self._ecdf_on(grid)
        stat = _model(self.sim_scenario).palm_cdf(grid) if self.sim_scenario is not None else grid * np.nan
        write_rows(files["ecdf"], ["x_seconds", "ecdf_sim", "cdf_stationary"],
                   zip(grid.tolist(), ecdf.tolist(), np.asarray(stat).tolist()))
        self.sim.write_csv(files["runs"])
        s = self.summary()
        write_rows(files["summary"], list(s), [list(s.values())])
        if self.analytic.batch_exact is not None:
            files["batch"] = out / f"{p}_batch.csv"
            sim_pmf = self.sim.aggregate.batch_pmf()
            pe = self.analytic.batch_exact.pmf.as_dict()
            pp = self.analytic.batch_paper.pmf.as_dict()
            ps = arrival_batch_pmf(self.sim_scenario).as_dict() if self.sim_scenario else {}
            keys = sorted(set(pe) | set(pp) | set(sim_pmf))
            write_rows(files["batch"], ["packets", "pmf_sim", "pmf_exact", "pmf_paper", "pmf_stationary"],
                       [[k, sim_pmf.get(k, 0.0), pe.get(k, 0.0), pp.get(k, 0.0), ps.get(k, 0.0)]
                        for k in keys])
        write_json(files["diag"], self.diagnostics_block())
        return list(files.values())

    sim_scenario: Scenario | None = None
    _sorted_gaps: np.ndarray | None = None

    def _ecdf_on(self, grid: np.ndarray) -> np.ndarray:
        g = self._sorted_gaps if self._sorted_gaps is not None else np.sort(self.sim.pooled_gaps())
        if g.size == 0:
            return np.full(grid.shape, np.nan)
        return np.searchsorted(g, grid, side="right") / g.size


def compare(scenario: Scenario, sim: SimConfig, points: int = 512, batch: bool = True,
            ks_points: int | None = KS_POINTS) -> ComparisonReport:
    """Analytic report and simulation of ``scenario`` with KS/TV distances."""
    ar = analytic_report(scenario, points=points, batch=batch)
    res = run_scenario(scenario, replace(sim, keep_gaps=True))
    gaps = np.sort(res.pooled_gaps())
    model = _model(scenario)
    ks_e = ks_distance(gaps, lambda x: model.cdf(x, AggregateMode.EXACT_MIN), max_points=ks_points)
    ks_p = ks_distance(gaps, lambda x: model.cdf(x, AggregateMode.PAPER_PRODUCT), max_points=ks_points)
    ks_s = ks_distance(gaps, model.palm_cdf, max_points=ks_points)
    tv_e = tv_p = tv_s = None
    if batch:
        sim_pmf = res.aggregate.batch_pmf()
        tv_e = tv_distance(sim_pmf, ar.batch_exact.pmf.as_dict())
        tv_p = tv_distance(sim_pmf, ar.batch_paper.pmf.as_dict())
        tv_s = tv_distance(sim_pmf, arrival_batch_pmf(scenario).as_dict())
    a = res.aggregate
    mom = {
        "n": scenario.n,
        "total_rate": scenario.total_rate,
        "analytic_mean": 1.0 / scenario.total_rate,
        "exact_min_mean": ar.diagnostics["exact_mean"],
        "exact_min_cv": ar.diagnostics["exact_cv"],
        "sim_E_X": a.mean,
        "sim_E_X2": a.m2,
        "sim_E_X3": a.m3,
        "sim_c_V": a.cv,
        "sim_c_V_se": _cv_se(res),
        "sim_arrival_rate": a.rate,
        "runs": len(res.runs),
        "horizon": res.horizon,
    }
    diag = dict(ar.diagnostics)
    diag["sim_start"] = sim.start
    rep = ComparisonReport(scenario.name, ar, res, ks_p, ks_e, ks_s, tv_e, tv_p, tv_s, mom, diag)
    rep.sim_scenario = scenario
    rep._sorted_gaps = gaps
    return rep


# -- presets ----------------------------------------------------------------

@dataclass
class PresetResult:
    name: str
    reports: list[tuple[str, str, ComparisonReport]]   # (group, row, report)
    checks: dict = field(default_factory=dict)
    deviations: list[str] = field(default_factory=list)

    def groups(self) -> dict[str, list[tuple[str, ComparisonReport]]]:
        out: dict[str, list] = {}
        for g, r, rep in self.reports:
            out.setdefault(g, []).append((r, rep))
        return out

    def report(self, group: str, row: str) -> ComparisonReport:
        for g, r, rep in self.reports:
            if g == group and r == row:
                return rep
        raise KeyError((group, row))


_ROW_HEADER = ["user_type", "n", "E_X", "E_X2", "E_X3", "c_V", "c_V_se", "analytic_mean",
               "exact_min_mean", "ks_exact", "ks_paper", "ks_stationary", "matching_mode",
               "ref_E_X", "ref_c_V"]


def _row(label, rep: ComparisonReport, ref):
    m = rep.moments
    return [label, m["n"], m["sim_E_X"], m["sim_E_X2"], m["sim_E_X3"], m["sim_c_V"], m["sim_c_V_se"],
            m["analytic_mean"], m["exact_min_mean"], rep.ks_exact, rep.ks_paper, rep.ks_stationary,
            rep.matching_mode, "" if ref is None else ref[0], "" if ref is None else ref[3]]


def _channel_check(groups) -> dict:
    out = {}
    for g, rows in groups.items():
        cv = np.array([rep.moments["sim_c_V"] for _, rep in rows])
        out[g] = float((cv.max() - cv.min()) / cv.mean()) if cv.size > 1 else 0.0
    return out


def run_preset(name: str, runs: int = 100, seed: int = 0, out_dir: str | Path | None = None,
               trace_dir: str | Path | None = None, horizon: float | None = None,
               start: str = "synchronized", points: int = 512, batch: bool = True) -> PresetResult:
    """Run every case of a preset; writes per-group CSVs and a diagnostics JSON if ``out_dir``."""
    sim = SimConfig(runs=runs, seed=seed, horizon=horizon, start=start)
    refs = {}
    if name == "table2":
        cases = [(c.group, c.row, c.scenario) for c in table2_cases()]
        refs = TABLE2_REFERENCE
    elif name == "table3":
        cases = [(c.group, c.row, c.scenario) for c in table3_cases()]
        refs = TABLE3_REFERENCE
    elif name == "table4":
        cases = [("all", "mixed", table4_scenario())]
    elif name == "fig7":
        if trace_dir is None:
            from .presets import fig7_required_files
            from .errors import MissingInputError
            raise MissingInputError([str(p) for p in fig7_required_files("<trace-dir>")])
        cases = [("all", "trace", fig7_scenario(trace_dir, seed=seed))]
    else:
        raise InvalidParameterError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    # every trace device sends 30 packets, so its batch law is the atom {30: 1}
    # in every mode; the batch integrals are skipped there
    with_batch = batch and name != "fig7"
    reports = [(g, r, compare(s, sim, points=points, batch=with_batch)) for g, r, s in cases]
    res = PresetResult(name, reports)
    groups = res.groups()
    if name in ("table2", "table3"):
        res.checks["channel_cv_spread"] = _channel_check(groups)
        for g, rows in groups.items():
            lam = float(g.split("=")[1])
            ref = refs.get(lam)
            for r, rep in rows:
                cv = rep.moments["sim_c_V"]
                if ref is not None and abs(cv / ref[3] - 1.0) > 0.10:
                    msg = (f"{name} {g} {r}: simulated c_V {cv:.4g} differs from reference "
                           f"{ref[3]} by {100 * (cv / ref[3] - 1):+.1f}% (tolerance 10%)")
                    rep.deviations.append(msg)
                    res.deviations.append(msg)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for g, rows in groups.items():
            lam = g.split("=")[1] if "=" in g else None
            ref = refs.get(float(lam)) if lam else None
            fname = f"{name}_lam{lam}.csv" if lam else f"{name}.csv"
            write_rows(out / fname, _ROW_HEADER, [_row(r, rep, ref) for r, rep in rows])
            for r, rep in rows:
                rep.write(out / "cases", prefix=rep.scenario_id)
        write_json(out / f"{name}_diagnostics.json", {
            "preset": name,
            "checks": res.checks,
            "deviations": res.deviations,
            "cases": {rep.scenario_id: rep.diagnostics_block() for _, _, rep in reports},
        })
    return res


# -- sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """kind is "rate_scale", "population" or "distance"; values are factors,
    per-class counts or (d_min, d_max) km pairs respectively."""

    kind: str
    values: tuple

    KINDS = ("rate_scale", "population", "distance")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidParameterError(f"sweep kind must be one of {self.KINDS}")
        vals = tuple(tuple(v) if isinstance(v, (list, tuple)) else v for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise InvalidParameterError("sweep needs at least one point")
        if self.kind == "rate_scale" and any(not v > 0 for v in vals):
            raise InvalidParameterError("rate factors must be > 0")
        if self.kind == "population" and any(int(v) < 1 for v in vals):
            raise InvalidParameterError("populations must be >= 1")
        if self.kind == "distance" and any(not (0 < a < b) for a, b in vals):
            raise InvalidParameterError("distance ranges need 0 < d_min < d_max")

    @classmethod
    def rate_scale(cls, factors=(1, 2, 3, 4, 5, 6)):
        return cls("rate_scale", tuple(float(f) for f in factors))

    @classmethod
    def population(cls, counts=(50, 100, 150, 200, 250, 300)):
        return cls("population", tuple(int(c) for c in counts))

    @classmethod
    def distance(cls, ranges=((0.1, 0.5), (0.1, 1.0), (0.1, 2.0), (0.1, 3.0))):
        return cls("distance", tuple((float(a), float(b)) for a, b in ranges))


def _rescale_spec(spec: DistributionSpec, f: float) -> DistributionSpec:
    """Law of X / f (rates multiplied by f)."""
    p = spec.kwargs
    fam = spec.family
    if fam == "deterministic":
        return DistributionSpec.of(fam, period=p["period"] / f)
    if fam == "uniform":
        return DistributionSpec.of(fam, a=p["a"] / f, b=p["b"] / f)
    if fam == "exponential":
        return DistributionSpec.of(fam, rate=p["rate"] * f)
    if fam == "pareto":
        return DistributionSpec.of(fam, shape=p["shape"], scale=p["scale"] / f)
    if fam == "bounded_pareto":
        return DistributionSpec.of(fam, shape=p["shape"], lower=p["lower"] / f, upper=p["upper"] / f)
    if fam == "empirical":
        return DistributionSpec.of(fam, samples=np.asarray(p["samples"]) / f)
    raise InvalidParameterError(f"cannot rescale family {fam!r}")


def rescale_rates(s: Scenario, f: float) -> Scenario:
    classes = tuple(UserClass(c.label, c.population, _rescale_spec(c.inter_gen, f),
                              c.traffic_rate * f, c.packets, c.rates, c.distance) for c in s.classes)
    return Scenario(s.cell, classes, name=f"{s.name}_x{f:g}")


def sweep_point(base: Scenario, sweep: SweepSpec, v) -> tuple[str, Scenario]:
    if sweep.kind == "rate_scale":
        return f"x{v:g}", rescale_rates(base, v)
    if sweep.kind == "population":
        s = Scenario(base.cell, tuple(c.with_population(int(v)) for c in base.classes),
                     name=f"{base.name}_pop{int(v)}")
        return f"{int(v)}", s
    a, b = v
    classes = tuple(UserClass(c.label, c.population, c.inter_gen, c.traffic_rate, c.packets,
                              c.rates, UniformDistance(a, b)) for c in base.classes)
    return f"{a:g}-{b:g}km", Scenario(base.cell, classes, name=f"{base.name}_d{a:g}-{b:g}")


@dataclass
class SweepResult:
    sweep: SweepSpec
    rows: list[dict]

    HEADER = ("point", "n", "total_rate", "E_X", "E_X2", "E_X3", "c_V", "c_V_se",
              "analytic_mean", "arrival_rate", "horizon")

    def column(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows], dtype=float)

    def write_csv(self, path: str | Path) -> None:
        write_rows(path, self.HEADER, [[r[k] for k in self.HEADER] for r in self.rows])

    # property checks on the simulated c_V / E[X] columns
    def cv_ratio(self) -> float:
        cv = self.column("c_V")
        return float(cv.max() / cv.min())

    def relative_spread(self, key: str) -> float:
        v = self.column(key)
        return float((v.max() - v.min()) / v.mean())

    def monotone_increasing(self, z: float = 2.0) -> tuple[bool, str]:
        """Every step up within z standard errors, and a net rise beyond noise."""
        cv, se = self.column("c_V"), self.column("c_V_se")
        step_se = np.sqrt(se[1:] ** 2 + se[:-1] ** 2)
        steps = np.diff(cv)
        ok_steps = bool(np.all(steps > -z * step_se))
        net = cv[-1] - cv[0]
        ok_net = bool(net > z * math.hypot(se[0], se[-1]))
        detail = (f"steps={np.round(steps, 5).tolist()} net={net:.5f} "
                  f"net_noise={z * math.hypot(se[0], se[-1]):.5f}")
        return ok_steps and ok_net, detail


def run_sweep(base: Scenario, sweep: SweepSpec, sim: SimConfig) -> SweepResult:
    """Simulate each sweep point; the analytic mean gap is 1 / total rate."""
    points = [sweep_point(base, sweep, v) for v in sweep.values]

    def one(item):
        label, s = item
        res = run_scenario(s, replace(sim, keep_gaps=False))
        a = res.aggregate
        return {"point": label, "n": s.n, "total_rate": s.total_rate, "E_X": a.mean, "E_X2": a.m2,
                "E_X3": a.m3, "c_V": a.cv, "c_V_se": _cv_se(res),
                "analytic_mean": 1.0 / s.total_rate, "arrival_rate": a.rate, "horizon": res.horizon}

    nthreads = min(thread_count(), len(points))
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            rows = list(ex.map(one, points))
    else:
        rows = [one(p) for p in points]
    return SweepResult(sweep, rows)
