"""Command-line entry point: ``mmtc-traffic <command> ...``.

Exit status is 0 on success, 1 when the scenario has validation findings and
2 on usage, I/O or numerical errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .analytic import analytic_report
from .errors import (DegenerateSampleError, DomainError, InsufficientDataError,
                     InvalidParameterError, MissingInputError, QuadratureError)
from .io import SCENARIO_SCHEMA_HELP, ScenarioFormatError, load_scenario, write_json
from .presets import table4_scenario
from .scenario import Scenario, validate_scenario
from .simulator import STARTS, SimConfig, run_scenario
from .validation import PRESET_NAMES, SweepSpec, compare, run_preset, run_sweep

EXIT_OK, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2
FULL_RUNS = 10000


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{SCENARIO_SCHEMA_HELP}")
        raise SystemExit(EXIT_ERROR)


class _Findings(Exception):
    pass


class _Usage(Exception):
    pass


def _sim_args(p: argparse.ArgumentParser, seed_required: bool) -> None:
    p.add_argument("--runs", type=int, default=100, help="independent replications (default 100)")
    p.add_argument("--full", action="store_true", help=f"full budget of {FULL_RUNS} runs (overrides --runs)")
    p.add_argument("--seed", type=int, required=seed_required, default=None if seed_required else 0,
                   help="master seed" + ("" if seed_required else " (default 0)"))
    p.add_argument("--horizon", type=float, default=None,
                   help="seconds per run (default: max(1000/total rate, 10/min rate))")
    p.add_argument("--warmup", type=float, default=0.0, help="seconds discarded at the start of each run")
    p.add_argument("--start", choices=STARTS, default="synchronized",
                   help="initial phase of every user (default synchronized)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mmtc-traffic",
                description="Inter-arrival statistics of aggregated machine-type traffic.",
                epilog="Run 'mmtc-traffic schema' for the scenario file format.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="analytic report for a scenario file")
    a.add_argument("--scenario", required=True, type=Path)
    a.add_argument("--out", required=True, type=Path)
    a.add_argument("--points", type=int, default=512, help="CDF grid size (default 512)")
    a.add_argument("--no-batch", action="store_true", help="skip the batch-size pmfs")

    s = sub.add_parser("simulate", help="Monte-Carlo run statistics for a scenario file")
    s.add_argument("--scenario", required=True, type=Path)
    s.add_argument("--out", required=True, type=Path)
    _sim_args(s, seed_required=True)
    s.add_argument("--gaps", action="store_true", help="also write every merged gap")

    v = sub.add_parser("validate", help="compare analytic laws against simulation")
    v.add_argument("--scenario", required=True, type=Path)
    v.add_argument("--out", required=True, type=Path)
    _sim_args(v, seed_required=True)
    v.add_argument("--points", type=int, default=512)
    v.add_argument("--no-batch", action="store_true")

    r = sub.add_parser("preset", help="run a reference preset")
    r.add_argument("name", choices=PRESET_NAMES)
    r.add_argument("--out", required=True, type=Path)
    r.add_argument("--trace-dir", type=Path, default=None, help="directory of device_XX.csv traces (fig7)")
    r.add_argument("--points", type=int, default=512)
    _sim_args(r, seed_required=False)

    w = sub.add_parser("sweep", help="simulated c_V and E[X] along a parameter sweep")
    w.add_argument("kind", choices=SweepSpec.KINDS)
    w.add_argument("--values", nargs="+", default=None,
                   help="factors, per-class counts, or LO:HI km ranges (defaults reproduce the reference sweeps)")
    w.add_argument("--scenario", type=Path, default=None, help="base scenario (default: six-type cell)")
    w.add_argument("--out", required=True, type=Path)
    _sim_args(w, seed_required=False)

    sub.add_parser("schema", help="print the scenario file format")
    return p


def _load(path: Path) -> Scenario:
    s = load_scenario(path)
    findings = validate_scenario(s)
    if findings:
        raise _Findings("\n".join(str(f) for f in findings))
    return s


def _config(ns, **extra) -> SimConfig:
    try:
        return SimConfig(runs=FULL_RUNS if ns.full else ns.runs, seed=ns.seed,
                         horizon=ns.horizon, warmup=ns.warmup, start=ns.start, **extra)
    except InvalidParameterError as exc:
        raise _Usage(str(exc)) from None


def _sweep_spec(kind: str, values) -> SweepSpec:
    try:
        return _parse_sweep(kind, values)
    except (InvalidParameterError, ValueError) as exc:
        raise _Usage(str(exc)) from None


def _parse_sweep(kind: str, values) -> SweepSpec:
    if values is None:
        return getattr(SweepSpec, kind)()
    if kind == "rate_scale":
        return SweepSpec.rate_scale(float(v) for v in values)
    if kind == "population":
        return SweepSpec.population(int(v) for v in values)
    ranges = []
    for v in values:
        lo, sep, hi = v.partition(":")
        if not sep:
            raise InvalidParameterError(f"distance range {v!r} must look like LO:HI")
        ranges.append((float(lo), float(hi)))
    return SweepSpec.distance(ranges)


def _run(ns) -> int:
    if ns.command == "schema":
        sys.stdout.write(SCENARIO_SCHEMA_HELP)
        return EXIT_OK
    out: Path = ns.out
    out.mkdir(parents=True, exist_ok=True)

    if ns.command == "analyze":
        s = _load(ns.scenario)
        rep = analytic_report(s, points=ns.points, batch=not ns.no_batch)
        rep.write_csv(out / f"{s.name}_analytic.csv")
        if rep.batch_exact is not None:
            rep.write_batch_csv(out / f"{s.name}_batch.csv")
        rep.write_json(out / f"{s.name}_diagnostics.json")
        d = rep.diagnostics
        print(f"{s.name}: n={s.n} total_rate={s.total_rate:.6g} exact_mean={d['exact_mean']:.6g} "
              f"cdf_valid={d['cdf_valid']} negative_mass={d['negative_mass']:.3g}")
    elif ns.command == "simulate":
        s = _load(ns.scenario)
        res = run_scenario(s, _config(ns, keep_gaps=ns.gaps))
        res.write_csv(out / f"{s.name}_runs.csv")
        if ns.gaps:
            res.write_gaps_csv(out / f"{s.name}_gaps.csv")
        a = res.aggregate
        print(f"{s.name}: runs={len(res.runs)} E[X]={a.mean:.6g} c_V={a.cv:.6g} rate={a.rate:.6g}/s")
    elif ns.command == "validate":
        s = _load(ns.scenario)
        rep = compare(s, _config(ns), points=ns.points, batch=not ns.no_batch)
        rep.write(out)
        m = rep.moments
        print(f"{s.name}: ks_exact={rep.ks_exact:.4g} ks_paper={rep.ks_paper:.4g} "
              f"ks_stationary={rep.ks_stationary:.4g} matching_mode={rep.matching_mode} "
              f"E[X]={m['sim_E_X']:.6g} c_V={m['sim_c_V']:.6g}")
    elif ns.command == "preset":
        res = run_preset(ns.name, runs=_config(ns).runs, seed=ns.seed, out_dir=out, trace_dir=ns.trace_dir,
                         horizon=ns.horizon, start=ns.start, points=ns.points)
        for g, r, rep in res.reports:
            m = rep.moments
            print(f"{ns.name} {g} {r}: E[X]={m['sim_E_X']:.6g} c_V={m['sim_c_V']:.6g} "
                  f"ks_exact={rep.ks_exact:.4g} matching_mode={rep.matching_mode}")
        for msg in res.deviations:
            print(f"deviation: {msg}")
    elif ns.command == "sweep":
        base = _load(ns.scenario) if ns.scenario is not None else table4_scenario()
        spec = _sweep_spec(ns.kind, ns.values)
        res = run_sweep(base, spec, _config(ns))
        res.write_csv(out / f"sweep_{ns.kind}.csv")
        checks = {"cv_max_over_min": res.cv_ratio(),
                  "cv_relative_spread": res.relative_spread("c_V"),
                  "mean_relative_spread": res.relative_spread("E_X")}
        if ns.kind == "population" and len(res.rows) > 1:
            ok, detail = res.monotone_increasing()
            checks["cv_increasing"] = ok
            checks["cv_increasing_detail"] = detail
        write_json(out / f"sweep_{ns.kind}.json", checks)
        for row in res.rows:
            print(f"{row['point']}: n={row['n']} c_V={row['c_V']:.6g} +- {row['c_V_se']:.2g} "
                  f"E[X]={row['E_X']:.6g} analytic_mean={row['analytic_mean']:.6g}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_ERROR
    try:
        return _run(ns)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    except _Findings as exc:
        sys.stderr.write(f"scenario has validation findings:\n{exc}\n")
        return EXIT_FINDINGS
    except MissingInputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    except ScenarioFormatError as exc:
        sys.stderr.write(f"error: {exc}\n\n{SCENARIO_SCHEMA_HELP}")
        return EXIT_ERROR
    except InvalidParameterError as exc:
        sys.stderr.write(f"scenario has validation findings:\n{exc}\n")
        return EXIT_FINDINGS
    except (OSError, QuadratureError, DomainError, InsufficientDataError, DegenerateSampleError,
            ValueError, FloatingPointError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
