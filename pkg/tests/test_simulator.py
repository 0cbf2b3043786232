import numpy as np
import pytest

from mmtc_traffic.analytic import arrival_batch_pmf, batch_pmf
from mmtc_traffic.distributions import DistributionSpec
from mmtc_traffic.errors import InsufficientDataError, InvalidParameterError
from mmtc_traffic.scenario import (CellConfig, FixedDistance, PacketPmf, RatePmf, Scenario,
                                   UniformDistance, UserClass)
from mmtc_traffic.simulator import (ArrivalStream, SimConfig, default_horizon, merge_streams,
                                    run_scenario, simulate_user)
from mmtc_traffic.stats import tv_distance

from conftest import exp_spec, one_class

CELL = CellConfig()
DET = DistributionSpec.of("deterministic", period=100.0)


def det_class():
    return UserClass.build("d", 1, DET, PacketPmf.fixed(1), RatePmf((1000.0,), (1.0,)),
                           FixedDistance(0.0))


def stream(epochs, users):
    e = np.asarray(epochs, float)
    return ArrivalStream(e, np.ones(e.size, np.int64), np.asarray(users, np.int64),
                         np.arange(e.size, dtype=np.int64))


def test_hand_timeline(rng):
    s = simulate_user(det_class(), 0, CELL, 275, 350.0, rng, distance_km=0.0)
    assert s.epochs == pytest.approx([100.005, 200.005, 300.005], abs=1e-12)
    assert s.sizes.tolist() == [1, 1, 1]


def test_zero_horizon_is_empty(rng):
    assert len(simulate_user(det_class(), 0, CELL, 275, 0.0, rng)) == 0


def test_propagation_offset_is_exact():
    a = simulate_user(det_class(), 0, CELL, 275, 1000.0, np.random.default_rng(1), distance_km=0.0)
    b = simulate_user(det_class(), 0, CELL, 275, 1000.0, np.random.default_rng(1), distance_km=3.0)
    assert np.allclose(b.epochs - a.epochs, 1e-5, atol=1e-12, rtol=0)


def test_merge_examples():
    m = merge_streams([stream([10, 20], [0, 0]), stream([15], [1])])
    assert m.epochs.tolist() == [10, 15, 20]
    assert len(merge_streams([ArrivalStream.empty()] * 3)) == 0
    tie = merge_streams([stream([5.0], [3]), stream([5.0], [1])])
    assert tie.users.tolist() == [1, 3] and tie.gaps().tolist() == [0.0]


def test_poisson_superposition_mean_and_cv():
    s = one_class(exp_spec(0.01), n=1500)
    res = run_scenario(s, SimConfig(runs=4, seed=7, horizon=300.0))
    assert res.aggregate.mean == pytest.approx(1 / 15, rel=0.02)
    assert res.aggregate.cv == pytest.approx(1.0, abs=0.02)


def test_single_deterministic_user_has_constant_gaps():
    res = run_scenario(one_class(DET, n=1), SimConfig(runs=2, seed=1, horizon=5000.0))
    assert res.aggregate.cv == pytest.approx(0.0, abs=1e-9)


def test_too_few_arrivals():
    with pytest.raises(InsufficientDataError):
        run_scenario(one_class(DET, n=1), SimConfig(runs=1, seed=1, horizon=150.0))


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        SimConfig(runs=0)
    with pytest.raises(InvalidParameterError):
        SimConfig(horizon=10.0, warmup=20.0)
    with pytest.raises(InvalidParameterError):
        SimConfig(start="whenever")


def test_rate_conservation():
    uc = UserClass.build("u", 30, DistributionSpec.of("uniform", a=5.0, b=15.0), PacketPmf.uniform(1, 3),
                         RatePmf((200.0, 800.0), (0.5, 0.5)), UniformDistance(0.1, 3.0))
    s = Scenario(CELL, (uc,))
    res = run_scenario(s, SimConfig(runs=3, seed=2, horizon=1000.0))
    assert res.aggregate.rate == pytest.approx(s.total_rate, rel=0.02)


def test_reproducible_and_thread_independent(monkeypatch):
    s = one_class(DistributionSpec.of("uniform", a=5.0, b=15.0), n=20)
    cfg = SimConfig(runs=6, seed=99, horizon=500.0)
    monkeypatch.setenv("MMTC_THREADS", "1")
    a = run_scenario(s, cfg)
    monkeypatch.setenv("MMTC_THREADS", "3")
    b = run_scenario(s, cfg)
    assert [r.moments for r in a.runs] == [r.moments for r in b.runs]
    assert a.aggregate.moments == b.aggregate.moments
    c = run_scenario(s, SimConfig(runs=6, seed=100, horizon=500.0))
    assert c.aggregate.mean != a.aggregate.mean


def test_batch_histogram_matches_exact_batch_law():
    a = UserClass.build("a", 5, exp_spec(0.2), PacketPmf.fixed(10), RatePmf((500.0,), (1.0,)),
                        FixedDistance(0.5))
    b = UserClass.build("b", 5, exp_spec(0.1), PacketPmf.fixed(20), RatePmf((500.0,), (1.0,)),
                        FixedDistance(0.5))
    s = Scenario(CELL, (a, b))
    res = run_scenario(s, SimConfig(runs=10, seed=5, horizon=7000.0))
    assert res.aggregate.arrivals * len(res.runs) >= 1e5
    sim = res.aggregate.batch_pmf()
    assert tv_distance(sim, batch_pmf(s, "exact").pmf.as_dict()) < 0.01
    assert tv_distance(sim, arrival_batch_pmf(s).as_dict()) < 0.01


def test_stationary_start_and_warmup():
    s = one_class(DistributionSpec.of("uniform", a=5.0, b=15.0), n=10)
    res = run_scenario(s, SimConfig(runs=2, seed=1, horizon=400.0, warmup=100.0, start="stationary"))
    assert res.aggregate.rate == pytest.approx(1.0, rel=0.1)


def test_default_horizon_rule():
    s = one_class(exp_spec(0.01), n=1500)
    assert default_horizon(s) == pytest.approx(max(1e3 / 15, 10 / 0.01))


def test_csv_outputs(tmp_path):
    s = one_class(exp_spec(1.0), n=3)
    res = run_scenario(s, SimConfig(runs=2, seed=1, horizon=50.0, keep_gaps=True))
    res.write_csv(tmp_path / "runs.csv")
    res.write_gaps_csv(tmp_path / "gaps.csv")
    rows = (tmp_path / "runs.csv").read_text().splitlines()
    assert len(rows) == 4 and rows[-1].startswith("mean")
    assert (tmp_path / "gaps.csv").read_text().startswith("gap_seconds")
