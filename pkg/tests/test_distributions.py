import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmtc_traffic.distributions import (BoundedPareto, Deterministic, DistributionSpec, Empirical,
                                        Exponential, Pareto, Uniform, eval_cdf, eval_pdf,
                                        excess_cdf, load_empirical_csv, make_distribution,
                                        sample, write_empirical_csv)
from mmtc_traffic.errors import ExcessMassWarning, InvalidParameterError
from mmtc_traffic.quadrature import integrate

LAWS = [Deterministic(100.0), Uniform(5.0, 15.0), Exponential(0.01), Pareto(1.95, 48.7179),
        BoundedPareto(1.95, 48.75, 10000.0), Empirical([3.0, 5.0, 5.0, 11.0])]


def test_spec_examples():
    assert make_distribution(DistributionSpec.of("exponential", rate=0.01)).mean == pytest.approx(100.0)
    p = make_distribution(DistributionSpec.of("pareto", shape=1.95, scale=48.7179))
    assert p.mean == pytest.approx(48.7179 * 1.95 / 0.95, rel=1e-12)
    assert p.mean == pytest.approx(100.0, rel=1e-5)


def test_bounded_pareto_mean_against_quadrature():
    bp = BoundedPareto(1.95, 48.75, 10000.0)
    num = integrate(lambda x: x * bp.pdf(x), 48.75, 10000.0, atol=1e-10, rtol=1e-12)
    assert bp.mean == pytest.approx(num, rel=1e-9)
    assert bp.mean == pytest.approx(100.0, rel=0.05)


@pytest.mark.parametrize("family, params, needle", [
    ("uniform", dict(a=5, b=5), "a < b"),
    ("pareto", dict(shape=1.0, scale=1.0), "shape > 1"),
    ("bounded_pareto", dict(shape=1.5, lower=10, upper=5), "lower < upper"),
    ("exponential", dict(rate=-1.0), "rate"),
    ("deterministic", dict(period=0.0), "period"),
    ("empirical", dict(samples=[1.0]), "2 samples"),
    ("empirical", dict(samples=[1.0, -2.0]), ">= 0"),
])
def test_invalid_parameters_name_the_constraint(family, params, needle):
    with pytest.raises(InvalidParameterError, match=needle):
        make_distribution(DistributionSpec.of(family, **params))


def test_eval_examples():
    assert eval_cdf(Uniform(5, 15), 10) == 0.5
    d = Deterministic(100)
    assert eval_cdf(d, 99.9) == 0.0 and eval_cdf(d, 100) == 1.0
    assert eval_cdf(Pareto(2, 1), 2) == pytest.approx(0.75)
    assert eval_pdf(Uniform(5, 15), 7) == pytest.approx(0.1)


@pytest.mark.parametrize("law", LAWS, ids=lambda d: d.family)
def test_cdf_is_a_distribution(law):
    x = np.linspace(-10, 20000, 4001)
    F = law.cdf(x)
    assert np.all(np.diff(F) >= -1e-15)
    assert law.cdf(-1e-9) == 0.0
    assert law.cdf(1e12) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("law", LAWS, ids=lambda d: d.family)
def test_integrated_survival_tends_to_mean(law):
    assert law.integrated_survival(1e9) == pytest.approx(law.mean, rel=1e-6)
    assert law.integrated_survival(-2.0) == -2.0


@pytest.mark.parametrize("law", LAWS[1:5], ids=lambda d: d.family)
def test_pdf_integrates_to_cdf(law):
    lo = max(law.support[0], 0.0)
    x = lo + 0.7 * (law.ppf(0.9) - lo)
    assert integrate(law.pdf, 0.0, x, points=law.breakpoints) == pytest.approx(law.cdf(x), abs=1e-8)


def test_sampling_examples(rng):
    assert sample(Deterministic(100), rng) == 100.0
    x = sample(Exponential(0.01), rng, 100_000)
    assert abs(x.mean() - 100.0) < 3.0
    b = sample(BoundedPareto(1.95, 48.75, 10000.0), rng, 100_000)
    assert b.min() >= 48.75 and b.max() <= 10000.0


@pytest.mark.parametrize("law", LAWS, ids=lambda d: d.family)
def test_residual_sampler_matches_excess_law(law, rng):
    from mmtc_traffic.stats import ks_distance
    r = law.sample_residual(rng, 50_000)
    ks = ks_distance(np.sort(r), lambda x: excess_cdf(law, law.mean, x))
    assert ks < 0.01


def test_excess_cdf_examples():
    x = np.array([0.0, 10.0, 100.0, 700.0])
    assert np.allclose(excess_cdf(Exponential(0.01), 100.0, x), -np.expm1(-0.01 * x))
    d = Deterministic(100.0)
    assert np.allclose(excess_cdf(d, 100.0, [0, 25, 100, 150]), [0, 0.25, 1, 1])
    for law in LAWS:
        assert excess_cdf(law, law.mean, 0.0) == 0.0


def test_excess_cdf_flags_inconsistent_mean_without_clamping():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        v = excess_cdf(Deterministic(100.0), 50.0, 1000.0)
    assert v == pytest.approx(2.0)
    assert any(issubclass(w.category, ExcessMassWarning) for w in caught)


def test_spec_round_trip_and_hashable():
    s = DistributionSpec.of("empirical", samples=[1.0, 2.0, 4.0])
    assert hash(s) == hash(DistributionSpec.from_dict(s.to_dict()))
    assert make_distribution(s).mean == pytest.approx(7 / 3)


def test_empirical_csv_round_trip(tmp_path):
    p = tmp_path / "trace.csv"
    write_empirical_csv(p, [1.5, 2.25, 10.0])
    assert load_empirical_csv(p).tolist() == [1.5, 2.25, 10.0]


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.1, 50), width=st.floats(0.01, 50), u=st.floats(0.0, 0.999))
def test_uniform_ppf_inverts_cdf(a, width, u):
    d = Uniform(a, a + width)
    assert d.cdf(d.ppf(u)) == pytest.approx(u, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(al=st.floats(1.05, 4), lo=st.floats(0.5, 50), ratio=st.floats(1.5, 500), u=st.floats(0, 0.999))
def test_bounded_pareto_ppf_inverts_cdf(al, lo, ratio, u):
    d = BoundedPareto(al, lo, lo * ratio)
    assert d.cdf(d.ppf(u)) == pytest.approx(u, abs=1e-9)
    assert math.isfinite(d.mean)


@pytest.mark.parametrize("law", [Pareto(2.2, 3.0), BoundedPareto(1.5, 2.0, 40.0), Exponential(0.2),
                                 Uniform(1.0, 4.0)])
def test_direct_pdf_skips_only_zero_terms(law, rng):
    from mmtc_traffic.distributions import DirectShiftEvaluator
    shifts = np.sort(rng.uniform(-2.0, 2.0, 300))
    w = rng.dirichlet(np.ones(300))
    x = rng.uniform(-5.0, 60.0, 5000)
    ev = DirectShiftEvaluator(law, shifts, w)
    ref = law.pdf(x[:, None] - shifts[None, :]) @ w
    assert np.allclose(ev.pdf(x), ref, rtol=1e-13, atol=0.0)
