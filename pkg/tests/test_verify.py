import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ndtr

from partition_lab.limits import DiscretePmf
from partition_lab.verify import (
    CLAIMS,
    DEFAULTS,
    THRESHOLDS,
    Check,
    ExperimentConfig,
    ExperimentId,
    chi2_pvalue,
    draw,
    ks_discrete_vs_cdf,
    ks_statistic,
    ks_two_sample,
    identity_violations,
    run_experiment,
    tv_distance,
)


def test_tv_examples():
    assert tv_distance([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert tv_distance([1.0, 0.0], [0.0, 1.0]) == 1.0
    assert tv_distance({0: 0.5, 1: 0.5}, {1: 0.5, 2: 0.5}) == 0.5
    assert tv_distance(Counter({0: 3, 1: 1}), {0: 0.75, 1: 0.25}) == 0.0
    assert tv_distance(DiscretePmf(2, [0.5, 0.5]), {2: 0.5, 3: 0.5}) == 0.0


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=20), st.lists(st.floats(0.0, 1.0), min_size=1, max_size=20))
def test_tv_is_a_bounded_metric(a, b):
    a = np.array(a) + 1e-3
    b = np.array(b) + 1e-3
    a, b = a / a.sum(), b / b.sum()
    d = tv_distance(a, b)
    assert 0.0 <= d <= 1.0 + 1e-12
    assert d == pytest.approx(tv_distance(b, a))
    assert tv_distance(a, a) == 0.0


def test_ks_examples():
    assert ks_statistic([0.0], ndtr) == 0.5
    assert ks_statistic([0.25, 0.75], lambda x: np.clip(x, 0, 1)) == pytest.approx(0.25)
    assert ks_two_sample([1, 2, 3], [1, 2, 3]) == 0.0
    assert ks_two_sample([0.0, 0.0], [1.0, 1.0]) == 1.0
    assert ks_discrete_vs_cdf([0.5], [1.0], lambda x: np.clip(x, 0, 1)) == pytest.approx(0.5)


def test_chi2_pvalue_exact_fit():
    assert chi2_pvalue([10, 20, 30], [1, 2, 3]) == pytest.approx(1.0)
    assert chi2_pvalue([60, 0, 0], [1, 1, 1]) < 1e-10


def test_thresholds_and_claims_cover_every_experiment():
    for eid in ExperimentId:
        assert eid in THRESHOLDS and eid in DEFAULTS and eid in CLAIMS
        assert THRESHOLDS[eid].direction in ("le", "gt")


@pytest.mark.parametrize("direction,value,ok", [("le", 0.1, True), ("le", 0.3, False), ("gt", 0.3, True), ("gt", 0.2, False)])
def test_check_direction(direction, value, ok):
    assert Check("x", value, 0.2, direction).ok is ok


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("NOT_AN_EXPERIMENT")
    with pytest.raises(ValueError):
        ExperimentConfig(ExperimentId.LEMMA_2_1_IDENTITY, seed=2 ** 64)
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig(ExperimentId.COR_1_2_MARGINAL, {"bogus": 1}))
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig(ExperimentId.COR_1_2_MARGINAL, {"sample_count": 999}))


@pytest.mark.parametrize("alpha", [0.5, 1.5, 2.0])
def test_alpha_outside_claimed_range_rejected(alpha):
    with pytest.raises(ValueError, match="alpha"):
        run_experiment(ExperimentConfig(ExperimentId.THM_1_4_GENERAL, {"alpha": alpha}))


def test_draws_independent_of_worker_count():
    args = (3001, 3, 0.5)
    a = draw("geom", args, 7, 25_000, workers=1)
    b = draw("geom", args, 7, 25_000, workers=3)
    assert np.array_equal(a, b)
    c = draw("geom", args, 8, 25_000, workers=1)
    assert not np.array_equal(a, c)


def test_report_reproducible_bytes(tmp_path):
    cfg = ExperimentConfig(ExperimentId.COR_1_2_MARGINAL, {"sample_count": 20_000}, 11)
    r1 = run_experiment(cfg, tmp_path / "a")
    r2 = run_experiment(cfg, tmp_path / "b", workers=2)
    assert r1.to_json(with_runtime=False) == r2.to_json(with_runtime=False)
    assert r1.to_text(with_runtime=False) == r2.to_text(with_runtime=False)
    for name in r1.artifacts:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    data = json.loads((tmp_path / "a" / "cor_1_2_marginal.report.json").read_text())
    assert data["seed"] == 11 and data["build"].startswith("partition-lab")
    assert data["threshold"] == THRESHOLDS[ExperimentId.COR_1_2_MARGINAL].value
    assert "runtime_ms" in data


def test_refusal_report(tmp_path):
    rep = run_experiment(ExperimentConfig(ExperimentId.COR_1_2_CONDITIONAL, {"n": 10 ** 9}, 1), tmp_path)
    assert rep.refused and not rep.passed
    assert rep.refusal.startswith("BudgetExceeded")
    assert json.loads((tmp_path / "cor_1_2_conditional.report.json").read_text())["refused"] is True


def test_identity_violations_small():
    v = identity_violations(80, 2, 6)
    assert all(v[k] == 0 for k in ("equality_violations", "inequality_violations", "sum_violations", "residue_violations"))
    assert v["cases_checked"] > 0


def test_marginal_experiment_small():
    rep = run_experiment(ExperimentConfig(ExperimentId.COR_1_2_MARGINAL, {"sample_count": 20_000}, 3))
    assert rep.primary.name == "tv_distance"
    assert rep.statistics["exact_tv_distance"] <= 0.01
