"""Exit criteria, one test each, with the pinned tolerances.

Every test appends a ``PASS``/``FAIL`` line to the acceptance summary that is
printed at the end of the run.
"""

import math
import time
from collections import Counter

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from partition_lab import counting
from partition_lab.analysis import (
    clt_params,
    g_fd_first,
    solve_v,
    szekeres_g_prime,
)
from partition_lab.limits import LimitLawSpec, limit_pmf_k1, power_transform_check
from partition_lab.samplers import k1_pmf
from partition_lab.verify import ExperimentConfig, ExperimentId, draw, run_experiment, tv_distance

pytestmark = pytest.mark.acceptance

SEED = 42

# pinned tolerances
COUNT_RUNTIME_S = 10.0
IDENTITY_N_MAX, IDENTITY_M = 300, (2, 12)
IDENTITY_RUNTIME_S = 60.0
Q_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
V_TOL, GAMMA_TOL, SIGMA_REL_TOL = 1e-10, 1e-12, 1e-10
ANALYTIC_RUNTIME_S = 1.0
DERIV_U, DERIV_REL_TOL = (0.5, 1.0, 2.0), 1e-6
SZEKERES_REL_ERR, SZEKERES_RUNTIME_S = 0.02, 120.0
EXACT_TV_TOL, MC_TV_TOL, MARGINAL_RUNTIME_S = 0.01, 0.02, 60.0
CHI2_P_MIN, CONDITIONAL_RUNTIME_S = 0.001, 60.0
CLT_KS, CLT_RUNTIME_S = 0.05, 300.0
GENERAL_KS, GENERAL_RUNTIME_S = 0.03, 120.0
TRANSFORM_ABS_TOL, TRANSFORM_KS = 1e-10, 0.03
MSWEEP_KS = 0.03


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}")
    assert ok, detail


def _partition_lengths(n: int) -> Counter:
    """Number of partitions of ``n`` by number of parts, by plain recursion."""
    out = Counter()

    def rec(rest, cap, parts):
        if rest == 0:
            out[parts] += 1
            return
        for k in range(min(rest, cap), 0, -1):
            rec(rest - k, k, parts + 1)

    rec(n, n, 0)
    return out


def test_01_counting_matches_enumeration():
    t0 = time.perf_counter()
    bad = 0
    for n in range(0, 41):
        lengths = _partition_lengths(n)
        for m in range(1, n + 1):
            bad += counting.count_at_most(n, m) != sum(c for k, c in lengths.items() if k <= m)
    dt = time.perf_counter() - t0
    record(1, bad == 0 and dt < COUNT_RUNTIME_S,
           f"count_at_most vs enumeration, n<=40: {bad} mismatches in {dt:.2f}s (limit {COUNT_RUNTIME_S}s)")


def test_02_fixed_largest_part_identity():
    rep = run_experiment(ExperimentConfig(ExperimentId.LEMMA_2_1_IDENTITY,
                                          {"n_max": IDENTITY_N_MAX, "m_min": IDENTITY_M[0], "m_max": IDENTITY_M[1]}, SEED))
    dt = rep.runtime_ms / 1000
    v = rep.statistics
    record(2, v["violations"] == 0 and dt < IDENTITY_RUNTIME_S,
           f"fixed-largest-part identity n<=300, 2<=m<=12: {v['violations']} violations "
           f"over {v['cases_checked']} cases in {dt:.2f}s (limit {IDENTITY_RUNTIME_S}s)")


def test_03_analytic_identities():
    t0 = time.perf_counter()
    worst = {"v": 0.0, "gamma": 0.0, "sigma": 0.0}
    concave = True
    for q in Q_GRID:
        c = clt_params(q)
        worst["v"] = max(worst["v"], abs(solve_v(c.t0) - c.lam))
        worst["gamma"] = max(worst["gamma"], abs(c.gamma * c.t0 ** 2 - 1.0))
        worst["sigma"] = max(worst["sigma"], abs(c.sigma2 - c.sigma2_from_psi) / c.sigma2)
        concave &= c.psi2_t0 < 0
    dt = time.perf_counter() - t0
    ok = (worst["v"] <= V_TOL and worst["gamma"] <= GAMMA_TOL and worst["sigma"] <= SIGMA_REL_TOL
          and concave and dt < ANALYTIC_RUNTIME_S)
    record(3, ok, f"|v(t0)-lam|={worst['v']:.1e} (tol {V_TOL}), |gamma t0^2-1|={worst['gamma']:.1e} "
                  f"(tol {GAMMA_TOL}), sigma2 rel={worst['sigma']:.1e} (tol {SIGMA_REL_TOL}), "
                  f"psi''<0: {concave}, {dt:.3f}s")


def test_04_derivative_identity():
    t0 = time.perf_counter()
    rel = max(abs(g_fd_first(u) - szekeres_g_prime(u)) / abs(szekeres_g_prime(u)) for u in DERIV_U)
    dt = time.perf_counter() - t0
    record(4, rel <= DERIV_REL_TOL and dt < ANALYTIC_RUNTIME_S,
           f"finite-difference g' vs -log(1-e^-v): max rel err {rel:.1e} (tol {DERIV_REL_TOL}), {dt:.3f}s")


def test_05_szekeres_accuracy():
    rep = run_experiment(ExperimentConfig(ExperimentId.SZEKERES_ACCURACY, {}, SEED))
    s = rep.statistics
    dt = rep.runtime_ms / 1000
    ok = s["max_rel_err"] <= SZEKERES_REL_ERR and s["non_monotone_steps"] == 0 and dt < SZEKERES_RUNTIME_S
    record(5, ok, f"max rel err at n=1e5 {s['max_rel_err']:.2e} (tol {SZEKERES_REL_ERR}), "
                  f"non-monotone steps at u=1: {s['non_monotone_steps']}, {dt:.1f}s")


def test_06_k1_offset_limit():
    t0 = time.perf_counter()
    n, m, q = 3001, 3, 0.5
    exact_tv = tv_distance(k1_pmf(n, m, q), limit_pmf_k1(LimitLawSpec.for_n(n, m, q)))
    rep = run_experiment(ExperimentConfig(ExperimentId.COR_1_2_MARGINAL, {}, SEED))
    mc_tv = rep.statistics["tv_distance"]
    dt = time.perf_counter() - t0
    ok = exact_tv <= EXACT_TV_TOL and mc_tv <= MC_TV_TOL and dt < MARGINAL_RUNTIME_S
    record(6, ok, f"exact TV {exact_tv:.2e} (tol {EXACT_TV_TOL}), MC TV {mc_tv:.4f} (tol {MC_TV_TOL}), {dt:.1f}s")


def test_07_conditional_uniformity():
    rep = run_experiment(ExperimentConfig(ExperimentId.COR_1_2_CONDITIONAL, {}, SEED))
    p = rep.statistics["chi2_pvalue"]
    dt = rep.runtime_ms / 1000
    ok = p > CHI2_P_MIN and rep.statistics["strata_tested"] > 0 and dt < CONDITIONAL_RUNTIME_S
    record(7, ok, f"min chi-square p {p:.4f} over {rep.statistics['strata_tested']} strata "
                  f"(need > {CHI2_P_MIN}), {dt:.1f}s")


def test_08_clt():
    rep = run_experiment(ExperimentConfig(ExperimentId.THM_1_3_CLT, {}, SEED))
    s = rep.statistics
    dt = rep.runtime_ms / 1000
    detail = f"KS at m=50 {s['ks_statistic']:.4f} (tol {CLT_KS})"
    if rep.pass_rule.startswith("escalated"):
        seq = [s[f"escalated_ks_m{mm}"] for mm in (50, 75, 100)]
        detail += ", escalated KS over m=50,75,100: " + " > ".join(f"{x:.4f}" for x in seq)
    assert rep.threshold == CLT_KS
    record(8, rep.passed and dt < CLT_RUNTIME_S, detail + f", {dt:.1f}s")


def test_09_general_measure():
    t0 = time.perf_counter()
    uni = run_experiment(ExperimentConfig(ExperimentId.THM_1_4_GENERAL, {}, SEED))
    dirich = run_experiment(ExperimentConfig(ExperimentId.COR_1_5_DIRICHLET, {}, SEED))
    dt = time.perf_counter() - t0
    a, b = uni.statistics["ks_statistic"], dirich.statistics["ks_statistic"]
    record(9, a <= GENERAL_KS and b <= GENERAL_KS and dt < GENERAL_RUNTIME_S,
           f"KS alpha=1 n=2000 {a:.4f}, alpha=3 n=60 {b:.4f} (tol {GENERAL_KS}), {dt:.1f}s")


def test_10_power_transform():
    n, m, alpha = 60, 3, 3.0
    sam = draw("general", (n, m, alpha), SEED, 100_000)
    err = 0.0
    for y in np.unique(sam, axis=0) / n:
        x = power_transform_check(tuple(y), alpha)
        err = max(err, abs(sum(v ** (1 / alpha) for v in x) - 1.0))
    rep = run_experiment(ExperimentConfig(ExperimentId.COR_1_6_TRANSFORM, {}, SEED))
    ks = rep.statistics["ks_statistic"]
    record(10, err <= TRANSFORM_ABS_TOL and ks <= TRANSFORM_KS,
           f"surface residual {err:.1e} (tol {TRANSFORM_ABS_TOL}), max per-coordinate KS {ks:.4f} (tol {TRANSFORM_KS})")


def test_11_m_sweep():
    rep = run_experiment(ExperimentConfig(ExperimentId.M_SWEEP_THM_1_5, {}, SEED))
    s = rep.statistics
    per = ", ".join(f"m={m}: {s[f'ks_m{m}']:.4f}" for m in (3, 5, 8))
    record(11, s["ks_statistic"] <= MSWEEP_KS, f"per-m KS with n=200 m^3: {per} (tol {MSWEEP_KS})")
