"""Seeded experiments that check the limit laws at desk scale.

Monte Carlo work is cut into fixed chunks of ``CHUNK`` draws. Chunk ``i`` of
draw kind ``tag`` uses the stream ``make_rng(seed, tag, i)``, so results do
not depend on how many workers run the chunks.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import BUILD_ID, counting
from ..analysis import clt_params, szekeres_log_estimate
from ..counting import ceil_div, identity_cutoff, log_int, residue_j
from ..limits import LimitLawSpec, clt_cdf, limit_joint_prob, limit_pmf_k1
from ..rng import make_rng
from ..samplers import (
    GeometricMeasureSpec,
    RefusalError,
    dirichlet_measure,
    k1_pmf,
    sample_dirichlet_order_stats,
    sample_general,
    sample_geometric_partition,
    sample_k1_geometric,
)
from .report import CLAIMS, Check, ExperimentConfig, ExperimentId, Report
from .stats import (
    chi2_uniform_pvalue,
    ks_discrete_vs_cdf,
    ks_statistic,
    ks_two_sample,
    tv_distance,
    value_counts,
)

CHUNK = 10_000
MIN_SAMPLES = 1_000

_TAG = {"k1": 1, "geom": 2, "general": 3, "dirichlet_ref": 4}


@dataclass(frozen=True)
class Threshold:
    value: float
    direction: str
    source: str
    note: str


THRESHOLDS_VERSION = 1
# Pass thresholds. "fixed" entries are exact identities or pinned by the
# project's acceptance targets; "calibrated" entries come from
# calibrate_threshold (>= 20 seeds, max statistic x 1.5).
THRESHOLDS = {
    ExperimentId.THM_1_1_JOINT: Threshold(
        0.0155, "le", "calibrated",
        "tv_distance; seeds 0..19 at n=3001, m=3, q=0.5, 1e5 draws: max 0.01036 -> x1.5"),
    ExperimentId.COR_1_2_MARGINAL: Threshold(
        0.02, "le", "fixed", "tv_distance of 1e5 draws; exact finite-n TV checked against 0.01"),
    ExperimentId.COR_1_2_CONDITIONAL: Threshold(
        0.001, "gt", "fixed", "smallest per-stratum chi-square p-value; exact in law"),
    ExperimentId.THM_1_3_CLT: Threshold(
        0.05, "le", "fixed", "KS of 1e4 standardised draws; escalation to m=75,100 if exceeded"),
    ExperimentId.THM_1_4_GENERAL: Threshold(0.03, "le", "fixed", "two-sample KS of k1/n, 1e5 vs 1e5"),
    ExperimentId.COR_1_5_DIRICHLET: Threshold(0.03, "le", "fixed", "two-sample KS of k1/n, 1e5 vs 1e5"),
    ExperimentId.COR_1_6_TRANSFORM: Threshold(
        0.03, "le", "fixed", "largest per-coordinate two-sample KS after the power transform"),
    ExperimentId.SZEKERES_ACCURACY: Threshold(0.02, "le", "fixed", "relative error of the log estimate at n=1e5"),
    ExperimentId.LEMMA_2_1_IDENTITY: Threshold(0, "le", "fixed", "violations of an exact identity"),
    ExperimentId.M_SWEEP_THM_1_5: Threshold(0.03, "le", "fixed", "largest per-m two-sample KS of k1/n"),
}

DEFAULTS = {
    ExperimentId.THM_1_1_JOINT: {"n": 3001, "m": 3, "q": 0.5, "sample_count": 100_000, "tol": 1e-12},
    ExperimentId.COR_1_2_MARGINAL: {"n": 3001, "m": 3, "q": 0.5, "sample_count": 100_000, "tol": 1e-12},
    ExperimentId.COR_1_2_CONDITIONAL: {"n": 10_000, "m": 4, "q": 0.5, "sample_count": 100_000,
                                       "min_stratum": 500},
    ExperimentId.THM_1_3_CLT: {"n": 1_000_000, "m": 50, "q": 0.5, "sample_count": 10_000,
                               "escalate_m": [75, 100], "escalate_samples": 100_000},
    ExperimentId.THM_1_4_GENERAL: {"n": 2000, "m": 3, "alpha": 1.0, "sample_count": 100_000},
    ExperimentId.COR_1_5_DIRICHLET: {"n": 60, "m": 3, "alpha": 3.0, "sample_count": 100_000},
    ExperimentId.COR_1_6_TRANSFORM: {"n": 60, "m": 3, "alpha": 3.0, "sample_count": 100_000},
    ExperimentId.SZEKERES_ACCURACY: {"n_values": [1000, 10_000, 100_000], "u_values": [0.5, 1.0, 2.0]},
    ExperimentId.LEMMA_2_1_IDENTITY: {"n_max": 300, "m_min": 2, "m_max": 12},
    ExperimentId.M_SWEEP_THM_1_5: {"m_values": [3, 5, 8], "alpha": 1.0, "sample_count": 100_000},
}

SAMPLING = {k for k in ExperimentId if k not in (ExperimentId.SZEKERES_ACCURACY,
                                                  ExperimentId.LEMMA_2_1_IDENTITY)}


# -- chunked draws ----------------------------------------------------------------------

def _draw_chunk(kind: str, args: tuple, seed: int, index: int, size: int) -> np.ndarray:
    rng = make_rng(seed, _TAG[kind], index)
    if kind == "k1":
        return np.asarray(sample_k1_geometric(GeometricMeasureSpec(*args), rng, size))
    if kind == "geom":
        return sample_geometric_partition(GeometricMeasureSpec(*args), rng, size)
    if kind == "general":
        n, m, alpha = args
        return sample_general(dirichlet_measure(n, m, alpha), rng, size)
    if kind == "dirichlet_ref":
        m, alpha = args
        return sample_dirichlet_order_stats(m, alpha, rng, size)
    raise ValueError(kind)


def draw(kind: str, args: tuple, seed: int, total: int, workers: int = 1) -> np.ndarray:
    """``total`` draws of ``kind`` assembled from per-chunk streams in chunk order."""
    sizes = [CHUNK] * (total // CHUNK) + ([total % CHUNK] if total % CHUNK else [])
    jobs = [(kind, args, seed, i, s) for i, s in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_draw_chunk, *zip(*jobs)))
    else:
        parts = [_draw_chunk(*job) for job in jobs]
    return np.concatenate(parts, axis=0)


# -- experiments ------------------------------------------------------------------------

def _limit_spec(p) -> LimitLawSpec:
    return LimitLawSpec.for_n(p["n"], p["m"], p["q"], p.get("tol", 1e-12))


def _exp_joint(p, seed, workers):
    n, m, q = p["n"], p["m"], p["q"]
    spec = _limit_spec(p)
    parts = draw("geom", (n, m, q), seed, p["sample_count"], workers)
    offsets = parts - ceil_div(n, m)
    emp = Counter(map(tuple, offsets.tolist()))
    N = len(offsets)
    seen_mass = 0.0
    diff = 0.0
    for vec, c in emp.items():
        r = limit_joint_prob(spec, vec)
        seen_mass += r
        diff += abs(c / N - r)
    tv = 0.5 * (diff + max(0.0, 1.0 - seen_mass))
    stats = {"tv_distance": tv, "distinct_vectors": len(emp), "j": spec.j}
    tables = {"joint_offsets": sorted((",".join(map(str, k)), v) for k, v in emp.items())}
    return stats, [Check("tv_distance", tv, THRESHOLDS[ExperimentId.THM_1_1_JOINT].value)], tables


def _exp_marginal(p, seed, workers):
    n, m, q = p["n"], p["m"], p["q"]
    limit = limit_pmf_k1(_limit_spec(p))
    exact = k1_pmf(n, m, q)
    k1 = draw("k1", (n, m, q), seed, p["sample_count"], workers)
    off = k1 - ceil_div(n, m)
    tv = tv_distance(Counter(off.tolist()), limit)
    exact_tv = tv_distance(exact, limit)
    stats = {"tv_distance": tv, "exact_tv_distance": exact_tv, "limit_tail_bound": limit.tail_bound}
    checks = [Check("tv_distance", tv, THRESHOLDS[ExperimentId.COR_1_2_MARGINAL].value),
              Check("exact_tv_distance", exact_tv, 0.01)]
    return stats, checks, {"k1_offsets": value_counts(off)}


def _exp_conditional(p, seed, workers):
    n, m, q = p["n"], p["m"], p["q"]
    parts = draw("geom", (n, m, q), seed, p["sample_count"], workers)
    strata: dict[int, Counter] = {}
    for row in parts.tolist():
        strata.setdefault(row[0], Counter())[tuple(row[1:])] += 1
    pvals = {}
    for k1 in sorted(strata):
        hits = sum(strata[k1].values())
        cells = counting.count_with_largest(n, m, k1)
        if hits < p["min_stratum"] or cells < 2:
            continue
        if cells > 10 ** 6:
            continue
        obs = list(strata[k1].values()) + [0] * (cells - len(strata[k1]))
        pvals[k1] = chi2_uniform_pvalue(obs)
    min_p = min(pvals.values()) if pvals else 1.0
    stats = {"chi2_pvalue": min_p, "strata_tested": len(pvals),
             "stratum_pvalues": [[k, v] for k, v in sorted(pvals.items())]}
    check = Check("chi2_pvalue", min_p, THRESHOLDS[ExperimentId.COR_1_2_CONDITIONAL].value, "gt")
    tables = {"k1_strata": sorted((k, sum(c.values())) for k, c in strata.items())}
    return stats, [check], tables


def _standardise(k1, n, m, gamma):
    return (k1 - ceil_div(n, m) - gamma * m) / math.sqrt(m)


def _clt_at(n, m, q, seed, count, workers):
    par = clt_params(q)
    pmf = k1_pmf(n, m, q)
    cutoff = identity_cutoff(n, m)
    beyond = float(pmf.probs[cutoff + 1:].sum()) if cutoff + 1 < len(pmf.probs) else 0.0
    k1 = draw("k1", (n, m, q), seed, count, workers)
    z = _standardise(k1, n, m, par.gamma)
    ks = ks_statistic(z, lambda x: clt_cdf(x, q))
    xs = (np.arange(len(pmf.probs)) - par.gamma * m) / math.sqrt(m)
    exact_ks = ks_discrete_vs_cdf(xs, pmf.probs, lambda x: clt_cdf(x, q))
    return ks, exact_ks, beyond, z


def _exp_clt(p, seed, workers):
    n, m, q = p["n"], p["m"], p["q"]
    thr = THRESHOLDS[ExperimentId.THM_1_3_CLT].value
    ks, exact_ks, beyond, z = _clt_at(n, m, q, seed, p["sample_count"], workers)
    par = clt_params(q)
    stats = {"ks_statistic": ks, "exact_ks": exact_ks, "mass_beyond_cutoff": beyond,
             "gamma": par.gamma, "sigma2": par.sigma2,
             "mean_standardised": float(z.mean())}
    checks = [Check("ks_statistic", ks, thr)]
    tables = {"standardised": value_counts(z)}
    rule = "primary check"
    if ks > thr and p.get("escalate_m"):
        rule = "escalated: KS strictly decreasing over m"
        ms = [m] + list(p["escalate_m"])
        seq = []
        for mm in ms:
            nn = n if mm == m else 200 * mm ** 3
            ks_m, exact_m, _, _ = _clt_at(nn, mm, q, seed, p["escalate_samples"], workers)
            stats[f"escalated_ks_m{mm}"] = ks_m
            stats[f"escalated_exact_ks_m{mm}"] = exact_m
            seq.append(ks_m)
        increases = sum(1 for a, b in zip(seq, seq[1:]) if not b < a)
        checks.append(Check("escalation_nondecreasing_steps", increases, 0))
    return stats, checks, tables, rule


def _general_k1(p, seed, workers, n, m, alpha):
    sam = draw("general", (n, m, alpha), seed, p["sample_count"], workers)
    ref = draw("dirichlet_ref", (m, alpha), seed, p["sample_count"], workers)
    return sam, ref


def _exp_general(eid):
    def run(p, seed, workers):
        n, m, alpha = p["n"], p["m"], p["alpha"]
        sam, ref = _general_k1(p, seed, workers, n, m, alpha)
        ks = ks_two_sample(sam[:, 0] / n, ref[:, 0])
        stats = {"ks_statistic": ks, "mean_k1_over_n": float(sam[:, 0].mean() / n),
                 "reference_mean": float(ref[:, 0].mean())}
        return stats, [Check("ks_statistic", ks, THRESHOLDS[eid].value)], {"k1": value_counts(sam[:, 0])}
    return run


def _exp_transform(p, seed, workers):
    n, m, alpha = p["n"], p["m"], p["alpha"]
    sam, ref = _general_k1(p, seed, workers, n, m, alpha)
    x = (sam / n) ** alpha
    ref_x = ref ** alpha
    err = float(np.max(np.abs((x ** (1.0 / alpha)).sum(axis=1) - 1.0)))
    ks = [ks_two_sample(x[:, i], ref_x[:, i]) for i in range(m)]
    stats = {"ks_statistic": max(ks), "ks_per_coordinate": ks, "max_abs_err": err}
    checks = [Check("ks_statistic", max(ks), THRESHOLDS[ExperimentId.COR_1_6_TRANSFORM].value),
              Check("max_abs_err", err, 1e-10)]
    return stats, checks, {"k1": value_counts(sam[:, 0])}


def _exp_szekeres(p, seed, workers):
    errs = {}
    for n in p["n_values"]:
        for u in p["u_values"]:
            k = max(1, round(u * math.sqrt(n)))
            exact = log_int(counting.count_at_most(n, k))
            errs[(n, u)] = abs(szekeres_log_estimate(n, k) - exact) / exact
    n_top = max(p["n_values"])
    worst = max(errs[(n_top, u)] for u in p["u_values"])
    at_one = [errs[(n, 1.0)] for n in sorted(p["n_values"]) if (n, 1.0) in errs]
    bumps = sum(1 for a, b in zip(at_one, at_one[1:]) if not b < a)
    stats = {"max_rel_err": worst, "non_monotone_steps": bumps}
    for (n, u), e in sorted(errs.items()):
        stats[f"rel_err_n{n}_u{u}"] = e
    checks = [Check("max_rel_err", worst, THRESHOLDS[ExperimentId.SZEKERES_ACCURACY].value),
              Check("non_monotone_steps", bumps, 0)]
    return stats, checks, {}


def identity_violations(n_max: int, m_min: int = 2, m_max: int = 12) -> dict:
    """Count failures of the fixed-largest-part identity, bound and sum rule."""
    eq = ineq = total = checked = bad_j = 0
    for n in range(1, n_max + 1):
        for m in range(m_min, min(m_max, n) + 1):
            c = ceil_div(n, m)
            j = residue_j(n, m)
            cut = identity_cutoff(n, m)
            prof = counting.largest_part_profile(n, m)
            for l, cnt in enumerate(prof):
                ref = counting.count_at_most(m * (l + 1) - j, m - 1)
                checked += 1
                if l <= cut:
                    eq += cnt != ref
                else:
                    ineq += cnt > ref
            total += sum(prof) != counting.count_at_most(n, m)
            bad_j += not 1 <= j <= m
    return {"equality_violations": eq, "inequality_violations": ineq,
            "sum_violations": total, "residue_violations": bad_j, "cases_checked": checked}


def _exp_identity(p, seed, workers):
    v = identity_violations(p["n_max"], p["m_min"], p["m_max"])
    bad = sum(v[k] for k in v if k.endswith("_violations"))
    stats = dict(v, violations=bad)
    return stats, [Check("violations", bad, 0)], {}


def _exp_msweep(p, seed, workers):
    alpha = p["alpha"]
    stats, kss, tables = {}, [], {}
    for m in p["m_values"]:
        n = 200 * m ** 3
        sam, ref = _general_k1(p, seed, workers, n, m, alpha)
        ks = ks_two_sample(sam[:, 0] / n, ref[:, 0])
        stats[f"ks_m{m}"] = ks
        kss.append(ks)
        tables[f"k1_m{m}"] = value_counts(sam[:, 0])
    stats["ks_statistic"] = max(kss)
    return stats, [Check("ks_statistic", max(kss), THRESHOLDS[ExperimentId.M_SWEEP_THM_1_5].value)], tables


_RUNNERS = {
    ExperimentId.THM_1_1_JOINT: _exp_joint,
    ExperimentId.COR_1_2_MARGINAL: _exp_marginal,
    ExperimentId.COR_1_2_CONDITIONAL: _exp_conditional,
    ExperimentId.THM_1_3_CLT: _exp_clt,
    ExperimentId.THM_1_4_GENERAL: _exp_general(ExperimentId.THM_1_4_GENERAL),
    ExperimentId.COR_1_5_DIRICHLET: _exp_general(ExperimentId.COR_1_5_DIRICHLET),
    ExperimentId.COR_1_6_TRANSFORM: _exp_transform,
    ExperimentId.SZEKERES_ACCURACY: _exp_szekeres,
    ExperimentId.LEMMA_2_1_IDENTITY: _exp_identity,
    ExperimentId.M_SWEEP_THM_1_5: _exp_msweep,
}


def resolve_params(config: ExperimentConfig) -> dict:
    params = dict(DEFAULTS[config.experiment_id])
    unknown = set(config.params) - set(params)
    if unknown:
        raise ValueError(f"unknown parameters for {config.experiment_id.value}: {sorted(unknown)}")
    params.update(config.params)
    if config.experiment_id in SAMPLING and params["sample_count"] < MIN_SAMPLES:
        raise ValueError(f"sample_count must be at least {MIN_SAMPLES}")
    # the convergence claims cover alpha = 1 and alpha > 2 only
    alpha = params.get("alpha")
    if alpha is not None and not (alpha == 1.0 or alpha > 2.0):
        raise ValueError(f"alpha must be 1 or greater than 2 for a verification run, got {alpha}")
    return params


def _write_table(path: Path, rows, header="value,count") -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for v, c in rows:
            fh.write(f"{v},{c}\n")


def run_experiment(config: ExperimentConfig, out_dir=None, workers: int = 1) -> Report:
    """Run one experiment. Budget refusals come back as a refused report."""
    params = resolve_params(config)
    eid = config.experiment_id
    report = Report(eid, CLAIMS[eid], BUILD_ID, config.seed, params)
    t0 = time.perf_counter()
    tables = {}
    try:
        out = _RUNNERS[eid](params, config.seed, workers)
        if len(out) == 4:
            stats, checks, tables, report.pass_rule = out
        else:
            stats, checks, tables = out
        report.statistics = stats
        report.checks = checks
        if report.pass_rule.startswith("escalated"):
            report.passed = checks[-1].ok
        else:
            report.passed = all(c.ok for c in checks)
    except (RefusalError, counting.CacheFrozenError) as exc:
        report.refused = True
        report.refusal = f"{type(exc).__name__}: {exc}"
        report.passed = False
    report.runtime_ms = int(round(1000 * (time.perf_counter() - t0)))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = eid.value.lower()
        for name, rows in sorted(tables.items()):
            fname = f"{stem}.{name}.csv"
            _write_table(out / fname, rows)
            report.artifacts.append(fname)
        report.write(out)
    return report


def calibrate_threshold(experiment_id, seeds=range(20), **params) -> dict:
    """Seed sweep: primary statistic per seed and the suggested threshold ``1.5 * max``."""
    values = []
    for s in seeds:
        rep = run_experiment(ExperimentConfig(experiment_id, params, s))
        values.append(rep.primary.value)
    return {"values": values, "max": max(values), "threshold": 1.5 * max(values)}
