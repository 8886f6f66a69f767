"""Distances between empirical and reference laws."""

from __future__ import annotations

from collections import Counter
from collections.abc import Mapping

import numpy as np
from scipy import stats

from ..limits import DiscretePmf


def _as_probs(x) -> dict:
    if isinstance(x, DiscretePmf):
        return x.as_dict()
    if isinstance(x, Counter):
        total = sum(x.values())
        if total <= 0:
            raise ValueError("empty table")
        return {k: v / total for k, v in x.items()}
    if isinstance(x, Mapping):
        return dict(x)
    arr = np.asarray(x, dtype=np.float64).reshape(-1)
    return {i: float(p) for i, p in enumerate(arr)}


def tv_distance(p, r) -> float:
    """``0.5 * sum |p_i - r_i|`` over the union of supports.

    Accepts :class:`DiscretePmf`, a mapping value -> probability, a
    :class:`collections.Counter` of raw counts (normalised here), or an
    index-aligned sequence of probabilities.
    """
    a, b = _as_probs(p), _as_probs(r)
    keys = a.keys() | b.keys()
    return 0.5 * float(sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys))


def ks_statistic(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance of ``samples`` from ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=np.float64).reshape(-1))
    n = x.size
    if n == 0:
        raise ValueError("need at least one sample")
    F = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(i / n - F)), np.max(np.abs((i - 1) / n - F))))


def ks_two_sample(a, b) -> float:
    """Two-sample KS distance ``sup |F_a - F_b|`` (ties handled exactly)."""
    return float(stats.ks_2samp(np.asarray(a), np.asarray(b), method="asymp").statistic)


def ks_discrete_vs_cdf(values, probs, cdf) -> float:
    """KS distance between a finite discrete law and a continuous CDF."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values)
    values = values[order]
    probs = np.asarray(probs, dtype=np.float64)[order]
    probs = probs / probs.sum()
    upper = np.cumsum(probs)
    lower = upper - probs
    F = np.asarray(cdf(values), dtype=np.float64)
    return float(max(np.max(np.abs(upper - F)), np.max(np.abs(lower - F))))


def chi2_uniform_pvalue(observed) -> float:
    """Chi-square goodness of fit of ``observed`` counts against equal cell probabilities."""
    observed = np.asarray(observed, dtype=np.float64)
    if observed.size < 2:
        return 1.0
    return float(stats.chisquare(observed).pvalue)


def chi2_pvalue(observed, expected_probs) -> float:
    observed = np.asarray(observed, dtype=np.float64)
    exp = np.asarray(expected_probs, dtype=np.float64)
    exp = exp / exp.sum() * observed.sum()
    return float(stats.chisquare(observed, exp).pvalue)


def value_counts(values) -> list[tuple]:
    """Sorted ``(value, count)`` rows of an empirical table."""
    c = Counter(values.tolist() if isinstance(values, np.ndarray) else values)
    return sorted(c.items())
