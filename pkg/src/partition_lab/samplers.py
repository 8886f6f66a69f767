"""Exact samplers on ``P_n(m)``.

Two measures are supported:

* geometric: ``P(kappa) ∝ q^{k1}``. The largest part is drawn from its exact
  marginal; the rest is then uniform on the partitions of ``n - k1`` into at
  most ``m - 1`` parts bounded by ``k1``, which is the exact conditional law
  because the weight only sees ``k1``.
* general: ``P(kappa) ∝ f(k/n)`` for a density ``f`` on the ordered simplex,
  by enumeration when ``P_n(m)`` is small and by rejection from the uniform
  law otherwise.

Uniform draws are exact: a uniform big-integer rank is unranked through
count tables, so no floating point enters the combinatorial step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from . import counting
from .counting import Partition, ceil_div, identity_cutoff, log_int, residue_j
from .limits import DiscretePmf, dirichlet_log_norm, log_tail_bound
from .rng import as_rng, randbelow

ENUMERATION_LIMIT = 2_000_000
TABLE_CELL_LIMIT = 100_000_000
REJECTION_MIN_RATE = 1e-6
REJECTION_PATIENCE = 10_000_000
K1_TAIL_TOL = 1e-17
STRATUM_TABLE = 4096


class RefusalError(RuntimeError):
    """A request exceeds a computational budget; nothing was computed."""


class BudgetExceeded(RefusalError):
    pass


class AcceptanceRateError(RefusalError):
    pass


class EmptySetError(ValueError):
    """Sampling from an empty set of partitions."""


class SupBoundError(RuntimeError):
    """A density exceeded its declared upper bound at a queried point."""


# -- specs ------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometricMeasureSpec:
    """``P(kappa) = c q^{k1}`` on ``P_n(m)``."""

    n: int
    m: int
    q: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 2 <= self.m <= self.n:
            raise ValueError(f"need 2 <= m <= n, got m={self.m}, n={self.n}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")

    @property
    def k1_min(self) -> int:
        return ceil_div(self.n, self.m)


@dataclass(frozen=True)
class GeneralMeasureSpec:
    """``P(kappa) = c f(k_1/n, ..., k_m/n)`` on ``P_n(m)``.

    ``density`` maps an array of shape ``(batch, m)`` of nonincreasing
    simplex points to ``batch`` nonnegative values. Set ``vectorized=False``
    to pass a function of a single point instead.
    """

    n: int
    m: int
    density: Callable
    sup_bound: float
    lipschitz_hint: float | None = None
    vectorized: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 2 <= self.m <= self.n:
            raise ValueError(f"need 2 <= m <= n, got m={self.m}, n={self.n}")
        if not self.sup_bound > 0.0:
            raise ValueError("sup_bound must be positive")
        if self.lipschitz_hint is not None and not self.lipschitz_hint > 0:
            raise ValueError("lipschitz_hint must be positive")

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.vectorized:
            vals = np.asarray(self.density(points), dtype=np.float64).reshape(-1)
        else:
            vals = np.array([float(self.density(p)) for p in points])
        if vals.shape[0] != points.shape[0]:
            raise ValueError("density returned the wrong number of values")
        bad = ~np.isfinite(vals) | (vals < 0)
        if bad.any():
            i = int(np.argmax(bad))
            raise ValueError(f"density is {vals[i]} at {tuple(points[i])}")
        return vals


def dirichlet_kernel(m: int, alpha: float):
    """Ordered Dirichlet(alpha) density as a vectorised callable, plus its supremum."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    log_norm = dirichlet_log_norm(m, alpha)

    def density(y):
        y = np.asarray(y, dtype=np.float64)
        if alpha == 1.0:
            return np.full(y.shape[0], math.exp(log_norm))
        with np.errstate(divide="ignore"):
            logs = np.log(y).sum(axis=1)
        return np.exp(log_norm + (alpha - 1.0) * logs)

    if alpha >= 1.0:
        sup = math.exp(log_norm - m * (alpha - 1.0) * math.log(m))
    else:
        sup = math.inf
    return density, sup


def dirichlet_measure(n: int, m: int, alpha: float) -> GeneralMeasureSpec:
    density, sup = dirichlet_kernel(m, alpha)
    if not math.isfinite(sup):
        raise ValueError("the Dirichlet density is unbounded for alpha < 1")
    return GeneralMeasureSpec(n, m, density, sup)


# -- enumeration ------------------------------------------------------------------

def _gen(n: int, m: int, cap: int):
    if n == 0:
        yield ()
        return
    if m == 0:
        return
    for first in range(min(n, cap), ceil_div(n, m) - 1, -1):
        for rest in _gen(n - first, m - 1, first):
            yield (first,) + rest


def _check_enumeration(n: int, m: int, limit: int) -> int:
    total = counting.count_at_most(n, m)
    if total > limit:
        raise BudgetExceeded(f"|P_{n}({m})| = {total} exceeds the enumeration limit {limit}")
    return total


def enumerate_partitions(n: int, m: int, limit: int = ENUMERATION_LIMIT) -> Iterator[Partition]:
    """Every partition of ``n`` into at most ``m`` parts, lexicographically decreasing."""
    if n < 0 or m < 0:
        raise ValueError("n and m must be nonnegative")
    _check_enumeration(n, m, limit)
    cap = max(m, 1)
    for parts in _gen(n, m, n):
        yield Partition(parts, n, cap)


@lru_cache(maxsize=8)
def enumerate_array(n: int, m: int, limit: int = ENUMERATION_LIMIT) -> np.ndarray:
    """``P_n(m)`` as a zero-padded ``(count, m)`` integer array, same order."""
    total = _check_enumeration(n, m, limit)
    out = np.zeros((total, m), dtype=np.int64)
    for i, parts in enumerate(_gen(n, m, n)):
        out[i, : len(parts)] = parts
    out.setflags(write=False)
    return out


# -- uniform unranking ------------------------------------------------------------

def unrank_at_most(total: int, parts: int, rank: int, cache=None) -> tuple[int, ...]:
    """The ``rank``-th partition of ``total`` into at most ``parts`` parts.

    Walks the conjugate partition: at level ``k`` it picks how many parts of
    size exactly ``k`` the conjugate has, using
    ``#{multiplicity <= R} = |P_N(k)| - |P_{N-(R+1)k}(k)|``.
    """
    cache = cache or counting.DEFAULT_CACHE
    parts = min(parts, total)
    mult = [0] * (parts + 1)
    N = total
    for k in range(parts, 0, -1):
        if N == 0:
            break
        if k == 1:
            mult[1] = N
            N = 0
            break
        row = cache.row(k, N)
        target = row[N] - rank
        lo, hi = 0, N // k
        while lo < hi:
            mid = (lo + hi) // 2
            idx = N - (mid + 1) * k
            if idx < 0 or row[idx] < target:
                hi = mid
            else:
                lo = mid + 1
        R = lo
        rank -= row[N] - row[N - R * k]
        mult[k] = R
        N -= R * k
    if N != 0 or rank != 0:
        raise ArithmeticError("rank out of range")
    out = []
    acc = 0
    for i in range(parts, 0, -1):
        acc += mult[i]
        out.append(acc)
    return tuple(x for x in reversed(out) if x > 0)


def unrank_bounded(total: int, parts: int, cap: int, rank: int, cache=None) -> tuple[int, ...]:
    """The ``rank``-th partition of ``total`` into at most ``parts`` parts, each ``<= cap``.

    Chooses the largest part ``h`` by binary search on the cumulative counts
    ``B(N, m, h)``; once the cap no longer binds, switches to
    :func:`unrank_at_most`.
    """
    cache = cache or counting.DEFAULT_CACHE
    out: list[int] = []
    N, m, b = total, parts, cap
    while N > 0:
        if b >= N:
            return tuple(out) + unrank_at_most(N, m, rank, cache)
        lo, hi = ceil_div(N, m), b
        # smallest h with B(N, m, h) > rank
        while lo < hi:
            mid = (lo + hi) // 2
            if cache.bounded(N, m, mid) > rank:
                hi = mid
            else:
                lo = mid + 1
        h = lo
        rank -= cache.bounded(N, m, h - 1)
        out.append(h)
        N -= h
        m -= 1
        b = h
    return tuple(out)


def sample_uniform_bounded(total: int, parts: int, cap: int, rng=None, cache=None) -> Partition:
    """Uniform draw from the partitions of ``total`` into ``<= parts`` parts, each ``<= cap``."""
    cache = cache or counting.DEFAULT_CACHE
    size = cache.bounded(total, parts, cap)
    if size == 0:
        raise EmptySetError(f"no partition of {total} into at most {parts} parts bounded by {cap}")
    rank = randbelow(as_rng(rng), size)
    return Partition(unrank_bounded(total, parts, cap, rank, cache), total, max(parts, 1))


# -- geometric measure ------------------------------------------------------------

@lru_cache(maxsize=64)
def k1_pmf(n: int, m: int, q: float, tail_tol: float = K1_TAIL_TOL) -> DiscretePmf:
    """Exact law of ``k1 - ceil(n/m)`` under ``P(kappa) ∝ q^{k1}``.

    Weights ``q^l count_with_largest(n, m, ceil(n/m) + l)`` are formed in the
    log domain. Offsets up to the cutoff use the closed-form count
    ``|P_{m(l+1)-j}(m-1)|``; larger ones use the bounded count. The support
    is cut once the remaining mass is certified below ``tail_tol`` relative
    to the kept mass (the bound dominates every omitted weight).
    """
    spec = GeometricMeasureSpec(n, m, q)
    cache = counting.DEFAULT_CACHE
    c = spec.k1_min
    l_all = n - c
    j = residue_j(n, m)
    cutoff = identity_cutoff(n, m)
    logq = math.log(q)
    logs: list[float] = []
    L = min(l_all, 64)
    while True:
        top_exact = min(L, cutoff)
        if top_exact >= len(logs):
            row = cache.row(m - 1, m * (top_exact + 1) - j)
        for l in range(len(logs), L + 1):
            if l <= cutoff:
                cnt = row[m * (l + 1) - j]
            else:
                cnt = cache.bounded(n - c - l, m - 1, c + l)
            logs.append(l * logq + log_int(cnt) if cnt > 0 else -math.inf)
        arr = np.array(logs)
        mx = arr.max()
        log_z = mx + math.log(np.exp(arr - mx).sum())
        if L == l_all:
            tail = 0.0
            break
        log_tail = log_tail_bound(q, m, L + 1)
        if log_tail - log_z <= math.log(tail_tol):
            tail = math.exp(log_tail - log_z)
            break
        L = min(l_all, 2 * L)
    probs = np.exp(arr - log_z)
    meta = {"law": "k1_offset_exact", "n": n, "m": m, "q": repr(q), "k1_min": c,
            "identity_cutoff": cutoff}
    return DiscretePmf(0, probs, tail, meta)


def sample_k1_geometric(spec: GeometricMeasureSpec, rng=None, size=None):
    """Largest part ``k1`` drawn from its exact marginal by inverse CDF."""
    pmf = k1_pmf(spec.n, spec.m, spec.q)
    cdf = pmf.cdf()
    rng = as_rng(rng)
    u = rng.random(size) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, len(cdf) - 1)
    if size is None:
        return int(spec.k1_min + idx)
    return spec.k1_min + idx.astype(np.int64)


def _check_table_budget(n: int, m: int) -> None:
    if n * m > TABLE_CELL_LIMIT:
        raise BudgetExceeded(
            f"conditional sampling needs about n*m = {n * m} table cells, limit {TABLE_CELL_LIMIT}"
        )


def _stratum_table(total: int, parts: int, cap: int) -> np.ndarray:
    out = np.zeros((counting.count_bounded(total, parts, cap), parts), dtype=np.int64)
    for i, p in enumerate(_gen(total, parts, cap)):
        out[i, : len(p)] = p
    return out


def sample_geometric_partition(spec: GeometricMeasureSpec, rng=None, size=None):
    """Exact draw from ``P(kappa) ∝ q^{k1}``.

    Returns a :class:`Partition`, or a zero-padded ``(size, m)`` array when
    ``size`` is given. Within a batch, draws sharing a largest part whose
    stratum has at most ``STRATUM_TABLE`` members are read from an
    enumerated table; larger strata are unranked.
    """
    _check_table_budget(spec.n, spec.m)
    rng = as_rng(rng)
    cache = counting.DEFAULT_CACHE
    n, m = spec.n, spec.m
    k1s = np.atleast_1d(sample_k1_geometric(spec, rng, 1 if size is None else size))
    out = np.zeros((len(k1s), m), dtype=np.int64)
    out[:, 0] = k1s
    for k1 in np.unique(k1s):
        k1 = int(k1)
        idx = np.flatnonzero(k1s == k1)
        rest_total = n - k1
        count = cache.bounded(rest_total, m - 1, k1)
        if count <= STRATUM_TABLE and len(idx) > 1:
            table = _stratum_table(rest_total, m - 1, k1)
            out[idx, 1:] = table[rng.integers(0, count, size=len(idx))]
            continue
        for i in idx:
            rest = unrank_bounded(rest_total, m - 1, k1, randbelow(rng, count), cache)
            out[i, 1: 1 + len(rest)] = rest
    if size is None:
        return Partition(tuple(int(x) for x in out[0] if x > 0), n, m)
    return out


# -- general measure ---------------------------------------------------------------

_WEIGHT_CACHE: dict = {}


def _enumerated_cdf(spec: GeneralMeasureSpec):
    key = (spec.n, spec.m, spec.density, spec.vectorized)
    hit = _WEIGHT_CACHE.get(key)
    if hit is not None:
        return hit
    table = enumerate_array(spec.n, spec.m)
    w = spec.evaluate(table / spec.n)
    over = w > spec.sup_bound
    if over.any():
        i = int(np.argmax(over))
        raise SupBoundError(
            f"density {w[i]!r} exceeds sup_bound {spec.sup_bound!r} at {tuple(table[i])}"
        )
    keep = np.flatnonzero(w > 0)
    if keep.size == 0:
        raise EmptySetError("density vanishes on every partition")
    cdf = np.cumsum(w[keep])
    if len(_WEIGHT_CACHE) >= 8:
        _WEIGHT_CACHE.clear()
    _WEIGHT_CACHE[key] = (table[keep], cdf)
    return table[keep], cdf


def _rejection(spec: GeneralMeasureSpec, rng, size: int, batch: int = 4096) -> np.ndarray:
    cache = counting.DEFAULT_CACHE
    total = cache.at_most(spec.n, spec.m)
    out = np.zeros((size, spec.m), dtype=np.int64)
    got = proposed = 0
    while got < size:
        b = min(batch, max(64, 2 * (size - got)))
        props = np.zeros((b, spec.m), dtype=np.int64)
        for i in range(b):
            parts = unrank_at_most(spec.n, spec.m, randbelow(rng, total), cache)
            props[i, : len(parts)] = parts
        w = spec.evaluate(props / spec.n)
        over = w > spec.sup_bound
        if over.any():
            i = int(np.argmax(over))
            raise SupBoundError(
                f"density {w[i]!r} exceeds sup_bound {spec.sup_bound!r} at {tuple(props[i])}"
            )
        acc = rng.random(b) * spec.sup_bound < w
        proposed += b
        take = props[acc][: size - got]
        out[got: got + len(take)] = take
        got += len(take)
        if proposed >= REJECTION_PATIENCE and got / proposed < REJECTION_MIN_RATE:
            raise AcceptanceRateError(
                f"acceptance rate {got / proposed:.3g} after {proposed} proposals "
                f"(accepted {got}); sup_bound {spec.sup_bound!r} is likely far too loose"
            )
    return out


def sample_general(spec: GeneralMeasureSpec, rng=None, size=None, method: str = "auto"):
    """Exact draw from ``P(kappa) ∝ f(k/n)``.

    ``method`` is ``"enumerate"``, ``"reject"`` or ``"auto"`` (enumerate when
    ``|P_n(m)|`` is at most the enumeration limit). Returns a
    :class:`Partition`, or a zero-padded ``(size, m)`` array when ``size`` is
    given.
    """
    rng = as_rng(rng)
    if method == "auto":
        small = counting.count_at_most(spec.n, spec.m) <= ENUMERATION_LIMIT
        method = "enumerate" if small else "reject"
    k = 1 if size is None else int(size)
    if method == "enumerate":
        table, cdf = _enumerated_cdf(spec)
        idx = np.searchsorted(cdf, rng.random(k) * cdf[-1], side="right")
        out = table[np.minimum(idx, len(cdf) - 1)]
    elif method == "reject":
        out = _rejection(spec, rng, k)
    else:
        raise ValueError(f"unknown method {method!r}")
    if size is None:
        return Partition(tuple(int(x) for x in out[0] if x > 0), spec.n, spec.m)
    return out


# -- reference ---------------------------------------------------------------------

def sample_dirichlet_order_stats(m: int, alpha: float, rng=None, size=None):
    """Decreasingly sorted symmetric Dirichlet(alpha) vector(s) from normalised gammas."""
    if m < 2:
        raise ValueError("m must be >= 2")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    rng = as_rng(rng)
    k = 1 if size is None else int(size)
    g = rng.standard_gamma(alpha, size=(k, m))
    x = g / g.sum(axis=1, keepdims=True)
    x = -np.sort(-x, axis=1)
    return x[0] if size is None else x
