"""Limit laws for random restricted partitions.

* fixed ``m``, geometric weight ``q^{k1}``: the limiting pmf of the offsets
  ``k_i - ceil(n/m)`` and its first-coordinate marginal;
* growing ``m``: the normal law of the standardised largest part;
* density weight: ordered Dirichlet densities and the power transform that
  flattens them.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, ndtr

from . import counting
from .analysis import clt_params
from .counting import HR_CONSTANT, CountCache, count_at_most, log_int


@dataclass
class DiscretePmf:
    """Probabilities on ``base_offset, base_offset+1, ...``.

    ``tail_bound`` bounds the mass left out by truncation. Probabilities are
    normalised over the kept support, so each one overstates the untruncated
    value by a relative factor of at most ``tail_bound``.
    """

    base_offset: int
    probs: np.ndarray
    tail_bound: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if np.any(self.probs < 0):
            raise ValueError("probabilities must be nonnegative")

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.base_offset, self.base_offset + len(self.probs))

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(p) for k, p in zip(self.support, self.probs)}

    def prob(self, value: int) -> float:
        i = value - self.base_offset
        return float(self.probs[i]) if 0 <= i < len(self.probs) else 0.0

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs) / self.probs.sum())

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def to_csv(self) -> str:
        out = io.StringIO()
        for key in sorted(self.meta):
            out.write(f"# {key}={self.meta[key]}\n")
        out.write(f"# tail_bound={self.tail_bound!r}\n")
        out.write("offset,probability\n")
        for k, p in zip(self.support, self.probs):
            out.write(f"{int(k)},{float(p)!r}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DiscretePmf":
        meta, rows, tail = {}, [], 0.0
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                if key == "tail_bound":
                    tail = float(val)
                else:
                    meta[key] = val
            elif line and not line.startswith("offset"):
                k, p = line.split(",")
                rows.append((int(k), float(p)))
        if not rows:
            raise ValueError("empty pmf table")
        base = rows[0][0]
        if [k for k, _ in rows] != list(range(base, base + len(rows))):
            raise ValueError("pmf offsets must be consecutive")
        return cls(base, [p for _, p in rows], tail, meta)


@dataclass(frozen=True)
class LimitLawSpec:
    """Parameters of the fixed-``m`` limit along ``n = j (mod m)``."""

    m: int
    j: int
    q: float
    tol: float = 1e-12

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if not 1 <= self.j <= self.m:
            raise ValueError(f"j must lie in [1, m], got {self.j}")
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")

    @classmethod
    def for_n(cls, n: int, m: int, q: float, tol: float = 1e-12) -> "LimitLawSpec":
        return cls(m, counting.residue_j(n, m), q, tol)


def log_tail_bound(q: float, m: int, start: int) -> float:
    """Log of an upper bound on ``sum_{l >= start} q^l |P_{m(l+1)-j}(m-1)|``.

    Uses ``|P_N(m-1)| <= p(N) <= exp(K sqrt(N))`` and ``N <= m(l+1)``. From
    ``start`` on, consecutive term bounds shrink by at least
    ``r = exp(-lam + K sqrt(m) / (2 sqrt(start+1)))``; when ``r < 1`` the tail
    is below a geometric series. Returns ``inf`` while ``r >= 1``.
    """
    lam = -math.log(q)
    log_r = -lam + HR_CONSTANT * math.sqrt(m) / (2.0 * math.sqrt(start + 1))
    if log_r >= 0.0:
        return math.inf
    log_first = -lam * start + HR_CONSTANT * math.sqrt(m * (start + 1))
    return log_first - math.log(-math.expm1(log_r))


def _logsumexp(x: np.ndarray) -> float:
    mx = float(np.max(x))
    return mx + math.log(float(np.sum(np.exp(x - mx))))


@lru_cache(maxsize=256)
def _limit_terms(m: int, j: int, q: float, tol: float):
    """Log terms ``l log q + log|P_{ml+m-j}(m-1)|`` until the tail is certified."""
    logq = math.log(q)
    L = 32
    while True:
        row = counting.DEFAULT_CACHE.row(m - 1, m * (L + 1) - j)
        logs = np.array([l * logq + log_int(row[m * (l + 1) - j]) for l in range(L + 1)])
        log_z = _logsumexp(logs)
        tail = log_tail_bound(q, m, L + 1)
        if tail - log_z <= math.log(tol):
            return logs, log_z, math.exp(tail - log_z)
        L *= 2


def limit_pmf_k1(spec: LimitLawSpec) -> DiscretePmf:
    """Limiting pmf of ``k1 - ceil(n/m)``.

    ``f(l) = q^l |P_{ml+m-j}(m-1)| / Z``, truncated once the certified tail
    mass is at most ``spec.tol``.
    """
    logs, log_z, tail = _limit_terms(spec.m, spec.j, spec.q, spec.tol)
    probs = np.exp(logs - log_z)
    meta = {"law": "k1_offset_limit", "m": spec.m, "j": spec.j, "q": repr(spec.q), "tol": repr(spec.tol)}
    return DiscretePmf(0, probs, tail, meta)


def limit_normalizer(spec: LimitLawSpec) -> tuple[float, float]:
    """``(log Z, relative tail bound)`` for ``Z = sum_l q^l |P_{m(l+1)-j}(m-1)|``."""
    _, log_z, tail = _limit_terms(spec.m, spec.j, spec.q, spec.tol)
    return log_z, tail


def in_joint_support(spec: LimitLawSpec, l_vec) -> bool:
    l_vec = [int(x) for x in l_vec]
    if len(l_vec) != spec.m or l_vec[0] < 0:
        return False
    if any(a < b for a, b in zip(l_vec, l_vec[1:])):
        return False
    return sum(l_vec) == spec.j - spec.m


def limit_joint_prob(spec: LimitLawSpec, l_vec) -> float:
    """Limiting probability of the offset vector ``(k_i - ceil(n/m))_i``; 0 off support."""
    if not in_joint_support(spec, l_vec):
        return 0.0
    log_z, _ = limit_normalizer(spec)
    return math.exp(int(l_vec[0]) * math.log(spec.q) - log_z)


def clt_cdf(x, q: float):
    """Normal limit CDF of ``(k1 - ceil(n/m) - gamma m)/sqrt(m)``; vectorised over ``x``."""
    out = ndtr(np.asarray(x, dtype=np.float64) / clt_params(q).sigma)
    return float(out) if out.ndim == 0 else out


# -- ordered simplex --------------------------------------------------------------

@dataclass(frozen=True)
class SimplexPoint:
    """Nonincreasing nonnegative coordinates summing to one."""

    coords: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(x) for x in self.coords)
        object.__setattr__(self, "coords", c)
        check_simplex_point(c)

    @property
    def m(self) -> int:
        return len(self.coords)


def check_simplex_point(y, atol: float = 1e-12) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 1:
        raise ValueError("a simplex point is a nonempty vector")
    if np.any(y < 0) or np.any(y > 1):
        raise ValueError(f"coordinates outside [0, 1]: {y}")
    if np.any(np.diff(y) > 0):
        raise ValueError(f"coordinates must be nonincreasing: {y}")
    if abs(y.sum() - 1.0) > atol:
        raise ValueError(f"coordinates sum to {y.sum()!r}, not 1")
    return y


def dirichlet_log_norm(m: int, alpha: float) -> float:
    """``log(m! Gamma(m alpha) / Gamma(alpha)^m)``."""
    return float(gammaln(m + 1) + gammaln(m * alpha) - m * gammaln(alpha))


def dirichlet_order_density(y, alpha: float) -> float:
    """Density of decreasing Dirichlet(alpha) order statistics on the ordered simplex."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    coords = y.coords if isinstance(y, SimplexPoint) else y
    y = check_simplex_point(coords)
    m = y.size
    if alpha == 1.0:
        return math.exp(dirichlet_log_norm(m, alpha))
    with np.errstate(divide="ignore"):
        log_prod = float(np.sum(np.log(y)))
    if log_prod == -math.inf:
        return 0.0 if alpha > 1 else math.inf
    return math.exp(dirichlet_log_norm(m, alpha) + (alpha - 1.0) * log_prod)


def power_transform_check(y, alpha: float) -> tuple[float, ...]:
    """``(y_1^alpha, ..., y_m^alpha)``; lands on ``{sum x_i^(1/alpha) = 1}``."""
    coords = y.coords if isinstance(y, SimplexPoint) else tuple(check_simplex_point(y))
    return tuple(c ** alpha for c in coords)


def top_order_stat_cdf_m2(x):
    """CDF of the larger coordinate of a uniform point on the 1-simplex (Uniform(1/2, 1))."""
    return np.clip(2.0 * np.asarray(x, dtype=np.float64) - 1.0, 0.0, 1.0)


def count_cache_for_limits() -> CountCache:
    return counting.DEFAULT_CACHE


__all__ = [
    "DiscretePmf",
    "LimitLawSpec",
    "SimplexPoint",
    "clt_cdf",
    "count_at_most",
    "dirichlet_order_density",
    "limit_joint_prob",
    "limit_pmf_k1",
    "log_tail_bound",
    "power_transform_check",
]
