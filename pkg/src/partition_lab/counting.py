"""Exact counting of restricted integer partitions.

Notation used throughout:

* ``|P_n(m)|`` -- partitions of ``n`` into at most ``m`` parts
  (``count_at_most``); ``|P_0(m)| = 1``.
* ``B(n, m, b)`` -- partitions of ``n`` into at most ``m`` parts, each at most
  ``b`` (``count_bounded``).

Rows of ``|P_N(m)|`` come from the counting kernel (compiled when available).
Box-bounded counts are evaluated from those rows through the Gaussian binomial
generating function

    sum_N B(N, m, b) x^N = prod_{i=1..m} (1 - x^(b+i)) / (1 - x^i),

after reducing by box complement and conjugation, and memoised by the
normalised key ``(total, max_parts, max_part)``.

Cache persistence
-----------------
If ``PARTITION_LAB_CACHE_DIR`` is set, every computed row ``|P_N(m)|`` is
stored as ``atmost_m{m}.bin`` in that directory and reused by later
processes. Layout, all little-endian::

    magic   4 bytes   b"PLCS"
    version uint32    1
    m       uint32    part-count bound of the row
    count   uint64    number of entries (totals 0..count-1)
    entries count x { length uint32, limbs <length> bytes }

Each entry is the nonnegative count as little-endian bytes (``length`` may be
0 for the value 0).
"""

from __future__ import annotations

import math
import os
import struct
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from ._backend import kernel

HR_CONSTANT = math.pi * math.sqrt(2.0 / 3.0)

# Keep every intermediate row when the whole block is at most this many cells.
KEEP_ALL_CELLS = 4_000_000

_SEGMENT_MAGIC = b"PLCS"
_SEGMENT_VERSION = 1


class CacheFrozenError(RuntimeError):
    """A frozen cache was asked for an entry it does not hold."""


@dataclass(frozen=True)
class Partition:
    """A partition of ``n`` into at most ``m_cap`` parts, parts nonincreasing."""

    parts: tuple[int, ...]
    n: int
    m_cap: int

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if any(p < 1 for p in parts):
            raise ValueError(f"parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts must be nonincreasing: {parts}")
        if sum(parts) != self.n:
            raise ValueError(f"parts {parts} do not sum to {self.n}")
        if len(parts) > self.m_cap:
            raise ValueError(f"{len(parts)} parts exceed the cap {self.m_cap}")

    @property
    def largest(self) -> int:
        return self.parts[0] if self.parts else 0

    def padded(self) -> tuple[int, ...]:
        """Parts padded with zeros to length ``m_cap``."""
        return self.parts + (0,) * (self.m_cap - len(self.parts))


def hr_log_upper_bound(N: int) -> float:
    """``K * sqrt(N)`` with ``K = pi*sqrt(2/3)``; ``log p(N)`` never exceeds it."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return HR_CONSTANT * math.sqrt(N)


def log_int(x: int) -> float:
    """Natural log of a positive integer of any size."""
    if x <= 0:
        raise ValueError("log of a non-positive integer")
    shift = max(0, x.bit_length() - 64)
    return math.log(x >> shift) + shift * math.log(2.0)


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def residue_j(n: int, m: int) -> int:
    """``j = m + n - m*ceil(n/m)``, always in ``[1, m]``."""
    return m + n - m * ceil_div(n, m)


def identity_cutoff(n: int, m: int) -> int:
    """``floor((n/m - m)/(m-1))``: largest offset where the exact identity holds."""
    if m < 2:
        raise ValueError("m must be >= 2")
    return (n - m * m) // (m * (m - 1))


def erdos_lehner_log_estimate(n: int, m: int) -> float:
    """``log(C(n-1, m-1) / m!)``, the size estimate of ``P_n(m)`` for small ``m``."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    return float(gammaln(n) - gammaln(m) - gammaln(n - m + 1) - gammaln(m + 1))


def _limb_widths(n_max: int, m: int) -> np.ndarray:
    """64-bit limbs needed for |P_N(m)|, N = 0..n_max (rigorous upper bound)."""
    N = np.arange(n_max + 1, dtype=np.float64)
    hr = HR_CONSTANT * np.sqrt(N)
    if m >= 1:
        comp = gammaln(N + m) - gammaln(m) - gammaln(N + 1)
        logb = np.minimum(hr, comp)
    else:
        logb = np.zeros_like(N)
    bits = logb / math.log(2.0) + 3.0
    return (bits // 64).astype(np.int64) + 1


def write_segment(path, m: int, row: list[int]) -> None:
    """Persist one row in the documented segment layout."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_SEGMENT_MAGIC)
        fh.write(struct.pack("<IIQ", _SEGMENT_VERSION, m, len(row)))
        for value in row:
            raw = value.to_bytes((value.bit_length() + 7) // 8, "little")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
    os.replace(tmp, path)


def read_segment(path) -> tuple[int, list[int]]:
    """Inverse of :func:`write_segment`; returns ``(m, row)``."""
    data = Path(path).read_bytes()
    if data[:4] != _SEGMENT_MAGIC:
        raise ValueError(f"{path}: not a count segment")
    version, m, count = struct.unpack_from("<IIQ", data, 4)
    if version != _SEGMENT_VERSION:
        raise ValueError(f"{path}: unsupported segment version {version}")
    pos = 4 + struct.calcsize("<IIQ")
    row = []
    for _ in range(count):
        (length,) = struct.unpack_from("<I", data, pos)
        pos += 4
        row.append(int.from_bytes(data[pos:pos + length], "little"))
        pos += length
    if pos != len(data):
        raise ValueError(f"{path}: trailing bytes")
    return m, row


class CountCache:
    """Lazily grown table of restricted partition counts.

    Rows ``|P_N(m)|`` are kept per ``m``; bounded counts are memoised by the
    normalised key ``(total, max_parts, max_part)``. Growth is single-writer.
    After :meth:`freeze` the cache is read-only and a miss raises
    :class:`CacheFrozenError`, so a frozen cache can be shared by readers.
    """

    def __init__(self, cache_dir=None):
        self._rows: dict[int, list[int]] = {0: [1]}
        self._bounded: dict[tuple[int, int, int], int] = {}
        self._subset_sums: dict[int, list[dict[int, int]]] = {}
        self._lock = threading.RLock()
        self._frozen = False
        self.cache_dir = Path(cache_dir) if cache_dir else None

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> None:
        self._frozen = True

    # -- rows of |P_N(m)| ---------------------------------------------------

    def row(self, m: int, n_max: int) -> list[int]:
        """A list whose entry ``N`` is ``|P_N(m)|`` for at least ``N <= n_max``."""
        if m < 0 or n_max < 0:
            raise ValueError("m and n_max must be nonnegative")
        if m == 0:
            row = self._rows[0]
            return row if len(row) > n_max else [1] + [0] * n_max
        row = self._rows.get(m)
        if row is not None and len(row) > n_max:
            return row
        with self._lock:
            row = self._rows.get(m)
            if row is not None and len(row) > n_max:
                return row
            if self._frozen:
                raise CacheFrozenError(f"row m={m} up to N={n_max} not in frozen cache")
            self._grow(m, n_max, len(row) if row else 0)
            return self._rows[m]

    def _grow(self, m: int, n_max: int, have: int) -> None:
        target = max(n_max, int(1.25 * have), 16)
        if self._load_segment(m, n_max):
            return
        keep_all = (m + 1) * (target + 1) <= KEEP_ALL_CELLS
        rows = kernel.at_most_rows(target, m, keep_all, _limb_widths(target, m))
        if keep_all:
            for k, r in enumerate(rows):
                old = self._rows.get(k)
                if old is None or len(old) < len(r):
                    self._rows[k] = r
        else:
            self._rows[m] = rows[0]
        self._save_segment(m)

    def _segment_path(self, m: int):
        return self.cache_dir / f"atmost_m{m}.bin"

    def _load_segment(self, m: int, n_max: int) -> bool:
        if self.cache_dir is None:
            return False
        path = self._segment_path(m)
        if not path.exists():
            return False
        try:
            m_file, row = read_segment(path)
        except (OSError, ValueError, struct.error):
            return False
        if m_file != m or len(row) <= n_max:
            return False
        self._rows[m] = row
        return True

    def _save_segment(self, m: int) -> None:
        if self.cache_dir is None:
            return
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        path = self._segment_path(m)
        if path.exists():
            try:
                _, old = read_segment(path)
                if len(old) >= len(self._rows[m]):
                    return
            except (OSError, ValueError, struct.error):
                pass
        write_segment(path, m, self._rows[m])

    # -- counts ---------------------------------------------------------------

    def at_most(self, n: int, m: int) -> int:
        """``|P_n(m)|``."""
        if n < 0 or m < 0:
            raise ValueError("n and m must be nonnegative")
        if n == 0:
            return 1
        if m == 0:
            return 0
        m = min(m, n)
        return self.row(m, n)[n]

    def _subsets(self, m: int) -> list[dict[int, int]]:
        """``e[r][s]``: number of r-subsets of {1..m} with sum s."""
        table = self._subset_sums.get(m)
        if table is None:
            table = [dict() for _ in range(m + 1)]
            table[0][0] = 1
            for i in range(1, m + 1):
                for r in range(i, 0, -1):
                    dst = table[r]
                    for s, c in table[r - 1].items():
                        dst[s + i] = dst.get(s + i, 0) + c
            self._subset_sums[m] = table
        return table

    def bounded(self, n: int, m: int, b: int) -> int:
        """Partitions of ``n`` into at most ``m`` parts, each at most ``b``."""
        if n < 0 or m < 0 or b < 0:
            raise ValueError("arguments must be nonnegative")
        while True:
            if n == 0:
                return 1
            if m == 0 or b == 0:
                return 0
            m, b = min(m, n), min(b, n)
            if m * b < n:
                return 0
            if 2 * n > m * b:
                n = m * b - n
                continue
            if m > b:
                m, b = b, m
            break
        if b >= n:
            return self.at_most(n, m)
        key = (n, m, b)
        hit = self._bounded.get(key)
        if hit is not None:
            return hit
        if self._frozen:
            raise CacheFrozenError(f"bounded count {key} not in frozen cache")
        row = self.row(m, n)
        subsets = self._subsets(m)
        total = 0
        for r in range(0, m + 1):
            base = n - r * b
            if base < r * (r + 1) // 2:
                break
            acc = 0
            for s, c in subsets[r].items():
                if s <= base:
                    acc += c * row[base - s]
            total += -acc if r & 1 else acc
        with self._lock:
            self._bounded[key] = total
        return total


DEFAULT_CACHE = CountCache(os.environ.get("PARTITION_LAB_CACHE_DIR") or None)


def count_at_most(n: int, m: int, cache: CountCache | None = None) -> int:
    """``|P_n(m)|``, the number of partitions of ``n`` into at most ``m`` parts."""
    return (cache or DEFAULT_CACHE).at_most(n, m)


def count_bounded(n: int, m: int, b: int, cache: CountCache | None = None) -> int:
    """Partitions of ``n`` into at most ``m`` parts, every part at most ``b``."""
    return (cache or DEFAULT_CACHE).bounded(n, m, b)


def count_with_largest(n: int, m: int, k1: int, cache: CountCache | None = None) -> int:
    """Partitions in ``P_n(m)`` whose largest part is exactly ``k1``."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    lo = ceil_div(n, m)
    if not lo <= k1 <= n:
        raise ValueError(f"largest part {k1} outside [{lo}, {n}] for n={n}, m={m}")
    return (cache or DEFAULT_CACHE).bounded(n - k1, m - 1, k1)


def identity_count(n: int, m: int, l: int, cache: CountCache | None = None) -> int:
    """``|P_{m(l+1)-j}(m-1)|``: equals the fixed-largest-part count for small ``l``."""
    return count_at_most(m * (l + 1) - residue_j(n, m), m - 1, cache)


def count_distinct(n: int, m: int, cache: CountCache | None = None) -> int:
    """Partitions of ``n`` into exactly ``m`` distinct positive parts.

    Subtracting ``(m, m-1, ..., 1)`` maps them one-to-one onto ``P_{n - m(m+1)/2}(m)``.
    """
    rest = n - m * (m + 1) // 2
    if rest < 0:
        return 0
    return count_at_most(rest, m, cache)


def largest_part_profile(n: int, m: int, cache: CountCache | None = None) -> list[int]:
    """``count_with_largest(n, m, k1)`` for ``k1 = ceil(n/m) .. n``."""
    lo = ceil_div(n, m)
    return [count_with_largest(n, m, k1, cache) for k1 in range(lo, n + 1)]
