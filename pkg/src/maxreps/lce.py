"""Longest common extension queries over a suffix array and sparse table.

Construction is prefix doubling on numpy arrays, O(n log n). The LCP array is
read off the per-round rank arrays by binary descent, then a sparse table
answers range minima in constant time. Backward queries run on the index of
the reversed string.
"""

from __future__ import annotations

import numpy as np

from .strings import StrLike, _nonempty


def _symbols(w: StrLike) -> np.ndarray:
    return np.frombuffer(_nonempty(w), dtype=np.uint8)


def _doubling_ranks(s: np.ndarray) -> list[np.ndarray]:
    """Rank arrays per doubling round; round k ranks the length-2**k prefixes."""
    n = len(s)
    _, rank = np.unique(s, return_inverse=True)
    rank = rank.astype(np.int64) + 1
    levels = [rank]
    k = 1
    while int(rank.max()) < n:
        shifted = np.zeros(n, dtype=np.int64)
        shifted[: n - k] = rank[k:]
        key = rank * (n + 1) + shifted
        order = np.argsort(key)
        sk = key[order]
        step = np.empty(n, dtype=np.int64)
        step[0] = 1
        np.not_equal(sk[1:], sk[:-1], out=step[1:])
        rank = np.empty(n, dtype=np.int64)
        rank[order] = np.cumsum(step)
        levels.append(rank)
        k *= 2
    return levels


def _lce_by_descent(levels, n, i, j):
    """Vectorised LCE of suffix pairs (i, j), i != j, from rank levels."""
    top = len(levels) - 1
    pad = 1 << top
    out = np.zeros(len(i), dtype=np.int64)
    for k in range(top, -1, -1):
        r = np.empty(n + pad, dtype=np.int64)
        r[:n] = levels[k]
        r[n:] = -np.arange(1, pad + 1)
        eq = r[i + out] == r[j + out]
        out += eq.astype(np.int64) << k
    return out


class _SuffixIndex:
    __slots__ = ("n", "sa", "rank", "table", "log2")

    def __init__(self, s: np.ndarray):
        n = len(s)
        levels = _doubling_ranks(s)
        rank = levels[-1] - 1
        sa = np.empty(n, dtype=np.int64)
        sa[rank] = np.arange(n)
        lcp = np.zeros(n, dtype=np.int32)
        if n > 1:
            lcp[1:] = _lce_by_descent(levels, n, sa[:-1], sa[1:])
        del levels
        depth = max(1, n.bit_length())
        table = np.zeros((depth, n), dtype=np.int32)
        table[0] = lcp
        for k in range(1, depth):
            h = 1 << (k - 1)
            table[k, : n - h] = np.minimum(table[k - 1, : n - h], table[k - 1, h:])
        log2 = np.zeros(n + 1, dtype=np.int64)
        for k in range(1, depth + 1):
            log2[1 << (k - 1) :] = k - 1
        self.n, self.sa, self.rank, self.table, self.log2 = n, sa, rank, table, log2

    def query(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """LCE of 0-based suffixes; positions are assumed in range."""
        ri = self.rank[i]
        rj = self.rank[j]
        lo = np.minimum(ri, rj) + 1
        hi = np.maximum(ri, rj)
        same = ri == rj
        lo[same] = hi[same]
        k = self.log2[hi - lo + 1]
        res = np.minimum(self.table[k, lo], self.table[k, hi - (1 << k) + 1]).astype(np.int64)
        if same.any():
            res[same] = self.n - np.asarray(i)[same]
        return res


class LceIndex:
    """Immutable index for forward and backward longest common extensions.

    >>> idx = build_lce("abaab")
    >>> idx.lce_forward(1, 4)
    2
    """

    def __init__(self, w: StrLike):
        s = _symbols(w)
        self.n = len(s)
        self._fwd = _SuffixIndex(s)
        self._bwd = _SuffixIndex(s[::-1].copy())

    @property
    def suffix_array(self) -> list[int]:
        """Suffix array as 1-based start positions."""
        return (self._fwd.sa + 1).tolist()

    def _check(self, *pos):
        for x in pos:
            if not 1 <= x <= self.n:
                raise IndexError(f"position {x} outside [1..{self.n}]")

    def lce_forward(self, i: int, j: int) -> int:
        """Longest common prefix of the suffixes starting at i and j."""
        self._check(i, j)
        return int(self._fwd.query(np.array([i - 1]), np.array([j - 1]))[0])

    def lce_backward(self, i: int, j: int) -> int:
        """Longest common suffix of the prefixes ending at i and j."""
        self._check(i, j)
        return int(self._bwd.query(np.array([self.n - i]), np.array([self.n - j]))[0])

    def forward0(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Vectorised forward LCE on 0-based positions in ``[0, n)``."""
        return self._fwd.query(i, j)

    def backward0(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Vectorised backward LCE of prefixes ending at 0-based i and j."""
        n1 = self.n - 1
        return self._bwd.query(n1 - i, n1 - j)


def build_lce(w: StrLike) -> LceIndex:
    return LceIndex(w)
