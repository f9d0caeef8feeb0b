"""Runs (maximal repetitions) and the two procedures that enumerate them.

``enumerate_runs_oracle`` follows the definition literally: it computes the
smallest period of every factor from per-suffix border arrays and keeps the
intervals whose one-symbol extensions strictly raise the period.
``enumerate_runs_fast`` anchors every candidate period at multiples of itself
and extends with LCE queries; it is checked against the oracle, not proved.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator

import numpy as np

from .lce import LceIndex, build_lce
from .strings import StrLike, _nonempty, as_bytes, smallest_period

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


@dataclass(frozen=True, order=True, slots=True)
class Run:
    """A run ``[start..end]`` (1-based, inclusive) with smallest period ``period``."""

    start: int
    end: int
    period: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    @property
    def center(self) -> int:
        return self.start + self.period

    @property
    def square_end(self) -> int:
        return self.start + 2 * self.period - 1

    @property
    def exponent(self) -> Fraction:
        return Fraction(self.length, self.period)

    def root(self, w: StrLike) -> bytes:
        w = as_bytes(w)
        return w[self.start - 1 : self.start - 1 + self.period]

    def as_record(self) -> dict:
        e = self.exponent
        return {
            "start": self.start,
            "end": self.end,
            "period": self.period,
            "center": self.center,
            "square_end": self.square_end,
            "exponent": f"{e.numerator}/{e.denominator}",
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Run":
        run = cls(int(rec["start"]), int(rec["end"]), int(rec["period"]))
        num, den = rec["exponent"].split("/")
        if (run.center, run.square_end, run.exponent) != (
            rec["center"], rec["square_end"], Fraction(int(num), int(den))
        ):
            raise ValueError(f"inconsistent run record {rec}")
        return run

    def __str__(self):
        return f"[{self.start}..{self.end}] p={self.period} e={self.exponent}"


class RunSet:
    """All runs of one string, sorted by ``(start, period)``.

    Backed by three integer arrays; ``Run`` objects are built on first access.
    """

    def __init__(self, n: int, starts, ends, periods):
        starts = np.asarray(starts, dtype=np.int64)
        ends = np.asarray(ends, dtype=np.int64)
        periods = np.asarray(periods, dtype=np.int64)
        order = np.lexsort((periods, starts))
        self.n = n
        self.starts = starts[order]
        self.ends = ends[order]
        self.periods = periods[order]

    @classmethod
    def from_runs(cls, n: int, runs) -> "RunSet":
        runs = list(runs)
        return cls(n, [r.start for r in runs], [r.end for r in runs], [r.period for r in runs])

    @cached_property
    def runs(self) -> tuple[Run, ...]:
        return tuple(
            Run(s, e, p)
            for s, e, p in zip(self.starts.tolist(), self.ends.tolist(), self.periods.tolist())
        )

    def __len__(self):
        return len(self.starts)

    def __iter__(self) -> Iterator[Run]:
        return iter(self.runs)

    def __getitem__(self, k):
        return self.runs[k]

    def __eq__(self, other):
        if not isinstance(other, RunSet):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.starts, other.starts)
            and np.array_equal(self.ends, other.ends)
            and np.array_equal(self.periods, other.periods)
        )

    def __repr__(self):
        return f"RunSet(n={self.n}, runs={len(self)})"

    @cached_property
    def by_center(self) -> dict[int, tuple[Run, ...]]:
        out: dict[int, list[Run]] = {}
        for r in sorted(self.runs, key=lambda r: (r.center, r.period)):
            out.setdefault(r.center, []).append(r)
        return {c: tuple(v) for c, v in out.items()}

    @cached_property
    def by_period(self) -> dict[int, tuple[Run, ...]]:
        out: dict[int, list[Run]] = {}
        for r in sorted(self.runs, key=lambda r: (r.period, r.start)):
            out.setdefault(r.period, []).append(r)
        return {p: tuple(v) for p, v in out.items()}

    def records(self) -> list[dict]:
        return [r.as_record() for r in self.runs]


def _oracle_kernel(s):
    # Row i holds the smallest period of s[i..j] for j >= i; the previous row
    # supplies the left extensions.
    n = len(s)
    out_s = np.empty(n + 1, dtype=np.int64)
    out_e = np.empty(n + 1, dtype=np.int64)
    out_p = np.empty(n + 1, dtype=np.int64)
    count = 0
    prev = np.zeros(n + 1, dtype=np.int64)
    cur = np.zeros(n + 1, dtype=np.int64)
    fail = np.zeros(n, dtype=np.int64)
    for i in range(n):
        m = n - i
        fail[0] = 0
        k = 0
        for t in range(1, m):
            c = s[i + t]
            while k > 0 and s[i + k] != c:
                k = fail[k - 1]
            if s[i + k] == c:
                k += 1
            fail[t] = k
        for t in range(m):
            cur[i + t] = (t + 1) - fail[t]
        for j in range(i + 1, n):
            p = cur[j]
            if j - i + 1 < 2 * p:
                continue
            if i > 0 and prev[j] <= p:
                continue
            if j < n - 1 and cur[j + 1] <= p:
                continue
            if count >= n + 1:
                raise RuntimeError("more runs than positions")
            out_s[count] = i + 1
            out_e[count] = j + 1
            out_p[count] = p
            count += 1
        prev, cur = cur, prev
    return out_s[:count], out_e[:count], out_p[:count]


_oracle_kernel_py = _oracle_kernel
if njit is not None:
    _oracle_kernel = njit(cache=True)(_oracle_kernel)


def enumerate_runs_oracle(w: StrLike, jit: bool = True) -> RunSet:
    """All runs of ``w`` by the definition; quadratic time, linear memory."""
    w = _nonempty(w)
    s = np.frombuffer(w, dtype=np.uint8)
    kernel = _oracle_kernel if jit else _oracle_kernel_py
    starts, ends, periods = kernel(s)
    return RunSet(len(w), starts, ends, periods)


_BATCH = 1 << 21


def _anchor_batches(n: int):
    """Yield (anchor, period) arrays covering all p <= n/2, anchors at multiples of p."""
    ps = np.arange(1, n // 2 + 1, dtype=np.int64)
    counts = (n - 1) // ps
    cum = np.cumsum(counts)
    lo = 0
    while lo < len(ps):
        base = cum[lo - 1] if lo else 0
        hi = int(np.searchsorted(cum, base + _BATCH, side="right"))
        hi = max(hi, lo + 1)
        p_blk = ps[lo:hi]
        c_blk = counts[lo:hi]
        total = int(c_blk.sum())
        p_rep = np.repeat(p_blk, c_blk)
        first = np.repeat(np.cumsum(c_blk) - c_blk, c_blk)
        t = np.arange(total, dtype=np.int64) - first
        yield t * p_rep, p_rep
        lo = hi


def enumerate_runs_fast(w: StrLike, index: LceIndex | None = None, validate: bool = False) -> RunSet:
    """All runs of ``w`` in O(n log n) via anchored LCE extensions."""
    w = _nonempty(w)
    n = len(w)
    if n < 2:
        return RunSet(n, [], [], [])
    s = np.frombuffer(w, dtype=np.uint8)
    idx = index if index is not None else build_lce(w)
    parts_s, parts_e, parts_p = [], [], []
    for a, p in _anchor_batches(n):
        b = a + p
        left_eq = np.zeros(len(a), dtype=bool)
        nz = a > 0
        left_eq[nz] = s[a[nz] - 1] == s[b[nz] - 1]
        keep = (s[a] == s[b]) | left_eq
        a, b, p = a[keep], b[keep], p[keep]
        f = idx.forward0(a, b)
        # B >= p - F forces a match at distance p - F behind the anchor.
        d = p - f
        ok = d <= 0
        reach = ~ok & (a >= d)
        ok[reach] = s[a[reach] - d[reach]] == s[a[reach] + f[reach]]
        a, b, p, f = a[ok], b[ok], p[ok], f[ok]
        back = np.zeros(len(a), dtype=np.int64)
        nz = a > 0
        back[nz] = idx.backward0(a[nz] - 1, b[nz] - 1)
        hit = back + f >= p
        st = a[hit] - back[hit]
        en = b[hit] + f[hit] - 1
        key = st * n + en
        _, first = np.unique(key, return_index=True)
        parts_s.append(st[first])
        parts_e.append(en[first])
        parts_p.append(p[hit][first])
    st = np.concatenate(parts_s)
    en = np.concatenate(parts_e)
    pp = np.concatenate(parts_p)
    # Batches ascend in p, so the first hit per interval carries its smallest period.
    key = st * n + en
    order = np.lexsort((pp, key))
    key, st, en, pp = key[order], st[order], en[order], pp[order]
    first = np.ones(len(key), dtype=bool)
    first[1:] = key[1:] != key[:-1]
    st, en, pp = st[first], en[first], pp[first]
    _check_maximal(s, st, en, pp)
    runs = RunSet(n, st + 1, en + 1, pp)
    if validate:
        validate_runs(w, runs)
    return runs


def _check_maximal(s, st, en, pp):
    n = len(s)
    m = st > 0
    if np.any(s[st[m] - 1] == s[st[m] - 1 + pp[m]]):
        raise AssertionError("fast enumerator emitted a left-extendable interval")
    m = en < n - 1
    if np.any(s[en[m] + 1] == s[en[m] + 1 - pp[m]]):
        raise AssertionError("fast enumerator emitted a right-extendable interval")


def is_run(w: StrLike, start: int, end: int) -> bool:
    """Direct test of the run definition on the 1-based interval [start..end]."""
    w = as_bytes(w)
    if not 1 <= start < end <= len(w):
        return False
    p = smallest_period(w[start - 1 : end])
    if end - start + 1 < 2 * p:
        return False
    if start > 1 and smallest_period(w[start - 2 : end]) <= p:
        return False
    if end < len(w) and smallest_period(w[start - 1 : end + 1]) <= p:
        return False
    return True


def validate_runs(w: StrLike, runs: RunSet) -> None:
    """Raise if any member violates the run definition against ``w``."""
    w = as_bytes(w)
    seen = set()
    for r in runs:
        if (r.start, r.end) in seen:
            raise AssertionError(f"duplicate interval {r}")
        seen.add((r.start, r.end))
        if not is_run(w, r.start, r.end) or smallest_period(w[r.start - 1 : r.end]) != r.period:
            raise AssertionError(f"{r} is not a run of the input")


def square_of(run: Run, w: StrLike) -> bytes:
    """The square ``x x`` of a run: its first ``2p`` symbols."""
    w = as_bytes(w)
    return w[run.start - 1 : run.square_end]


def enumerate_runs(w: StrLike, method: str = "fast") -> RunSet:
    if method == "fast":
        return enumerate_runs_fast(w)
    if method == "oracle":
        return enumerate_runs_oracle(w)
    raise ValueError(f"unknown method {method!r}")
