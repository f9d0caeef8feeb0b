"""Sum of exponents: the 5/2 pair exclusion, overlap bound and window budget."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .delta import Bucket, buckets, close_pairs, shared_center_families
from .errors import AuditError, DomainError, PreconditionError
from .report import AuditReport
from .runs import Run, RunSet
from .strings import StrLike, as_bytes

FAT = Fraction(5, 2)
WINDOW_BUDGET = 8


def sum_of_exponents(runs: RunSet) -> Fraction:
    # Sum per period over integer lengths keeps the Fraction count small.
    total = Fraction(0)
    for p, members in runs.by_period.items():
        total += Fraction(sum(r.length for r in members), p)
    return total


def exp_bound(w: StrLike, runs: RunSet) -> tuple[Fraction, Fraction]:
    """Return ``(sum of exponents, 48n)``; raises ``AuditError`` past the bound."""
    total, bound = sum_of_exponents(runs), Fraction(48 * runs.n)
    if total > bound:
        raise AuditError(f"sum of exponents {total} exceeds 48n = {bound}")
    return total, bound


def check_no_two_fat(w: StrLike, runs: RunSet) -> AuditReport:
    """No two delta-close runs may both have exponent >= 5/2."""
    rep = AuditReport("no_two_fat")
    for b in buckets(runs):
        for x, y in close_pairs(b):
            rep.bump("pairs")
            if x.exponent >= FAT and y.exponent >= FAT:
                rep.fail("two_fat_close_runs", delta=b.delta, runs=[x, y])
    return rep


def overlap_length(a: Run, b: Run) -> int:
    return max(0, min(a.end, b.end) - max(a.start, b.start) + 1)


def overlap_bound(w: StrLike, a: Run, b: Run) -> bool:
    """Runs with different roots share at most ``p_a + p_b`` positions."""
    if a == b:
        raise DomainError("overlap bound needs two distinct runs")
    w = as_bytes(w)
    if a.root(w) == b.root(w):
        raise PreconditionError("runs have the same primitive root")
    return overlap_length(a, b) <= a.period + b.period


def audit_overlaps(w: StrLike, runs: RunSet) -> AuditReport:
    """Overlap bound for every overlapping pair of runs.

    Different roots: overlap <= p_a + p_b. Same root: overlap < p.
    """
    w = as_bytes(w)
    rep = AuditReport("overlap")
    members = list(runs)  # sorted by start
    ends_open = []
    for b in members:
        ends_open = [a for a in ends_open if a.end >= b.start]
        for a in ends_open:
            ov = overlap_length(a, b)
            if a.root(w) == b.root(w):
                rep.bump("same_root_pairs")
                if ov >= a.period:
                    rep.fail("same_root_overlap", runs=[a, b], overlap=ov)
            else:
                rep.bump("distinct_root_pairs")
                if not overlap_bound(w, a, b):
                    rep.fail("overlap_exceeds_periods", runs=[a, b], overlap=ov)
        ends_open.append(b)
    return rep


@dataclass
class ExponentAudit(AuditReport):
    total: Fraction = Fraction(0)
    bound: Fraction = Fraction(0)

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["total"] = f"{self.total.numerator}/{self.total.denominator}"
        d["bound"] = f"{self.bound.numerator}/{self.bound.denominator}"
        return d


def _windows(bucket: Bucket, half: int) -> dict[int, list[Run]]:
    # Half-open windows [1 + phase + m*delta, 1 + phase + (m+1)*delta) with
    # phase = half * delta/2, indexed in integers: delta = a/b.
    a, b = bucket.delta.numerator, bucket.delta.denominator
    out: dict[int, list[Run]] = {}
    for r in bucket.members:
        m = ((r.center - 1) * 2 * b - half * a) // (2 * a)
        out.setdefault(m, []).append(r)
    return out


def _ceil_sum(members) -> int:
    return sum(-(-r.length // r.period) for r in members)


def _explain(m: int, members: list[Run], occupied) -> dict | None:
    centers = [r.center for r in members]
    if len(set(centers)) < len(centers):
        return {"kind": "shared_center"}
    for r in sorted(members, key=lambda r: -r.exponent):
        if r.exponent < 3:
            break
        k = math.floor(2 * (r.exponent - FAT))
        if all(m + t not in occupied for t in range(1, k + 1)):
            return {"kind": "fat_run_blocking", "run": r, "blocked_windows": k}
    return None


def audit_exponent_window(w: StrLike, runs: RunSet) -> ExponentAudit:
    """Per bucket, per window of length delta: sum of exponents below 8.

    A window reaching 8 must carry an explanation: either a member with
    exponent g >= 3 whose next floor(2(g - 5/2)) windows hold no center of
    the bucket, or members sharing a center. Windows are anchored at
    position 1; the same check with phase delta/2 is reported under
    ``shifted`` without deciding the verdict. Family accounting asserts
    alpha_j <= 2 + 1/j for the inner members of each family's arithmetic
    tail, indexed within the tail.
    """
    rep = ExponentAudit("exponent_window")
    rep.total = sum_of_exponents(runs)
    rep.bound = Fraction(48 * runs.n)
    if rep.total > rep.bound:
        rep.fail("forty_eight_n", total=rep.total)
    shifted = {"excess": 0, "unexplained": 0}
    max_sum = Fraction(0)
    for b in buckets(runs):
        for half in (0, 1):
            wins = _windows(b, half)
            occupied = set(wins)
            for m, members in sorted(wins.items()):
                # The sum of ceilings bounds the exact sum from above.
                ceil_sum = _ceil_sum(members)
                if ceil_sum < WINDOW_BUDGET and (half or ceil_sum <= max_sum):
                    continue
                s = sum((r.exponent for r in members), Fraction(0))
                if not half:
                    max_sum = max(max_sum, s)
                if s < WINDOW_BUDGET:
                    continue
                why = _explain(m, members, occupied)
                if half:
                    shifted["excess"] += 1
                    shifted["unexplained"] += why is None
                    continue
                rep.bump("excess_windows")
                lo = 1 + m * b.delta
                entry = dict(delta=b.delta, window=[lo, lo + b.delta], sum=s, runs=members)
                if why is None:
                    rep.fail("unexplained_excess", **entry)
                else:
                    rep.note(why.pop("kind"), **entry, **why)
    rep.tallies["max_window_sum"] = max_sum
    rep.tallies["shifted"] = shifted
    _family_accounting(as_bytes(w), runs, rep)
    return rep


def _family_accounting(w: bytes, runs: RunSet, rep: AuditReport):
    for fam in shared_center_families(w, runs):
        # Irregular families: the cap is asserted along the arithmetic tail
        # and only reported for the leading members outside it.
        core = fam.arithmetic_tail()
        lead = fam.h - core.h
        for j in range(2, fam.h):
            alpha = fam.members[j - 1].exponent
            cap = 2 + Fraction(1, j)
            if alpha <= cap:
                continue
            tail_j = j - lead
            if tail_j >= 2 and alpha > 2 + Fraction(1, tail_j):
                rep.fail("family_member_exponent", family=fam, j=tail_j, exponent=alpha, cap=2 + Fraction(1, tail_j))
            else:
                rep.note("irregular_family_exponent", family=fam, j=j, exponent=alpha, cap=cap)
        top = fam.members[-1].exponent
        if top >= 3:
            rep.note("longest_member_excess", family=fam, exponent=top, further_families=math.floor(top - 2))
