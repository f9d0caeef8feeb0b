"""Runs with close centers and similar periods.

Periods are split into buckets ``[2*d_i, 3*d_i]`` with ``d_i = (1/2)(3/2)**i``.
Inside a bucket, runs whose centers lie within ``d_i`` of each other are
"close"; at most three of them can be mutually close unless several share a
center. All threshold comparisons are closed and use exact fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations

from .errors import AuditError, DomainError, NotApplicable
from .report import AuditReport
from .runs import Run, RunSet
from .strings import StrLike, as_bytes, primitive_root, smallest_period


def delta_i(i: int) -> Fraction:
    return Fraction(3**i, 2 ** (i + 1))


def bucket_deltas(n: int) -> list[Fraction]:
    """Deltas d_0..d_m, stopping before the first bucket with 2*d > n/2."""
    out = []
    i = 0
    while 2 * delta_i(i) <= Fraction(n, 2):
        out.append(delta_i(i))
        i += 1
    return out


def bucket_index(p: int) -> int:
    """The unique i with 2*d_i <= p <= 3*d_i."""
    if p < 1:
        raise DomainError("periods are positive")
    i = 0
    while 3 ** (i + 1) < p * 2 ** (i + 1):  # 3*d_i < p
        i += 1
    return i


def in_bucket(p: int, delta: Fraction) -> bool:
    return 2 * delta <= p <= 3 * delta


@dataclass
class Bucket:
    index: int
    delta: Fraction
    members: list[Run] = field(default_factory=list)

    @property
    def period_range(self) -> tuple[Fraction, Fraction]:
        return 2 * self.delta, 3 * self.delta

    @property
    def reach(self) -> int:
        """Largest integer center gap within delta."""
        return self.delta.numerator // self.delta.denominator


def buckets(runs: RunSet) -> list[Bucket]:
    """One bucket per delta from ``bucket_deltas(n)``, members sorted by center.

    Cached on the RunSet; callers must not mutate the member lists.
    """
    cached = runs.__dict__.get("_buckets")
    if cached is None:
        cached = runs.__dict__["_buckets"] = _buckets(runs)
    return cached


def _buckets(runs: RunSet) -> list[Bucket]:
    out = [Bucket(i, d) for i, d in enumerate(bucket_deltas(runs.n))]
    for r in runs:
        i = bucket_index(r.period)
        while i >= len(out):
            out.append(Bucket(len(out), delta_i(len(out))))
        out[i].members.append(r)
    for b in out:
        b.members.sort(key=lambda r: (r.center, r.period))
    return out


def are_delta_close(a: Run, b: Run, delta) -> bool:
    delta = Fraction(delta)
    return (
        abs(a.center - b.center) <= delta
        and in_bucket(a.period, delta)
        and in_bucket(b.period, delta)
    )


class PairCase(Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    VI = "VI"


def orient(a: Run, b: Run) -> tuple[Run, Run]:
    """Order a pair as (x, y) with the smaller period first; ties by start."""
    return (a, b) if (a.period, a.start) <= (b.period, b.start) else (b, a)


def classify_pair(w: StrLike, a: Run, b: Run) -> PairCase:
    """Relative position of the squares of two distinct runs."""
    if a == b:
        raise DomainError("cannot classify a run against itself")
    n = len(as_bytes(w))
    for r in (a, b):
        if r.end > n:
            raise DomainError(f"{r} does not fit the input")
    x, y = orient(a, b)
    if x.center == y.center:
        return PairCase.VI
    if x.start == y.start:
        return PairCase.V
    if y.center < x.center:
        return PairCase.I if x.square_end <= y.square_end else PairCase.II
    return PairCase.III if y.start < x.start else PairCase.IV


def verify_case_i_start(w: StrLike, x: Run, y: Run, z: Run, delta=None) -> bool:
    """Check where the third run of a case-I configuration must start.

    With periods p <= q <= r and (x, y) in case I, the claim is
    ``i_z = i_x - (q - p)`` and ``r - q`` a multiple of the primitive root
    length of the block ``w[i_x .. i_x + q - p - 1]`` (which is ``q - p``
    itself when that block is primitive). When
    ``delta`` is given the three runs must also be mutually delta-close.
    """
    if not (x.period <= y.period <= z.period):
        raise NotApplicable("periods must satisfy p <= q <= r")
    if len({x.center, y.center, z.center}) < 3:
        raise NotApplicable("shared centers belong to case VI")
    if classify_pair(w, x, y) is not PairCase.I:
        raise NotApplicable("(x, y) is not in case I")
    if delta is not None and not all(
        are_delta_close(u, v, delta) for u, v in ((x, y), (x, z), (y, z))
    ):
        raise NotApplicable("runs are not mutually delta-close")
    gap = y.period - x.period
    if gap == 0:
        raise NotApplicable("case I needs q > p")
    # x has period q - p; when that block is a proper power the period
    # steps come in units of its primitive root.
    w = as_bytes(w)
    step = len(primitive_root(w[x.start - 1 : x.start - 1 + gap])[0])
    return z.start == x.start - gap and (z.period - y.period) % step == 0


def close_groups(bucket: Bucket) -> list[tuple[Run, ...]]:
    """Maximal sets of bucket members whose centers span at most delta."""
    m = bucket.members
    reach = bucket.reach
    out = []
    r = 0
    last_r = -1
    for l in range(len(m)):
        r = max(r, l)
        while r + 1 < len(m) and m[r + 1].center - m[l].center <= reach:
            r += 1
        if r > last_r:
            out.append(tuple(m[l : r + 1]))
            last_r = r
    return out


def close_pairs(bucket: Bucket):
    """All unordered delta-close pairs within a bucket."""
    m = bucket.members
    reach = bucket.reach
    for l in range(len(m)):
        r = l + 1
        while r < len(m) and m[r].center - m[l].center <= reach:
            yield m[l], m[r]
            r += 1


def has_shared_center(group) -> bool:
    centers = [r.center for r in group]
    return len(set(centers)) < len(centers)


def audit_three_close(w: StrLike, runs: RunSet) -> AuditReport:
    """Every mutually close group larger than three must contain a shared center."""
    rep = AuditReport("three_close")
    per_bucket = []
    for b in buckets(runs):
        groups = close_groups(b)
        big = [g for g in groups if len(g) > 3]
        per_bucket.append(
            {
                "index": b.index,
                "delta": b.delta,
                "runs": len(b.members),
                "groups": len(groups),
                "max_group": max((len(g) for g in groups), default=0),
                "groups_over_3": len(big),
            }
        )
        for g in big:
            if has_shared_center(g):
                rep.note("shared_center_group", delta=b.delta, size=len(g), centers=[r.center for r in g])
            else:
                rep.fail("four_close_distinct_centers", delta=b.delta, runs=list(g))
    rep.tallies["buckets"] = per_bucket
    return rep


def classify_close_pairs(w: StrLike, runs: RunSet) -> AuditReport:
    """Label every delta-close pair and check the label's implied ordering."""
    rep = AuditReport("pair_cases")
    for b in buckets(runs):
        for a, c in close_pairs(b):
            try:
                label = classify_pair(w, a, c)
            except DomainError as exc:  # pragma: no cover - total by construction
                rep.fail("unlabeled_pair", delta=b.delta, runs=[a, c], error=str(exc))
                continue
            rep.bump(label.value)
            x, y = orient(a, c)
            # c_y < c_x with p_x <= p_y forces i_y < i_x.
            if label in (PairCase.I, PairCase.II) and not y.start < x.start:
                rep.fail("inconsistent_label", delta=b.delta, runs=[x, y], label=label.value)
    return rep


def audit_case_i(w: StrLike, runs: RunSet) -> AuditReport:
    """Check the forced start of z for every close triple whose (x, y) is case I."""
    rep = AuditReport("case_i")
    for b in buckets(runs):
        seen = set()
        for g in close_groups(b):
            for trip in combinations(g, 3):
                if trip in seen:
                    continue
                seen.add(trip)
                x, y, z = sorted(trip, key=lambda r: (r.period, r.start))
                try:
                    ok = verify_case_i_start(w, x, y, z, b.delta)
                except NotApplicable:
                    continue
                rep.bump("checked")
                gap = y.period - x.period
                if (z.period - y.period) % gap:
                    rep.note("nonprimitive_gap_block", delta=b.delta, runs=[x, y, z])
                if not ok:
                    rep.fail("case_i_start", delta=b.delta, runs=[x, y, z])
    return rep


def count_bound(w: StrLike, runs: RunSet) -> tuple[int, Fraction]:
    """Return ``(|runs|, 18n)``; raises ``AuditError`` if the bound is exceeded."""
    total, bound = len(runs), Fraction(18 * runs.n)
    if total > bound:
        raise AuditError(f"{total} runs exceed 18n = {bound}")
    return total, bound


def count_bound_report(w: StrLike, runs: RunSet) -> AuditReport:
    rep = AuditReport("count_bound")
    total, bound = len(runs), Fraction(18 * runs.n)
    rep.tallies.update(total=total, bound=bound)
    rep.tallies["buckets"] = [
        {"index": b.index, "delta": b.delta, "runs": len(b.members), "cap": 3 * runs.n / b.delta}
        for b in buckets(runs)
    ]
    if total > bound:
        rep.fail("eighteen_n", total=total, bound=bound)
    return rep


@dataclass
class CenterFamily:
    """Runs sharing one center, sorted by period."""

    center: int
    members: tuple[Run, ...]
    ell: int
    ell_prime: int
    regular: bool
    ell_prime_alt: int | None = None

    @property
    def h(self) -> int:
        return len(self.members)

    @property
    def J(self) -> tuple[int, int]:
        """Interval ``[c+ell+1 .. c+(h-2)*ell+ell']``; empty when lo > hi."""
        c = self.center
        return c + self.ell + 1, c + (self.h - 2) * self.ell + self.ell_prime

    @property
    def J_empty(self) -> bool:
        lo, hi = self.J
        return lo > hi

    def arithmetic_tail(self) -> "CenterFamily":
        """The longest run of members, ending at the longest one, whose
        periods step by a constant; the family itself when regular."""
        if self.regular:
            return self
        ps = [r.period for r in self.members]
        step = ps[-1] - ps[-2]
        k = len(ps) - 2
        while k > 0 and ps[k] - ps[k - 1] == step:
            k -= 1
        return CenterFamily(self.center, self.members[k:], step, ps[k], True, self.ell_prime_alt)

    def to_dict(self) -> dict:
        return {
            "c": self.center,
            "h": self.h,
            "ell": self.ell,
            "ell_prime": self.ell_prime,
            "ell_prime_alt": self.ell_prime_alt,
            "J": list(self.J),
            "regular": self.regular,
            "periods": [r.period for r in self.members],
        }


def _ell_prime_by_root(w: bytes, longest: Run, ell: int) -> int | None:
    # Longest root written as u^e v with |u| = ell and v a proper prefix of u.
    root = longest.root(w)
    if smallest_period(root) != ell:
        return None
    return len(root) % ell


def shared_center_families(w: StrLike, runs: RunSet) -> list[CenterFamily]:
    w = as_bytes(w)
    out = []
    for c, members in sorted(runs.by_center.items()):
        if len(members) < 2:
            continue
        ps = [r.period for r in members]
        diffs = {b - a for a, b in zip(ps, ps[1:])}
        ell = ps[1] - ps[0]
        out.append(
            CenterFamily(
                center=c,
                members=members,
                ell=ell,
                ell_prime=ps[0],
                regular=len(diffs) == 1,
                ell_prime_alt=_ell_prime_by_root(w, members[-1], ell),
            )
        )
    return out


def verify_case_vi_gap(w: StrLike, fam: CenterFamily, runs: RunSet) -> bool:
    """No run with period in [ell, 9*ell/4] may have its center inside J."""
    if fam.J_empty:
        return True
    lo, hi = fam.J
    top = Fraction(9 * fam.ell, 4)
    return not any(lo <= r.center <= hi and fam.ell <= r.period <= top for r in runs)


def _overlap(a: Run, b: Run) -> int:
    return max(0, min(a.end, b.end) - max(a.start, b.start) + 1)


GAP_REGIME_H = 10


def audit_families(w: StrLike, runs: RunSet) -> AuditReport:
    """Shared-center family checks.

    Asserted for families with h >= 10: no run center inside J (for an
    irregular family, inside the J of its arithmetic tail), and equal
    ``ell`` for two such families whose longest runs overlap by
    ``ell_1 + ell_2`` or more. Reported only: irregular period progressions,
    both checks for smaller h, and disagreement between the two readings
    of ``ell'``.
    """
    rep = AuditReport("families")
    fams = shared_center_families(w, runs)
    rep.tallies["families"] = len(fams)
    for fam in fams:
        rep.bump(f"h={fam.h}")
        if not fam.regular:
            rep.note("irregular_progression", family=fam)
        if fam.ell_prime_alt != fam.ell_prime:
            rep.note("ell_prime_readings_differ", family=fam)
        # Irregular families are judged on their arithmetic tail.
        core = fam.arithmetic_tail()
        gap_ok = verify_case_vi_gap(w, core, runs)
        if core.h >= GAP_REGIME_H:
            rep.bump("gap_checked")
            if not gap_ok:
                rep.fail("run_center_in_J", family=fam, tail=core)
        elif not gap_ok:
            rep.note("gap_violated_small_h", family=fam, tail=core)
    for f1, f2 in combinations(fams, 2):
        ov = _overlap(f1.members[-1], f2.members[-1])
        if ov < f1.ell + f2.ell:
            continue
        if min(f1.h, f2.h) >= GAP_REGIME_H:
            rep.bump("overlapping_family_pairs")
            if f1.ell != f2.ell:
                rep.fail("overlapping_families_differ", families=[f1, f2], overlap=ov)
        else:
            rep.bump("overlapping_family_pairs_small_h")
            if f1.ell != f2.ell:
                rep.note("overlapping_small_families_differ", families=[f1, f2], overlap=ov)
    return rep
