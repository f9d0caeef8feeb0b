from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxreps.errors import AuditError, DomainError, PreconditionError
from maxreps.exponents import (
    FAT,
    WINDOW_BUDGET,
    _windows,
    audit_exponent_window,
    audit_overlaps,
    check_no_two_fat,
    exp_bound,
    overlap_bound,
    overlap_length,
    sum_of_exponents,
)
from maxreps.delta import buckets
from maxreps.runs import Run, RunSet, enumerate_runs_fast, enumerate_runs_oracle

W = "abbababbaba"


def test_sum_of_exponents_examples():
    assert sum_of_exponents(enumerate_runs_fast(W)) == Fraction(127, 10)
    assert sum_of_exponents(enumerate_runs_fast(W)) == 2 + Fraction(5, 2) + 2 + 2 + 2 + Fraction(11, 5)
    assert sum_of_exponents(enumerate_runs_fast("ab")) == 0
    assert sum_of_exponents(enumerate_runs_fast("aaa")) == 3


def test_exp_bound_examples():
    assert exp_bound(W, enumerate_runs_fast(W)) == (Fraction(127, 10), 528)
    assert exp_bound("ab", enumerate_runs_fast("ab")) == (0, 96)
    with pytest.raises(AuditError):
        exp_bound("a", RunSet.from_runs(1, [Run(1, 49, 1)]))


def test_no_two_fat_examples():
    assert check_no_two_fat(W, enumerate_runs_fast(W)).passed
    assert check_no_two_fat("aaa", enumerate_runs_fast("aaa")).passed


def test_no_two_fat_detects_synthetic_pair():
    # Period 3, exponent 3, centers 4 and 5 within delta 9/8.
    runs = RunSet.from_runs(40, [Run(1, 9, 3), Run(2, 10, 3)])
    rep = check_no_two_fat("a" * 40, runs)
    assert not rep.passed and rep.failures[0]["reason"] == "two_fat_close_runs"
    allowed = RunSet.from_runs(40, [Run(1, 15, 6), Run(2, 13, 6)])
    assert Run(1, 15, 6).exponent == FAT and Run(2, 13, 6).exponent == 2
    assert check_no_two_fat("a" * 40, allowed).passed


def test_overlap_bound_examples():
    a, b = Run(5, 10, 3), Run(8, 11, 2)
    assert overlap_length(a, b) == 3
    assert overlap_bound(W, a, b)
    assert overlap_bound(W, Run(2, 3, 1), Run(8, 11, 2))
    with pytest.raises(DomainError):
        overlap_bound(W, a, a)
    with pytest.raises(PreconditionError):
        overlap_bound("aabaa", Run(1, 2, 1), Run(4, 5, 1))


def test_window_audit_worked_example():
    rep = audit_exponent_window(W, enumerate_runs_fast(W))
    assert rep.passed
    assert rep.tallies["max_window_sum"] < WINDOW_BUDGET
    assert rep.total == Fraction(127, 10) and rep.bound == 528


def test_window_audit_empty_runset():
    rep = audit_exponent_window("ab", enumerate_runs_fast("ab"))
    assert rep.passed and not rep.annotations and rep.total == 0


def _brute_windows(bucket, half):
    out = {}
    phase = half * bucket.delta / 2
    for r in bucket.members:
        m = 0
        while not (1 + phase + m * bucket.delta <= r.center < 1 + phase + (m + 1) * bucket.delta):
            m += 1 if r.center >= 1 + phase + (m + 1) * bucket.delta else -1
        out.setdefault(m, []).append(r)
    return out


@settings(max_examples=40, deadline=None)
@given(st.text(alphabet="ab", min_size=2, max_size=200))
def test_window_indices_match_rational_intervals(w):
    runs = enumerate_runs_fast(w)
    for b in buckets(runs):
        for half in (0, 1):
            assert _windows(b, half) == _brute_windows(b, half)


def test_fat_run_blocking_is_annotated():
    # aaaa...a: one run of huge exponent in bucket 0, the window reaches 8.
    w = "b" + "a" * 20 + "b"
    rep = audit_exponent_window(w, enumerate_runs_fast(w))
    assert rep.passed
    kinds = {a["kind"] for a in rep.annotations}
    assert "fat_run_blocking" in kinds


def test_unexplained_excess_is_a_failure():
    # Period 8 sits in the bucket delta = 243/64; centers 9, 10, 11 share
    # window 2, exponents 23/8 each sum to 69/8 >= 8, none reaches 3.
    runs = RunSet.from_runs(60, [Run(1, 23, 8), Run(2, 24, 8), Run(3, 25, 8)])
    rep = audit_exponent_window("a" * 60, runs)
    assert [f["reason"] for f in rep.failures] == ["unexplained_excess"]
    assert rep.failures[0]["sum"] == Fraction(69, 8)


def test_family_accounting_flags_fat_inner_member():
    fam_w = "a" * 30
    members = [Run(10 - p, 10 + 3 * p, p) for p in (1, 2, 3)]  # exponents well above 2 + 1/j
    runs = RunSet.from_runs(40, members)
    rep = audit_exponent_window(fam_w, runs)
    assert any(f["reason"] == "family_member_exponent" for f in rep.failures)


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet="abc", min_size=1, max_size=300))
def test_exponent_audits_hold(w):
    runs = enumerate_runs_fast(w)
    assert check_no_two_fat(w, runs).passed
    assert audit_overlaps(w, runs).passed
    assert audit_exponent_window(w, runs).passed
    total, bound = exp_bound(w, runs)
    assert total <= bound


def test_overlap_audit_against_pairwise_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(2, 120))
        w = (rng.integers(0, 2, n, dtype=np.uint8) + 97).tobytes()
        runs = enumerate_runs_oracle(w)
        rs = list(runs)
        for i in range(len(rs)):
            for j in range(i + 1, len(rs)):
                a, b = rs[i], rs[j]
                ov = max(0, min(a.end, b.end) - max(a.start, b.start) + 1)
                if a.root(w) != b.root(w):
                    assert ov <= a.period + b.period
        assert audit_overlaps(w, runs).passed
