import json
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_strings, brute_runs
from maxreps import explorer
from maxreps.errors import BudgetExceeded, DomainError
from maxreps.explorer import (
    AUDITS,
    SweepReport,
    analyze,
    canonical_form,
    canonical_strings,
    count_canonical,
    density_table,
    exhaustive_sweep,
    fibonacci_stats,
    fibonacci_word,
    orbit_size,
    random_sweep,
    resolve_audits,
    square_prefixes,
    three_square_scan,
    work_estimate,
)
from maxreps.report import AuditReport
from maxreps.runs import enumerate_runs_fast


# -- canonical enumeration ----------------------------------------------------


@pytest.mark.parametrize("k,n", [(2, 1), (2, 6), (3, 5), (4, 6)])
def test_canonical_strings_are_relabeling_classes(k, n):
    classes = {canonical_form(w) for w in all_strings(k, n)}
    listed = list(canonical_strings(k, n))
    assert listed == sorted(classes)
    assert len(listed) == count_canonical(k, n)
    # Orbits partition the full population.
    assert sum(orbit_size(w, k) for w in listed) == k**n


def test_canonical_form_examples():
    assert canonical_form("bab") == b"aba"
    assert canonical_form("cacb") == b"abac"
    assert list(canonical_strings(2, 2)) == [b"aa", b"ab"]


def test_work_estimate_and_budget():
    assert work_estimate(2, 3) == 1 * 1 + 2 * 4 + 4 * 9
    with pytest.raises(BudgetExceeded) as err:
        exhaustive_sweep(2, 30)
    assert err.value.estimate > err.value.budget


def test_resolve_audits():
    assert resolve_audits("all") == tuple(AUDITS)
    assert resolve_audits("sync,density") == ("density", "sync")
    with pytest.raises(DomainError):
        resolve_audits("nope")


# -- per-string audits --------------------------------------------------------


def _brute_square_prefixes(w):
    out = {}
    for i in range(len(w)):
        for h in range(1, (len(w) - i) // 2 + 1):
            if w[i : i + h] == w[i + h : i + 2 * h]:
                u = w[i : i + h]
                prim = not any(h % d == 0 and u == u[:d] * (h // d) for d in range(1, h))
                out.setdefault(i + 1, []).append((h, prim))
    return out


@settings(max_examples=80)
@given(st.text(alphabet="ab", min_size=1, max_size=60))
def test_square_prefixes_match_brute_force(w):
    w = w.encode()
    assert square_prefixes(enumerate_runs_fast(w)) == _brute_square_prefixes(w)


def test_three_square_examples():
    w = b"aabaabaabaabaabaab"
    rep = three_square_scan(w)
    assert rep.passed and rep.tallies["chains"] > 0
    assert three_square_scan(b"ab").passed
    assert not three_square_scan(b"ab").tallies


def test_analyze_defaults_to_oracle():
    runs, reports = analyze(b"abbababbaba", resolve_audits("all"))
    assert len(runs) == 6
    assert all(rep.passed for rep in reports.values())


# -- sweeps -------------------------------------------------------------------


def test_tiny_exhaustive_sweep():
    rep = exhaustive_sweep(2, 2, audits="density", min_len=2)
    assert rep.strings == 2 and rep.covered == 4
    assert rep.max_runs_ratio == Fraction(1, 2) and rep.max_runs_witness == "aa"


def test_exhaustive_sweep_passes_binary_10():
    rep = exhaustive_sweep(2, 10)
    assert rep.passed
    assert rep.covered == sum(2**n for n in range(1, 11))


def test_sweep_thread_independent():
    a = exhaustive_sweep(2, 12, audits="three_close,exponent_window", threads=1)
    b = exhaustive_sweep(2, 12, audits="three_close,exponent_window", threads=2)
    assert a.to_json() == b.to_json()
    r1 = random_sweep(3, 80, 150, seed=9, threads=1)
    r2 = random_sweep(3, 80, 150, seed=9, threads=2)
    assert r1.to_json() == r2.to_json()


def test_random_sweep_deterministic_and_seed_sensitive():
    a = random_sweep(2, 64, 100, seed=1)
    assert a.to_json() == random_sweep(2, 64, 100, seed=1).to_json()
    assert a.to_json() != random_sweep(2, 64, 100, seed=2).to_json()
    assert a.spot_checks == 10
    assert a.population["generator"] == explorer.GENERATOR_ID


def test_random_sweep_zero_samples():
    rep = random_sweep(2, 512, 0, seed=42)
    assert rep.strings == 0 and rep.passed
    assert all(r["pass"] == r["fail"] == 0 for r in rep.results.values())


def test_random_sweep_lengths_in_range():
    seen = []
    orig = explorer.analyze

    def spy(w, audits, runs=None):
        seen.append(len(w))
        return orig(w, audits, runs)

    explorer.analyze = spy
    try:
        random_sweep(2, 50, 60, seed=3, min_len=10, audits="density")
    finally:
        explorer.analyze = orig
    assert len(seen) == 60 and min(seen) >= 10 and max(seen) <= 50


def test_periodic_population_exercises_large_families():
    rep = random_sweep(2, 300, 40, seed=4, population="periodic", audits="families,exponent_window")
    assert rep.passed
    assert rep.results["families"]["tallies"].get("gap_checked", 0) > 0
    with pytest.raises(DomainError):
        random_sweep(2, 10, 1, seed=0, population="other")


def test_assert_mode_stops_at_first_failure(monkeypatch):
    def always_fail(w, runs):
        rep = AuditReport("broken")
        rep.fail("always")
        return rep

    monkeypatch.setitem(AUDITS, "density", always_fail)
    rep = exhaustive_sweep(2, 8, audits="density", mode="assert")
    assert rep.aborted and rep.strings == 1 and not rep.passed
    rep = exhaustive_sweep(2, 8, audits="density", mode="survey")
    assert not rep.aborted and rep.strings == sum(count_canonical(2, n) for n in range(1, 9))
    assert len(rep.anomalies) == explorer.MAX_ANOMALIES


def test_report_round_trips_through_json():
    rep = random_sweep(2, 40, 20, seed=5)
    data = json.loads(rep.to_json())
    assert data["strings"] == 20 and data["passed"] is True
    assert Fraction(data["max_runs_ratio"]) == rep.max_runs_ratio
    assert "PASS three_close" in rep.to_text()


def test_merge_keeps_first_witness_on_ties():
    a = SweepReport({}, ("density",))
    b = SweepReport({}, ("density",))
    for rep, w in ((a, b"aa"), (b, b"bb")):
        runs, reports = analyze(w, ("density",))
        rep.record(w, runs, reports)
    a.merge(b)
    assert a.max_runs_witness == "aa" and a.strings == 2


# -- density and Fibonacci ----------------------------------------------------


def test_density_table_matches_brute_force():
    rows = density_table(2, 10)
    for row in rows:
        counts = [len(brute_runs(w)) for w in all_strings(2, row.n)]
        assert row.max_runs == max(counts)
        assert row.max_runs <= row.n
    assert [r.max_runs for r in rows[:8]] == [0, 1, 1, 2, 2, 3, 4, 5]
    assert rows[1].runs_witness == "aa"
    assert rows[0].csv() == "1,0,0,1,a"


def test_density_table_ternary_small():
    rows = density_table(3, 7)
    for row in rows:
        assert row.max_runs == max(len(brute_runs(w)) for w in all_strings(3, row.n))


def test_fibonacci_words():
    assert fibonacci_word(1) == b"b"
    assert fibonacci_word(2) == b"a"
    assert fibonacci_word(3) == b"ab"
    assert fibonacci_word(4) == b"aba"
    assert fibonacci_word(5) == b"abaab"
    assert len(enumerate_runs_fast(fibonacci_word(2))) == 0
    with pytest.raises(DomainError):
        fibonacci_word(0)
    with pytest.raises(DomainError):
        fibonacci_word(60)


def test_fibonacci_run_density_below_one():
    ratios = [fibonacci_stats(m).ratio for m in range(4, 26)]
    assert all(r < 1 for r in ratios)
    st20 = fibonacci_stats(20)
    assert st20.length == 6765
    # Density approaches a constant; the tail of the sequence is tight.
    assert abs(float(ratios[-1]) - float(ratios[-2])) < 1e-3


def test_random_sweep_all_audits_1000():
    rep = random_sweep(2, 512, 1000, seed=42)
    assert rep.passed and rep.spot_checks == 100


@pytest.mark.slow
def test_random_sweep_all_audits_10k():
    rep = random_sweep(2, 512, 10_000, seed=42)
    assert rep.passed and rep.strings == 10_000
