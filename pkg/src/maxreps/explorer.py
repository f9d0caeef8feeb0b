"""Population sweeps: exhaustive and random, density tables, Fibonacci words.

Exhaustive sweeps visit one string per alphabet-relabeling class: the
canonical representative renames symbols by first occurrence to ``a``, ``b``,
... Reversal is not quotiented. Reports are deterministic for a fixed
population, seed and audit selection, independent of the worker count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from multiprocessing import Pool
from typing import Callable, Iterable, Iterator

import numpy as np

from . import delta as _delta
from . import exponents as _exp
from .errors import BudgetExceeded, DomainError, LemmaViolation, NotApplicable
from .report import AuditReport, frac_str, jsonable
from .runs import RunSet, enumerate_runs_fast, enumerate_runs_oracle
from .strings import (
    StrLike,
    as_bytes,
    check_fine_wilf,
    is_primitive,
    occurrences_in_square,
    periods_of,
)

ALPHABET = b"abcdefghijklmnopqrstuvwxyz"
DEFAULT_BUDGET = 50_000_000
LARGE_BUDGET = 2_000_000_000
ORACLE_MAX_LEN = 4096
GENERATOR_ID = "numpy.random.PCG64/SeedSequence.spawn"
MAX_ANOMALIES = 20


# -- canonical enumeration ---------------------------------------------------


def canonical_form(w: StrLike) -> bytes:
    """Rename symbols by order of first occurrence to a, b, c, ..."""
    w = as_bytes(w)
    names: dict[int, int] = {}
    out = bytearray()
    for c in w:
        if c not in names:
            names[c] = ALPHABET[len(names)]
        out.append(names[c])
    return bytes(out)


def canonical_strings(k: int, n: int, prefix: bytes = b"") -> Iterator[bytes]:
    """Canonical strings of length n over k symbols, lexicographic order."""
    if n == 0:
        yield b""
        return
    buf = bytearray(prefix)
    used = max(buf) - ALPHABET[0] + 1 if buf else 0

    def rec(pos, used):
        if pos == n:
            yield bytes(buf)
            return
        for s in range(min(used + 1, k)):
            buf.append(ALPHABET[s])
            yield from rec(pos + 1, max(used, s + 1))
            buf.pop()

    yield from rec(len(buf), used)


@lru_cache(maxsize=None)
def count_canonical(k: int, n: int) -> int:
    """Number of canonical strings: sum of Stirling numbers S(n, d), d <= k."""
    if n == 0:
        return 1
    # table[d] = S(m, d) for current m
    table = [1] + [0] * k
    for _ in range(n):
        table = [0] + [d * table[d] + table[d - 1] for d in range(1, k + 1)]
    return sum(table)


def orbit_size(w: StrLike, k: int) -> int:
    """Strings over k symbols that canonicalise to the same representative."""
    d = len(set(as_bytes(w)))
    return math.perm(k, d)


def work_estimate(k: int, max_len: int, min_len: int = 1) -> int:
    return sum(count_canonical(k, n) * n * n for n in range(min_len, max_len + 1))


# -- per-string audits -------------------------------------------------------


def fine_wilf_audit(w: StrLike, runs: RunSet | None = None) -> AuditReport:
    w = as_bytes(w)
    rep = AuditReport("fine_wilf")
    ps = periods_of(w)
    for i, p in enumerate(ps):
        for q in ps[i:]:
            try:
                ok = check_fine_wilf(w, p, q)
            except NotApplicable:
                break
            rep.bump("applicable")
            if not ok:
                rep.fail("gcd_not_a_period", p=p, q=q)
    return rep


def sync_audit(w: StrLike, runs: RunSet | None = None) -> AuditReport:
    w = as_bytes(w)
    rep = AuditReport("sync")
    if is_primitive(w):
        rep.bump("primitive")
        occ = occurrences_in_square(w)
        if occ != [1, len(w) + 1]:
            rep.fail("inner_occurrence", positions=occ)
    return rep


def square_prefixes(runs: RunSet) -> dict[int, list[tuple[int, bool]]]:
    """Map 1-based position -> [(half length, root primitive)] of squares there.

    Every square lies inside a run whose period divides its half length; the
    half is primitive exactly when it equals the run's period.
    """
    out: dict[int, list[tuple[int, bool]]] = {}
    for r in runs:
        m = 1
        while 2 * m * r.period <= r.length:
            half = m * r.period
            for i in range(r.start, r.end - 2 * half + 2):
                out.setdefault(i, []).append((half, m == 1))
            m += 1
    for v in out.values():
        v.sort()
    return out


def three_square_scan(w: StrLike, runs: RunSet | None = None) -> AuditReport:
    """Nested square prefixes uu < vv < xx with u primitive obey |u|+|v| <= |x|."""
    w = as_bytes(w)
    rep = AuditReport("three_square")
    if not w:
        return rep
    runs = runs if runs is not None else enumerate_runs_fast(w)
    for pos, halves in sorted(square_prefixes(runs).items()):
        if len(halves) < 3:
            continue
        lengths = [h for h, _ in halves]
        for a in range(len(halves)):
            u, prim = halves[a]
            if not prim:
                continue
            for b in range(a + 1, len(halves) - 1):
                v = lengths[b]
                x = lengths[b + 1]
                rep.bump("chains")
                if u + v > x:
                    rep.fail("three_square", position=pos, u=u, v=v, x=x)
    return rep


def equivalence_audit(w: StrLike, runs: RunSet | None = None) -> AuditReport:
    w = as_bytes(w)
    rep = AuditReport("equivalence")
    oracle = enumerate_runs_oracle(w)
    fast = enumerate_runs_fast(w)
    if oracle != fast:
        only_o = sorted(set(oracle.runs) - set(fast.runs))
        only_f = sorted(set(fast.runs) - set(oracle.runs))
        rep.fail("oracle_fast_mismatch", oracle_only=only_o[:10], fast_only=only_f[:10])
    return rep


def density_audit(w: StrLike, runs: RunSet) -> AuditReport:
    rep = AuditReport("density")
    if len(runs) > runs.n:
        rep.fail("more_runs_than_length", runs=len(runs), n=runs.n)
    return rep


def exp_bound_audit(w: StrLike, runs: RunSet) -> AuditReport:
    rep = AuditReport("exp_bound")
    total = _exp.sum_of_exponents(runs)
    rep.tallies["total"] = total
    if total > 48 * runs.n:
        rep.fail("forty_eight_n", total=total, bound=48 * runs.n)
    return rep


AUDITS: dict[str, Callable[[bytes, RunSet], AuditReport]] = {
    "equivalence": equivalence_audit,
    "three_close": _delta.audit_three_close,
    "pair_cases": _delta.classify_close_pairs,
    "case_i": _delta.audit_case_i,
    "families": _delta.audit_families,
    "count_bound": _delta.count_bound_report,
    "density": density_audit,
    "no_two_fat": _exp.check_no_two_fat,
    "overlap": _exp.audit_overlaps,
    "exponent_window": _exp.audit_exponent_window,
    "exp_bound": exp_bound_audit,
    "fine_wilf": fine_wilf_audit,
    "sync": sync_audit,
    "three_square": three_square_scan,
}


def resolve_audits(audits) -> tuple[str, ...]:
    if audits is None or audits == "all":
        return tuple(AUDITS)
    if isinstance(audits, str):
        audits = [a for a in audits.split(",") if a]
    unknown = [a for a in audits if a not in AUDITS]
    if unknown:
        raise DomainError(f"unknown audits: {', '.join(unknown)}")
    return tuple(a for a in AUDITS if a in audits)


# -- reports -----------------------------------------------------------------


@dataclass
class SweepReport:
    population: dict
    audits: tuple[str, ...]
    results: dict[str, dict] = field(default_factory=dict)
    strings: int = 0
    covered: int = 0
    max_runs_ratio: Fraction = Fraction(0)
    max_runs_witness: str | None = None
    max_sumexp_ratio: Fraction = Fraction(0)
    max_sumexp_witness: str | None = None
    anomalies: list[dict] = field(default_factory=list)
    spot_checks: int = 0
    aborted: bool = False

    def __post_init__(self):
        for a in self.audits:
            self.results.setdefault(a, {"pass": 0, "fail": 0, "tallies": {}, "annotations": {}})

    @property
    def passed(self) -> bool:
        return all(r["fail"] == 0 for r in self.results.values())

    def record(self, w: bytes, runs: RunSet, reports: dict[str, AuditReport], weight: int = 1):
        self.strings += 1
        self.covered += weight
        n = len(w)
        if n:
            ratio = Fraction(len(runs), n)
            if ratio > self.max_runs_ratio or self.max_runs_witness is None:
                self.max_runs_ratio, self.max_runs_witness = ratio, w.decode("latin-1")
            se = _exp.sum_of_exponents(runs) / n
            if se > self.max_sumexp_ratio or self.max_sumexp_witness is None:
                self.max_sumexp_ratio, self.max_sumexp_witness = se, w.decode("latin-1")
        for name, rep in reports.items():
            res = self.results[name]
            res["pass" if rep.passed else "fail"] += 1
            _accumulate(res["tallies"], rep.tallies)
            for a in rep.annotations:
                res["annotations"][a["kind"]] = res["annotations"].get(a["kind"], 0) + 1
            if rep.failures and len(self.anomalies) < MAX_ANOMALIES:
                self.anomalies.append(
                    {"audit": name, "witness": w.decode("latin-1"), "failure": jsonable(rep.failures[0])}
                )

    def merge(self, other: "SweepReport"):
        self.strings += other.strings
        self.covered += other.covered
        if other.max_runs_witness is not None and (
            self.max_runs_witness is None or other.max_runs_ratio > self.max_runs_ratio
        ):
            self.max_runs_ratio, self.max_runs_witness = other.max_runs_ratio, other.max_runs_witness
        if other.max_sumexp_witness is not None and (
            self.max_sumexp_witness is None or other.max_sumexp_ratio > self.max_sumexp_ratio
        ):
            self.max_sumexp_ratio, self.max_sumexp_witness = other.max_sumexp_ratio, other.max_sumexp_witness
        for name, res in other.results.items():
            mine = self.results[name]
            mine["pass"] += res["pass"]
            mine["fail"] += res["fail"]
            _accumulate(mine["tallies"], res["tallies"])
            for k, v in res["annotations"].items():
                mine["annotations"][k] = mine["annotations"].get(k, 0) + v
        room = MAX_ANOMALIES - len(self.anomalies)
        self.anomalies.extend(other.anomalies[:room])
        self.spot_checks += other.spot_checks
        self.aborted = self.aborted or other.aborted

    def to_dict(self) -> dict:
        return jsonable(
            {
                "population": self.population,
                "audits": list(self.audits),
                "passed": self.passed,
                "aborted": self.aborted,
                "strings": self.strings,
                "covered": self.covered,
                "spot_checks": self.spot_checks,
                "max_runs_ratio": self.max_runs_ratio,
                "max_runs_witness": self.max_runs_witness,
                "max_sumexp_ratio": self.max_sumexp_ratio,
                "max_sumexp_witness": self.max_sumexp_witness,
                "results": self.results,
                "anomalies": self.anomalies,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        pop = " ".join(f"{k}={v}" for k, v in sorted(self.population.items()))
        lines = [
            f"population: {pop}",
            f"strings: {self.strings} covered: {self.covered} spot_checks: {self.spot_checks}",
            f"max runs/n: {frac_str(self.max_runs_ratio)} witness={self.max_runs_witness}",
            f"max sum-exp/n: {frac_str(self.max_sumexp_ratio)} witness={self.max_sumexp_witness}",
        ]
        for name in self.audits:
            r = self.results[name]
            status = "PASS" if r["fail"] == 0 else "FAIL"
            notes = ", ".join(f"{k}={v}" for k, v in sorted(r["annotations"].items()))
            lines.append(f"{status} {name}: pass={r['pass']} fail={r['fail']}" + (f" [{notes}]" if notes else ""))
        for a in self.anomalies:
            lines.append(f"anomaly {a['audit']}: {a['witness']} {a['failure']['reason']}")
        if self.aborted:
            lines.append("aborted at first failure (assert mode)")
        return "\n".join(lines)


def _accumulate(into: dict, tallies: dict):
    for k, v in tallies.items():
        if isinstance(v, bool) or not isinstance(v, int):
            continue
        into[k] = into.get(k, 0) + v


def analyze(w: bytes, audits: Iterable[str], runs: RunSet | None = None) -> tuple[RunSet, dict[str, AuditReport]]:
    """Enumerate runs (oracle unless given) and run the selected audits."""
    runs = runs if runs is not None else enumerate_runs_oracle(w)
    return runs, {name: AUDITS[name](w, runs) for name in audits}


# -- exhaustive --------------------------------------------------------------


def _exhaustive_tasks(k: int, min_len: int, max_len: int, split: int = 10):
    for n in range(min_len, max_len + 1):
        if n <= split:
            yield (k, n, b"")
        else:
            for pre in canonical_strings(k, split):
                yield (k, n, pre)


def _run_exhaustive_task(args):
    k, n, prefix, audits, mode = args
    rep = SweepReport({}, audits)
    for w in canonical_strings(k, n, prefix):
        runs, reports = analyze(w, audits)
        rep.record(w, runs, reports, orbit_size(w, k))
        if mode == "assert" and any(not r.passed for r in reports.values()):
            rep.aborted = True
            break
    return rep


def _drive(tasks, worker, threads: int, base: SweepReport, mode: str) -> SweepReport:
    if threads > 1:
        with Pool(threads) as pool:
            parts = pool.imap(worker, tasks, chunksize=4)
            for part in parts:
                base.merge(part)
                if mode == "assert" and part.aborted:
                    pool.terminate()
                    break
    else:
        for t in tasks:
            part = worker(t)
            base.merge(part)
            if mode == "assert" and part.aborted:
                break
    return base


def exhaustive_sweep(
    k: int,
    max_len: int,
    audits="all",
    mode: str = "assert",
    threads: int = 1,
    min_len: int = 1,
    budget: int = DEFAULT_BUDGET,
) -> SweepReport:
    """Run the selected audits on every canonical string with length in range."""
    if k < 2:
        raise DomainError("alphabet size must be at least 2")
    if mode not in ("assert", "survey"):
        raise DomainError(f"unknown mode {mode!r}")
    est = work_estimate(k, max_len, min_len)
    if est > budget:
        raise BudgetExceeded(est, budget)
    audits = resolve_audits(audits)
    pop = {"kind": "exhaustive", "k": k, "min_len": min_len, "max_len": max_len}
    base = SweepReport(pop, audits)
    tasks = [(k, n, pre, audits, mode) for k, n, pre in _exhaustive_tasks(k, min_len, max_len)]
    return _drive(tasks, _run_exhaustive_task, threads, base, mode)


# -- random ------------------------------------------------------------------


def random_string(rng: np.random.Generator, k: int, n: int) -> bytes:
    return (rng.integers(0, k, n, dtype=np.uint8) + ALPHABET[0]).tobytes()


def periodic_rich_string(rng: np.random.Generator, k: int, n: int) -> bytes:
    """Random context interleaved with blocks u^j t u^j, t a proper prefix of u.

    Such blocks create many runs sharing one center, which uniform strings
    almost never do.
    """
    out = bytearray()
    while len(out) < n:
        if rng.random() < 0.5:
            out += random_string(rng, k, int(rng.integers(1, 9)))
            continue
        u = random_string(rng, k, int(rng.integers(2, 5)))
        t = u[: int(rng.integers(1, len(u)))]
        j = int(rng.integers(2, 15))
        out += u * j + t + u * j
    return bytes(out[:n])


POPULATIONS = {"uniform": random_string, "periodic": periodic_rich_string}


def _run_random_task(args):
    seeds, first_index, k, min_len, max_len, audits, mode, spot_every, population = args
    make = POPULATIONS[population]
    rep = SweepReport({}, audits)
    for off, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        n = int(rng.integers(min_len, max_len + 1)) if min_len < max_len else max_len
        w = make(rng, k, n)
        runs = enumerate_runs_fast(w)
        if spot_every and (first_index + off) % spot_every == 0:
            pre = w[:ORACLE_MAX_LEN]
            spot = runs if len(pre) == n else enumerate_runs_fast(pre)
            if enumerate_runs_oracle(pre) != spot:
                rep.anomalies.append({"audit": "spot_check", "witness": pre.decode("latin-1"), "failure": {"reason": "oracle_fast_mismatch"}})
                rep.aborted = mode == "assert"
            rep.spot_checks += 1
        _, reports = analyze(w, audits, runs)
        rep.record(w, runs, reports)
        if mode == "assert" and (rep.aborted or any(not r.passed for r in reports.values())):
            rep.aborted = True
            break
    return rep


def random_sweep(
    k: int,
    length: int,
    samples: int,
    seed: int,
    audits="all",
    mode: str = "assert",
    threads: int = 1,
    min_len: int | None = None,
    spot_every: int = 10,
    population: str = "uniform",
) -> SweepReport:
    """Audit ``samples`` random strings; lengths uniform in [min_len, length].

    Runs come from the fast enumerator; every ``spot_every``-th sample (and
    its first ORACLE_MAX_LEN symbols when longer) is re-enumerated by the
    oracle.
    """
    if k < 1 or length < 1:
        raise DomainError("need k >= 1 and length >= 1")
    min_len = length if min_len is None else min_len
    if population not in POPULATIONS:
        raise DomainError(f"unknown population {population!r}")
    audits = resolve_audits(audits)
    pop = {
        "kind": "random",
        "k": k,
        "min_len": min_len,
        "max_len": length,
        "samples": samples,
        "seed": seed,
        "generator": GENERATOR_ID,
        "population": population,
    }
    base = SweepReport(pop, audits)
    if samples <= 0:
        return base
    seeds = np.random.SeedSequence(seed).spawn(samples)
    step = 64
    tasks = [
        (seeds[i : i + step], i, k, min_len, length, audits, mode, spot_every, population)
        for i in range(0, samples, step)
    ]
    return _drive(tasks, _run_random_task, threads, base, mode)


# -- density -----------------------------------------------------------------


@dataclass
class DensityRow:
    n: int
    max_runs: int
    runs_witness: str
    max_sum_exp: Fraction
    sum_exp_witness: str

    def csv(self) -> str:
        e = self.max_sum_exp
        return f"{self.n},{self.max_runs},{e.numerator},{e.denominator},{self.runs_witness}"

    def to_dict(self) -> dict:
        return jsonable(self.__dict__)


def _density_task(args):
    k, n, prefix = args
    best_r, best_rw, best_e, best_ew = -1, "", Fraction(-1), ""
    for w in canonical_strings(k, n, prefix):
        runs = enumerate_runs_oracle(w)
        if len(runs) > best_r:
            best_r, best_rw = len(runs), w.decode()
        e = _exp.sum_of_exponents(runs)
        if e > best_e:
            best_e, best_ew = e, w.decode()
    return n, best_r, best_rw, best_e, best_ew


def density_table(k: int, max_len: int, threads: int = 1, budget: int = DEFAULT_BUDGET, min_len: int = 1) -> list[DensityRow]:
    """Per length: the largest run count and exponent sum, first witness of each."""
    if k < 2:
        raise DomainError("alphabet size must be at least 2")
    est = work_estimate(k, max_len, min_len)
    if est > budget:
        raise BudgetExceeded(est, budget)
    tasks = list(_exhaustive_tasks(k, min_len, max_len))
    if threads > 1:
        with Pool(threads) as pool:
            parts = pool.map(_density_task, tasks)
    else:
        parts = [_density_task(t) for t in tasks]
    rows: dict[int, DensityRow] = {}
    for n, r, rw, e, ew in parts:  # tasks are in canonical order; first max wins
        row = rows.get(n)
        if row is None:
            rows[n] = DensityRow(n, r, rw, e, ew)
            continue
        if r > row.max_runs:
            row.max_runs, row.runs_witness = r, rw
        if e > row.max_sum_exp:
            row.max_sum_exp, row.sum_exp_witness = e, ew
    out = [rows[n] for n in sorted(rows)]
    if k == 2:
        for row in out:
            if row.max_runs > row.n:
                raise LemmaViolation(f"binary length {row.n} has {row.max_runs} runs")
    return out


# -- Fibonacci words ---------------------------------------------------------

FIB_MAX_LEN = 20_000_000


def fibonacci_length(m: int) -> int:
    a, b = 1, 1
    for _ in range(m - 1):
        a, b = b, a + b
    return a


def fibonacci_word(m: int) -> bytes:
    """F_1 = b, F_2 = a, F_m = F_{m-1} F_{m-2}."""
    if m < 1:
        raise DomainError("Fibonacci index starts at 1")
    if fibonacci_length(m) > FIB_MAX_LEN:
        raise DomainError(f"F_{m} is longer than {FIB_MAX_LEN} symbols")
    if m == 1:
        return b"b"
    prev, cur = b"b", b"a"
    for _ in range(m - 2):
        prev, cur = cur, cur + prev
    return cur


@dataclass
class FibStats:
    m: int
    length: int
    runs: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.runs, self.length)

    def to_dict(self) -> dict:
        r = self.ratio
        return {"m": self.m, "length": self.length, "runs": self.runs, "ratio": frac_str(r), "ratio_float": round(float(r), 6)}


def fibonacci_stats(m: int) -> FibStats:
    w = fibonacci_word(m)
    return FibStats(m, len(w), len(enumerate_runs_fast(w)))
