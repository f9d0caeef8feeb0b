import itertools

import pytest


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow population sweeps")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


# -- independent brute-force oracles ------------------------------------------
# These use only slicing and comparison, nothing from the package.


def naive_period(w: bytes) -> int:
    n = len(w)
    return next(p for p in range(1, n + 1) if w[p:] == w[: n - p])


def brute_runs(w: bytes) -> set[tuple[int, int, int]]:
    """(start, end, period), 1-based, straight from the run definition."""
    n = len(w)
    out = set()
    for i in range(n):
        for j in range(i + 1, n):
            p = naive_period(w[i : j + 1])
            if j - i + 1 < 2 * p:
                continue
            if i > 0 and naive_period(w[i - 1 : j + 1]) <= p:
                continue
            if j < n - 1 and naive_period(w[i : j + 2]) <= p:
                continue
            out.add((i + 1, j + 1, p))
    return out


def naive_lce_forward(w: bytes, i: int, j: int) -> int:
    k = 0
    while i - 1 + k < len(w) and j - 1 + k < len(w) and w[i - 1 + k] == w[j - 1 + k]:
        k += 1
    return k


def naive_lce_backward(w: bytes, i: int, j: int) -> int:
    k = 0
    while i - 1 - k >= 0 and j - 1 - k >= 0 and w[i - 1 - k] == w[j - 1 - k]:
        k += 1
    return k


def all_strings(k: int, n: int):
    for t in itertools.product(b"abcd"[:k], repeat=n):
        yield bytes(t)


def as_triples(runs) -> set[tuple[int, int, int]]:
    return {(r.start, r.end, r.period) for r in runs}


# -- acceptance summary -------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the summary is printed at session end."""

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
