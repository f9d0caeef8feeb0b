"""Periods, primitivity, exponents and the two classical periodicity lemmas.

Strings are handled as raw bytes. ``str`` arguments are UTF-8 encoded, and
sequences of small integers are accepted as symbol lists. Positions reported
to callers are 1-based, as in ``w[i..j]``.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence, Union

from .errors import DomainError, NotApplicable, PreconditionError

StrLike = Union[bytes, bytearray, memoryview, str, Sequence[int]]


def as_bytes(w: StrLike) -> bytes:
    if isinstance(w, bytes):
        return w
    if isinstance(w, str):
        return w.encode("utf-8")
    return bytes(w)


def _nonempty(w: StrLike) -> bytes:
    w = as_bytes(w)
    if not w:
        raise DomainError("operation undefined on the empty string")
    return w


def failure_function(w: StrLike) -> list[int]:
    """Border array: ``f[t]`` is the longest proper border of ``w[:t+1]``."""
    w = as_bytes(w)
    f = [0] * len(w)
    k = 0
    for t in range(1, len(w)):
        c = w[t]
        while k and w[k] != c:
            k = f[k - 1]
        if w[k] == c:
            k += 1
        f[t] = k
    return f


def has_period(w: StrLike, p: int) -> bool:
    w = as_bytes(w)
    if not 1 <= p <= len(w):
        return False
    return w[p:] == w[: len(w) - p]


def periods_of(w: StrLike) -> list[int]:
    """All periods of ``w`` in increasing order, by direct comparison."""
    w = _nonempty(w)
    return [p for p in range(1, len(w) + 1) if w[p:] == w[: len(w) - p]]


def smallest_period(w: StrLike) -> int:
    """The period of ``w``, from its border array in linear time."""
    w = _nonempty(w)
    return len(w) - failure_function(w)[-1]


def _smallest_period_naive(w: StrLike) -> int:
    w = _nonempty(w)
    n = len(w)
    for p in range(1, n + 1):
        if all(w[i] == w[i + p] for i in range(n - p)):
            return p
    raise AssertionError("unreachable: |w| is always a period")


def is_primitive(w: StrLike) -> bool:
    w = _nonempty(w)
    p = smallest_period(w)
    return p == len(w) or len(w) % p != 0


def primitive_root(w: StrLike) -> tuple[bytes, int]:
    """Return ``(root, power)`` with ``root`` primitive and ``root**power == w``."""
    w = _nonempty(w)
    p = smallest_period(w)
    if len(w) % p:
        return w, 1
    return w[:p], len(w) // p


def exponent_of(w: StrLike) -> Fraction:
    w = _nonempty(w)
    return Fraction(len(w), smallest_period(w))


def check_fine_wilf(w: StrLike, p: int, q: int) -> bool:
    """Check that ``gcd(p, q)`` is a period of ``w``, given periods p, q.

    Uses the weak length gate ``|w| >= p + q``. Raises ``PreconditionError``
    when p or q is not a period and ``NotApplicable`` when ``w`` is too short
    for the lemma to say anything. A ``False`` result means the lemma failed,
    which can only be a bug.
    """
    w = as_bytes(w)
    for r in (p, q):
        if not has_period(w, r):
            raise PreconditionError(f"{r} is not a period of the input")
    if len(w) < p + q:
        raise NotApplicable(f"|w| = {len(w)} < p + q = {p + q}")
    return has_period(w, gcd(p, q))


def occurrences_in_square(w: StrLike) -> list[int]:
    """1-based start positions of ``w`` inside ``ww``; ``[1, |w|+1]`` if primitive."""
    w = _nonempty(w)
    if not is_primitive(w):
        raise PreconditionError("synchronization applies to primitive words only")
    ww = w + w
    n = len(w)
    out = []
    pos = ww.find(w)
    while pos != -1:
        out.append(pos + 1)
        pos = ww.find(w, pos + 1)
    assert out and out[0] == 1 and out[-1] == n + 1
    return out
