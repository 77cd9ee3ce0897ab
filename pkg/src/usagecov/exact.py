"""Exact sums of floats via dyadic integers, rounded once on division.

Every finite float is n / 2**e for integers n, e >= 0, so sums and
products of floats are exact in integer arithmetic; ``int / int`` is
correctly rounded in Python.
"""

from __future__ import annotations

from typing import Iterable


def dyadic(x: float) -> tuple[int, int]:
    n, d = float(x).as_integer_ratio()
    return n, d.bit_length() - 1


def _align(terms: list[tuple[int, int]], e: int) -> int:
    return sum(n << (e - k) for n, k in terms)


def exact_ratio(num: Iterable[float], den: Iterable[float]) -> float:
    """sum(num) / sum(den), computed exactly and rounded once."""
    a = [dyadic(x) for x in num]
    b = [dyadic(x) for x in den]
    e = max((k for _, k in a + b), default=0)
    d = _align(b, e)
    if d == 0:
        raise ZeroDivisionError("zero denominator")
    return _align(a, e) / d


def exact_shares(values: Iterable[float]) -> tuple[float, ...]:
    """Each value divided by the exact total, each rounded once."""
    terms = [dyadic(x) for x in values]
    e = max((k for _, k in terms), default=0)
    total = _align(terms, e)
    if total == 0:
        raise ZeroDivisionError("zero total")
    return tuple((n << (e - k)) / total for n, k in terms)


def exact_weighted_mean(pairs: Iterable[tuple[float, float]]) -> tuple[float, bool]:
    """(sum w*v / sum w, whether sum w > 0); the mean is 0.0 when the total is not positive."""
    ws, prods = [], []
    for w, v in pairs:
        nw, ew = dyadic(w)
        nv, ev = dyadic(v)
        ws.append((nw, ew))
        prods.append((nw * nv, ew + ev))
    e = max((k for _, k in ws + prods), default=0)
    total = _align(ws, e)
    if total <= 0:
        return 0.0, False
    return _align(prods, e) / total, True
