"""Brute-force oracles shared by the test modules.

Everything here works from first principles on plain Python integers so it
is independent of the package's own enumeration and counting code.
"""
from fractions import Fraction
from functools import lru_cache

import pytest


def cyclic_ok(bits: int, L: int, lam: int) -> bool:
    """No two set bits at cyclic distance <= lam."""
    sites = [j for j in range(L) if bits >> j & 1]
    for a in range(len(sites)):
        for b in range(a + 1, len(sites)):
            d = sites[b] - sites[a]
            if min(d, L - d) <= lam:
                return False
    return True


@lru_cache(maxsize=None)
def brute_states(L: int, lam: int) -> tuple:
    return tuple(b for b in range(1 << L) if cyclic_ok(b, L, lam))


@lru_cache(maxsize=None)
def brute_columns(L: int, lam: int) -> tuple:
    cols = {}
    for b in brute_states(L, lam):
        cols.setdefault(bin(b).count("1"), []).append(b)
    n_max = max(cols)
    return tuple(tuple(cols.get(n, ())) for n in range(n_max + 1))


def brute_neighbors(b: int, L: int, lam: int, valid: frozenset) -> list:
    return [b ^ (1 << j) for j in range(L) if (b ^ (1 << j)) in valid]


@lru_cache(maxsize=None)
def brute_path_stats(L: int, lam: int, n: int):
    """Exact (loop, refl, trans) column averages by walking the graph."""
    valid = frozenset(brute_states(L, lam))
    cols = brute_columns(L, lam)
    col = cols[n]
    deg = {b: brute_neighbors(b, L, lam, valid) for b in valid}
    loop = Fraction(sum(len(deg[b]) for b in col), len(col))

    def two_paths(a, c):
        return sum(1 for m in deg[a] if c in deg[m])

    if len(col) < 2:
        refl = Fraction(0)
    else:
        total = sum(two_paths(a, c) for a in col for c in col if a != c)
        refl = Fraction(total, len(col) * (len(col) - 1))
    trans = Fraction(0)
    for m in (n - 2, n + 2):
        if 0 <= m < len(cols) and cols[m]:
            total = sum(two_paths(a, c) for a in col for c in cols[m])
            trans += Fraction(total, len(col) * len(cols[m]))
    return loop, refl, trans


@pytest.fixture(scope="session")
def oracle():
    class Oracle:
        states = staticmethod(brute_states)
        columns = staticmethod(brute_columns)
        path_stats = staticmethod(brute_path_stats)
        ok = staticmethod(cyclic_ok)

    return Oracle
