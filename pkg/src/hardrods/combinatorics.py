"""Closed-form statistics of the hard-rod configuration network.

All quantities are functions of the ring length ``L`` and blockade radius
``lam`` only.  Counts such as ``nu_n`` overflow fixed-width integers long
before the interesting system sizes (``L = 300`` and beyond), so every
quantity is formed in log space or as a telescoped product of O(1) ratios.
For ``L <= 64`` an exact integer/rational path is available and is used as a
self-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .distribution import NumberDistribution
from .exceptions import DomainError

EXACT_MAX_L = 64


@dataclass(frozen=True)
class RodGeometry:
    """Periodic lattice of ``L`` sites carrying rods of length ``lam + 1``.

    Parameters
    ----------
    L : int
        Number of lattice sites.
    lam : int
        Blockade radius in sites.
    boundary : str
        Only ``"periodic"`` is supported.
    """

    L: int
    lam: int
    boundary: str = "periodic"

    def __post_init__(self):
        for name in ("L", "lam"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise DomainError(f"{name} must be an integer, got {value!r}")
        if self.lam < 1:
            raise DomainError(f"lam must be positive, got {self.lam}")
        if self.L < self.lam + 1:
            raise DomainError(
                f"L={self.L} cannot hold a rod of length {self.lam + 1}"
            )
        if self.boundary != "periodic":
            raise DomainError(
                f"only periodic boundaries are supported, got {self.boundary!r}"
            )
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "lam", int(self.lam))

    @classmethod
    def from_length_ratio(cls, l_over_rc, lam: int) -> "RodGeometry":
        """Geometry at fixed physical length ``l/r_c``: ``L = (l/r_c) * lam``."""
        L = Fraction(l_over_rc).limit_denominator(10**6) * lam
        if L.denominator != 1 or L <= 0:
            raise DomainError(
                f"l/r_c={l_over_rc} with lam={lam} gives non-integer L={float(L)}"
            )
        return cls(int(L), lam)

    @property
    def rod_length(self) -> int:
        return self.lam + 1

    @property
    def n_max(self) -> int:
        return self.L // (self.lam + 1)

    def density(self, n):
        """Hard-rod density ``n * lam / L`` (scalar or array)."""
        return n * self.lam / self.L

    def check_n(self, n: int) -> int:
        if not 0 <= n <= self.n_max:
            raise DomainError(f"rod count n={n} outside 0..{self.n_max}")
        return int(n)


@dataclass(frozen=True)
class LogCount:
    """A nonnegative count carried as its natural log.

    ``log_value`` is ``-inf`` for a zero count.  ``exact_value`` holds the
    integer itself when it was cheap to compute.
    """

    log_value: float
    exact_value: Optional[int] = None

    @property
    def value(self) -> float:
        if self.exact_value is not None:
            return float(self.exact_value)
        return math.exp(self.log_value)

    def __int__(self):
        if self.exact_value is None:
            raise ValueError("count has no exact representation")
        return self.exact_value


@dataclass(frozen=True)
class RateTable:
    """Mean single-flip rates ``T_{n->n+1}`` (``t_up``) and ``T_{n->n-1}`` (``t_down``)."""

    geometry: RodGeometry
    t_up: np.ndarray = field(repr=False)
    t_down: np.ndarray = field(repr=False)


# ---------------------------------------------------------------------------
# column sizes

def max_rods(geom: RodGeometry) -> int:
    return geom.n_max


def _log_nu(L: int, lam: int, n: int) -> float:
    if n == 0:
        return 0.0
    return (
        math.log(L)
        + math.lgamma(L - lam * n)
        - math.lgamma(n + 1)
        - math.lgamma(L - (lam + 1) * n + 1)
    )


def exact_nu(geom: RodGeometry, n: int) -> int:
    """Column size as an exact integer (no size limit, but slow for huge L)."""
    n = geom.check_n(n)
    if n == 0:
        return 1
    L, lam = geom.L, geom.lam
    num = L * math.factorial(L - 1 - lam * n)
    den = math.factorial(n) * math.factorial(L - (lam + 1) * n)
    q, r = divmod(num, den)
    assert r == 0
    return q


def nu(geom: RodGeometry, n: int) -> LogCount:
    """Number of configurations with exactly ``n`` rods on the ring."""
    n = geom.check_n(n)
    log_value = _log_nu(geom.L, geom.lam, n)
    exact = exact_nu(geom, n) if geom.L <= EXACT_MAX_L else None
    return LogCount(log_value, exact)


def log_nu_all(geom: RodGeometry) -> np.ndarray:
    """``log nu_n`` for every column, accumulated from the rate ratios.

    Summing ``log(t_up[n] / (n+1))`` keeps the absolute error at the level
    of the individual ratios instead of the O(L log L) size of the
    log-gamma terms.
    """
    t_up = _t_up(geom)
    n = np.arange(1, geom.n_max + 1)
    steps = np.log(t_up[:-1]) - np.log(n)
    return np.concatenate([[0.0], np.cumsum(steps)])


# ---------------------------------------------------------------------------
# rates

def _t_up(geom: RodGeometry) -> np.ndarray:
    # c_{n+1,n} / nu_n telescopes to prod_{k<lam} (A-k)/(B-k) * (A-lam)
    # with A = L-(lam+1)n free sites and B = L-1-lam*n.
    L, lam = geom.L, geom.lam
    n = np.arange(geom.n_max, dtype=float)
    A = L - (lam + 1) * n
    B = L - 1 - lam * n
    k = np.arange(lam, dtype=float)
    ratios = (A[:, None] - k) / (B[:, None] - k)
    up = np.prod(ratios, axis=1) * (A - lam)
    return np.concatenate([up, [0.0]])


def rate_table(geom: RodGeometry) -> RateTable:
    t_up = _t_up(geom)
    t_down = np.arange(geom.n_max + 1, dtype=float)
    t_up.setflags(write=False)
    t_down.setflags(write=False)
    return RateTable(geom, t_up, t_down)


def exact_rates(geom: RodGeometry) -> tuple[list[Fraction], list[Fraction]]:
    """Rational ``(t_up, t_down)`` straight from the link counts."""
    nus = [exact_nu(geom, n) for n in range(geom.n_max + 1)]
    up = [Fraction((n + 1) * nus[n + 1], nus[n]) for n in range(geom.n_max)]
    up.append(Fraction(0))
    down = [Fraction(n) for n in range(geom.n_max + 1)]
    return up, down


def link_count(geom: RodGeometry, n: int) -> LogCount:
    """Total number of links ``c_{n,n-1}`` between columns ``n`` and ``n-1``."""
    n = geom.check_n(n)
    if n == 0:
        return LogCount(-math.inf, 0 if geom.L <= EXACT_MAX_L else None)
    c = nu(geom, n)
    exact = n * c.exact_value if c.exact_value is not None else None
    return LogCount(math.log(n) + c.log_value, exact)


# ---------------------------------------------------------------------------
# second-order path statistics

def loop_avg(geom: RodGeometry, n: int) -> float:
    """Mean degree of a column-``n`` node: ``T_{n->n+1} + T_{n->n-1}``."""
    n = geom.check_n(n)
    rates = rate_table(geom)
    return float(rates.t_up[n] + rates.t_down[n])


def refl_avg(geom: RodGeometry, n: int) -> float:
    """Mean number of reflection paths between two distinct column-``n`` states.

    Uses the column-mean closure ``T (T - 1)`` for the intermediate column
    ``n-1``; near full packing this can go negative, as the closed form does.
    Zero when the column holds fewer than two states.
    """
    n = geom.check_n(n)
    lnu = log_nu_all(geom)
    if lnu[n] < math.log(1.5):
        return 0.0
    rates = rate_table(geom)
    # log(nu_n (nu_n - 1))
    log_pairs = 2 * lnu[n] + math.log1p(-math.exp(-lnu[n]))
    total = 0.0
    if n + 1 <= geom.n_max:
        d = rates.t_down[n + 1]
        total += d * (d - 1) * math.exp(lnu[n + 1] - log_pairs)
    if n >= 1:
        u = rates.t_up[n - 1]
        total += u * (u - 1) * math.exp(lnu[n - 1] - log_pairs)
    return float(total)


def trans_avg(geom: RodGeometry, n: int) -> float:
    """Mean number of two-flip paths from a column-``n`` state to columns ``n +- 2``."""
    n = geom.check_n(n)
    lnu = log_nu_all(geom)
    rates = rate_table(geom)
    weight = 0.0
    if n + 2 <= geom.n_max:
        weight += rates.t_down[n + 2] * rates.t_down[n + 1]
    if n >= 2:
        weight += rates.t_up[n - 2] * rates.t_up[n - 1]
    return float(weight * math.exp(-lnu[n]))


def exact_path_stats(geom: RodGeometry, n: int) -> tuple[Fraction, Fraction, Fraction]:
    """Rational ``(loop, refl, trans)`` for small rings, same conventions."""
    n = geom.check_n(n)
    up, down = exact_rates(geom)
    nus = [exact_nu(geom, k) for k in range(geom.n_max + 1)]
    loop = up[n] + down[n]
    refl = Fraction(0)
    if nus[n] >= 2:
        if n + 1 <= geom.n_max:
            refl += down[n + 1] * (down[n + 1] - 1) * nus[n + 1]
        if n >= 1:
            refl += up[n - 1] * (up[n - 1] - 1) * nus[n - 1]
        refl /= nus[n] * (nus[n] - 1)
    trans = Fraction(0)
    if n + 2 <= geom.n_max:
        trans += down[n + 2] * down[n + 1]
    if n >= 2:
        trans += up[n - 2] * up[n - 1]
    trans /= nus[n]
    return loop, refl, trans


# ---------------------------------------------------------------------------
# equilibrium

def equilibrium_weights(geom: RodGeometry) -> np.ndarray:
    """Unnormalised ``nu_n`` scaled so the largest entry is 1.

    Built by the ratio recursion ``w_{n+1} = w_n t_up[n] / (n+1)`` outward
    from the mode, so neighbouring entries satisfy detailed balance to a few
    ulp regardless of how large ``nu_n`` itself is.
    """
    t_up = _t_up(geom)
    lnu = log_nu_all(geom)
    mode = int(np.argmax(lnu))
    w = np.zeros(geom.n_max + 1)
    w[mode] = 1.0
    for n in range(mode, geom.n_max):
        w[n + 1] = w[n] * t_up[n] / (n + 1)
    for n in range(mode, 0, -1):
        w[n - 1] = w[n] * n / t_up[n - 1]
    return w


def equilibrium_distribution(geom: RodGeometry) -> NumberDistribution:
    """Microcanonical rod-number distribution ``p_n = nu_n / sum_m nu_m``."""
    w = equilibrium_weights(geom)
    return NumberDistribution(geom, w / w.sum())


def total_states(geom: RodGeometry) -> LogCount:
    """``sum_n nu_n``, the dimension of the constrained Hilbert space."""
    lnu = log_nu_all(geom)
    top = lnu.max()
    log_total = top + math.log(np.exp(lnu - top).sum())
    exact = None
    if geom.L <= EXACT_MAX_L:
        exact = sum(exact_nu(geom, n) for n in range(geom.n_max + 1))
    return LogCount(log_total, exact)
