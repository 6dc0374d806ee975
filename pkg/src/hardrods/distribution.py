"""Probability distributions over the number of rods on the lattice."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError

NORM_TOL = 1e-9
NEGATIVE_TOL = 1e-12


@dataclass(frozen=True)
class Observables:
    mean_density: float
    q_ratio: float


@dataclass(frozen=True, eq=False)
class NumberDistribution:
    """``p_n`` for ``n = 0..n_max`` on a given geometry.

    Entries down to ``-1e-12`` are treated as round-off and set to zero;
    anything more negative, or a total differing from 1 by more than
    ``1e-9``, is rejected.
    """

    geometry: "RodGeometry"  # noqa: F821
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (self.geometry.n_max + 1,):
            raise DomainError(
                f"distribution has shape {p.shape}, expected ({self.geometry.n_max + 1},)"
            )
        if not np.all(np.isfinite(p)):
            raise DomainError("distribution contains non-finite entries")
        if p.min() < -NEGATIVE_TOL:
            raise DomainError(f"negative probability {p.min():.3e}")
        p[p < 0] = 0.0
        total = p.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise DomainError(f"distribution sums to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def point_mass(cls, geometry, n0: int) -> "NumberDistribution":
        n0 = geometry.check_n(n0)
        p = np.zeros(geometry.n_max + 1)
        p[n0] = 1.0
        return cls(geometry, p)

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.p.size)

    def mean(self) -> float:
        return float(self.n @ self.p)

    def variance(self) -> float:
        m = self.mean()
        return float(((self.n - m) ** 2) @ self.p)

    def mean_density(self) -> float:
        return self.mean() * self.geometry.lam / self.geometry.L

    def total_variation(self, other: "NumberDistribution") -> float:
        if other.geometry != self.geometry:
            raise DomainError("distributions live on different geometries")
        return 0.5 * float(np.abs(self.p - other.p).sum())


def observables(p: NumberDistribution) -> Observables:
    """Mean rod density and the variance-to-mean ratio ``Q`` (0 when empty)."""
    mean = p.mean()
    q = p.variance() / mean if mean > 0 else 0.0
    return Observables(p.mean_density(), q)
