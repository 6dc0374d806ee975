"""Rate equation for the rod-number distribution.

The generator is the tridiagonal birth-death operator built from the mean
flip rates.  In physical time the equation carries an explicit ``2 Omega^2 t``
prefactor; in ``tau = Omega t^2`` it becomes time-homogeneous,
``dp/dtau = Omega * G p``, which is what the default integrator solves.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

from .combinatorics import RodGeometry, equilibrium_distribution, rate_table
from .distribution import NEGATIVE_TOL, NORM_TOL, NumberDistribution, Observables, observables
from .exceptions import DomainError, IntegrationError

__all__ = [
    "MasterGenerator",
    "NumberDistribution",
    "Observables",
    "build_generator",
    "drift_diffusion",
    "evolve",
    "observables",
    "steady_state",
]

# an absolute tolerance far below the positivity floor keeps the tiny tail
# entries of early-time distributions from going negative
ATOL = 1e-15
RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class MasterGenerator:
    """Time-independent part ``G`` of the rate equation.

    ``up[n]`` and ``down[n]`` are the rates out of column ``n``; the scalar
    ``2 Omega^2 t`` is applied by :func:`evolve`.
    """

    geometry: RodGeometry
    up: np.ndarray = field(repr=False)
    down: np.ndarray = field(repr=False)

    def apply(self, p) -> np.ndarray:
        """``G p``: gain minus loss for every column."""
        p = np.asarray(p, dtype=float)
        out = -(self.up + self.down) * p
        out[1:] += self.up[:-1] * p[:-1]
        out[:-1] += self.down[1:] * p[1:]
        return out

    def flux(self, p) -> np.ndarray:
        """Net probability current ``up[n] p_n - down[n+1] p_{n+1}`` between neighbours."""
        p = np.asarray(p, dtype=float)
        return self.up[:-1] * p[:-1] - self.down[1:] * p[1:]

    def matrix(self) -> sp.csr_matrix:
        return sp.diags(
            [self.up[:-1], -(self.up + self.down), self.down[1:]],
            offsets=[-1, 0, 1],
            format="csr",
        )


def build_generator(geom: RodGeometry) -> MasterGenerator:
    rates = rate_table(geom)
    gen = MasterGenerator(geom, rates.t_up, rates.t_down)
    col_sums = np.asarray(gen.matrix().sum(axis=0)).ravel()
    scale = max(1.0, float(np.max(rates.t_up + rates.t_down)))
    if np.max(np.abs(col_sums)) > 1e-12 * scale:
        raise ArithmeticError("generator does not conserve probability")
    return gen


def steady_state(gen: MasterGenerator) -> NumberDistribution:
    """Equilibrium ``p_n ~ nu_n``, checked to be annihilated by the generator."""
    p = equilibrium_distribution(gen.geometry)
    residual = np.max(np.abs(gen.apply(p.p)))
    scale = max(1.0, float(np.max(gen.up + gen.down)))
    if residual > 1e-12 * scale:
        raise ArithmeticError(f"steady state residual {residual:.3e}")
    return p


def drift_diffusion(gen: MasterGenerator, n: int) -> tuple[float, float]:
    """``(down - up, down + up)`` at column ``n``, up to constant prefactors."""
    n = gen.geometry.check_n(n)
    return float(gen.down[n] - gen.up[n]), float(gen.down[n] + gen.up[n])


def _check_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DomainError("time grid must be a nonempty 1-d sequence")
    if np.any(t < 0) or np.any(np.diff(t) < 0):
        raise DomainError("time grid must be nonnegative and ascending")
    return t


def _as_distribution(gen, values, t_phys):
    out = []
    for t, p in zip(t_phys, values):
        if p.min() < -NEGATIVE_TOL:
            raise IntegrationError(f"p_n = {p.min():.3e} < 0 at Omega t = {t:g}")
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise IntegrationError(f"total probability {p.sum()!r} at Omega t = {t:g}")
        out.append(NumberDistribution(gen.geometry, p))
    return out


def evolve(
    gen: MasterGenerator,
    p0: NumberDistribution,
    t_grid,
    omega: float = 1.0,
    method: str = "tau",
) -> list[NumberDistribution]:
    """Integrate the rate equation and sample it at physical times ``t_grid``.

    Parameters
    ----------
    method : {"tau", "t", "expm"}
        ``"tau"`` (default) runs the implicit Radau integrator on the
        homogeneous equation in ``tau = Omega t^2``.  ``"t"`` integrates the explicit
        ``2 Omega^2 t`` form in physical time.  ``"expm"`` applies the
        matrix exponential ``exp(Omega tau G)`` directly.

    Raises
    ------
    DomainError
        If ``p0`` is not normalised or the grid is malformed.
    IntegrationError
        If an output leaves the probability simplex beyond round-off.
    """
    if not isinstance(p0, NumberDistribution):
        p0 = NumberDistribution(gen.geometry, p0)
    if p0.geometry != gen.geometry:
        raise DomainError("initial distribution and generator differ in geometry")
    if omega <= 0:
        raise DomainError("omega must be positive")
    t = _check_grid(t_grid)
    tau = omega * t**2
    y0 = np.array(p0.p)

    G = gen.matrix()
    if method == "tau":
        J = omega * G
        values = _integrate(lambda _, y: omega * gen.apply(y), tau, y0, lambda _, y: J)
    elif method == "t":
        values = _integrate(
            lambda s, y: 2 * omega**2 * s * gen.apply(y), t, y0, lambda s, y: 2 * omega**2 * s * G
        )
    elif method == "expm":
        values = [expm_multiply(omega * tk * G, y0) if tk > 0 else y0.copy() for tk in tau]
    else:
        raise DomainError(f"unknown method {method!r}")
    return _as_distribution(gen, values, t)


def _integrate(rhs, grid, y0, jac):
    end = float(grid[-1])
    if end == 0:
        return [y0.copy() for _ in grid]
    sol = solve_ivp(rhs, (0.0, end), y0, method="Radau", t_eval=grid, jac=jac, rtol=RTOL, atol=ATOL)
    if not sol.success:
        raise IntegrationError(sol.message)
    return list(sol.y.T)

