"""Exact unitary dynamics of the blockaded spin chain.

In the infinite-blockade limit every allowed configuration has zero
interaction energy, so the Hamiltonian restricted to the configuration
network is ``Omega`` times its adjacency matrix.
"""
from __future__ import annotations

import concurrent.futures as cf
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .combinatorics import RodGeometry, equilibrium_distribution
from .confignet import (
    Configuration,
    ConfigurationNetwork,
    enumerate_network,
    sample_basis_state,
    sample_microstate,
)
from .distribution import NORM_TOL, NumberDistribution
from .exceptions import DomainError, IntegrationError
from .propagators import dense_propagate, lanczos_propagate, rk4_propagate

NORM_FAILURE = 1e-6
DEFAULT_WINDOW = (20.0, 40.0)
MIN_WINDOW_SAMPLES = 400


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    network: ConfigurationNetwork
    omega: float
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    _complex: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        # complex copy so matvecs on complex states skip a per-call upcast
        object.__setattr__(self, "_complex", self.matrix.astype(complex))

    def matvec(self, v):
        if np.iscomplexobj(v):
            return self._complex @ v
        return self.matrix @ v

    def expectation(self, psi) -> float:
        return float(np.vdot(psi, self.matrix @ psi).real)


@dataclass(frozen=True, eq=False)
class QuantumState:
    amplitudes: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if abs(np.linalg.norm(a) - 1.0) > NORM_TOL:
            raise DomainError(f"state norm {np.linalg.norm(a)!r} differs from 1")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def basis(cls, net: ConfigurationNetwork, config) -> "QuantumState":
        """Unit vector on one configuration (a ``Configuration`` or a state id)."""
        sid = net.state_id(config.bits) if isinstance(config, Configuration) else int(config)
        a = np.zeros(net.n_states, dtype=complex)
        a[sid] = 1.0
        return cls(a)


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    """Sampled observables of one evolution.

    ``p`` has one row per sample time.  ``states`` is only filled when the
    evolution was asked to keep amplitudes.
    """

    geometry: RodGeometry
    times: np.ndarray
    p: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)
    norm: np.ndarray = field(repr=False)
    states: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def mean_density(self) -> np.ndarray:
        return self.p @ np.arange(self.p.shape[1]) * self.geometry.lam / self.geometry.L

    @property
    def distributions(self) -> list[NumberDistribution]:
        return [NumberDistribution(self.geometry, row) for row in self.p]

    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm - 1.0)))

    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))


def build_hamiltonian(net: ConfigurationNetwork, omega: float = 1.0) -> SparseHamiltonian:
    """``Omega`` on every network link, nothing on the diagonal."""
    if omega <= 0:
        raise DomainError("omega must be positive")
    H = (net.adjacency.astype(float) * float(omega)).tocsr()
    H.sort_indices()
    return SparseHamiltonian(net, float(omega), H)


def number_distribution(psi, net: ConfigurationNetwork) -> NumberDistribution:
    """Weight of the state in each column: ``p_n = <psi|P_n|psi>``."""
    a = psi.amplitudes if isinstance(psi, QuantumState) else np.asarray(psi)
    p = np.bincount(net.rod_counts, weights=np.abs(a) ** 2, minlength=net.geometry.n_max + 1)
    return NumberDistribution(net.geometry, p)


def evolve_state(
    H: SparseHamiltonian,
    psi0,
    t_grid,
    backend: str = "lanczos",
    max_step: Optional[float] = None,
    tol: float = 1e-12,
    keep_states: bool = False,
) -> EvolutionTrace:
    """Propagate ``psi0`` under ``H`` and record observables on ``t_grid``.

    Parameters
    ----------
    backend : {"lanczos", "rk4", "dense"}
        Krylov steps of ``Omega dt <= 0.1`` by default; ``"rk4"`` uses fixed
        ``Omega dt <= 0.01``; ``"dense"`` diagonalises ``H`` (small systems).
    max_step : float, optional
        Step bound in units of ``Omega t``.

    Raises
    ------
    IntegrationError
        If the norm drifts by more than ``1e-6``.  States are never
        renormalised.
    """
    if not isinstance(psi0, QuantumState):
        psi0 = QuantumState(psi0)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t < 0) or np.any(np.diff(t) < 0):
        raise DomainError("time grid must be nonnegative and ascending")
    net = H.network
    counts = net.rod_counts
    n_cols = net.geometry.n_max + 1
    # Omega t is the natural unit, so step bounds scale with 1/Omega
    if backend == "lanczos":
        step = (0.1 if max_step is None else max_step) / H.omega
        stream = lanczos_propagate(H.matvec, psi0.amplitudes, t, max_step=step, tol=tol)
    elif backend == "rk4":
        step = (0.01 if max_step is None else max_step) / H.omega
        stream = rk4_propagate(H.matvec, psi0.amplitudes, t, max_step=step)
    elif backend == "dense":
        stream = zip(t, dense_propagate(H.matrix, psi0.amplitudes, t))
    else:
        raise DomainError(f"unknown backend {backend!r}")

    p = np.empty((t.size, n_cols))
    energy = np.empty(t.size)
    norm = np.empty(t.size)
    states = np.empty((t.size, net.n_states), dtype=complex) if keep_states else None
    for k, (tk, psi) in enumerate(stream):
        w = np.abs(psi) ** 2
        norm[k] = np.sqrt(w.sum())
        if abs(norm[k] - 1.0) > NORM_FAILURE:
            raise IntegrationError(
                f"norm drifted to {norm[k]!r} at Omega t = {tk * H.omega:g}; reduce the step"
            )
        p[k] = np.bincount(counts, weights=w, minlength=n_cols)
        energy[k] = H.expectation(psi)
        if keep_states:
            states[k] = psi
    return EvolutionTrace(net.geometry, t, p, energy, norm, states)


def time_averaged_distribution(trace: EvolutionTrace, window) -> NumberDistribution:
    """Trapezoidal time average of ``p_n`` over ``window = (t_lo, t_hi)``."""
    lo, hi = map(float, window)
    t = trace.times
    if not lo < hi:
        raise DomainError(f"empty window {window!r}")
    if lo < t[0] - 1e-12 or hi > t[-1] + 1e-12:
        raise DomainError(f"window {window!r} outside trace span [{t[0]:g}, {t[-1]:g}]")
    inside = (t > lo) & (t < hi)
    grid = np.concatenate([[lo], t[inside], [hi]])
    values = np.vstack(
        [
            [np.interp(lo, t, col) for col in trace.p.T],
            trace.p[inside],
            [np.interp(hi, t, col) for col in trace.p.T],
        ]
    )
    avg = np.trapezoid(values, grid, axis=0) / (hi - lo)
    return NumberDistribution(trace.geometry, avg)


def overlap_D(p_bar: NumberDistribution, p_eq: NumberDistribution) -> float:
    """``1 - TV(p_bar, p_eq)``: 1 for identical, 0 for disjoint distributions."""
    if p_bar.geometry != p_eq.geometry:
        raise DomainError("distributions live on different geometries")
    return 1.0 - 0.5 * float(np.abs(p_bar.p - p_eq.p).sum())


def window_grid(window=DEFAULT_WINDOW, samples: int = MIN_WINDOW_SAMPLES) -> np.ndarray:
    """``t = 0`` followed by ``samples + 1`` uniform points spanning the window."""
    lo, hi = window
    grid = np.linspace(lo, hi, max(samples, MIN_WINDOW_SAMPLES) + 1)
    return np.concatenate([[0.0], grid]) if lo > 0 else grid


@dataclass(frozen=True, eq=False)
class HistogramResult:
    geometry: RodGeometry
    n0: np.ndarray
    seeds: np.ndarray
    D: np.ndarray
    initial_counts: np.ndarray
    p_eq: NumberDistribution
    max_norm_drift: float
    max_energy_drift: float

    @property
    def initial_distribution(self) -> np.ndarray:
        return self.initial_counts / self.initial_counts.sum()


def _run_member(H, p_eq, n0, seed, window, samples, backend):
    net = H.network
    config = sample_microstate(net, n0, seed) if n0 is not None else sample_basis_state(net, seed)
    # time is carried in units of 1/Omega
    grid = window_grid(window, samples) / H.omega
    trace = evolve_state(H, QuantumState.basis(net, config), grid, backend=backend)
    p_bar = time_averaged_distribution(trace, (window[0] / H.omega, window[1] / H.omega))
    return config.rod_count, overlap_D(p_bar, p_eq), trace.norm_drift(), trace.energy_drift()


def histogram_run(
    geom: RodGeometry,
    ensemble: Sequence[tuple[Optional[int], int]],
    omega: float = 1.0,
    window=DEFAULT_WINDOW,
    samples: int = MIN_WINDOW_SAMPLES,
    backend: str = "lanczos",
    n_jobs: int = 1,
    network: Optional[ConfigurationNetwork] = None,
) -> HistogramResult:
    """Overlap ``D`` for an ensemble of basis-state initial conditions.

    Each member is ``(n0, seed)``; ``n0=None`` draws uniformly over all basis
    states.  ``window`` is in units of ``Omega t``.  Results are ordered by
    ensemble index whatever ``n_jobs`` is.
    """
    if not ensemble:
        raise DomainError("ensemble is empty")
    net = network if network is not None else enumerate_network(geom)
    H = build_hamiltonian(net, omega)
    p_eq = equilibrium_distribution(geom)
    args = [(H, p_eq, n0, seed, window, samples, backend) for n0, seed in ensemble]
    if n_jobs == 1:
        results = [_run_member(*a) for a in args]
    else:
        with cf.ProcessPoolExecutor(max_workers=n_jobs if n_jobs > 0 else None) as pool:
            results = list(pool.map(_run_member, *zip(*args)))
    n_init = np.array([r[0] for r in results])
    return HistogramResult(
        geometry=geom,
        n0=n_init,
        seeds=np.array([s for _, s in ensemble]),
        D=np.array([r[1] for r in results]),
        initial_counts=np.bincount(n_init, minlength=geom.n_max + 1),
        p_eq=p_eq,
        max_norm_drift=max(r[2] for r in results),
        max_energy_drift=max(r[3] for r in results),
    )
