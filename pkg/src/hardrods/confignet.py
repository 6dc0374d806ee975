"""Explicit enumeration of blockade-respecting configurations on a ring.

States are bitmasks, bit ``j`` set when a rod is anchored on site ``j``.
Global state ids run column by column (ascending rod count) and, inside a
column, by ascending numeric bitmask value, so ids are reproducible.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np
import scipy.sparse as sp

from .combinatorics import RodGeometry, exact_nu
from .exceptions import DomainError, ResourceError

DEFAULT_STATE_CAP = 5_000_000
MAX_BITS = 62


@dataclass(frozen=True)
class Configuration:
    """A single arrangement of rods, stored as an ``L``-bit integer."""

    bits: int
    geometry: RodGeometry

    def __post_init__(self):
        L, lam = self.geometry.L, self.geometry.lam
        bits = int(self.bits)
        if bits < 0 or bits >> L:
            raise DomainError(f"bitmask {bits:#x} does not fit {L} sites")
        if not is_valid(bits, L, lam):
            raise DomainError(f"{bitstring(bits, L)} violates the blockade")
        object.__setattr__(self, "bits", bits)

    @property
    def rod_count(self) -> int:
        return self.bits.bit_count()

    @property
    def sites(self) -> list[int]:
        return [j for j in range(self.geometry.L) if self.bits >> j & 1]

    def __str__(self):
        return bitstring(self.bits, self.geometry.L)


def bitstring(bits: int, L: int) -> str:
    """Site 0 first, ``1`` for an occupied site."""
    return "".join("1" if bits >> j & 1 else "0" for j in range(L))


def _rotl(m, s: int, L: int, full):
    return ((m << s) | (m >> (L - s))) & full


def is_valid(bits: int, L: int, lam: int) -> bool:
    full = (1 << L) - 1
    return all(bits & _rotl(bits, s, L, full) == 0 for s in range(1, min(lam, L - 1) + 1))


@dataclass(frozen=True, eq=False)
class EmpiricalColumnStats:
    n: int
    mean_loop: float
    mean_refl: float
    mean_trans: float


@dataclass(frozen=True, eq=False)
class ColumnPathCounts:
    """Integer path totals behind :class:`EmpiricalColumnStats`.

    ``refl_paths`` counts two-flip paths between ordered pairs of distinct
    column-``n`` states; ``trans_up``/``trans_down`` count two-flip paths to
    columns ``n+2`` and ``n-2``.
    """

    n: int
    nu: int
    degree_sum: int
    refl_paths: int
    max_refl_paths: int
    trans_up: int
    trans_down: int
    nu_up: int
    nu_down: int

    def loop(self) -> Fraction:
        return Fraction(self.degree_sum, self.nu)

    def refl(self) -> Fraction:
        if self.nu < 2:
            return Fraction(0)
        return Fraction(self.refl_paths, self.nu * (self.nu - 1))

    def trans(self) -> Fraction:
        total = Fraction(0)
        if self.nu_up:
            total += Fraction(self.trans_up, self.nu * self.nu_up)
        if self.nu_down:
            total += Fraction(self.trans_down, self.nu * self.nu_down)
        return total


@dataclass(frozen=True, eq=False)
class ConfigurationNetwork:
    """All configurations of a geometry plus their single-flip links.

    Attributes
    ----------
    states : ndarray of int64
        Bitmask of every state, indexed by global state id.
    offsets : ndarray
        ``states[offsets[n]:offsets[n+1]]`` is column ``n``.
    adjacency : scipy.sparse.csr_matrix
        Symmetric 0/1 matrix, one entry per ordered linked pair.
    """

    geometry: RodGeometry
    states: np.ndarray = field(repr=False)
    offsets: np.ndarray = field(repr=False)
    adjacency: sp.csr_matrix = field(repr=False)
    _by_value: np.ndarray = field(repr=False)

    @property
    def n_states(self) -> int:
        return int(self.states.size)

    @property
    def rod_counts(self) -> np.ndarray:
        return np.repeat(np.arange(self.offsets.size - 1), np.diff(self.offsets))

    @property
    def column_sizes(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def columns(self) -> list[np.ndarray]:
        return [self.states[a:b] for a, b in zip(self.offsets[:-1], self.offsets[1:])]

    def column_slice(self, n: int) -> slice:
        n = self.geometry.check_n(n)
        return slice(int(self.offsets[n]), int(self.offsets[n + 1]))

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    @property
    def n_edges(self) -> int:
        return self.adjacency.nnz // 2

    def state_id(self, bits: int) -> int:
        pos = np.searchsorted(self.states[self._by_value], bits)
        if pos >= self.n_states or self.states[self._by_value[pos]] != bits:
            raise DomainError(f"{bitstring(bits, self.geometry.L)} is not a network state")
        return int(self._by_value[pos])

    def index(self, config: Configuration) -> tuple[int, int]:
        """``(column, position within column)`` of a configuration."""
        sid = self.state_id(config.bits)
        n = config.rod_count
        return n, sid - int(self.offsets[n])

    def configuration(self, state_id: int) -> Configuration:
        return Configuration(int(self.states[state_id]), self.geometry)

    def neighbors(self, state_id: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[state_id]:a.indptr[state_id + 1]]

    def edges(self) -> np.ndarray:
        """``(n_edges, 2)`` array of linked ids with the smaller id first."""
        coo = sp.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return np.column_stack([coo.row[order], coo.col[order]]).astype(np.int64)

    def __iter__(self) -> Iterator[Configuration]:
        for bits in self.states:
            yield Configuration(int(bits), self.geometry)


def _linear_masks(L: int, lam: int) -> np.ndarray:
    # open-chain masks with no two set bits closer than lam + 1
    masks = np.zeros(1, dtype=np.int64)
    for k in range(L):
        w = min(k, lam)
        window = ((1 << w) - 1) << (k - w)
        ok = (masks & window) == 0
        masks = np.concatenate([masks, masks[ok] | np.int64(1 << k)])
    return masks


def enumerate_network(geom: RodGeometry, cap: int | None = None) -> ConfigurationNetwork:
    """Enumerate every configuration of ``geom`` and link single flips.

    Raises
    ------
    ResourceError
        If the number of states exceeds ``cap`` (default 5e6, or the
        ``HARDRODS_STATE_CAP`` environment variable).
    """
    if cap is None:
        cap = int(os.environ.get("HARDRODS_STATE_CAP", DEFAULT_STATE_CAP))
    L, lam = geom.L, geom.lam
    sizes = [exact_nu(geom, n) for n in range(geom.n_max + 1)]
    required = sum(sizes)
    if required > cap:
        raise ResourceError(
            f"L={L}, lam={lam} needs {required} states, above the cap of {cap}"
        )
    if L > MAX_BITS:
        raise ResourceError(f"L={L} exceeds the {MAX_BITS}-bit state encoding")

    masks = _linear_masks(L, lam)
    full = np.int64((1 << L) - 1)
    keep = np.ones(masks.size, dtype=bool)
    for s in range(1, min(lam, L - 1) + 1):
        keep &= (masks & _rotl(masks, s, L, full)) == 0
    masks = masks[keep]

    counts = np.bitwise_count(masks).astype(np.int64)
    order = np.lexsort((masks, counts))
    states = masks[order]
    counts = counts[order]
    offsets = np.concatenate([[0], np.cumsum(np.bincount(counts, minlength=geom.n_max + 1))])
    assert states.size == required

    by_value = np.argsort(states, kind="stable")
    sorted_vals = states[by_value]
    rows, cols = [], []
    ids = np.arange(states.size, dtype=np.int64)
    for j in range(L):
        flipped = states ^ np.int64(1 << j)
        pos = np.searchsorted(sorted_vals, flipped)
        pos[pos >= states.size] = 0
        hit = sorted_vals[pos] == flipped
        rows.append(ids[hit])
        cols.append(by_value[pos[hit]])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    adj = sp.csr_matrix(
        (np.ones(rows.size, dtype=np.int64), (rows, cols)), shape=(states.size, states.size)
    )
    adj.sort_indices()
    for arr in (states, offsets, by_value):
        arr.setflags(write=False)
    return ConfigurationNetwork(geom, states, offsets, adj, by_value)


# ---------------------------------------------------------------------------
# graph statistics

def column_path_counts(net: ConfigurationNetwork, n: int) -> ColumnPathCounts:
    """Count one- and two-flip paths out of column ``n`` on the graph itself."""
    geom = net.geometry
    n = geom.check_n(n)
    A = net.adjacency
    col = net.column_slice(n)
    B = A[col]
    nu_n = B.shape[0]

    P = (B @ B.T).tocoo()
    off = P.row != P.col
    refl_paths = int(P.data[off].sum())
    max_refl = int(P.data[off].max()) if off.any() else 0

    def trans_to(m):
        if not 0 <= m <= geom.n_max:
            return 0, 0
        target = net.column_slice(m)
        return int((B @ A[:, target]).sum()), target.stop - target.start

    up, nu_up = trans_to(n + 2)
    down, nu_down = trans_to(n - 2)
    return ColumnPathCounts(
        n=n,
        nu=nu_n,
        degree_sum=int(B.sum()),
        refl_paths=refl_paths,
        max_refl_paths=max_refl,
        trans_up=up,
        trans_down=down,
        nu_up=nu_up,
        nu_down=nu_down,
    )


def empirical_stats(net: ConfigurationNetwork, n: int) -> EmpiricalColumnStats:
    """Loop, reflection and transmission averages measured on the graph."""
    c = column_path_counts(net, n)
    return EmpiricalColumnStats(c.n, float(c.loop()), float(c.refl()), float(c.trans()))


def h2_offdiag_ratio(net: ConfigurationNetwork, normalize: str = "sum") -> float:
    """Off-diagonal to diagonal weight of the squared adjacency matrix.

    ``normalize="sum"`` compares the summed entries.  ``normalize="entry"``
    compares the mean off-diagonal entry with the mean diagonal entry,
    which is the per-pair comparison that shrinks with system size.
    """
    d = net.degrees.astype(np.int64)
    # every off-diagonal 2-path passes through a middle node m: d_m (d_m - 1) of them
    diag = int(d.sum())
    off = int((d * (d - 1)).sum())
    if normalize == "sum":
        return off / diag
    if normalize == "entry":
        N = net.n_states
        if N < 2:
            return 0.0
        return (off / (N * (N - 1))) / (diag / N)
    raise DomainError(f"unknown normalization {normalize!r}")


# ---------------------------------------------------------------------------
# sampling

def sample_microstate(net: ConfigurationNetwork, n: int, seed: int) -> Configuration:
    """Uniform draw from column ``n`` using ``numpy.random.default_rng(seed)``."""
    col = net.column_slice(n)
    size = col.stop - col.start
    if size == 0:
        raise DomainError(f"column {n} is empty")
    rng = np.random.default_rng(seed)
    return net.configuration(col.start + int(rng.integers(size)))


def sample_basis_state(net: ConfigurationNetwork, seed: int) -> Configuration:
    """Uniform draw over all states, so rod counts follow ``nu_n``."""
    rng = np.random.default_rng(seed)
    return net.configuration(int(rng.integers(net.n_states)))


# ---------------------------------------------------------------------------
# export

def write_edge_list(net: ConfigurationNetwork, path) -> None:
    """One ``i j`` line per link, ``i < j``, sorted."""
    with open(path, "w", newline="\n") as fh:
        fh.write("# source target\n")
        for i, j in net.edges():
            fh.write(f"{i} {j}\n")


def write_columns(net: ConfigurationNetwork, path) -> None:
    """One ``state_id n bitstring`` line per state."""
    L = net.geometry.L
    with open(path, "w", newline="\n") as fh:
        fh.write("# state_id n bits\n")
        for sid, (bits, n) in enumerate(zip(net.states, net.rod_counts)):
            fh.write(f"{sid} {n} {bitstring(int(bits), L)}\n")
