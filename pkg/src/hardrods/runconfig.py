"""Run configuration: parsing, defaults and cross-field validation."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .combinatorics import RodGeometry
from .exceptions import ConfigError

SCHEMA_VERSION = 1
KINDS = (
    "table1",
    "network-stats",
    "master-evolve",
    "quantum-evolve",
    "compare",
    "histogram",
    "export-network",
)
NEEDS_GEOMETRY = set(KINDS) - {"table1"}
NEEDS_SEED = {"quantum-evolve", "compare", "histogram"}
BACKENDS = ("lanczos", "rk4", "dense")
OUTPUT_ROOT_ENV = "HARDRODS_OUTPUT_ROOT"


def _as_list(value):
    if value is None:
        return None
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass
class RunConfig:
    """Everything one run needs.  See ``docs`` in the README for the file format.

    Geometry is given either as ``L`` + ``lam`` (lists are zipped, scalars
    broadcast) or as ``l_over_rc`` + ``lam`` with ``L = l_over_rc * lam``.
    Times are in units of ``1/Omega``.
    """

    kind: str
    lam: Any = None
    L: Any = None
    l_over_rc: Any = None
    omega: float = 1.0
    times: Optional[list] = None
    t_max: Optional[float] = None
    samples: int = 400
    n0: Any = None
    seed: Optional[int] = None
    count: int = 1
    window: list = field(default_factory=lambda: [20.0, 40.0])
    windows: Optional[list] = None
    backend: str = "lanczos"
    n_jobs: int = 1
    state_cap: Optional[int] = None
    output_dir: Optional[str] = None
    plot: bool = True
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError([(k, "unknown field") for k in unknown])
        if "kind" not in data:
            raise ConfigError([("kind", "missing")])
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_mapping(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    # -- resolved views ---------------------------------------------------

    def geometries(self) -> list[RodGeometry]:
        lams = _as_list(self.lam)
        if self.l_over_rc is not None:
            return [RodGeometry.from_length_ratio(self.l_over_rc, int(lam)) for lam in lams]
        Ls = _as_list(self.L)
        if len(Ls) == 1:
            Ls = Ls * len(lams)
        if len(lams) == 1:
            lams = lams * len(Ls)
        return [RodGeometry(int(L), int(lam)) for L, lam in zip(Ls, lams)]

    def initial_counts(self) -> list[Optional[int]]:
        n0 = _as_list(self.n0)
        k = len(self.geometries()) if self.kind in NEEDS_GEOMETRY else 1
        if n0 is None:
            return [None] * k
        return n0 * k if len(n0) == 1 else n0

    def seeds(self) -> list[int]:
        return [int(self.seed) + i for i in range(self.count)]

    def time_grid(self) -> np.ndarray:
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        return np.linspace(0.0, float(self.t_max), int(self.samples) + 1)

    def resolved_output_dir(self) -> Path:
        if self.output_dir is not None:
            return Path(self.output_dir)
        return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs")) / self.kind


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _is_num(x) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool)


def validate(config) -> RunConfig:
    """Check every field and cross-field rule; raise one error listing all violations."""
    if isinstance(config, dict):
        config = RunConfig.from_mapping(config)
    c = config
    errors: list[tuple[str, str]] = []

    if c.schema_version != SCHEMA_VERSION:
        errors.append(("schema_version", f"expected {SCHEMA_VERSION}, got {c.schema_version!r}"))
    if c.kind not in KINDS:
        errors.append(("kind", f"must be one of {', '.join(KINDS)}"))

    if c.kind in NEEDS_GEOMETRY:
        lams = _as_list(c.lam)
        if not lams:
            errors.append(("lam", "required"))
        elif not all(_is_int(x) and x >= 1 for x in lams):
            errors.append(("lam", "must be positive integers"))
        else:
            if c.l_over_rc is not None and c.L is not None:
                errors.append(("L", "give either L or l_over_rc, not both"))
            elif c.l_over_rc is not None:
                if not _is_num(c.l_over_rc) or c.l_over_rc <= 0:
                    errors.append(("l_over_rc", "must be a positive number"))
                else:
                    for lam in lams:
                        L = Fraction(c.l_over_rc).limit_denominator(10**6) * lam
                        if L.denominator != 1:
                            errors.append(
                                ("l_over_rc", f"l_over_rc * lam = {float(L):g} is not an integer for lam={lam}")
                            )
            elif c.L is None:
                errors.append(("L", "required unless l_over_rc is given"))
            else:
                Ls = _as_list(c.L)
                if not all(_is_int(x) for x in Ls):
                    errors.append(("L", "must be integers"))
                elif len(Ls) > 1 and len(lams) > 1 and len(Ls) != len(lams):
                    errors.append(("L", "L and lam lists differ in length"))
                else:
                    pairs = zip(Ls * (len(lams) if len(Ls) == 1 else 1), lams * (len(Ls) if len(lams) == 1 else 1))
                    for L, lam in pairs:
                        if L < lam + 1:
                            errors.append(("L", f"L={L} cannot hold a rod with lam={lam}"))

    if not _is_num(c.omega) or c.omega <= 0:
        errors.append(("omega", "must be positive"))

    if c.kind in {"master-evolve", "quantum-evolve", "compare"}:
        if c.times is None and c.t_max is None:
            errors.append(("times", "give times or t_max"))
        if c.times is not None:
            t = np.asarray(c.times, dtype=float)
            if t.ndim != 1 or t.size == 0 or np.any(t < 0) or np.any(np.diff(t) < 0):
                errors.append(("times", "must be a nonempty nonnegative ascending list"))
        if c.t_max is not None and (not _is_num(c.t_max) or c.t_max <= 0):
            errors.append(("t_max", "must be positive"))
    if not _is_int(c.samples) or c.samples < 1:
        errors.append(("samples", "must be a positive integer"))

    if c.kind in NEEDS_SEED:
        if c.seed is None:
            errors.append(("seed", "required for ensemble experiments"))
        elif not _is_int(c.seed) or c.seed < 0:
            errors.append(("seed", "must be a nonnegative integer"))
        if not _is_int(c.count) or c.count < 1:
            errors.append(("count", "must be a positive integer"))

    n0 = _as_list(c.n0)
    if n0 is not None and not all(x is None or (_is_int(x) and x >= 0) for x in n0):
        errors.append(("n0", "must be nonnegative integers"))
    if c.kind in {"quantum-evolve", "compare"} and (n0 is None or None in n0):
        errors.append(("n0", f"required for {c.kind}"))

    w = c.window
    if not (isinstance(w, (list, tuple)) and len(w) == 2 and all(_is_num(x) for x in w) and 0 <= w[0] < w[1]):
        errors.append(("window", "must be [t_lo, t_hi] with 0 <= t_lo < t_hi"))
    if c.windows is not None:
        if not all(isinstance(x, (list, tuple)) and len(x) == 2 and x[0] < x[1] for x in c.windows):
            errors.append(("windows", "must be a list of [t_lo, t_hi] pairs"))
    if c.backend not in BACKENDS:
        errors.append(("backend", f"must be one of {', '.join(BACKENDS)}"))
    if not _is_int(c.n_jobs) or c.n_jobs == 0:
        errors.append(("n_jobs", "must be a nonzero integer (-1 for all cores)"))

    if errors:
        raise ConfigError(errors)

    if c.kind in NEEDS_GEOMETRY:
        geoms = c.geometries()
        k = c.initial_counts()
        if len(k) != len(geoms):
            errors.append(("n0", f"{len(k)} values for {len(geoms)} geometries"))
        else:
            for g, n in zip(geoms, k):
                if n is not None and n > g.n_max:
                    errors.append(("n0", f"n0={n} exceeds n_max={g.n_max} for L={g.L}, lam={g.lam}"))
    if errors:
        raise ConfigError(errors)
    return c


def validation_errors(config) -> list[tuple[str, str]]:
    """All ``(field, message)`` violations of ``config``; empty when valid."""
    try:
        validate(config)
    except ConfigError as exc:
        return exc.errors
    return []
