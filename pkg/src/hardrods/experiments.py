"""Experiment runner: turns a validated :class:`RunConfig` into CSV artifacts.

Every run writes its CSVs, optional plotting scripts and a ``manifest.json``
listing each file with its SHA-256 digest.  Numbers are printed with 17
significant digits so reruns are byte-identical.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .combinatorics import (
    RodGeometry,
    equilibrium_distribution,
    log_nu_all,
    loop_avg,
    rate_table,
    refl_avg,
    trans_avg,
)
from .confignet import (
    empirical_stats,
    enumerate_network,
    h2_offdiag_ratio,
    sample_microstate,
    write_columns,
    write_edge_list,
)
from .distribution import NumberDistribution, observables
from .exceptions import DomainError
from .master import build_generator, evolve
from .plotting import emit_plot_script
from .quantum import (
    QuantumState,
    build_hamiltonian,
    evolve_state,
    histogram_run,
    overlap_D,
    time_averaged_distribution,
    window_grid,
)
from .runconfig import OUTPUT_ROOT_ENV, RunConfig, validate

# (L, lam, n) rows of the reference table with the printed values
TABLE1 = [
    (12, 1, 2, "8.22", "0.54", "2.22"),
    (12, 1, 4, "5.71", "0.17", "0.51"),
    (300, 1, 2, "296", "0.026", "2"),
    (300, 1, 75, "174.78", "1.27e-57", "1.39e-57"),
    (300, 5, 2, "280.1", "0.026", "2"),
    (300, 5, 25, "93.39", "1.64e-27", "3.18e-27"),
    (300, 14, 2, "244.78", "0.025", "2"),
    (300, 14, 10, "68", "3.11e-13", "1.73e-12"),
]

ENUMERABLE_STATES = 2_000_000


@dataclass
class RunManifest:
    config: dict
    files: list
    version: str
    duration_s: float

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "files": self.files,
            "version": self.version,
            "duration_s": self.duration_s,
        }


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


class _Writer:
    """Collects written paths for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[Path] = []
        root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        p = self.root / name
        self.files.append(p)
        return p

    def csv(self, name: str, header, rows) -> Path:
        p = self.path(name)
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(x) for x in row])
        return p

    def plot(self, csvs, style: str, name: str, **kwargs):
        return emit_plot_script(csvs, style, self.path(name), **kwargs)


def _tag(g: RodGeometry) -> str:
    return f"L{g.L}_lam{g.lam}"


def _enumerable(g: RodGeometry) -> bool:
    return np.exp(log_nu_all(g)).sum() <= ENUMERABLE_STATES


def _distribution_rows(times, dists):
    for t, p in zip(times, dists):
        for n, pn in enumerate(p):
            yield t, n, pn


# ---------------------------------------------------------------------------
# experiment kinds

def _table1(cfg: RunConfig, out: _Writer):
    rows = []
    nets = {}
    for L, lam, n, *printed in TABLE1:
        g = RodGeometry(L, lam)
        emp = [None, None, None]
        if _enumerable(g):
            net = nets.setdefault(g, enumerate_network(g, cfg.state_cap))
            s = empirical_stats(net, n)
            emp = [s.mean_loop, s.mean_refl, s.mean_trans]
        rows.append([L, lam, n, loop_avg(g, n), refl_avg(g, n), trans_avg(g, n), *emp, *printed])
    out.csv(
        "table1.csv",
        ["L", "lam", "n", "loop", "refl", "trans",
         "loop_empirical", "refl_empirical", "trans_empirical",
         "loop_printed", "refl_printed", "trans_printed"],
        rows,
    )


def _network_stats(cfg: RunConfig, out: _Writer):
    summary = []
    for g in cfg.geometries():
        rates = rate_table(g)
        lnu = log_nu_all(g)
        net = enumerate_network(g, cfg.state_cap) if _enumerable(g) else None
        rows = []
        for n in range(g.n_max + 1):
            emp = [None, None, None]
            if net is not None:
                s = empirical_stats(net, n)
                emp = [s.mean_loop, s.mean_refl, s.mean_trans]
            rows.append([n, lnu[n], rates.t_up[n], rates.t_down[n],
                         loop_avg(g, n), refl_avg(g, n), trans_avg(g, n), *emp])
        out.csv(
            f"network_{_tag(g)}.csv",
            ["n", "log_nu", "t_up", "t_down", "loop", "refl", "trans",
             "loop_empirical", "refl_empirical", "trans_empirical"],
            rows,
        )
        ratio = (h2_offdiag_ratio(net), h2_offdiag_ratio(net, "entry")) if net else (None, None)
        summary.append([g.L, g.lam, net.n_states if net else None, *ratio])
    out.csv("network_summary.csv",
            ["L", "lam", "n_states", "h2_offdiag_sum_ratio", "h2_offdiag_entry_ratio"], summary)


def _master_traces(cfg, out, g, n0, t):
    gen = build_generator(g)
    p0 = NumberDistribution.point_mass(g, n0 or 0)
    # config times are Omega t; the integrator takes physical t
    dists = evolve(gen, p0, t / cfg.omega, omega=cfg.omega)
    dist_csv = out.csv(f"master_{_tag(g)}_dist.csv", ["omega_t", "n", "p_n"],
                       _distribution_rows(t, [d.p for d in dists]))
    obs = [observables(d) for d in dists]
    obs_csv = out.csv(f"master_{_tag(g)}_obs.csv", ["omega_t", "mean_density", "q_ratio"],
                      [[tk, o.mean_density, o.q_ratio] for tk, o in zip(t, obs)])
    return dist_csv, obs_csv


def _master_evolve(cfg: RunConfig, out: _Writer):
    t = cfg.time_grid()
    steady = []
    dists = []
    for g, n0 in zip(cfg.geometries(), cfg.initial_counts()):
        d, _ = _master_traces(cfg, out, g, n0, t)
        dists.append((d, g.lam / g.L))
        o = observables(equilibrium_distribution(g))
        steady.append([g.L, g.lam, o.mean_density, o.q_ratio])
    steady_csv = out.csv("master_steady.csv", ["L", "lam", "mean_density", "q_ratio"], steady)
    if cfg.plot:
        for d, scale in dists:
            out.plot([d], "fig3", d.stem + "_plot.py", density_scale=scale)
        out.plot([steady_csv], "fig4d", "master_steady_plot.py")


def _quantum_trace(cfg, out, H, g, n0, seed, t, prefix):
    net = H.network
    config = sample_microstate(net, n0, seed)
    trace = evolve_state(H, QuantumState.basis(net, config), t / cfg.omega, backend=cfg.backend)
    dist_csv = out.csv(f"{prefix}_dist.csv", ["omega_t", "n", "p_n"], _distribution_rows(t, trace.p))
    obs = [observables(NumberDistribution(g, row)) for row in trace.p]
    obs_csv = out.csv(
        f"{prefix}_obs.csv",
        ["omega_t", "mean_density", "q_ratio", "energy"],
        [[tk, o.mean_density, o.q_ratio, e / cfg.omega] for tk, o, e in zip(t, obs, trace.energy)],
    )
    return config, trace, dist_csv, obs_csv


def _quantum_evolve(cfg: RunConfig, out: _Writer):
    t = cfg.time_grid()
    window_rows = []
    obs_files = []
    for g, n0 in zip(cfg.geometries(), cfg.initial_counts()):
        net = enumerate_network(g, cfg.state_cap)
        H = build_hamiltonian(net, cfg.omega)
        for seed in cfg.seeds():
            config, trace, _, obs_csv = _quantum_trace(
                cfg, out, H, g, n0, seed, t, f"quantum_{_tag(g)}_seed{seed}")
            obs_files.append(obs_csv)
            density = trace.mean_density
            for lo, hi in cfg.windows or []:
                sel = (t >= lo) & (t <= hi)
                window_rows.append([g.L, g.lam, seed, str(config), lo, hi,
                                    density[sel].mean() if sel.any() else None])
    if cfg.windows:
        out.csv("quantum_windows.csv", ["L", "lam", "seed", "initial", "t_lo", "t_hi", "mean_density"],
                window_rows)
    if cfg.plot:
        out.plot(obs_files, "trace", "quantum_plot.py")


def _compare(cfg: RunConfig, out: _Writer):
    t = np.union1d(cfg.time_grid(), window_grid(cfg.window, cfg.samples))
    lo, hi = cfg.window
    rows = []
    for g, n0 in zip(cfg.geometries(), cfg.initial_counts()):
        net = enumerate_network(g, cfg.state_cap)
        H = build_hamiltonian(net, cfg.omega)
        _, master_obs = _master_traces(cfg, out, g, n0, t)
        p_eq = equilibrium_distribution(g)
        eq_density = p_eq.mean_density()
        files = [master_obs]
        for seed in cfg.seeds():
            config, trace, _, obs_csv = _quantum_trace(
                cfg, out, H, g, n0, seed, t, f"quantum_{_tag(g)}_seed{seed}")
            files.append(obs_csv)
            p_bar = time_averaged_distribution(trace, (lo / cfg.omega, hi / cfg.omega))
            rows.append([g.L, g.lam, n0, seed, str(config), p_bar.mean_density(), eq_density,
                         p_bar.mean_density() / eq_density - 1.0, overlap_D(p_bar, p_eq),
                         trace.norm_drift(), trace.energy_drift()])
        if cfg.plot:
            out.plot(files, "fig5", f"compare_{_tag(g)}_plot.py")
    out.csv(
        "compare.csv",
        ["L", "lam", "n0", "seed", "initial", "mean_density_window", "mean_density_master",
         "relative_difference", "D", "norm_drift", "energy_drift"],
        rows,
    )


def _histogram(cfg: RunConfig, out: _Writer):
    n0 = cfg.initial_counts()
    for g, k in zip(cfg.geometries(), n0):
        ensemble = [(k, s) for s in cfg.seeds()]
        net = enumerate_network(g, cfg.state_cap)
        res = histogram_run(g, ensemble, cfg.omega, tuple(cfg.window), cfg.samples,
                            backend=cfg.backend, n_jobs=cfg.n_jobs, network=net)
        hist_csv = out.csv(f"histogram_{_tag(g)}.csv", ["n0", "seed", "D"],
                           zip(res.n0, res.seeds, res.D))
        init_csv = out.csv(
            f"histogram_{_tag(g)}_initial.csv",
            ["n", "initial_fraction", "p_eq"],
            zip(range(g.n_max + 1), res.initial_distribution, res.p_eq.p),
        )
        if cfg.plot:
            out.plot([hist_csv, init_csv], "fig7", f"histogram_{_tag(g)}_plot.py")


def _export_network(cfg: RunConfig, out: _Writer):
    for g in cfg.geometries():
        net = enumerate_network(g, cfg.state_cap)
        write_edge_list(net, out.path(f"edges_{_tag(g)}.txt"))
        write_columns(net, out.path(f"columns_{_tag(g)}.txt"))


RUNNERS = {
    "table1": _table1,
    "network-stats": _network_stats,
    "master-evolve": _master_evolve,
    "quantum-evolve": _quantum_evolve,
    "compare": _compare,
    "histogram": _histogram,
    "export-network": _export_network,
}


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def run(config) -> RunManifest:
    """Validate ``config``, execute it and write ``manifest.json`` next to the outputs."""
    cfg = validate(config if isinstance(config, RunConfig) else RunConfig.from_mapping(config))
    start = time.perf_counter()
    out = _Writer(cfg.resolved_output_dir())
    RUNNERS[cfg.kind](cfg, out)
    files = [
        {"path": p.relative_to(out.root).as_posix(), "sha256": _digest(p), "bytes": p.stat().st_size}
        for p in out.files
    ]
    manifest = RunManifest(cfg.to_dict(), files, __version__, time.perf_counter() - start)
    with open(out.root / "manifest.json", "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# ---------------------------------------------------------------------------
# figure recipes
#
# The l/r_c = 120 family is given by explicit lengths: its lam = 1 member is
# L = 240 (at most 120 rods), one more than (l/r_c) * lam would give.

RECIPES = {
    "table1": {"kind": "table1"},
    "fig3": {
        "kind": "master-evolve", "L": 240, "lam": 1, "n0": 0,
        "times": [0.0, 0.02, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 2.0],
    },
    "fig4": {
        "kind": "master-evolve", "L": [240, 1080, 7080], "lam": [1, 9, 59], "n0": 0,
        "t_max": 3.0, "samples": 300,
    },
    "fig5": {
        "kind": "compare", "l_over_rc": 10, "lam": [1, 2, 3], "n0": [2, 2, 3],
        "seed": 0, "count": 3, "t_max": 20.0, "samples": 400,
    },
    "fig6": {
        "kind": "quantum-evolve", "l_over_rc": 9, "lam": 4, "n0": 3, "seed": 0,
        "t_max": 100.0, "samples": 2000, "windows": [[0.5, 20.0], [80.0, 100.0]],
    },
    "fig7": [
        {"kind": "histogram", "L": 10, "lam": 1, "seed": 0, "count": 100},
        {"kind": "histogram", "L": 20, "lam": 2, "seed": 0, "count": 500},
    ],
}


def recipe_configs(name: str, output_dir=None, overrides: Optional[dict] = None) -> list[RunConfig]:
    """Resolved configs for a named recipe, one per output directory.

    A recipe with several parts writes each part into its own subdirectory.
    """
    if name not in RECIPES:
        raise DomainError(f"unknown recipe {name!r}; choose from {', '.join(RECIPES)}")
    parts = RECIPES[name]
    parts = parts if isinstance(parts, list) else [parts]
    overrides = dict(overrides or {})
    output_dir = overrides.pop("output_dir", output_dir)
    root = Path(output_dir) if output_dir is not None else Path(
        os.environ.get(OUTPUT_ROOT_ENV, "runs")) / name
    configs = []
    for part in parts:
        data = {**part, **overrides}
        sub = root if len(parts) == 1 else root / f"L{data['L']}_lam{data['lam']}"
        data["output_dir"] = str(sub)
        configs.append(RunConfig.from_mapping(data))
    return configs


def run_recipe(name: str, output_dir=None, overrides: Optional[dict] = None) -> list[RunManifest]:
    configs = recipe_configs(name, output_dir, overrides)
    for cfg in configs:
        validate(cfg)
    return [run(cfg) for cfg in configs]
