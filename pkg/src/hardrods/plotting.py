"""Generated plotting scripts.

Figures are not rendered here.  :func:`emit_plot_script` writes a small
standalone matplotlib script that reads the run's CSV files by path relative
to the script itself, so the data lives in exactly one place.
"""
from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Optional, Sequence

from .exceptions import DomainError, SchemaError

DIST = ("omega_t", "n", "p_n")
OBS = ("omega_t", "mean_density", "q_ratio")
STEADY = ("lam", "q_ratio")
HIST = ("n0", "seed", "D")
INITIAL = ("n", "initial_fraction", "p_eq")

# style -> (schema of the first file, schema of any further files)
STYLES = {
    "fig3": (DIST, None),
    "fig4d": (STEADY, None),
    "fig5": (OBS, OBS),
    "fig7": (HIST, INITIAL),
    "trace": (OBS, OBS),
}

_PRELUDE = '''\
"""Generated by hardrods; reads the CSV files listed below and draws one figure."""
import csv
import os
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
FILES = {files!r}
OUTPUT = os.path.join(HERE, {output!r})


def read(name):
    with open(os.path.join(HERE, name), newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {{k: [float(r[k]) if r[k] != "" else float("nan") for r in rows] for k in rows[0]}} if rows else {{}}

'''

_BODIES = {
    "fig3": '''\
DENSITY_SCALE = {density_scale!r}
data = read(FILES[0])
curves = defaultdict(lambda: ([], []))
for t, n, p in zip(data["omega_t"], data["n"], data["p_n"]):
    x = n * DENSITY_SCALE if DENSITY_SCALE else n
    curves[t][0].append(x)
    curves[t][1].append(p)
fig, ax = plt.subplots()
for t, (x, p) in sorted(curves.items()):
    ax.plot(x, p, label=f"Omega t = {{t:g}}")
ax.set_xlabel("density n lam / L" if DENSITY_SCALE else "n")
ax.set_ylabel("p_n")
ax.legend(fontsize="small")
''',
    "fig4d": '''\
data = read(FILES[0])
order = sorted(range(len(data["lam"])), key=lambda i: data["lam"][i])
fig, ax = plt.subplots()
ax.plot([data["lam"][i] for i in order], [data["q_ratio"][i] for i in order], "o-")
ax.set_xlabel("lam")
ax.set_ylabel("steady-state Q")
''',
    "fig5": '''\
fig, ax = plt.subplots()
for k, name in enumerate(FILES):
    data = read(name)
    style = dict(color="black", lw=2) if k == 0 else dict(alpha=0.8)
    ax.plot(data["omega_t"], data["mean_density"], label=os.path.splitext(name)[0], **style)
ax.set_xlabel("Omega t")
ax.set_ylabel("mean density")
ax.legend(fontsize="small")
''',
    "fig7": '''\
hist = read(FILES[0])
fig, ax = plt.subplots()
ax.hist(hist["D"], bins=20, range=(min(hist["D"] + [0.5]), 1.0))
ax.set_xlabel("D")
ax.set_ylabel("runs")
if len(FILES) > 1:
    init = read(FILES[1])
    inset = ax.inset_axes([0.08, 0.55, 0.35, 0.38])
    inset.bar(init["n"], init["initial_fraction"], color="tab:orange", label="initial")
    inset.plot(init["n"], init["p_eq"], "k.-", label="p_eq")
    inset.set_xlabel("n", fontsize="small")
    inset.legend(fontsize="x-small")
''',
    "trace": '''\
fig, ax = plt.subplots()
for name in FILES:
    data = read(name)
    ax.plot(data["omega_t"], data["mean_density"], label=os.path.splitext(name)[0])
ax.set_xlabel("Omega t")
ax.set_ylabel("mean density")
ax.legend(fontsize="small")
''',
}

_EPILOGUE = '''\
fig.tight_layout()
fig.savefig(OUTPUT)
print(OUTPUT)
'''


def csv_header(path) -> list[str]:
    with open(path, newline="") as fh:
        return next(csv.reader(fh), [])


def check_schema(path, required: Sequence[str]) -> None:
    """Raise :class:`SchemaError` naming every column of ``required`` absent from ``path``."""
    have = set(csv_header(path))
    missing = [c for c in required if c not in have]
    if missing:
        raise SchemaError(f"{Path(path).name} lacks column(s): {', '.join(missing)}")


def emit_plot_script(
    csv_paths: Sequence,
    style: str,
    script_path,
    density_scale: Optional[float] = None,
) -> Path:
    """Write a matplotlib script drawing ``csv_paths`` in the given figure style.

    ``density_scale`` (``lam / L``) turns the rod count axis of the ``fig3``
    style into a density.  Returns the script path.
    """
    if style not in STYLES:
        raise DomainError(f"unknown plot style {style!r}; choose from {', '.join(STYLES)}")
    paths = [Path(p) for p in csv_paths]
    if not paths:
        raise DomainError("no CSV files to plot")
    first, rest = STYLES[style]
    for k, p in enumerate(paths):
        schema = first if k == 0 else rest
        if schema is None:
            raise DomainError(f"style {style!r} takes a single CSV file")
        check_schema(p, schema)

    script_path = Path(script_path)
    base = script_path.parent.resolve()
    rel = [os.path.relpath(p.resolve(), base) for p in paths]
    text = (
        _PRELUDE.format(files=rel, output=script_path.stem + ".png")
        + _BODIES[style].format(density_scale=density_scale)
        + _EPILOGUE
    )
    script_path.parent.mkdir(parents=True, exist_ok=True)
    script_path.write_text(text)
    return script_path
