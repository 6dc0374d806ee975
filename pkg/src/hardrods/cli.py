"""Command-line front end.

    hardrods <kind> [flags]          run one experiment kind
    hardrods run CONFIG [flags]      run a JSON config file, flags override it
    hardrods validate CONFIG         report every violation in a config file
    hardrods recipe NAME             reproduce a named figure or table

Failures print one JSON object to stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .exceptions import ConfigError, DomainError, IntegrationError, ResourceError, SchemaError
from .experiments import RECIPES, run, run_recipe
from .runconfig import BACKENDS, KINDS, RunConfig, validate

EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERICAL = 4
EXIT_OTHER = 1


def _int_list(text):
    return [int(x) for x in text.split(",")] if "," in text else int(text)


def _num_list(text):
    vals = [float(x) for x in text.split(",")]
    vals = [int(v) if v.is_integer() else v for v in vals]
    return vals if len(vals) > 1 else vals[0]


def _floats(text):
    return [float(x) for x in text.split(",")]


def _pair(text):
    lo, hi = _floats(text)
    return [lo, hi]


def _add_overrides(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("parameters (override config file values)")
    g.add_argument("--L", dest="L", type=_int_list, help="ring length, or comma list")
    g.add_argument("--lam", type=_int_list, help="rod parameter lambda, or comma list")
    g.add_argument("--l-over-rc", dest="l_over_rc", type=float, help="fix l/r_c and set L = l/r_c * lam")
    g.add_argument("--omega", type=float)
    g.add_argument("--times", type=_floats, help="comma list of Omega t sample times")
    g.add_argument("--t-max", dest="t_max", type=float, help="uniform grid from 0 to this Omega t")
    g.add_argument("--samples", type=int, help="grid intervals (and window samples)")
    g.add_argument("--n0", type=_int_list, help="initial rod count, or comma list per geometry")
    g.add_argument("--seed", type=int, help="base seed; member i uses seed + i")
    g.add_argument("--count", type=int, help="number of seeds per geometry")
    g.add_argument("--window", type=_pair, help="averaging window 'lo,hi' in Omega t")
    g.add_argument("--windows", type=_pair, action="append", help="extra reporting window, repeatable")
    g.add_argument("--backend", choices=BACKENDS)
    g.add_argument("--n-jobs", dest="n_jobs", type=int)
    g.add_argument("--state-cap", dest="state_cap", type=int)
    g.add_argument("--output-dir", dest="output_dir")
    g.add_argument("--no-plot", dest="plot", action="store_false", default=None)


_OVERRIDE_KEYS = (
    "L", "lam", "l_over_rc", "omega", "times", "t_max", "samples", "n0", "seed", "count",
    "window", "windows", "backend", "n_jobs", "state_cap", "output_dir", "plot",
)


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in _OVERRIDE_KEYS if getattr(args, k, None) is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardrods", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", help="JSON config file; flags override it")
        _add_overrides(p)

    p = sub.add_parser("run", help="run a JSON config file")
    p.add_argument("config")
    _add_overrides(p)

    p = sub.add_parser("validate", help="check a JSON config file")
    p.add_argument("config")

    p = sub.add_parser("recipe", help="reproduce a named figure or table")
    p.add_argument("name", choices=sorted(RECIPES))
    _add_overrides(p)
    return parser


def _load(path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError([("", "config file must hold a JSON object")])
    return data


def _fail(kind: str, message: str, code: int, errors=None) -> int:
    payload = {"error": kind, "message": message}
    if errors is not None:
        payload["errors"] = [{"field": f, "message": m} for f, m in errors]
    print(json.dumps(payload), file=sys.stderr)
    return code


def _report(manifests) -> None:
    for m in manifests:
        print(json.dumps({"output_dir": m.config.get("output_dir"), "files": len(m.files),
                          "duration_s": round(m.duration_s, 3)}))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg = validate(RunConfig.from_mapping(_load(args.config)))
            print(json.dumps({"valid": True, "kind": cfg.kind}))
            return 0
        if args.command == "recipe":
            _report(run_recipe(args.name, overrides=_overrides(args)))
            return 0
        if args.command == "run":
            data = _load(args.config)
        else:
            data = _load(args.config) if args.config else {}
            data["kind"] = args.command
        data.update(_overrides(args))
        cfg = RunConfig.from_mapping(data)
        if cfg.output_dir is None:
            cfg.output_dir = str(cfg.resolved_output_dir())
        _report([run(cfg)])
        return 0
    except ConfigError as exc:
        return _fail("ConfigError", "invalid configuration", EXIT_CONFIG, exc.errors)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_CONFIG)
    except ResourceError as exc:
        return _fail("ResourceError", str(exc), EXIT_RESOURCE)
    except (IntegrationError, ArithmeticError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_NUMERICAL)
    except (DomainError, SchemaError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
