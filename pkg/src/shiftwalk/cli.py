"""Command-line entry point ``shiftwalk``.

Every subcommand writes its artifacts (CSV for sequences, JSON for reports)
into ``--out`` together with ``manifest.json``, which echoes the resolved
configuration, package versions, backend, seed and timings. Passing that
manifest back through ``--config`` re-runs the experiment.

Exit status: 0 success, 2 configuration error, 3 validation failure (the map
lacks a required property, or a statistical check failed), 4 numerical
failure.
"""
import argparse
import json
import os
import platform
import sys
import time
from collections.abc import Mapping

import numpy as np

from . import __version__
from ._accel import USE_NUMBA, set_threads
from .errors import ConfigError, NumericalError, ValidationError

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3, 4

MAP_FLAGS = ("eps", "delta", "kappa", "a", "b")

# per-command defaults; flags left unset fall back to the config file, then here
DEFAULTS = {
    "validate": {"map": "example1", "grid": 1000},
    "trajectory": {"map": "example1", "x0": 0.9, "steps": 10_000},
    "transitions": {"map": "example1", "M": None, "samples": 0},
    "independence": {"map": "example1", "steps": 10, "paths": 100_000},
    "conjugacy": {"map": "example1", "depth": 8, "M": None, "linear": None, "probes": 10_000},
    "density": {"map": "example1", "grid": 4000, "orbit_depth": 20, "method": "ulam", "terms": 20},
    "fp-convergence": {"eps": 0.01, "delta": 0.01, "x": 0.0, "n": 30},
    "table1": {"grid": 4000, "eps": 0.01},
    "fclt": {"map": "example2", "kappa": 1.5, "n": 10_000, "paths": 10_000, "t": [0.5, 1.0],
             "route": "conjugacy"},
    "ctrw": {"eps": 0.5, "delta": 0.5, "m": 200, "horizon": 100.0, "paths": 10_000,
             "init": "invariant", "pooling": "censored"},
}

RANDOMIZED = {"independence", "fclt", "ctrw"}


# ------------------------------------------------------------------ parsing

def _common(p):
    p.add_argument("--config", help="JSON file whose keys mirror the flags (flags win)")
    p.add_argument("--out", help="artifact directory (default: ./shiftwalk-<command>)")
    p.add_argument("--seed", type=int, help="64-bit seed; required for randomized runs")
    p.add_argument("--threads", type=int, help="worker cap (default: $SHIFTWALK_THREADS or CPU count)")


def _map_flags(p):
    p.add_argument("--map", help="built-in map family")
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="shiftwalk", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"shiftwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the shift-periodic and integer-spike conditions")
    _map_flags(p)
    p.add_argument("--grid", type=int, help="sample points per branch")

    p = sub.add_parser("trajectory", help="dump one orbit and its cocycle as CSV")
    _map_flags(p)
    p.add_argument("--x0", type=float)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("transitions", help="exact jump probabilities p_m")
    _map_flags(p)
    p.add_argument("--M", type=int, help="largest |m| resolved exactly")
    p.add_argument("--samples", type=int, help="also estimate p_m from this many uniform draws")

    p = sub.add_parser("independence", help="test independence of consecutive increments")
    _map_flags(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--paths", type=int)

    p = sub.add_parser("conjugacy", help="approximate the conjugacy to the linearized map")
    _map_flags(p)
    p.add_argument("--depth", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--linear", help="JSON {\"map\": name, ...params} of a piecewise-linear reference")
    p.add_argument("--probes", type=int)

    p = sub.add_parser("density", help="invariant density by Ulam's method or the orbit series")
    _map_flags(p)
    p.add_argument("--grid", type=int)
    p.add_argument("--orbit-depth", dest="orbit_depth", type=int)
    p.add_argument("--method", choices=("ulam", "series"))
    p.add_argument("--terms", type=int, help="series terms per critical orbit")

    p = sub.add_parser("fp-convergence", help="iterate the open-system operator on (x, 2-x)")
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--x", type=float, help="value of the start density on (0, 1/2)")
    p.add_argument("--n", type=int, help="number of iterations")

    p = sub.add_parser("table1", help="Ulam density averages against the published values")
    p.add_argument("--grid", type=int)
    p.add_argument("--eps", type=float)

    p = sub.add_parser("fclt", help="rescaled walk marginals against the stable law")
    _map_flags(p)
    p.add_argument("--n", type=int, help="time scale")
    p.add_argument("--paths", type=int)
    p.add_argument("--t", type=float, nargs="+", help="times at which V(t) is tested")
    p.add_argument("--route", choices=("conjugacy", "direct"))

    p = sub.add_parser("ctrw", help="small-hole waiting times against Exp(gamma)")
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--horizon", type=float)
    p.add_argument("--paths", type=int)
    p.add_argument("--init", choices=("invariant", "conditionally-invariant", "uniform"))
    p.add_argument("--pooling", choices=("censored", "first", "second"))

    for sp_ in sub.choices.values():
        _common(sp_)
    return parser


def resolve_config(args):
    """Merge command defaults, the ``--config`` file and explicit flags."""
    cmd = args.command
    cfg = dict(DEFAULTS[cmd])
    cfg.update({"seed": None, "threads": None, "out": None})
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        loaded = dict(loaded.get("config", loaded))  # accept a manifest as well
        if loaded.pop("command", cmd) != cmd:
            raise ConfigError(f"config is for another command than {cmd!r}")
        cfg.update(loaded)
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        cfg[key] = val
    allowed = set(DEFAULTS[cmd]) | {"seed", "threads", "out"}
    if "map" in DEFAULTS[cmd]:
        allowed |= set(MAP_FLAGS)
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown keys for {cmd}: {sorted(unknown)}")
    if cmd in RANDOMIZED and cfg["seed"] is None:
        raise ConfigError(f"{cmd} is randomized and needs an explicit --seed")
    if cfg["seed"] is not None and not 0 <= int(cfg["seed"]) < 2 ** 64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    return cfg


def _make_map(cfg):
    from .maps import BUILTINS, builtin

    name = cfg["map"]
    if name not in BUILTINS:
        raise ConfigError(f"unknown map {name!r}; choose from {sorted(BUILTINS)}")
    keys = BUILTINS[name][1]
    extra = [k for k in MAP_FLAGS if k in cfg and cfg[k] is not None and k not in keys]
    if extra:
        raise ConfigError(f"map {name} takes no parameters {extra}")
    return builtin(name, {k: cfg[k] for k in keys if cfg.get(k) is not None})


def _positive(cfg, *keys):
    for k in keys:
        if cfg.get(k) is not None and not cfg[k] > 0:
            raise ConfigError(f"{k} must be positive")


# ------------------------------------------------------------------ output

def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Mapping):
        return dict(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default, allow_nan=True)
        fh.write("\n")


def _versions():
    import numba
    import scipy

    return {"shiftwalk": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


# ------------------------------------------------------------------ commands

def cmd_validate(cfg, out):
    from .maps import validate

    fmap = _make_map(cfg)
    rep = validate(fmap, grid_n=int(cfg["grid"]))
    write_json(os.path.join(out, "validation.json"), {
        "map": fmap.name, "params": fmap.params,
        "is_shift_periodic": rep.is_shift_periodic,
        "has_integer_spikes": rep.has_integer_spikes,
        "violations": [{"condition": v.condition, "witness": v.witness, "detail": v.detail}
                       for v in rep.violations],
    })
    if not rep.has_integer_spikes:
        raise ValidationError(f"{fmap.name} violates {sorted({v.condition for v in rep.violations})}")
    return {"artifacts": ["validation.json"]}


def cmd_trajectory(cfg, out):
    from .walk import iterate

    _positive(cfg, "steps")
    rec = iterate(_make_map(cfg), float(cfg["x0"]), int(cfg["steps"]))
    rec.to_csv(os.path.join(out, "trajectory.csv"))
    summary = {"singular_hit": rec.singular_hit, "final_position": float(rec.positions[-1])}
    return {"artifacts": ["trajectory.csv"], "summary": summary}


def _table_dict(tab):
    ms, ps = tab.arrays()
    return {"entries": {str(int(m)): float(p) for m, p in zip(ms, ps)},
            "truncation_bound": int(tab.truncation_bound), "tail_mass": float(tab.tail_mass),
            "tail_plus": float(tab.tail_plus), "tail_minus": float(tab.tail_minus),
            "mean": tab.mean(), "variance": tab.variance()}


def cmd_transitions(cfg, out):
    from .walk import empirical_transitions, transition_table

    fmap = _make_map(cfg)
    tab = transition_table(fmap, cfg["M"])
    report = {"map": fmap.name, "params": fmap.params, "exact": _table_dict(tab)}
    if cfg["samples"]:
        if cfg["seed"] is None:
            raise ConfigError("empirical transitions need an explicit --seed")
        emp = empirical_transitions(fmap, "uniform", int(cfg["samples"]), int(cfg["seed"]))
        report["empirical"] = _table_dict(emp) | {"n_samples": emp.n_samples}
    write_json(os.path.join(out, "transitions.json"), report)
    return {"artifacts": ["transitions.json"]}


def cmd_independence(cfg, out):
    from .walk import increment_independence_test

    _positive(cfg, "steps", "paths")
    fmap = _make_map(cfg)
    rep = increment_independence_test(fmap, "uniform", int(cfg["steps"]), int(cfg["paths"]),
                                      int(cfg["seed"]))
    write_json(os.path.join(out, "independence.json"), rep.as_dict())
    return {"artifacts": ["independence.json"], "summary": {"independent": rep.independent}}


def cmd_conjugacy(cfg, out):
    from .conjugacy import build_h, conjugacy_residual, mass_concentration

    _positive(cfg, "depth", "probes")
    fmap = _make_map(cfg)
    linear = None
    if cfg["linear"]:
        overrides = json.loads(cfg["linear"]) if isinstance(cfg["linear"], str) else dict(cfg["linear"])
        lin_cfg = {k: None for k in MAP_FLAGS}
        lin_cfg.update(overrides)
        linear = _make_map(lin_cfg)
    h = build_h(fmap, int(cfg["depth"]), cfg["M"], linear=linear)
    h.to_csv(os.path.join(out, "h.csv"))
    part = h.partition
    report = {
        "map": fmap.name, "params": fmap.params, "depth": h.depth, "knot_depth": h.knot_depth,
        "intervals": [{"a": a, "b": b, "jump": m, "orientation": o} for a, b, m, o in part.intervals],
        "residual_length": part.residual,
        "conjugacy_residual": conjugacy_residual(h, fmap, int(cfg["probes"])),
        "max_cylinder_width": h.max_cylinder_width,
        "mass_concentration": mass_concentration(h),
    }
    write_json(os.path.join(out, "conjugacy.json"), report)
    return {"artifacts": ["h.csv", "conjugacy.json"]}


def cmd_density(cfg, out):
    from .transfer import gora_density, ulam_invariant_density

    fmap = _make_map(cfg)
    if cfg["method"] == "series":
        if fmap.name != "example1":
            raise ConfigError("the orbit series is implemented for example1 only")
        dens = gora_density(fmap.params["eps"], fmap.params["delta"], n_terms=int(cfg["terms"]))
        dens.as_density().to_csv(os.path.join(out, "density.csv"))
        info = {"method": "series", "K": dens.K, "terms": dens.n_terms}
    else:
        approx = ulam_invariant_density(fmap, int(cfg["grid"]), int(cfg["orbit_depth"]))
        approx.as_density().to_csv(os.path.join(out, "density.csv"))
        info = {"method": "ulam", "cells": approx.grid_n, "iterations": approx.iterations,
                "residual": approx.residual}
    write_json(os.path.join(out, "density.json"), {"map": fmap.name, "params": fmap.params} | info)
    return {"artifacts": ["density.csv", "density.json"]}


def cmd_fp_convergence(cfg, out):
    from .transfer import cond_invariant_density, convergence_check

    _positive(cfg, "n")
    eps, delta, x, n = float(cfg["eps"]), float(cfg["delta"]), float(cfg["x"]), int(cfg["n"])
    if not 0.0 <= x <= 2.0:
        raise ConfigError("x must lie in [0, 2]")
    fc = cond_invariant_density(eps, delta)
    dist = convergence_check(eps, delta, x, n)
    bound = [6.0 * (2.0 / 3.0) ** k for k in range(1, n + 1)]
    rows = [{"n": k + 1, "distance": float(d), "bound": b} for k, (d, b) in enumerate(zip(dist, bound))]
    report = {"eps": eps, "delta": delta, "x": x, "nu": fc.nu, "escape_mass": fc.escape_mass,
              "iterations": rows, "within_bound": bool(np.all(dist <= bound))}
    write_json(os.path.join(out, "fp_convergence.json"), report)
    return {"artifacts": ["fp_convergence.json"]}


def cmd_table1(cfg, out):
    from .transfer import reference_table

    _positive(cfg, "grid", "eps")
    rows = reference_table(int(cfg["grid"]), float(cfg["eps"]))
    write_json(os.path.join(out, "table1.json"), {
        "grid": int(cfg["grid"]), "eps": float(cfg["eps"]), "rows": rows,
        "max_abs_error": max(r["abs_error"] for r in rows)})
    return {"artifacts": ["table1.json"]}


def cmd_fclt(cfg, out):
    from .limits import fclt_marginal_test, simulate_vn

    _positive(cfg, "n", "paths")
    fmap = _make_map(cfg)
    t = sorted(float(v) for v in np.atleast_1d(cfg["t"]))
    res = simulate_vn(fmap, n=int(cfg["n"]), t_grid=t, rng_seed=int(cfg["seed"]),
                      n_paths=int(cfg["paths"]), route=cfg["route"], threads=cfg["threads"])
    res.to_csv(os.path.join(out, "vn.csv"))
    plan = res.plan
    tests = [fclt_marginal_test(res, tt).as_dict() | {"t": tt} for tt in t if tt > 0]
    write_json(os.path.join(out, "fclt.json"), {
        "map": fmap.name, "params": fmap.params, "route": res.route, "discarded": res.discarded,
        "plan": {"regime": plan.regime, "kappa": plan.kappa, "alpha": plan.alpha, "beta": plan.beta,
                 "c_plus": plan.c_plus, "c_minus": plan.c_minus, "mean": plan.mean,
                 "variance": plan.variance, "a_n": plan.a_n(res.n), "b_n": plan.b_n(res.n)},
        "tests": tests})
    return {"artifacts": ["vn.csv", "fclt.json"],
            "summary": {"passes_05": all(r["passes_05"] for r in tests)}}


def cmd_ctrw(cfg, out):
    from .limits import gamma, simulate_ctrw, waiting_time_test

    _positive(cfg, "m", "paths", "horizon")
    eps, delta = float(cfg["eps"]), float(cfg["delta"])
    g = gamma(eps, delta)
    if not g > 0:
        raise ConfigError("eps + delta must be positive")
    recs = simulate_ctrw(eps, delta, int(cfg["m"]), float(cfg["horizon"]), cfg["init"],
                         int(cfg["seed"]), int(cfg["paths"]), cfg["threads"])
    with open(os.path.join(out, "jumps.csv"), "w") as fh:
        fh.write("path,t,sign\n")
        for i, r in enumerate(recs):
            for tt, s in zip(r.jump_times.tolist(), r.jump_signs.tolist()):
                fh.write(f"{i},{tt!r},{int(s)}\n")
    rep = waiting_time_test(recs, g, cfg["pooling"])
    report = rep.as_dict() | {"gamma": g, "eps": eps, "delta": delta, "m": int(cfg["m"]),
                              "horizon": float(cfg["horizon"]), "init": cfg["init"],
                              "pooling": cfg["pooling"],
                              "mean_jumps_per_path": float(np.mean([r.jump_times.size for r in recs]))}
    write_json(os.path.join(out, "ctrw.json"), report)
    return {"artifacts": ["jumps.csv", "ctrw.json"], "summary": {"passes_05": rep.passes_05}}


COMMANDS = {
    "validate": cmd_validate, "trajectory": cmd_trajectory, "transitions": cmd_transitions,
    "independence": cmd_independence, "conjugacy": cmd_conjugacy, "density": cmd_density,
    "fp-convergence": cmd_fp_convergence, "table1": cmd_table1, "fclt": cmd_fclt, "ctrw": cmd_ctrw,
}


def run(command, cfg):
    """Run one experiment with a resolved config; returns the manifest dict."""
    out = cfg.get("out") or f"shiftwalk-{command}"
    os.makedirs(out, exist_ok=True)
    threads = set_threads(cfg.get("threads"))
    start = time.perf_counter()
    result = COMMANDS[command](cfg, out)
    elapsed = time.perf_counter() - start
    echo = {k: v for k, v in cfg.items() if k != "out"}
    manifest = {
        "command": command, "config": echo | {"command": command}, "seed": cfg.get("seed"),
        "versions": _versions(), "backend": "numba" if USE_NUMBA else "numpy",
        "threads": threads, "timings": {"run_seconds": elapsed},
        "artifacts": result.get("artifacts", []), "summary": result.get("summary", {}),
        "argv": ["shiftwalk", command, "--config", os.path.join(out, "manifest.json")],
    }
    write_json(os.path.join(out, "manifest.json"), manifest)
    return manifest


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        manifest = run(args.command, cfg)
    except ConfigError as exc:
        print(f"shiftwalk: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"shiftwalk: validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, FloatingPointError, ArithmeticError) as exc:
        print(f"shiftwalk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    summary = manifest["summary"]
    print(json.dumps({"command": args.command, "out": cfg.get("out") or f"shiftwalk-{args.command}",
                      **summary}, default=_json_default))
    if summary.get("passes_05") is False:
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
