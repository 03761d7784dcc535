"""Command-line front end.

    python -m robinbilap <command> --config cfg.json [--out path] [--format csv|json]
                         [--seed N] [--jobs N] [--axis A] [--k K]

Commands: solve, sweep, rate, limit, scale, certify, hadamard, duality, weyl, selftest.
Exit codes: 0 ok, 2 invalid config, 3 solver failure, 4 selftest failure.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import csv
import json
import math
import platform
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, RobinBilapError
from .model import BoundaryRegime, Disk, Interval, ParamSet, domain_from_json, validate

COMMANDS = ("solve", "sweep", "rate", "limit", "scale", "certify", "hadamard", "duality", "weyl", "selftest")
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_SELFTEST = 0, 2, 3, 4

SWEEP_COLUMNS = ("axis", "k", "lambda", "residual", "mesh_h", "status")
SOLVE_COLUMNS = ("k", "lambda", "residual", "mesh_h")
TARGETS = {r.value: r for r in BoundaryRegime}
TARGETS.update({r.name: r for r in BoundaryRegime})


class Table:
    """Rows with a fixed column order."""

    def __init__(self, columns: Sequence[str], rows: List[dict], extra: Optional[dict] = None):
        self.columns = tuple(columns)
        self.rows = rows
        self.extra = extra or {}

    def to_json(self) -> dict:
        out = {"columns": list(self.columns), "rows": [[r.get(c) for c in self.columns] for r in self.rows]}
        out.update(self.extra)
        return out


# ---------------------------------------------------------------- formatting


def fmt_float(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    if x is None:
        return ""
    return str(x)


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if hasattr(x, "to_json"):
        return _jsonable(x.to_json())
    if hasattr(x, "value") and hasattr(x, "name"):
        return x.value
    return x


def _flatten(d: Any, prefix: str = "") -> List[tuple]:
    if isinstance(d, dict):
        out = []
        for k in sorted(d):
            out.extend(_flatten(d[k], f"{prefix}.{k}" if prefix else str(k)))
        return out
    if isinstance(d, list):
        out = []
        for i, v in enumerate(d):
            out.extend(_flatten(v, f"{prefix}[{i}]"))
        return out
    return [(prefix, d)]


def render(report: Any, fmt: str) -> bytes:
    if fmt == "json":
        return (json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n").encode()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(report, Table):
        w.writerow(report.columns)
        for r in report.rows:
            w.writerow([fmt_float(r.get(c)) for c in report.columns])
    else:
        w.writerow(("key", "value"))
        for k, v in _flatten(_jsonable(report)):
            w.writerow((k, fmt_float(v)))
    return buf.getvalue().encode()


# ---------------------------------------------------------------- config


def _values(spec: Any, what: str) -> np.ndarray:
    """A list, or {"linspace": [a, b, n]} / {"logspace": [e0, e1, n], "sign": -1}."""
    if isinstance(spec, list):
        return np.asarray([float(v) for v in spec])
    if isinstance(spec, dict):
        if "linspace" in spec:
            a, b, n = spec["linspace"]
            return np.linspace(float(a), float(b), int(n))
        if "logspace" in spec:
            a, b, n = spec["logspace"]
            v = float(spec.get("sign", 1.0)) * np.logspace(float(a), float(b), int(n))
            return np.sort(v)
    raise ConfigError(f"{what}: expected a list or a linspace/logspace block")


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def parse_problem(cfg: dict):
    try:
        domain = domain_from_json(cfg.get("domain", {"kind": "interval"}))
        params = ParamSet.from_json(cfg.get("params", {}))
        validate(domain, params)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    disc = dict(cfg.get("discretization", {}))
    return domain, params, disc


def _block(cfg: dict, name: str) -> dict:
    b = cfg.get(name, {})
    if not isinstance(b, dict):
        raise ConfigError(f"block {name!r} must be an object")
    return b


# ---------------------------------------------------------------- commands


def cmd_solve(cfg, args):
    from .sweeps import lowest_eigenvalues

    domain, params, disc = parse_problem(cfg)
    k = int(args.k or cfg.get("k", 6))
    sp = lowest_eigenvalues(domain, params, k, disc)
    res = sp.residual_norms if sp.residual_norms is not None else [float("nan")] * len(sp.eigenvalues)
    rows = [{"k": i + 1, "lambda": float(v), "residual": float(r), "mesh_h": float(sp.mesh_size)}
            for i, (v, r) in enumerate(zip(sp.eigenvalues, res))]
    return Table(SOLVE_COLUMNS, rows, {"params": params.to_json(), "domain": domain.to_json()})


def _plan(cfg, args):
    from .sweeps import SweepPlan

    domain, params, disc = parse_problem(cfg)
    b = _block(cfg, "sweep")
    axis = args.axis or b.get("axis")
    if axis is None or "values" not in b:
        raise ConfigError("sweep block needs axis and values")
    coupling = tuple(b["coupling"]) if b.get("coupling") else None
    k_track = tuple(int(k) for k in b.get("k_track", [int(args.k or 1)]))
    try:
        return SweepPlan(domain, params, axis, _values(b["values"], "sweep.values"), k_track,
                         coupling=coupling, disc=disc, fixed_mesh=bool(b.get("fixed_mesh", False)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_sweep(cfg, args):
    from .sweeps import run_sweep

    table = run_sweep(_plan(cfg, args), args.jobs)
    return Table(SWEEP_COLUMNS, table.records(),
                 {"monotone_violations": [list(v) for v in table.monotone_violations]})


def cmd_rate(cfg, args):
    from .sweeps import fit_rate, run_sweep

    plan = _plan(cfg, args)
    table = run_sweep(plan, args.jobs)
    window = _block(cfg, "rate").get("window", "decade")
    return {"axis": plan.axis,
            "fits": {str(k): fit_rate(table, k, window).to_json() for k in plan.k_track}}


def cmd_limit(cfg, args):
    from .sweeps import limit_convergence

    domain, params, disc = parse_problem(cfg)
    b = _block(cfg, "limit")
    axis = args.axis or b.get("axis", "gamma")
    default = {"gamma": "NavierRobin", "beta": "KuttlerSigillito", "joint": "Dirichlet"}.get(axis)
    target = b.get("target", default)
    if target not in TARGETS:
        raise ConfigError(f"unknown limit target {target!r}")
    vals = _values(b.get("values", {"logspace": [1, 6, 21]}), "limit.values")
    return limit_convergence(domain, params, axis, TARGETS[target], vals, int(args.k or b.get("k", 1)), disc)


def cmd_scale(cfg, args):
    from .sweeps import alpha_scaling

    domain, params, disc = parse_problem(cfg)
    b = _block(cfg, "scale")
    coupling = tuple(b["coupling"]) if b.get("coupling") else None
    alphas = _values(b.get("alphas", {"logspace": [3, 6, 7]}), "scale.alphas")
    return alpha_scaling(domain, params, coupling, int(args.k or b.get("k", 1)), alphas, disc)


def cmd_certify(cfg, args):
    from . import bounds
    from .sweeps import lowest_eigenvalues

    domain, params, disc = parse_problem(cfg)
    b = _block(cfg, "certify")
    axis = args.axis or b.get("axis")
    try:
        cert = bounds.optimized_certificate(domain, params, axis) if axis else bounds.best_certificate(domain, params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = {"certificate": cert.to_json()}
    if b.get("sandwich", False):
        consts = bounds.estimate_trace_constants(domain, b.get("constants_discretization"), params.sigma)
        lam1 = float(lowest_eigenvalues(domain, params, 1, disc).eigenvalues[0])
        out["constants"] = consts.to_json()
        out["sandwich"] = bounds.sandwich(domain, params, lam1, consts)
    return out


def cmd_hadamard(cfg, args):
    from . import shape

    domain, params, _ = parse_problem(cfg)
    if not isinstance(domain, Disk):
        raise ConfigError("hadamard needs a disk domain")
    b = _block(cfg, "hadamard")
    cluster = shape.disk_cluster(domain.R, params, int(args.k or b.get("k", 1)))
    rep = shape.hadamard_report(cluster, int(b.get("s", 1)))
    if b.get("finite_difference", True):
        rep["dilation_fd"] = shape.dilation_fd(domain.R, params, cluster)
    return rep


def cmd_duality(cfg, args):
    from . import duality

    domain, params, disc = parse_problem(cfg)
    b = _block(cfg, "duality")
    axis = args.axis or b.get("axis", "alpha")
    if axis not in duality.AXIS_PENCIL:
        raise ConfigError(f"duality axis must be one of {tuple(duality.AXIS_PENCIL)}")
    try:
        return duality.crossing_check(domain, params, axis, int(args.k or b.get("k", 1)), disc or None)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_weyl(cfg, args):
    from .sweeps import lowest_eigenvalues, weyl_check

    domain, params, disc = parse_problem(cfg)
    b = _block(cfg, "weyl")
    window = tuple(b.get("window", (160, 200)))
    sp = lowest_eigenvalues(domain, params, int(window[1]), disc)
    return weyl_check(sp, domain, window)


def cmd_selftest(cfg, args):
    from . import checks

    numbers = _block(cfg, "selftest").get("criteria") or sorted(checks.CHECKS)
    results = checks.run_all([int(n) for n in numbers], seed=args.seed, jobs=args.jobs,
                             echo=lambda s: print(s, file=sys.stderr))
    rows = [{"criterion": r.number, "name": r.name, "passed": r.passed, "summary": r.summary} for r in results]
    return Table(("criterion", "name", "passed", "summary"), rows)


DISPATCH = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


# ---------------------------------------------------------------- driver


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robinbilap", description="Robin-type Bilaplacian spectral laboratory")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output file (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--axis", default=None)
    p.add_argument("--k", type=int, default=None)
    return p


def manifest(cfg_bytes: bytes, args, seed: int, fmt: str, wall: float) -> dict:
    import numba
    import scipy

    return {
        "command": args.command,
        "config_sha256": hashlib.sha256(cfg_bytes).hexdigest(),
        "seed": seed,
        "format": fmt,
        "versions": {"robinbilap": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__},
        "wall_time_s": wall,
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    t0 = time.perf_counter()
    try:
        if args.config:
            cfg_bytes = Path(args.config).read_bytes() if Path(args.config).exists() else b""
            cfg = load_config(args.config)
        elif args.command == "selftest":
            cfg_bytes, cfg = b"{}", {}
        else:
            raise ConfigError("--config is required")
        seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
        if seed < 0:
            raise ConfigError("seed must be non-negative")
        args.seed = seed
        out_cfg = _block(cfg, "output")
        out_path = args.out or out_cfg.get("path")
        fmt = args.format or out_cfg.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {fmt!r}")
        report = DISPATCH[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RobinBilapError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    data = render(report, fmt)
    if out_path:
        out = Path(out_path)
        out.write_bytes(data)
        man = manifest(cfg_bytes, args, seed, fmt, time.perf_counter() - t0)
        Path(str(out) + ".manifest.json").write_text(json.dumps(man, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(data.decode())
    if args.command == "selftest" and not all(r["passed"] for r in report.rows):
        return EXIT_SELFTEST
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
