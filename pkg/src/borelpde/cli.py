"""Command-line driver: ``borelpde {solve,certify,validate,norms}``.

Configuration comes from an optional flat ``key = value`` file, overridden
by command-line flags. Exit codes: 0 success, 1 invalid configuration,
2 numerical failure, 3 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .certificates import certificate_sweep, least_certified_nu
from .certificates import ex1_certificate, ex2_certificate, ex3_certificate
from .problems import make_example
from .solver import ProblemSpec, SolverError, default_y_points, picard_solve, recover_physical

log = logging.getLogger("borelpde")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3


@dataclass
class RunConfig:
    example: str = "ex1"
    gamma: float = 0.5
    delta: float = 1.0
    T: float = 0.05
    theta: float = 0.0
    phi: float = 0.5
    nodes: int = 256
    time_steps: int = 16
    K: int | None = None
    tol: float = 1e-10
    max_iter: int = 30
    nu: float = 8.0
    p_max: float | None = None
    grading: float | None = None
    b: float = 2.0
    C: float = 1.0
    out: str = "out"
    format: str = "csv"
    seed: int = 0
    n_pairs: int = 100
    sweep_T: str = "0.0125,0.025,0.05,0.1,0.2"
    sweep_nu: str = "1,2,4,8,16"

    def problem(self) -> ProblemSpec:
        ex = make_example(self.example, self.gamma, self.delta)
        return ProblemSpec(ex, T=self.T, theta=self.theta, phi=self.phi, K=self.K,
                           n_nodes=self.nodes, grading=self.grading, p_max=self.p_max,
                           time_steps=self.time_steps, picard_tol=self.tol, max_iter=self.max_iter,
                           nu_run=self.nu, ball_factor=self.b, C=self.C)

    def validate(self):
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got '{self.format}'")
        if self.nodes < 16:
            raise ValueError("nodes must be at least 16")
        if self.time_steps < 1:
            raise ValueError("time_steps must be at least 1")
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be positive")
        self.sweep()
        self.problem()

    def sweep(self):
        Ts = _float_list(self.sweep_T)
        nus = _float_list(self.sweep_nu)
        if not Ts or not nus:
            raise ValueError("empty sweep range")
        return Ts, nus


def _float_list(text: str):
    return [float(v) for v in str(text).replace(" ", "").split(",") if v]


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, value: str):
    kind = str(_FIELD_TYPES[name])
    if value.lower() in ("none", "") and "None" in kind:
        return None
    if kind.startswith("int"):
        return int(value)
    if kind.startswith("float"):
        return float(value)
    return value


def load_config(path) -> dict:
    """Read a flat ``key = value`` file (``#`` starts a comment)."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, val = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key '{key}'")
        values[key] = _coerce(key, val)
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="borelpde",
                                     description="Borel-plane solver for third-order nonlinear PDEs")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [("solve", "run the Picard solver and write tables"),
                       ("certify", "evaluate contraction certificates on a (T, nu) sweep"),
                       ("validate", "solve and compare against oracles and the PDE"),
                       ("norms", "run the norm-inequality property suite")]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="flat key = value file")
        p.add_argument("--example", choices=["ex1", "ex2", "ex3"])
        p.add_argument("--gamma", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--T", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--phi", type=float)
        p.add_argument("--nodes", type=int)
        p.add_argument("--time-steps", type=int)
        p.add_argument("--K", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iter", type=int)
        p.add_argument("--nu", type=float)
        p.add_argument("--p-max", type=float)
        p.add_argument("--grading", type=float)
        p.add_argument("--b", type=float)
        p.add_argument("--C", type=float)
        p.add_argument("--out")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--seed", type=int)
        p.add_argument("--n-pairs", type=int)
        p.add_argument("--sweep-T")
        p.add_argument("--sweep-nu")
    return parser


def make_config(args) -> RunConfig:
    values = load_config(args.config) if args.config else {}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# --- output ---------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.16e}"
    return str(v)


def write_table(out_dir: Path, stem: str, columns, rows, fmt: str = "csv") -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out_dir / f"{stem}.json"
        data = [{c: _fmt(v) for c, v in zip(columns, row)} for row in rows]
        path.write_text(json.dumps(data, indent=1) + "\n")
        return path
    path = out_dir / f"{stem}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_manifest(out_dir: Path, cfg: RunConfig, command: str, extra: dict) -> Path:
    manifest = {
        "command": command,
        "config": asdict(cfg),
        "versions": {"borelpde": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
    }
    manifest.update(extra)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return str(v)


def _cert_dict(cert):
    if cert is None:
        return None
    d = asdict(cert)
    d["details"] = {k: float(v) for k, v in cert.details.items()}
    return d


def _grid_dict(problem: ProblemSpec):
    g = problem.grid()
    return {"theta": g.theta, "p_max": g.p_max, "n": g.n, "grading": g.grading,
            "T": problem.T, "time_steps": problem.time_steps}


# --- subcommands ----------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    problem = cfg.problem()
    out = Path(cfg.out)
    result = picard_solve(problem)
    if not result.certified:
        log.warning("run is not certified by the contraction conditions")
    F = result.F
    s = F.grid.nodes
    rows = []
    for i, t in enumerate(F.time_grid.times):
        vals = F.values()[i]
        rows.extend((i, t, sv, v.real, v.imag) for sv, v in zip(s, vals))
    write_table(out, "solution_borel", ["t_index", "t", "s", "F_re", "F_im"], rows, cfg.format)
    y = default_y_points(problem)
    ts = np.linspace(0, problem.T, 5)
    tab = recover_physical(result, problem, y, ts)
    rows = []
    for i, t in enumerate(tab.t):
        for k, yk in enumerate(tab.y):
            H = tab.H[i, k] if tab.H is not None else complex(np.nan, np.nan)
            rows.append((t, yk.real, yk.imag, tab.x[i, k].real, tab.x[i, k].imag,
                         tab.f[i, k].real, tab.f[i, k].imag, H.real, H.imag, tab.error[i, k]))
    write_table(out, "solution_physical",
                ["t", "y_re", "y_im", "x_re", "x_im", "f_re", "f_im", "H_re", "H_im", "tail"],
                rows, cfg.format)
    ratios = [np.nan] + list(result.contraction_ratios)
    rows = [(k + 1, result.nu_norm_history[k + 1], result.differences[k], ratios[k])
            for k in range(result.iterations)]
    write_table(out, "history", ["iteration", "nu_norm", "difference", "ratio"], rows, cfg.format)
    write_manifest(out, cfg, "solve", {
        "grid": _grid_dict(problem), "iterations": result.iterations,
        "residual": result.residual, "F0_norm": result.F0_norm,
        "certified": result.certified, "warning": None if result.certified else "not certified",
        "certificate": _cert_dict(result.certificate), "tail_bound": result.tail_bound})
    print(f"solve: {result.iterations} iterations, residual {result.residual:.3e}, "
          f"certified={result.certified}")
    return EXIT_OK


def _cert_fn(cfg: RunConfig):
    if cfg.example == "ex1":
        return lambda T, nu: ex1_certificate(cfg.gamma, T, nu, cfg.b, cfg.C)
    if cfg.example == "ex2":
        return lambda T, nu: ex2_certificate(T, nu, cfg.b, cfg.C)
    return lambda T, nu: ex3_certificate(cfg.delta, T, nu, cfg.b, cfg.C)


def cmd_certify(cfg: RunConfig) -> int:
    Ts, nus = cfg.sweep()
    fn = _cert_fn(cfg)
    certs = certificate_sweep(fn, Ts, nus)
    rows = [(c.T, c.nu, c.b, c.C, c.ball_lhs, c.contraction_lhs, c.satisfied, c.margin)
            for c in certs]
    out = Path(cfg.out)
    write_table(out, "certificates",
                ["T", "nu", "b", "C", "ball_lhs", "contraction_lhs", "satisfied", "margin"],
                rows, cfg.format)
    thresholds = []
    for T in Ts:
        try:
            thresholds.append((T, least_certified_nu(fn, T, 1e-3, 1e4, 1e-8)))
        except ValueError:
            thresholds.append((T, np.nan))
    write_table(out, "thresholds", ["T", "nu_star"], thresholds, cfg.format)
    write_manifest(out, cfg, "certify", {"cells": len(certs),
                                         "certified": int(sum(c.satisfied for c in certs))})
    print(f"certify: {sum(c.satisfied for c in certs)}/{len(certs)} cells certified")
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    from .validation import validate_problem
    problem = cfg.problem()
    out = Path(cfg.out)
    result = picard_solve(problem)
    checks, tables = validate_problem(result, problem)
    write_table(out, "validation_checks", ["name", "value", "target", "tol", "passed"],
                [(c.name, c.value, c.target, c.tol, c.passed) for c in checks], cfg.format)
    rep = tables["pde_residual"]
    rows = [(t, yk.real, yk.imag, abs(rep.residual[i, k]), rep.relative[i, k])
            for i, t in enumerate(rep.t) for k, yk in enumerate(rep.y)]
    write_table(out, "pde_residual", ["t", "y_re", "y_im", "residual", "relative"], rows, cfg.format)
    if "similarity" in tables:
        c = tables["similarity"]
        rows = [(k, c.x[k].real, c.x[k].imag, c.H_solver[k].real, c.H_solver[k].imag,
                 c.H_oracle[k].real, c.H_oracle[k].imag, c.H_error[k])
                for k in range(c.x.size)]
        write_table(out, "similarity",
                    ["point", "x_re", "x_im", "solver_re", "solver_im", "oracle_re", "oracle_im",
                     "rel_error"], rows, cfg.format)
    ok = all(c.passed for c in checks)
    write_manifest(out, cfg, "validate", {"grid": _grid_dict(problem), "passed": ok,
                                          "checks": [asdict(c) for c in checks]})
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.4g} (target {c.target:.4g}, tol {c.tol:.3g})")
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_norms(cfg: RunConfig) -> int:
    from .properties import norm_inequality_suite, power_kernel_suite
    algebra = norm_inequality_suite(n_pairs=cfg.n_pairs, seed=cfg.seed, theta=cfg.theta)
    kernel = power_kernel_suite(seed=cfg.seed + 1, theta=cfg.theta)
    rows = [(name, ratio) for rep in (algebra, kernel) for name, ratio in sorted(rep.worst_ratio.items())]
    out = Path(cfg.out)
    write_table(out, "norms", ["check", "worst_ratio"], rows, cfg.format)
    violations = algebra.violations + kernel.violations
    write_manifest(out, cfg, "norms", {"checks": algebra.checks + kernel.checks,
                                       "violations": violations})
    print(f"norms: {algebra.checks + kernel.checks} checks, {violations} violations")
    return EXIT_OK if violations == 0 else EXIT_VALIDATION


COMMANDS = {"solve": cmd_solve, "certify": cmd_certify, "validate": cmd_validate, "norms": cmd_norms}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
    except (ValueError, OSError, TypeError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except (SolverError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
