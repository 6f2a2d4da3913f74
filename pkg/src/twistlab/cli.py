"""Command-line experiment runner.

Every subcommand writes one report (JSON by default, CSV where a table makes
sense). Parameters come from flags, optionally seeded from a flat YAML config
file given with ``--config``; flags win over the file.

Exit status: 0 on success, 1 when the run detects an invariant violation,
2 on an invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__, kalton_peck as kp, obstruction as ob, scalar, seq
from .errors import DomainError

if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    output: str | None = None
    format: str = "json"
    threads: int = 1


@dataclass
class Outcome:
    results: dict
    violations: list = field(default_factory=list)
    table: list | None = None  # CSV rows, header first


# --- subcommands -----------------------------------------------------------


def _vector_arg(path):
    text = Path(path).read_text()
    return seq.vector_from_csv(text) if str(path).endswith(".csv") else seq.vector_from_json(text)


def _indicator_pair(alpha, n):
    A = range(1, n + 1)
    sigma = 0.5 * math.log(n)
    x = seq.indicator(A)
    return x, seq.scale(x, scalar.cpow(sigma, alpha)), sigma


def cmd_norm(p, cfg):
    alpha = p["alpha"]
    if p.get("indicator"):
        n = p["indicator"]
        x, y, sigma = _indicator_pair(alpha, n)
        v = kp.TwistedVector(x, y)
        q = kp.quasi_norm(alpha, v)
        expected = math.sqrt(n)
        viol = [] if abs(q - expected) <= 1e-12 * expected else [f"indicator identity off by {q - expected}"]
        return Outcome({"quasi_norm": q, "expected": expected, "sigma": sigma, "n": n}, viol)
    if p.get("vector"):
        obj = json.loads(Path(p["vector"]).read_text())
        al, v = kp.twisted_from_obj(obj)
        return Outcome({"quasi_norm": kp.quasi_norm(al, v), "alpha": al.alpha})
    raise ConfigError("norm needs --indicator or --vector")


def cmd_omega(p, cfg):
    alpha = p["alpha"]
    if p.get("indicator"):
        x = seq.indicator(range(1, p["indicator"] + 1))
    elif p.get("vector"):
        x = _vector_arg(p["vector"])
    else:
        raise ConfigError("omega needs --indicator or --vector")
    w = kp.omega(alpha, x)
    rows = [["index", "re", "im"]] + [[int(i), float(v.real), float(v.imag)] for i, v in zip(w.indices, w.values)]
    return Outcome({"omega": seq.vector_to_obj(w), "l2_norm": seq.l2_norm(w)}, table=rows)


def cmd_bounds_check(p, cfg):
    checks = ["lower", "upper", "taylor_sharp" if p["taylor_constant"] == "sharp" else "taylor"]
    if p.get("t") is not None or p.get("s") is not None:
        if p.get("t") is None or p.get("s") is None:
            raise ConfigError("give both --t and --s")
        res = {}
        for name in checks:
            r = scalar.CHECKS[name](p["t"], p["s"], p["beta"], p["tol"])
            res[name] = {"holds": r.holds, "lhs": r.lhs, "rhs": r.rhs}
        viol = [k for k, r in res.items() if not r["holds"]]
        return Outcome({"t": p["t"], "s": p["s"], "beta": p["beta"], "checks": res}, viol)
    sw = scalar.sweep_bounds(p["samples"], cfg.seed, p["t_max"], p["beta_max"], p["tol"], checks)
    counts = sw.violations()
    worst = {k: float(np.max(sw.lhs[k] / np.where(sw.rhs[k] > 0, sw.rhs[k], np.inf))) for k in checks}
    rows = [["t", "s", "beta"] + [f"{k}_{c}" for k in checks for c in ("lhs", "rhs", "holds")]]
    if cfg.format == "csv":
        for i in range(p["samples"]):
            row = [float(sw.t[i]), float(sw.s[i]), float(sw.beta[i])]
            for k in checks:
                row += [float(sw.lhs[k][i]), float(sw.rhs[k][i]), bool(sw.holds[k][i])]
            rows.append(row)
    viol = [f"{k}: {n} violations" for k, n in counts.items() if n]
    return Outcome({"samples": p["samples"], "violations": counts, "max_lhs_over_rhs": worst}, viol, rows)


def cmd_omega_gap(p, cfg):
    beta = p["beta"]
    if p.get("vector"):
        w = _vector_arg(p["vector"])
        g = kp.omega_gap(beta, w)
        return Outcome({"gap": g.gap, "bound": g.bound, "holds": g.holds}, [] if g.holds else ["omega gap bound"])
    rng = np.random.default_rng(cfg.seed)
    fails, worst = 0, 0.0
    for _ in range(p["samples"]):
        w = kp.random_coords(rng, int(rng.integers(1, p["max_dim"] + 1)), rng.uniform(0, kp.MAX_WIDTH))
        w = w / np.sqrt(np.sum(np.abs(w) ** 2)) * rng.random()
        g = kp.omega_gap(beta, seq.FiniteVector.dense(w))
        fails += not g.holds
        if g.bound > 0:
            worst = max(worst, g.gap / g.bound)
    return Outcome({"samples": p["samples"], "failures": fails, "max_gap_over_bound": worst},
                   [f"{fails} omega-gap failures"] if fails else [])


def cmd_centralizer_search(p, cfg):
    r = kp.centralizer_search(p["alpha"], p["samples"], p["max_dim"], cfg.seed, cfg.threads)
    obj = r.to_obj()
    viol = [] if r.sup_ratio <= r.bound + 1e-9 else ["centralizer defect exceeds 2L/e"]
    return Outcome(obj, viol)


def cmd_quasilinearity_search(p, cfg):
    out, rows = {}, [["dim", "sup_ratio"]]
    for d in p["dims"]:
        r = kp.quasilinearity_search(p["alpha"], d, p["samples"], cfg.seed, cfg.threads)
        out[str(d)] = r.to_obj()
        rows.append([d, r.sup_ratio])
    sups = [out[str(d)]["sup_ratio"] for d in p["dims"]]
    return Outcome({"alpha": p["alpha"], "by_dim": out, "max_over_min_ratio": max(sups) / min(sups)}, table=rows)


def cmd_oscillation(p, cfg):
    r = ob.oscillation(p["alpha"], p["kappa"], p["sigma_min"], p["sigma_max"], p["samples"])
    viol = []
    if not 0.0 <= r.oscillation <= 2 * r.radius + 1e-12:
        viol.append("oscillation outside [0, 2R]")
    rows = [["sigma", "re", "im"]] + [list(t) for t in r.path_rows()]
    return Outcome(r.to_obj(), viol, rows)


def _fit_config(p, cfg):
    return ob.FitConfig(restarts=p["restarts"], max_evals=p["max_evals"], seed=cfg.seed, workers=cfg.threads)


def cmd_diagonal_fit(p, cfg):
    grid = ob.SigmaGrid.geometric(p["nmax"], p["ratio"])
    r = ob.diagonal_fit(p["alpha"], p["beta"], grid, _fit_config(p, cfg))
    res = r.to_obj()
    res["budget"] = p["budget"]
    res["separated"] = r.residual > p["budget"]
    viol = []
    if p["alpha"] == p["beta"] and r.residual > 1e-9:
        viol.append("equal parameters but residual above 1e-9")
    return Outcome(res, viol)


def cmd_contradiction_witness(p, cfg):
    n = ob.contradiction_witness(p["delta"], p["beta"])
    below = ob.witness_inequality(n - 1, p["delta"], p["beta"])
    at = ob.witness_inequality(n, p["delta"], p["beta"])
    viol = [] if (at and not below) else ["closed form disagrees with direct evaluation"]
    return Outcome({"delta": p["delta"], "beta": p["beta"], "N": str(n),
                    "log_N": 2 * (1 + 2 * math.hypot(1, p["beta"])) / p["delta"],
                    "holds_at_N": at, "holds_at_N_minus_1": below}, viol)


def cmd_proof_bounds(p, cfg):
    res = {"K": ob.proof_bound_K(p["c"], p["M"], p["beta"], p["sigma"], p["tau"])}
    if p.get("sigma2") is not None:
        d = ob.two_point_difference(p["alpha"], p["sigma"], p["tau"], p["sigma2"], p["tau2"])
        K2 = ob.proof_bound_K(p["c"], p["M"], p["beta"], p["sigma2"], p["tau2"])
        res.update({"K2": K2, "two_point_difference": d, "exceeds_budget": d > res["K"] + K2})
    return Outcome(res)


def cmd_sweep(p, cfg):
    kind = p["kind"]
    if kind == "residual-vs-nmax":
        rows = [["nmax", "sigma_max", "residual"]]
        prev, viol = -math.inf, []
        for e in p["exponents"]:
            grid = ob.SigmaGrid.geometric(2 ** e, p["ratio"])
            r = ob.diagonal_fit(p["alpha"], p["beta"], grid, _fit_config(p, cfg))
            rows.append([str(2 ** e), grid.sigma_max, r.residual])
            if r.residual < prev - 1e-9:
                viol.append(f"residual decreased at nmax=2^{e}")
            prev = r.residual
    elif kind == "inequality":
        checks = ["lower", "upper", "taylor_sharp" if p["taylor_constant"] == "sharp" else "taylor"]
        sw = scalar.sweep_bounds(p["samples"], cfg.seed, p["t_max"], p["beta_max"], p["tol"], checks)
        counts = sw.violations()
        rows = [["check", "samples", "violations"]] + [[k, p["samples"], counts[k]] for k in checks]
        viol = [f"{k}: {n} violations" for k, n in counts.items() if n]
    elif kind == "oscillation-vs-alpha":
        rows = [["alpha", "radius", "oscillation"]]
        viol = []
        for a in np.linspace(p["alpha_min"], p["alpha_max"], p["points"]):
            r = ob.oscillation(float(a), p["kappa"], p["sigma_min"], p["sigma_max"], p["samples"])
            rows.append([float(a), r.radius, r.oscillation])
            if a == 0.0 and r.oscillation != 0.0:
                viol.append("nonzero oscillation at alpha = 0")
    else:
        raise ConfigError(f"unknown sweep kind {kind!r}")
    header, body = rows[0], rows[1:]
    return Outcome({"kind": kind, "columns": header, "rows": body}, viol, rows)


COMMANDS = {
    "norm": cmd_norm,
    "omega": cmd_omega,
    "bounds-check": cmd_bounds_check,
    "omega-gap": cmd_omega_gap,
    "centralizer-search": cmd_centralizer_search,
    "quasilinearity-search": cmd_quasilinearity_search,
    "oscillation": cmd_oscillation,
    "diagonal-fit": cmd_diagonal_fit,
    "contradiction-witness": cmd_contradiction_witness,
    "proof-bounds": cmd_proof_bounds,
    "sweep": cmd_sweep,
}


# --- reports -----------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    return v


def build_report(cfg: ExperimentConfig, outcome: Outcome, elapsed: float) -> dict:
    return {
        "command": cfg.command,
        "config": _jsonable({**cfg.params, "seed": cfg.seed, "format": cfg.format}),
        "seed": cfg.seed,
        "version": __version__,
        "status": "violation" if outcome.violations else "ok",
        "violations": outcome.violations,
        "results": _jsonable(outcome.results),
        "timing": {"wall_clock_seconds": elapsed},
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _dumps_table(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else str(v).lower() if isinstance(v, bool) else v
                    for v in row])
    return buf.getvalue()


def run(cfg: ExperimentConfig) -> int:
    """Execute one experiment and write its report; returns the exit status."""
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown subcommand {cfg.command!r}")
    t0 = time.perf_counter()
    try:
        outcome = COMMANDS[cfg.command](cfg.params, cfg)
    except (DomainError, ConfigError) as exc:
        raise ConfigError(str(exc)) from exc
    report = build_report(cfg, outcome, time.perf_counter() - t0)
    if cfg.format == "csv":
        if outcome.table is None:
            raise ConfigError(f"{cfg.command} has no CSV form")
        text = _dumps_table(outcome.table)
    else:
        text = dumps_report(report)
    if cfg.output in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            Path(cfg.output).write_text(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {cfg.output}: {exc}") from exc
    return EXIT_VIOLATION if outcome.violations else EXIT_OK


# --- argument parsing ------------------------------------------------------------


def _int_list(text):
    return [int(v) for v in str(text).replace(",", " ").split()]


def _common(sp):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", "-o", default=None, help="report path (default: stdout)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--threads", type=int, default=1, help="cap on worker threads")
    sp.add_argument("--config", default=None, help="flat YAML file of flag values")


def _bounds_flags(sp):
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--t-max", type=float, default=1e3)
    sp.add_argument("--beta-max", type=float, default=10.0)
    sp.add_argument("--tol", type=float, default=scalar.TOL_REL)
    sp.add_argument("--taylor-constant", choices=("modulus", "sharp"), default="modulus")


def _fit_flags(sp):
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--ratio", type=float, default=2.0)
    sp.add_argument("--restarts", type=int, default=32)
    sp.add_argument("--max-evals", type=int, default=10_000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twistlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("norm", help="quasi-norm of a twisted vector")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--indicator", type=int, help="use (xi_A, sigma^a xi_A) with |A| = n")
    sp.add_argument("--vector", help="JSON file {alpha, x, y}")

    sp = sub.add_parser("omega", help="apply the centralizer")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--indicator", type=int)
    sp.add_argument("--vector", help="vector file (JSON or CSV)")

    sp = sub.add_parser("bounds-check", help="scalar inequalities, single point or random sweep")
    _bounds_flags(sp)
    sp.add_argument("--t", type=float)
    sp.add_argument("--s", type=float)

    sp = sub.add_parser("omega-gap", help="distance between Omega and Omega'")
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--max-dim", type=int, default=256)
    sp.add_argument("--vector")

    sp = sub.add_parser("centralizer-search", help="random search for the multiplier defect")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--max-dim", type=int, default=512)

    sp = sub.add_parser("quasilinearity-search", help="random search for the additivity defect")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--dims", type=_int_list, default=[2, 16, 256])

    sp = sub.add_parser("oscillation", help="oscillation of the divided-difference limit")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--kappa", type=float, default=math.e)
    sp.add_argument("--sigma-min", type=float, default=1.0)
    sp.add_argument("--sigma-max", type=float, default=math.exp(10.0))
    sp.add_argument("--samples", type=int, default=10_000)

    sp = sub.add_parser("diagonal-fit", help="min-max fit of a diagonal operator")
    _fit_flags(sp)
    sp.add_argument("--nmax", type=int, default=2 ** 20)
    sp.add_argument("--budget", type=float, default=1.0)

    sp = sub.add_parser("contradiction-witness", help="block count that rules out a lower bound delta")
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=0.0)

    sp = sub.add_parser("proof-bounds", help="the constant K_r and the two-point difference")
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--M", type=float, default=100.0)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--tau", type=float, default=2.0)
    sp.add_argument("--sigma2", type=float)
    sp.add_argument("--tau2", type=float)

    sp = sub.add_parser("sweep", help="parameter sweeps emitted as tables")
    sp.add_argument("--kind", choices=("residual-vs-nmax", "inequality", "oscillation-vs-alpha"),
                    default="residual-vs-nmax")
    _fit_flags(sp)
    sp.add_argument("--exponents", type=_int_list, default=[8, 14, 20])
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--t-max", type=float, default=1e3)
    sp.add_argument("--beta-max", type=float, default=10.0)
    sp.add_argument("--tol", type=float, default=scalar.TOL_REL)
    sp.add_argument("--taylor-constant", choices=("modulus", "sharp"), default="modulus")
    sp.add_argument("--kappa", type=float, default=math.e)
    sp.add_argument("--sigma-min", type=float, default=1.0)
    sp.add_argument("--sigma-max", type=float, default=math.exp(10.0))
    sp.add_argument("--alpha-min", type=float, default=-2.0)
    sp.add_argument("--alpha-max", type=float, default=2.0)
    sp.add_argument("--points", type=int, default=9)

    for sp in sub.choices.values():
        _common(sp)
    return parser


_RESERVED = {"command", "seed", "output", "format", "threads", "config"}


def _load_config_file(path, subparser) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text()) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must be a flat key-value mapping")
    known = {a.dest: a for a in subparser._actions if a.dest not in ("help", "config")}
    out = {}
    for key, value in data.items():
        dest = str(key).replace("-", "_")
        if dest not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(value, (dict, list)) and dest not in ("dims", "exponents"):
            raise ConfigError(f"config key {key!r} must be a scalar")
        action = known[dest]
        if action.type is not None and not isinstance(value, list):
            try:
                value = action.type(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
        out[dest] = value
    return out


def parse_config(argv=None) -> ExperimentConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        subparser.set_defaults(**_load_config_file(args.config, subparser))
        args = parser.parse_args(argv)
    ns = vars(args)
    params = {k: v for k, v in ns.items() if k not in _RESERVED}
    return ExperimentConfig(args.command, params, args.seed, args.output, args.format, max(1, args.threads))


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except ConfigError as exc:
        print(f"twistlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
