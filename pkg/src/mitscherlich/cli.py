"""Command-line front end.

Subcommands: ``design``, ``table1``, ``table2``, ``efficiency``, ``verify``
and ``simulate``.  Settings come from flags, then an optional ``--config``
file of ``key = value`` lines, then the built-in presets (window [0, 15],
beta = (0.5, 1, 1)).  Output goes to stdout unless ``--out`` is given.

Exit codes: 0 success, 2 invalid input or infeasible problem, 3 failed
verification.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

from mitscherlich import __version__
from mitscherlich.errors import ConfigError, MitscherlichError
from mitscherlich.family import GAUSSIAN, INVERSE_GAUSSIAN, POISSON, Family, Kind, LinkLike
from mitscherlich.fisher import HeteroSpec
from mitscherlich.mle import SimConfig, covariance_check
from mitscherlich.model import Bounds, Design, ModelParams
from mitscherlich.solver import (
    DEFAULT_GRID_STEP,
    SolveReport,
    TransformedFamily,
    TransformSpec,
    dilution_design,
    efficiency,
    hetero_solve,
    solve,
    transformed_solve,
)
from mitscherlich.tables import DILUTIONS, PRESET_BOUNDS, PRESET_ROWS, TABLE1_FAMILIES, table1, table2
from mitscherlich.verification import oracle_check

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 2, 3
FAULTS = ("x2-curvature-sign",)
MC_TOLERANCE = 0.10


def mc_tolerance(replicates: int) -> float:
    """Allowed relative deviation of a simulated variance.

    10%, widened to three standard errors of a sample variance
    (``sqrt(2 / (R - 1))``) when the replicate count is small.
    """
    return max(MC_TOLERANCE, 3.0 * math.sqrt(2.0 / (replicates - 1)))

PRESETS: dict[str, Any] = {
    "family": "gaussian",
    "beta": PRESET_ROWS[1].as_tuple(),
    "bounds": (PRESET_BOUNDS.lower, PRESET_BOUNDS.upper),
    "transform": "id",
    "grid_step": DEFAULT_GRID_STEP,
    "dilution": DILUTIONS,
    "seed": 0,
    "replicates": 2000,
    "n_per_point": 500,
    "format": "pretty",
}


# ---------------------------------------------------------------------------
# Config file
# ---------------------------------------------------------------------------

def _floats(k: int | None) -> Callable[[str], tuple[float, ...]]:
    def parse(text: str) -> tuple[float, ...]:
        vals = tuple(float(v) for v in text.replace(",", " ").split())
        if k is not None and len(vals) != k:
            raise ValueError(f"expected {k} numbers, got {len(vals)}")
        if not vals:
            raise ValueError("expected at least one number")
        return vals
    return parse


def _ints(k: int) -> Callable[[str], tuple[int, ...]]:
    def parse(text: str) -> tuple[int, ...]:
        vals = tuple(int(v) for v in text.replace(",", " ").split())
        if len(vals) != k:
            raise ValueError(f"expected {k} integers, got {len(vals)}")
        return vals
    return parse


CONFIG_KEYS: dict[str, Callable[[str], Any]] = {
    "family": str,
    "beta": _floats(3),
    "bounds": _floats(2),
    "trials": int,
    "power": float,
    "sigma2": float,
    "transform": str,
    "grid_step": float,
    "dilution": _floats(None),
    "candidate": _floats(3),
    "design": _floats(3),
    "counts": _ints(3),
    "seed": int,
    "replicates": int,
    "n_per_point": int,
    "dispersion": float,
    "format": str,
}


def read_config(path: str | Path) -> dict[str, Any]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment.

    Errors name the file and line.  Keys use underscores (``grid_step``);
    hyphens are accepted too.
    """
    out: dict[str, Any] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file ({exc.strerror})") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    command: str
    family: LinkLike
    base_family: Family
    params: ModelParams
    bounds: Bounds
    transform: str = "id"
    grid_step: float = DEFAULT_GRID_STEP
    counts: tuple[int, int, int] = (1, 1, 1)
    dilution: tuple[float, ...] = DILUTIONS
    candidate: tuple[float, float, float] | None = None
    design: tuple[float, float, float] | None = None
    seed: int = 0
    replicates: int = 2000
    n_per_point: int = 500
    dispersion: float | None = None
    fmt: str = "pretty"
    out: str | None = None
    fault: str | None = None

    def solve(self) -> SolveReport:
        if isinstance(self.family, HeteroSpec):
            return hetero_solve(self.family, self.params, self.bounds, self.counts,
                                grid_step=self.grid_step)
        if self.transform != "id":
            return transformed_solve(self.base_family, TransformSpec.from_name(self.transform),
                                     self.params, self.bounds, self.counts,
                                     grid_step=self.grid_step)
        return solve(self.family, self.params, self.bounds, self.counts,
                     grid_step=self.grid_step)


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags, config file and presets; validate everything up front."""
    file_vals = read_config(args.config) if getattr(args, "config", None) else {}

    def pick(key: str, default: Any = None) -> Any:
        val = getattr(args, key, None)
        if val is not None:
            return val
        if key in file_vals:
            return file_vals[key]
        return PRESETS.get(key, default)

    def tup(v):
        return None if v is None else tuple(v)

    try:
        name = pick("family")
        trials = pick("trials")
        base = Family.from_name(name, trials)
        if trials is not None and base.kind is not Kind.BINOMIAL:
            raise ConfigError(f"--trials only applies to the binomial family, not {name}")
        power, sigma2 = pick("power"), pick("sigma2")
        family: LinkLike = base
        if power is not None:
            if base.kind is not Kind.GAUSSIAN:
                raise ConfigError("--power needs --family gaussian")
            family = HeteroSpec.power_law(power, 1.0 if sigma2 is None else sigma2)
        transform = pick("transform")
        TransformSpec.from_name(transform)
        if transform != "id" and power is not None:
            raise ConfigError("--transform cannot be combined with --power")
        lo, hi = pick("bounds")
        fmt = "json" if getattr(args, "json", False) else pick("format")
        if fmt not in ("pretty", "csv", "json"):
            raise ConfigError(f"unknown format {fmt!r}")
        dispersion = pick("dispersion")
        if dispersion is None and base.kind is Kind.GAUSSIAN and sigma2 is not None:
            dispersion = sigma2
        grid_step = float(pick("grid_step"))
        if not grid_step > 0:
            raise ConfigError("grid step must be positive")
        dil = tuple(float(d) for d in pick("dilution"))
        if any(not d > 1 for d in dil):
            raise ConfigError("dilution factors must exceed 1")
        cfg = RunConfig(
            command=args.command,
            family=family,
            base_family=base,
            params=ModelParams(*pick("beta")),
            bounds=Bounds(lo, hi),
            transform=transform,
            grid_step=grid_step,
            counts=tuple(pick("counts", (1, 1, 1))),
            dilution=dil,
            candidate=tup(pick("candidate")),
            design=tup(pick("design")),
            seed=int(pick("seed")),
            replicates=int(pick("replicates")),
            n_per_point=int(pick("n_per_point")),
            dispersion=dispersion,
            fmt=fmt,
            out=getattr(args, "out", None),
            fault=getattr(args, "inject_fault", None),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.counts and any(c < 1 for c in cfg.counts):
        raise ConfigError("replicate counts must be positive")
    if cfg.replicates < 0 or cfg.n_per_point < 1:
        raise ConfigError("replicates must be >= 0 and n per point >= 1")
    if cfg.command == "verify" and cfg.replicates == 1:
        raise ConfigError("the covariance checks need at least two replicates (0 skips them)")
    if cfg.command == "simulate":
        if cfg.replicates < 2:
            raise ConfigError("simulate needs at least two replicates")
        if not isinstance(cfg.family, Family) or cfg.transform != "id":
            raise ConfigError("simulate supports the plain families only")
        SimConfig(seed=cfg.seed, replicates=cfg.replicates, n_per_point=cfg.n_per_point,
                  dispersion=cfg.dispersion)
    return cfg


# ---------------------------------------------------------------------------
# Formatting
# ---------------------------------------------------------------------------

def _num(v: float | None) -> float | None:
    """JSON-safe float: non-finite values become null."""
    if v is None or not math.isfinite(v):
        return None
    return float(v)


def _yn(flag: bool) -> str:
    return "yes" if flag else "no"


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(record: dict) -> str:
    return json.dumps(record, indent=2, allow_nan=False) + "\n"


def _pretty_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def design_record(cfg: RunConfig, rep: SolveReport) -> dict:
    rec = {
        "schema": f"mitscherlich.design/{SCHEMA_VERSION}",
        "family": rep.family,
        "transform": cfg.transform,
        "beta": list(cfg.params.as_tuple()),
        "bounds": [cfg.bounds.lower, cfg.bounds.upper],
        "x": list(rep.x),
        "n": list(rep.design.n),
        "det": _num(rep.det),
        "det_infinite": rep.det is not None and math.isinf(rep.det),
        "method": rep.method.value,
        "conditions": rep.conditions.as_dict(),
        "conditions_lower": rep.conditions_lower.as_dict(),
        "conditions_upper": rep.conditions_upper.as_dict(),
        "theorems_apply": rep.theorems_apply,
        "x2_interval": list(rep.x2_interval),
        "within_bounds": rep.design.within(cfg.bounds),
        "grid_step": rep.grid_step,
        "grid_x": None if rep.grid_design is None else list(rep.grid_design.x),
        "notes": list(rep.notes),
    }
    return rec


def format_design(cfg: RunConfig, rep: SolveReport) -> str:
    rec = design_record(cfg, rep)
    if cfg.fmt == "json":
        return _json(rec)
    if cfg.fmt == "csv":
        c = rep.conditions
        return _csv(
            ["family", "b1", "b2", "b3", "L", "U", "x1", "x2", "x3", "det", "method",
             "c1", "c2", "c3"],
            [[rep.family, *cfg.params.as_tuple(), cfg.bounds.lower, cfg.bounds.upper,
              *map(repr, rep.x), repr(rep.det), rep.method.value, c.c1, c.c2, c.c3]],
        )
    c = rep.conditions
    lines = [
        f"family      {rep.family}" + (f" (mean transform {cfg.transform})"
                                       if cfg.transform != "id" else ""),
        "beta        " + "  ".join(f"{b:g}" for b in cfg.params.as_tuple()),
        f"window      [{cfg.bounds.lower:g}, {cfg.bounds.upper:g}]",
        "design      " + "  ".join(f"{v:.2f}" for v in rep.x),
        "counts      " + "  ".join(str(v) for v in rep.design.n),
        f"determinant {rep.det:.6g}",
        f"method      {rep.method.value}",
        f"conditions  g'>=0: {_yn(c.c1)}  g''<=0: {_yn(c.c2)}  mu g''+2g'>=0: {_yn(c.c3)}",
        f"in window   {_yn(rec['within_bounds'])}",
    ]
    lines += [f"note        {n}" for n in rep.notes]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_design(cfg: RunConfig) -> tuple[int, str]:
    return EXIT_OK, format_design(cfg, cfg.solve())


def cmd_table1(cfg: RunConfig) -> tuple[int, str]:
    rows = table1(grid_step=cfg.grid_step)
    names = [f.name for f in TABLE1_FAMILIES]
    if cfg.fmt == "json":
        rec = {
            "schema": f"mitscherlich.table1/{SCHEMA_VERSION}",
            "bounds": [PRESET_BOUNDS.lower, PRESET_BOUNDS.upper],
            "families": names,
            "rows": [
                {"beta": list(r.params.as_tuple()), "x2": list(r.x2),
                 "method": [rep.method.value for rep in r.reports]}
                for r in rows
            ],
        }
        return EXIT_OK, _json(rec)
    header = ["b1", "b2", "b3", *names]
    if cfg.fmt == "csv":
        return EXIT_OK, _csv(header, [[*r.params.as_tuple(), *map(repr, r.x2)] for r in rows])
    body = [[f"{b:.1f}" for b in r.params.as_tuple()] + [f"{v:.2f}" for v in r.x2]
            for r in rows]
    return EXIT_OK, _pretty_table(header, body)


def cmd_table2(cfg: RunConfig) -> tuple[int, str]:
    rows = table2(dilutions=cfg.dilution, grid_step=cfg.grid_step)
    dil_names = [f"d={d:g}" for d in cfg.dilution]
    if cfg.fmt == "json":
        rec = {
            "schema": f"mitscherlich.table2/{SCHEMA_VERSION}",
            "family": "invgauss",
            "bounds": [PRESET_BOUNDS.lower, PRESET_BOUNDS.upper],
            "efficiency": "det(dilution) / det(grid optimum), dilution (U/d^2, U/d, U)",
            "dilutions": list(cfg.dilution),
            "rows": [
                {"beta": list(r.params.as_tuple()), "x": list(r.report.x),
                 "det": r.report.det, "grid_x": list(r.report.grid_design.x),
                 "grid_det": r.report.grid_design.det, "efficiency": list(r.efficiencies)}
                for r in rows
            ],
        }
        return EXIT_OK, _json(rec)
    header = ["b1", "b2", "b3", "x1", "x2", "x3", "det", *dil_names]
    if cfg.fmt == "csv":
        return EXIT_OK, _csv(header, [
            [*r.params.as_tuple(), *map(repr, r.report.x), repr(r.report.det),
             *map(repr, r.efficiencies)] for r in rows
        ])
    body = [
        [f"{b:.1f}" for b in r.params.as_tuple()]
        + [f"{v:.2f}" for v in r.report.x]
        + [f"{r.report.det:.3f}"]
        + [f"{100 * e:.1f}%" for e in r.efficiencies]
        for r in rows
    ]
    return EXIT_OK, _pretty_table(header, body)


def cmd_efficiency(cfg: RunConfig) -> tuple[int, str]:
    rep = cfg.solve()
    fam = _criterion_family(cfg)
    candidates: list[tuple[str, Design]] = [
        (f"dilution d={d:g}", dilution_design(cfg.bounds.upper, d, rep.design.n))
        for d in cfg.dilution
    ]
    if cfg.candidate is not None:
        candidates.append(("candidate", Design(cfg.candidate, rep.design.n)))
    results = [(label, d, efficiency(fam, cfg.params, d, rep.design)) for label, d in candidates]
    if cfg.fmt == "json":
        rec = {
            "schema": f"mitscherlich.efficiency/{SCHEMA_VERSION}",
            "family": rep.family,
            "beta": list(cfg.params.as_tuple()),
            "bounds": [cfg.bounds.lower, cfg.bounds.upper],
            "optimal_x": list(rep.x),
            "optimal_det": _num(rep.det),
            "candidates": [
                {"label": label, "x": list(d.x), "ratio": _num(e.ratio),
                 "d_efficiency": _num(e.d_efficiency)}
                for label, d, e in results
            ],
        }
        return EXIT_OK, _json(rec)
    header = ["design", "x1", "x2", "x3", "det ratio", "D-efficiency"]
    if cfg.fmt == "csv":
        return EXIT_OK, _csv(header, [[label, *map(repr, d.x), repr(e.ratio),
                                       repr(e.d_efficiency)] for label, d, e in results])
    body = [["optimal", *(f"{v:.2f}" for v in rep.x), "100.0%", "100.0%"]]
    body += [[label, *(f"{v:.2f}" for v in d.x), f"{100 * e.ratio:.1f}%",
              f"{100 * e.d_efficiency:.1f}%"] for label, d, e in results]
    return EXIT_OK, _pretty_table(header, body)


def _criterion_family(cfg: RunConfig) -> LinkLike:
    if cfg.transform != "id":
        return TransformedFamily(cfg.base_family, TransformSpec.from_name(cfg.transform))
    return cfg.family


def cmd_verify(cfg: RunConfig) -> tuple[int, str]:
    sign = -1.0 if cfg.fault == "x2-curvature-sign" else 1.0
    checks: list[dict] = []
    for fam in TABLE1_FAMILIES + (INVERSE_GAUSSIAN,):
        for p in PRESET_ROWS:
            c = oracle_check(fam, p, PRESET_BOUNDS, grid_step=cfg.grid_step, curvature_sign=sign)
            checks.append({"name": f"oracle {c.family} beta={list(p.as_tuple())}",
                           "passed": c.passed, "detail": c.detail})
    if cfg.replicates > 0:
        sim = SimConfig(seed=cfg.seed, replicates=cfg.replicates, n_per_point=cfg.n_per_point)
        tol = mc_tolerance(cfg.replicates)
        for fam in (POISSON, GAUSSIAN):
            design = solve(fam, cfg.params, cfg.bounds).design
            rep = covariance_check(fam, cfg.params, design, sim)
            dev = rep.max_diagonal_deviation
            checks.append({
                "name": f"covariance {fam.name} beta={list(cfg.params.as_tuple())}",
                "passed": bool(dev < tol),
                "detail": f"max relative deviation of variances {dev:.4f} "
                          f"(tolerance {tol:.3f}), {rep.failures} failed fits",
            })
    failed = [c["name"] for c in checks if not c["passed"]]
    status = EXIT_VERIFY if failed else EXIT_OK
    if cfg.fmt == "json":
        rec = {"schema": f"mitscherlich.verify/{SCHEMA_VERSION}", "seed": cfg.seed,
               "replicates": cfg.replicates, "n_per_point": cfg.n_per_point,
               "passed": not failed, "failed": failed, "checks": checks}
        return status, _json(rec)
    if cfg.fmt == "csv":
        return status, _csv(["check", "passed", "detail"],
                            [[c["name"], c["passed"], c["detail"]] for c in checks])
    lines = [f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}: {c['detail']}" for c in checks]
    lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return status, "\n".join(lines) + "\n"


def cmd_simulate(cfg: RunConfig) -> tuple[int, str]:
    design = (Design(cfg.design, (cfg.n_per_point,) * 3) if cfg.design is not None
              else cfg.solve().design)
    sim = SimConfig(seed=cfg.seed, replicates=cfg.replicates, n_per_point=cfg.n_per_point,
                    dispersion=cfg.dispersion)
    rep = covariance_check(cfg.family, cfg.params, design, sim)
    rec = rep.to_dict()
    if cfg.fmt == "json":
        return EXIT_OK, _json(rec)
    if cfg.fmt == "csv":
        names = ("b1", "b2", "b3")
        rows = [[names[i], names[j], rep.empirical[i, j], rep.expected[i, j]]
                for i in range(3) for j in range(3)]
        return EXIT_OK, _csv(["param_i", "param_j", "empirical", "expected"], rows)
    lines = [
        f"family        {rep.family}",
        "design        " + "  ".join(f"{v:.2f}" for v in rep.design),
        f"replicates    {rep.replicates} x {rep.n_per_point} per point (seed {rep.seed}), "
        f"{rep.failures} failed fits",
        "mean beta     " + "  ".join(f"{v:.4f}" for v in rep.mean_estimate),
        "variance dev  " + "  ".join(f"{100 * v:+.1f}%" for v in rep.diagonal_deviation),
        f"gen. variance {rep.generalized_variance:.4g} (expected "
        f"{rep.expected_generalized_variance:.4g}, log-scale SE {rep.log_gv_se:.3f})",
    ]
    return EXIT_OK, "\n".join(lines) + "\n"


COMMANDS = {
    "design": cmd_design,
    "table1": cmd_table1,
    "table2": cmd_table2,
    "efficiency": cmd_efficiency,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--family", help="gaussian, poisson, negbin, gamma, binomial, invgauss")
    g.add_argument("--beta", nargs=3, type=float, metavar=("B1", "B2", "B3"))
    g.add_argument("--bounds", nargs=2, type=float, metavar=("L", "U"))
    g.add_argument("--trials", type=int, metavar="N", help="binomial trial count")
    g.add_argument("--power", type=float, metavar="P",
                   help="normal responses with variance sigma2 * mu^P")
    g.add_argument("--sigma2", type=float, metavar="V")
    g.add_argument("--transform", choices=["id", "sqrt", "exp"])
    g.add_argument("--counts", nargs=3, type=int, metavar=("N1", "N2", "N3"),
                   help="replicates per design point")
    s = common.add_argument_group("search and output")
    s.add_argument("--grid-step", type=float, dest="grid_step")
    s.add_argument("--dilution", nargs="+", type=float, metavar="D")
    s.add_argument("--format", choices=["pretty", "csv", "json"])
    s.add_argument("--json", action="store_true", help="shorthand for --format json")
    s.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    s.add_argument("--config", metavar="PATH", help="key = value settings file")
    m = common.add_argument_group("simulation")
    m.add_argument("--seed", type=int)
    m.add_argument("--replicates", type=int)
    m.add_argument("--n-per-point", type=int, dest="n_per_point")
    m.add_argument("--dispersion", type=float,
                   help="sigma2 (gaussian), shape (gamma), size (negbin), lambda (invgauss)")
    m.add_argument("--design", nargs=3, type=float, metavar=("X1", "X2", "X3"),
                   help="simulate at this design instead of the optimal one")
    m.add_argument("--candidate", nargs=3, type=float, metavar=("X1", "X2", "X3"),
                   help="extra design to compare in 'efficiency'")
    m.add_argument("--inject-fault", choices=FAULTS, dest="inject_fault",
                   help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="mitscherlich",
        description="Locally D-optimal three-point designs for the Mitscherlich curve.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "design": "optimal design for one family and parameter guess",
        "table1": "optimal middle stimulus for six families at the preset rows",
        "table2": "inverse-Gaussian designs with dilution efficiencies",
        "efficiency": "efficiency of dilution (or given) designs against the optimum",
        "verify": "oracle agreement and Monte-Carlo covariance checks",
        "simulate": "Monte-Carlo covariance of the MLE at a design",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        status, text = COMMANDS[cfg.command](cfg)
    except (MitscherlichError, ValueError) as exc:
        print(f"mitscherlich {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if status == EXIT_VERIFY:
        failed = [ln for ln in text.splitlines() if ln.startswith("FAIL")]
        print("verification failed" + "".join(f"\n  {ln}" for ln in failed), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
