"""Command-line front end.

Subcommands::

    primal-sweep   Monte Carlo average of eps, q_w, S over a grid of R
    dual-sweep     Monte Carlo average of R', q_w, S over a grid of eps'
    theory         closed-form quenched and annealed curves only
    duality-audit  per-sample primal -> dual round trip residuals
    oracle-check   solve_primal against the reduced-space QP oracle

Exit status: 0 on success, 2 when the results disagree with theory (or an
audit residual exceeds 1e-8), 1 on usage or runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import PortfolioError
from .harness import (
    SweepKind,
    SweepSpec,
    compare_with_theory,
    duality_audit,
    qp_oracle,
    run_sweep,
)
from .market import Distribution, MarketParams, sample_market
from .solver import Branch, solve_primal
from .theory import (
    EnsembleMoments,
    annealed_dual,
    annealed_primal,
    quenched_dual,
    quenched_primal,
)

COMMANDS = ("primal-sweep", "dual-sweep", "theory", "duality-audit", "oracle-check")
SWEEP_COLUMNS = [
    "kind", "x", "stat", "mean", "stderr",
    "theory_quenched", "theory_annealed", "n_ok", "n_failed",
]
AUDIT_TOL = 1e-8

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: MarketParams
    n_samples: int
    grid: tuple
    branch: Branch
    kind: SweepKind
    out: str
    format: str
    workers: int


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_grid(text: str) -> tuple:
    """Parse ``start:stop:count`` into ``count`` evenly spaced points, endpoints included."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--grid: expected start:stop:count, got {text!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise UsageError(f"--grid: malformed grid {text!r}") from None
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise UsageError("--grid: endpoints must be finite")
    if count < 1:
        raise UsageError("--grid: grid is empty (count must be >= 1)")
    if count == 1:
        if start != stop:
            raise UsageError("--grid: a single-point grid needs start == stop")
        return (start,)
    if stop <= start:
        raise UsageError("--grid: stop must exceed start")
    return tuple(float(x) for x in np.linspace(start, stop, count))


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quenched-portfolio", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--n-assets", type=int, default=250)
    p.add_argument("--n-scenarios", type=int, default=750)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sdtilde2", type=float, default=1.0, help="variance of return rates")
    p.add_argument("--mean", type=float, default=1.0, help="mean of the mean returns")
    p.add_argument("--sigma2", type=float, default=1.0, help="variance of the mean returns")
    p.add_argument("--grid", default=None, help="start:stop:count")
    p.add_argument("--branch", choices=["max", "min"], default="max")
    p.add_argument("--dist", choices=["gaussian", "uniform"], default="gaussian")
    p.add_argument("--kind", choices=["primal", "dual"], default=None,
                   help="curve family for the theory subcommand")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--workers", type=int, default=1, help="threads for sample evaluation")
    return p


def parse_args(argv) -> RunConfig:
    """Validate ``argv`` completely before any computation.

    Raises
    ------
    UsageError
        With a one-line message naming the offending flag.
    """
    ns = _build_parser().parse_args(list(argv))

    if ns.n_assets < 1:
        raise UsageError("--n-assets: n_assets must be a positive integer")
    if ns.n_scenarios <= ns.n_assets:
        raise UsageError("--n-scenarios: n_scenarios must exceed n_assets")
    if not ns.sdtilde2 > 0:
        raise UsageError("--sdtilde2: return variance must be positive")
    if not ns.sigma2 > 0:
        raise UsageError("--sigma2: variance of means must be positive")
    if not math.isfinite(ns.mean):
        raise UsageError("--mean: must be finite")
    if not 0 <= ns.seed < 2**64:
        raise UsageError("--seed: must be an unsigned 64-bit integer")
    if ns.samples < 2:
        raise UsageError("--samples: at least 2 samples are required")
    if ns.workers < 1:
        raise UsageError("--workers: must be >= 1")
    if ns.kind is not None and ns.command != "theory":
        raise UsageError("--kind: only valid with the theory subcommand")

    if ns.command == "dual-sweep":
        kind = SweepKind.DUAL
    elif ns.command == "theory":
        kind = SweepKind(ns.kind or "primal")
    else:
        kind = SweepKind.PRIMAL
    default_grid = "1:3:5" if kind is SweepKind.DUAL else "0:2:5"
    grid = parse_grid(ns.grid if ns.grid is not None else default_grid)

    dist = Distribution(ns.dist)
    params = MarketParams(
        n_assets=ns.n_assets,
        n_scenarios=ns.n_scenarios,
        return_variance=ns.sdtilde2,
        mean_of_means=ns.mean,
        variance_of_means=ns.sigma2,
        return_dist=dist,
        mean_dist=dist,
        master_seed=ns.seed,
    )
    if ns.command == "oracle-check" and ns.n_assets < 3:
        raise UsageError("--n-assets: oracle-check needs at least 3 assets")
    return RunConfig(
        command=ns.command,
        params=params,
        n_samples=ns.samples,
        grid=grid,
        branch=Branch(ns.branch),
        kind=kind,
        out=ns.out,
        format=ns.format,
        workers=ns.workers,
    )


def fmt(x) -> str:
    """17 significant digits, blank for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


# --------------------------------------------------------------------------
# report builders: each returns (columns, rows, extra-json, exit_code)
# --------------------------------------------------------------------------


def _sweep_rows(result):
    kind = result.kind.value
    rows = []
    for pt, tq, ta in zip(result.per_point, result.theory_quenched, result.theory_annealed):
        for stat, mean, se, attr in (
            (result.primary_stat, pt.mean_primary, pt.se_primary, "epsilon_or_return"),
            ("q_w", pt.mean_qw, pt.se_qw, "q_w"),
            ("sharpe", pt.mean_sharpe, pt.se_sharpe, "sharpe"),
        ):
            rows.append({
                "kind": kind,
                "x": pt.x_value,
                "stat": stat,
                "mean": mean,
                "stderr": se,
                "theory_quenched": None if tq is None else getattr(tq, attr),
                "theory_annealed": None if ta is None else getattr(ta, attr),
                "n_ok": pt.n_ok,
                "n_failed": pt.n_failed,
            })
    return rows


def theory_rows(config: RunConfig) -> list[dict]:
    moments = EnsembleMoments.from_params(config.params)
    rows = []
    for x in config.grid:
        if config.kind is SweepKind.PRIMAL:
            tq = quenched_primal(moments, x)
            ta = annealed_primal(moments, x)
            primary = "epsilon"
        else:
            tq = _maybe(quenched_dual, moments, x, config.branch)
            ta = _maybe(annealed_dual, moments, x, config.branch)
            primary = "r_prime"
        for stat, attr in ((primary, "epsilon_or_return"), ("q_w", "q_w"), ("sharpe", "sharpe")):
            rows.append({
                "kind": config.kind.value,
                "x": x,
                "stat": stat,
                "mean": None,
                "stderr": None,
                "theory_quenched": None if tq is None else getattr(tq, attr),
                "theory_annealed": None if ta is None else getattr(ta, attr),
                "n_ok": None,
                "n_failed": None,
            })
    return rows


def _maybe(fn, *args):
    try:
        return fn(*args)
    except PortfolioError:
        return None


def _audit_rows(config: RunConfig):
    rows = []
    for c in range(config.n_samples):
        sample = sample_market(config.params, c)
        for rec in duality_audit(sample, config.grid):
            rows.append({
                "kind": "duality",
                "sample_index": c,
                "x": rec.R,
                "branch": rec.branch.value,
                "return_residual": rec.return_residual,
                "portfolio_residual": rec.portfolio_residual,
            })
    ok = all(
        r["return_residual"] <= AUDIT_TOL and r["portfolio_residual"] <= AUDIT_TOL
        for r in rows
    )
    return rows, ok


def _oracle_rows(config: RunConfig):
    rows = []
    for c in range(config.n_samples):
        sample = sample_market(config.params, c)
        for R in config.grid:
            fast = solve_primal(sample, R)
            slow = qp_oracle(sample, R)
            rows.append({
                "kind": "oracle",
                "sample_index": c,
                "x": R,
                "epsilon_diff": abs(fast.epsilon - slow.epsilon),
                "portfolio_diff": float(np.max(np.abs(fast.portfolio - slow.portfolio))),
            })
    ok = all(r["epsilon_diff"] <= AUDIT_TOL and r["portfolio_diff"] <= AUDIT_TOL for r in rows)
    return rows, ok


def _render_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row[c] if isinstance(row[c], str) else fmt(row[c]) for c in columns])
    return buf.getvalue()


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _render_json(columns, rows, config: RunConfig, extra: dict) -> str:
    doc = {
        "command": config.command,
        "columns": columns,
        "rows": [{c: _json_value(row[c]) for c in columns} for row in rows],
        "provenance": {
            "seed": config.params.master_seed,
            "params": config.params.to_dict(),
            "n_samples": config.n_samples,
            "grid": list(config.grid),
            "branch": config.branch.value,
            "version": __version__,
        },
    }
    doc.update(extra)
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def emit(columns, rows, config: RunConfig, extra: dict | None = None):
    """Write the report to ``config.out`` (stdout for ``-``) in the configured format."""
    extra = extra or {}
    if config.format == "csv":
        text = _render_csv(columns, rows)
    else:
        text = _render_json(columns, rows, config, extra)
    if config.out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(config.out, "w", newline="") as fh:
            fh.write(text)


def execute(config: RunConfig) -> int:
    if config.command in ("primal-sweep", "dual-sweep"):
        spec = SweepSpec(config.kind, config.grid, config.n_samples, config.params, config.branch)
        result = run_sweep(spec, workers=config.workers)
        report = compare_with_theory(result)
        extra = {
            "wall_time": result.provenance["wall_time"],
            "comparison": {
                "pass_fraction": report.pass_fraction,
                "verdict": "pass" if report.verdict else "fail",
                "entries": [
                    {"x": e.x_value, "stat": e.stat, "z": _json_value(e.z), "passed": e.passed}
                    for e in report.entries
                ],
            },
            "failures": [
                {"x": pt.x_value, "sample_index": c, "error": msg}
                for pt in result.per_point for c, msg in pt.failures
            ],
        }
        emit(SWEEP_COLUMNS, _sweep_rows(result), config, extra)
        print(
            f"{config.command}: {report.pass_fraction:.0%} of statistics agree with theory "
            f"-> {'pass' if report.verdict else 'fail'}",
            file=sys.stderr,
        )
        return EXIT_OK if report.verdict else EXIT_MISMATCH
    if config.command == "theory":
        emit(SWEEP_COLUMNS, theory_rows(config), config)
        return EXIT_OK
    if config.command == "duality-audit":
        rows, ok = _audit_rows(config)
        columns = ["kind", "sample_index", "x", "branch", "return_residual", "portfolio_residual"]
    else:
        rows, ok = _oracle_rows(config)
        columns = ["kind", "sample_index", "x", "epsilon_diff", "portfolio_diff"]
    emit(columns, rows, config, {"verdict": "pass" if ok else "fail"})
    return EXIT_OK if ok else EXIT_MISMATCH


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        return execute(config)
    except (PortfolioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
