"""Command-line front end: sweeps, figure presets, validation, optimisation.

    relaysec analytic --config run.cfg --out run.csv
    relaysec simulate --config run.cfg --trials 100000 --threads 0
    relaysec validate --config run.cfg
    relaysec figure fig2 --out fig2.csv
    relaysec optimize --config grid.cfg

Exit codes: 0 success, 2 infeasible optimisation, 1 any error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass

from . import analytic as an
from .channel import CorrelationCoeffs
from .config import ConfigError, load_config, parse_config
from .presets import get_preset
from .simulate import TrialPlan, estimate
from .strategies import StrategyKind

__all__ = [
    "main",
    "column_names",
    "sweep_rows",
    "write_csv",
    "format_value",
    "run_config",
    "run_figure",
    "validate",
    "ValidationRow",
    "optimize",
]

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

_ANALYTIC = (StrategyKind.TBRS, StrategyKind.JRJS)
_MC_METRICS = ("cop", "sop", "rscp", "throughput", "loss")


def format_value(v):
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.9g}"


def _available(cfg, strategy, engine, metric):
    if engine == "analytic":
        return strategy in _ANALYTIC and not cfg.with_se_link
    return metric in _MC_METRICS


def column_names(cfg):
    cols = []
    for s in cfg.strategies:
        for engine in cfg.engines:
            for m in cfg.metrics:
                if not _available(cfg, s, engine, m):
                    continue
                cols.append(f"{s.value}_{engine}_{m}")
                if engine == "mc":
                    cols.append(f"{s.value}_{engine}_{m}_stderr")
    return cols


def _no_delay(sc):
    return an.Scenario(sc.params, CorrelationCoeffs(1.0, 1.0), sc.pair, sc.lam)


def _analytic_metrics(cfg, sc, strategy, metrics):
    out = {}
    for m in metrics:
        if m == "cop":
            out[m] = an.cop(sc, strategy, cfg.mode)
        elif m == "sop":
            out[m] = an.sop(sc, strategy, cfg.mode)
        elif m == "rscp":
            out[m] = an.rscp(sc, strategy, cfg.mode)
        elif m == "throughput":
            out[m] = an.effective_throughput(sc, strategy, "analytic", cfg.mode)
        elif m == "rsr":
            out[m] = an.rsr_tbrs(sc) if strategy is StrategyKind.TBRS else an.rsr_jrjs(sc)
        elif m == "loss":
            out[m] = an.throughput_loss(sc, _no_delay(sc), strategy, "analytic", mode=cfg.mode)
    return out


def _plan(cfg, sc, strategy):
    return TrialPlan(sc, strategy, trials=cfg.trials, master_seed=cfg.seed,
                     with_se_link=cfg.with_se_link, sigma2_se=cfg.sigma2_se)


def _mc_metrics(cfg, sc, strategy, metrics):
    want = [m for m in metrics if m in _MC_METRICS]
    if not want:
        return {}
    est = estimate(_plan(cfg, sc, strategy), threads=cfg.threads)
    out = {m: (est[m].value, est[m].std_err) for m in want if m in est}
    if "loss" in want:
        ref = estimate(_plan(cfg, _no_delay(sc), strategy), threads=cfg.threads)["throughput"]
        got = est["throughput"]
        if ref.value <= 0:
            out["loss"] = (math.nan, math.nan)
        else:
            # Delta method, treating the two estimates as independent.
            se = math.hypot(got.std_err / ref.value, got.value * ref.std_err / ref.value**2)
            out["loss"] = (min(max(1.0 - got.value / ref.value, 0.0), 1.0), se)
    return out


def _point_values(cfg, sc):
    vals = []
    for s in cfg.strategies:
        for engine in cfg.engines:
            metrics = [m for m in cfg.metrics if _available(cfg, s, engine, m)]
            if not metrics:
                continue
            if engine == "analytic":
                got = _analytic_metrics(cfg, sc, s, metrics)
                vals.extend(got[m] for m in metrics)
            else:
                got = _mc_metrics(cfg, sc, s, metrics)
                for m in metrics:
                    vals.extend(got[m])
    return vals


def sweep_rows(cfg, outer=None):
    """Header and rows for a sweep; ``outer = (name, values)`` adds a long-format axis."""
    if cfg.sweep is None:
        raise ConfigError("sweep", 0, "required key missing (exactly one sweep axis per run)")
    header = [cfg.sweep.name] + column_names(cfg)
    rows = []
    outer_values = outer[1] if outer else (None,)
    if outer:
        header = [outer[0]] + header
    for ov in outer_values:
        for v in cfg.sweep.values:
            overrides = {outer[0]: ov} if outer else {}
            sc = cfg.scenario_at(v, **overrides)
            row = ([ov] if outer else []) + [v] + _point_values(cfg, sc)
            rows.append(row)
    return header, rows


def write_csv(path_or_file, header, rows):
    """Write a CSV with LF line endings and 9 significant digits."""
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([format_value(v) for v in r])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
        return
    with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
        emit(fh)


def run_config(cfg, out=None):
    header, rows = sweep_rows(cfg)
    target = out or cfg.out
    if target:
        write_csv(target, header, rows)
        print(f"wrote {len(rows)} rows x {len(header)} columns to {target}")
    else:
        write_csv(sys.stdout, header, rows)
    return EXIT_OK


def _series_path(out, label, multi):
    if not multi:
        return out
    stem, ext = os.path.splitext(out)
    return f"{stem}_{label}{ext or '.csv'}"


def run_figure(fig_id, out=None, trials=None, seed=None, threads=None):
    preset = get_preset(fig_id)
    out = out or f"{preset.id}.csv"
    configs = preset.configs(trials=trials, seed=seed, threads=threads)
    multi = len(configs) > 1
    for series, cfg in configs:
        outer = (series.outer_axis, series.outer_grid) if series.outer_axis else None
        header, rows = sweep_rows(cfg, outer)
        path = _series_path(out, series.label, multi)
        write_csv(path, header, rows)
        print(f"{preset.id} [{series.label}]: wrote {len(rows)} rows to {path}")
    return EXIT_OK


# --- validation -------------------------------------------------------------

@dataclass
class ValidationRow:
    point: float
    strategy: str
    metric: str
    kind: str          # "exact" (3 standard errors) or "approx" (absolute tolerance)
    analytic: float
    mc: float
    std_err: float
    tolerance: float

    @property
    def diff(self):
        return abs(self.analytic - self.mc)

    @property
    def passed(self):
        return self.diff <= self.tolerance

    def as_row(self):
        return [self.point, self.strategy, self.metric, self.kind, self.analytic, self.mc,
                self.std_err, self.diff, self.tolerance, "PASS" if self.passed else "FAIL"]


VALIDATION_HEADER = ["point", "strategy", "metric", "kind", "analytic", "mc", "mc_stderr",
                     "abs_diff", "tolerance", "verdict"]
APPROX_TOLERANCE = 0.03


def validate(cfg, corrupt_gbar=None):
    """Analytic-versus-MC comparison at every sweep point.

    TBRS outage probabilities (and the TBRS RSCP by quadrature) are exact and
    must sit within 3 standard errors; the JRJS lemmas and the TBRS RSCP
    closed form are approximations checked against an absolute tolerance.
    ``corrupt_gbar`` multiplies the analytic engine's transmit SNR: a
    negative control that should fail every point.
    """
    if cfg.sweep is None:
        raise ConfigError("sweep", 0, "required key missing (exactly one sweep axis per run)")
    rows = []
    for v in cfg.sweep.values:
        sc = cfg.scenario_at(v)
        sc_a = sc if corrupt_gbar is None else sc.replace(eta=sc.params.eta * corrupt_gbar)
        for s in cfg.strategies:
            if s not in _ANALYTIC:
                continue
            est = estimate(_plan(cfg, sc, s), threads=cfg.threads)
            checks = []
            if s is StrategyKind.TBRS:
                checks += [("cop", "exact", an.cop_tbrs(sc_a)), ("sop", "exact", an.sop_tbrs(sc_a)),
                           ("rscp", "exact", an.rscp_tbrs(sc_a, "quadrature")),
                           ("rscp", "approx", an.rscp_tbrs(sc_a))]
            else:
                checks += [("cop", "approx", an.cop_jrjs(sc_a)), ("sop", "approx", an.sop_jrjs(sc_a)),
                           ("rscp", "approx", an.rscp_jrjs(sc_a))]
            for metric, kind, value in checks:
                e = est[metric]
                if kind == "exact":
                    # SE under the analytic null keeps the test meaningful when
                    # the MC count is 0 or n.
                    se0 = math.sqrt(max(value * (1.0 - value), 0.0) / e.trials)
                    tol = 3.0 * max(e.std_err, se0)
                else:
                    tol = APPROX_TOLERANCE
                rows.append(ValidationRow(v, s.value, metric, kind, value, e.value, e.std_err, tol))
    return rows


def _run_validate(cfg, out):
    rows = validate(cfg)
    body = [r.as_row() for r in rows]
    if out:
        write_csv(out, VALIDATION_HEADER, body)
    else:
        write_csv(sys.stdout, VALIDATION_HEADER, body)
    failed = [r for r in rows if not r.passed]
    by_kind = {}
    for r in rows:
        ok, tot = by_kind.get(r.kind, (0, 0))
        by_kind[r.kind] = (ok + r.passed, tot + 1)
    summary = ", ".join(f"{k}: {ok}/{tot} pass" for k, (ok, tot) in sorted(by_kind.items()))
    print(f"validation ({cfg.sweep.name} sweep): {summary}", file=sys.stderr if not out else sys.stdout)
    return EXIT_ERROR if failed else EXIT_OK


# --- optimisation -----------------------------------------------------------

def optimize(cfg):
    """Grid search per strategy; returns ``[(strategy, OptimizationResult)]``."""
    template = cfg.scenario_at()
    g = cfg.grids
    results = []
    for s in cfg.strategies:
        res = an.optimize_throughput(
            template, s,
            r0_grid=g.get("r0", [template.pair.r0]),
            kappa_grid=g.get("kappa", [template.pair.rs / template.pair.r0]),
            lam_grid=g.get("lambda"), eta_db_grid=g.get("eta_db"),
            upsilon=cfg.upsilon, delta=cfg.delta, mode=cfg.mode,
        )
        results.append((s, res))
    return results


def _run_optimize(cfg, out):
    results = optimize(cfg)
    header = ["strategy", "feasible", "eta_db", "r0", "kappa", "lambda", "throughput", "evaluated"]
    rows = []
    for s, res in results:
        pt = res.point or {}
        rows.append([s.value, "true" if res.feasible else "false",
                     pt.get("eta_db", math.nan), pt.get("r0", math.nan),
                     pt.get("kappa", math.nan), pt.get("lam", math.nan), res.value, res.evaluated])
    write_csv(out if out else sys.stdout, header, rows)
    for s, res in results:
        msg = f"{s.value}: best throughput {res.value:.6g} at {res.point}" if res.feasible \
            else f"{s.value}: infeasible (no grid point meets the outage constraints)"
        print(msg, file=sys.stderr if not out else sys.stdout)
    return EXIT_OK if all(r.feasible for _, r in results) else EXIT_INFEASIBLE


# --- entry point ------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # Usage errors map to exit 1; 2 is reserved for infeasible optimisation.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="output CSV path (default: standard output)")
    common.add_argument("--trials", type=int, help="Monte-Carlo trials per point")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--threads", type=int, help="worker threads (0 = auto)")
    p = _Parser(prog="relaysec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("analytic", parents=[common], help="closed-form sweep")
    sub.add_parser("simulate", parents=[common], help="Monte-Carlo sweep")
    sub.add_parser("validate", parents=[common], help="analytic versus Monte-Carlo report")
    fig = sub.add_parser("figure", parents=[common], help="reproduce a figure preset")
    fig.add_argument("id", help="fig2 ... fig10")
    sub.add_parser("optimize", parents=[common], help="throughput grid search")
    return p


def _apply_overrides(cfg, args):
    if args.trials is not None:
        cfg = cfg.replace(trials=args.trials)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    if args.threads is not None:
        cfg = cfg.replace(threads=args.threads)
    if cfg.trials < 1 or cfg.threads < 0 or not (0 <= cfg.seed < 2**64):
        raise ConfigError("command line", 0, "trials >= 1, threads >= 0, 64-bit seed required")
    return cfg


def _load(args, require_sweep=True):
    if args.config is None:
        return parse_config("", require_sweep=require_sweep)
    return load_config(args.config, require_sweep=require_sweep)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "figure":
            for v, name in ((args.trials, "trials"), (args.threads, "threads")):
                if v is not None and v < (1 if name == "trials" else 0):
                    raise ConfigError(name, 0, "out of range")
            return run_figure(args.id, args.out, args.trials, args.seed, args.threads)
        if args.command == "optimize":
            return _run_optimize(_apply_overrides(_load(args, False), args), args.out)
        cfg = _apply_overrides(_load(args), args)
        if args.command == "analytic":
            return run_config(cfg.replace(engine="analytic"), args.out)
        if args.command == "simulate":
            return run_config(cfg if cfg.engine == "both" else cfg.replace(engine="mc"), args.out)
        if args.command == "validate":
            return _run_validate(cfg, args.out)
    except (ConfigError, KeyError, ValueError, OSError, ArithmeticError, RuntimeError) as exc:
        print(f"relaysec: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
