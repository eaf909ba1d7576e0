"""Flat ``key = value`` run configuration.

One pair per line, ``#`` starts a comment. Every run sweeps exactly one
parameter, given either as ``sweep_start``/``sweep_stop``/``sweep_step`` or
as an explicit comma-separated ``sweep_values`` list.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

from .analytic import Scenario
from .channel import CorrelationCoeffs, FadingParams
from .strategies import RatePair, StrategyKind

__all__ = [
    "ConfigError",
    "SweepAxis",
    "RunConfig",
    "parse_config",
    "load_config",
    "SCENARIO_DEFAULTS",
    "SWEEPABLE",
    "grid_values",
]


class ConfigError(ValueError):
    def __init__(self, key, line, message):
        where = f"line {line}" if line else "config"
        super().__init__(f"{where}: {key}: {message}")
        self.key = key
        self.line = line


# Scenario-level parameters and their defaults. Variances default to one,
# jammer gains follow the matching relay gains when left unset.
SCENARIO_DEFAULTS = {
    "eta_db": 10.0,
    "n_t": 3,
    "k_r": 3,
    "sigma2_sr": 1.0,
    "sigma2_rd": 1.0,
    "sigma2_re": 1.0,
    "sigma2_jd": None,
    "sigma2_je": None,
    "fd_td": 0.1,
    "fd_td_sr": None,
    "fd_td_rd": None,
    "rho_sr": None,
    "rho_rd": None,
    "r0": 1.0,
    "rs": None,
    "kappa": 0.125,
    "lambda": 0.75,
}

_INT_KEYS = {"n_t", "k_r", "trials", "seed", "threads"}
_FLOAT_KEYS = {k for k in SCENARIO_DEFAULTS if k not in _INT_KEYS} | {
    "eta", "sigma2_se", "upsilon", "delta", "sweep_start", "sweep_stop", "sweep_step",
}
# "rho" sets both hop correlations at once (delay-coefficient sweeps).
SWEEPABLE = set(SCENARIO_DEFAULTS) | {"eta", "rho"}

ENGINES = ("analytic", "mc", "both")
MODES = ("closed_form", "quadrature")
METRICS = ("cop", "sop", "rscp", "throughput", "rsr", "loss")
GRID_KEYS = ("grid_eta_db", "grid_r0", "grid_kappa", "grid_lambda")

_KNOWN = (set(SCENARIO_DEFAULTS) | _FLOAT_KEYS | _INT_KEYS | set(GRID_KEYS)
          | {"sweep", "sweep_values", "strategies", "metrics", "engine", "mode",
             "with_se_link", "out"})


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ValueError(f"cannot sweep {self.name!r}")
        if not self.values:
            raise ValueError("sweep axis has no values")


@dataclass(frozen=True)
class RunConfig:
    scenario: dict = field(default_factory=lambda: dict(SCENARIO_DEFAULTS))
    sweep: Optional[SweepAxis] = None
    strategies: tuple = (StrategyKind.TBRS, StrategyKind.JRJS)
    metrics: tuple = ("cop", "sop", "rscp", "throughput")
    engine: str = "both"
    mode: str = "closed_form"
    trials: int = 10**6
    seed: int = 42
    threads: int = 1
    with_se_link: bool = False
    sigma2_se: Optional[float] = None
    out: Optional[str] = None
    grids: dict = field(default_factory=dict)
    upsilon: float = 1.0
    delta: float = 1.0

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def with_values(self, **values):
        """Copy with scenario-level parameters overridden."""
        sc = dict(self.scenario)
        for k, v in values.items():
            if k not in sc and k not in ("eta", "rho"):
                raise KeyError(k)
            sc[k] = v
        return dataclasses.replace(self, scenario=sc)

    def scenario_at(self, value=None, **overrides):
        """Scenario for one sweep value (``value`` applies to the sweep axis)."""
        vals = dict(self.scenario)
        if value is not None:
            if self.sweep is None:
                raise ValueError("no sweep axis configured")
            vals[self.sweep.name] = value
        vals.update(overrides)
        return build_scenario(vals)

    @property
    def engines(self):
        return ("analytic", "mc") if self.engine == "both" else (self.engine,)


def build_scenario(vals):
    vals = dict(vals)
    eta_db = vals.pop("eta_db", None)
    eta = vals.pop("eta", None)
    if eta is not None:
        eta_db = 10.0 * math.log10(eta)
    rho = vals.pop("rho", None)
    if rho is not None:
        vals["rho_sr"] = vals["rho_rd"] = rho
    if vals.get("rho_sr") is not None or vals.get("rho_rd") is not None:
        rho_sr = 1.0 if vals.get("rho_sr") is None else vals["rho_sr"]
        rho_rd = 1.0 if vals.get("rho_rd") is None else vals["rho_rd"]
        corr = CorrelationCoeffs(rho_sr, rho_rd)
    else:
        fd = vals.get("fd_td")
        fd_sr = fd if vals.get("fd_td_sr") is None else vals["fd_td_sr"]
        fd_rd = fd if vals.get("fd_td_rd") is None else vals["fd_td_rd"]
        corr = CorrelationCoeffs.from_delay(fd_sr or 0.0, fd_rd or 0.0)
    r0 = vals["r0"]
    pair = RatePair(r0, vals["rs"]) if vals.get("rs") is not None \
        else RatePair.from_ratio(r0, vals["kappa"])
    params = FadingParams.from_db(
        eta_db, n_t=int(vals["n_t"]), k_r=int(vals["k_r"]),
        sigma2_sr=vals["sigma2_sr"], sigma2_rd=vals["sigma2_rd"], sigma2_re=vals["sigma2_re"],
        sigma2_jd=vals.get("sigma2_jd"), sigma2_je=vals.get("sigma2_je"),
    )
    return Scenario(params, corr, pair, vals["lambda"])


def grid_values(start, stop, step):
    if not (step > 0):
        raise ValueError("step must be > 0")
    if stop < start:
        raise ValueError("stop must be >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(n))


def _number(key, text, line):
    try:
        if key in _INT_KEYS:
            v = float(text)
            if v != int(v):
                raise ValueError
            return int(v)
        v = float(text)
    except ValueError:
        raise ConfigError(key, line, f"cannot parse number {text!r}") from None
    if not math.isfinite(v):
        raise ConfigError(key, line, "value must be finite")
    return v


def _number_list(key, text, line):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError(key, line, "empty list")
    if len(parts) == 1 and ":" in parts[0]:
        bits = parts[0].split(":")
        if len(bits) != 3:
            raise ConfigError(key, line, "range must be start:stop:step")
        a, b, s = (_number("sweep_start", x, line) for x in bits)
        try:
            return grid_values(a, b, s)
        except ValueError as exc:
            raise ConfigError(key, line, str(exc)) from None
    return tuple(_number("sweep_start", p, line) for p in parts)


def _bool(key, text, line):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, line, f"expected a boolean, got {text!r}")


def parse_config(text, require_sweep=True):
    """Parse and validate configuration text into a :class:`RunConfig`.

    Raises :class:`ConfigError` naming the offending key and line.
    """
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, lineno, "expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KNOWN:
            raise ConfigError(key, lineno, "unknown key")
        if key in seen:
            raise ConfigError(key, lineno, f"duplicate key (first set on line {seen[key][1]})")
        seen[key] = (value, lineno)

    def get(key):
        return seen[key] if key in seen else (None, 0)

    sc = dict(SCENARIO_DEFAULTS)
    opts = {}
    for key, (value, line) in seen.items():
        if key in SCENARIO_DEFAULTS or key == "eta":
            sc[key] = _number(key, value, line)
        elif key == "sigma2_se":
            opts[key] = _number(key, value, line)
        elif key in ("trials", "seed", "threads", "upsilon", "delta"):
            opts[key] = _number(key, value, line)

    if "eta" in seen:
        if "eta_db" in seen:
            raise ConfigError("eta", seen["eta"][1], "give eta or eta_db, not both")
        if sc["eta"] <= 0:
            raise ConfigError("eta", seen["eta"][1], "must be > 0")
        sc["eta_db"] = 10.0 * math.log10(sc.pop("eta"))
    if "rs" in seen and "kappa" in seen:
        raise ConfigError("rs", seen["rs"][1], "give rs or kappa, not both")
    if "rs" in seen:
        sc["kappa"] = None
    rho_keys = [k for k in ("rho_sr", "rho_rd") if k in seen]
    fd_keys = [k for k in ("fd_td", "fd_td_sr", "fd_td_rd") if k in seen]
    if rho_keys and fd_keys:
        raise ConfigError(rho_keys[0], seen[rho_keys[0]][1],
                          "give correlation coefficients or normalised delays, not both")

    sweep = None
    name, line = get("sweep")
    if name is None:
        if require_sweep:
            raise ConfigError("sweep", 0, "required key missing (exactly one sweep axis per run)")
    else:
        if name not in SWEEPABLE:
            raise ConfigError("sweep", line, f"cannot sweep {name!r}")
        has_range = [k for k in ("sweep_start", "sweep_stop", "sweep_step") if k in seen]
        if "sweep_values" in seen:
            if has_range:
                raise ConfigError(has_range[0], seen[has_range[0]][1],
                                  "give sweep_values or a start/stop/step range, not both")
            values = _number_list("sweep_values", *seen["sweep_values"])
        else:
            for k in ("sweep_start", "sweep_stop", "sweep_step"):
                if k not in seen:
                    raise ConfigError(k, 0, "required key missing for the sweep range")
            a, b, s = (_number(k, *seen[k]) for k in ("sweep_start", "sweep_stop", "sweep_step"))
            if not s > 0:
                raise ConfigError("sweep_step", seen["sweep_step"][1], "step must be > 0")
            if b < a:
                raise ConfigError("sweep_stop", seen["sweep_stop"][1], "stop must be >= start")
            values = grid_values(a, b, s)
        sweep = SweepAxis(name, values)

    strategies = RunConfig.strategies
    if "strategies" in seen:
        value, line = seen["strategies"]
        try:
            strategies = tuple(StrategyKind.parse(s.strip()) for s in value.split(",") if s.strip())
        except ValueError as exc:
            raise ConfigError("strategies", line, str(exc)) from None
        if not strategies:
            raise ConfigError("strategies", line, "empty list")
    metrics = RunConfig.metrics
    if "metrics" in seen:
        value, line = seen["metrics"]
        metrics = tuple(m.strip() for m in value.split(",") if m.strip())
        bad = [m for m in metrics if m not in METRICS]
        if bad or not metrics:
            raise ConfigError("metrics", line, f"unknown metric(s) {bad}; choose from {METRICS}")
    engine, line = get("engine")
    engine = engine or "both"
    if engine not in ENGINES:
        raise ConfigError("engine", line, f"expected one of {ENGINES}")
    mode, line = get("mode")
    mode = mode or "closed_form"
    if mode not in MODES:
        raise ConfigError("mode", line, f"expected one of {MODES}")
    with_se = False
    if "with_se_link" in seen:
        with_se = _bool("with_se_link", *seen["with_se_link"])
    sigma2_se = opts.get("sigma2_se")
    if with_se and sigma2_se is None:
        sigma2_se = 1.0
    if not with_se and sigma2_se is not None:
        raise ConfigError("sigma2_se", seen["sigma2_se"][1], "only meaningful with with_se_link = true")

    grids = {}
    for key in GRID_KEYS:
        if key in seen:
            grids[key[5:]] = _number_list(key, *seen[key])

    cfg = RunConfig(
        scenario=sc, sweep=sweep, strategies=strategies, metrics=metrics, engine=engine,
        mode=mode, trials=opts.get("trials", 10**6), seed=opts.get("seed", 42),
        threads=opts.get("threads", 1), with_se_link=with_se, sigma2_se=sigma2_se,
        out=seen.get("out", (None,))[0], grids=grids,
        upsilon=opts.get("upsilon", 1.0), delta=opts.get("delta", 1.0),
    )
    _validate(cfg, seen)
    return cfg


# Single-key ranges, checked before any scenario is built so a bad fixed
# value is reported against its own line rather than the sweep axis.
_RANGES = {
    "n_t": (lambda v: v >= 1, "must be >= 1"),
    "k_r": (lambda v: v >= 1, "must be >= 1"),
    "lambda": (lambda v: 0.0 < v <= 1.0, "must lie in (0, 1]"),
    "r0": (lambda v: v > 0.0, "must be > 0"),
    "rs": (lambda v: v >= 0.0, "must be >= 0"),
    "kappa": (lambda v: 0.0 <= v < 1.0, "must lie in [0, 1)"),
    "rho_sr": (lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]"),
    "rho_rd": (lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]"),
    "fd_td": (lambda v: v >= 0.0, "must be >= 0"),
    "fd_td_sr": (lambda v: v >= 0.0, "must be >= 0"),
    "fd_td_rd": (lambda v: v >= 0.0, "must be >= 0"),
}
for _k in ("sigma2_sr", "sigma2_rd", "sigma2_re", "sigma2_jd", "sigma2_je", "sigma2_se"):
    _RANGES[_k] = (lambda v: v > 0.0, "must be > 0")


def _validate(cfg, seen):
    def fail(key, message):
        raise ConfigError(key, seen.get(key, (None, 0))[1], message)

    for key, (ok, message) in _RANGES.items():
        if key in seen and not ok(_number(key, *seen[key])):
            fail(key, message)

    if cfg.trials < 1:
        fail("trials", "must be >= 1")
    if not (0 <= cfg.seed < 2**64):
        fail("seed", "must fit in 64 bits")
    if cfg.threads < 0:
        fail("threads", "must be >= 0 (0 = auto)")
    for key in ("upsilon", "delta"):
        if not (0.0 <= getattr(cfg, key) <= 1.0):
            fail(key, "must lie in [0, 1]")
    # Build the scenario at every sweep point so bad values are caught here.
    values = cfg.sweep.values if cfg.sweep else (None,)
    for v in values:
        try:
            cfg.scenario_at(v)
        except (ValueError, TypeError) as exc:
            key = cfg.sweep.name if (cfg.sweep and v is not None) else _guess_key(str(exc), seen)
            fail(key, str(exc) if v is None else f"sweep value {v!r}: {exc}")


def _guess_key(message, seen):
    for key in seen:
        if key in message:
            return key
    return "scenario"


def load_config(path, require_sweep=True):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), require_sweep=require_sweep)
