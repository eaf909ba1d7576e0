"""Monte-Carlo engine: empirical COP, SOP, RSCP and throughput.

Random numbers come from a counter-based generator (Philox 4x64) keyed by the
master seed. Trial ``i`` always consumes the same block of uniforms, starting
at counter ``i * uniforms_per_trial / 4``, so estimates do not depend on how
trials are chunked or how many worker threads run them.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic import Scenario
from .channel import channels_from_uniforms, uniforms_per_trial
from .strategies import StrategyKind, mutual_info, outage_events, select

__all__ = [
    "InvalidPlan",
    "TrialPlan",
    "MetricEstimate",
    "trial_uniforms",
    "run_trial",
    "count_events",
    "estimate",
    "CampaignEntry",
    "run_campaign",
]

DEFAULT_CHUNK = 65536


class InvalidPlan(ValueError):
    pass


@dataclass(frozen=True)
class TrialPlan:
    scenario: Scenario
    strategy: StrategyKind
    trials: int = 10**6
    master_seed: int = 42
    with_se_link: bool = False
    sigma2_se: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "strategy", StrategyKind.parse(self.strategy))
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidPlan(f"trials must be a positive integer, got {self.trials!r}")
        if not (0 <= int(self.master_seed) < 2**64):
            raise InvalidPlan("master_seed must fit in 64 bits")
        if self.with_se_link:
            if self.sigma2_se is None:
                raise InvalidPlan("sigma2_se is required when the S-E link is enabled")
            if not (self.sigma2_se > 0 and math.isfinite(self.sigma2_se)):
                raise InvalidPlan("sigma2_se must be positive and finite")
        elif self.sigma2_se is not None:
            raise InvalidPlan("sigma2_se given but the S-E link is disabled")
        if self.strategy.jams and self.scenario.params.k_r < 2:
            raise InvalidPlan(f"{self.strategy.name} needs at least 2 relays")

    @property
    def uniforms_per_trial(self):
        p = self.scenario.params
        return uniforms_per_trial(p.n_t, p.k_r)


@dataclass(frozen=True)
class MetricEstimate:
    value: float
    std_err: float
    trials: int

    @classmethod
    def from_count(cls, hits, trials, scale=1.0):
        p = hits / trials
        return cls(scale * p, scale * math.sqrt(p * (1.0 - p) / trials), trials)


def trial_uniforms(plan, start, count):
    """The (count, D) block of uniforms for trials start .. start + count - 1."""
    d = plan.uniforms_per_trial
    bitgen = np.random.Philox(key=int(plan.master_seed), counter=start * d // 4)
    return np.random.Generator(bitgen).random((count, d))


def _events(plan, start, count):
    sc = plan.scenario
    draw = channels_from_uniforms(sc.params, sc.corr, trial_uniforms(plan, start, count))
    outcome = select(plan.strategy, draw, sc.params, sc.lam)
    i_d, i_e = mutual_info(plan.strategy, outcome, draw, sc.params, sc.lam,
                           with_se_link=plan.with_se_link, sigma2_se=plan.sigma2_se)
    co, so, rs = outage_events(i_d, i_e, sc.pair)
    return co, so, rs, i_d, i_e


def run_trial(plan, trial_index):
    """(connection_outage, secrecy_outage, reliable_and_secure, i_d, i_e) of one trial."""
    if not (0 <= trial_index < plan.trials):
        raise IndexError(f"trial_index {trial_index} outside [0, {plan.trials})")
    co, so, rs, i_d, i_e = _events(plan, int(trial_index), 1)
    return bool(co[0]), bool(so[0]), bool(rs[0]), float(i_d[0]), float(i_e[0])


def count_events(plan, start, count):
    """Integer (co, so, rs) counts over a contiguous trial range."""
    co, so, rs, _, _ = _events(plan, start, count)
    return int(np.count_nonzero(co)), int(np.count_nonzero(so)), int(np.count_nonzero(rs))


def _resolve_threads(threads):
    if threads is None or threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise ValueError("threads must be >= 0")
    return int(threads)


def estimate(plan, threads=1, chunk=DEFAULT_CHUNK):
    """Empirical COP/SOP/RSCP/throughput with binomial standard errors."""
    if not isinstance(plan, TrialPlan):
        raise InvalidPlan("estimate expects a TrialPlan")
    ranges = [(s, min(chunk, plan.trials - s)) for s in range(0, plan.trials, chunk)]
    workers = min(_resolve_threads(threads), len(ranges))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda r: count_events(plan, *r), ranges))
    else:
        parts = [count_events(plan, *r) for r in ranges]
    co, so, rs = (sum(col) for col in zip(*parts))
    n = plan.trials
    return {
        "cop": MetricEstimate.from_count(co, n),
        "sop": MetricEstimate.from_count(so, n),
        "rscp": MetricEstimate.from_count(rs, n),
        "throughput": MetricEstimate.from_count(rs, n, scale=plan.scenario.pair.rs),
    }


@dataclass
class CampaignEntry:
    plan: TrialPlan
    result: Optional[dict] = None
    error: Optional[BaseException] = field(default=None, repr=False)

    @property
    def ok(self):
        return self.error is None


def run_campaign(plans, threads=1, chunk=DEFAULT_CHUNK):
    """Estimate every plan; a failing plan records its error and the rest still run."""
    plans = list(plans)
    if not plans:
        raise InvalidPlan("campaign needs at least one plan")
    out = []
    for plan in plans:
        try:
            out.append(CampaignEntry(plan, estimate(plan, threads=threads, chunk=chunk)))
        except Exception as exc:  # reported per plan, by design
            out.append(CampaignEntry(plan, error=exc))
    return out
