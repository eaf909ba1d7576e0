"""Relay/jammer selection rules and per-realisation mutual information.

Selection always runs on the *delayed* second-hop CSI; mutual information is
evaluated on the *current* CSI. Everything is vectorised over the leading
(trial) axis of a :class:`~relaysec.channel.ChannelDraw`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import beamformed_snr, beamformer

__all__ = [
    "StrategyKind",
    "RatePair",
    "InvalidRatePair",
    "InsufficientRelays",
    "SelectionOutcome",
    "rate_thresholds",
    "select_indices",
    "select",
    "af_snr",
    "link_snrs",
    "mutual_info",
    "outage_events",
]


class StrategyKind(enum.Enum):
    TBRS = "tbrs"   # best relay, no jamming
    JRJS = "jrjs"   # best relay + worst relay jams
    OS = "os"       # ratio of delayed R-D to delayed R-E SNR, no jamming
    OSJ = "osj"     # same ratio, with jamming

    @property
    def jams(self):
        return self in (StrategyKind.JRJS, StrategyKind.OSJ)

    @property
    def uses_eavesdropper_csi(self):
        return self in (StrategyKind.OS, StrategyKind.OSJ)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown strategy {value!r}") from None


class InvalidRatePair(ValueError):
    pass


class InsufficientRelays(ValueError):
    pass


@dataclass(frozen=True)
class RatePair:
    """Wyner code rate pair: codeword rate ``r0`` and secrecy rate ``rs``.

    ``rs = 0`` is accepted as the no-secrecy limit.
    """

    r0: float
    rs: float

    def __post_init__(self):
        if not (math.isfinite(self.r0) and math.isfinite(self.rs)):
            raise InvalidRatePair(f"rates must be finite: {self!r}")
        if not (0.0 <= self.rs < self.r0):
            raise InvalidRatePair(f"need 0 <= rs < r0, got r0={self.r0!r}, rs={self.rs!r}")

    @classmethod
    def from_ratio(cls, r0, kappa):
        return cls(r0, kappa * r0)

    @property
    def re(self):
        """Rate redundancy r0 - rs spent on confusing the eavesdropper."""
        return self.r0 - self.rs

    @property
    def gamma_th_d(self):
        return 2.0 ** (2.0 * self.r0) - 1.0

    @property
    def gamma_th_e(self):
        return 2.0 ** (2.0 * (self.r0 - self.rs)) - 1.0


def rate_thresholds(pair):
    return pair.gamma_th_d, pair.gamma_th_e


@dataclass
class SelectionOutcome:
    relay: np.ndarray
    jammer: Optional[np.ndarray]
    strategy: StrategyKind


def select_indices(strategy, snr_rd_delayed, snr_re_delayed=None, mean_re=1.0):
    """Relay (and jammer) indices from delayed per-relay SNRs (last axis).

    TBRS/JRJS rank by delayed R-D SNR over the average R-E SNR, OS/OSJ by the
    delayed R-D / R-E instantaneous ratio. The jammer is the arg-min over the
    remaining relays. Ties go to the lowest index.
    """
    strategy = StrategyKind.parse(strategy)
    rd = np.asarray(snr_rd_delayed, dtype=float)
    k_r = rd.shape[-1]
    if strategy.jams and k_r < 2:
        raise InsufficientRelays(f"{strategy.name} needs at least 2 relays, got {k_r}")
    if strategy.uses_eavesdropper_csi:
        if snr_re_delayed is None:
            raise ValueError(f"{strategy.name} needs delayed R-E CSI")
        with np.errstate(divide="ignore", invalid="ignore"):
            metric = rd / np.asarray(snr_re_delayed, dtype=float)
        metric = np.nan_to_num(metric, nan=0.0, posinf=np.finfo(float).max)
    else:
        metric = rd / mean_re
    relay = np.argmax(metric, axis=-1)
    jammer = None
    if strategy.jams:
        masked = metric.copy()
        np.put_along_axis(masked, relay[..., None], np.inf, axis=-1)
        jammer = np.argmin(masked, axis=-1)
    return SelectionOutcome(relay=relay, jammer=jammer, strategy=strategy)


def select(strategy, draw, params, lam=1.0):
    """Apply a selection rule to a batch of channel draws.

    ``lam`` scales every relay's transmit power equally, so it never changes
    the ranking; it is accepted for signature symmetry with :func:`mutual_info`.
    """
    rd = np.abs(draw.g_rd_delayed) ** 2 * params.eta
    re = np.abs(draw.g_re_delayed) ** 2 * params.eta
    return select_indices(strategy, rd, re, mean_re=params.gbar_re)


def af_snr(first, second):
    """End-to-end SNR of a variable-gain amplify-and-forward hop pair."""
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    return first * second / (first + second + 1.0)


def _mi(snr):
    return 0.5 * np.log2(1.0 + snr)


def link_snrs(outcome, draw, params, lam=1.0, sigma2_se=None):
    """Per-trial SNRs on current CSI for the selected relay (and jammer).

    Returns a dict with ``sr``, ``rd``, ``re`` and, for jamming strategies,
    ``jd`` and ``je``; ``se`` is included when `sigma2_se` is given.
    """
    rows = np.arange(draw.size)
    relay = np.broadcast_to(outcome.relay, (draw.size,))
    p_relay = lam if outcome.strategy.jams else 1.0
    out = {
        "sr": beamformed_snr(draw, relay, params),
        "rd": p_relay * params.eta * np.abs(draw.g_rd_current[rows, relay]) ** 2,
        "re": p_relay * params.eta * np.abs(draw.g_re_current[rows, relay]) ** 2,
    }
    if outcome.strategy.jams:
        jam = np.broadcast_to(outcome.jammer, (draw.size,))
        p_jam = (1.0 - lam) * params.eta
        out["jd"] = p_jam * (params.sigma2_jd / params.sigma2_rd) * np.abs(
            draw.g_rd_current[rows, jam]) ** 2
        out["je"] = p_jam * (params.sigma2_je / params.sigma2_re) * np.abs(
            draw.g_re_current[rows, jam]) ** 2
    if sigma2_se is not None:
        w = beamformer(draw.h_sr_delayed[rows, relay])
        leak = np.abs(np.sum(w * draw.h_se, axis=-1)) ** 2
        out["se"] = params.eta * sigma2_se * leak
    return out


def mutual_info(strategy, outcome, draw, params, lam=1.0, pair=None, with_se_link=False,
                sigma2_se=1.0):
    """(I_D, I_E) in bits/s/Hz for every trial of `draw`.

    With jamming the second-hop SNRs become SINRs gamma / (gamma_J + 1); with
    the S-E link the eavesdropper adds the first-phase leakage SNR to its
    second-phase SNR. `pair` is unused (kept so callers can pass a full
    scenario uniformly).
    """
    strategy = StrategyKind.parse(strategy)
    if outcome.strategy is not strategy:
        raise ValueError("selection outcome does not match strategy")
    s = link_snrs(outcome, draw, params, lam, sigma2_se if with_se_link else None)
    rd, re = s["rd"], s["re"]
    if strategy.jams:
        rd = rd / (s["jd"] + 1.0)
        re = re / (s["je"] + 1.0)
    snr_d = af_snr(s["sr"], rd)
    snr_e = af_snr(s["sr"], re)
    if with_se_link:
        snr_e = snr_e + s["se"]
    return _mi(snr_d), _mi(snr_e)


def outage_events(i_d, i_e, pair):
    """(connection_outage, secrecy_outage, reliable_and_secure), elementwise.

    Strict inequalities throughout: I_D == R0 is neither an outage nor a
    reliable connection.
    """
    i_d = np.asarray(i_d)
    i_e = np.asarray(i_e)
    co = i_d < pair.r0
    so = i_e > pair.re
    rs = (i_d > pair.r0) & (i_e < pair.re)
    if co.ndim == 0:
        return bool(co), bool(so), bool(rs)
    return co, so, rs
