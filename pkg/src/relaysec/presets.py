"""Frozen parameter blocks reproducing the published figures.

Each preset is a list of series; a series is a sweep over one axis (plus, for
the surface figures, an outer axis emitted in long format). Parameters stated
in a figure caption are copied verbatim; axis grids are conservative choices
read off the plotted ranges.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

from .config import SCENARIO_DEFAULTS, RunConfig, SweepAxis, grid_values
from .strategies import StrategyKind

__all__ = ["Series", "FigurePreset", "FIGURES", "preset_block", "preset_checksum", "get_preset"]

_T, _J, _OS, _OSJ = (StrategyKind.TBRS, StrategyKind.JRJS, StrategyKind.OS, StrategyKind.OSJ)

ETA_GRID = grid_values(0.0, 30.0, 1.0)


@dataclass(frozen=True)
class Series:
    label: str
    values: dict
    axis: str
    grid: tuple
    outer_axis: Optional[str] = None
    outer_grid: tuple = ()
    with_se_link: bool = False


@dataclass(frozen=True)
class FigurePreset:
    id: str
    title: str
    strategies: tuple
    metrics: tuple
    series: tuple
    engine: str = "both"

    def configs(self, trials=None, seed=None, threads=None):
        """One :class:`RunConfig` per series, in series order."""
        out = []
        for s in self.series:
            sc = dict(SCENARIO_DEFAULTS)
            sc.update(s.values)
            if "rs" in s.values:
                sc["kappa"] = None
            if any(k in s.values for k in ("rho_sr", "rho_rd")) or s.axis in ("rho", "rho_sr", "rho_rd"):
                sc["fd_td"] = None
            cfg = RunConfig(
                scenario=sc, sweep=SweepAxis(s.axis, s.grid), strategies=self.strategies,
                metrics=self.metrics, engine=self.engine,
                with_se_link=s.with_se_link, sigma2_se=1.0 if s.with_se_link else None,
            )
            if trials is not None:
                cfg = cfg.replace(trials=trials)
            if seed is not None:
                cfg = cfg.replace(seed=seed)
            if threads is not None:
                cfg = cfg.replace(threads=threads)
            out.append((s, cfg))
        return out


def _fig2():
    common = {"n_t": 3, "k_r": 3, "fd_td": 0.1, "lambda": 0.1}
    return FigurePreset(
        "fig2", "COP and SOP versus transmit SNR", (_T, _J), ("cop", "sop"),
        (Series("r0-1_rs-0.125", dict(common, r0=1.0, rs=0.125), "eta_db", ETA_GRID),
         Series("r0-1.5_rs-0.1875", dict(common, r0=1.5, rs=0.1875), "eta_db", ETA_GRID)),
    )


def _fig3():
    # Trade-off curve traced by the codeword rate at a fixed SNR.
    grid = grid_values(0.25, 3.0, 0.25)
    common = {"n_t": 3, "k_r": 3, "kappa": 0.125, "lambda": 0.1, "eta_db": 10.0}
    return FigurePreset(
        "fig3", "SOP versus COP for different feedback delays", (_T, _J), ("cop", "sop"),
        tuple(Series(f"fd_td-{fd:g}", dict(common, fd_td=fd), "r0", grid)
              for fd in (0.0, 0.1, 0.2)),
    )


def _fig4():
    common = {"n_t": 3, "fd_td": 0.1}
    return FigurePreset(
        "fig4", "TBRS RSCP versus transmit SNR", (_T,), ("rscp",),
        (Series("r0-1_rs-0.125_k3", dict(common, k_r=3, r0=1.0, rs=0.125), "eta_db", ETA_GRID),
         Series("r0-1.5_rs-0.1875_k3", dict(common, k_r=3, r0=1.5, rs=0.1875), "eta_db", ETA_GRID),
         Series("r0-1_rs-0.125_k5", dict(common, k_r=5, r0=1.0, rs=0.125), "eta_db", ETA_GRID),
         Series("r0-1_rs-0.125_k3_perfect", dict(common, k_r=3, r0=1.0, rs=0.125, fd_td=0.0),
                "eta_db", ETA_GRID)),
    )


def _fig5():
    common = {"n_t": 3, "k_r": 3, "fd_td": 0.1, "r0": 1.0, "kappa": 0.125}
    return FigurePreset(
        "fig5", "JRJS RSCP versus transmit SNR for several power splits", (_T, _J), ("rscp",),
        tuple(Series(f"lambda-{lam:g}", dict(common, **{"lambda": lam}), "eta_db", ETA_GRID)
              for lam in (0.25, 0.5, 0.75, 0.9)),
    )


def _fig6():
    rho_grid = grid_values(0.5, 1.0, 0.05)
    lam_grid = grid_values(0.05, 0.95, 0.05)
    left = {"n_t": 3, "k_r": 3, "r0": 1.0, "kappa": 0.125, "lambda": 0.75}
    right = {"n_t": 3, "k_r": 3, "r0": 1.0, "kappa": 0.125, "rho_sr": 0.9, "rho_rd": 0.9}
    return FigurePreset(
        "fig6", "RSR versus delay coefficient and power split", (_T, _J), ("rsr",),
        (Series("vs-rho_sr", dict(left, rho_rd=0.9), "rho_sr", rho_grid),
         Series("vs-rho_rd", dict(left, rho_sr=0.9), "rho_rd", rho_grid),
         Series("vs-lambda", right, "lambda", lam_grid)),
        engine="analytic",
    )


def _fig7():
    rho_grid = grid_values(0.5, 1.0, 0.05)
    common = {"n_t": 3, "k_r": 3, "r0": 1.0, "kappa": 0.125, "lambda": 0.75, "eta_db": 10.0}
    return FigurePreset(
        "fig7", "Secrecy throughput loss versus delay coefficients", (_T, _J), ("loss",),
        (Series("both-hops", common, "rho", rho_grid),
         Series("first-hop", dict(common, rho_rd=1.0), "rho_sr", rho_grid),
         Series("second-hop", dict(common, rho_sr=1.0), "rho_rd", rho_grid)),
    )


def _fig8():
    return FigurePreset(
        "fig8", "Secrecy throughput versus R0 and kappa", (_T, _J), ("throughput",),
        (Series("surface", {"n_t": 3, "k_r": 3, "fd_td": 0.1, "eta_db": 15.0, "lambda": 0.75},
                "r0", grid_values(0.25, 4.0, 0.25),
                outer_axis="kappa", outer_grid=grid_values(0.05, 0.95, 0.05)),),
    )


def _fig9():
    return FigurePreset(
        "fig9", "JRJS secrecy throughput versus R0 and lambda", (_J,), ("throughput",),
        (Series("surface", {"n_t": 3, "k_r": 3, "fd_td": 0.1, "eta_db": 15.0, "kappa": 0.125},
                "r0", grid_values(0.25, 4.0, 0.25),
                outer_axis="lambda", outer_grid=grid_values(0.05, 0.95, 0.05)),),
    )


def _fig10():
    common = {"n_t": 3, "k_r": 3, "r0": 1.0, "kappa": 0.125, "fd_td": 0.1, "lambda": 0.75}
    grid = grid_values(0.0, 40.0, 2.0)
    return FigurePreset(
        "fig10", "Selection strategies with and without the S-E link", (_T, _J, _OS, _OSJ),
        ("throughput",),
        (Series("no-se-link", common, "eta_db", grid),
         Series("se-link", common, "eta_db", grid, with_se_link=True)),
        engine="mc",
    )


FIGURES = {p.id: p for p in (_fig2(), _fig3(), _fig4(), _fig5(), _fig6(), _fig7(),
                             _fig8(), _fig9(), _fig10())}


def get_preset(fig_id):
    try:
        return FIGURES[fig_id]
    except KeyError:
        raise KeyError(f"unknown figure {fig_id!r}; choose from {sorted(FIGURES)}") from None


def preset_block(preset):
    """Canonical JSON-able description of a preset's parameters."""
    return {
        "id": preset.id,
        "strategies": [s.value for s in preset.strategies],
        "metrics": list(preset.metrics),
        "engine": preset.engine,
        "series": [
            {"label": s.label, "values": dict(sorted(s.values.items())), "axis": s.axis,
             "grid": list(s.grid), "outer_axis": s.outer_axis, "outer_grid": list(s.outer_grid),
             "with_se_link": s.with_se_link}
            for s in preset.series
        ],
    }


def preset_checksum(preset):
    text = json.dumps(preset_block(preset), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
