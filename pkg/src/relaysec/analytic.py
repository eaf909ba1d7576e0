"""Closed-form, approximate and asymptotic secrecy metrics.

Covers the two selection strategies with analytic treatment:

* TBRS -- best relay, no jamming. COP/SOP closed forms are exact; the RSCP
  closed form is an approximation and has a quadrature twin.
* JRJS -- best relay forwards with power lam*P, the worst relay jams with
  (1 - lam)*P. COP/SOP/RSCP rest on an independence assumption plus a
  noise-absorption step; each has a quadrature twin that keeps only the
  independence assumption.

Wherever an approximation is made the function takes ``mode`` so the gap to
the unapproximated integral can be measured instead of assumed.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special

from . import channel as ch
from .channel import CorrelationCoeffs, FadingParams, neumaier_sum, omega, selection_weights
from .specfun import (
    DEFAULT_QUADRATURE,
    QuadratureSettings,
    semi_infinite_quad,
    upper_gamma_scaled,
    upsilon_integral,
)
from .strategies import InsufficientRelays, InvalidRatePair, RatePair, StrategyKind

__all__ = [
    "Scenario",
    "MetricBundle",
    "ProbabilityClipWarning",
    "cdf_gamma_d_tbrs",
    "cop_tbrs",
    "sop_tbrs",
    "rscp_tbrs",
    "throughput_asymptotic_tbrs",
    "asymptotic_cdfs",
    "rsr_tbrs",
    "cop_jrjs",
    "sop_jrjs",
    "rsr_jrjs",
    "rscp_jrjs",
    "rscp_jrjs_asymptotic",
    "jrjs_outage_floors",
    "lambda_subopt",
    "cop",
    "sop",
    "rscp",
    "metrics",
    "effective_throughput",
    "throughput_loss",
    "OptimizationResult",
    "optimize_throughput",
]

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"


class ProbabilityClipWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Scenario:
    params: FadingParams
    corr: CorrelationCoeffs
    pair: RatePair
    lam: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.lam <= 1.0):
            raise ValueError(f"power sharing ratio must lie in (0, 1], got {self.lam!r}")

    @classmethod
    def build(cls, eta_db, r0=1.0, rs=None, kappa=None, lam=1.0, n_t=3, k_r=3,
              fd_td=None, rho_sr=None, rho_rd=None, **variances):
        """Convenience constructor in the units the figures use.

        Give either ``fd_td`` (applied to both hops) or explicit ``rho_sr`` /
        ``rho_rd``; give either ``rs`` or ``kappa = rs / r0``.
        """
        if rs is None:
            rs = (1.0 / 8.0 if kappa is None else kappa) * r0
        if fd_td is not None:
            corr = CorrelationCoeffs.from_delay(fd_td)
        else:
            corr = CorrelationCoeffs(
                1.0 if rho_sr is None else rho_sr, 1.0 if rho_rd is None else rho_rd)
        params = FadingParams.from_db(eta_db, n_t=n_t, k_r=k_r, **variances)
        return cls(params, corr, RatePair(r0, rs), lam)

    def replace(self, **changes):
        """Copy with top-level fields and/or FadingParams fields replaced.

        ``eta_db`` is accepted as a shorthand for ``eta``.
        """
        top = {k: changes.pop(k) for k in ("corr", "pair", "lam") if k in changes}
        if "eta_db" in changes:
            changes["eta"] = 10.0 ** (changes.pop("eta_db") / 10.0)
        params = self.params
        if changes:
            params = dataclasses.replace(params, **changes)
        return dataclasses.replace(self, params=params, **top)

    @property
    def jrjs_lam(self):
        if not (0.0 < self.lam < 1.0):
            raise ValueError(f"jamming needs 0 < lam < 1, got {self.lam!r}")
        if self.params.k_r < 2:
            raise InsufficientRelays("jamming needs at least 2 relays")
        return self.lam


@dataclass(frozen=True)
class MetricBundle:
    cop: float
    sop: float
    rscp: float
    rsr: float
    throughput: float


def _clip_prob(p, what="probability"):
    arr = np.asarray(p, dtype=float)
    if np.any(arr < -1e-9) or np.any(arr > 1.0 + 1e-9):
        warnings.warn(f"{what} left [0, 1] by more than 1e-9 ({arr}); clipped",
                      ProbabilityClipWarning, stacklevel=3)
    out = np.clip(arr, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _sr_terms(n_t, rho_sr):
    """(n, m, weight) for the expansion of f_SR(z + x): the binomial mixture
    weight of Gamma(N_t - n) times C(N_t - 1 - n, m) / (N_t - 1 - n)!."""
    for n, wgt in ch._sr_mixture(n_t, rho_sr):
        if wgt == 0.0:
            continue
        p = n_t - 1 - n
        for m in range(p + 1):
            yield n, m, wgt * math.comb(p, m) / math.factorial(p)


# --- TBRS -------------------------------------------------------------------

def _af_survival_closed(x, gbar_sr, second_hop, n_t, rho_sr):
    """P(gamma_SR gamma_2 / (gamma_SR + gamma_2 + 1) > x) for gamma_2 an
    exponential mixture sum_j c_j Exp(mean_j); closed form via K_{m+1}."""
    x = float(x)
    if x <= 0.0:
        return 1.0
    g = gbar_sr
    terms = []
    for n, m, w in _sr_terms(n_t, rho_sr):
        for c, mean in second_hop:
            beta = x * (x + 1.0) / mean
            z = 2.0 * math.sqrt(beta / g)
            log_mag = (math.log(w * abs(c)) + (n_t - 1 - n - m) * math.log(x)
                       - (n_t - n) * math.log(g) + 0.5 * (m + 1) * math.log(g * beta)
                       - x / g - x / mean + math.log(special.kve(m + 1, z)) - z)
            terms.append(math.copysign(2.0 * math.exp(log_mag), c))
    return math.fsum(terms)


def _rd_mixture(k_r, rho_rd, gbar):
    return [(c, omega(k, rho_rd) * gbar) for k, c in enumerate(selection_weights(k_r))]


def cdf_gamma_d_tbrs(x, sc):
    """CDF of the TBRS end-to-end destination SNR."""
    p = sc.params
    sf = _af_survival_closed(x, p.gbar_sr, _rd_mixture(p.k_r, sc.corr.rho_rd, p.gbar_rd),
                             p.n_t, sc.corr.rho_sr)
    return 1.0 - sf


def _af_cdf_quad(x, second_sf, sc, settings):
    """1 - int_0^inf S_2(x + x(x+1)/z) f_SR(z + x) dz."""
    x = float(x)
    if x <= 0.0:
        return 0.0

    def integrand(z):
        return second_sf(x + x * (x + 1.0) / z) * ch.pdf_gamma_sr(z + x, sc.params, sc.corr)

    return 1.0 - semi_infinite_quad(integrand, settings)


def cop_tbrs(sc, mode=CLOSED_FORM, settings=DEFAULT_QUADRATURE):
    """Connection outage probability of TBRS at gamma_th^D (exact)."""
    x = sc.pair.gamma_th_d
    if mode == CLOSED_FORM:
        return _clip_prob(cdf_gamma_d_tbrs(x, sc), "cop_tbrs")
    p = sc.params

    def sf(y):
        return 1.0 - ch.cdf_gamma_rstar_d(y, p, sc.corr)

    return _clip_prob(_af_cdf_quad(x, sf, sc, settings), "cop_tbrs")


def sop_tbrs(sc, mode=CLOSED_FORM, settings=DEFAULT_QUADRATURE):
    """Secrecy outage probability of TBRS at gamma_th^E (exact)."""
    x = sc.pair.gamma_th_e
    p = sc.params
    if mode == CLOSED_FORM:
        sf = _af_survival_closed(x, p.gbar_sr, [(1.0, p.gbar_re)], p.n_t, sc.corr.rho_sr)
        return _clip_prob(sf, "sop_tbrs")
    cdf = _af_cdf_quad(x, lambda y: np.exp(-y / p.gbar_re), sc, settings)
    return _clip_prob(1.0 - cdf, "sop_tbrs")


def rscp_tbrs(sc, mode=CLOSED_FORM, settings=DEFAULT_QUADRATURE):
    """Reliable-and-secure connection probability of TBRS.

    ``closed_form`` is the Bessel-K approximation; ``quadrature`` integrates
    the exact joint event over gamma_SR.
    """
    p, corr = sc.params, sc.corr
    td, te = sc.pair.gamma_th_d, sc.pair.gamma_th_e
    if mode == QUADRATURE:
        def integrand(z):
            x = z + td
            sf_rd = 1.0 - ch.cdf_gamma_rstar_d(td + td * (td + 1.0) / z, p, corr)
            cdf_re = 1.0 - np.exp(-(te + te * (te + 1.0) / (x - te)) / p.gbar_re)
            return sf_rd * cdf_re * ch.pdf_gamma_sr(x, p, corr)

        return _clip_prob(semi_infinite_quad(integrand, settings), "rscp_tbrs")
    if mode != CLOSED_FORM:
        raise ValueError(f"unknown mode {mode!r}")

    g = p.gbar_sr
    extra = te * (te + 1.0) / (p.gbar_re + td - te)
    terms = []
    for n, m, w in _sr_terms(p.n_t, corr.rho_sr):
        for c, mean in _rd_mixture(p.k_r, corr.rho_rd, p.gbar_rd):
            a = td * (td + 1.0) / mean
            b = a + extra
            pref = (2.0 * w * c * td ** (p.n_t - 1 - n - m)
                    / g ** (p.n_t - n - 0.5 * (m + 1)))
            za, zb = 2.0 * math.sqrt(a / g), 2.0 * math.sqrt(b / g)
            base = -td / g - td / mean
            first = math.exp(base + 0.5 * (m + 1) * math.log(a) - za) * special.kve(m + 1, za)
            second = math.exp(base - te / p.gbar_re + 0.5 * (m + 1) * math.log(b) - zb) \
                * special.kve(m + 1, zb)
            terms.append(pref * first)
            terms.append(-pref * second)
    return _clip_prob(math.fsum(terms), "rscp_tbrs")


def _d_slope(sc):
    p, corr = sc.params, sc.corr
    s = math.fsum(
        (-1) ** k * math.comb(p.k_r - 1, k) * p.k_r / (k * (1.0 - corr.rho_rd**2) + 1.0)
        for k in range(p.k_r)
    )
    return (1.0 - corr.rho_sr**2) ** (p.n_t - 1) / p.sigma2_sr + s / p.sigma2_rd


def asymptotic_cdfs(sc):
    """High-SNR first-order COP and 1 - SOP of TBRS (both O(1/eta))."""
    p, corr = sc.params, sc.corr
    sr = (1.0 - corr.rho_sr**2) ** (p.n_t - 1) / p.sigma2_sr
    cop_inf = _d_slope(sc) * sc.pair.gamma_th_d / p.eta
    one_minus_sop_inf = (sr + 1.0 / p.sigma2_re) * sc.pair.gamma_th_e / p.eta
    return cop_inf, one_minus_sop_inf


def rsr_tbrs(sc):
    """Reliability-security ratio lim COP / (1 - SOP) for TBRS (eta-free)."""
    if sc.pair.gamma_th_e <= 0.0:
        raise InvalidRatePair("RSR undefined for a zero eavesdropper threshold")
    # eta cancels; evaluating at eta = 1 keeps the output bit-identical across SNRs.
    cop_inf, one_minus = asymptotic_cdfs(sc.replace(eta=1.0))
    return cop_inf / one_minus


def throughput_asymptotic_tbrs(sc):
    """High-SNR effective secrecy throughput of TBRS.

    Reliable-and-secure needs the R*-E SNR to be small (a vanishing first
    hop already breaks the connection), so to leading order
    rs * (1 - COP_inf) * gamma_th^E / (sigma2_re * eta).
    """
    p = sc.params
    cop_inf, _ = asymptotic_cdfs(sc)
    val = sc.pair.rs * (1.0 - cop_inf) * sc.pair.gamma_th_e / (p.sigma2_re * p.eta)
    return max(val, 0.0)


# --- JRJS -------------------------------------------------------------------

def cop_jrjs(sc, mode=CLOSED_FORM, settings=DEFAULT_QUADRATURE):
    """Connection outage probability of JRJS.

    ``closed_form``: the relay SINR's jammer-plus-noise term is replaced by an
    exponential of matched mean, giving incomplete-gamma terms.
    ``quadrature``: exact second-hop SINR law via the Upsilon integral.
    """
    lam = sc.jrjs_lam
    p, corr = sc.params, sc.corr
    x = sc.pair.gamma_th_d
    g = p.gbar_sr
    weights = selection_weights(p.k_r)
    if mode == CLOSED_FORM:
        phis = ch.phi_k(p, corr, lam, hat=True)
        terms = []
        for n, m, w in _sr_terms(p.n_t, corr.rho_sr):
            for k, c in enumerate(weights):
                ph = phis[k]
                theta = x * (x + 1.0) / (x + ph)
                log_mag = (math.log(w * abs(c)) - (p.n_t - n) * math.log(g)
                           + math.lgamma(m + 2) + math.log(ph) + (p.n_t - n) * math.log(x)
                           + (m + 1) * math.log(x + 1.0) - (m + 2) * math.log(x + ph) - x / g)
                terms.append(math.copysign(math.exp(log_mag), c)
                             * upper_gamma_scaled(-m - 1, theta / g))
        return _clip_prob(1.0 - math.fsum(terms), "cop_jrjs")
    if mode != QUADRATURE:
        raise ValueError(f"unknown mode {mode!r}")
    phis = ch.phi_k(p, corr, lam)
    g_rd = lam * p.gbar_rd
    terms = []
    for n, m, w in _sr_terms(p.n_t, corr.rho_sr):
        for k, c in enumerate(weights):
            ph = phis[k]
            mean = omega(k, corr.rho_rd) * g_rd
            theta = x * (x + 1.0) / (x + ph)
            ups = upsilon_integral(m + 1, theta, 1.0 / g, x * (x + 1.0) / mean, settings)
            terms.append(w * c * x ** (p.n_t - 1 - n - m) / g ** (p.n_t - n)
                         * math.exp(-x / g - x / mean) * ph / (x + ph) * ups)
    return _clip_prob(1.0 - math.fsum(terms), "cop_jrjs")


def sop_jrjs(sc, mode=CLOSED_FORM, settings=DEFAULT_QUADRATURE):
    """Secrecy outage probability of JRJS.

    ``closed_form`` uses the bound gamma_E >= min(gamma_SR, xi_E) / 2, hence
    both CDFs are evaluated at twice the threshold. ``quadrature`` is exact.
    """
    lam = sc.jrjs_lam
    p = sc.params
    x = sc.pair.gamma_th_e
    if mode == CLOSED_FORM:
        sf_sr = 1.0 - ch.cdf_gamma_sr(2.0 * x, p, sc.corr)
        sf_xi = 1.0 - ch.cdf_xi_e(2.0 * x, p, lam)
        return _clip_prob(sf_sr * sf_xi, "sop_jrjs")
    if mode != QUADRATURE:
        raise ValueError(f"unknown mode {mode!r}")
    cdf = _af_cdf_quad(x, lambda y: 1.0 - ch.cdf_xi_e(y, p, lam), sc, settings)
    return _clip_prob(1.0 - cdf, "sop_jrjs")


def _xi_d_inf(x, sc):
    """eta -> infinity limit of the xi_D CDF (noise negligible next to jamming)."""
    phis = ch.phi_k(sc.params, sc.corr, sc.jrjs_lam)
    return neumaier_sum(c * x / (x + phis[k])
                        for k, c in enumerate(selection_weights(sc.params.k_r)))


def _xi_e_inf(x, sc):
    phi = ch.phi_e(sc.params, sc.jrjs_lam)
    return x / (x + phi)


def rsr_jrjs(sc):
    """Reliability-security ratio of JRJS; depends on rho_rd but not rho_sr or eta."""
    te = sc.pair.gamma_th_e
    if te <= 0.0:
        raise InvalidRatePair("RSR undefined for a zero eavesdropper threshold")
    sc = sc.replace(eta=1.0)
    return float(_xi_d_inf(sc.pair.gamma_th_d, sc) / _xi_e_inf(te, sc))


def jrjs_outage_floors(sc):
    """eta -> infinity limits of the closed-form JRJS COP and SOP."""
    cop_floor = float(_xi_d_inf(sc.pair.gamma_th_d, sc))
    sop_floor = 1.0 - float(_xi_e_inf(2.0 * sc.pair.gamma_th_e, sc))
    return cop_floor, sop_floor


def _j_integral(p, theta, g):
    """int_0^inf z^p e^{-z/g} / (z + theta) dz for integer p >= 0."""
    return theta**p * math.gamma(p + 1) * upper_gamma_scaled(-p, theta / g)


def rscp_jrjs(sc, mode=CLOSED_FORM, settings=DEFAULT_QUADRATURE):
    """Reliable-and-secure connection probability of JRJS.

    ``closed_form`` applies noise absorption to both second-hop SINRs and
    integrates term by term; ``quadrature`` integrates the joint event with
    the exact (independence-based) xi_D and xi_E laws.
    """
    lam = sc.jrjs_lam
    p, corr = sc.params, sc.corr
    td, te = sc.pair.gamma_th_d, sc.pair.gamma_th_e
    d = td - te
    g = p.gbar_sr
    if mode == QUADRATURE:
        def integrand(z):
            x = z + td
            sf_d = 1.0 - ch.cdf_xi_d(td + td * (td + 1.0) / z, p, corr, lam)
            cdf_e = ch.cdf_xi_e(te + te * (te + 1.0) / (x - te), p, lam)
            return sf_d * cdf_e * ch.pdf_gamma_sr(x, p, corr)

        return _clip_prob(semi_infinite_quad(integrand, settings), "rscp_jrjs")
    if mode != CLOSED_FORM:
        raise ValueError(f"unknown mode {mode!r}")

    phis = ch.phi_k(p, corr, lam, hat=True)
    phi_e = ch.phi_e(p, lam, hat=True)
    g_rd = lam * p.gbar_rd
    g_re = lam * p.gbar_re
    theta2 = d + te * (te + 1.0) / (te + phi_e)
    leak = phi_e * math.exp(-te / g_re) / (te + phi_e)
    terms = []
    for n, m, w in _sr_terms(p.n_t, corr.rho_sr):
        for k, c in enumerate(selection_weights(p.k_r)):
            ph = phis[k]
            theta1 = td * (td + 1.0) / (td + ph)
            pref = (w * c * ph * td ** (p.n_t - 1 - n - m) / (g ** (p.n_t - n) * (td + ph))
                    * math.exp(-td / g - td / (g_rd * omega(k, corr.rho_rd))))
            j1 = _j_integral(m + 1, theta1, g)
            diff = (_j_integral(m + 2, theta2, g) - _j_integral(m + 2, theta1, g)
                    + d * (_j_integral(m + 1, theta2, g) - _j_integral(m + 1, theta1, g)))
            terms.append(pref * (j1 - leak * diff / (theta1 - theta2)))
    return _clip_prob(math.fsum(terms), "rscp_jrjs")


def rscp_jrjs_asymptotic(sc):
    """eta -> infinity RSCP of JRJS: second hop only, [1 - F_xiD] F_xiE."""
    td, te = sc.pair.gamma_th_d, sc.pair.gamma_th_e
    return _clip_prob((1.0 - _xi_d_inf(td, sc)) * _xi_e_inf(te, sc), "rscp_jrjs_asymptotic")


def lambda_subopt(sc):
    """Closed-form power split maximising the high-SNR JRJS RSCP for small delay."""
    p = sc.params
    if p.k_r < 2:
        raise InsufficientRelays("jamming needs at least 2 relays")
    r2 = 1.0 - sc.corr.rho_rd**2
    a = (p.k_r - 1) * r2 + 1.0
    gth = sc.pair.gamma_th_d * sc.pair.gamma_th_e
    num = math.sqrt(a * gth)
    den = num + math.sqrt(p.k_r * r2)
    return num / den if den > 0 else 0.0


# --- dispatch ---------------------------------------------------------------

def _strategy(strategy):
    s = StrategyKind.parse(strategy)
    if s not in (StrategyKind.TBRS, StrategyKind.JRJS):
        raise ValueError(f"no analytic treatment for {s.name}; use the Monte-Carlo engine")
    return s


def cop(sc, strategy, mode=CLOSED_FORM):
    return cop_tbrs(sc, mode) if _strategy(strategy) is StrategyKind.TBRS else cop_jrjs(sc, mode)


def sop(sc, strategy, mode=CLOSED_FORM):
    return sop_tbrs(sc, mode) if _strategy(strategy) is StrategyKind.TBRS else sop_jrjs(sc, mode)


def rscp(sc, strategy, mode=CLOSED_FORM):
    if _strategy(strategy) is StrategyKind.TBRS:
        return rscp_tbrs(sc, mode)
    return rscp_jrjs(sc, mode)


def metrics(sc, strategy, mode=CLOSED_FORM):
    s = _strategy(strategy)
    r = rscp(sc, s, mode)
    rsr = rsr_tbrs(sc) if s is StrategyKind.TBRS else rsr_jrjs(sc)
    return MetricBundle(cop=cop(sc, s, mode), sop=sop(sc, s, mode), rscp=r, rsr=rsr,
                        throughput=sc.pair.rs * r)


def effective_throughput(sc, strategy, engine="analytic", mode=CLOSED_FORM, **mc_options):
    """rs * RSCP from the analytic engine or the Monte-Carlo engine.

    ``mc_options`` are forwarded to :class:`relaysec.simulate.TrialPlan`
    (``trials``, ``master_seed``, ``with_se_link``, ``sigma2_se``) plus
    ``threads``.
    """
    if sc.pair.rs == 0.0:
        return 0.0
    if engine == "analytic":
        return sc.pair.rs * rscp(sc, strategy, mode)
    if engine != "mc":
        raise ValueError(f"unknown engine {engine!r}")
    from .simulate import TrialPlan, estimate

    threads = mc_options.pop("threads", 1)
    plan = TrialPlan(scenario=sc, strategy=StrategyKind.parse(strategy), **mc_options)
    return estimate(plan, threads=threads)["throughput"].value


def throughput_loss(sc_delayed, sc_no_delay, strategy, engine="analytic", **options):
    """Fractional secrecy-throughput loss caused by feedback delay."""
    ref = effective_throughput(sc_no_delay, strategy, engine, **dict(options))
    got = effective_throughput(sc_delayed, strategy, engine, **dict(options))
    if ref <= 0.0:
        raise ValueError("no-delay throughput is zero; loss undefined")
    return min(max((ref - got) / ref, 0.0), 1.0)


@dataclass
class OptimizationResult:
    feasible: bool
    point: Optional[dict]
    value: float
    evaluated: int

    def __bool__(self):
        return self.feasible


def optimize_throughput(template, strategy, r0_grid, kappa_grid, lam_grid=None,
                        eta_db_grid=None, upsilon=1.0, delta=1.0, mode=CLOSED_FORM):
    """Exhaustive grid search of rs * RSCP subject to COP <= upsilon, SOP <= delta.

    Grids are scanned in row-major order (eta, r0, kappa, lam); the first
    point reaching the maximum wins. An empty feasible set is reported as
    ``feasible=False``, not raised.
    """
    if not (0.0 <= upsilon <= 1.0 and 0.0 <= delta <= 1.0):
        raise ValueError("constraints must lie in [0, 1]")
    s = _strategy(strategy)
    eta_db_grid = [template.params.eta_db] if eta_db_grid is None else list(eta_db_grid)
    lam_grid = [template.lam] if lam_grid is None else list(lam_grid)
    grids = (eta_db_grid, list(r0_grid), list(kappa_grid), lam_grid)
    if any(len(gr) == 0 for gr in grids):
        raise ValueError("every grid must be non-empty")
    best_val, best_pt, count = -math.inf, None, 0
    for eta_db, r0, kappa, lam in itertools.product(*grids):
        try:
            sc = template.replace(eta_db=eta_db, pair=RatePair.from_ratio(r0, kappa), lam=lam)
        except (InvalidRatePair, ValueError):
            continue
        count += 1
        if cop(sc, s, mode) > upsilon or sop(sc, s, mode) > delta:
            continue
        val = sc.pair.rs * rscp(sc, s, mode)
        if val > best_val:
            best_val = val
            best_pt = {"eta_db": eta_db, "r0": r0, "kappa": kappa, "lam": lam}
    if best_pt is None:
        return OptimizationResult(False, None, float("nan"), count)
    return OptimizationResult(True, best_pt, best_val, count)
