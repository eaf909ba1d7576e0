"""Outdated-CSI Rayleigh channel model.

Two halves live here: random generation of joint delayed/current channel
realisations for the simulator, and the closed-form distributions of the
SNRs that result from beamforming and relay/jammer selection on aged CSI.

All average SNRs are derived as eta * sigma^2 (unit noise power); nothing
stores them independently.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .specfun import bessel_j0

__all__ = [
    "FadingParams",
    "CorrelationCoeffs",
    "ChannelDraw",
    "CorrelationClampWarning",
    "correlation_from_delay",
    "uniforms_per_trial",
    "channels_from_uniforms",
    "draw_channels",
    "beamformed_snr",
    "pdf_gamma_sr",
    "cdf_gamma_sr",
    "cdf_gamma_rstar_d",
    "pdf_gamma_jstar_d",
    "cdf_xi_d",
    "cdf_xi_e",
    "cdf_xi_d_hat",
    "cdf_xi_e_hat",
    "neumaier_sum",
]


class CorrelationClampWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FadingParams:
    """Link variances, transmit SNR and array sizes.

    ``sigma2_jd`` / ``sigma2_je`` default to the relay-destination and
    relay-eavesdropper variances: the jammer is one of the clustered relays.
    """

    eta: float
    n_t: int = 3
    k_r: int = 3
    sigma2_sr: float = 1.0
    sigma2_rd: float = 1.0
    sigma2_re: float = 1.0
    sigma2_jd: Optional[float] = None
    sigma2_je: Optional[float] = None

    def __post_init__(self):
        if self.sigma2_jd is None:
            object.__setattr__(self, "sigma2_jd", self.sigma2_rd)
        if self.sigma2_je is None:
            object.__setattr__(self, "sigma2_je", self.sigma2_re)
        for name in ("sigma2_sr", "sigma2_rd", "sigma2_re", "sigma2_jd", "sigma2_je"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be positive and finite, got {self.eta!r}")
        if int(self.n_t) != self.n_t or self.n_t < 1:
            raise ValueError(f"n_t must be an integer >= 1, got {self.n_t!r}")
        if int(self.k_r) != self.k_r or self.k_r < 1:
            raise ValueError(f"k_r must be an integer >= 1, got {self.k_r!r}")

    @classmethod
    def from_db(cls, eta_db, **kwargs):
        return cls(eta=10.0 ** (eta_db / 10.0), **kwargs)

    @property
    def eta_db(self):
        return 10.0 * math.log10(self.eta)

    @property
    def gbar_sr(self):
        return self.eta * self.sigma2_sr

    @property
    def gbar_rd(self):
        return self.eta * self.sigma2_rd

    @property
    def gbar_re(self):
        return self.eta * self.sigma2_re

    @property
    def gbar_jd(self):
        return self.eta * self.sigma2_jd

    @property
    def gbar_je(self):
        return self.eta * self.sigma2_je


def correlation_from_delay(fd_td):
    """rho = J0(2 pi f_d T_d), clamped at 0 past the first zero of J0."""
    fd_td = float(fd_td)
    if not math.isfinite(fd_td) or fd_td < 0:
        raise ValueError(f"normalised Doppler-delay product must be >= 0, got {fd_td!r}")
    rho = bessel_j0(2.0 * math.pi * fd_td)
    if rho < 0:
        warnings.warn(
            f"J0(2*pi*{fd_td}) = {rho:.6g} < 0; correlation clamped to 0",
            CorrelationClampWarning, stacklevel=2,
        )
        rho = 0.0
    return min(rho, 1.0)


@dataclass(frozen=True)
class CorrelationCoeffs:
    rho_sr: float = 1.0
    rho_rd: float = 1.0
    fd_td_sr: Optional[float] = None
    fd_td_rd: Optional[float] = None

    def __post_init__(self):
        for name in ("rho_sr", "rho_rd"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        for rho_name, fd_name in (("rho_sr", "fd_td_sr"), ("rho_rd", "fd_td_rd")):
            fd = getattr(self, fd_name)
            if fd is None:
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", CorrelationClampWarning)
                expected = correlation_from_delay(fd)
            if abs(getattr(self, rho_name) - expected) > 1e-12:
                raise ValueError(
                    f"{rho_name}={getattr(self, rho_name)!r} inconsistent with "
                    f"{fd_name}={fd!r} (J0 gives {expected!r})"
                )

    @classmethod
    def from_delay(cls, fd_td_sr, fd_td_rd=None):
        if fd_td_rd is None:
            fd_td_rd = fd_td_sr
        return cls(
            rho_sr=correlation_from_delay(fd_td_sr),
            rho_rd=correlation_from_delay(fd_td_rd),
            fd_td_sr=float(fd_td_sr),
            fd_td_rd=float(fd_td_rd),
        )


# --- random generation ------------------------------------------------------

@dataclass
class ChannelDraw:
    """A batch of joint channel realisations; leading axis indexes trials.

    Shapes: ``h_sr_*`` (n, K_r, N_t); ``g_rd_*`` and ``g_re_*`` (n, K_r);
    ``h_se`` (n, N_t).  The delayed R-E draws are only consumed by the
    selection rules that use instantaneous eavesdropper CSI.
    """

    h_sr_delayed: np.ndarray
    h_sr_current: np.ndarray
    g_rd_delayed: np.ndarray
    g_rd_current: np.ndarray
    g_re_delayed: np.ndarray
    g_re_current: np.ndarray
    h_se: np.ndarray

    @property
    def size(self):
        return self.g_rd_current.shape[0]

    def trial(self, index):
        """The single-trial slice (keeps a leading axis of length one)."""
        sl = slice(index, index + 1)
        return ChannelDraw(*(getattr(self, f.name)[sl] for f in _DRAW_FIELDS))


_DRAW_FIELDS = ChannelDraw.__dataclass_fields__.values()


def _complex_count(n_t, k_r):
    # delayed + innovation for S-R (per antenna, per relay), R-D and R-E;
    # one S-E vector.
    return 2 * n_t * k_r + 4 * k_r + n_t


def uniforms_per_trial(n_t, k_r):
    """Number of U(0,1) variates consumed per trial, padded to a multiple of 4.

    The padding keeps every trial aligned on a Philox counter block, so trial
    i's variates start at counter i * uniforms_per_trial / 4.
    """
    d = 2 * _complex_count(n_t, k_r)
    return d + (-d) % 4


def _box_muller(u1, u2, variance):
    # CN(0, variance): |h|^2 ~ Exp(variance), uniform phase.
    r = np.sqrt(-variance * np.log1p(-u1))
    return r * np.exp(2j * np.pi * u2)


def channels_from_uniforms(params, corr, u):
    """Map a (n, uniforms_per_trial) block of uniforms to a ChannelDraw.

    Every current gain follows the first-order autoregressive model
    h(t) = rho h(t - T_d) + sqrt(1 - rho^2) e with e independent of the
    delayed gain and of the same variance. R-E gains age with rho_rd.
    """
    u = np.asarray(u, dtype=float)
    n_t, k_r = params.n_t, params.k_r
    n = u.shape[0]
    c = _complex_count(n_t, k_r)
    if u.shape[1] < 2 * c:
        raise ValueError("uniform block too narrow for this array configuration")
    z = _box_muller(u[:, 0:2 * c:2], u[:, 1:2 * c:2], 1.0)

    pos = 0

    def take(count, shape, variance):
        nonlocal pos
        out = z[:, pos:pos + count].reshape((n,) + shape) * math.sqrt(variance)
        pos += count
        return out

    nk = n_t * k_r
    h_del = take(nk, (k_r, n_t), params.sigma2_sr)
    h_inn = take(nk, (k_r, n_t), params.sigma2_sr)
    g_del = take(k_r, (k_r,), params.sigma2_rd)
    g_inn = take(k_r, (k_r,), params.sigma2_rd)
    e_del = take(k_r, (k_r,), params.sigma2_re)
    e_inn = take(k_r, (k_r,), params.sigma2_re)
    h_se = take(n_t, (n_t,), 1.0)

    a_sr = math.sqrt(max(0.0, 1.0 - corr.rho_sr**2))
    a_rd = math.sqrt(max(0.0, 1.0 - corr.rho_rd**2))
    return ChannelDraw(
        h_sr_delayed=h_del,
        h_sr_current=corr.rho_sr * h_del + a_sr * h_inn,
        g_rd_delayed=g_del,
        g_rd_current=corr.rho_rd * g_del + a_rd * g_inn,
        g_re_delayed=e_del,
        g_re_current=corr.rho_rd * e_del + a_rd * e_inn,
        h_se=h_se,
    )


def draw_channels(params, corr, rng, size=1):
    """Draw `size` joint realisations using a numpy Generator."""
    u = rng.random((size, uniforms_per_trial(params.n_t, params.k_r)))
    return channels_from_uniforms(params, corr, u)


def beamformer(h_delayed):
    """Unit-norm transmit weights matched to the delayed channel (last axis)."""
    norm = np.linalg.norm(h_delayed, axis=-1, keepdims=True)
    w = np.conj(h_delayed) / np.where(norm > 0, norm, 1.0)
    if np.any(norm == 0):
        e1 = np.zeros_like(w)
        e1[..., 0] = 1.0
        w = np.where(norm > 0, w, e1)
    return w


def beamformed_snr(draw, relay, params):
    """gamma_SR of the chosen relay: eta |w(t | T_d) h(t)|^2.

    `relay` is an index array with one entry per trial (or a scalar).
    """
    rows = np.arange(draw.size)
    relay = np.broadcast_to(np.asarray(relay, dtype=int), (draw.size,))
    h_del = draw.h_sr_delayed[rows, relay]
    h_cur = draw.h_sr_current[rows, relay]
    w = beamformer(h_del)
    return params.eta * np.abs(np.sum(w * h_cur, axis=-1)) ** 2


# --- analytic distributions -------------------------------------------------

def neumaier_sum(terms):
    """Compensated elementwise sum over the first axis of a sequence of arrays."""
    terms = list(terms)
    if not terms:
        return 0.0
    s = np.zeros(np.broadcast(*terms).shape) if len(terms) > 1 else np.zeros(np.shape(terms[0]))
    comp = np.zeros_like(s)
    for t in terms:
        t = np.asarray(t, dtype=float)
        tot = s + t
        big = np.abs(s) >= np.abs(t)
        comp += np.where(big, (s - tot) + t, (t - tot) + s)
        s = tot
    out = s + comp
    return out if out.ndim else float(out)


def _nonneg(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("distribution argument must be >= 0")
    return x


def _check_lambda(lam):
    if not (0.0 < lam < 1.0):
        raise ValueError(f"power sharing ratio must lie in (0, 1), got {lam!r}")


def _sr_mixture(n_t, rho):
    """gamma_SR is a binomial mixture of Gamma(N_t - n, gbar) laws; weights per n."""
    r2 = rho * rho
    return [(n, math.comb(n_t - 1, n) * r2 ** (n_t - 1 - n) * (1.0 - r2) ** n)
            for n in range(n_t)]


def pdf_gamma_sr(x, params, corr):
    x = _nonneg(x)
    g = params.gbar_sr
    n_t = params.n_t
    terms = []
    for n, wgt in _sr_mixture(n_t, corr.rho_sr):
        shape = n_t - n
        terms.append(wgt * x ** (shape - 1) * np.exp(-x / g) / (g**shape * math.factorial(shape - 1)))
    return neumaier_sum(terms)


def cdf_gamma_sr(x, params, corr):
    x = _nonneg(x)
    g = params.gbar_sr
    n_t = params.n_t
    terms = []
    for n, wgt in _sr_mixture(n_t, corr.rho_sr):
        for m in range(n_t - n):
            terms.append(wgt * (x / g) ** m * np.exp(-x / g) / math.factorial(m))
    return 1.0 - neumaier_sum(terms)


def omega(k, rho_rd):
    """Mean factor of the k-th exponential in the concomitant mixture."""
    return (k * (1.0 - rho_rd**2) + 1.0) / (k + 1.0)


def selection_weights(k_r):
    """K_r (-1)^k C(K_r - 1, k) / (k + 1); these sum to one."""
    return [k_r * (-1) ** k * math.comb(k_r - 1, k) / (k + 1.0) for k in range(k_r)]


def _sf_selected(y, gbar, k_r, rho):
    # Survival of the current SNR of the relay picked by max of delayed SNR.
    return neumaier_sum(
        c * np.exp(-y / (omega(k, rho) * gbar)) for k, c in enumerate(selection_weights(k_r))
    )


def cdf_gamma_rstar_d(y, params, corr, gbar=None):
    """CDF of the selected relay's current R-D SNR (induced order statistic).

    `gbar` overrides the average R-D SNR (e.g. lambda * eta * sigma2_rd).
    """
    y = _nonneg(y)
    g = params.gbar_rd if gbar is None else gbar
    return 1.0 - _sf_selected(y, g, params.k_r, corr.rho_rd)


def jammer_mean(params, corr, lam):
    """Mean current J*-D SNR: concomitant of the delayed minimum over K_r relays."""
    k_r = params.k_r
    a = (k_r - 1) * (1.0 - corr.rho_rd**2) + 1.0
    return a * (1.0 - lam) * params.gbar_jd / k_r


def pdf_gamma_jstar_d(x, params, corr, lam):
    _check_lambda(lam)
    x = _nonneg(x)
    mu = jammer_mean(params, corr, lam)
    return np.exp(-x / mu) / mu


def phi_k(params, corr, lam, hat=False):
    """Per-k ratio of relay mixture mean to (noise-absorbed) jammer mean."""
    g_rd = lam * params.gbar_rd
    mu = jammer_mean(params, corr, lam) + (1.0 if hat else 0.0)
    return [omega(k, corr.rho_rd) * g_rd / mu for k in range(params.k_r)]


def cdf_xi_d(x, params, corr, lam):
    """CDF of gamma_R*D / (gamma_J*D + 1), treating the two as independent."""
    _check_lambda(lam)
    x = _nonneg(x)
    g_rd = lam * params.gbar_rd
    phis = phi_k(params, corr, lam)
    sf = neumaier_sum(
        c * phis[k] * np.exp(-x / (g_rd * omega(k, corr.rho_rd))) / (x + phis[k])
        for k, c in enumerate(selection_weights(params.k_r))
    )
    return 1.0 - sf


def phi_e(params, lam, hat=False):
    g_re = lam * params.gbar_re
    g_je = (1.0 - lam) * params.gbar_je
    return g_re / (g_je + (1.0 if hat else 0.0))


def cdf_xi_e(x, params, lam):
    """CDF of gamma_R*E / (gamma_J*E + 1) with independent exponentials."""
    _check_lambda(lam)
    x = _nonneg(x)
    phi = phi_e(params, lam)
    return 1.0 - phi / (x + phi) * np.exp(-x / (lam * params.gbar_re))


def cdf_xi_d_hat(x, params, corr, lam):
    """Noise-absorbed approximation: J*-D interference plus noise as one exponential."""
    _check_lambda(lam)
    x = _nonneg(x)
    phis = phi_k(params, corr, lam, hat=True)
    return neumaier_sum(
        c * x / (x + phis[k]) for k, c in enumerate(selection_weights(params.k_r))
    )


def cdf_xi_e_hat(x, params, lam):
    _check_lambda(lam)
    x = _nonneg(x)
    phi = phi_e(params, lam, hat=True)
    return x / (x + phi)
