"""Special functions used by the closed-form outage expressions.

Only what the analytic module needs: J0 (delay correlation), integer-order
modified Bessel K, the upper incomplete gamma function extended to
non-positive orders, and the semi-infinite integral

    Upsilon(a, b, mu, nu) = int_0^inf z^a / (z + b) * exp(-mu z - nu / z) dz

which has no closed form once the jamming interference is kept exact.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

__all__ = [
    "QuadratureSettings",
    "QuadratureError",
    "bessel_j0",
    "bessel_k",
    "bessel_k_scaled",
    "upper_gamma",
    "upper_gamma_scaled",
    "upsilon_integral",
    "semi_infinite_quad",
]


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be strictly positive")
        if int(self.max_subdivisions) < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSettings()


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge; carries the best estimate."""

    def __init__(self, message, estimate, error_bound):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


def _finite(x, name="x"):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return x


def bessel_j0(x):
    """Zero-order Bessel function of the first kind."""
    return float(special.j0(_finite(x)))


def bessel_k(order, x):
    """Modified Bessel function of the second kind, K_order(x), for x > 0."""
    x = _finite(x)
    if x <= 0:
        raise ValueError(f"bessel_k requires x > 0, got {x!r}")
    if int(order) != order or order < 0:
        raise ValueError(f"order must be a non-negative integer, got {order!r}")
    return float(special.kv(int(order), x))


def bessel_k_scaled(order, x):
    """exp(x) * K_order(x); vectorised, no domain checks."""
    return special.kve(order, x)


# --- upper incomplete gamma -------------------------------------------------

_CF_MAX_ITER = 500
_CF_EPS = 1e-16
_TINY = 1e-300


def _scaled_gamma_cf(a, x):
    """exp(x) * Gamma(a, x) by Lentz evaluation of the Legendre continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return math.exp(a * math.log(x)) * h
    raise ArithmeticError(f"continued fraction for Gamma({a}, {x}) did not converge")


def _scaled_gamma_small_x(a, x):
    # Anchor at order a0 in (0, 1] (or exactly 0, where Gamma(0, x) = E1(x)),
    # then recur downwards: Gamma(s, x) = (Gamma(s + 1, x) - x^s e^{-x}) / s.
    n = int(math.ceil(-a)) if a <= 0 else 0
    a0 = a + n
    if a0 == 0.0:
        s = math.exp(x) * special.exp1(x)
    else:
        s = math.exp(x) * special.gammaincc(a0, x) * special.gamma(a0)
    order = a0
    for _ in range(n):
        order -= 1.0
        s = (s - x**order) / order
    return s


def upper_gamma_scaled(a, x):
    """exp(x) * Gamma(a, x) for real a (including negative integers) and x > 0.

    The fused form stays finite where Gamma(a, x) underflows or x^a overflows,
    e.g. e^{z} Gamma(-m-2, z) for small z.
    """
    a = _finite(a, "a")
    x = _finite(x)
    if x <= 0:
        raise ValueError(f"upper_gamma requires x > 0, got {x!r}")
    if a > 0 and x < a + 1.0:
        return float(math.exp(x) * special.gammaincc(a, x) * special.gamma(a))
    if x >= 1.0:
        return _scaled_gamma_cf(a, x)
    return _scaled_gamma_small_x(a, x)


def upper_gamma(a, x):
    """Generalised upper incomplete gamma Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt."""
    s = upper_gamma_scaled(a, x)
    return s * math.exp(-float(x))


# --- quadrature -------------------------------------------------------------

def _quad_checked(func, lo, hi, settings, points=None):
    if points is not None and len(points) >= int(settings.max_subdivisions):
        points = None  # quadpack needs room for the break points
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            func, lo, hi,
            epsabs=settings.abs_tol, epsrel=settings.rel_tol,
            limit=int(settings.max_subdivisions), points=points, full_output=1,
        )
    value, err, info = out[0], out[1], out[2]
    ier = out[3] if len(out) > 3 else 0
    if ier not in (0,) and err > max(settings.abs_tol, settings.rel_tol * abs(value)):
        raise QuadratureError("adaptive quadrature failed to converge", value, err)
    return value, err


def _log_window(log_f, span=(-60.0, 60.0), n=2401, drop=46.0):
    """Locate the region in u = log z where log_f(u) is within `drop` of its peak."""
    u = np.linspace(span[0], span[1], n)
    with np.errstate(all="ignore"):
        lf = log_f(u)
    lf = np.where(np.isfinite(lf), lf, -np.inf)
    i = int(np.argmax(lf))
    peak = lf[i]
    if not np.isfinite(peak):
        return None
    keep = np.nonzero(lf > peak - drop)[0]
    step = u[1] - u[0]
    return u[keep[0]] - 2 * step, u[keep[-1]] + 2 * step, u[i], peak


def upsilon_integral(a, b, mu, nu, settings=DEFAULT_QUADRATURE):
    """int_0^inf z^a / (z + b) exp(-mu z - nu / z) dz by quadrature in u = log z.

    The substitution z = e^u maps the essential singularity of exp(-nu/z) at
    the origin and the exponential tail to two rapidly decaying ends.
    """
    a, b, mu, nu = (_finite(v, name) for v, name in zip((a, b, mu, nu), "abmn"))
    if int(a) != a or a < 0:
        raise ValueError(f"a must be a non-negative integer, got {a!r}")
    if b <= 0 or mu <= 0 or nu < 0:
        raise ValueError("upsilon_integral requires b > 0, mu > 0, nu >= 0")

    def log_f(u):
        z = np.exp(u)
        return (a + 1.0) * u - np.logaddexp(u, math.log(b)) - mu * z - nu / z

    lo, hi, u_peak, peak = _log_window(log_f)

    def f(u):
        return math.exp(float(log_f(u)) - peak)

    scaled, err = _quad_checked(f, lo, hi, _rescaled(settings, peak), points=[u_peak])
    return scaled * math.exp(peak)


def _rescaled(settings, log_scale):
    # Absolute tolerance applies to the unscaled integral.
    abs_tol = settings.abs_tol * math.exp(-min(max(log_scale, -700.0), 700.0))
    return QuadratureSettings(settings.rel_tol, max(abs_tol, 1e-300), settings.max_subdivisions)


def semi_infinite_quad(func, settings=DEFAULT_QUADRATURE):
    """int_0^inf func(z) dz for a non-negative integrand, via z = e^u.

    `func` must accept numpy arrays. The integration window is chosen from a
    coarse scan of the integrand on a logarithmic grid.
    """

    def log_f(u):
        z = np.exp(u)
        return np.log(func(z)) + u

    window = _log_window(log_f)
    if window is None:
        return 0.0
    lo, hi, u_peak, peak = window

    def f(u):
        z = math.exp(u)
        return float(func(np.asarray(z))) * z * math.exp(-peak)

    scaled, err = _quad_checked(f, lo, hi, _rescaled(settings, peak), points=[u_peak])
    return scaled * math.exp(peak)
