"""Special functions and quadrature used by the detection statistics.

Everything here is a pure function of its arguments.  Probabilities are
kept in natural scale; the routines take care near 0 and 1 instead of
switching to log-probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError

__all__ = [
    "LogNormalParams",
    "marcum_q1",
    "reg_inc_beta",
    "reg_inc_beta_inv",
    "lognormal_pdf",
    "lognormal_expectation",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class LogNormalParams:
    """Location ``alpha`` and shape ``beta`` of ln X ~ Normal(alpha, beta**2)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise DomainError(f"lognormal alpha must be finite, got {self.alpha}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"lognormal beta must be positive, got {self.beta}")

    @property
    def mean(self) -> float:
        return math.exp(self.alpha + 0.5 * self.beta**2)


# ---------------------------------------------------------------------------
# Marcum Q of order one
# ---------------------------------------------------------------------------

# Terms of the Bessel series fall off roughly like exp(-k^2 / 2ab); 9.5*sqrt(ab)
# puts the last term below e^-45 relative to the first.
_BESSEL_SPREAD = 9.5
_MIN_TERMS = 30
_GEOM_LOG_EPS = 45.0


def _terms_needed(x: np.ndarray, r: np.ndarray) -> np.ndarray:
    bessel = np.ceil(_BESSEL_SPREAD * np.sqrt(x)) + _MIN_TERMS
    with np.errstate(divide="ignore"):
        log_r = np.log(r)
    geom = np.where(log_r < 0, np.ceil(_GEOM_LOG_EPS / -np.where(log_r < 0, log_r, -1.0)) + 2, np.inf)
    return np.minimum(bessel, geom).astype(np.int64)


def _bessel_series(x: np.ndarray, r: np.ndarray, start: int) -> np.ndarray:
    """sum_{k>=start} r**k * ive(k, x), grouped by truncation length."""
    out = np.zeros_like(x)
    nterms = _terms_needed(x, r)
    # bucket by power-of-two term count so one outlier does not inflate the whole batch
    buckets = np.exp2(np.ceil(np.log2(np.maximum(nterms, 1)))).astype(np.int64)
    for kmax in np.unique(buckets):
        sel = buckets == kmax
        k = np.arange(start, kmax + 1, dtype=float)
        xs, rs = x[sel][:, None], r[sel][:, None]
        with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
            terms = np.where(k == 0, 1.0, rs**k) * special.ive(k, xs)
        out[sel] = terms.sum(axis=1)
    return out


def marcum_q1(a, b):
    """Marcum Q function of order one, Q1(a, b).

    Tail probability P(|a + n| > b) for complex Gaussian ``n`` whose real and
    imaginary parts each have unit variance.  Accepts scalars or arrays
    (broadcast); returns a float for scalar input.

    Uses the exponentially scaled Bessel series, summed in the convergent
    direction: for ``a <= b``

        Q1 = exp(-(a-b)^2/2) * sum_{k>=0} (a/b)^k ive(k, ab)

    and for ``a > b`` the complement ``1 - Q1`` with ratio ``b/a`` and k >= 1.
    Both sums have only positive terms, so small tails keep full relative
    precision.
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    scalar = a_arr.ndim == 0 and b_arr.ndim == 0
    a_arr, b_arr = np.broadcast_arrays(a_arr, b_arr)
    if not (np.all(np.isfinite(a_arr)) and np.all(np.isfinite(b_arr))):
        raise DomainError("marcum_q1 arguments must be finite")
    if np.any(a_arr < 0) or np.any(b_arr < 0):
        raise DomainError("marcum_q1 arguments must be non-negative")

    a_flat = a_arr.ravel()
    b_flat = b_arr.ravel()
    q = np.ones_like(a_flat)

    lower = (a_flat <= b_flat) & (b_flat > 0)
    if np.any(lower):
        al, bl = a_flat[lower], b_flat[lower]
        scale = np.exp(-0.5 * (al - bl) ** 2)
        q[lower] = scale * _bessel_series(al * bl, al / bl, start=0)

    upper = a_flat > b_flat
    upper &= b_flat > 0
    if np.any(upper):
        au, bu = a_flat[upper], b_flat[upper]
        scale = np.exp(-0.5 * (au - bu) ** 2)
        q[upper] = 1.0 - scale * _bessel_series(au * bu, bu / au, start=1)

    q = np.clip(q, 0.0, 1.0).reshape(a_arr.shape)
    return float(q) if scalar else q


# ---------------------------------------------------------------------------
# Regularized incomplete beta
# ---------------------------------------------------------------------------


def _check_beta_shape(a: float, b: float) -> None:
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"incomplete beta shapes must be positive and finite, got a={a}, b={b}")


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    _check_beta_shape(a, b)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"incomplete beta argument must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    val = float(special.betainc(a, b, x))
    if val < _TINY_TAIL and float(a).is_integer() and float(b).is_integer():
        return _binomial_tail_log(x, int(a), int(a + b) - 1)
    return val


# below this scipy's betainc loses relative accuracy on its way into the subnormals
_TINY_TAIL = 1e-280


def _binomial_tail_log(p: float, m: int, n: int) -> float:
    """P(Binomial(n, p) >= m), summed term by term in log space."""
    k = np.arange(m, n + 1, dtype=float)
    log_terms = (special.gammaln(n + 1.0) - special.gammaln(k + 1.0) - special.gammaln(n - k + 1.0)
                 + k * math.log(p) + (n - k) * math.log1p(-p))
    return float(np.exp(special.logsumexp(log_terms)))


def _beta_density(x: float, a: float, b: float) -> float:
    return math.exp((a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - special.betaln(a, b))


def reg_inc_beta_inv(p: float, a: float, b: float, *, rtol: float = 1e-13, max_iter: int = 200) -> float:
    """Inverse of ``reg_inc_beta`` in its first argument.

    Safeguarded Newton iteration: every Newton step that leaves the current
    sign bracket is replaced by bisection (geometric once the bracket spans
    several decades, which is the common case for tiny ``p``).  Raises
    ``ConvergenceError`` when ``max_iter`` is exhausted.
    """
    _check_beta_shape(a, b)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0

    lo, hi = 0.0, 1.0
    x = float(special.betaincinv(a, b, p))
    if not 0.0 < x < 1.0:
        x = 0.5
    for _ in range(max_iter):
        resid = reg_inc_beta(x, a, b) - p
        if abs(resid) <= rtol * p:
            return x
        if resid > 0:
            hi = x
        else:
            lo = x
        dens = _beta_density(x, a, b)
        step = resid / dens if dens > 0 and math.isfinite(dens) else math.inf
        x_new = x - step
        if not lo < x_new < hi:
            if lo > 0 and hi / lo > 16.0:
                x_new = math.sqrt(lo * hi)
            else:
                x_new = 0.5 * (lo + hi)
        if x_new == x or hi - lo <= 4 * np.finfo(float).eps * hi:
            # bracket collapsed to adjacent floats; x is as good as representable
            return x_new
        x = x_new
    raise ConvergenceError(f"reg_inc_beta_inv(p={p}, a={a}, b={b}) did not converge in {max_iter} iterations")


# ---------------------------------------------------------------------------
# Lognormal expectation
# ---------------------------------------------------------------------------


def lognormal_pdf(x, params: LogNormalParams):
    """Density of LN(alpha, beta) at ``x``; zero for ``x <= 0``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (np.log(x) - params.alpha) / params.beta
        pdf = np.exp(-0.5 * z * z) / (x * params.beta * _SQRT_2PI)
    pdf = np.where(x > 0, pdf, 0.0)
    return float(pdf) if pdf.ndim == 0 else pdf


def lognormal_expectation(
    f: Callable[[np.ndarray], np.ndarray],
    params: LogNormalParams,
    *,
    rtol: float = 1e-8,
    half_width: float = 10.0,
    initial_step: float = 0.5,
    max_levels: int = 9,
) -> float:
    """E[f(X)] for X ~ LN(alpha, beta).

    With u = (ln x - alpha)/beta the integral becomes a standard-normal
    weighted integral over u.  It is evaluated with the trapezoid rule on
    [-half_width, half_width]; each refinement halves the step (doubling the
    node count) and reuses previous nodes.  For the smooth integrands used
    here the rule converges geometrically, so the difference between
    successive levels bounds the error.

    ``f`` must accept a 1-D array of positive abscissae.
    """
    h = initial_step
    n = int(round(2 * half_width / h))
    u = np.linspace(-half_width, half_width, n + 1)
    total = _weighted_sum(f, u, params, endpoints=True)
    estimate = h * total
    for _ in range(max_levels):
        h *= 0.5
        u_mid = -half_width + h * (2 * np.arange(n) + 1)
        total += _weighted_sum(f, u_mid, params, endpoints=False)
        n *= 2
        refined = h * total
        delta = abs(refined - estimate)
        if delta <= rtol * abs(refined) or (refined == 0.0 and estimate == 0.0):
            return float(refined)
        estimate = refined
    raise ConvergenceError(
        f"lognormal_expectation did not reach rtol={rtol} after {max_levels} refinements "
        f"(last change {delta:.3e}, estimate {refined:.6e})"
    )


def _weighted_sum(f, u: np.ndarray, params: LogNormalParams, *, endpoints: bool) -> float:
    chi = np.exp(params.alpha + params.beta * u)
    weights = np.exp(-0.5 * u * u) / _SQRT_2PI
    if endpoints:
        weights[0] *= 0.5
        weights[-1] *= 0.5
    vals = np.asarray(f(chi), dtype=float)
    if vals.shape != chi.shape:
        vals = np.broadcast_to(vals, chi.shape)
    return float(np.dot(weights, vals))
