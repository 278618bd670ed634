"""Pixel-level thresholding and window-level m-of-n decision statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DomainError
from .sigmath import LogNormalParams, lognormal_expectation, marcum_q1, reg_inc_beta, reg_inc_beta_inv


class InfeasibleError(DomainError):
    """No m in {2, ..., n} keeps the window false-alarm rate below the pixel rate."""


def _check_prob(p: float, name: str, *, open_interval: bool = False) -> None:
    ok = 0.0 < p < 1.0 if open_interval else 0.0 <= p <= 1.0
    if not ok:
        raise DomainError(f"{name} must be a probability, got {p}")


def _ceil_ratio(num: float, den: float) -> int:
    # exact rational ratio of the two floats so integer-valued ratios never round up
    return math.ceil(Fraction(num) / Fraction(den))


def _floor_ratio(num: float, den: float) -> int:
    return math.floor(Fraction(num) / Fraction(den))


@dataclass(frozen=True)
class DetectionRequirements:
    p_d_target: float
    p_fa_pixel: Optional[float] = None
    p_fa_overall: Optional[float] = None
    aoi_area_m2: Optional[float] = None

    def __post_init__(self):
        _check_prob(self.p_d_target, "p_d_target", open_interval=True)
        pixel_given = self.p_fa_pixel is not None
        aoi_given = self.p_fa_overall is not None or self.aoi_area_m2 is not None
        if pixel_given == aoi_given:
            raise DomainError("give either p_fa_pixel or (p_fa_overall and aoi_area_m2), not both")
        if pixel_given:
            _check_prob(self.p_fa_pixel, "p_fa_pixel", open_interval=True)
        else:
            if self.p_fa_overall is None or self.aoi_area_m2 is None:
                raise DomainError("p_fa_overall and aoi_area_m2 must be given together")
            _check_prob(self.p_fa_overall, "p_fa_overall", open_interval=True)
            if not self.aoi_area_m2 > 0:
                raise DomainError(f"aoi_area_m2 must be positive, got {self.aoi_area_m2}")

    def pixel_pfa(self, a_res: float) -> float:
        """Per-pixel false-alarm probability for a resolution cell of ``a_res``."""
        if self.p_fa_pixel is not None:
            return self.p_fa_pixel
        return pixel_pfa_from_aoi(self.p_fa_overall, self.aoi_area_m2, a_res)


@dataclass(frozen=True)
class WindowCounts:
    p_w: int
    n_pw: int
    n_ps: int
    n_ps_w: int
    m: int

    def __post_init__(self):
        if self.p_w < 1 or self.n_pw != self.p_w * self.p_w:
            raise DomainError(f"inconsistent window size p_w={self.p_w}, n_pw={self.n_pw}")
        if not 1 <= self.n_ps_w <= min(self.n_ps, self.n_pw):
            raise DomainError(f"n_ps_w={self.n_ps_w} outside [1, min(n_ps, n_pw)]")
        if not 1 <= self.m <= self.n_ps_w:
            raise DomainError(f"m={self.m} outside [1, n_ps_w={self.n_ps_w}]")


# -- false-alarm budget ------------------------------------------------------


def pixel_pfa_from_aoi(p_fa_overall: float, aoi_area: float, a_res: float) -> float:
    """Split an area-of-interest false-alarm budget evenly over its pixels."""
    _check_prob(p_fa_overall, "p_fa_overall")
    if not (aoi_area > 0 and a_res > 0):
        raise DomainError("areas must be positive")
    return p_fa_overall / _ceil_ratio(aoi_area, a_res)


def threshold_from_pfa(p_fa: float) -> float:
    """Intensity threshold for unit-power noise: T = -ln p_fa."""
    _check_prob(p_fa, "p_fa")
    if p_fa == 0.0:
        raise DomainError("p_fa = 0 needs an infinite threshold")
    return -math.log(p_fa)


# -- pixel detection ---------------------------------------------------------


def pd_conditional(chi, p_fa: float):
    """Detection probability of a fixed-SNR, random-phase pixel.

    ``chi`` may be an array.  Q1(sqrt(2 chi), sqrt(2 T)).
    """
    thr = threshold_from_pfa(p_fa)
    chi = np.asarray(chi, dtype=float)
    if np.any(chi < 0):
        raise DomainError("SNR must be non-negative")
    return marcum_q1(np.sqrt(2.0 * chi), math.sqrt(2.0 * thr))


def pd_lognormal(alpha_prime: float, beta: float, p_fa: float, *, rtol: float = 1e-8) -> float:
    """Unconditional pixel detection probability for lognormal SNR."""
    params = LogNormalParams(alpha_prime, beta)
    thr = threshold_from_pfa(p_fa)
    b = math.sqrt(2.0 * thr)
    return lognormal_expectation(lambda chi: marcum_q1(np.sqrt(2.0 * chi), b), params, rtol=rtol)


# -- target detection window -------------------------------------------------


def tdw_side_pixels(l_w: float, delta_min: float) -> int:
    if not (l_w > 0 and delta_min > 0):
        raise DomainError("window side and pixel size must be positive")
    return _ceil_ratio(l_w, delta_min)


def ship_pixels(ship_area: float, a_res: float) -> int:
    if not (ship_area > 0 and a_res > 0):
        raise DomainError("areas must be positive")
    return _floor_ratio(ship_area, a_res)


def window_ship_pixels(n_ps: int, n_pw: int) -> int:
    """Most ship pixels one window can hold: the smaller of ship and window."""
    return min(n_ps, n_pw)


def window_ship_pixels_clipped(length_m: float, width_m: float, l_w: float, a_res: float, n_pw: int) -> int:
    """Alternative count: ship footprint clipped to the window's extent."""
    clipped = min(length_m, l_w) * min(width_m, l_w)
    return min(_floor_ratio(clipped, a_res), n_pw)


# -- binary integration --------------------------------------------------------


def binint_prob(p: float, m: int, n: int) -> float:
    """P(at least m of n independent Bernoulli(p) trials succeed)."""
    _check_mn(m, n)
    _check_prob(p, "p")
    return reg_inc_beta(p, m, n - m + 1)


def binint_inv(prob: float, m: int, n: int) -> float:
    """Single-trial probability giving ``prob`` under the m-of-n rule."""
    _check_mn(m, n)
    _check_prob(prob, "prob")
    return reg_inc_beta_inv(prob, m, n - m + 1)


def _check_mn(m: int, n: int) -> None:
    if int(m) != m or int(n) != n or not 1 <= m <= n:
        raise DomainError(f"need integers 1 <= m <= n, got m={m}, n={n}")


def optimal_m(p_fa: float, n: int) -> int:
    """Smallest m >= 2 whose m-of-n false-alarm rate is below ``p_fa``.

    m = 1 is excluded on purpose: it multiplies the false-alarm rate by
    roughly n.
    """
    _check_prob(p_fa, "p_fa", open_interval=True)
    if n < 2:
        raise InfeasibleError(f"no feasible m: window holds only n={n} ship pixel(s)")
    for k in range(2, n + 1):
        if binint_prob(p_fa, k, n) < p_fa:
            return k
    raise InfeasibleError(f"no feasible m in 2..{n} keeps the window false-alarm rate below {p_fa}")


def window_pfa_full(p_fa: float, m: int, n_pw: int) -> float:
    """Diagnostic: m-of-n_pw false-alarm rate counting every pixel of a noise-only window."""
    return binint_prob(p_fa, m, n_pw)


__all__ = [
    "DetectionRequirements",
    "InfeasibleError",
    "WindowCounts",
    "binint_inv",
    "binint_prob",
    "optimal_m",
    "pd_conditional",
    "pd_lognormal",
    "pixel_pfa_from_aoi",
    "ship_pixels",
    "tdw_side_pixels",
    "threshold_from_pfa",
    "window_pfa_full",
    "window_ship_pixels",
    "window_ship_pixels_clipped",
]
