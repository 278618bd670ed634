"""Side-looking surveillance geometry over a spherical Earth."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError

EARTH_RADIUS_M = 6_371_000.0
MU_EARTH = 3.986004418e14


@dataclass(frozen=True)
class GeometryInputs:
    altitude_m: float
    look_angle_deg: float
    swath_m: float
    earth_radius_m: float = EARTH_RADIUS_M
    mu_m3s2: float = MU_EARTH

    def __post_init__(self):
        if not self.altitude_m > 0:
            raise DomainError(f"altitude must be positive, got {self.altitude_m}")
        if not 0 < self.look_angle_deg < 90:
            raise DomainError(f"look angle must be in (0, 90) deg, got {self.look_angle_deg}")
        if not self.swath_m > 0:
            raise DomainError(f"swath must be positive, got {self.swath_m}")
        if not (self.earth_radius_m > 0 and self.mu_m3s2 > 0):
            raise DomainError("earth radius and gravitational parameter must be positive")

    @property
    def orbit_radius_m(self) -> float:
        return self.earth_radius_m + self.altitude_m


@dataclass(frozen=True)
class SurveillanceGeometry:
    r_slant_min_m: float
    r_slant_max_m: float
    r_ground_min_m: float
    r_ground_max_m: float
    grazing_far_deg: float
    v_orbital_ms: float
    v_ground_ms: float
    r_slant_mid_m: float
    r_ground_mid_m: float


def _slant_from_central_angle(theta: float, inputs: GeometryInputs) -> float:
    re, rs = inputs.earth_radius_m, inputs.orbit_radius_m
    return math.sqrt(re * re + rs * rs - 2.0 * re * rs * math.cos(theta))


def _central_angle_from_slant(r: float, inputs: GeometryInputs) -> float:
    re, rs = inputs.earth_radius_m, inputs.orbit_radius_m
    cos_theta = (re * re + rs * rs - r * r) / (2.0 * re * rs)
    return math.acos(max(-1.0, min(1.0, cos_theta)))


def _grazing_deg(r: float, theta: float, inputs: GeometryInputs) -> float:
    # law of sines: sin(incidence) / rs = sin(theta) / r
    sin_inc = inputs.orbit_radius_m * math.sin(theta) / r
    return 90.0 - math.degrees(math.asin(min(1.0, sin_inc)))


def derive_geometry(inputs: GeometryInputs) -> SurveillanceGeometry:
    """Ranges, far-edge grazing angle and speeds for a symmetric ground swath.

    The look angle points the boresight at mid-swath; near and far edges sit
    half a swath either side of it in ground range.
    """
    re, rs = inputs.earth_radius_m, inputs.orbit_radius_m
    la = math.radians(inputs.look_angle_deg)
    disc = re * re - (rs * math.sin(la)) ** 2
    if disc < 0:
        raise DomainError(
            f"no-intersection: look angle {inputs.look_angle_deg} deg misses the Earth from "
            f"{inputs.altitude_m / 1e3:.1f} km"
        )
    r_mid = rs * math.cos(la) - math.sqrt(disc)
    theta_mid = math.asin(r_mid * math.sin(la) / re)
    g_mid = re * theta_mid

    g_near = g_mid - 0.5 * inputs.swath_m
    g_far = g_mid + 0.5 * inputs.swath_m
    if g_near < 0:
        raise DomainError("swath extends past nadir at this look angle")
    theta_far = g_far / re
    r_near = _slant_from_central_angle(g_near / re, inputs)
    r_far = _slant_from_central_angle(theta_far, inputs)
    if _grazing_deg(r_far, theta_far, inputs) <= 0:
        raise DomainError("no-intersection: far swath edge lies beyond the horizon")

    v_orb = math.sqrt(inputs.mu_m3s2 / rs)
    return SurveillanceGeometry(
        r_slant_min_m=r_near,
        r_slant_max_m=r_far,
        r_ground_min_m=g_near,
        r_ground_max_m=g_far,
        grazing_far_deg=_grazing_deg(r_far, theta_far, inputs),
        v_orbital_ms=v_orb,
        v_ground_ms=v_orb * re / rs,
        r_slant_mid_m=r_mid,
        r_ground_mid_m=g_mid,
    )


def grazing_at_slant_range(r: float, inputs: GeometryInputs) -> float:
    """Grazing angle (deg) at the target for slant range ``r``.

    Warns when ``r`` falls outside the configured swath; raises when no
    triangle with sides (Re, Re + H, r) exists or the target would sit at
    nadir.
    """
    re, rs = inputs.earth_radius_m, inputs.orbit_radius_m
    if not (r > rs - re and r < rs + re):
        raise DomainError(f"slant range {r} m violates the triangle inequality for this orbit")
    horizon = math.sqrt(rs * rs - re * re)
    if r > horizon:
        raise DomainError(f"slant range {r} m lies beyond the horizon ({horizon:.1f} m)")
    geom = derive_geometry(inputs)
    if not geom.r_slant_min_m * (1 - 1e-12) <= r <= geom.r_slant_max_m * (1 + 1e-12):
        warnings.warn(
            f"slant range {r:.1f} m is outside the swath "
            f"[{geom.r_slant_min_m:.1f}, {geom.r_slant_max_m:.1f}] m",
            stacklevel=2,
        )
    theta = _central_angle_from_slant(r, inputs)
    return _grazing_deg(r, theta, inputs)
