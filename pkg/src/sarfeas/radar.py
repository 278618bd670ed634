"""SAR system description and the pixel SNR chain.

dB quantities are power ratios (10*log10) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

BOLTZMANN = 1.380e-23
LIGHT_SPEED = 3e8


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class SarSystem:
    center_freq_hz: float
    peak_power_w: float
    duty_factor: float
    prf_hz: float
    bandwidth_hz: float
    antenna_gain_dbi: float
    azimuth_res_m: float
    noise_figure_db: float
    system_loss_db: float
    pulse_widening: float = 1.5
    system_temp_k: float = 290.0
    boltzmann: float = BOLTZMANN
    light_speed: float = LIGHT_SPEED

    def __post_init__(self):
        positive = ("center_freq_hz", "peak_power_w", "prf_hz", "bandwidth_hz", "azimuth_res_m",
                    "system_temp_k", "boltzmann", "light_speed")
        for name in positive:
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.duty_factor <= 1:
            raise DomainError(f"duty_factor must be in (0, 1], got {self.duty_factor}")
        if not self.pulse_widening >= 1:
            raise DomainError(f"pulse_widening must be >= 1, got {self.pulse_widening}")

    @property
    def wavelength_m(self) -> float:
        return self.light_speed / self.center_freq_hz


@dataclass(frozen=True)
class ShipModel:
    length_m: float
    width_m: float
    beta: float = 2.0
    tdw_side_m: float = 6.0

    def __post_init__(self):
        if not (self.length_m >= self.width_m > 0):
            raise DomainError(f"ship needs length >= width > 0, got {self.length_m} x {self.width_m}")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not self.tdw_side_m > 0:
            raise DomainError(f"tdw_side_m must be positive, got {self.tdw_side_m}")

    @property
    def area_m2(self) -> float:
        """Bounding-box area, the upper bound used for pixel counts and RCS."""
        return self.length_m * self.width_m


def avg_power(sys: SarSystem) -> float:
    return sys.peak_power_w * sys.duty_factor


def slant_res(sys: SarSystem) -> float:
    """Slant-range pixel width K_pw * c / 2B."""
    return sys.pulse_widening * sys.light_speed / (2.0 * sys.bandwidth_hz)


def ground_res(delta_r: float, grazing_deg: float) -> float:
    if not 0 <= grazing_deg < 90:
        raise DomainError(f"grazing angle must be in [0, 90) deg, got {grazing_deg}")
    return delta_r / math.cos(math.radians(grazing_deg))


def resolution_cell_area(delta_az: float, delta_gr: float) -> float:
    return delta_az * delta_gr


def snr_constant(sys: SarSystem, r: float, grazing_deg: float, v_orbital: float, delta_r: float) -> float:
    """Pixel SNR per unit mean backscatter coefficient.

    ``P_avg G^2 lambda^3 delta_r / (2 (4 pi)^3 R^3 k T0 F L_s V cos(psi))``,
    the SAR form of the radar equation (range enters cubed because the
    integration time grows with range).
    """
    if not (r > 0 and v_orbital > 0 and delta_r > 0):
        raise DomainError("range, orbital speed and slant resolution must be positive")
    if not 0 <= grazing_deg < 90:
        raise DomainError(f"grazing angle must be in [0, 90) deg, got {grazing_deg}")
    gain = db_to_linear(sys.antenna_gain_dbi)
    num = avg_power(sys) * gain**2 * sys.wavelength_m**3 * delta_r
    den = (
        2.0
        * (4.0 * math.pi) ** 3
        * r**3
        * sys.boltzmann
        * sys.system_temp_k
        * db_to_linear(sys.noise_figure_db)
        * db_to_linear(sys.system_loss_db)
        * v_orbital
        * math.cos(math.radians(grazing_deg))
    )
    return num / den


def mean_snr(a: float, mean_sigma0: float) -> float:
    return a * mean_sigma0


def alpha_from_mean(mean: float, beta: float) -> float:
    """Log-location of a lognormal with the given mean and shape."""
    if not (mean > 0 and beta > 0):
        raise DomainError(f"need mean > 0 and beta > 0, got mean={mean}, beta={beta}")
    return math.log(mean) - 0.5 * beta * beta


def mean_from_alpha(alpha: float, beta: float) -> float:
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    return math.exp(alpha + 0.5 * beta * beta)


def unambiguous_range(prf_hz: float, light_speed: float = LIGHT_SPEED) -> float:
    if not prf_hz > 0:
        raise DomainError(f"PRF must be positive, got {prf_hz}")
    return light_speed / (2.0 * prf_hz)
