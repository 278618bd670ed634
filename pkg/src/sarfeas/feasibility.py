"""Minimum detectable ship RCS.

``run_pipeline`` evaluates the window-level detection probability for one
(mean backscatter, slant resolution) pair and returns every intermediate.
``min_sigma0`` inverts it for the required detection probability and
``sweep`` repeats that across slant resolutions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from . import detection, radar
from .config import ScenarioConfig
from .detection import WindowCounts
from .errors import ConvergenceError, DomainError, SarfeasError
from .geometry import derive_geometry, grazing_at_slant_range
from .montecarlo import worker_count

MAX_BISECTION_ITER = 200

STATUS_OK = "ok"
STATUS_ABOVE = "target-above-bracket"
STATUS_BELOW = "target-below-bracket"
STATUS_MAXITER = "max-iterations"
STATUS_FAILED = "failed"


@contextmanager
def _block(label: str):
    try:
        yield
    except SarfeasError as exc:
        raise type(exc)(f"{label}: {exc}") from exc


@dataclass(frozen=True)
class PipelineResult:
    band: str
    delta_r_m: float
    mean_sigma0: float
    slant_range_m: float
    grazing_deg: float
    v_orbital_ms: float
    ship_area_m2: float
    a: float
    mean_snr: float
    alpha_prime: float
    delta_gr_m: float
    a_res_m2: float
    delta_min_m: float
    counts: WindowCounts
    p_d: float
    p_fa: float
    p_d_ship: float
    p_fa_ship: float
    # noise-only window counted over all n_pw pixels, for comparison only
    p_fa_ship_full_window: float


@dataclass(frozen=True)
class _Stage:
    """The mean-backscatter independent part of the pipeline (blocks 1-2, 4, 6-9)."""

    band: str
    delta_r_m: float
    slant_range_m: float
    grazing_deg: float
    v_orbital_ms: float
    ship_area_m2: float
    beta: float
    a: float
    delta_gr_m: float
    a_res_m2: float
    delta_min_m: float
    counts: WindowCounts
    p_fa: float
    p_fa_ship: float
    p_fa_ship_full_window: float


def _target_position(scenario: ScenarioConfig) -> Tuple[float, float, float]:
    with _block("geometry"):
        geom = derive_geometry(scenario.geometry)
        r = scenario.options.target_slant_range_m
        if r is None:
            r, psi = geom.r_slant_max_m, geom.grazing_far_deg
        else:
            psi = grazing_at_slant_range(r, scenario.geometry)
    v = scenario.options.v_orbital_override or geom.v_orbital_ms
    return r, psi, v


def _prepare(scenario: ScenarioConfig, delta_r: float, band: Optional[str]) -> _Stage:
    if not delta_r > 0:
        raise DomainError(f"delta_r must be positive, got {delta_r}")
    band, sar = scenario.band(band)
    ship = scenario.ship
    r, psi, v = _target_position(scenario)

    with _block("block 2 (SNR constant)"):
        a = radar.snr_constant(sar, r, psi, v, delta_r)
    with _block("block 4 (ground resolution)"):
        d_gr = radar.ground_res(delta_r, psi)
    with _block("blocks 6-8 (window counts)"):
        a_res = radar.resolution_cell_area(sar.azimuth_res_m, d_gr)
        d_min = min(sar.azimuth_res_m, d_gr)
        p_w = detection.tdw_side_pixels(ship.tdw_side_m, d_min)
        n_pw = p_w * p_w
        n_ps = detection.ship_pixels(ship.area_m2, a_res)
        if scenario.options.window_overlap_model == "clipped":
            n_ps_w = min(n_ps, detection.window_ship_pixels_clipped(
                ship.length_m, ship.width_m, ship.tdw_side_m, a_res, n_pw))
        else:
            n_ps_w = detection.window_ship_pixels(n_ps, n_pw)
        if n_ps_w < 1:
            raise detection.InfeasibleError(
                f"ship ({ship.area_m2:g} m^2) is smaller than one resolution cell ({a_res:.4g} m^2)")
        p_fa = scenario.detection.pixel_pfa(a_res)
    with _block("block 9 (optimal m)"):
        m = detection.optimal_m(p_fa, n_ps_w)
        counts = WindowCounts(p_w=p_w, n_pw=n_pw, n_ps=n_ps, n_ps_w=n_ps_w, m=m)
        p_fa_ship = detection.binint_prob(p_fa, m, n_ps_w)
        p_fa_full = detection.window_pfa_full(p_fa, m, n_pw)

    return _Stage(
        band=band, delta_r_m=delta_r, slant_range_m=r, grazing_deg=psi, v_orbital_ms=v,
        ship_area_m2=ship.area_m2, beta=ship.beta, a=a, delta_gr_m=d_gr, a_res_m2=a_res,
        delta_min_m=d_min, counts=counts, p_fa=p_fa, p_fa_ship=p_fa_ship,
        p_fa_ship_full_window=p_fa_full,
    )


def _evaluate(stage: _Stage, mean_sigma0: float) -> PipelineResult:
    if not mean_sigma0 > 0:
        raise DomainError(f"mean backscatter must be positive, got {mean_sigma0}")
    with _block("block 5 (pixel SNR)"):
        x_mean = radar.mean_snr(stage.a, mean_sigma0)
        alpha_p = radar.alpha_from_mean(x_mean, stage.beta)
    with _block("block 10 (pixel Pd)"):
        p_d = detection.pd_lognormal(alpha_p, stage.beta, stage.p_fa)
    with _block("block 11 (window Pd)"):
        p_d_ship = detection.binint_prob(p_d, stage.counts.m, stage.counts.n_ps_w)
    return PipelineResult(
        band=stage.band, delta_r_m=stage.delta_r_m, mean_sigma0=mean_sigma0,
        slant_range_m=stage.slant_range_m, grazing_deg=stage.grazing_deg,
        v_orbital_ms=stage.v_orbital_ms, ship_area_m2=stage.ship_area_m2, a=stage.a,
        mean_snr=x_mean, alpha_prime=alpha_p, delta_gr_m=stage.delta_gr_m,
        a_res_m2=stage.a_res_m2, delta_min_m=stage.delta_min_m, counts=stage.counts,
        p_d=p_d, p_fa=stage.p_fa, p_d_ship=p_d_ship, p_fa_ship=stage.p_fa_ship,
        p_fa_ship_full_window=stage.p_fa_ship_full_window,
    )


def run_pipeline(scenario: ScenarioConfig, mean_sigma0: float, delta_r: float,
                 band: Optional[str] = None) -> PipelineResult:
    return _evaluate(_prepare(scenario, delta_r, band), mean_sigma0)


@dataclass(frozen=True)
class FeasibilityPoint:
    band: str
    delta_r_m: float
    min_sigma0: float
    rcs_min_m2: float
    m: int
    p_d_at_solution: float
    p_d_ship_at_solution: float
    converged: bool
    iterations: int
    status: str = STATUS_OK

    @property
    def min_sigma0_db(self) -> float:
        return radar.linear_to_db(self.min_sigma0) if self.min_sigma0 > 0 else -math.inf


def rcs_min(min_sigma0: float, ship) -> float:
    """Mean ship RCS at the minimum detectable backscatter coefficient."""
    return min_sigma0 * ship.area_m2


def min_sigma0(scenario: ScenarioConfig, delta_r: float, p_d_target: Optional[float] = None,
               bracket: Optional[Sequence[float]] = None, band: Optional[str] = None,
               *, rtol: float = 1e-6) -> FeasibilityPoint:
    """Smallest mean backscatter meeting ``p_d_target`` at slant resolution ``delta_r``.

    The window detection probability is increasing in the mean backscatter
    (m does not depend on it), so the minimum of |P_D - P_D^sw| / P_D is a
    root, found by bisection on ln(sigma0).  Unreachable targets are reported
    through ``status`` rather than raised.
    """
    p_target = scenario.detection.p_d_target if p_d_target is None else p_d_target
    if not 0 < p_target < 1:
        raise DomainError(f"p_d_target must be in (0, 1), got {p_target}")
    lo, hi = bracket if bracket is not None else scenario.options.sigma0_bracket
    if not 0 < lo < hi:
        raise DomainError(f"bracket must satisfy 0 < lo < hi, got [{lo}, {hi}]")

    stage = _prepare(scenario, delta_r, band)

    def point(sigma0: float, res: PipelineResult, converged: bool, iters: int, status: str):
        return FeasibilityPoint(
            band=stage.band, delta_r_m=delta_r, min_sigma0=sigma0,
            rcs_min_m2=rcs_min(sigma0, scenario.ship), m=stage.counts.m,
            p_d_at_solution=res.p_d, p_d_ship_at_solution=res.p_d_ship,
            converged=converged, iterations=iters, status=status,
        )

    res_lo = _evaluate(stage, lo)
    if res_lo.p_d_ship >= p_target:
        return point(lo, res_lo, False, 0, STATUS_BELOW)
    res_hi = _evaluate(stage, hi)
    if res_hi.p_d_ship < p_target:
        return point(hi, res_hi, False, 0, STATUS_ABOVE)

    x_lo, x_hi = math.log(lo), math.log(hi)
    for it in range(1, MAX_BISECTION_ITER + 1):
        x_mid = 0.5 * (x_lo + x_hi)
        sigma0 = math.exp(x_mid)
        res = _evaluate(stage, sigma0)
        if abs(p_target - res.p_d_ship) / p_target <= rtol:
            return point(sigma0, res, True, it, STATUS_OK)
        if res.p_d_ship < p_target:
            x_lo = x_mid
        else:
            x_hi = x_mid
    return point(sigma0, res, False, MAX_BISECTION_ITER, STATUS_MAXITER)


@dataclass(frozen=True)
class SweepResult:
    band: str
    points: List[FeasibilityPoint]
    optimum: Optional[FeasibilityPoint]


def _failed_point(scenario: ScenarioConfig, delta_r: float, band: str) -> FeasibilityPoint:
    return FeasibilityPoint(band=band, delta_r_m=delta_r, min_sigma0=math.nan, rcs_min_m2=math.nan,
                            m=0, p_d_at_solution=math.nan, p_d_ship_at_solution=math.nan,
                            converged=False, iterations=0, status=STATUS_FAILED)


def sweep(scenario: ScenarioConfig, delta_r_set: Optional[Iterable[float]] = None,
          band: Optional[str] = None) -> SweepResult:
    """Minimum detectable RCS for each slant resolution, in input order.

    Points that fail or do not converge stay in the list, flagged; the
    optimum is the smallest RCS among converged points.  Raises only when
    every point fails.
    """
    band, _ = scenario.band(band)
    values = list(scenario.sweep.values() if delta_r_set is None else delta_r_set)
    if not values:
        raise DomainError("empty slant-resolution set")

    def solve(dr: float) -> Tuple[FeasibilityPoint, Optional[SarfeasError]]:
        try:
            return min_sigma0(scenario, dr, band=band), None
        except SarfeasError as exc:
            return _failed_point(scenario, dr, band), exc

    workers = min(worker_count(), len(values))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(solve, values))
    else:
        outcomes = [solve(dr) for dr in values]

    points = [p for p, _ in outcomes]
    if all(not p.converged for p in points):
        errors = [e for _, e in outcomes if e is not None]
        if errors and len(errors) == len(points):
            raise type(errors[0])(f"every sweep point failed; first: {errors[0]}")
        raise ConvergenceError("no sweep point converged inside the sigma0 bracket")
    converged = [p for p in points if p.converged]
    optimum = min(converged, key=lambda p: p.rcs_min_m2)
    return SweepResult(band=band, points=points, optimum=optimum)
