"""``sarfeas`` command-line front end.

CSV output is RFC-4180 with a ``#``-prefixed metadata preamble (tool version,
config digest, seed where relevant) so identical inputs give identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import __version__, detection, radar
from .config import ScenarioConfig, load_config
from .errors import ConfigError, SarfeasError
from .feasibility import PipelineResult, SweepResult, run_pipeline, sweep
from .geometry import derive_geometry
from .montecarlo import GENERATOR, McConfig, mc_pixel_pd

VALIDATE_BETAS = (1.5, 2.0, 2.5)
VALIDATE_PFA = 1e-10
VALIDATE_SNR_DB = tuple(range(0, 51, 2))


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    if math.isnan(x):
        return "nan"
    return f"{x:.10g}"


def write_csv(out, preamble: Sequence[str], header: Sequence[str], rows: Iterable[Sequence],
              trailer: Sequence[str] = ()) -> None:
    for line in preamble:
        out.write(f"# {line}\r\n")
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    for line in trailer:
        out.write(f"# {line}\r\n")


def _preamble(command: str, cfg: ScenarioConfig, extra: Sequence[str] = ()) -> List[str]:
    return [f"sarfeas {__version__} {command}", f"config_sha256: {cfg.digest}", *extra]


def _emit(text: str, out_path: Optional[str]) -> None:
    if out_path:
        Path(out_path).write_text(text, newline="")
    else:
        sys.stdout.write(text)


# -- geometry ---------------------------------------------------------------------


def cmd_geometry(args) -> int:
    cfg = load_config(args.config)
    geom = derive_geometry(cfg.geometry)
    ref = cfg.reference_geometry
    rows = [
        ("r_slant_min_m", geom.r_slant_min_m, "m"),
        ("r_slant_max_m", geom.r_slant_max_m, "m"),
        ("r_ground_min_m", geom.r_ground_min_m, "m"),
        ("r_ground_max_m", geom.r_ground_max_m, "m"),
        ("grazing_far_deg", geom.grazing_far_deg, "deg"),
        ("v_orbital_ms", geom.v_orbital_ms, "m/s"),
        ("v_ground_ms", geom.v_ground_ms, "m/s"),
    ]
    for name, sar in cfg.sar.items():
        rows.append((f"unambiguous_range_m[{name}]", radar.unambiguous_range(sar.prf_hz, sar.light_speed), "m"))

    def pinned(key):
        return ref.get(key.split("[")[0])

    table = [(k, v, unit, pinned(k)) for k, v, unit in rows]
    buf = io.StringIO()
    if args.format == "csv":
        write_csv(buf, _preamble("geometry", cfg), ["quantity", "derived", "reference", "rel_diff", "unit"],
                  [(k, v, "" if p is None else p, "" if p is None else (v - p) / p, u) for k, v, u, p in table])
    else:
        buf.write("Surveillance geometry (spherical Earth)\n")
        for k, v, unit, p in table:
            line = f"  {k:<28s} {v:14.4f} {unit:<4s}"
            if p is not None:
                line += f"   reference {p:12.4f}  ({100 * (v - p) / p:+.3f} %)"
            buf.write(line + "\n")
    _emit(buf.getvalue(), args.out)
    return 0


# -- pixel Pd validation-----------------------------------------------------------------


def validation_table(betas: Sequence[float], snr_db: Sequence[float], p_fa: float, mc: McConfig):
    """Rows of (beta, mean_snr_db, pd_theory, pd_mc, std_err, rel_err_pct)."""
    rows = []
    for beta in betas:
        for x_db in snr_db:
            alpha_p = radar.alpha_from_mean(radar.db_to_linear(x_db), beta)
            theory = detection.pd_lognormal(alpha_p, beta, p_fa)
            est = mc_pixel_pd(alpha_p, beta, p_fa, mc)
            rows.append((beta, x_db, theory, est.estimate, est.std_err,
                         100.0 * abs(theory - est.estimate) / theory))
    return rows


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    mc = McConfig(
        n_trials=args.nmc if args.nmc is not None else cfg.options.mc.n_trials,
        seed=args.seed if args.seed is not None else cfg.options.mc.seed,
        chunk_size=cfg.options.mc.chunk_size,
    )
    rows = validation_table(args.betas, VALIDATE_SNR_DB, args.p_fa, mc)
    trailer = []
    for beta in args.betas:
        worst = max(r[5] for r in rows if r[0] == beta)
        trailer.append(f"max rel_err_pct beta={fmt(beta)}: {worst:.4f}")
    buf = io.StringIO()
    write_csv(
        buf,
        _preamble("validate", cfg, [f"seed: {mc.seed}", f"n_trials: {mc.n_trials}",
                                    f"generator: {GENERATOR}", f"p_fa: {fmt(args.p_fa)}"]),
        ["beta", "mean_snr_db", "pd_theory", "pd_mc", "std_err", "rel_err_pct"],
        rows,
        trailer,
    )
    _emit(buf.getvalue(), args.out)
    if args.out:
        for line in trailer:
            print(line)
    return 0


# -- resolution sweep -------------------------------------------------------------------------


def sweep_csv(cfg: ScenarioConfig, result: SweepResult) -> str:
    rows = [(p.delta_r_m, p.min_sigma0_db if p.converged else math.nan, p.rcs_min_m2, p.m,
             p.p_d_at_solution, p.converged) for p in result.points]
    trailer = []
    opt = result.optimum
    trailer.append(f"optimum delta_r_m={fmt(opt.delta_r_m)} min_sigma0_db={opt.min_sigma0_db:.4f} "
                   f"rcs_min_m2={opt.rcs_min_m2:.4f}")
    for end in (result.points[0], result.points[-1]):
        if end.converged:
            trailer.append(f"endpoint delta_r_m={fmt(end.delta_r_m)} min_sigma0_db={end.min_sigma0_db:.4f} "
                           f"rcs_min_m2={end.rcs_min_m2:.4f}")
        else:
            trailer.append(f"endpoint delta_r_m={fmt(end.delta_r_m)} status={end.status}")
    failed = [p for p in result.points if not p.converged]
    if failed:
        trailer.append("not converged: " + ", ".join(f"{fmt(p.delta_r_m)} ({p.status})" for p in failed))
    _, sar = cfg.band(result.band)
    buf = io.StringIO()
    write_csv(
        buf,
        _preamble("sweep", cfg, [f"band: {result.band}", f"p_d_target: {fmt(cfg.detection.p_d_target)}",
                                 f"window_overlap_model: {cfg.options.window_overlap_model}"]),
        ["delta_r_m", "min_sigma0_db", "rcs_min_m2", "m", "p_d", "converged"],
        rows,
        trailer,
    )
    return buf.getvalue()


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    bands = [args.band] if args.band else list(cfg.sar)
    values = None
    if args.delta_r is not None:
        values = args.delta_r
    for band in bands:
        cfg.band(band)
    texts = {band: sweep_csv(cfg, sweep(cfg, values, band=band)) for band in bands}
    if args.out and len(bands) > 1:
        out = Path(args.out)
        for band, text in texts.items():
            path = out.with_name(f"{out.stem}_{band}{out.suffix or '.csv'}")
            path.write_text(text, newline="")
            print(f"wrote {path}")
    elif args.out:
        _emit(texts[bands[0]], args.out)
    else:
        sys.stdout.write("".join(texts.values()))
    return 0


# -- single pipeline evaluation ---------------------------------------------------------------


PIPELINE_FIELDS = [
    ("a", "a", "-"),
    ("mean_snr", "mean_snr", "-"),
    ("alpha_prime", "alpha_prime", "-"),
    ("delta_r_m", "delta_r", "m"),
    ("delta_gr_m", "delta_gr", "m"),
    ("a_res_m2", "A_res", "m^2"),
    ("delta_min_m", "delta_min", "m"),
    ("counts.n_ps", "N_ps", "px"),
    ("counts.p_w", "P_w", "px"),
    ("counts.n_pw", "N_pw", "px"),
    ("counts.n_ps_w", "N_ps_w", "px"),
    ("counts.m", "m", "px"),
    ("p_d", "P_d", "-"),
    ("p_fa", "P_fa", "-"),
    ("p_d_ship", "P_D_sw", "-"),
    ("p_fa_ship", "P_FA_sw", "-"),
    ("p_fa_ship_full_window", "P_FA_sw_full_window", "-"),
    ("slant_range_m", "R", "m"),
    ("grazing_deg", "grazing", "deg"),
    ("v_orbital_ms", "V_so", "m/s"),
]


def _field(res: PipelineResult, dotted: str):
    obj = res
    for part in dotted.split("."):
        obj = getattr(obj, part)
    return obj


def cmd_pipeline(args) -> int:
    cfg = load_config(args.config)
    band, sar = cfg.band(args.band)
    delta_r = args.delta_r if args.delta_r is not None else radar.slant_res(sar)
    res = run_pipeline(cfg, radar.db_to_linear(args.sigma0_db), delta_r, band)
    buf = io.StringIO()
    if args.format == "csv":
        write_csv(buf, _preamble("pipeline", cfg, [f"band: {band}", f"sigma0_db: {fmt(args.sigma0_db)}"]),
                  ["quantity", "value", "unit"],
                  [(name, _field(res, attr), unit) for attr, name, unit in PIPELINE_FIELDS])
    else:
        buf.write(f"Pipeline, band {band}, mean sigma0 {args.sigma0_db:g} dB\n")
        for attr, name, unit in PIPELINE_FIELDS:
            buf.write(f"  {name:<20s} {fmt(_field(res, attr)):>18s} {unit}\n")
    _emit(buf.getvalue(), args.out)
    return 0


# -- entry point -------------------------------------------------------------------------


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sarfeas", description="Spaceborne SAR ship-detection feasibility.")
    parser.add_argument("--version", action="version", version=f"sarfeas {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=True):
        p.add_argument("config", help="scenario JSON file")
        p.add_argument("--out", help="write output here instead of stdout")
        if formats:
            p.add_argument("--format", choices=("text", "csv"), default="text")

    p = sub.add_parser("geometry", help="derived surveillance geometry")
    common(p)
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("validate", help="pixel Pd: quadrature vs Monte Carlo (CSV)")
    common(p, formats=False)
    p.add_argument("--nmc", type=int, help="Monte Carlo trials per grid point")
    p.add_argument("--seed", type=int)
    p.add_argument("--betas", type=_float_list, default=list(VALIDATE_BETAS))
    p.add_argument("--p-fa", type=float, default=VALIDATE_PFA)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="minimum detectable RCS versus slant resolution (CSV)")
    common(p, formats=False)
    p.add_argument("--band")
    p.add_argument("--delta-r", type=_float_list, help="explicit slant resolutions in m (comma-separated)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pipeline", help="every intermediate of one evaluation")
    common(p)
    p.add_argument("--band")
    p.add_argument("--sigma0-db", type=float, required=True)
    p.add_argument("--delta-r", type=float, help="slant resolution in m (default: from bandwidth)")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "nmc", None) is not None and args.nmc < 1:
        print("sarfeas: error: --nmc must be >= 1", file=sys.stderr)
        return ConfigError.exit_code
    try:
        return args.func(args)
    except SarfeasError as exc:
        print(f"sarfeas: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
