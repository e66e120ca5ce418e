"""Command line interface: ``radar-lowrank <command> [options]``.

Commands
--------
synth     write a synthetic reflectivity field (+ JSON sidecar)
lowrank   truncate a field to a fraction of its singular values
sample    draw an observation set from a field
complete  recover a matrix from an observation set with SVT
eval      error metrics and histograms for original/low-rank/reconstruction
render    8-bit PGM image (and optional PNG / singular value export)
doppler   simulate a gate's IQ series, periodogram and pulse-pair moments
pipeline  synth -> lowrank -> sample -> complete -> eval -> render in one go

Every command accepts ``--seed``, ``--out``, ``--format {csv,bin}`` and
``--config FILE``.  The config file holds ``key = value`` lines named after
the long options; explicit flags win over the file, which wins over the
built-in defaults.

Exit codes: 0 success, 1 I/O failure, 2 validation error, 3 solver divergence.
Set ``RADAR_LOWRANK_THREADS`` to cap BLAS threads.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io
from .completion import SvtConfig, default_svt_config, svt_complete
from .errors import ConfigWarning, Divergence, RadarLowRankError, UnreliableEstimate, ValidationError
from .evaluation import error_report, histograms, truncate_fraction
from .field import FieldSpec, synthesize_field
from .masks import SCHEMES, MaskSpec, apply_mask, make_mask
from .matrix import singular_value_profile
from .radar import (
    RadarParams,
    ScattererScene,
    SpectrumMoments,
    estimate_moments,
    expected_weather_spectrum,
    num_range_bins,
    periodogram,
    range_bin_length,
    synthesize_point_target_iq,
    synthesize_weather_iq,
)

log = logging.getLogger("radar_lowrank")

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_DIVERGENCE = 0, 1, 2, 3
MATRIX_SUFFIX = {"csv": ".csv", "bin": ".rlrm"}


def _fraction(text):
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a fraction: {text!r}") from exc


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list: {text!r}") from exc


def _bool(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value.strip("\"'")
    return out


def _out_path(args, default_stem):
    if args.out:
        return Path(args.out)
    return Path(default_stem + MATRIX_SUFFIX[args.format])


def _sibling(path, suffix):
    path = Path(path)
    return path.with_name(path.stem + suffix)


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def _svt_config(args, omega):
    cfg = default_svt_config(omega)
    overrides = {
        "tau": args.tau,
        "delta": args.delta,
        "max_iters": args.max_iters,
        "tolerance": args.tol,
        "inner_rank_cap": args.rank_cap,
    }
    return dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


def _svt_summary(result, cfg):
    return {
        "config": dataclasses.asdict(cfg),
        "iterations_used": result.iterations_used,
        "final_residual": result.final_residual,
        "converged": result.converged,
        "rank_of_solution": result.rank_of_solution,
    }


def _write_residuals(path, history):
    with open(path, "w") as fh:
        fh.write("iteration,residual\n")
        for k, r in enumerate(history, 1):
            fh.write(f"{k},{r!r}\n")
    return path


def _field_spec(args):
    base = FieldSpec.paper_scale() if args.paper_scale else FieldSpec()
    overrides = {
        "n_range": args.rows,
        "n_azimuth": args.cols,
        "correlation_length_range": args.corr_range,
        "correlation_length_azimuth": args.corr_azimuth,
        "mean_dbz": args.mean_dbz,
        "std_dbz": args.std_dbz,
        "coverage_fraction": args.coverage,
        "floor_dbz": args.floor_dbz,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return dataclasses.replace(base, seed=args.seed, **overrides)


# -- commands ---------------------------------------------------------------


def cmd_synth(args):
    spec = _field_spec(args)
    field = synthesize_field(spec)
    out = _out_path(args, "field")
    io.write_matrix(out, field, args.format)
    _write_json(_sibling(out, ".json"), spec.to_dict())
    print(f"wrote {out} ({field.rows}x{field.cols}, synthetic)")
    return EXIT_OK


def cmd_lowrank(args):
    field = io.read_matrix(args.matrix)
    approx, factors, kept = truncate_fraction(field, args.keep_fraction)
    out = _out_path(args, "lowrank")
    io.write_matrix(out, approx, args.format)
    _write_json(_sibling(out, ".json"), {
        "source": str(args.matrix),
        "keep_fraction": args.keep_fraction,
        "numerical_rank": factors.rank,
        "kept": kept,
        "tail_energy": float(np.sqrt(np.sum(factors.singular_values[kept:] ** 2))),
    })
    print(f"wrote {out} (kept {kept} of {factors.rank} singular values)")
    return EXIT_OK


def cmd_sample(args):
    field = io.read_matrix(args.matrix)
    spec = MaskSpec(field.shape, args.fraction, args.scheme, args.seed, args.dwell_ratio)
    omega = apply_mask(field, make_mask(spec))
    out = Path(args.out) if args.out else Path("observations.csv")
    io.write_observations(out, omega)
    print(f"wrote {out} ({len(omega)} entries, p={omega.sampling_fraction:.6f})")
    return EXIT_OK


def cmd_complete(args):
    omega = io.read_observations(args.observations)
    cfg = _svt_config(args, omega)
    out = _out_path(args, "reconstructed")
    try:
        result = svt_complete(omega, cfg)
    except Divergence as exc:
        _write_residuals(_sibling(out, "_residuals.csv"), exc.history)
        raise
    io.write_matrix(out, result.X_hat, args.format)
    _write_residuals(_sibling(out, "_residuals.csv"), result.residual_history)
    summary = _svt_summary(result, cfg)
    _write_json(_sibling(out, "_svt.json"), summary)
    if args.figure:
        from . import plotting

        plotting.residual_figure(args.figure, result.residual_history, cfg.tolerance)
    state = "converged" if result.converged else "NOT converged"
    print(f"wrote {out}: {state} after {result.iterations_used} iterations, "
          f"residual {result.final_residual:.3e}, rank {result.rank_of_solution}")
    return EXIT_OK


def _eval_payload(z, zt, zh, bin_width):
    report = error_report(z, zt, zh)
    hists = histograms({"original": z, "lowrank": zt, "reconstructed": zh}, bin_width)
    payload = report.to_dict()
    payload["histograms"] = {k: h.to_dict() for k, h in hists.items()}
    return report, hists, payload


def cmd_eval(args):
    z, zt, zh = (io.read_matrix(p) for p in (args.original, args.lowrank, args.reconstructed))
    report, hists, payload = _eval_payload(z, zt, zh, args.bin_width)
    out = Path(args.out) if args.out else Path("report.json")
    _write_json(out, payload)
    if args.figure:
        from . import plotting

        plotting.histogram_figure(args.figure, hists)
    print(json.dumps(report.to_dict()))
    return EXIT_OK


def cmd_render(args):
    field = io.read_matrix(args.matrix)
    mask = None
    if args.mask:
        omega = io.read_observations(args.mask)
        if omega.shape != field.shape:
            raise ValidationError(f"mask shape {omega.shape} does not match field {field.shape}")
        mask = omega.mask()
    out = Path(args.out) if args.out else Path("field.pgm")
    io.write_pgm(out, field.values, mask)
    sigma = None
    if args.singular_values or args.sv_figure:
        sigma = singular_value_profile(field)
    if args.singular_values:
        io.write_vector_csv(args.singular_values, sigma)
    if args.figure or args.sv_figure:
        from . import plotting

        if args.figure:
            plotting.field_figure(args.figure, field.values, mask=mask)
        if args.sv_figure:
            plotting.singular_value_figure(args.sv_figure, sigma)
    print(f"wrote {out}")
    return EXIT_OK


def _radar_params(args):
    return RadarParams(args.wavelength, args.prf, args.pulse_width, args.max_range, args.radar_constant)


def cmd_doppler(args):
    params = _radar_params(args)
    n_bins = num_range_bins(params)
    if n_bins == 0:
        warnings.warn(f"max_range {params.max_range:g} m is shorter than one range bin "
                      f"({range_bin_length(params):.3f} m)", ConfigWarning)
    expected = None
    if args.scenario == "point":
        velocities = args.velocities
        amps = args.amplitudes or [1.0] * len(velocities)
        if len(amps) != len(velocities):
            raise ValidationError("--amplitudes must match --velocities in length")
        ranges = [0.5 * params.max_range] * len(velocities)
        scene = ScattererScene(ranges, amps, velocities)
        iq = synthesize_point_target_iq(scene, params, args.n_pulses)
    else:
        moments = SpectrumMoments(args.power_dbm, args.mean_velocity, args.spectrum_width)
        iq = synthesize_weather_iq(moments, params, args.n_pulses, args.noise_dbm, args.seed)
        _, expected = expected_weather_spectrum(moments, params, args.n_pulses, args.noise_dbm)
    out = Path(args.out) if args.out else Path("iq.csv")
    io.write_iq(out, iq)
    v, power = periodogram(iq, params)
    io.write_vector_csv(_sibling(out, "_spectrum.csv"), np.column_stack([v, power]),
                        header="velocity,power_mw")
    info = {
        "scenario": args.scenario,
        "range_bin_length_m": range_bin_length(params),
        "num_range_bins": n_bins,
        "nyquist_velocity": params.nyquist_velocity,
    }
    try:
        est = estimate_moments(iq, params)
        info["moments"] = dataclasses.asdict(est)
        info["reliable"] = True
    except UnreliableEstimate as exc:
        info["moments"] = dataclasses.asdict(exc.moments) if exc.moments else None
        info["reliable"] = False
        info["warning"] = str(exc)
    _write_json(_sibling(out, "_moments.json"), info)
    if args.figure:
        from . import plotting

        plotting.doppler_figure(args.figure, v, power, expected, params.nyquist_velocity)
    print(json.dumps(info))
    return EXIT_OK


def cmd_pipeline(args):
    outdir = Path(args.out) if args.out else Path("pipeline_out")
    outdir.mkdir(parents=True, exist_ok=True)
    ext = MATRIX_SUFFIX[args.format]
    spec = _field_spec(args)
    z = synthesize_field(spec)
    io.write_matrix(outdir / f"original{ext}", z, args.format)
    _write_json(outdir / "original.json", spec.to_dict())

    zt, factors, kept = truncate_fraction(z, args.keep_fraction)
    io.write_matrix(outdir / f"lowrank{ext}", zt, args.format)
    io.write_vector_csv(outdir / "singular_values.csv", singular_value_profile(z))

    mspec = MaskSpec(z.shape, args.fraction, args.scheme, args.seed, args.dwell_ratio)
    omega = apply_mask(zt, make_mask(mspec))
    io.write_observations(outdir / "observations.csv", omega)

    cfg = _svt_config(args, omega)
    try:
        result = svt_complete(omega, cfg)
    except Divergence as exc:
        _write_residuals(outdir / "residuals.csv", exc.history)
        raise
    io.write_matrix(outdir / f"reconstructed{ext}", result.X_hat, args.format)
    _write_residuals(outdir / "residuals.csv", result.residual_history)

    report, hists, payload = _eval_payload(z, zt, result.X_hat, args.bin_width)
    payload["svt"] = _svt_summary(result, cfg)
    payload["numerical_rank"] = factors.rank
    payload["kept"] = kept
    payload["sampled"] = len(omega)
    _write_json(outdir / "report.json", payload)

    for name, a, mask in (("original", z, None), ("lowrank", zt, None),
                          ("sampled", zt, omega.mask()), ("reconstructed", result.X_hat, None)):
        io.write_pgm(outdir / f"{name}.pgm", a.values, mask)
    if not args.no_figures:
        from . import plotting

        plotting.pipeline_figure(outdir / "fields.png", z.values, zt.values, omega.mask(),
                                 result.X_hat.values, report)
        plotting.histogram_figure(outdir / "histograms.png", hists)
        plotting.singular_value_figure(outdir / "singular_values.png", factors.singular_values)
        plotting.residual_figure(outdir / "residuals.png", result.residual_history, cfg.tolerance)
    summary = {k: v for k, v in payload["svt"].items() if k != "config"}
    print(json.dumps({**report.to_dict(), **summary}))
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--out", help="output path (directory for pipeline)")
    p.add_argument("--format", choices=("csv", "bin"), default="csv",
                   help="matrix output format (default csv)")
    p.add_argument("--config", help="key = value file supplying option defaults")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _add_field_flags(p):
    g = p.add_argument_group("field")
    g.add_argument("--paper-scale", action="store_true",
                   help="1930 x 413 field with proportionally scaled correlation lengths")
    g.add_argument("--rows", type=int, help="range gates (default 200)")
    g.add_argument("--cols", type=int, help="azimuth rays (default 100)")
    g.add_argument("--corr-range", type=float, help="correlation length along range, cells")
    g.add_argument("--corr-azimuth", type=float, help="correlation length along azimuth, cells")
    g.add_argument("--mean-dbz", type=float)
    g.add_argument("--std-dbz", type=float)
    g.add_argument("--coverage", type=float, help="wet-cell fraction in [0, 1]")
    g.add_argument("--floor-dbz", type=float, help="dry-cell value (default 0 dBZ)")


def _add_mask_flags(p):
    g = p.add_argument_group("sampling")
    g.add_argument("--fraction", type=_fraction, default=1.0 / 3.0,
                   help="sampled fraction, e.g. 1/3 (default)")
    g.add_argument("--scheme", choices=SCHEMES, default="uniform_entries")
    g.add_argument("--dwell-ratio", type=_fraction,
                   help="azimuth_miss: fraction of rays kept in full (default fraction/2)")


def _add_svt_flags(p):
    g = p.add_argument_group("SVT (defaults: tau=5 sqrt(mn), delta=1.2/p, 500 iters, tol 1e-4)")
    g.add_argument("--tau", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--max-iters", type=int)
    g.add_argument("--tol", type=float)
    g.add_argument("--rank-cap", type=int, help="cap on the rank of each iterate")


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(
        prog="radar-lowrank",
        description="Sparse sampling and low-rank completion of radar reflectivity fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="synthesize a reflectivity field")
    _add_field_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("lowrank", parents=[common], help="truncated-SVD approximation")
    p.add_argument("matrix")
    p.add_argument("--keep-fraction", type=_fraction, default=0.25,
                   help="fraction of singular values retained (default 0.25)")
    p.set_defaults(func=cmd_lowrank)

    p = sub.add_parser("sample", parents=[common], help="draw an observation set")
    p.add_argument("matrix")
    _add_mask_flags(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("complete", parents=[common], help="SVT matrix completion")
    p.add_argument("observations")
    _add_svt_flags(p)
    p.add_argument("--figure", help="PNG of the residual history")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("eval", parents=[common], help="error metrics and histograms")
    p.add_argument("original")
    p.add_argument("lowrank")
    p.add_argument("reconstructed")
    p.add_argument("--bin-width", type=float, default=1.0, help="histogram bin width, dBZ")
    p.add_argument("--figure", help="PNG of the three histograms")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", parents=[common], help="PGM image and singular values")
    p.add_argument("matrix")
    p.add_argument("--mask", help="observation file; unobserved cells render black")
    p.add_argument("--singular-values", help="CSV path for the descending singular values")
    p.add_argument("--figure", help="PNG rendering of the field")
    p.add_argument("--sv-figure", help="PNG plot of the singular value profile")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser(
        "doppler", parents=[common], help="simulate one gate's Doppler signature",
        description="Positive velocity = approaching target = positive Doppler shift.",
    )
    p.add_argument("--scenario", choices=("point", "weather"), default="weather")
    p.add_argument("--n-pulses", type=int, default=64)
    p.add_argument("--wavelength", type=float, default=0.032, help="m")
    p.add_argument("--prf", type=float, default=2000.0, help="Hz")
    p.add_argument("--pulse-width", type=float, default=1e-6, help="s")
    p.add_argument("--max-range", type=float, default=30e3, help="m")
    p.add_argument("--radar-constant", type=float, default=70.0, help="dB")
    p.add_argument("--power-dbm", type=float, default=0.0)
    p.add_argument("--mean-velocity", type=float, default=6.0, help="m/s")
    p.add_argument("--spectrum-width", type=float, default=3.5, help="m/s")
    p.add_argument("--noise-dbm", type=float, default=None, help="white noise power (default none)")
    p.add_argument("--velocities", type=_floats, default=[-10.0, -4.0, 5.0, 12.0],
                   help="point targets, comma separated m/s")
    p.add_argument("--amplitudes", type=_floats, default=None)
    p.add_argument("--figure", help="PNG of the periodogram")
    p.set_defaults(func=cmd_doppler)

    p = sub.add_parser("pipeline", parents=[common], help="run the full reconstruction experiment")
    _add_field_flags(p)
    p.add_argument("--keep-fraction", type=_fraction, default=0.25)
    _add_mask_flags(p)
    _add_svt_flags(p)
    p.add_argument("--bin-width", type=float, default=1.0)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_pipeline)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for subparser in sub.choices.values():
        actions = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, value in values.items():
            action = actions.get(key)
            if action is None:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = _bool(value)
            else:
                defaults[key] = action.type(value) if action.type else value
        subparser.set_defaults(**defaults)


def _thread_limit():
    n = os.environ.get("RADAR_LOWRANK_THREADS")
    if not n:
        return None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(n)))


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    limiter = _thread_limit()
    try:
        return args.func(args)
    except Divergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RadarLowRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        if limiter is not None:
            limiter.restore_original_limits()


if __name__ == "__main__":
    sys.exit(main())
