"""Command-line interface: simulate, detect, evaluate, fit-friction, profiles.

Exit codes: 0 success, 2 usage (including refusing to overwrite without
--force), 3 input/format errors, 4 solver errors, 5 detector configuration
errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import seqio
from .cattaneo import ContactParams, phi1, phi2, slip_profile
from .detector import PeakDetectorConfig
from .errors import (
    DetectorConfigError,
    DomainError,
    ScenarioError,
    SequenceFormatError,
    SlipsenseError,
    SolverError,
    UnsupportedInputError,
)
from .frames import NON_CONTACT
from .friction import collect_samples, fit_linear
from .pipeline import run_detection
from .slipmap import SlipMap, evaluate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_SOLVER = 4
EXIT_DETECTOR = 5


class _CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _ensure_writable(paths, force: bool):
    for p in paths:
        if Path(p).exists() and not force:
            raise _CliError(f"refusing to overwrite {p} (use --force)", EXIT_USAGE)


def _config_from_args(args) -> PeakDetectorConfig:
    kwargs = {}
    for name in ("lag", "z_threshold", "influence", "positive_floor_coeff", "contact_fraction"):
        v = getattr(args, name, None)
        if v is not None:
            kwargs[name] = v
    return PeakDetectorConfig(**kwargs)


def _cmd_simulate(args) -> int:
    scenario = seqio.load_scenario(args.scenario)
    out = Path(args.out)
    header_path = out.with_suffix(".json")
    payload_path = out.with_suffix(".bin")
    truth_path = out.parent / (out.name + "_truth_states.csv")
    truth_sr_path = out.parent / (out.name + "_truth_slipmap.csv")
    _ensure_writable([header_path, payload_path, truth_path, truth_sr_path], args.force)

    frames, truth, rate = seqio.run_scenario(scenario)
    seqio.write_sequence(out, frames, rate)
    maps = [SlipMap(frame_index=k, states=st) for k, st in enumerate(truth)]
    seqio.write_states_csv(truth_path, maps)
    seqio.write_slipmap_csv(truth_sr_path, maps)
    print(f"wrote {len(frames)} frames to {header_path} / {payload_path}")
    print(f"wrote truth states to {truth_path}")
    return EXIT_OK


def _cmd_detect(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    slipmap_path = out_dir / "slipmap.csv"
    states_path = out_dir / "states.csv"
    events_path = out_dir / "events.csv"
    _ensure_writable([slipmap_path, states_path, events_path], args.force)

    _, frames = seqio.read_sequence(args.sequence)
    config = _config_from_args(args)
    maps, events = run_detection(frames, config)
    seqio.write_slipmap_csv(slipmap_path, maps)
    seqio.write_states_csv(states_path, maps)
    seqio.write_events_csv(events_path, events)
    print(f"processed {len(frames)} frames, {len(events)} events")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.csv"
    summary_path = out_dir / "summary.csv"
    _ensure_writable([report_path, summary_path], args.force)

    est = seqio.read_states_csv(args.estimated)
    tru = seqio.read_states_csv(args.truth)
    report = evaluate(est, tru)
    seqio.write_report_csv(report_path, report)
    seqio.write_report_summary_csv(summary_path, report)
    print(
        f"sr_rmse={report.sr_rmse:.6g} lag_le1={report.lag_consistent_fraction:.6g} "
        f"coverage={report.coverage:.6g} accuracy={report.accuracy:.6g}"
    )
    return EXIT_OK


def _cmd_fit_friction(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    samples_path = out_dir / "samples.csv"
    model_path = out_dir / "model.csv"
    _ensure_writable([samples_path, model_path], args.force)

    _, frames = seqio.read_sequence(args.sequence)
    events = seqio.read_events_csv(args.events)
    samples = collect_samples(events, frames)
    seqio.write_samples_csv(samples_path, samples)
    model = fit_linear(samples)
    seqio.write_model_csv(model_path, model)
    print(
        f"mu = {model.beta0:.6g} + {model.beta1:.6g} v + {model.beta2:.6g} f_n"
        f"   (sigma_eps = {model.sigma_eps:.6g}, n = {model.sample_count})"
    )
    return EXIT_OK


def _cmd_profiles(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "profiles.csv"
    targets = [csv_path]
    if args.svg:
        targets += [out_dir / "slip.svg", out_dir / "slip_derivative.svg"]
    _ensure_writable(targets, args.force)

    params = ContactParams(
        normal_force=args.normal_force,
        contact_radius=args.contact_radius,
        friction_coefficient=args.friction,
        shear_modulus=args.shear_modulus,
        poisson_ratio=args.poisson,
    )
    radii = [float(v) for v in args.stick_radii.split(",")]
    rs = np.linspace(0.0, params.contact_radius, args.samples)
    rows = []
    slip_series = []
    deriv_series = []
    for r_c in radii:
        slips = []
        derivs = []
        for r in rs:
            pt = slip_profile(params, r_c, float(r))
            beta = r / r_c
            rows.append((r_c, r, beta, pt.slip, pt.slip_derivative, phi1(beta), phi2(beta)))
            slips.append(pt.slip)
            derivs.append(pt.slip_derivative)
        slip_series.append((f"r_c={r_c:g}", slips))
        deriv_series.append((f"r_c={r_c:g}", derivs))
    seqio.write_profiles_csv(csv_path, rows)
    if args.svg:
        seqio.svg_line_plot(out_dir / "slip.svg", rs, slip_series)
        seqio.svg_line_plot(out_dir / "slip_derivative.svg", rs, deriv_series)
    print(f"wrote {len(rows)} profile rows for {len(radii)} stick radii")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slipsense",
        description="Partial-slip contact simulation and incipient-slip detection",
    )
    parser.add_argument("--seed", type=int, default=0, help="fixed seed for reproducible runs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario file and write frames plus truth")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True, help="output base path (writes .json and .bin)")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("detect", help="detect slip states over a frame sequence")
    p.add_argument("--sequence", required=True, help="sequence base path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--lag", type=int)
    p.add_argument("--z-threshold", dest="z_threshold", type=float)
    p.add_argument("--influence", type=float)
    p.add_argument("--positive-floor", dest="positive_floor_coeff", type=float)
    p.add_argument("--contact-fraction", dest="contact_fraction", type=float)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("evaluate", help="compare estimated states against truth")
    p.add_argument("--estimated", required=True, help="states.csv of the estimate")
    p.add_argument("--truth", required=True, help="states.csv of the ground truth")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("fit-friction", help="harvest slip-onset samples and fit the friction law")
    p.add_argument("--sequence", required=True)
    p.add_argument("--events", required=True, help="events.csv from detect")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_fit_friction)

    p = sub.add_parser("profiles", help="tabulate slip profiles and their derivatives")
    p.add_argument("--normal-force", type=float, default=10.0)
    p.add_argument("--contact-radius", type=float, default=3.0)
    p.add_argument("--friction", type=float, default=0.4)
    p.add_argument("--shear-modulus", type=float, default=1.0)
    p.add_argument("--poisson", type=float, default=0.3)
    p.add_argument("--stick-radii", default="1.5,1.25,1.0,0.75,0.5")
    p.add_argument("--samples", type=int, default=601)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_profiles)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (SequenceFormatError, ScenarioError, UnsupportedInputError, DomainError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DetectorConfigError as exc:
        print(f"detector config error: {exc}", file=sys.stderr)
        return EXIT_DETECTOR
    except SlipsenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
