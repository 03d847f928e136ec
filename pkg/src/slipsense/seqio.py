"""Frame-sequence files, scenario files, CSV emitters, and minimal SVG.

A sequence is stored as two sibling files: ``<base>.json``, a human-readable
header, and ``<base>.bin``, a little-endian float32 payload with frames in
time order, fields in header order, and each field row-major n x m.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ScenarioError, SequenceFormatError
from .frames import DeformationFrame, NON_CONTACT
from .slipmap import EvaluationReport, SlipMap

FORMAT_VERSION = 1

POSITION_FIELDS = ("pos_x", "pos_y", "pos_z")
DISPLACEMENT_FIELDS = ("disp_x", "disp_y", "disp_z")
FORCE_FIELDS = ("force_x", "force_y", "force_z")
MASK_FIELD = "contact_mask"
KNOWN_FIELDS = (*POSITION_FIELDS, *DISPLACEMENT_FIELDS, *FORCE_FIELDS, MASK_FIELD)


@dataclass(frozen=True)
class SequenceHeader:
    version: int
    rows: int
    cols: int
    frame_rate_hz: float
    frame_count: int
    field_list: tuple[str, ...]
    units: dict

    def __post_init__(self):
        if self.version != FORMAT_VERSION:
            raise SequenceFormatError(f"unsupported format version {self.version}")
        if self.frame_rate_hz <= 0:
            raise SequenceFormatError("frame_rate_hz must be > 0")
        missing = [
            f for f in (*POSITION_FIELDS, *DISPLACEMENT_FIELDS) if f not in self.field_list
        ]
        if missing:
            raise SequenceFormatError(f"field_list lacks required fields: {missing}")
        unknown = [f for f in self.field_list if f not in KNOWN_FIELDS]
        if unknown:
            raise SequenceFormatError(f"unknown fields: {unknown}")

    @property
    def payload_bytes(self) -> int:
        return self.frame_count * len(self.field_list) * self.rows * self.cols * 4


def _paths(base) -> tuple[Path, Path]:
    base = Path(base)
    if base.suffix == ".json":
        base = base.with_suffix("")
    return base.with_suffix(".json"), base.with_suffix(".bin")


def _frame_fields(frame: DeformationFrame) -> dict[str, np.ndarray]:
    fields = {
        "pos_x": frame.pos[:, :, 0],
        "pos_y": frame.pos[:, :, 1],
        "pos_z": frame.pos[:, :, 2],
        "disp_x": frame.disp[:, :, 0],
        "disp_y": frame.disp[:, :, 1],
        "disp_z": frame.disp[:, :, 2],
    }
    if frame.force is not None:
        for c, name in enumerate(FORCE_FIELDS):
            fields[name] = frame.force[:, :, c]
    if frame.contact is not None:
        fields[MASK_FIELD] = frame.contact.astype(np.float32)
    return fields


def write_sequence(
    base,
    frames: list[DeformationFrame],
    frame_rate_hz: float,
    units: dict | None = None,
) -> SequenceHeader:
    """Write header and payload files; returns the header."""
    header_path, payload_path = _paths(base)
    if frames:
        rows, cols = frames[0].shape
        field_list = tuple(_frame_fields(frames[0]).keys())
    else:
        rows = cols = 0
        field_list = (*POSITION_FIELDS, *DISPLACEMENT_FIELDS)
    header = SequenceHeader(
        version=FORMAT_VERSION,
        rows=rows,
        cols=cols,
        frame_rate_hz=frame_rate_hz,
        frame_count=len(frames),
        field_list=field_list,
        units=units or {"length": "mm", "force": "N"},
    )
    header_path.write_text(
        json.dumps(
            {
                "version": header.version,
                "rows": header.rows,
                "cols": header.cols,
                "frame_rate_hz": header.frame_rate_hz,
                "frame_count": header.frame_count,
                "field_list": list(header.field_list),
                "units": header.units,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    with open(payload_path, "wb") as fh:
        for frame in frames:
            fields = _frame_fields(frame)
            if tuple(fields.keys()) != field_list:
                raise SequenceFormatError("frames carry inconsistent field sets")
            for name in field_list:
                fh.write(np.ascontiguousarray(fields[name], dtype="<f4").tobytes())
    return header


def read_sequence(base) -> tuple[SequenceHeader, list[DeformationFrame]]:
    """Read a sequence written by :func:`write_sequence`, bit exactly."""
    header_path, payload_path = _paths(base)
    try:
        raw = json.loads(header_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SequenceFormatError(f"unreadable header {header_path}: {exc}") from exc
    try:
        header = SequenceHeader(
            version=raw["version"],
            rows=raw["rows"],
            cols=raw["cols"],
            frame_rate_hz=raw["frame_rate_hz"],
            frame_count=raw["frame_count"],
            field_list=tuple(raw["field_list"]),
            units=raw["units"],
        )
    except KeyError as exc:
        raise SequenceFormatError(f"header missing key {exc}") from exc

    data = payload_path.read_bytes() if header.frame_count else b""
    if header.frame_count and len(data) != header.payload_bytes:
        raise SequenceFormatError(
            f"truncated payload: expected {header.payload_bytes} bytes, got {len(data)}"
        )
    n, m = header.rows, header.cols
    per_field = n * m
    per_frame = per_field * len(header.field_list)
    values = np.frombuffer(data, dtype="<f4")
    frames: list[DeformationFrame] = []
    for k in range(header.frame_count):
        chunk = values[k * per_frame : (k + 1) * per_frame]
        fields = {
            name: chunk[c * per_field : (c + 1) * per_field].reshape(n, m).astype(np.float64)
            for c, name in enumerate(header.field_list)
        }
        pos = np.stack([fields[f] for f in POSITION_FIELDS], axis=-1)
        if not np.isfinite(pos).all():
            raise SequenceFormatError(f"frame {k}: non-finite positions")
        disp = np.stack([fields[f] for f in DISPLACEMENT_FIELDS], axis=-1)
        force = None
        if all(f in fields for f in FORCE_FIELDS):
            force = np.stack([fields[f] for f in FORCE_FIELDS], axis=-1)
        contact = fields[MASK_FIELD] > 0.5 if MASK_FIELD in fields else None
        frames.append(
            DeformationFrame(
                t=k / header.frame_rate_hz, pos=pos, disp=disp, force=force, contact=contact
            )
        )
    return header, frames


# ---------------------------------------------------------------------------
# CSV emitters (stable headers, stable column order)
# ---------------------------------------------------------------------------

def write_slipmap_csv(path, maps: list[SlipMap]) -> None:
    from .slipmap import stick_slip_ratio

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "sr", "stick_count", "contact_count"])
        for sm in maps:
            sr = stick_slip_ratio(sm)
            w.writerow(
                [sm.frame_index, f"{sr:.9g}" if math.isfinite(sr) else "nan",
                 sm.stick_count, sm.contact_count]
            )


def write_states_csv(path, maps: list[SlipMap]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "i", "j", "state"])
        for sm in maps:
            n, m = sm.states.shape
            for i in range(n):
                for j in range(m):
                    w.writerow([sm.frame_index, i, j, int(sm.states[i, j])])


def read_states_csv(path) -> list[SlipMap]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append(
                (int(rec["frame"]), int(rec["i"]), int(rec["j"]), int(rec["state"]))
            )
    if not rows:
        raise SequenceFormatError(f"no state rows in {path}")
    frames = sorted({r[0] for r in rows})
    n = max(r[1] for r in rows) + 1
    m = max(r[2] for r in rows) + 1
    maps = {f: np.full((n, m), NON_CONTACT, dtype=np.int8) for f in frames}
    for f, i, j, s in rows:
        maps[f][i, j] = s
    return [SlipMap(frame_index=f, states=maps[f]) for f in frames]


def write_events_csv(path, events) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "t", "i", "j", "type", "value", "delta"])
        for ev in events:
            w.writerow(
                [ev.frame, f"{ev.t:.9g}", ev.i, ev.j, ev.kind, f"{ev.value:.9g}", f"{ev.delta:.9g}"]
            )


def read_events_csv(path):
    from .detector import GridEvent

    events = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            events.append(
                GridEvent(
                    frame=int(rec["frame"]),
                    t=float(rec["t"]),
                    i=int(rec["i"]),
                    j=int(rec["j"]),
                    kind=rec["type"],
                    value=float(rec["value"]),
                    delta=float(rec["delta"]),
                )
            )
    return events


def write_report_csv(path, report: EvaluationReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["frame", "sr_estimated", "sr_truth",
             "stick_stick", "stick_slip", "slip_stick", "slip_slip"]
        )
        for k, frame in enumerate(report.frames):
            cm = report.confusion[k]
            w.writerow(
                [
                    frame,
                    f"{report.sr_estimated[k]:.9g}",
                    f"{report.sr_truth[k]:.9g}",
                    int(cm[0, 0]),
                    int(cm[0, 1]),
                    int(cm[1, 0]),
                    int(cm[1, 1]),
                ]
            )


def write_report_summary_csv(path, report: EvaluationReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sr_rmse", "lag_le1_fraction", "coverage", "accuracy"])
        w.writerow(
            [
                f"{report.sr_rmse:.9g}",
                f"{report.lag_consistent_fraction:.9g}",
                f"{report.coverage:.9g}",
                f"{report.accuracy:.9g}",
            ]
        )


def write_samples_csv(path, samples) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "i", "j", "v", "f_n", "mu_hat"])
        for s in samples:
            w.writerow(
                [s.frame, s.node[0], s.node[1], f"{s.v:.9g}", f"{s.f_n:.9g}", f"{s.mu_hat:.9g}"]
            )


def write_model_csv(path, model) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["beta0", "beta1", "beta2", "sigma_eps", "sample_count",
             "stderr0", "stderr1", "stderr2"]
        )
        w.writerow(
            [
                f"{model.beta0:.9g}",
                f"{model.beta1:.9g}",
                f"{model.beta2:.9g}",
                f"{model.sigma_eps:.9g}",
                model.sample_count,
                f"{model.stderr[0]:.9g}",
                f"{model.stderr[1]:.9g}",
                f"{model.stderr[2]:.9g}",
            ]
        )


def write_profiles_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r_c", "r", "beta", "slip", "slip_derivative", "phi1", "phi2"])
        for rec in rows:
            w.writerow([f"{v:.9g}" for v in rec])


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------

def load_scenario(path) -> dict:
    """Load and structurally validate a scenario file."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"unreadable scenario {path}: {exc}") from exc
    model = raw.get("model")
    if model not in ("analytic", "beam_chain", "beam_lattice"):
        raise ScenarioError(f"unknown model {model!r}")
    if "params" not in raw or not isinstance(raw["params"], dict):
        raise ScenarioError("scenario lacks a params object")
    if "schedule" not in raw:
        raise ScenarioError("scenario lacks a schedule")
    return raw


def run_scenario(scenario: dict):
    """Produce ``(frames, truth_states, frame_rate_hz)`` for a scenario."""
    from . import beam, cattaneo

    model = scenario["model"]
    params = scenario["params"]
    rate = float(scenario.get("frame_rate_hz", 30.0))
    try:
        if model == "analytic":
            cp = cattaneo.ContactParams(
                normal_force=params["normal_force"],
                contact_radius=params["contact_radius"],
                friction_coefficient=params["friction_coefficient"],
                shear_modulus=params["shear_modulus"],
                poisson_ratio=params["poisson_ratio"],
            )
            sched = scenario["schedule"]
            if "stick_radii" in sched:
                forces = cattaneo.schedule_for_stick_radii(cp, sched["stick_radii"])
            else:
                forces = [float(v) for v in sched["tangential_forces"]]
            spec = cattaneo.SyntheticSequenceSpec(
                params=cp,
                grid_rows=params["grid_rows"],
                grid_cols=params["grid_cols"],
                grid_pitch=params["grid_pitch"],
                tangential_schedule=forces,
                frame_rate_hz=rate,
            )
            frames, truth = cattaneo.synthesize_sequence(spec)
            return frames, truth, rate
        if model == "beam_chain":
            chain = beam.default_chain(
                count=params.get("count", 31),
                k=params.get("k", 1.0),
                spacing=params.get("spacing", 1.0),
                bending=params.get("bending", 0.1),
                mu=params.get("mu", 0.4),
                peak_load=params.get("peak_load", 0.2),
                coupling=params.get("coupling", 1.0),
                profile=params.get("profile", "hertz"),
            )
            schedule = beam.make_schedule([tuple(s) for s in scenario["schedule"]])
            trace = beam.run_case(chain, schedule)
            frames, truth = beam.chain_frames(
                trace, rows=params.get("rows", 5), frame_rate_hz=rate
            )
            return frames, truth, rate
        # beam_lattice
        lat = beam.BeamLattice(
            rows=params["rows"],
            cols=params["cols"],
            coupling_stiffness=params.get("k", 1.0),
            spacing=params.get("spacing", 1.0),
            bending_stiffness=params.get("bending", 0.1),
            friction_coefficient=params.get("mu", 0.4),
            normal_loads=beam.hertzian_lattice_loads(
                params["rows"], params["cols"], params.get("peak_load", 0.2)
            ),
            normal_coupling=params.get("coupling", 0.0),
        )
        segments = [
            beam.LatticeSegment(
                duration=int(s[0]),
                velocity=(float(s[1]), float(s[2])),
                spin=float(s[3]),
                normal_scale=float(s[4]),
            )
            for s in scenario["schedule"]
        ]
        frames, truth = beam.lattice_run(lat, segments, frame_rate_hz=rate)
        return frames, truth, rate
    except KeyError as exc:
        raise ScenarioError(f"scenario missing parameter {exc}") from exc


# ---------------------------------------------------------------------------
# Minimal deterministic SVG emission
# ---------------------------------------------------------------------------

def svg_line_plot(path, xs, series, width: int = 640, height: int = 420) -> None:
    """Plot labelled (x, y) series as SVG polylines."""
    xs = np.asarray(xs, dtype=float)
    all_y = np.concatenate([np.asarray(ys, dtype=float) for _, ys in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(all_y.min()), float(all_y.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 40

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for idx, (label, ys) in enumerate(series):
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, np.asarray(ys, dtype=float)))
        color = colors[idx % len(colors)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(
            f'<text x="{pad}" y="{pad + 14 * idx}" fill="{color}" font-size="12">{label}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def svg_heatmap(path, grid, width: int = 480) -> None:
    """Render a 2-D array as a grayscale SVG cell map."""
    grid = np.asarray(grid, dtype=float)
    n, m = grid.shape
    lo, hi = float(np.nanmin(grid)), float(np.nanmax(grid))
    if hi == lo:
        hi = lo + 1.0
    cell = max(2, width // max(n, m))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{m * cell}" height="{n * cell}">'
    ]
    for i in range(n):
        for j in range(m):
            v = grid[i, j]
            level = 0 if not math.isfinite(v) else int(255 * (v - lo) / (hi - lo))
            parts.append(
                f'<rect x="{j * cell}" y="{i * cell}" width="{cell}" height="{cell}" '
                f'fill="rgb({level},{level},{level})"/>'
            )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
