"""End-to-end detection pipelines over frame sequences and beam traces."""

from __future__ import annotations

import numpy as np

from .beam import BeamTrace, trace_detector_channels
from .detector import GridDetector, GridEvent, NodeDetector, NodeEvent, PeakDetectorConfig
from .errors import GridError
from .frames import DeformationFrame, check_sequence
from .slipmap import SlipMap
from .strain import cstrain_rate, frame_strain


def detection_thresholds(
    frames: list[DeformationFrame], fraction: float
) -> tuple[float, float | None]:
    """Absolute contact-cue thresholds for a sequence.

    The indentation cue triggers above ``fraction`` of the peak normal
    displacement magnitude; when force fields are present the normal-force
    cue (at the same fraction of the peak pressing force) is used instead.
    """
    uz_peak = max(float(np.max(np.abs(fr.disp[:, :, 2]))) for fr in frames)
    fn_thr = None
    if all(fr.force is not None for fr in frames):
        fn_peak = max(float(np.max(np.clip(-fr.force[:, :, 2], 0.0, None))) for fr in frames)
        fn_thr = fraction * fn_peak
    return fraction * uz_peak, fn_thr


def run_detection(
    frames: list[DeformationFrame],
    config: PeakDetectorConfig | None = None,
) -> tuple[list[SlipMap], list[GridEvent]]:
    """Detect per-node slip states over a full frame sequence.

    Emits one slip map per frame (the first frame carries contact cues
    only).  Returns ``(maps, events)``.
    """
    if len(frames) < 2:
        raise GridError("need at least two frames")
    check_sequence(frames)
    config = config or PeakDetectorConfig()
    shape = frames[0].shape
    uz_thr, fn_thr = detection_thresholds(frames, config.contact_fraction)

    strains = [frame_strain(fr) for fr in frames]
    det = GridDetector(shape, config, dt=frames[1].t - frames[0].t, uz_threshold=uz_thr, fn_threshold=fn_thr)

    def frame_fn(fr: DeformationFrame):
        if fr.force is None:
            return None
        return np.clip(-fr.force[:, :, 2], 0.0, None)

    maps = []
    # frame 0: contact cues only, zero rates
    zero = np.zeros(shape)
    from .strain import CStrainRateField

    rate0 = CStrainRateField(
        dt=1.0,
        e1_rate=zero,
        e2_rate=zero,
        delta=zero,
        signed_rate=zero,
        valid=strains[0].valid,
    )
    maps.append(
        det.step_frame(
            frames[0].t,
            rate0,
            cstrain=strains[0].cstrain,
            u_z=frames[0].disp[:, :, 2],
            f_n=frame_fn(frames[0]),
        )
    )
    for t in range(1, len(frames)):
        dt = frames[t].t - frames[t - 1].t
        rate = cstrain_rate(strains[t - 1], strains[t], dt)
        maps.append(
            det.step_frame(
                frames[t].t,
                rate,
                cstrain=strains[t].cstrain,
                u_z=frames[t].disp[:, :, 2],
                f_n=frame_fn(frames[t]),
            )
        )
    return maps, det.events


def detect_on_trace(
    trace: BeamTrace, config: PeakDetectorConfig | None = None
) -> tuple[np.ndarray, list[list[NodeEvent]]]:
    """Run per-node detection directly on a beam-chain trace.

    Returns ``(states, events)`` where ``states[t, i]`` is the estimated
    state after step t and ``events[i]`` the event list of beam i.
    """
    config = config or PeakDetectorConfig()
    delta, signed, cstrain, f_n = trace_detector_channels(trace)
    fn_thr = config.contact_fraction * float(np.max(f_n))
    n = trace.beam_count
    nodes = [NodeDetector(config, dt=1.0, fn_threshold=fn_thr) for _ in range(n)]
    states = np.empty((trace.steps, n), dtype=np.int8)
    events: list[list[NodeEvent]] = [[] for _ in range(n)]
    for t in range(trace.steps):
        for i, node in enumerate(nodes):
            ev = node.update(
                t,
                delta=float(delta[t, i]),
                signed=float(signed[t, i]),
                f_n=float(f_n[t, i]),
                cstrain=float(cstrain[t, i]),
            )
            if ev is not None:
                events[i].append(ev)
            states[t, i] = node.state
    return states, events
