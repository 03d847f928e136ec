"""Streaming extreme-event detection and the per-node slip state machine.

Each node runs an independent z-score peak detector on the signed
characteristic-strain rate.  A confirmed positive apex marks the onset of
local slip, a confirmed negative trough marks its end, and contact on/off
cues (normal displacement, or normal force when available) gate the whole
machine.  Events are emitted causally: an apex is reported on the first
sample that falls away from it, stamped with the apex frame.

Positive candidates below ``positive_floor_coeff * cstrain / dt`` are
suppressed; this filters the sub-peaks produced by purely normal contact
changes.  The same floor is applied on the negative side so that the slow
strain decay trailing a slip front cannot masquerade as a slip-to-stick
event.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean, pstdev

import numpy as np

from .errors import DetectorConfigError, GridError, SequencingError
from .frames import NON_CONTACT, SLIP, STICK
from .slipmap import SlipMap
from .strain import CStrainRateField

EVENT_POS = "pos_extreme"
EVENT_NEG = "neg_extreme"
EVENT_CONTACT_ON = "contact_on"
EVENT_CONTACT_OFF = "contact_off"


@dataclass(frozen=True)
class PeakDetectorConfig:
    """z-score detector parameters.

    ``lag`` is the rolling-window length in frames, ``z_threshold`` the
    trigger level in standard deviations, ``influence`` the weight of
    triggered samples in the rolling statistics, and the floor coefficients
    scale the current characteristic strain into a minimum admissible
    extreme magnitude.  ``contact_fraction`` sets the contact cue threshold
    as a fraction of the sequence's peak indentation or normal force.
    """

    lag: int = 5
    z_threshold: float = 3.0
    influence: float = 0.3
    positive_floor_coeff: float = 0.1
    negative_floor_coeff: float = 0.1
    contact_fraction: float = 0.02

    def __post_init__(self):
        if self.lag < 2:
            raise DetectorConfigError("lag must be >= 2")
        if self.z_threshold <= 0:
            raise DetectorConfigError("z_threshold must be > 0")
        if not 0.0 <= self.influence <= 1.0:
            raise DetectorConfigError("influence must lie in [0, 1]")
        if self.positive_floor_coeff < 0 or self.negative_floor_coeff < 0:
            raise DetectorConfigError("floor coefficients must be >= 0")


@dataclass
class NodeEvent:
    """One detector event at a single node."""

    frame: int
    kind: str
    value: float
    delta: float


class NodeDetector:
    """Streaming detector and slip state machine for one node.

    Feed samples strictly in frame order via :meth:`update`.  The node state
    is one of the codes in :mod:`slipsense.frames`; transitions happen only
    on emitted events.
    """

    def __init__(
        self,
        config: PeakDetectorConfig,
        dt: float,
        uz_threshold: float = 0.0,
        fn_threshold: float | None = None,
    ):
        if dt <= 0:
            raise DetectorConfigError("dt must be > 0")
        self.config = config
        self.dt = dt
        self.uz_threshold = uz_threshold
        self.fn_threshold = fn_threshold
        self.state = NON_CONTACT
        self.last_frame: int | None = None
        self.last_event: NodeEvent | None = None
        self._reset_signal()

    def _reset_signal(self):
        self.window: list[float] = []
        self.filtered_prev = 0.0
        self.samples_seen = 0
        self._in_pos = False
        self._in_neg = False
        self._consumed = False
        self._peak_value = 0.0
        self._peak_frame = 0
        self._peak_delta = 0.0
        self._peak_cstrain = 0.0

    def _contact_cue(self, u_z: float, f_n: float | None) -> bool:
        if self.fn_threshold is not None and f_n is not None:
            return f_n > self.fn_threshold
        return abs(u_z) > self.uz_threshold

    def _set_peak(self, value: float, frame: int, delta: float, cstrain: float):
        self._peak_value = value
        self._peak_frame = frame
        self._peak_delta = delta
        self._peak_cstrain = cstrain

    def _emit(self, kind: str, frame: int) -> NodeEvent:
        ev = NodeEvent(frame=frame, kind=kind, value=0.0, delta=0.0)
        self.last_event = ev
        return ev

    def _try_fire(self, positive: bool) -> NodeEvent | None:
        """Close the current excursion; fire its apex if the gates pass."""
        self._consumed = True
        coeff = (
            self.config.positive_floor_coeff if positive else self.config.negative_floor_coeff
        )
        if self._peak_delta < coeff * self._peak_cstrain / self.dt:
            return None
        if positive and self.state == STICK:
            self.state = SLIP
            kind = EVENT_POS
        elif not positive and self.state == SLIP:
            self.state = STICK
            kind = EVENT_NEG
        else:
            return None
        ev = NodeEvent(
            frame=self._peak_frame, kind=kind, value=self._peak_value, delta=self._peak_delta
        )
        self.last_event = ev
        return ev

    def update(
        self,
        frame: int,
        delta: float,
        signed: float,
        u_z: float = 0.0,
        f_n: float | None = None,
        cstrain: float = 0.0,
        sample_valid: bool = True,
    ) -> NodeEvent | None:
        """Consume one frame sample; return the emitted event, if any."""
        if self.last_frame is not None and frame <= self.last_frame:
            raise SequencingError(f"frame {frame} not after {self.last_frame}")
        self.last_frame = frame

        contact = self._contact_cue(u_z, f_n)
        if self.state == NON_CONTACT:
            if not contact:
                return None
            self.state = STICK
            self._reset_signal()
            return self._emit(EVENT_CONTACT_ON, frame)
        if not contact:
            self.state = NON_CONTACT
            self._reset_signal()
            return self._emit(EVENT_CONTACT_OFF, frame)

        if not sample_valid:
            return None

        cfg = self.config
        y = signed
        event: NodeEvent | None = None

        if self.samples_seen < cfg.lag:
            # warm-up: no signals until the window fills
            self.window.append(y)
            self.filtered_prev = y
            self.samples_seen += 1
            return None

        mean = fmean(self.window)
        std = pstdev(self.window)
        if abs(y - mean) > cfg.z_threshold * std:
            signal = 1 if y > mean else -1
            filtered = cfg.influence * y + (1.0 - cfg.influence) * self.filtered_prev
        else:
            signal = 0
            filtered = y

        if signal == 1:
            if self._in_neg:
                if not self._consumed:
                    event = self._try_fire(positive=False)
                self._in_neg = False
            if not self._in_pos:
                self._in_pos = True
                self._consumed = False
                self._set_peak(y, frame, delta, cstrain)
            elif y >= self._peak_value:
                # flat apex: keep the latest top sample as the apex frame
                self._set_peak(y, frame, delta, cstrain)
            elif not self._consumed:
                event = self._try_fire(positive=True)
        elif signal == -1:
            if self._in_pos:
                if not self._consumed:
                    event = self._try_fire(positive=True)
                self._in_pos = False
            if not self._in_neg:
                self._in_neg = True
                self._consumed = False
                self._set_peak(y, frame, delta, cstrain)
            elif y <= self._peak_value:
                self._set_peak(y, frame, delta, cstrain)
            elif not self._consumed:
                event = self._try_fire(positive=False)
        else:
            if self._in_pos and not self._consumed:
                event = self._try_fire(positive=True)
            elif self._in_neg and not self._consumed:
                event = self._try_fire(positive=False)
            self._in_pos = False
            self._in_neg = False

        self.window.append(filtered)
        if len(self.window) > cfg.lag:
            self.window.pop(0)
        self.filtered_prev = filtered
        self.samples_seen += 1
        return event


@dataclass
class GridEvent:
    """Detector event with grid coordinates and timestamp."""

    frame: int
    t: float
    i: int
    j: int
    kind: str
    value: float
    delta: float


class GridDetector:
    """Applies one :class:`NodeDetector` per node of a measurement grid."""

    def __init__(
        self,
        shape: tuple[int, int],
        config: PeakDetectorConfig,
        dt: float,
        uz_threshold: float = 0.0,
        fn_threshold: float | None = None,
    ):
        self.shape = shape
        self.config = config
        self.dt = dt
        self.nodes = [
            [NodeDetector(config, dt, uz_threshold, fn_threshold) for _ in range(shape[1])]
            for _ in range(shape[0])
        ]
        self.events: list[GridEvent] = []
        self._frame = -1
        self._t_prev: float | None = None

    def states(self) -> np.ndarray:
        out = np.empty(self.shape, dtype=np.int8)
        for i in range(self.shape[0]):
            for j in range(self.shape[1]):
                out[i, j] = self.nodes[i][j].state
        return out

    def step_frame(
        self,
        t: float,
        rate: CStrainRateField,
        cstrain: np.ndarray,
        u_z: np.ndarray,
        f_n: np.ndarray | None = None,
    ) -> SlipMap:
        """Process one frame of fields; returns the per-frame slip map."""
        if rate.delta.shape != self.shape:
            raise GridError(f"rate field grid {rate.delta.shape} != detector grid {self.shape}")
        for name, arr in (("cstrain", cstrain), ("u_z", u_z)):
            if arr.shape != self.shape:
                raise GridError(f"{name} grid {arr.shape} != detector grid {self.shape}")
        if f_n is not None and f_n.shape != self.shape:
            raise GridError(f"f_n grid {f_n.shape} != detector grid {self.shape}")
        if self._t_prev is not None and t <= self._t_prev:
            raise SequencingError(f"frame time {t} not after {self._t_prev}")
        self._t_prev = t
        self._frame += 1
        frame = self._frame

        for i in range(self.shape[0]):
            row = self.nodes[i]
            for j in range(self.shape[1]):
                ev = row[j].update(
                    frame,
                    delta=float(rate.delta[i, j]) if rate.valid[i, j] else 0.0,
                    signed=float(rate.signed_rate[i, j]) if rate.valid[i, j] else 0.0,
                    u_z=float(u_z[i, j]),
                    f_n=float(f_n[i, j]) if f_n is not None else None,
                    cstrain=float(cstrain[i, j]),
                    sample_valid=bool(rate.valid[i, j]),
                )
                if ev is not None:
                    self.events.append(
                        GridEvent(
                            frame=ev.frame,
                            t=t,
                            i=i,
                            j=j,
                            kind=ev.kind,
                            value=ev.value,
                            delta=ev.delta,
                        )
                    )
        return SlipMap(frame_index=frame, states=self.states())
