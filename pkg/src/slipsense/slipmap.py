"""Slip maps, ground-truth contact factors, and estimate-vs-truth evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridError
from .frames import NON_CONTACT, SLIP, STICK

# Tangential forces below this are treated as numerical noise.
FORCE_FLOOR = 1e-3


@dataclass
class SlipMap:
    """Per-node discrete contact states of one frame."""

    frame_index: int
    states: np.ndarray
    cell_weights: np.ndarray | None = None

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.int8)
        if self.cell_weights is not None:
            self.cell_weights = np.asarray(self.cell_weights, dtype=np.float64)
            if self.cell_weights.shape != self.states.shape:
                raise GridError("cell_weights shape != states shape")

    @property
    def stick_count(self) -> int:
        return int(np.count_nonzero(self.states == STICK))

    @property
    def contact_count(self) -> int:
        return int(np.count_nonzero(self.states != NON_CONTACT))

    @property
    def ratio_defined(self) -> bool:
        return self.contact_count > 0


def contact_factor(f_t: float, f_n: float, mu: float, floor: float = FORCE_FLOOR):
    """Coulomb utilisation cf = f_t / (mu f_n) and the implied true state.

    Tangential forces below ``floor`` count as zero.  The cf = 1 boundary is
    assigned to slip.  Non-positive normal force marks the node non-contact
    and yields no cf.
    """
    if mu <= 0:
        raise DomainError("mu must be > 0")
    if f_n <= 0:
        return math.nan, NON_CONTACT
    f_t_eff = 0.0 if abs(f_t) < floor else abs(f_t)
    cf = f_t_eff / (mu * f_n)
    return cf, (SLIP if cf >= 1.0 else STICK)


def micro_forces(f, n):
    """Split a 3-D micro-element force into normal and tangential magnitudes.

    ``n`` must be a unit vector.  The normal part is -(f . n) n and the
    tangential part -f + (f . n) n, so the two vectors sum to -f exactly.
    Returns ``(f_n, f_t)`` as magnitudes.
    """
    f = np.asarray(f, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    if abs(np.linalg.norm(n) - 1.0) > 1e-6:
        raise DomainError("normal vector must have unit length")
    fn_vec = -np.dot(f, n) * n
    ft_vec = -f + np.dot(f, n) * n
    return float(np.linalg.norm(fn_vec)), float(np.linalg.norm(ft_vec))


def stick_slip_ratio(slip_map: SlipMap, weighted: bool = False) -> float:
    """Fraction of the contact region that sticks.

    Counts nodes by default; ``weighted=True`` uses the map's cell weights
    for non-uniform grids.  Returns NaN when no node is in contact.
    """
    states = slip_map.states
    contact = states != NON_CONTACT
    if weighted:
        if slip_map.cell_weights is None:
            raise DomainError("weighted ratio requires cell_weights")
        total = float(slip_map.cell_weights[contact].sum())
        if total <= 0:
            return math.nan
        return float(slip_map.cell_weights[states == STICK].sum()) / total
    total = int(np.count_nonzero(contact))
    if total == 0:
        return math.nan
    return int(np.count_nonzero(states == STICK)) / total


@dataclass
class EvaluationReport:
    """Estimate-vs-truth comparison over an aligned slip-map sequence.

    Per-frame confusion matrices cover nodes in contact in both maps
    (estimated non-contact inside the truth contact region is reported via
    ``coverage``).  Detection lag is the first estimated slip frame minus the
    first true slip frame; positive means late.
    """

    frames: list[int]
    confusion: list[np.ndarray]  # 2x2 per frame: rows truth {stick, slip}
    sr_estimated: list[float]
    sr_truth: list[float]
    sr_rmse: float
    lags: dict[tuple[int, int], float]
    lag_consistent_fraction: float
    coverage: float
    accuracy: float

    def lag_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for v in self.lags.values():
            if math.isfinite(v):
                hist[int(v)] = hist.get(int(v), 0) + 1
        return hist


def _first_slip_frames(maps: list[SlipMap]) -> dict[tuple[int, int], int]:
    first: dict[tuple[int, int], int] = {}
    for k, sm in enumerate(maps):
        for i, j in zip(*np.nonzero(sm.states == SLIP)):
            key = (int(i), int(j))
            if key not in first:
                first[key] = k
    return first


def evaluate(estimated: list[SlipMap], truth: list[SlipMap]) -> EvaluationReport:
    """Compare estimated slip maps against ground truth frame by frame."""
    if len(estimated) != len(truth):
        raise GridError(
            f"sequence lengths differ: {len(estimated)} estimated vs {len(truth)} truth"
        )
    if not truth:
        raise GridError("empty sequences")
    shape = truth[0].states.shape
    for sm in (*estimated, *truth):
        if sm.states.shape != shape:
            raise GridError("slip maps have mismatched grids")

    frames = []
    confusion = []
    sr_est = []
    sr_tru = []
    agree = 0
    assessed = 0
    covered = 0
    truth_contact_total = 0
    for est, tru in zip(estimated, truth):
        frames.append(tru.frame_index)
        tru_contact = tru.states != NON_CONTACT
        est_contact = est.states != NON_CONTACT
        both = tru_contact & est_contact
        truth_contact_total += int(np.count_nonzero(tru_contact))
        covered += int(np.count_nonzero(both))
        cm = np.zeros((2, 2), dtype=np.int64)
        for ti, ts in enumerate((STICK, SLIP)):
            for ei, es in enumerate((STICK, SLIP)):
                cm[ti, ei] = np.count_nonzero(both & (tru.states == ts) & (est.states == es))
        confusion.append(cm)
        agree += int(cm[0, 0] + cm[1, 1])
        assessed += int(cm.sum())
        sr_est.append(stick_slip_ratio(est))
        sr_tru.append(stick_slip_ratio(tru))

    diffs = [
        (a - b) ** 2
        for a, b in zip(sr_est, sr_tru)
        if math.isfinite(a) and math.isfinite(b)
    ]
    sr_rmse = math.sqrt(sum(diffs) / len(diffs)) if diffs else math.nan

    est_first = _first_slip_frames(estimated)
    tru_first = _first_slip_frames(truth)
    ever_covered = set()
    for est, tru in zip(estimated, truth):
        both = (tru.states != NON_CONTACT) & (est.states != NON_CONTACT)
        for i, j in zip(*np.nonzero(both)):
            ever_covered.add((int(i), int(j)))

    lags: dict[tuple[int, int], float] = {}
    consistent = 0
    judged = 0
    for key in sorted(ever_covered):
        t0 = tru_first.get(key)
        e0 = est_first.get(key)
        if t0 is None and e0 is None:
            continue
        judged += 1
        if t0 is None or e0 is None:
            lags[key] = math.inf if e0 is None else -math.inf
        else:
            lags[key] = float(e0 - t0)
            if abs(lags[key]) <= 1:
                consistent += 1

    return EvaluationReport(
        frames=frames,
        confusion=confusion,
        sr_estimated=sr_est,
        sr_truth=sr_tru,
        sr_rmse=sr_rmse,
        lags=lags,
        lag_consistent_fraction=(consistent / judged) if judged else 1.0,
        coverage=(covered / truth_contact_total) if truth_contact_total else 1.0,
        accuracy=(agree / assessed) if assessed else 1.0,
    )
