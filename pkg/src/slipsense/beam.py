"""Quasi-static stick-slip simulators built from virtual elastic beams.

A soft pad is modelled as a row (or lattice) of bending beams whose free
ends touch a rigid object through Coulomb friction.  Neighbouring free ends
are coupled by linear springs of stiffness ``k``; each beam restores its tip
toward zero with bending stiffness ``b_i``.  The object is displacement
driven; each load step advances it by ``du`` and rescales the normal load
profile, and the new equilibrium is the minimiser of

    0.5 * w' K w  +  sum_i  mu * f_n_i * |w_i - (u_i + du)|

over tip displacements ``w``.  The nonsmooth term is the Coulomb slider
between tip and object: a tip either rides with the object exactly (stick)
or sits at the friction bound with the force opposing its relative motion
(slip).  The minimiser is unique and is found by an active-set method with
exact tridiagonal solves (chains) or by projected Gauss-Seidel with a
closed-form per-node shrinkage (lattices).

Normal load also stiffens the beams: the effective bending stiffness is
``b_i * (1 + coupling * (scale - 1))``.  This is the compression-tangential
coupling of bent beams; raising the normal load on a sheared pad makes the
displaced tips spring back differentially, which reproduces the observed
strain release and re-stick during normal force increases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, SolverError
from .frames import NON_CONTACT, SLIP, STICK, DeformationFrame, flat_grid

STEP_DT = 1.0  # schedules are expressed per load step

_REL_TOL = 1e-12


def hertzian_load_profile(count: int, peak: float, span: float = 0.9) -> np.ndarray:
    """Discrete Hertz-like normal load profile over a chain.

    Loads follow peak * sqrt(1 - (x / R)^2) with the nodes spread over
    ``span`` of the contact radius, so edge beams keep a small positive load.
    """
    if count < 2 or peak <= 0 or not 0 < span < 1:
        raise DomainError("need count >= 2, peak > 0, 0 < span < 1")
    x = np.linspace(-span, span, count)
    return peak * np.sqrt(1.0 - x**2)


def uniform_load_profile(count: int, value: float) -> np.ndarray:
    if count < 1 or value <= 0:
        raise DomainError("need count >= 1 and value > 0")
    return np.full(count, float(value))


@dataclass
class BeamChain:
    """One-dimensional beam chain and its current quasi-static state."""

    coupling_stiffness: float
    spacing: float
    bending_stiffness: np.ndarray
    friction_coefficient: float
    normal_loads: np.ndarray
    normal_coupling: float = 0.0
    object_displacement: float = 0.0
    normal_scale: float = 1.0
    displacements: np.ndarray | None = None
    states: np.ndarray | None = None
    friction_forces: np.ndarray | None = None

    def __post_init__(self):
        self.bending_stiffness = np.asarray(self.bending_stiffness, dtype=np.float64)
        self.normal_loads = np.asarray(self.normal_loads, dtype=np.float64)
        n = self.normal_loads.shape[0]
        if self.bending_stiffness.ndim == 0:
            self.bending_stiffness = np.full(n, float(self.bending_stiffness))
        if self.coupling_stiffness <= 0 or self.spacing <= 0:
            raise DomainError("coupling_stiffness and spacing must be > 0")
        if self.friction_coefficient <= 0:
            raise DomainError("friction_coefficient must be > 0")
        if np.any(self.bending_stiffness < 0) or np.any(self.normal_loads < 0):
            raise DomainError("bending stiffness and normal loads must be >= 0")
        if self.bending_stiffness.shape[0] != n:
            raise DomainError("bending_stiffness length != normal_loads length")
        if self.displacements is None:
            self.displacements = np.zeros(n)
        else:
            self.displacements = np.asarray(self.displacements, dtype=np.float64).copy()
        if self.friction_forces is None:
            self.friction_forces = np.zeros(n)
        if self.states is None:
            self.states = np.where(self.normal_loads > 0, STICK, NON_CONTACT).astype(np.int8)

    @property
    def beam_count(self) -> int:
        return self.normal_loads.shape[0]

    def effective_bending(self, scale: float) -> np.ndarray:
        return self.bending_stiffness * (1.0 + self.normal_coupling * (scale - 1.0))

    def friction_bounds(self, scale: float) -> np.ndarray:
        return self.friction_coefficient * self.normal_loads * scale

    def strains(self) -> np.ndarray:
        """eps_i = (u_i - u_{i-1}) / spacing; the edge beam has no left spring."""
        eps = np.zeros(self.beam_count)
        eps[1:] = np.diff(self.displacements) / self.spacing
        return eps

    def elastic_energy(self) -> float:
        w = self.displacements
        b_eff = self.effective_bending(self.normal_scale)
        spring = 0.5 * self.coupling_stiffness * float(np.sum(np.diff(w) ** 2))
        bend = 0.5 * float(np.sum(b_eff * w**2))
        return spring + bend


def _chain_demand(k: float, b_eff: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Friction force each node must supply for equilibrium: (K w)_i."""
    e = b_eff * w
    e[:-1] += k * (w[:-1] - w[1:])
    e[1:] += k * (w[1:] - w[:-1])
    return e


def _solve_slip_subset(
    k: float,
    b_eff: np.ndarray,
    targets: np.ndarray,
    slip_idx: np.ndarray,
    rhs_bound: np.ndarray,
) -> np.ndarray:
    """Solve the tridiagonal equilibrium for slip nodes with stick nodes pinned."""
    n = targets.shape[0]
    ns = slip_idx.shape[0]
    deg = np.ones(n)
    deg[1:-1] = 2.0
    if n == 1:
        deg[0] = 0.0
    diag_full = b_eff + k * deg
    sub = np.zeros(ns)
    sup = np.zeros(ns)
    adjacent = np.diff(slip_idx) == 1
    sup[:-1] = np.where(adjacent, -k, 0.0)
    sub[1:] = np.where(adjacent, -k, 0.0)

    rhs = rhs_bound.copy()
    stick_mask = np.ones(n, dtype=bool)
    stick_mask[slip_idx] = False
    left = slip_idx - 1
    has_left = left >= 0
    take = has_left & stick_mask[np.clip(left, 0, n - 1)]
    rhs[take] += k * targets[left[take]]
    right = slip_idx + 1
    has_right = right <= n - 1
    take = has_right & stick_mask[np.clip(right, 0, n - 1)]
    rhs[take] += k * targets[right[take]]

    ab = np.zeros((3, ns))
    ab[0, 1:] = sup[:-1]
    ab[1] = diag_full[slip_idx]
    ab[2, :-1] = sub[1:]
    return solve_banded((1, 1), ab, rhs)


def _chain_gs_solve(
    w: np.ndarray,
    targets: np.ndarray,
    k: float,
    b_eff: np.ndarray,
    bounds: np.ndarray,
    tol: float,
    max_sweeps: int = 200000,
) -> np.ndarray:
    """Projected Gauss-Seidel with closed-form Coulomb shrinkage per node.

    Coordinate descent on the strictly convex step objective; unconditionally
    convergent, used as the fallback when the active-set iteration cycles.
    """
    n = targets.shape[0]
    deg = np.ones(n)
    deg[1:-1] = 2.0
    if n == 1:
        deg[0] = 0.0
    a_diag = b_eff + k * deg
    even = np.arange(0, n, 2)
    odd = np.arange(1, n, 2)

    def neighbor_sum(x):
        s = np.zeros_like(x)
        s[:-1] += x[1:]
        s[1:] += x[:-1]
        return s

    for _ in range(max_sweeps):
        for idx in (even, odd):
            c = k * neighbor_sum(w)
            g = c[idx] - a_diag[idx] * targets[idx]
            amt = np.clip(np.abs(g) - bounds[idx], 0.0, None) / a_diag[idx]
            w[idx] = targets[idx] + np.sign(g) * amt
        demand = _chain_demand(k, b_eff, w)
        v = w - targets
        stick = v == 0.0
        res = float(np.max(np.clip(np.abs(demand[stick]) - bounds[stick], 0.0, None), initial=0.0))
        if np.any(~stick):
            res = max(
                res,
                float(np.max(np.abs(demand[~stick] + bounds[~stick] * np.sign(v[~stick])))),
            )
        if res < tol:
            return w
    raise SolverError(f"Gauss-Seidel fallback exceeded {max_sweeps} sweeps", residual=res)


def quasi_static_step(chain: BeamChain, du: float, normal_scale: float | None = None) -> BeamChain:
    """Advance the object by ``du`` and return the new equilibrium chain.

    The stick/slip partition is found by fixed-point iteration over the
    stick set: stick nodes ride with the object, slip nodes sit at the
    Coulomb bound with the friction sign opposing their relative motion.
    If the partition cycles, a projected Gauss-Seidel solve of the same
    convex step objective takes over.  Raises :class:`SolverError` if the
    equilibrium residual cannot be brought below 1e-10 * k * spacing.
    """
    scale = chain.normal_scale if normal_scale is None else float(normal_scale)
    if scale <= 0:
        raise DomainError("normal_scale must be > 0")
    k = chain.coupling_stiffness
    n = chain.beam_count
    b_eff = chain.effective_bending(scale)
    bounds = chain.friction_bounds(scale)
    targets = chain.displacements + du
    force_ref = k * chain.spacing
    tol_f = 1e-10 * force_ref

    w = targets.copy()
    slipping = np.zeros(n, dtype=bool)
    sigma = np.zeros(n)
    prev_slip = chain.states == SLIP
    if np.any(prev_slip):
        slipping[prev_slip] = True
        sigma[prev_slip] = np.sign(chain.friction_forces[prev_slip])
        sigma[prev_slip & (sigma == 0)] = math.copysign(1.0, du if du != 0 else 1.0)

    max_iter = 60 + 4 * n
    settled = False
    for _ in range(max_iter):
        solved_slip = slipping.copy()
        idx = np.nonzero(slipping)[0]
        if idx.size:
            w[idx] = _solve_slip_subset(k, b_eff, targets, idx, sigma[idx] * bounds[idx])
        w[~slipping] = targets[~slipping]
        demand = _chain_demand(k, b_eff, w)
        v = w - targets

        # slip nodes present in the solve whose motion stopped or opposes
        # their friction sign re-stick; fresh flips keep their assignment
        wrong = solved_slip & (sigma * v >= 0)
        viol = (~slipping) & (np.abs(demand) > bounds + 0.01 * tol_f)
        if not np.any(wrong) and not np.any(viol):
            settled = True
            break
        slipping[wrong] = False
        sigma[wrong] = 0.0
        slipping[viol] = True
        sigma[viol] = np.sign(demand[viol])

    if not settled:
        w = _chain_gs_solve(targets.copy(), targets, k, b_eff, bounds, tol_f)
        v = w - targets
        slipping = v != 0.0
        sigma = -np.sign(v)
        demand = _chain_demand(k, b_eff, w)

    residual = _partition_residual(demand, bounds, slipping, sigma, w - targets)
    if residual > tol_f:
        raise SolverError("equilibrium residual too large", residual=residual)

    f_s = demand.copy()
    f_s[slipping] = sigma[slipping] * bounds[slipping]
    states = np.where(chain.normal_loads > 0, np.where(slipping, SLIP, STICK), NON_CONTACT)
    return replace(
        chain,
        object_displacement=chain.object_displacement + du,
        normal_scale=scale,
        displacements=w,
        states=states.astype(np.int8),
        friction_forces=f_s,
    )


def _partition_residual(demand, bounds, slipping, sigma, v) -> float:
    res = 0.0
    stick = ~slipping
    if np.any(stick):
        res = max(res, float(np.max(np.clip(np.abs(demand[stick]) - bounds[stick], 0.0, None))))
    if np.any(slipping):
        res = max(res, float(np.max(np.abs(demand[slipping] - sigma[slipping] * bounds[slipping]))))
        res = max(res, float(np.max(np.clip(sigma[slipping] * v[slipping], 0.0, None))))
    return res


@dataclass(frozen=True)
class ScheduleSegment:
    """A constant-velocity span of a loading program.

    ``normal_scale`` is the multiplier on the normal load profile reached at
    the end of the segment; it ramps linearly from the previous segment's
    end value.
    """

    duration: int
    velocity: float
    normal_scale: float = 1.0

    def __post_init__(self):
        if self.duration <= 0:
            raise DomainError("segment duration must be positive")
        if self.normal_scale <= 0:
            raise DomainError("normal_scale must be > 0")


@dataclass(frozen=True)
class LoadSchedule:
    segments: tuple[ScheduleSegment, ...]

    def __post_init__(self):
        if not self.segments:
            raise DomainError("schedule needs at least one segment")

    @property
    def total_steps(self) -> int:
        return sum(s.duration for s in self.segments)


def make_schedule(segments: Sequence[tuple[int, float, float]]) -> LoadSchedule:
    return LoadSchedule(tuple(ScheduleSegment(*s) for s in segments))


@dataclass
class BeamTrace:
    """Per-step history of a chain run; arrays are indexed [step, beam]."""

    spacing: float
    normal_loads: np.ndarray
    friction_coefficient: float
    u_object: np.ndarray
    scale: np.ndarray
    displacements: np.ndarray
    strains: np.ndarray
    strain_rates: np.ndarray
    friction_forces: np.ndarray
    states: np.ndarray
    total_force: np.ndarray

    @property
    def steps(self) -> int:
        return self.displacements.shape[0]

    @property
    def beam_count(self) -> int:
        return self.displacements.shape[1]

    def first_transition(self, to_state: int) -> np.ndarray:
        """First step at which each beam enters ``to_state``; -1 if never."""
        out = np.full(self.beam_count, -1, dtype=np.int64)
        for i in range(self.beam_count):
            hits = np.nonzero(self.states[:, i] == to_state)[0]
            if hits.size:
                out[i] = hits[0]
        return out

    def transition_steps(self, from_state: int, to_state: int) -> list[list[int]]:
        """All steps at which each beam switches from one state to the other."""
        prev = np.full(self.beam_count, STICK, dtype=np.int8)
        prev[self.normal_loads <= 0] = NON_CONTACT
        out: list[list[int]] = [[] for _ in range(self.beam_count)]
        for t in range(self.steps):
            cur = self.states[t]
            for i in np.nonzero((prev == from_state) & (cur == to_state))[0]:
                out[i].append(t)
            prev = cur
        return out


def run_case(chain: BeamChain, schedule: LoadSchedule) -> BeamTrace:
    """Drive the chain through a schedule and record the full history."""
    steps = schedule.total_steps
    n = chain.beam_count
    u_obj = np.empty(steps)
    scales = np.empty(steps)
    disp = np.empty((steps, n))
    eps = np.empty((steps, n))
    rate = np.empty((steps, n))
    f_s = np.empty((steps, n))
    states = np.empty((steps, n), dtype=np.int8)
    total = np.empty(steps)

    cur = chain
    eps_prev = cur.strains()
    t = 0
    scale_prev = cur.normal_scale
    for seg in schedule.segments:
        for s in range(1, seg.duration + 1):
            sc = scale_prev + (seg.normal_scale - scale_prev) * s / seg.duration
            cur = quasi_static_step(cur, seg.velocity * STEP_DT, sc)
            e = cur.strains()
            u_obj[t] = cur.object_displacement
            scales[t] = sc
            disp[t] = cur.displacements
            eps[t] = e
            rate[t] = (e - eps_prev) / STEP_DT
            f_s[t] = cur.friction_forces
            states[t] = cur.states
            total[t] = float(np.sum(cur.friction_forces))
            eps_prev = e
            t += 1
        scale_prev = seg.normal_scale

    return BeamTrace(
        spacing=chain.spacing,
        normal_loads=chain.normal_loads.copy(),
        friction_coefficient=chain.friction_coefficient,
        u_object=u_obj,
        scale=scales,
        displacements=disp,
        strains=eps,
        strain_rates=rate,
        friction_forces=f_s,
        states=states,
        total_force=total,
    )


# ---------------------------------------------------------------------------
# Reference scenarios
# ---------------------------------------------------------------------------

def case1_schedule(hold: int = 15, ramp: int = 240, velocity: float = 0.01) -> LoadSchedule:
    """Unidirectional tangential loading under constant normal force."""
    return make_schedule([(hold, 0.0, 1.0), (ramp, velocity, 1.0)])


def case2_schedule(
    hold: int = 15,
    ramp: int = 120,
    velocity: float = 0.01,
    normal_ramp: int = 120,
    normal_scale: float = 2.0,
) -> LoadSchedule:
    """Tangential loading followed by a normal force increase."""
    return make_schedule(
        [(hold, 0.0, 1.0), (ramp, velocity, 1.0), (normal_ramp, 0.0, normal_scale)]
    )


def case3_schedule(
    hold: int = 15, ramp: int = 120, velocity: float = 0.01, reverse: int = 200
) -> LoadSchedule:
    """Tangential loading followed by velocity reversal through zero force."""
    return make_schedule([(hold, 0.0, 1.0), (ramp, velocity, 1.0), (reverse, -velocity, 1.0)])


def repeated_loading_schedule(
    hold: int = 15,
    ramp1: int = 120,
    velocity: float = 0.01,
    normal_ramp: int = 100,
    normal_scale: float = 2.0,
    ramp2: int = 160,
) -> LoadSchedule:
    """Tangential ramp, normal force doubling, then a second tangential ramp."""
    return make_schedule(
        [
            (hold, 0.0, 1.0),
            (ramp1, velocity, 1.0),
            (normal_ramp, 0.0, normal_scale),
            (ramp2, velocity, normal_scale),
        ]
    )


def default_chain(
    count: int = 31,
    k: float = 1.0,
    spacing: float = 1.0,
    bending: float = 0.1,
    mu: float = 0.4,
    peak_load: float = 0.2,
    coupling: float = 1.0,
    profile: str = "hertz",
) -> BeamChain:
    if profile == "hertz":
        loads = hertzian_load_profile(count, peak_load)
    elif profile == "uniform":
        loads = uniform_load_profile(count, peak_load)
    else:
        raise DomainError(f"unknown load profile {profile!r}")
    return BeamChain(
        coupling_stiffness=k,
        spacing=spacing,
        bending_stiffness=np.full(count, bending),
        friction_coefficient=mu,
        normal_loads=loads,
        normal_coupling=coupling,
    )


# ---------------------------------------------------------------------------
# Detector channels and frame embedding for chain traces
# ---------------------------------------------------------------------------

def trace_detector_channels(trace: BeamTrace):
    """Per-node detector inputs derived from a chain trace.

    Returns ``(delta, signed, cstrain, f_n)`` arrays indexed [step, beam].
    The characteristic strain of the one-dimensional field is the magnitude
    of its only nonzero principal component; ``signed`` is its rate and
    ``delta`` the magnitude of the principal increment, matching the
    two-dimensional pipeline.
    """
    eps_gl = trace.strains + 0.5 * trace.strains**2
    c = np.abs(eps_gl)
    c_prev = np.vstack([np.zeros((1, trace.beam_count)), c[:-1]])
    gl_prev = np.vstack([np.zeros((1, trace.beam_count)), eps_gl[:-1]])
    signed = (c - c_prev) / STEP_DT
    delta = np.abs(eps_gl - gl_prev) / STEP_DT
    f_n = trace.normal_loads[None, :] * trace.scale[:, None]
    return delta, signed, c, f_n


def chain_frames(trace: BeamTrace, rows: int = 5, frame_rate_hz: float = 30.0):
    """Embed a chain trace into a frame sequence for the field pipeline.

    The chain is replicated across ``rows`` identical grid rows so central
    difference stencils have support; replicated padding rows are marked
    non-contact in the truth maps (the chain itself is the centre row).
    Returns ``(frames, truth_states)``.
    """
    if rows < 3:
        raise DomainError("need at least 3 rows")
    n_cols = trace.beam_count
    pos = flat_grid(rows, n_cols, trace.spacing)
    centre = rows // 2
    frames = []
    truth = []
    for t in range(trace.steps):
        disp = np.zeros((rows, n_cols, 3))
        disp[:, :, 0] = trace.displacements[t][None, :]
        force = np.zeros((rows, n_cols, 3))
        force[:, :, 0] = trace.friction_forces[t][None, :]
        force[:, :, 2] = -(trace.normal_loads * trace.scale[t])[None, :]
        frames.append(
            DeformationFrame(
                t=t / frame_rate_hz,
                pos=pos.copy(),
                disp=disp,
                force=force,
                contact=np.broadcast_to(trace.normal_loads > 0, (rows, n_cols)).copy(),
            )
        )
        st = np.full((rows, n_cols), NON_CONTACT, dtype=np.int8)
        st[centre] = trace.states[t]
        truth.append(st)
    return frames, truth


# ---------------------------------------------------------------------------
# Two-dimensional lattice
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeSegment:
    """Rigid-motion span: translation velocity, spin rate, end normal scale."""

    duration: int
    velocity: tuple[float, float] = (0.0, 0.0)
    spin: float = 0.0
    normal_scale: float = 1.0

    def __post_init__(self):
        if self.duration <= 0:
            raise DomainError("segment duration must be positive")
        if self.normal_scale <= 0:
            raise DomainError("normal_scale must be > 0")


@dataclass
class BeamLattice:
    """Nearest-neighbour spring lattice with per-node Coulomb sliders."""

    rows: int
    cols: int
    coupling_stiffness: float
    spacing: float
    bending_stiffness: float
    friction_coefficient: float
    normal_loads: np.ndarray
    normal_coupling: float = 0.0

    def __post_init__(self):
        if self.rows < 3 or self.cols < 3:
            raise DomainError("lattice must be at least 3 x 3")
        self.normal_loads = np.asarray(self.normal_loads, dtype=np.float64)
        if self.normal_loads.shape != (self.rows, self.cols):
            raise DomainError("normal_loads shape != (rows, cols)")
        if min(self.coupling_stiffness, self.spacing) <= 0:
            raise DomainError("coupling_stiffness and spacing must be > 0")
        if self.bending_stiffness < 0 or self.friction_coefficient <= 0:
            raise DomainError("bad bending stiffness or friction coefficient")


def hertzian_lattice_loads(rows: int, cols: int, peak: float, span: float = 0.9) -> np.ndarray:
    xi = np.linspace(-span, span, rows)[:, None]
    yj = np.linspace(-span, span, cols)[None, :]
    r2 = xi**2 + yj**2
    return peak * np.sqrt(np.clip(1.0 - r2, 0.0, None))


def _lattice_neighbor_sum(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum of neighbour displacements and neighbour counts."""
    s = np.zeros_like(w)
    s[1:, :] += w[:-1, :]
    s[:-1, :] += w[1:, :]
    s[:, 1:] += w[:, :-1]
    s[:, :-1] += w[:, 1:]
    deg = np.full(w.shape[:2], 4.0)
    deg[0, :] -= 1
    deg[-1, :] -= 1
    deg[:, 0] -= 1
    deg[:, -1] -= 1
    return s, deg


def _lattice_solve(
    w: np.ndarray,
    targets: np.ndarray,
    k: float,
    b_eff: float,
    bounds: np.ndarray,
    spacing: float,
    max_sweeps: int = 20000,
) -> np.ndarray:
    """Projected Gauss-Seidel with per-node vector shrinkage."""
    rows, cols = w.shape[:2]
    ii, jj = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    colors = [(ii + jj) % 2 == 0, (ii + jj) % 2 == 1]
    _, deg = _lattice_neighbor_sum(w[..., 0])
    a_diag = k * deg + b_eff
    tol = 1e-10 * k * spacing

    for sweep in range(max_sweeps):
        for mask in colors:
            sx, _ = _lattice_neighbor_sum(w[..., 0])
            sy, _ = _lattice_neighbor_sum(w[..., 1])
            c = np.stack([k * sx, k * sy], axis=-1)
            g = c - a_diag[..., None] * targets
            gnorm = np.linalg.norm(g, axis=-1)
            with np.errstate(invalid="ignore", divide="ignore"):
                ghat = np.where(gnorm[..., None] > 0, g / np.where(gnorm == 0, 1, gnorm)[..., None], 0.0)
            slip_amt = np.clip(gnorm - bounds, 0.0, None) / a_diag
            w_new = targets + slip_amt[..., None] * ghat
            w[mask] = w_new[mask]

        # KKT residual: demand vs bound for stick, force match for slip
        sx, _ = _lattice_neighbor_sum(w[..., 0])
        sy, _ = _lattice_neighbor_sum(w[..., 1])
        demand = a_diag[..., None] * w - np.stack([k * sx, k * sy], axis=-1)
        v = w - targets
        vnorm = np.linalg.norm(v, axis=-1)
        dnorm = np.linalg.norm(demand, axis=-1)
        stick = vnorm <= 1e-14 * max(1.0, float(np.max(np.abs(targets))))
        res_stick = np.clip(dnorm - bounds, 0.0, None)[stick]
        slipm = ~stick
        res_slip = np.abs(dnorm - bounds)[slipm]
        align = np.zeros_like(vnorm)
        if np.any(slipm):
            align[slipm] = np.linalg.norm(
                demand[slipm] + bounds[slipm, None] * v[slipm] / vnorm[slipm, None], axis=-1
            )
        res = max(
            float(np.max(res_stick, initial=0.0)),
            float(np.max(res_slip, initial=0.0)),
            float(np.max(align[slipm], initial=0.0)) if np.any(slipm) else 0.0,
        )
        if res < tol:
            return w
    raise SolverError(f"lattice solve exceeded {max_sweeps} sweeps", residual=res)


def lattice_run(
    lattice: BeamLattice,
    segments: Sequence[LatticeSegment],
    frame_rate_hz: float = 30.0,
):
    """Drive the lattice through rigid-motion segments.

    Returns ``(frames, truth_states)`` where frames carry displacements and
    per-node forces (tangential friction and the pressing normal load) and
    truth states are exact solver states.
    """
    rows, cols = lattice.rows, lattice.cols
    pos = flat_grid(rows, cols, lattice.spacing)
    px, py = pos[:, :, 0], pos[:, :, 1]
    w = np.zeros((rows, cols, 2))
    targets = np.zeros_like(w)
    k = lattice.coupling_stiffness
    mu = lattice.friction_coefficient

    frames = []
    truth = []
    t = 0
    scale_prev = 1.0
    for seg in segments:
        for s in range(1, seg.duration + 1):
            sc = scale_prev + (seg.normal_scale - scale_prev) * s / seg.duration
            b_eff = lattice.bending_stiffness * (1.0 + lattice.normal_coupling * (sc - 1.0))
            bounds = mu * lattice.normal_loads * sc
            dx = seg.velocity[0] * STEP_DT
            dy = seg.velocity[1] * STEP_DT
            dth = seg.spin * STEP_DT
            targets = w.copy()
            targets[..., 0] += dx - dth * py
            targets[..., 1] += dy + dth * px
            w = _lattice_solve(w.copy(), targets, k, b_eff, bounds, lattice.spacing)

            v = w - targets
            vnorm = np.linalg.norm(v, axis=-1)
            moving = vnorm > 1e-14 * max(1.0, float(np.max(np.abs(targets))))
            states = np.where(
                lattice.normal_loads > 0, np.where(moving, SLIP, STICK), NON_CONTACT
            ).astype(np.int8)

            sx, _ = _lattice_neighbor_sum(w[..., 0])
            sy, deg = _lattice_neighbor_sum(w[..., 1])
            a_diag = k * deg + b_eff
            f_s = a_diag[..., None] * w - np.stack([k * sx, k * sy], axis=-1)

            disp = np.zeros((rows, cols, 3))
            disp[:, :, :2] = w
            force = np.zeros((rows, cols, 3))
            force[:, :, :2] = f_s
            force[:, :, 2] = -lattice.normal_loads * sc
            frames.append(
                DeformationFrame(
                    t=t / frame_rate_hz,
                    pos=pos.copy(),
                    disp=disp,
                    force=force,
                    contact=(lattice.normal_loads > 0).copy(),
                )
            )
            truth.append(states)
            t += 1
        scale_prev = seg.normal_scale
    return frames, truth
