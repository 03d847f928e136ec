"""Closed-form sphere-on-plane partial-slip contact model.

A sphere pressed onto a rigid plane with normal force ``F_N`` and loaded
tangentially with ``F_T < mu * F_N`` develops an inner stick disk of radius
``r_c`` surrounded by an annulus of local slip.  This module provides the
Hertzian pressure profile, the stick radius, the dimensionless slip profile
and its spatial derivative, the tangential surface displacement field, and a
deterministic generator that samples the fields onto a measurement grid with
exact ground-truth stick/slip masks.

The stick radius follows the classical superposed-traction construction,

    r_c = r_a * (1 - F_T / (mu * F_N)) ** (1/3),

which is not stated in closed form in most derivations of the slip field but
follows from integrating the superposed Hertzian-form tractions over the
contact disk (see the equilibrium cross-checks in the test suite).

All quantities are unit agnostic; the caller must use one consistent unit
system for lengths and forces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, MacroSlipError
from .frames import NON_CONTACT, SLIP, STICK, DeformationFrame, flat_grid


@dataclass(frozen=True)
class ContactParams:
    """Material and load parameters of the spherical contact.

    Attributes
    ----------
    normal_force : float
        Total normal load F_N > 0.
    contact_radius : float
        Radius r_a > 0 of the circular contact region.
    friction_coefficient : float
        Coulomb friction coefficient mu > 0.
    shear_modulus : float
        Shear modulus G > 0 of the soft body.
    poisson_ratio : float
        Poisson ratio, 0 <= nu < 0.5.
    """

    normal_force: float
    contact_radius: float
    friction_coefficient: float
    shear_modulus: float
    poisson_ratio: float

    def __post_init__(self):
        if self.normal_force <= 0:
            raise DomainError("normal_force must be > 0")
        if self.contact_radius <= 0:
            raise DomainError("contact_radius must be > 0")
        if self.friction_coefficient <= 0:
            raise DomainError("friction_coefficient must be > 0")
        if self.shear_modulus <= 0:
            raise DomainError("shear_modulus must be > 0")
        if not 0 <= self.poisson_ratio < 0.5:
            raise DomainError("poisson_ratio must satisfy 0 <= nu < 0.5")

    @property
    def peak_pressure(self) -> float:
        """Peak Hertz pressure 3 F_N / (2 pi r_a^2) at the contact centre."""
        return 3.0 * self.normal_force / (2.0 * math.pi * self.contact_radius**2)

    @property
    def slip_scale(self) -> float:
        """Amplitude H1 = 3 (2 - nu) mu F_N / (16 G r_a) of the slip profile."""
        return (
            3.0
            * (2.0 - self.poisson_ratio)
            * self.friction_coefficient
            * self.normal_force
            / (16.0 * self.shear_modulus * self.contact_radius)
        )

    def slip_derivative_scale(self, r_c: float) -> float:
        """Amplitude H2 = 2 H1 / (pi r_c) of the slip spatial derivative."""
        if r_c <= 0:
            raise DomainError("r_c must be > 0")
        return 2.0 * self.slip_scale / (math.pi * r_c)

    @property
    def indentation_depth(self) -> float:
        """Hertz normal approach 3 F_N (1 - nu) / (8 G r_a)."""
        return (
            3.0
            * self.normal_force
            * (1.0 - self.poisson_ratio)
            / (8.0 * self.shear_modulus * self.contact_radius)
        )


def hertz_pressure(params: ContactParams, r):
    """Hertz pressure p(r) = p0 * sqrt(1 - (r / r_a)^2) on the contact disk.

    ``r`` may be a scalar or array; every entry must lie in [0, r_a].
    """
    r = np.asarray(r, dtype=np.float64)
    r_a = params.contact_radius
    if np.any(r < 0) or np.any(r > r_a):
        raise DomainError(f"r must lie in [0, {r_a}]")
    out = params.peak_pressure * np.sqrt(np.clip(1.0 - (r / r_a) ** 2, 0.0, None))
    return float(out) if out.ndim == 0 else out


def stick_radius(params: ContactParams, tangential_force: float) -> float:
    """Radius of the stick disk under tangential load F_T.

    Monotone decreasing in F_T, equal to r_a at F_T = 0.  Raises
    :class:`MacroSlipError` once F_T reaches mu * F_N (full sliding).
    """
    if tangential_force < 0:
        raise DomainError("tangential_force must be >= 0")
    limit = params.friction_coefficient * params.normal_force
    if tangential_force >= limit:
        raise MacroSlipError(
            f"tangential force {tangential_force} reaches the sliding limit {limit}"
        )
    return params.contact_radius * (1.0 - tangential_force / limit) ** (1.0 / 3.0)


def tangential_force_for_stick_radius(params: ContactParams, r_c: float) -> float:
    """Inverse of :func:`stick_radius`: the F_T that yields stick radius r_c."""
    r_a = params.contact_radius
    if not 0 < r_c <= r_a:
        raise DomainError("r_c must lie in (0, r_a]")
    limit = params.friction_coefficient * params.normal_force
    return limit * (1.0 - (r_c / r_a) ** 3)


def phi1(beta):
    """Dimensionless slip profile as a function of beta = r / r_c.

    Zero on [0, 1] (stick), and for beta > 1

        (1 - (2/pi) asin(1/beta)) (1 - 2/beta^2)
        + (2/pi) (1/beta) sqrt(1 - 1/beta^2).

    Continuous at beta = 1, strictly increasing beyond it, with limit 1.
    """
    beta = np.asarray(beta, dtype=np.float64)
    if np.any(beta < 0):
        raise DomainError("beta must be >= 0")
    out = np.zeros_like(beta)
    m = beta > 1.0
    if np.any(m):
        b = beta[m]
        inv = 1.0 / b
        root = np.sqrt(np.clip(1.0 - inv**2, 0.0, None))
        out[m] = (1.0 - (2.0 / math.pi) * np.arcsin(inv)) * (1.0 - 2.0 * inv**2) + (
            2.0 / math.pi
        ) * inv * root
    return float(out) if out.ndim == 0 else out


def phi2(beta):
    """Dimensionless slip spatial derivative as a function of beta = r / r_c.

    Zero on [0, 1], and (4 / beta^3) (pi/2 - asin(1/beta)) for beta > 1.
    Unimodal on (1, inf) with its maximum near beta = 1.17; satisfies
    d(phi1)/d(beta) = (2/pi) phi2(beta).
    """
    beta = np.asarray(beta, dtype=np.float64)
    if np.any(beta < 0):
        raise DomainError("beta must be >= 0")
    out = np.zeros_like(beta)
    m = beta > 1.0
    if np.any(m):
        b = beta[m]
        out[m] = (4.0 / b**3) * (math.pi / 2.0 - np.arcsin(1.0 / b))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SlipProfilePoint:
    """Slip magnitude and its radial derivative at one radius."""

    radius: float
    slip: float
    slip_derivative: float
    in_stick_region: bool


def slip_profile(params: ContactParams, r_c: float, r: float) -> SlipProfilePoint:
    """Slip s(r) = H1 phi1(r/r_c) and its derivative H2 phi2(r/r_c).

    Valid for 0 <= r <= r_a and 0 < r_c <= r_a.
    """
    r_a = params.contact_radius
    if not 0 < r_c <= r_a:
        raise DomainError("r_c must lie in (0, r_a]")
    if not 0 <= r <= r_a:
        raise DomainError("r must lie in [0, r_a]")
    beta = r / r_c
    return SlipProfilePoint(
        radius=r,
        slip=params.slip_scale * phi1(beta),
        slip_derivative=params.slip_derivative_scale(r_c) * phi2(beta),
        in_stick_region=r <= r_c,
    )


def stick_displacement(params: ContactParams, r_c: float) -> float:
    """Uniform tangential displacement of the stick disk.

    (2 - nu) pi mu p0 (r_a^2 - r_c^2) / (8 G r_a), where p0 is the peak
    Hertz pressure.  This is also the rigid-body displacement of the object.
    """
    r_a = params.contact_radius
    if not 0 < r_c <= r_a:
        raise DomainError("r_c must lie in (0, r_a]")
    return (
        (2.0 - params.poisson_ratio)
        * math.pi
        * params.friction_coefficient
        * params.peak_pressure
        * (r_a**2 - r_c**2)
        / (8.0 * params.shear_modulus * r_a)
    )


def displacement_field(params: ContactParams, r_c: float, x, y):
    """Tangential surface displacement (u_x, u_y) at points of the contact disk.

    Inside the stick disk the displacement is the uniform rigid value of
    :func:`stick_displacement` with u_y = 0.  In the slip annulus the x
    displacement exceeds the rigid value by exactly the slip profile, and the
    y component vanishes under the small-term convention that drops the
    nu / (4 - 2 nu) contributions (about 0.09 of the leading term).

    Points outside the contact disk raise :class:`DomainError`.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    r_a = params.contact_radius
    if not 0 < r_c <= r_a:
        raise DomainError("r_c must lie in (0, r_a]")
    r = np.sqrt(x**2 + y**2)
    if np.any(r > r_a * (1.0 + 1e-12)):
        raise DomainError("point outside the contact disk")
    u_x = np.asarray(stick_displacement(params, r_c) + params.slip_scale * phi1(r / r_c))
    u_y = np.zeros_like(u_x)
    if u_x.ndim == 0:
        return float(u_x), float(u_y)
    return u_x, u_y


@dataclass(frozen=True)
class SyntheticSequenceSpec:
    """Recipe for a synthetic partial-slip frame sequence.

    ``tangential_schedule`` gives F_T per frame; every value must stay below
    mu * F_N.  ``frame_rate_hz`` fixes the timestamps t_k = k / rate.
    """

    params: ContactParams
    grid_rows: int
    grid_cols: int
    grid_pitch: float
    tangential_schedule: Sequence[float]
    frame_rate_hz: float = 30.0

    def __post_init__(self):
        if self.grid_rows < 3 or self.grid_cols < 3:
            raise DomainError("grid must be at least 3 x 3")
        if self.grid_pitch <= 0:
            raise DomainError("grid_pitch must be > 0")
        if self.frame_rate_hz <= 0:
            raise DomainError("frame_rate_hz must be > 0")
        limit = self.params.friction_coefficient * self.params.normal_force
        for k, f_t in enumerate(self.tangential_schedule):
            if f_t < 0:
                raise DomainError(f"schedule frame {k}: F_T must be >= 0")
            if f_t >= limit:
                raise MacroSlipError(
                    f"schedule frame {k}: F_T = {f_t} reaches the sliding limit {limit}"
                )

    @property
    def frame_count(self) -> int:
        return len(self.tangential_schedule)


def schedule_for_stick_radii(params: ContactParams, radii: Sequence[float]) -> list[float]:
    """Tangential force program whose stick radii follow ``radii``."""
    return [tangential_force_for_stick_radius(params, rc) for rc in radii]


class _TruthMap:
    """Per-frame ground-truth states of a synthetic sequence."""

    def __init__(self, frame_index: int, states: np.ndarray, r_c: float):
        self.frame_index = frame_index
        self.states = states
        self.r_c = r_c

    @property
    def stick_slip_ratio(self) -> float:
        contact = np.count_nonzero(self.states != NON_CONTACT)
        if contact == 0:
            return math.nan
        return np.count_nonzero(self.states == STICK) / contact


def synthesize_sequence(spec: SyntheticSequenceSpec):
    """Generate frames and exact truth masks for a loading program.

    Returns ``(frames, truth)`` where ``frames`` is a list of
    :class:`DeformationFrame` (flat grid positions, analytic displacements)
    and ``truth`` a list of per-frame state grids using the codes of
    :mod:`slipsense.frames`.

    Node displacements sample the analytic field at node centres; nodes
    outside the contact disk carry zero displacement and a non-contact state.
    The normal displacement is the parabolic Hertz indentation bowl, which
    gives downstream detectors an unambiguous contact cue.  The generator is
    fully deterministic.
    """
    params = spec.params
    r_a = params.contact_radius
    pos = flat_grid(spec.grid_rows, spec.grid_cols, spec.grid_pitch)
    xg, yg = pos[:, :, 0], pos[:, :, 1]
    rg = np.sqrt(xg**2 + yg**2)
    inside = rg <= r_a
    depth = params.indentation_depth

    frames: list[DeformationFrame] = []
    truth: list[np.ndarray] = []
    for k, f_t in enumerate(spec.tangential_schedule):
        r_c = stick_radius(params, f_t)
        disp = np.zeros_like(pos)
        u_stick = stick_displacement(params, r_c)
        u_x = u_stick + params.slip_scale * phi1(np.where(inside, rg, 0.0) / r_c)
        disp[:, :, 0] = np.where(inside, u_x, 0.0)
        # indentation bowl: depth * (1 - r^2 / (2 r_a^2)) inside the disk
        disp[:, :, 2] = np.where(inside, -depth * (1.0 - rg**2 / (2.0 * r_a**2)), 0.0)

        states = np.full(rg.shape, NON_CONTACT, dtype=np.int8)
        states[inside & (rg <= r_c)] = STICK
        states[inside & (rg > r_c)] = SLIP

        frames.append(
            DeformationFrame(
                t=k / spec.frame_rate_hz,
                pos=pos.copy(),
                disp=disp,
                contact=inside.copy(),
            )
        )
        truth.append(states)
    return frames, truth
