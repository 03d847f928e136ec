"""Deformation-frame containers.

A frame holds one time sample of an n x m measurement grid: node positions,
node displacements, and optionally per-node contact forces and a contact
mask.  Arrays are indexed ``[i, j]`` where ``i`` runs along the x direction
and ``j`` along the y direction, matching the central-difference stencils in
:mod:`slipsense.strain`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, SequencingError

NON_CONTACT = 0
STICK = 1
SLIP = 2

STATE_NAMES = {NON_CONTACT: "non-contact", STICK: "stick", SLIP: "slip"}


@dataclass
class DeformationFrame:
    """One time sample of the deformation grid.

    Parameters
    ----------
    t : float
        Timestamp in seconds.
    pos : ndarray, shape (n, m, 3)
        Node positions (x, y, z).
    disp : ndarray, shape (n, m, 3)
        Node displacements (u_x, u_y, u_z).
    force : ndarray, shape (n, m, 3), optional
        Per-node contact force applied to the sensing surface.
    contact : ndarray of bool, shape (n, m), optional
        Ground-truth contact mask, where available.
    """

    t: float
    pos: np.ndarray
    disp: np.ndarray
    force: np.ndarray | None = None
    contact: np.ndarray | None = None

    def __post_init__(self):
        self.pos = np.asarray(self.pos, dtype=np.float64)
        self.disp = np.asarray(self.disp, dtype=np.float64)
        if self.pos.ndim != 3 or self.pos.shape[2] != 3:
            raise GridError(f"positions must have shape (n, m, 3), got {self.pos.shape}")
        if self.disp.shape != self.pos.shape:
            raise GridError(
                f"displacement shape {self.disp.shape} != position shape {self.pos.shape}"
            )
        if self.force is not None:
            self.force = np.asarray(self.force, dtype=np.float64)
            if self.force.shape != self.pos.shape:
                raise GridError(
                    f"force shape {self.force.shape} != position shape {self.pos.shape}"
                )
        if self.contact is not None:
            self.contact = np.asarray(self.contact, dtype=bool)
            if self.contact.shape != self.pos.shape[:2]:
                raise GridError(
                    f"contact mask shape {self.contact.shape} != grid {self.pos.shape[:2]}"
                )

    @property
    def shape(self) -> tuple[int, int]:
        return self.pos.shape[:2]

    @property
    def x(self) -> np.ndarray:
        return self.pos[:, :, 0]

    @property
    def y(self) -> np.ndarray:
        return self.pos[:, :, 1]

    @property
    def z(self) -> np.ndarray:
        return self.pos[:, :, 2]


def flat_grid(n: int, m: int, pitch: float, center: bool = True) -> np.ndarray:
    """Node positions of a flat regular grid in the z = 0 plane.

    With ``center=True`` the grid is centred on the origin.
    """
    if n < 1 or m < 1 or pitch <= 0:
        raise GridError("grid needs n, m >= 1 and pitch > 0")
    xs = np.arange(n, dtype=np.float64) * pitch
    ys = np.arange(m, dtype=np.float64) * pitch
    if center:
        xs -= xs.mean()
        ys -= ys.mean()
    pos = np.zeros((n, m, 3))
    pos[:, :, 0] = xs[:, None]
    pos[:, :, 1] = ys[None, :]
    return pos


def check_sequence(frames: list[DeformationFrame]) -> None:
    """Validate that frames form a proper sequence.

    Grid shapes must match and timestamps must be strictly increasing.
    """
    if not frames:
        return
    shape = frames[0].shape
    t_prev = None
    for k, fr in enumerate(frames):
        if fr.shape != shape:
            raise GridError(f"frame {k} grid {fr.shape} != sequence grid {shape}")
        if t_prev is not None and fr.t <= t_prev:
            raise SequencingError(f"timestamps not strictly increasing at frame {k}")
        t_prev = fr.t
