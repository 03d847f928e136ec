"""Deformation-field strain pipeline.

Turns frame sequences into per-node characteristic strain rates:

1. central-difference gradients of the in-plane displacement,
2. Green-Lagrange strain components (exact, including quadratic terms),
3. principal decomposition of the 2x2 strain matrix,
4. out-of-plane correction using the local surface normal,
5. frame-to-frame principal strain increments and their L2 norm.

Border nodes have no central-difference stencil and are flagged invalid;
no one-sided stencils are used, so noise behaviour stays uniform across the
grid interior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridError
from .frames import DeformationFrame

# Correction factors beyond this are clamped and flagged low confidence.
NORMAL_CORRECTION_CLAMP = 5.0


def _central_pairs(a: np.ndarray, axis: int) -> np.ndarray:
    """a[i+1] - a[i-1] along ``axis``; border slots are left as NaN."""
    out = np.full_like(a, np.nan)
    if axis == 0:
        out[1:-1, :] = a[2:, :] - a[:-2, :]
    else:
        out[:, 1:-1] = a[:, 2:] - a[:, :-2]
    return out


def deformation_gradient(frame: DeformationFrame):
    """Central-difference displacement gradients on the measurement grid.

    Returns ``(grad, valid)`` where ``grad[..., k, a]`` is du_k/dx_a for
    k, a in {x, y}, and ``valid`` marks interior nodes with well-separated
    neighbour coordinates.  Degenerate stencils (coincident neighbours) flag
    the node invalid rather than failing globally.
    """
    n, m = frame.shape
    if n < 3 or m < 3:
        raise GridError("gradients need a grid of at least 3 x 3")

    dx = _central_pairs(frame.x, axis=0)
    dy = _central_pairs(frame.y, axis=1)
    grad = np.full((n, m, 2, 2), np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        for k in range(2):
            du_i = _central_pairs(frame.disp[:, :, k], axis=0)
            du_j = _central_pairs(frame.disp[:, :, k], axis=1)
            grad[:, :, k, 0] = du_i / dx
            grad[:, :, k, 1] = du_j / dy

    valid = np.zeros((n, m), dtype=bool)
    valid[1:-1, 1:-1] = True
    with np.errstate(invalid="ignore"):
        valid &= np.abs(dx) > 0
        valid &= np.abs(dy) > 0
    valid &= np.all(np.isfinite(grad), axis=(2, 3))
    return grad, valid


def green_lagrange(grad: np.ndarray):
    """Green-Lagrange strain components from displacement gradients.

    eps_xx = u_x,x + (u_x,x^2 + u_y,x^2) / 2
    eps_yy = u_y,y + (u_x,y^2 + u_y,y^2) / 2
    eps_xy = (u_x,y + u_y,x) / 2 + (u_x,x u_x,y + u_y,x u_y,y) / 2

    The quadratic terms make the measure exact under finite rotations.
    """
    ux_x = grad[..., 0, 0]
    ux_y = grad[..., 0, 1]
    uy_x = grad[..., 1, 0]
    uy_y = grad[..., 1, 1]
    eps_xx = ux_x + 0.5 * (ux_x**2 + uy_x**2)
    eps_yy = uy_y + 0.5 * (ux_y**2 + uy_y**2)
    eps_xy = 0.5 * (ux_y + uy_x) + 0.5 * (ux_x * ux_y + uy_x * uy_y)
    return eps_xx, eps_yy, eps_xy


def principal_strains(eps_xx, eps_yy, eps_xy):
    """Eigenvalues of the symmetric 2x2 strain matrix, ordered e1 >= e2."""
    mean = 0.5 * (eps_xx + eps_yy)
    radius = np.sqrt((0.5 * (eps_xx - eps_yy)) ** 2 + np.asarray(eps_xy) ** 2)
    return mean + radius, mean - radius


def surface_normals(frame: DeformationFrame):
    """Unit surface normals from the position grid, oriented with n_z > 0.

    The normal is the cross product of the two central-difference tangent
    vectors of the node's 4-neighbour stencil.  Degenerate tangents flag the
    node invalid.
    """
    n, m = frame.shape
    if n < 3 or m < 3:
        raise GridError("normals need a grid of at least 3 x 3")
    t_i = np.stack([_central_pairs(frame.pos[:, :, c], axis=0) for c in range(3)], axis=-1)
    t_j = np.stack([_central_pairs(frame.pos[:, :, c], axis=1) for c in range(3)], axis=-1)
    normal = np.cross(t_i, t_j)
    norm = np.linalg.norm(normal, axis=-1)
    valid = np.zeros((n, m), dtype=bool)
    valid[1:-1, 1:-1] = True
    with np.errstate(invalid="ignore"):
        valid &= norm > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        normal = normal / norm[..., None]
    # orient toward +z
    flip = normal[..., 2] < 0
    normal[flip] *= -1.0
    valid &= np.isfinite(normal).all(axis=-1)
    return normal, valid


def correct_principal(e1, e2, normals, clamp: float = NORMAL_CORRECTION_CLAMP):
    """Scale principal strains onto the local tangent plane.

    The in-plane components dominate on the contact patch, so both principal
    strains are scaled by 1 / (z_hat . n).  Steep facets where the factor
    would exceed ``clamp`` are clamped and flagged low confidence.

    Returns ``(e1c, e2c, low_confidence)``.
    """
    n_z = np.asarray(normals)[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = 1.0 / n_z
    low = ~np.isfinite(factor) | (factor > clamp) | (factor < 0)
    factor = np.where(low, clamp, factor)
    return e1 * factor, e2 * factor, low


@dataclass
class StrainField:
    """Per-node strain state of one frame."""

    t: float
    eps_xx: np.ndarray
    eps_yy: np.ndarray
    eps_xy: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e1_corrected: np.ndarray
    e2_corrected: np.ndarray
    normals: np.ndarray
    valid: np.ndarray
    low_confidence: np.ndarray

    @property
    def cstrain(self) -> np.ndarray:
        """Characteristic strain: L2 norm of the corrected principal pair."""
        return np.sqrt(self.e1_corrected**2 + self.e2_corrected**2)


def frame_strain(frame: DeformationFrame, clamp: float = NORMAL_CORRECTION_CLAMP) -> StrainField:
    """Run the full per-frame pipeline: gradients to corrected principals."""
    grad, g_valid = deformation_gradient(frame)
    eps_xx, eps_yy, eps_xy = green_lagrange(grad)
    e1, e2 = principal_strains(eps_xx, eps_yy, eps_xy)
    normals, n_valid = surface_normals(frame)
    e1c, e2c, low = correct_principal(e1, e2, normals, clamp)
    return StrainField(
        t=frame.t,
        eps_xx=eps_xx,
        eps_yy=eps_yy,
        eps_xy=eps_xy,
        e1=e1,
        e2=e2,
        e1_corrected=e1c,
        e2_corrected=e2c,
        normals=normals,
        valid=g_valid & n_valid,
        low_confidence=low,
    )


@dataclass
class CStrainRateField:
    """Principal strain increments between two adjacent frames.

    ``delta`` is the characteristic strain rate sqrt(e1_rate^2 + e2_rate^2).
    ``signed_rate`` is the rate of the characteristic strain magnitude; it
    rises while the local deformation intensifies in any direction and falls
    while it releases, which gives downstream detectors a polarity channel.
    """

    dt: float
    e1_rate: np.ndarray
    e2_rate: np.ndarray
    delta: np.ndarray
    signed_rate: np.ndarray
    valid: np.ndarray


def cstrain_rate(prev: StrainField, curr: StrainField, dt: float) -> CStrainRateField:
    """Characteristic strain rate between two strain fields ``dt`` apart."""
    if dt <= 0:
        raise DomainError("dt must be > 0")
    if prev.e1.shape != curr.e1.shape:
        raise GridError("strain fields have mismatched grids")
    e1_rate = (curr.e1_corrected - prev.e1_corrected) / dt
    e2_rate = (curr.e2_corrected - prev.e2_corrected) / dt
    delta = np.sqrt(e1_rate**2 + e2_rate**2)
    signed = (curr.cstrain - prev.cstrain) / dt
    return CStrainRateField(
        dt=dt,
        e1_rate=e1_rate,
        e2_rate=e2_rate,
        delta=delta,
        signed_rate=signed,
        valid=prev.valid & curr.valid,
    )
