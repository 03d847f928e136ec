"""Stochastic friction sampling and linear model fitting.

At every detected local-slip onset the interface is right at the Coulomb
bound, so the instantaneous force ratio f_t / f_n samples the local friction
coefficient.  Collecting these together with the node's sliding speed and
normal load supports the linear stochastic friction law

    mu = beta0 + beta1 * v + beta2 * f_n + eps,

fitted by ordinary least squares; the residual spread sigma_eps is itself
the quantity of interest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .detector import EVENT_POS, GridEvent
from .errors import DegenerateDesignError, DomainError, UnsupportedInputError
from .frames import DeformationFrame
from .slipmap import FORCE_FLOOR, micro_forces
from .strain import surface_normals

MIN_SAMPLES = 30


@dataclass(frozen=True)
class FrictionSample:
    """One (speed, normal force, friction coefficient) observation."""

    v: float
    f_n: float
    mu_hat: float
    node: tuple[int, int]
    frame: int


@dataclass(frozen=True)
class FrictionModel:
    """OLS fit of the linear stochastic friction law."""

    beta0: float
    beta1: float
    beta2: float
    sigma_eps: float
    sample_count: int
    stderr: tuple[float, float, float]

    def predict(self, v, f_n):
        return self.beta0 + self.beta1 * np.asarray(v) + self.beta2 * np.asarray(f_n)


def collect_samples(
    events: Sequence[GridEvent],
    frames: Sequence[DeformationFrame],
    force_floor: float = FORCE_FLOOR,
) -> list[FrictionSample]:
    """Harvest friction samples at local-slip onset events.

    For each positive extreme at node (i, j) and frame t the sliding speed is
    the central-difference tangential velocity of the node, the force split
    comes from :func:`micro_forces` with the local surface normal, and
    mu_hat = f_t / f_n.  Samples with f_n at or below ``force_floor`` are
    dropped.  Frames must carry force fields.
    """
    if any(fr.force is None for fr in frames):
        raise UnsupportedInputError(
            "friction sampling requires per-node force fields; none were provided"
        )
    normals_cache: dict[int, np.ndarray] = {}
    samples: list[FrictionSample] = []
    for ev in events:
        if ev.kind != EVENT_POS:
            continue
        t = ev.frame
        if t < 1 or t > len(frames) - 2:
            continue  # no central-difference stencil for the velocity
        if t not in normals_cache:
            normals_cache[t], _ = surface_normals(frames[t])
        n_vec = normals_cache[t][ev.i, ev.j]
        f_vec = frames[t].force[ev.i, ev.j]
        f_n, f_t = micro_forces(f_vec, n_vec)
        if f_n <= force_floor:
            continue
        dt2 = frames[t + 1].t - frames[t - 1].t
        du = (frames[t + 1].disp[ev.i, ev.j] - frames[t - 1].disp[ev.i, ev.j]) / dt2
        u_tan = du - np.dot(du, n_vec) * n_vec
        samples.append(
            FrictionSample(
                v=float(np.linalg.norm(u_tan)),
                f_n=f_n,
                mu_hat=f_t / f_n,
                node=(ev.i, ev.j),
                frame=t,
            )
        )
    return samples


def fit_linear(samples: Sequence[FrictionSample]) -> FrictionModel:
    """Ordinary least squares fit of mu on (1, v, f_n).

    Requires at least ``MIN_SAMPLES`` observations and a full-rank design;
    a constant regressor column raises :class:`DegenerateDesignError` naming
    the column.
    """
    n = len(samples)
    if n < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples, got {n}")
    v = np.array([s.v for s in samples])
    f_n = np.array([s.f_n for s in samples])
    mu = np.array([s.mu_hat for s in samples])

    x = np.column_stack([np.ones(n), v, f_n])
    for name, col in (("v", v), ("f_n", f_n)):
        if np.ptp(col) == 0:
            raise DegenerateDesignError(
                f"regressor {name!r} is constant; the design is rank deficient",
                regressor=name,
            )
    if np.linalg.matrix_rank(x) < 3:
        raise DegenerateDesignError("design matrix is rank deficient", regressor="v,f_n")

    beta, _, _, _ = np.linalg.lstsq(x, mu, rcond=None)
    resid = mu - x @ beta
    dof = n - 3
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(x.T @ x)
    stderr = tuple(float(s) for s in np.sqrt(np.diag(cov)))
    return FrictionModel(
        beta0=float(beta[0]),
        beta1=float(beta[1]),
        beta2=float(beta[2]),
        sigma_eps=math.sqrt(sigma2),
        sample_count=n,
        stderr=stderr,
    )
