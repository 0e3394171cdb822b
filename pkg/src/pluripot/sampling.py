"""Seeded, deterministic point sampling shared by tests and the CLI."""

from __future__ import annotations

import numpy as np

from .complexad import CPoint
from .domains import MoebiusMap


def ball_points(
    dim: int,
    count: int,
    radius: float = 0.8,
    seed: int = 0,
    min_norm: float = 0.0,
) -> list[CPoint]:
    """Uniform points in the ball of the given radius (cube rejection).

    The margin from the unit sphere keeps jets and finite-difference oracles
    well conditioned. ``min_norm`` carves out a neighborhood of the origin
    when a check needs generic (non-central) points.
    """
    rng = np.random.default_rng(seed)
    out: list[CPoint] = []
    while len(out) < count:
        v = rng.uniform(-1.0, 1.0, size=2 * dim)
        r2 = float(v @ v)
        if r2 > 1.0 or radius * radius * r2 < min_norm * min_norm:
            continue
        z = radius * (v[:dim] + 1j * v[dim:])
        out.append(CPoint(tuple(z)))
    return out


def moebius_samples(
    dim: int, count: int, seed: int = 0, max_norm: float = 0.9
) -> list[MoebiusMap]:
    """Seeded involution parameters a with |a| < max_norm."""
    return [MoebiusMap(p) for p in ball_points(dim, count, radius=max_norm, seed=seed)]


def axis_target(dim: int, axis: int = 0, sign: float = -1.0) -> CPoint:
    """A unit boundary direction, e.g. -e1 for the default scaling runs."""
    coords = [0.0] * dim
    coords[axis] = sign
    return CPoint.of(*coords)
