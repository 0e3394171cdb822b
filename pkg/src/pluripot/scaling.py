r"""Potential rescaling along automorphism sequences.

Pulling a potential back by a metric automorphism f and renormalizing at a
base point,

    ``phi -> phi(f(z)) - phi(f(p0))``,

produces another potential of the same metric. Along a sequence of ball
involutions whose centers approach a boundary point, these rescalings
converge on compact sets to a potential with constant gradient length; this
module drives that procedure on a fixed grid and reports convergence
diagnostics.

Two supporting checks live here as well. ``sigma_ratio`` is the exponential
normalization ``exp(phi o f - (phi o f)(p0))``, whose growth obeys the
envelope ``exp(-C R) <= sigma <= exp(C R)`` whenever C bounds the gradient
length globally and R bounds the metric distance from the base point
(``gronwall_check``). And the mixed Hessian of ``phi o f - phi`` must vanish
identically, since both terms are potentials of one metric
(``pluriharmonic_residual``); its exponential is then locally the squared
modulus of a holomorphic function.

Convergence is measured as uniform convergence of values and gradient
lengths on a fixed compact grid, a checkable surrogate for local smooth
convergence. The grid is a deterministic tensor grid; distances use the
straight-segment length, an upper bound for the geodesic distance, which
keeps the envelope conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .complexad import CPoint, jet_of
from .domains import MoebiusMap, Potential, PullbackPotential
from .errors import DomainError, EvaluationError, InvalidParameterError
from .kaehler import gradient_length_sq, segment_metric_length


def rescale(phi: Potential, f: MoebiusMap, p0: CPoint) -> PullbackPotential:
    """The rescaled potential phi(f(z)) - phi(f(p0)); zero at p0 by construction."""
    if not phi.contains(p0):
        raise DomainError("base point must be interior")
    return PullbackPotential(phi, f, p0)


def log_sigma_ratio(phi: Potential, f: MoebiusMap, p0: CPoint, p: CPoint) -> float:
    return rescale(phi, f, p0).value(p)


def sigma_ratio(phi: Potential, f: MoebiusMap, p0: CPoint, p: CPoint) -> float:
    """exp(phi o f - (phi o f)(p0)) evaluated at p, computed in log space."""
    return math.exp(log_sigma_ratio(phi, f, p0, p))


@dataclass(frozen=True)
class GronwallCheck:
    log_sigma: float
    growth_constant: float
    segment_length: float
    ok: bool


def gronwall_check(
    phi: Potential,
    f: MoebiusMap,
    p0: CPoint,
    p: CPoint,
    growth_constant: float | None = None,
) -> GronwallCheck:
    """Envelope test exp(-C R) <= sigma_f(p) <= exp(C R), done in log space.

    C defaults to the potential's advertised global gradient-length bound;
    R is the metric length of the straight segment p0 -> p, an upper bound
    for the distance, so the envelope is conservative.
    """
    C = growth_constant if growth_constant is not None else phi.grad_length_bound
    if C is None:
        raise InvalidParameterError(
            f"{phi.name!r} has no gradient-length bound; pass growth_constant"
        )
    R = segment_metric_length(phi, p0, p)
    ls = log_sigma_ratio(phi, f, p0, p)
    return GronwallCheck(
        log_sigma=ls, growth_constant=C, segment_length=R, ok=abs(ls) <= C * R
    )


def pluriharmonic_residual(phi: Potential, f: MoebiusMap, p: CPoint) -> float:
    """Max-norm of the mixed Hessian of phi(f(z)) - phi(z) at p.

    Both terms are potentials of the same metric when f is an automorphism,
    so the difference is pluriharmonic and the residual vanishes up to
    truncation noise.
    """
    pb_jet = PullbackPotential(phi, f, p).jet(p, 2)
    base_jet = jet_of(phi, p, 2)
    diff = pb_jet - base_jet
    n = p.n
    mixed = np.array(
        [[diff.partial((a,), (b,)) for b in range(n)] for a in range(n)]
    )
    return float(np.max(np.abs(mixed)))


def make_grid(dim: int, radius: float = 0.8, max_points: int = 200) -> list[CPoint]:
    """Deterministic tensor grid inside the closed ball of the given radius.

    Per real axis the nodes are symmetric and equally spaced, with the count
    chosen so the total stays within ``max_points``; the axis extent is
    radius/sqrt(2 dim), which puts the grid corners exactly on the sphere of
    the given radius.
    """
    axes = 2 * dim
    per_axis = max(2, int(math.floor(max_points ** (1.0 / axes))))
    extent = radius / math.sqrt(axes)
    nodes = np.linspace(-extent, extent, per_axis)
    pts = []
    mesh = np.meshgrid(*([nodes] * axes), indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=-1)
    for row in flat:
        z = row[:dim] + 1j * row[dim:]
        pts.append(CPoint(tuple(z)))
    return pts


@dataclass
class ScalingRun:
    """One rescaling experiment: potential, maps, base point, and test grid."""

    phi: Potential
    maps: list[MoebiusMap]
    p0: CPoint
    grid: list[CPoint]
    target: Potential | None = None
    history: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not self.phi.contains(self.p0):
            raise DomainError("base point fails the domain test")
        for q in self.grid:
            if not self.phi.contains(q):
                raise DomainError(f"grid point {q!r} fails the domain test")


@dataclass
class ConvergenceReport:
    """Per-step diagnostics of a scaling run.

    ``sup_diffs[j]`` is the sup over the grid of the value change between
    consecutive rescalings; ``target_gaps`` the sup distance to the
    registered closed-form target, when present. ``length_profile`` holds
    the gradient lengths of the final iterate on the grid.
    """

    sup_diffs: list[float]
    target_gaps: list[float] | None
    limit_values: np.ndarray
    length_profile: np.ndarray
    length_ranges: list[tuple[float, float]]

    def csv_rows(self):
        rows = []
        for j in range(len(self.length_ranges)):
            sup = self.sup_diffs[j] if j < len(self.sup_diffs) else ""
            gap = self.target_gaps[j] if self.target_gaps is not None else ""
            lo, hi = self.length_ranges[j]
            rows.append((j + 1, sup, gap, lo, hi))
        return rows


def run_scaling(run: ScalingRun) -> ConvergenceReport:
    """Evaluate every rescaled potential on the grid and diagnose convergence."""
    target_vals = None
    if run.target is not None:
        target_vals = np.array([run.target.value(q) for q in run.grid])

    values, lengths, ranges = [], None, []
    gaps = [] if target_vals is not None else None
    run.history.clear()
    for f in run.maps:
        pb = rescale(run.phi, f, run.p0)
        vals = np.array([pb.value(q) for q in run.grid])
        if not np.all(np.isfinite(vals)):
            raise EvaluationError("rescaled potential produced non-finite values")
        lens = np.array([math.sqrt(gradient_length_sq(pb, q)) for q in run.grid])
        values.append(vals)
        lengths = lens
        ranges.append((float(lens.min()), float(lens.max())))
        if gaps is not None:
            gaps.append(float(np.max(np.abs(vals - target_vals))))
        run.history.append(vals)

    sup_diffs = [
        float(np.max(np.abs(values[j + 1] - values[j])))
        for j in range(len(values) - 1)
    ]
    return ConvergenceReport(
        sup_diffs=sup_diffs,
        target_gaps=gaps,
        limit_values=values[-1],
        length_profile=lengths,
        length_ranges=ranges,
    )
