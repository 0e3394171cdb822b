"""Potential rescaling: closed-form oracles, envelopes, and convergence."""

import math

import numpy as np
import pytest

from pluripot.complexad import CPoint
from pluripot.domains import (
    BallPotential,
    HorosphericalPotential,
    boundary_sequence,
    identity_map,
    moebius,
)
from pluripot.errors import DomainError
from pluripot.sampling import axis_target, ball_points, moebius_samples
from pluripot.scaling import (
    ScalingRun,
    gronwall_check,
    make_grid,
    pluriharmonic_residual,
    rescale,
    run_scaling,
    sigma_ratio,
)

from conftest import interior_points

ORIGIN2 = CPoint.of(0.0, 0.0)


# ----------------------------------------------------------------------
# rescale
# ----------------------------------------------------------------------
def test_rescale_identity_map():
    phi = BallPotential(2)
    p0 = CPoint.of(0.2, 0.1j)
    pb = rescale(phi, identity_map(2), p0)
    for p in interior_points(2, 10, seed=1):
        assert pb.value(p) == pytest.approx(phi.value(p) - phi.value(p0), abs=1e-12)


def test_rescale_vanishes_at_base_point():
    phi = BallPotential(2)
    for a in ball_points(2, 5, radius=0.9, seed=2):
        pb = rescale(phi, moebius(a), ORIGIN2)
        assert pb.value(ORIGIN2) == 0.0


def test_rescale_closed_form():
    phi = BallPotential(2)
    a = CPoint.of(0.6, -0.3j)
    pb = rescale(phi, moebius(a), ORIGIN2)
    for p in interior_points(2, 20, seed=3):
        ip = complex(p.array @ np.conj(a.array))
        closed = 3 * math.log(abs(1 - ip) ** 2 / (1 - p.norm_sq()))
        assert abs(pb.value(p) - closed) < 1e-10


# ----------------------------------------------------------------------
# sigma ratio and the growth envelope
# ----------------------------------------------------------------------
def test_sigma_ratio_base_point_and_positivity():
    phi = BallPotential(2)
    f = moebius(CPoint.of(0.5, 0.2))
    assert sigma_ratio(phi, f, ORIGIN2, ORIGIN2) == 1.0
    for p in interior_points(2, 10, seed=4):
        assert sigma_ratio(phi, f, ORIGIN2, p) > 0.0


def test_sigma_ratio_matches_exp_of_closed_form():
    phi = BallPotential(2)
    a = CPoint.of(0.3, 0.4j)
    f = moebius(a)
    for p in interior_points(2, 10, seed=5):
        ip = complex(p.array @ np.conj(a.array))
        closed = math.exp(3 * math.log(abs(1 - ip) ** 2 / (1 - p.norm_sq())))
        assert sigma_ratio(phi, f, ORIGIN2, p) == pytest.approx(closed, rel=1e-10)


def test_gronwall_envelope_seeded_pairs():
    phi = BallPotential(2)
    maps = moebius_samples(2, 100, seed=6)
    pts = ball_points(2, 100, seed=7)
    for f, p in zip(maps, pts):
        chk = gronwall_check(phi, f, ORIGIN2, p)
        assert chk.ok, (chk.log_sigma, chk.growth_constant * chk.segment_length)


def test_gronwall_needs_riemannian_arc_length():
    """The factor-two arc-length convention is load bearing.

    For the identity map, log sigma = phi(p) - phi(0); along a radial point
    this exceeds C times the Hermitian (half) length, so an envelope built
    on the un-doubled length would be violated while the real one holds.
    """
    phi = BallPotential(1)
    p0 = CPoint.of(0.0)
    p = CPoint.of(0.95)
    chk = gronwall_check(phi, identity_map(1), p0, p)
    assert chk.ok
    assert abs(chk.log_sigma) > chk.growth_constant * chk.segment_length / 2


# ----------------------------------------------------------------------
# pluriharmonicity of the pullback defect
# ----------------------------------------------------------------------
def test_pluriharmonic_residual_isometries():
    phi = BallPotential(2)
    horo = HorosphericalPotential(2)
    maps = moebius_samples(2, 20, seed=8)
    pts = ball_points(2, 20, seed=9)
    for f, p in zip(maps, pts):
        assert pluriharmonic_residual(phi, f, p) < 1e-8
        assert pluriharmonic_residual(horo, f, p) < 1e-8


def test_pluriharmonic_residual_identity_map_exact():
    phi = BallPotential(2)
    for p in interior_points(2, 5, seed=10):
        assert pluriharmonic_residual(phi, identity_map(2), p) == 0.0


# ----------------------------------------------------------------------
# grid
# ----------------------------------------------------------------------
def test_make_grid_shape():
    grid = make_grid(2)
    assert len(grid) <= 200
    norms = [q.norm() for q in grid]
    assert max(norms) <= 0.8 + 1e-12
    assert max(norms) == pytest.approx(0.8)  # corners reach the sphere


def test_scaling_run_validates_grid():
    phi = BallPotential(2)
    with pytest.raises(DomainError):
        ScalingRun(
            phi=phi,
            maps=boundary_sequence(axis_target(2), 2),
            p0=ORIGIN2,
            grid=[CPoint.of(1.2, 0.0)],
        )


# ----------------------------------------------------------------------
# the full run
# ----------------------------------------------------------------------
@pytest.fixture(scope="module")
def ball_run_report():
    phi = BallPotential(2)
    run = ScalingRun(
        phi=phi,
        maps=boundary_sequence(axis_target(2), 20),
        p0=ORIGIN2,
        grid=make_grid(2),
        target=HorosphericalPotential(2),
    )
    return run, run_scaling(run)


def test_run_scaling_constant_maps_zero_diffs():
    phi = BallPotential(2)
    f = moebius(CPoint.of(0.4, 0.1))
    run = ScalingRun(phi=phi, maps=[f, f, f], p0=ORIGIN2, grid=make_grid(2))
    rep = run_scaling(run)
    assert rep.sup_diffs == [0.0, 0.0]


def test_run_scaling_gap_matches_independent_closed_form(ball_run_report):
    """Dual-route check of the whole pipeline against pure-scalar closed forms.

    Both the rescaled potential and its limit have explicit formulas on the
    ball, so the reported gap at every step is reproducible outside the jet
    and pullback machinery.
    """
    run, rep = ball_run_report
    grid_arr = [q.array for q in run.grid]
    for j in (0, 4, 9, 19):
        eps_j = 2.0 ** -(j + 1)
        gap = max(
            abs(
                3 * math.log(abs(1 + (1 - eps_j) * z[0]) ** 2 / (1 - float(np.vdot(z, z).real)))
                - 3 * math.log(abs(1 + z[0]) ** 2 / (1 - float(np.vdot(z, z).real)))
            )
            for z in grid_arr
        )
        # 1e-9 absolute floor: evaluating the pullback near the boundary
        # cancels two logarithms of size ~30
        assert rep.target_gaps[j] == pytest.approx(gap, rel=1e-5, abs=1e-9)


def test_run_scaling_geometric_decay(ball_run_report):
    _, rep = ball_run_report
    for j in range(3, len(rep.sup_diffs) - 1):
        assert rep.sup_diffs[j + 1] / rep.sup_diffs[j] <= 0.75
    gaps = rep.target_gaps
    assert gaps[-1] < gaps[4] < gaps[0]


def test_run_scaling_limit_length_profile(ball_run_report):
    _, rep = ball_run_report
    assert rep.length_profile.min() > 3 - 1e-4
    assert rep.length_profile.max() < 3 + 1e-4


def test_run_scaling_rescaled_potentials_stay_einstein():
    from pluripot.kaehler import einstein_residual

    phi = BallPotential(2)
    maps = boundary_sequence(axis_target(2), 6)
    for f in maps[-2:]:
        pb = rescale(phi, f, ORIGIN2)
        for p in interior_points(2, 5, seed=11):
            assert einstein_residual(pb, p) < 1e-8


def test_csv_rows_shape(ball_run_report):
    _, rep = ball_run_report
    rows = rep.csv_rows()
    assert len(rows) == 20
    assert rows[0][0] == 1 and rows[-1][0] == 20
