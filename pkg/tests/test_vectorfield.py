"""Field construction, holomorphy, and interior flow probes."""

import math

import numpy as np
import pytest

from pluripot.complexad import CPoint, coordinate_jets, jet_space
from pluripot.domains import (
    BallPotential,
    HorosphericalPotential,
    TiltedBallPotential,
    moebius,
    PullbackPotential,
)
from pluripot.kaehler import gradient_length_sq
from pluripot.vectorfield import (
    build_field,
    field_components,
    flow,
    flow_automorphy_check,
    flow_map,
    rho_scaled_completeness_check,
    tangency_residual,
)

from conftest import interior_points


# ----------------------------------------------------------------------
# field construction
# ----------------------------------------------------------------------
def test_field_at_origin_horospherical():
    fe = build_field(HorosphericalPotential(1), CPoint.of(0.0))
    assert fe.W[0] == pytest.approx(2j, abs=1e-13)
    assert fe.V[0] == pytest.approx(2j, abs=1e-13)


def test_w_length_equals_gradient_length():
    for dim in (1, 2):
        phi = HorosphericalPotential(dim)
        for p in interior_points(dim, 10, seed=dim):
            fe = build_field(phi, p)
            assert fe.w_length == pytest.approx(dim + 1, abs=1e-9)
            assert fe.w_length**2 == pytest.approx(
                gradient_length_sq(phi, p), abs=1e-10
            )
            # energy bookkeeping |V| = rho |dphi|
            rho = math.exp(phi.value(p) / (dim + 1))
            assert fe.v_length == pytest.approx(rho * fe.w_length, abs=1e-10)


def test_holomorphy_constant_length_potential():
    phi = HorosphericalPotential(2)
    for p in interior_points(2, 50, seed=5):
        fe = build_field(phi, p)
        assert fe.dbar_norm_sq < 1e-8
        assert fe.dbar_norm_sq_expansion == pytest.approx(
            fe.dbar_norm_sq, abs=1e-9
        )


def test_holomorphy_of_pullback_of_constant_length():
    phi = HorosphericalPotential(2)
    pb = PullbackPotential(phi, moebius(CPoint.of(0.5, 0.2j)), CPoint.of(0, 0))
    for p in interior_points(2, 10, seed=6):
        assert build_field(pb, p).dbar_norm_sq < 1e-8


def test_ball_potential_field_is_the_rotation_field():
    """V for the ball potential is exactly i(n+1)z, hence also holomorphic.

    The conformal factor exp(phi/(n+1)) = 1/(1-|z|^2) cancels the gradient
    decay; constant gradient length is sufficient for holomorphy, not
    necessary.
    """
    phi = BallPotential(2)
    for p in interior_points(2, 10, seed=7):
        fe = build_field(phi, p)
        assert np.abs(fe.V - 3j * p.array).max() < 1e-10
        assert fe.dbar_norm_sq < 1e-20


def test_tilted_potential_field_not_holomorphic():
    # Einstein with non-constant gradient length: the construction fails
    phi = TiltedBallPotential(2)
    vals = [
        build_field(phi, p).dbar_norm_sq
        for p in interior_points(2, 10, seed=8, min_norm=0.2)
    ]
    assert min(vals) > 1e-3


def test_tangency_residual_zero():
    for phi in (HorosphericalPotential(1), BallPotential(1), TiltedBallPotential(1)):
        for p in interior_points(1, 5, seed=9):
            assert tangency_residual(phi, p) < 1e-12


def test_gradient_nonvanishing_sampled():
    phi = HorosphericalPotential(2)
    mags = [
        np.abs(build_field(phi, p).W).max() for p in interior_points(2, 25, seed=10)
    ]
    assert min(mags) > 0.1


# ----------------------------------------------------------------------
# flow probes
# ----------------------------------------------------------------------
@pytest.fixture(scope="module")
def horo_flow():
    return flow(HorosphericalPotential(1), CPoint.of(0.0), 20.0, tol=1e-12, atol=1e-14)


def test_flow_stays_interior(horo_flow):
    assert horo_flow.min_margin > 0
    assert not horo_flow.incompleteness_suspected
    assert horo_flow.times[0] == pytest.approx(-20.0)
    assert horo_flow.times[-1] == pytest.approx(20.0)


def test_flow_conserves_rho_and_level(horo_flow):
    assert horo_flow.rho_drift < 1e-6
    assert horo_flow.potential_drift < 1e-6


def test_flow_speed_matches_field(horo_flow):
    # coordinate velocity equals the field along the trajectory
    phi = HorosphericalPotential(1)
    ts = horo_flow.times
    zs = np.array([q.coords[0] for q in horo_flow.states])
    for k in range(40, len(ts) - 40, 97):
        dt = ts[k + 1] - ts[k - 1]
        vel = (zs[k + 1] - zs[k - 1]) / dt
        v = field_components(phi, horo_flow.states[k])[0]
        assert abs(vel - v) < 1e-3 * max(1.0, abs(v))


def test_flow_from_generic_starts():
    phi = HorosphericalPotential(1)
    for start in interior_points(1, 4, radius=0.5, seed=11):
        tr = flow(phi, start, 20.0, tol=1e-12, atol=1e-14)
        assert tr.min_margin > 0
        assert tr.rho_drift < 1e-6
        assert not tr.incompleteness_suspected


def test_flow_group_property():
    phi = HorosphericalPotential(1)
    for start in interior_points(1, 3, radius=0.4, seed=12):
        one = flow_map(phi, start, 1.3)
        two = flow_map(phi, one, 0.7)
        direct = flow_map(phi, start, 2.0)
        assert np.abs(two.array - direct.array).max() < 1e-7


def test_flow_automorphy():
    phi = HorosphericalPotential(1)
    sample = interior_points(1, 10, radius=0.5, seed=13)
    cr, iso = flow_automorphy_check(phi, 1.0, sample)
    assert cr < 1e-4
    assert iso < 1e-4


def test_flow_automorphy_time_zero_trivial():
    phi = HorosphericalPotential(1)
    cr, iso = flow_automorphy_check(phi, 0.0, interior_points(1, 3, seed=14))
    assert cr < 1e-12
    assert iso < 1e-12


def test_rho_scaled_flow_reparameterization():
    phi = HorosphericalPotential(1)
    # start on the zero level set: c = 1 and the trajectories coincide
    chk0 = rho_scaled_completeness_check(phi, CPoint.of(0.0), 5.0)
    assert chk0.c == pytest.approx(1.0, abs=1e-12)
    assert chk0.max_deviation < 1e-6
    # generic start
    start = CPoint.of(0.2 + 0.1j)
    chk = rho_scaled_completeness_check(phi, start, 5.0)
    assert chk.c == pytest.approx(math.exp(phi.value(start) / 2), abs=1e-12)
    assert chk.max_deviation < 1e-5


def test_flow_exit_flags_incompleteness():
    """A field transverse to the boundary trips the margin event."""

    from pluripot.domains import Potential

    class OutwardPotential(Potential):
        # t + 2(z + zbar): flat metric, gradient pointing across the boundary
        name = "outward"
        dim = 1

        def margin(self, p):
            return 1.0 - p.norm()

        def value(self, p):
            return p.norm_sq() + 4 * p.coords[0].real

        def jet(self, p, order):
            space = jet_space(1, order)
            z = coordinate_jets(space, p)[0]
            return z * z.conj() + (z + z.conj()) * 2.0

    tr = flow(OutwardPotential(), CPoint.of(0.5), 20.0, tol=1e-9)
    assert tr.incompleteness_suspected
    assert tr.min_margin < 0.05
