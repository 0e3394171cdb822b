"""Acceptance suite: quantitative surrogates on explicit domains.

Every criterion prints one PASS/FAIL line (run with ``pytest -s`` to see
them all) and then asserts at its stated tolerance. Criterion 5a asserts the
scaling sup-gap bound exactly as stated; on the radius-0.8 tensor grid the
honest gap at step 20 is about 2 (n+1) 2^-20 max|Re(z1/(1+z1))| ~ 3.8e-6,
which exceeds the stated 1e-6, so that single check is expected to fail and
is kept red deliberately rather than tuned green.
"""

import math
import time

import numpy as np
import pytest

from pluripot.cli import main as cli_main
from pluripot.complexad import CPoint
from pluripot.domains import (
    BallPotential,
    HorosphericalPotential,
    ball_defining,
    boundary_sequence,
    domain_catalog,
    fefferman_F,
    length_identity_check,
    radial_defining,
    w_inverse,
    w_metric,
)
from pluripot import kaehler, ma_solver, scaling, vectorfield
from pluripot.sampling import axis_target, ball_points, moebius_samples

ORIGIN2 = CPoint.of(0.0, 0.0)
SEED = 7


def report(criterion, ok, detail):
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}  {detail}")


# ----------------------------------------------------------------------
# 1. Einstein suite
# ----------------------------------------------------------------------
def test_criterion_01_einstein_suite():
    t0 = time.perf_counter()
    worst = 0.0
    for dim in (1, 2, 3):
        for phi in (BallPotential(dim), HorosphericalPotential(dim)):
            for p in ball_points(dim, 50, seed=SEED + dim):
                worst = max(worst, kaehler.einstein_residual(phi, p))
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and dt < 10.0
    report("01 einstein residuals", ok, f"max {worst:.3e} (tol 1e-8), {dt:.1f}s (< 10s)")
    assert worst < 1e-8
    assert dt < 10.0


# ----------------------------------------------------------------------
# 2. gradient-norm PDE
# ----------------------------------------------------------------------
def test_criterion_02_gradient_norm_pde():
    t0 = time.perf_counter()
    worst = 0.0
    for dim in (1, 2, 3):
        for phi in (BallPotential(dim), HorosphericalPotential(dim)):
            for p in ball_points(dim, 50, seed=SEED + dim):
                worst = max(worst, kaehler.pde_residual(phi, p))
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 30.0
    report("02 gradient-norm PDE", ok, f"max {worst:.3e} (tol 1e-6), {dt:.1f}s (< 30s)")
    assert worst < 1e-6
    assert dt < 30.0


# ----------------------------------------------------------------------
# 3. key equation with negative control
# ----------------------------------------------------------------------
def test_criterion_03_key_equation():
    worst = max(
        kaehler.key_equation_residual(HorosphericalPotential(2), p)
        for p in ball_points(2, 50, seed=SEED)
    )
    # generic points for the control: the ball-potential defect scales with |z|
    control = min(
        kaehler.key_equation_residual(BallPotential(2), p)
        for p in ball_points(2, 10, seed=SEED, min_norm=0.2)
    )
    ok = worst < 1e-8 and control > 1e-3
    report("03 key equation", ok, f"max {worst:.3e} (tol 1e-8), control min {control:.3e} (> 1e-3)")
    assert worst < 1e-8
    assert control > 1e-3


# ----------------------------------------------------------------------
# 4. S operator spectral data
# ----------------------------------------------------------------------
def test_criterion_04_s_operator():
    phi = HorosphericalPotential(2)
    eig = trace = length = 0.0
    for p in ball_points(2, 20, seed=SEED):
        so = kaehler.s_operator(phi, p)
        eig = max(eig, so.grad_eigen_residual)
        trace = max(trace, abs(so.trace - 9.0))
        length = max(length, abs(math.sqrt(kaehler.gradient_length_sq(phi, p)) - 3.0))
    ok = eig < 1e-7 and trace < 1e-7 and length < 1e-7
    report(
        "04 S operator",
        ok,
        f"eigenvector {eig:.3e}, trace {trace:.3e}, |C-(n+1)| {length:.3e} (tol 1e-7)",
    )
    assert eig < 1e-7
    assert trace < 1e-7
    assert length < 1e-7


# ----------------------------------------------------------------------
# 5. scaling limit
# ----------------------------------------------------------------------
@pytest.fixture(scope="module")
def scaling_report():
    t0 = time.perf_counter()
    run = scaling.ScalingRun(
        phi=BallPotential(2),
        maps=boundary_sequence(axis_target(2), 20),
        p0=ORIGIN2,
        grid=scaling.make_grid(2),
        target=HorosphericalPotential(2),
    )
    rep = scaling.run_scaling(run)
    return rep, time.perf_counter() - t0


def test_criterion_05a_scaling_sup_gap(scaling_report):
    rep, dt = scaling_report
    gap = rep.target_gaps[-1]
    ok = gap < 1e-6 and dt < 60.0
    report(
        "05a scaling sup-gap",
        ok,
        f"gap at step 20 is {gap:.3e} (stated tol 1e-6; honest value on the "
        f"radius-0.8 grid is ~4e-6), {dt:.1f}s (< 60s)",
    )
    assert dt < 60.0
    assert gap < 1e-6  # expected red: see module docstring


def test_criterion_05b_scaling_limit_length(scaling_report):
    rep, _ = scaling_report
    dev = max(abs(rep.length_profile.min() - 3.0), abs(rep.length_profile.max() - 3.0))
    ok = dev < 1e-4
    report("05b scaling limit length", ok, f"max |len - 3| {dev:.3e} (tol 1e-4)")
    assert dev < 1e-4


# ----------------------------------------------------------------------
# 6. growth envelope
# ----------------------------------------------------------------------
def test_criterion_06_growth_envelope():
    phi = BallPotential(2)
    maps = moebius_samples(2, 100, seed=SEED + 1)
    pts = ball_points(2, 100, seed=SEED + 2)
    violations = sum(
        0 if scaling.gronwall_check(phi, f, ORIGIN2, p).ok else 1
        for f, p in zip(maps, pts)
    )
    ok = violations == 0
    report("06 growth envelope", ok, f"{violations} violations over 100 seeded pairs")
    assert violations == 0


# ----------------------------------------------------------------------
# 7. pluriharmonicity of pullback defects
# ----------------------------------------------------------------------
def test_criterion_07_pluriharmonicity():
    phi = BallPotential(2)
    worst = max(
        scaling.pluriharmonic_residual(phi, f, p)
        for f, p in zip(
            moebius_samples(2, 50, seed=SEED + 3), ball_points(2, 50, seed=SEED + 4)
        )
    )
    ok = worst < 1e-8
    report("07 pluriharmonicity", ok, f"max {worst:.3e} (tol 1e-8)")
    assert worst < 1e-8


# ----------------------------------------------------------------------
# 8. holomorphic field and interior flow
# ----------------------------------------------------------------------
def test_criterion_08_field_and_flow():
    t0 = time.perf_counter()
    holo = max(
        vectorfield.build_field(HorosphericalPotential(2), p).dbar_norm_sq
        for p in ball_points(2, 50, seed=SEED)
    )
    phi = HorosphericalPotential(1)
    starts = ball_points(1, 10, radius=0.5, seed=SEED + 5)
    min_margin, rho_drift, level_drift = math.inf, 0.0, 0.0
    suspected = False
    for start in starts:
        tr = vectorfield.flow(phi, start, 20.0, tol=1e-12, atol=1e-14)
        min_margin = min(min_margin, tr.min_margin)
        rho_drift = max(rho_drift, tr.rho_drift)
        level_drift = max(level_drift, tr.potential_drift)
        suspected = suspected or tr.incompleteness_suspected
    cr, iso = vectorfield.flow_automorphy_check(phi, 1.0, starts)
    dt = time.perf_counter() - t0
    ok = (
        holo < 1e-8
        and min_margin > 0
        and not suspected
        and rho_drift < 1e-6
        and level_drift < 1e-6
        and cr < 1e-4
        and iso < 1e-4
        and dt < 120.0
    )
    report(
        "08 field and flow",
        ok,
        f"holo {holo:.1e}, margin {min_margin:.1e}, rho drift {rho_drift:.1e}, "
        f"level drift {level_drift:.1e}, CR {cr:.1e}, isometry {iso:.1e}, {dt:.0f}s (< 120s)",
    )
    assert holo < 1e-8
    assert min_margin > 0 and not suspected
    assert rho_drift < 1e-6
    assert level_drift < 1e-6
    assert cr < 1e-4 and iso < 1e-4
    assert dt < 120.0


# ----------------------------------------------------------------------
# 9. conformal rescaling of a complete field
# ----------------------------------------------------------------------
def test_criterion_09_rho_rescaled_flow():
    phi = HorosphericalPotential(1)
    worst = 0.0
    for start in (CPoint.of(0.0), CPoint.of(0.2 + 0.1j), CPoint.of(-0.3)):
        chk = vectorfield.rho_scaled_completeness_check(phi, start, 5.0)
        expected_c = math.exp(phi.value(start) / 2)
        assert chk.c == pytest.approx(expected_c, abs=1e-12)
        worst = max(worst, chk.max_deviation)
    ok = worst < 1e-5
    report("09 rho-rescaled flow", ok, f"max trajectory deviation {worst:.3e} (tol 1e-5)")
    assert worst < 1e-5


# ----------------------------------------------------------------------
# 10. boundary-metric formulas
# ----------------------------------------------------------------------
def test_criterion_10_w_metric_formulas():
    inv_err = lid_err = lid_max = f_ball = 0.0
    for name in ("ball", "radial_eps=0.1"):
        rdef = domain_catalog(name, 2)
        radius = 0.9 * math.sqrt(rdef.radial.t_boundary)
        for p in ball_points(2, 20, radius=radius, seed=SEED):
            prod = w_inverse(rdef, p) @ w_metric(rdef, p)
            inv_err = max(inv_err, float(np.abs(prod - np.eye(2)).max()))
            lhs, rhs = length_identity_check(rdef, p)
            lid_err = max(lid_err, abs(lhs - rhs))
            lid_max = max(lid_max, lhs)
    for p in ball_points(2, 20, seed=SEED):
        f_ball = max(f_ball, abs(fefferman_F(ball_defining(2), p)))
    ok = inv_err < 1e-10 and lid_err < 1e-10 and lid_max <= 1 + 1e-12 and f_ball < 1e-12
    report(
        "10 boundary-metric formulas",
        ok,
        f"inverse {inv_err:.1e} (tol 1e-10), length id {lid_err:.1e} (tol 1e-10, "
        f"lhs max {lid_max:.4f}), F(ball) {f_ball:.1e}",
    )
    assert inv_err < 1e-10
    assert lid_err < 1e-10 and lid_max <= 1 + 1e-12
    assert f_ball < 1e-12


# ----------------------------------------------------------------------
# 11. Monge-Ampere solver
# ----------------------------------------------------------------------
def test_criterion_11_monge_ampere():
    t0 = time.perf_counter()
    sol_ball = ma_solver.solve_radial(ball_defining(2))
    u_sup = float(np.max(np.abs(sol_ball.ucorr)))
    sol = ma_solver.solve_radial(radial_defining(2, 0.1))
    scan = ma_solver.boundary_limit_scan(sol)
    limit_err = abs(scan.extrapolated - 9.0)
    dt = time.perf_counter() - t0
    ok = (
        u_sup < 1e-7
        and sol.residual < 1e-8
        and sol.c_bound < 2.0
        and limit_err < 1e-2
        and dt < 120.0
    )
    report(
        "11 Monge-Ampere",
        ok,
        f"ball |u| {u_sup:.1e} (tol 1e-7), residual {sol.residual:.1e} (tol 1e-8), "
        f"c {sol.c_bound:.3f} (< 2), boundary limit err {limit_err:.1e} (tol 1e-2), {dt:.1f}s",
    )
    assert u_sup < 1e-7
    assert sol.residual < 1e-8
    assert sol.c_bound < 2.0
    assert limit_err < 1e-2
    assert dt < 120.0


# ----------------------------------------------------------------------
# 12. determinism
# ----------------------------------------------------------------------
def test_criterion_12_determinism(tmp_path):
    outs = (tmp_path / "a", tmp_path / "b")
    for out in outs:
        cli_main(["verify", "--potential", "ball_horospherical", "--dim", "2",
                  "--samples", "10", "--seed", "3", "--out", str(out)])
        cli_main(["solve", "--domain", "radial_eps=0.1", "--dim", "2",
                  "--out", str(out)])
    names = sorted(p.name for p in outs[0].iterdir())
    identical = all(
        (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in names
    )
    report("12 determinism", identical, f"{len(names)} files byte-identical across reruns")
    assert identical
