r"""The holomorphic gradient field of a constant-length potential, and its flow.

From a potential phi the module builds

    ``W = i grad(phi)``,   ``V = exp(phi/(n+1)) W``,

with ``grad(phi)^a = g^{bbar a} phi_bbar``. The real part of W is tangent to
the level sets of phi, so the conformal factor ``rho = exp(phi/(n+1))`` is
constant along trajectories of Re W and of Re V. When the gradient length
``|dphi|`` is constant, the (0,1)-covariant derivative of V vanishes, making
V holomorphic; :func:`build_field` evaluates that derivative both by direct
metric contraction and through its quadratic expansion in the covariant
Hessian, as a cross-check.

Completeness cannot be proven numerically. The probe criterion implemented
in :func:`flow` is: the trajectory exists on the requested window, the
interior margin stays bounded below, and the adaptive integrator never
collapses its steps at the boundary. Results are reported as a probe
outcome, never as a proof. Flow maps are differentiated by finite
differences (the integrator is not jet-transparent), so holomorphy and
isometry residuals of the time-t map carry an fd-limited tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .complexad import CPoint, jet_of
from .domains import Potential
from .errors import FlowError
from .kaehler import _metric_blocks, _tensors

_MARGIN_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class FieldEval:
    """Pointwise data of W = i grad(phi) and V = exp(phi/(n+1)) W.

    ``dbar_v`` holds V^a_{;bbar}; ``dbar_norm_sq`` its squared metric norm by
    direct contraction and ``dbar_norm_sq_expansion`` the same number from
    the quadratic expansion in grad(phi) and the covariant Hessian.
    """

    point: CPoint
    V: np.ndarray
    W: np.ndarray
    dbar_v: np.ndarray
    w_length: float
    v_length: float
    dbar_norm_sq: float
    dbar_norm_sq_expansion: float


@dataclass(frozen=True, eq=False)
class FlowTrace:
    """A two-sided trajectory of Re V with interior-margin bookkeeping."""

    start: CPoint
    times: np.ndarray
    states: tuple[CPoint, ...]
    margins: np.ndarray
    rho_values: np.ndarray
    min_margin: float
    rho_drift: float
    potential_drift: float
    incompleteness_suspected: bool


@dataclass(frozen=True)
class RhoFlowCheck:
    """Comparison of the V-flow with the time-rescaled W-flow."""

    c: float
    max_deviation: float


def _field_blocks(phi: Potential, p: CPoint):
    P = _tensors(jet_of(phi, p, 2))
    G, Gi, _ = _metric_blocks(P)
    gphi = Gi.T @ P.f1b
    rho = math.exp(P.value / (p.n + 1))
    return P, G, Gi, gphi, rho


def field_components(phi: Potential, p: CPoint) -> np.ndarray:
    """Components of V at p, the minimum needed by the flow integrator."""
    _, _, _, gphi, rho = _field_blocks(phi, p)
    return 1j * rho * gphi


def build_field(phi: Potential, p: CPoint) -> FieldEval:
    """Full field evaluation with the holomorphy cross-check."""
    jet = jet_of(phi, p, 3)
    P = _tensors(jet)
    n = P.n
    s = n + 1
    G, Gi, _ = _metric_blocks(P)
    dG = np.transpose(P.f21, (1, 0, 2)) / s
    Gamma = np.einsum("da,mld->aml", Gi, dG)

    gphi = Gi.T @ P.f1b
    u = float(np.real(P.f1 @ gphi))
    rho = math.exp(P.value / s)
    W = 1j * gphi
    V = rho * W

    H = P.f20 - np.einsum("gab,g->ab", Gamma, P.f1)
    A = np.outer(gphi, P.f1b) / s          # phi^a phi_bbar / (n+1)
    B = Gi.T @ np.conj(H)                  # phi^a_{;bbar}
    T = 1j * rho * (A + B)

    def pair(X, Y):
        return complex(np.einsum("ab,cd,ac,bd->", X, np.conj(Y), G, Gi))

    direct = float(np.real(pair(T, T)))
    expansion = rho**2 * float(
        np.real(pair(A, A) + 2.0 * pair(A, B).real + pair(B, B))
    )
    return FieldEval(
        point=p,
        V=V,
        W=W,
        dbar_v=T,
        w_length=math.sqrt(max(u, 0.0)),
        v_length=rho * math.sqrt(max(u, 0.0)),
        dbar_norm_sq=direct,
        dbar_norm_sq_expansion=expansion,
    )


def tangency_residual(phi: Potential, p: CPoint) -> float:
    """|(Re W) phi| = |i phi^a phi_a - i phi^abar phi_abar|; zero for real phi."""
    P, _, _, gphi, _ = _field_blocks(phi, p)
    s_val = complex(P.f1 @ gphi)
    return abs(1j * s_val - 1j * s_val.conjugate())


# ----------------------------------------------------------------------
# flow integration
# ----------------------------------------------------------------------
def _make_rhs(phi: Potential, scale_by_rho: bool):
    n = phi.dim

    def rhs(t, y):
        z = y[:n] + 1j * y[n:]
        p = CPoint(tuple(z))
        if not phi.contains(p):
            # trial stages may overshoot the boundary before the terminal
            # margin event clamps the step; freeze the field out there
            return np.zeros(2 * n)
        _, _, _, gphi, rho = _field_blocks(phi, p)
        v = 1j * gphi
        if scale_by_rho:
            v = rho * v
        return np.concatenate([v.real, v.imag])

    return rhs


def _margin_event(phi: Potential):
    n = phi.dim

    def ev(t, y):
        z = y[:n] + 1j * y[n:]
        return phi.margin(CPoint(tuple(z))) - _MARGIN_FLOOR

    ev.terminal = True
    ev.direction = -1.0
    return ev

def _integrate(phi, start, t0, t1, tol, atol, scale_by_rho=True):
    y0 = np.concatenate([start.array.real, start.array.imag])
    sol = solve_ivp(
        _make_rhs(phi, scale_by_rho),
        (t0, t1),
        y0,
        method="DOP853",
        rtol=tol,
        atol=atol,
        dense_output=True,
        events=[_margin_event(phi)],
    )
    if sol.status == -1:
        raise FlowError(f"integration failed: {sol.message}")
    return sol


def _states_from(sol, ts, n):
    ys = sol.sol(ts)
    return ys[:n] + 1j * ys[n:]


def flow(
    phi: Potential,
    start: CPoint,
    t_end: float,
    tol: float = 1e-9,
    atol: float | None = None,
    samples: int = 401,
) -> FlowTrace:
    """Integrate Re V over [-t_end, t_end] and record interior diagnostics.

    A terminal event fires when the domain margin collapses; if it does, the
    trace is flagged ``incompleteness_suspected`` instead of raising, since
    for constant-length potentials the flow must stay interior and the flag
    is the diagnostic of record.
    """
    if atol is None:
        atol = tol * 1e-3
    n = phi.dim
    fwd = _integrate(phi, start, 0.0, t_end, tol, atol)
    bwd = _integrate(phi, start, 0.0, -t_end, tol, atol)
    suspected = fwd.status == 1 or bwd.status == 1

    t_fwd = np.linspace(0.0, fwd.t[-1], samples)
    t_bwd = np.linspace(bwd.t[-1], 0.0, samples)
    times = np.concatenate([t_bwd[:-1], t_fwd])
    zs = np.concatenate(
        [_states_from(bwd, t_bwd, n)[:, :-1], _states_from(fwd, t_fwd, n)], axis=1
    )

    states = tuple(CPoint(tuple(zs[:, k])) for k in range(zs.shape[1]))
    margins = np.array([phi.margin(q) for q in states])
    phivals = np.array([phi.value(q) for q in states])
    rhos = np.exp(phivals / (n + 1))
    rho0 = math.exp(phi.value(start) / (n + 1))
    return FlowTrace(
        start=start,
        times=times,
        states=states,
        margins=margins,
        rho_values=rhos,
        min_margin=float(margins.min()),
        rho_drift=float(np.max(np.abs(rhos - rho0))),
        potential_drift=float(np.max(np.abs(phivals - phi.value(start)))),
        incompleteness_suspected=bool(suspected),
    )


def flow_map(
    phi: Potential, p: CPoint, t: float, tol: float = 1e-11, atol: float = 1e-13
) -> CPoint:
    """Endpoint of the Re V trajectory from p after time t."""
    if t == 0.0:
        return p
    sol = _integrate(phi, p, 0.0, t, tol, atol)
    if sol.status == 1:
        raise FlowError("trajectory left the domain before the requested time")
    y = sol.y[:, -1]
    n = phi.dim
    return CPoint(tuple(y[:n] + 1j * y[n:]))


def flow_automorphy_check(
    phi: Potential,
    t: float,
    sample: list[CPoint],
    h: float = 1e-4,
    tol: float = 1e-11,
) -> tuple[float, float]:
    """Holomorphy and isometry residuals of the time-t flow map.

    The Jacobian and the conjugate-direction derivative of the map come from
    central finite differences of integrated endpoints, so both residuals
    inherit an O(h^2) floor on top of the integration tolerance.
    """
    n = phi.dim
    max_cr = 0.0
    max_iso = 0.0
    for p in sample:
        J = np.empty((n, n), dtype=complex)
        Jbar = np.empty((n, n), dtype=complex)
        for b in range(n):
            e = np.zeros(n, dtype=complex)
            e[b] = 1.0

            def endpoint(shift):
                return flow_map(phi, p.shifted(shift), t, tol=tol).array

            dx = (endpoint(h * e) - endpoint(-h * e)) / (2 * h)
            dy = (endpoint(1j * h * e) - endpoint(-1j * h * e)) / (2 * h)
            J[:, b] = (dx - 1j * dy) / 2
            Jbar[:, b] = (dx + 1j * dy) / 2
        max_cr = max(max_cr, float(np.max(np.abs(Jbar))))

        base = flow_map(phi, p, t, tol=tol)
        P_p = _tensors(jet_of(phi, p, 2))
        G_p, _, _ = _metric_blocks(P_p)
        P_q = _tensors(jet_of(phi, base, 2))
        G_q, _, _ = _metric_blocks(P_q)
        pulled = J.T @ G_q @ np.conj(J)
        max_iso = max(max_iso, float(np.max(np.abs(pulled - G_p))))
    return max_cr, max_iso


def rho_scaled_completeness_check(
    phi: Potential,
    start: CPoint,
    t_end: float,
    tol: float = 1e-11,
    atol: float = 1e-13,
    samples: int = 41,
) -> RhoFlowCheck:
    """Verify the V-flow is the W-flow reparameterized by c = rho(start).

    Since rho is constant along trajectories of Re W, the integral curve of
    rho Re W through the same start is the time-rescaled curve t -> gamma(ct);
    both sides are integrated independently and compared at sample times.
    """
    n = phi.dim
    c = math.exp(phi.value(start) / (n + 1))
    pad = 1.0 + 1e-9
    v_fwd = _integrate(phi, start, 0.0, t_end, tol, atol, scale_by_rho=True)
    v_bwd = _integrate(phi, start, 0.0, -t_end, tol, atol, scale_by_rho=True)
    w_fwd = _integrate(phi, start, 0.0, c * t_end * pad, tol, atol, scale_by_rho=False)
    w_bwd = _integrate(phi, start, 0.0, -c * t_end * pad, tol, atol, scale_by_rho=False)
    for sol in (v_fwd, v_bwd, w_fwd, w_bwd):
        if sol.status == 1:
            raise FlowError("trajectory left the domain during the comparison")

    ts = np.linspace(-t_end, t_end, samples)
    dev = 0.0
    for t in ts:
        zv = _states_from(v_fwd if t >= 0 else v_bwd, np.array([t]), n)[:, 0]
        zw = _states_from(w_fwd if t >= 0 else w_bwd, np.array([c * t]), n)[:, 0]
        dev = max(dev, float(np.max(np.abs(zv - zw))))
    return RhoFlowCheck(c=c, max_deviation=dev)
