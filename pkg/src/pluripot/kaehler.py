r"""Pointwise Kaehler tensor calculus from a metric potential.

Conventions
-----------
A real potential $\varphi$ induces the metric through

    $g_{a\bar b} = \varphi_{a\bar b} / (n+1)$,

the normalization in which Einstein potentials satisfy
$\mathrm{Ric} = -(n+1) g$. The inverse matrix is stored as
``ginv[d, a]`` $= g^{\bar d a}$ so that ``g @ ginv`` is the identity, and
indices are raised with it, e.g. $\varphi^a = g^{\bar b a}\varphi_{\bar b}$.

Christoffel symbols and curvature follow

    $\Gamma^a_{bc} = g^{\bar d a}\, \partial_b g_{c \bar d}$,
    $R_{a\bar b m\bar n} = -\partial_m \partial_{\bar n} g_{a\bar b}
        + g^{\bar d c}\,(\partial_m g_{a\bar d})(\partial_{\bar n} g_{c\bar b})$,

with Ricci the contraction $g^{\bar n m} R_{m\bar n a\bar b}$, equal to
$-\partial\bar\partial \log\det g$. The complex Laplacian is
$\Delta u = g^{\bar b a} u_{a\bar b}$ (non-positive spectrum convention).

All second- and fourth-order data come from one exact jet of the potential;
the only matrix solves are n x n with n <= 4. Everything here is pure and
safe to evaluate in parallel over point batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from .complexad import CPoint, WJet, jet_of
from .errors import DegenerateMetricError, NotAMetricError

# Condition-number guard for the metric inverse.
_COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class MetricFrame:
    """All pointwise tensor data of the metric induced by a potential.

    Fields follow the index conventions of the module docstring; ``curv`` is
    indexed ``[a, b, m, n]`` for $R_{a\\bar b m\\bar n}$ and ``christoffel``
    as ``[a, b, c]`` for $\\Gamma^a_{bc}$.
    """

    point: CPoint
    g: np.ndarray
    ginv: np.ndarray
    detg: float
    christoffel: np.ndarray
    curv: np.ndarray
    ricci: np.ndarray


@dataclass(frozen=True, eq=False)
class PotentialReport:
    """Gradient and Hessian data of a potential in its own metric.

    ``u`` is the squared gradient length $\\varphi_a\\varphi^a$,
    ``hess20`` the covariant (2,0)-Hessian $\\varphi_{a;b}$, and
    ``pde_residual`` the defect of
    $\\Delta u = \\|\\nabla'^2\\varphi\\|^2 + n(n+1)^2 - (n+1)u$.
    """

    u: float
    gradphi: np.ndarray
    hess20: np.ndarray
    hess20_normsq: float
    laplacian_u: float
    pde_residual: float
    einstein_residual: float


@dataclass(frozen=True, eq=False)
class SOperatorReport:
    """The raised-Hessian square S^a_c = phi^a_{;bbar} phi^bbar_{;c}."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    trace: float
    grad_eigen_residual: float


# ----------------------------------------------------------------------
# jet -> tensor extraction
# ----------------------------------------------------------------------
def _tensors(jet: WJet) -> SimpleNamespace:
    n = jet.n
    order = jet.order
    rng = range(n)
    P = SimpleNamespace(n=n, value=jet.value.real)
    P.f1 = np.array([jet.partial((a,), ()) for a in rng])
    P.f1b = np.array([jet.partial((), (a,)) for a in rng])
    if order >= 2:
        P.f20 = np.array([[jet.partial((a, b), ()) for b in rng] for a in rng])
        P.f11 = np.array([[jet.partial((a,), (b,)) for b in rng] for a in rng])
        P.f02 = np.array([[jet.partial((), (a, b)) for b in rng] for a in rng])
    if order >= 3:
        # f21[a1, a2, b] = phi_{a1 a2 bbar};  f12[a, b1, b2] = phi_{a b1bar b2bar}
        P.f21 = np.array(
            [[[jet.partial((a1, a2), (b,)) for b in rng] for a2 in rng] for a1 in rng]
        )
        P.f12 = np.array(
            [[[jet.partial((a,), (b1, b2)) for b2 in rng] for b1 in rng] for a in rng]
        )
    if order >= 4:
        # f22[a1, a2, b1, b2] = phi_{a1 a2 b1bar b2bar}
        P.f22 = np.array(
            [
                [
                    [
                        [jet.partial((a1, a2), (b1, b2)) for b2 in rng]
                        for b1 in rng
                    ]
                    for a2 in rng
                ]
                for a1 in rng
            ]
        )
    return P


def _metric_blocks(P):
    """Metric, inverse, and determinant with positivity and conditioning guards."""
    s = P.n + 1
    G = P.f11 / s
    herm = 0.5 * (G + G.conj().T)
    eigs = np.linalg.eigvalsh(herm)
    if eigs[0] <= 0:
        raise NotAMetricError(
            f"complex Hessian is not positive definite (min eigenvalue {eigs[0]:.3e})"
        )
    if eigs[-1] / eigs[0] > _COND_LIMIT:
        raise DegenerateMetricError(
            f"metric condition number {eigs[-1] / eigs[0]:.3e} beyond guard"
        )
    Gi = np.linalg.inv(G)
    detg = float(np.linalg.det(G).real)
    return G, Gi, detg


def _derivative_blocks(P):
    """First and mixed-second derivatives of the metric from jet partials."""
    s = P.n + 1
    dG = np.transpose(P.f21, (1, 0, 2)) / s    # dG[m, a, d] = d_m g_{a dbar}
    dGb = np.transpose(P.f12, (1, 0, 2)) / s   # dGb[m, a, d] = d_mbar g_{a dbar}
    ddG = None
    if hasattr(P, "f22"):
        # ddG[m, n, a, b] = d_m d_nbar g_{a bbar}
        ddG = np.transpose(P.f22, (1, 3, 0, 2)) / s
    return dG, dGb, ddG


def _christoffel(Gi, dG):
    return np.einsum("da,mld->aml", Gi, dG)


def _curvature(Gi, dG, dGb, ddG):
    return -np.transpose(ddG, (2, 3, 0, 1)) + np.einsum(
        "dc,mad,ncb->abmn", Gi, dG, dGb
    )


def _ricci(Gi, curv):
    return np.einsum("nm,mnab->ab", Gi, curv)


def _hermitian_normsq_11(T, G, Gi) -> float:
    """Squared norm of a tensor T^a_{bbar} (mixed vector-form valence)."""
    return float(
        np.real(np.einsum("ab,cd,ac,bd->", T, np.conj(T), G, Gi))
    )


def _hermitian_normsq_20(H, Gi) -> float:
    """Squared norm of a covariant (2,0)-tensor H_{ab}."""
    return float(np.real(np.einsum("ab,cd,ca,db->", H, np.conj(H), Gi, Gi)))


# ----------------------------------------------------------------------
# public operations
# ----------------------------------------------------------------------
def frame_from_potential(phi, p: CPoint) -> MetricFrame:
    """Metric, Christoffel symbols, curvature, and Ricci at one point."""
    jet = jet_of(phi, p, 4)
    P = _tensors(jet)
    G, Gi, detg = _metric_blocks(P)
    dG, dGb, ddG = _derivative_blocks(P)
    Gamma = _christoffel(Gi, dG)
    curv = _curvature(Gi, dG, dGb, ddG)
    ricci = _ricci(Gi, curv)
    return MetricFrame(
        point=p, g=G, ginv=Gi, detg=detg, christoffel=Gamma, curv=curv, ricci=ricci
    )


def ricci_from_logdet(phi, p: CPoint) -> np.ndarray:
    """Ricci via -d dbar log det g, the cross-check route for the contraction."""
    jet = jet_of(phi, p, 4)
    P = _tensors(jet)
    _, Gi, _ = _metric_blocks(P)
    dG, dGb, ddG = _derivative_blocks(P)
    n = P.n
    out = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            out[a, b] = -np.trace(Gi @ ddG[a, b]) + np.trace(
                Gi @ dG[a] @ Gi @ dGb[b]
            )
    return out


def einstein_residual(phi, p: CPoint) -> float:
    """Max-norm defect of Ric + (n+1) g."""
    frame = frame_from_potential(phi, p)
    s = p.n + 1
    return float(np.max(np.abs(frame.ricci + s * frame.g)))


def gradient_length_sq(phi, p: CPoint) -> float:
    """Squared length of the (1,0)-differential in the potential's own metric."""
    P = _tensors(jet_of(phi, p, 2))
    G, Gi, _ = _metric_blocks(P)
    gphi = Gi.T @ P.f1b
    return float(np.real(P.f1 @ gphi))


def _u_second_mixed(P, Gi, dG, dGb, ddG):
    """Mixed second derivatives of u = phi_g g^{dbar g} phi_dbar by chain rule.

    Explicit product rule over the three factors; the inverse-metric blocks
    use d(Ginv) = -Ginv dG Ginv. This path works from raw jet partials and is
    validated against finite differences of the scalar map p -> u(p).
    """
    n = P.n
    dGi = np.stack([-Gi @ dG[m] @ Gi for m in range(n)])
    dGib = np.stack([-Gi @ dGb[m] @ Gi for m in range(n)])
    ddGi = np.empty((n, n, n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            ddGi[a, b] = (
                Gi @ dGb[b] @ Gi @ dG[a] @ Gi
                - Gi @ ddG[a, b] @ Gi
                + Gi @ dG[a] @ Gi @ dGb[b] @ Gi
            )
    A, C = P.f1, P.f1b
    terms = [
        np.einsum("gab,dg,d->ab", P.f21, Gi, C),
        np.einsum("ga,bdg,d->ab", P.f20, dGib, C),
        np.einsum("ga,dg,db->ab", P.f20, Gi, P.f02),
        np.einsum("gb,adg,d->ab", P.f11, dGi, C),
        np.einsum("g,abdg,d->ab", A, ddGi, C),
        np.einsum("g,adg,db->ab", A, dGi, P.f02),
        np.einsum("gb,dg,ad->ab", P.f11, Gi, P.f11),
        np.einsum("g,bdg,ad->ab", A, dGib, P.f11),
        np.einsum("g,dg,adb->ab", A, Gi, P.f12),
    ]
    return sum(terms)


def potential_report(phi, p: CPoint) -> PotentialReport:
    """Gradient length, covariant Hessian, Laplacian of u, and PDE defect."""
    jet = jet_of(phi, p, 4)
    P = _tensors(jet)
    n = P.n
    s = n + 1
    G, Gi, _ = _metric_blocks(P)
    dG, dGb, ddG = _derivative_blocks(P)
    Gamma = _christoffel(Gi, dG)

    gphi = Gi.T @ P.f1b
    u = float(np.real(P.f1 @ gphi))
    H = P.f20 - np.einsum("gab,g->ab", Gamma, P.f1)
    normsq = _hermitian_normsq_20(H, Gi)
    Uab = _u_second_mixed(P, Gi, dG, dGb, ddG)
    lap = float(np.real(np.einsum("ba,ab->", Gi, Uab)))
    pde_res = abs(lap - normsq - n * s**2 + s * u)

    curv = _curvature(Gi, dG, dGb, ddG)
    ricci = _ricci(Gi, curv)
    eres = float(np.max(np.abs(ricci + s * G)))
    return PotentialReport(
        u=u,
        gradphi=gphi,
        hess20=H,
        hess20_normsq=normsq,
        laplacian_u=lap,
        pde_residual=pde_res,
        einstein_residual=eres,
    )


def pde_residual(phi, p: CPoint) -> float:
    return potential_report(phi, p).pde_residual


def key_equation_residual(phi, p: CPoint) -> float:
    """Max-norm defect of phi_{a;c} phi^a = -(n+1) phi_c.

    Vanishes for potentials whose gradient length is constant; for others it
    is a genuine function of the point.
    """
    P = _tensors(jet_of(phi, p, 3))
    s = P.n + 1
    _, Gi, _ = _metric_blocks(P)
    dG, _, _ = _derivative_blocks(P)
    Gamma = _christoffel(Gi, dG)
    gphi = Gi.T @ P.f1b
    H = P.f20 - np.einsum("gab,g->ab", Gamma, P.f1)
    res = H.T @ gphi + s * P.f1
    return float(np.max(np.abs(res)))


def curvature_identity_residual(phi, p: CPoint) -> float:
    """Defect of the commutation identities for third covariant derivatives.

    Checks phi_{a;l mbar} = phi_b R_a^b_{l mbar} together with the vanishing
    of phi_{bbar;l mbar}, both consequences of phi_{a;bbar} = (n+1) g_{a bbar}
    and metric compatibility.
    """
    jet = jet_of(phi, p, 4)
    P = _tensors(jet)
    n = P.n
    _, Gi, _ = _metric_blocks(P)
    dG, dGb, ddG = _derivative_blocks(P)
    Gamma = _christoffel(Gi, dG)
    curv = _curvature(Gi, dG, dGb, ddG)

    # d_mbar Gamma^g_{al} = d_mbar(Gi[d,g]) dG[a,l,d] + Gi[d,g] ddG[a,m,l,d]
    dGi_bar = np.stack([-Gi @ dGb[m] @ Gi for m in range(n)])
    dGamma_bar = np.einsum("mdg,ald->mgal", dGi_bar, dG) + np.einsum(
        "dg,amld->mgal", Gi, ddG
    )

    # (1,0)-part: d_mbar(phi_{al} - Gamma^g_{al} phi_g) - phi_b R_a^b_{l mbar}
    lhs = (
        P.f21
        - np.einsum("mgal,g->alm", dGamma_bar, P.f1)
        - np.einsum("gal,gm->alm", Gamma, P.f11)
    )
    r_up = np.einsum("cb,aclm->ablm", Gi, curv)
    rhs = np.einsum("b,ablm->alm", P.f1, r_up)
    part1 = np.max(np.abs(lhs - rhs))

    # (0,1)-part: d_mbar(phi_{l bbar}) - conj(Gamma^d_{mb}) phi_{l dbar}
    part2 = np.max(
        np.abs(
            np.einsum("lbm->blm", P.f12)
            - np.einsum("dmb,ld->blm", np.conj(Gamma), P.f11)
        )
    )
    return float(max(part1, part2))


def s_operator(phi, p: CPoint) -> SOperatorReport:
    """Assemble S = phi^a_{;bbar} phi^bbar_{;c} and its spectral data.

    Eigenvalues are returned sorted by descending real part. The
    ``grad_eigen_residual`` field measures S grad(phi) - (n+1)^2 grad(phi),
    which vanishes when the gradient length is the constant n+1.
    """
    P = _tensors(jet_of(phi, p, 3))
    s = P.n + 1
    _, Gi, _ = _metric_blocks(P)
    dG, _, _ = _derivative_blocks(P)
    Gamma = _christoffel(Gi, dG)
    gphi = Gi.T @ P.f1b
    H = P.f20 - np.einsum("gab,g->ab", Gamma, P.f1)

    M2 = Gi @ H                      # phi^bbar_{;c}
    S = np.conj(M2) @ M2             # phi^a_{;bbar} phi^bbar_{;c}
    eigs = np.linalg.eigvals(S)
    eigs = eigs[np.argsort(-eigs.real)]
    trace = float(np.trace(S).real)
    grad_res = float(np.max(np.abs(S @ gphi - s**2 * gphi)))
    return SOperatorReport(
        matrix=S, eigenvalues=eigs, trace=trace, grad_eigen_residual=grad_res
    )


def segment_metric_length(phi, a: CPoint, b: CPoint, nodes: int = 64) -> float:
    """Arc length of the straight segment a -> b in the metric of ``phi``.

    Uses the real arc-length normalization ``ds = 2 sqrt(g(v, vbar))``, under
    which the unit-disk potential -2 log(1 - |z|^2) gives d(0, r) = 2 atanh r.
    Gauss-Legendre quadrature with a fixed node count keeps this deterministic;
    as a straight-segment length it upper-bounds the geodesic distance.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    v = b.array - a.array
    total = 0.0
    for xi, wi in zip(x, w):
        q = CPoint(tuple(a.array + xi * v))
        P = _tensors(jet_of(phi, q, 2))
        G, _, _ = _metric_blocks(P)
        speed_sq = float(np.real(v @ G @ np.conj(v)))
        total += wi * 2.0 * math.sqrt(max(speed_sq, 0.0))
    return total
