r"""Catalog of explicit potentials, defining functions, and ball automorphisms.

Potentials
----------
``ball``                ``-(n+1) log(1 - |z|^2)``, the standard complete
                        Einstein potential of the unit ball.
``ball_horospherical``  ``(n+1) log(|1 + z^1|^2 / (1 - |z|^2))``, same metric,
                        constant gradient length n+1 (level sets are
                        horospheres at the boundary point -e1).
``ball_tilted``         ball potential plus a pluriharmonic tilt
                        ``c (z^1 + conj z^1)``; still Einstein, gradient
                        length genuinely non-constant.
``ball_perturbed``      ball potential plus ``|z^1|^4``; deliberately breaks
                        the Einstein condition (negative control).

Defining functions are Reinhardt-radial, ``r(z) = rho(|z|^2)`` with
``rho(t) = scale (t + eps t^2 - 1)`` and ``eps`` capped at 0.2 so the
complex Hessian of r stays positive definite on the closed domain. The
``_adj`` variants rescale r by a constant so the background defect
functional F vanishes on the boundary, improving its decay order from
O(1) to O(|r|).

Ball automorphisms use the standard involution exchanging 0 and a,

    ``m_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>)``,

with ``P_a`` the orthogonal projection onto a, ``Q_a = I - P_a``, and
``s_a = sqrt(1 - |a|^2)``; composing with a unitary factor reaches the full
automorphism group. Component jets to order 4 make exact pullbacks of
potentials available downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .complexad import CPoint, WJet, compose_jet, coordinate_jets, jet_space
from .errors import (
    DomainError,
    EvaluationError,
    IncompatibleJetsError,
    InvalidParameterError,
    NotAMetricError,
)

_MAX_RADIAL_EPS = 0.2


# ----------------------------------------------------------------------
# potential base
# ----------------------------------------------------------------------
class Potential:
    """A named, jet-evaluable potential with a domain membership test.

    Subclasses provide ``jet`` and ``value`` and may advertise
    ``grad_length_bound`` (a global supremum of the gradient length, used as
    the growth constant in envelope checks) and
    ``constant_gradient_length`` when the length is constant.
    """

    name: str = "potential"
    dim: int = 0
    grad_length_bound: float | None = None
    constant_gradient_length: bool = False

    def contains(self, p: CPoint) -> bool:
        return p.n == self.dim and self.margin(p) > 0.0

    def margin(self, p: CPoint) -> float:
        raise NotImplementedError

    def value(self, p: CPoint) -> float:
        raise NotImplementedError

    def jet(self, p: CPoint, order: int) -> WJet:
        raise NotImplementedError

    def _require_inside(self, p: CPoint):
        if p.n != self.dim:
            raise IncompatibleJetsError(
                f"{self.name!r} lives on C^{self.dim}, got a point of C^{p.n}"
            )
        if not self.contains(p):
            raise DomainError(f"{p!r} is outside the domain of {self.name!r}")

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r}, dim={self.dim})"


class _BallBased(Potential):
    def __init__(self, dim: int):
        self.dim = dim
        self.grad_length_bound = float(dim + 1)

    def margin(self, p: CPoint) -> float:
        return 1.0 - p.norm()

    def _norm_jets(self, p, order):
        space = jet_space(self.dim, order)
        zs = coordinate_jets(space, p)
        t = zs[0] * zs[0].conj()
        for zj in zs[1:]:
            t = t + zj * zj.conj()
        return space, zs, t


class BallPotential(_BallBased):
    """-(n+1) log(1 - |z|^2) on the unit ball."""

    def __init__(self, dim: int):
        super().__init__(dim)
        self.name = "ball"

    def value(self, p: CPoint) -> float:
        self._require_inside(p)
        return -(self.dim + 1) * math.log1p(-p.norm_sq())

    def jet(self, p: CPoint, order: int) -> WJet:
        self._require_inside(p)
        _, _, t = self._norm_jets(p, order)
        return (1 - t).log() * (-(self.dim + 1))


class HorosphericalPotential(_BallBased):
    """(n+1) log(|1 + z^1|^2 / (1 - |z|^2)); constant gradient length n+1."""

    constant_gradient_length = True

    def __init__(self, dim: int):
        super().__init__(dim)
        self.name = "ball_horospherical"

    def value(self, p: CPoint) -> float:
        self._require_inside(p)
        w = 1 + p.coords[0]
        return (self.dim + 1) * (
            2.0 * math.log(abs(w)) - math.log1p(-p.norm_sq())
        )

    def jet(self, p: CPoint, order: int) -> WJet:
        self._require_inside(p)
        _, zs, t = self._norm_jets(p, order)
        lw = (1 + zs[0]).log()
        return (lw + lw.conj() - (1 - t).log()) * (self.dim + 1)


class TiltedBallPotential(_BallBased):
    """Ball potential plus the pluriharmonic tilt c (z^1 + conj z^1).

    Same metric and Einstein condition as the ball potential, but the
    gradient length is genuinely non-constant, which makes this the honest
    negative control for constructions that require constant length.
    """

    def __init__(self, dim: int, tilt: float = 0.5):
        super().__init__(dim)
        self.name = "ball_tilted"
        self.tilt = float(tilt)
        self.grad_length_bound = None

    def value(self, p: CPoint) -> float:
        self._require_inside(p)
        return (
            -(self.dim + 1) * math.log1p(-p.norm_sq())
            + 2.0 * self.tilt * p.coords[0].real
        )

    def jet(self, p: CPoint, order: int) -> WJet:
        self._require_inside(p)
        _, zs, t = self._norm_jets(p, order)
        return (1 - t).log() * (-(self.dim + 1)) + (zs[0] + zs[0].conj()) * self.tilt


class PerturbedBallPotential(_BallBased):
    """Ball potential plus |z^1|^4; breaks the Einstein condition."""

    def __init__(self, dim: int):
        super().__init__(dim)
        self.name = "ball_perturbed"
        self.grad_length_bound = None

    def value(self, p: CPoint) -> float:
        self._require_inside(p)
        return -(self.dim + 1) * math.log1p(-p.norm_sq()) + abs(p.coords[0]) ** 4

    def jet(self, p: CPoint, order: int) -> WJet:
        self._require_inside(p)
        _, zs, t = self._norm_jets(p, order)
        r1 = zs[0] * zs[0].conj()
        return (1 - t).log() * (-(self.dim + 1)) + r1 * r1


# ----------------------------------------------------------------------
# defining functions (Reinhardt-radial catalog)
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class RadialProfile:
    """rho(|z|^2) profile of a radial defining function, with derivatives."""

    eps: float
    scale: float
    t_boundary: float

    def rho(self, t):
        return self.scale * (t + self.eps * t * t - 1.0)

    def d1(self, t):
        return self.scale * (1.0 + 2.0 * self.eps * t)

    def d2(self, t):
        return self.scale * 2.0 * self.eps

    # w = -log(-rho) profile and derivatives
    def w(self, t):
        return -np.log(-self.rho(t))

    def w1(self, t):
        return -self.d1(t) / self.rho(t)

    def w2(self, t):
        q = self.d1(t) / self.rho(t)
        return q * q - self.d2(t) / self.rho(t)

    def background_defect(self, t, n: int):
        """F = log[det(r_Hess) (-r + |dr|^2)] reduced to the radial profile."""
        a = self.d1(t)
        c = a + t * self.d2(t)
        grad_sq = t * a * a / c
        return np.log(a ** (n - 1) * c * (-self.rho(t) + grad_sq))


class DefiningFunction:
    """r < 0 inside, r = 0 on the boundary, with a strictly positive Hessian."""

    def __init__(self, name: str, dim: int, profile: RadialProfile):
        self.name = name
        self.dim = dim
        self.radial = profile
        self._check_strict_psh()

    def _check_strict_psh(self):
        prof = self.radial
        ts = np.linspace(0.0, prof.t_boundary, 33)
        a = prof.d1(ts)
        c = a + ts * prof.d2(ts)
        if np.any(a <= 0) or np.any(c <= 0):
            raise InvalidParameterError(
                f"defining function {self.name!r} is not strictly "
                "plurisubharmonic on the closed domain"
            )

    def value(self, p: CPoint) -> float:
        return float(self.radial.rho(p.norm_sq()))

    def contains(self, p: CPoint) -> bool:
        return p.n == self.dim and self.value(p) < 0.0

    def margin(self, p: CPoint) -> float:
        # first-order proxy for the distance to the boundary in t
        prof = self.radial
        return float(-self.value(p) / prof.d1(prof.t_boundary))

    def jet(self, p: CPoint, order: int) -> WJet:
        if p.n != self.dim:
            raise IncompatibleJetsError(f"{self.name!r} lives on C^{self.dim}")
        space = jet_space(self.dim, order)
        zs = coordinate_jets(space, p)
        t = zs[0] * zs[0].conj()
        for zj in zs[1:]:
            t = t + zj * zj.conj()
        prof = self.radial
        return (t + (t * t) * prof.eps - 1.0) * prof.scale

    def __repr__(self):
        return f"DefiningFunction({self.name!r}, dim={self.dim})"


def ball_defining(dim: int) -> DefiningFunction:
    return DefiningFunction("ball", dim, RadialProfile(eps=0.0, scale=1.0, t_boundary=1.0))


def radial_defining(dim: int, eps: float, adjusted: bool = False) -> DefiningFunction:
    """Perturbed radial domain rho(t) = t + eps t^2 - 1, eps in [0, 0.2].

    With ``adjusted=True`` the defining function is rescaled by the constant
    that zeroes the background defect F on the boundary, so F = O(|r|)
    instead of O(1).
    """
    eps = float(eps)
    if not 0.0 <= eps <= _MAX_RADIAL_EPS:
        raise InvalidParameterError(
            f"radial perturbation eps={eps} outside [0, {_MAX_RADIAL_EPS}]"
        )
    t_b = 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * eps))
    scale = 1.0
    name = f"radial_eps={eps:g}"
    if adjusted:
        raw = RadialProfile(eps=eps, scale=1.0, t_boundary=t_b)
        f_boundary = float(raw.background_defect(t_b, dim))
        scale = math.exp(-f_boundary / (dim + 1))
        name += "_adj"
    return DefiningFunction(name, dim, RadialProfile(eps=eps, scale=scale, t_boundary=t_b))


class LogDomainPotential(Potential):
    """(n+1) w with w = -log(-r); the background potential of a domain."""

    def __init__(self, rdef: DefiningFunction):
        self.rdef = rdef
        self.dim = rdef.dim
        self.name = f"w[{rdef.name}]"

    def margin(self, p: CPoint) -> float:
        return self.rdef.margin(p)

    def contains(self, p: CPoint) -> bool:
        return self.rdef.contains(p)

    def value(self, p: CPoint) -> float:
        self._require_inside(p)
        return -(self.dim + 1) * math.log(-self.rdef.value(p))

    def jet(self, p: CPoint, order: int) -> WJet:
        self._require_inside(p)
        rj = self.rdef.jet(p, order)
        return (rj * (-1.0)).log() * (-(self.dim + 1))


def w_potential(rdef: DefiningFunction) -> LogDomainPotential:
    return LogDomainPotential(rdef)


# ----------------------------------------------------------------------
# the w-metric formulas
# ----------------------------------------------------------------------
def _r_blocks(rdef: DefiningFunction, p: CPoint, closed: bool = False):
    jet = rdef.jet(p, 2)
    rv = jet.value.real
    if (rv >= 0.0 and not closed) or (closed and rv > 1e-12):
        raise DomainError(f"{p!r} is outside {rdef.name!r} (r = {rv:g})")
    n = p.n
    r1 = np.array([jet.partial((a,), ()) for a in range(n)])
    r1b = np.array([jet.partial((), (a,)) for a in range(n)])
    r2 = np.array([[jet.partial((a,), (b,)) for b in range(n)] for a in range(n)])
    return rv, r1, r1b, r2


def w_metric(rdef: DefiningFunction, p: CPoint) -> np.ndarray:
    """Levi-form metric of w = -log(-r): r_{a bbar}/(-r) + r_a r_bbar / r^2."""
    rv, r1, r1b, r2 = _r_blocks(rdef, p)
    return r2 / (-rv) + np.outer(r1, r1b) / rv**2


def w_inverse(rdef: DefiningFunction, p: CPoint) -> np.ndarray:
    """Closed-form inverse of :func:`w_metric` via a rank-one update.

    Returns (-r) (r^{bbar a} + r^bbar r^a / (r - |dr|^2)) as a matrix in the
    same layout as ``numpy.linalg.inv(w_metric(...))``.
    """
    rv, r1, r1b, r2 = _r_blocks(rdef, p)
    r2inv = np.linalg.inv(r2)
    q = r2inv @ r1
    grad_sq = float(np.real(r1b @ r2inv @ r1))
    return (-rv) * (r2inv + np.outer(q, np.conj(q)) / (rv - grad_sq))


def length_identity_check(rdef: DefiningFunction, p: CPoint) -> tuple[float, float]:
    """Both sides of w^{bbar a} w_a w_bbar = |dr|^2 / (|dr|^2 - r).

    The left side contracts tensors assembled from the jet, the right side is
    the scalar closed form; both are at most 1 inside the domain.
    """
    rv, r1, r1b, r2 = _r_blocks(rdef, p)
    winv = w_inverse(rdef, p)
    wa = -r1 / rv
    wb = -r1b / rv
    lhs = float(np.real(np.einsum("ba,a,b->", winv, wa, wb)))
    r2inv = np.linalg.inv(r2)
    grad_sq = float(np.real(r1b @ r2inv @ r1))
    rhs = grad_sq / (grad_sq - rv)
    return lhs, rhs


def fefferman_F(rdef: DefiningFunction, p: CPoint) -> float:
    """The background defect F = log[det(r_{a bbar}) (-r + |dr|^2)].

    F measures how far the w-metric is from Einstein; it vanishes identically
    for the unit ball.
    """
    rv, r1, r1b, r2 = _r_blocks(rdef, p, closed=True)
    detr = float(np.linalg.det(r2).real)
    if detr <= 0:
        raise NotAMetricError(f"degenerate Levi form of {rdef.name!r} at {p!r}")
    r2inv = np.linalg.inv(r2)
    grad_sq = float(np.real(r1b @ r2inv @ r1))
    arg = detr * (-rv + grad_sq)
    if not arg > 0:
        raise EvaluationError("defect functional argument is not positive")
    return math.log(arg)


# ----------------------------------------------------------------------
# ball automorphisms
# ----------------------------------------------------------------------
class MoebiusMap:
    """The standard ball involution exchanging 0 and a, times a unitary.

    Without a unitary factor the map is its own inverse. Component jets are
    available to order 4, so pullbacks of potentials stay inside the exact
    jet algebra.
    """

    def __init__(self, a: CPoint, unitary: np.ndarray | None = None):
        if a.norm() >= 1.0:
            raise InvalidParameterError(
                f"involution parameter must satisfy |a| < 1, got |a| = {a.norm():g}"
            )
        self.a = a
        self.dim = a.n
        if unitary is not None:
            unitary = np.asarray(unitary, dtype=complex)
            if unitary.shape != (self.dim, self.dim):
                raise InvalidParameterError("unitary factor has the wrong shape")
            defect = np.max(np.abs(unitary.conj().T @ unitary - np.eye(self.dim)))
            if defect > 1e-12:
                raise InvalidParameterError("factor is not unitary")
        self.unitary = unitary

    def apply(self, p: CPoint) -> CPoint:
        z = p.array
        a = self.a.array
        ta = self.a.norm_sq()
        ip = complex(z @ np.conj(a))
        denom = 1.0 - ip
        if abs(denom) < 1e-15:
            raise EvaluationError("Moebius denominator vanished")
        if ta == 0.0:
            w = -z
        else:
            s = math.sqrt(1.0 - ta)
            pz = (ip / ta) * a
            w = (a - pz - s * (z - pz)) / denom
        if self.unitary is not None:
            w = self.unitary @ w
        return CPoint(tuple(w))

    __call__ = apply

    def jets(self, p: CPoint, order: int) -> list[WJet]:
        """Order-``order`` jets of the (holomorphic) map components at p."""
        space = jet_space(self.dim, order)
        zs = coordinate_jets(space, p)
        a = self.a.array
        ta = self.a.norm_sq()
        ip = zs[0] * complex(np.conj(a[0]))
        for k in range(1, self.dim):
            ip = ip + zs[k] * complex(np.conj(a[k]))
        inv_denom = (1 - ip).reciprocal()
        comps = []
        if ta == 0.0:
            comps = [zs[k] * (-1.0) for k in range(self.dim)]
        else:
            s = math.sqrt(1.0 - ta)
            proj_coef = ip * (1.0 / ta)
            for k in range(self.dim):
                pk = proj_coef * complex(a[k])
                num = complex(a[k]) - pk - (zs[k] - pk) * s
                comps.append(num * inv_denom)
        if self.unitary is not None:
            mixed = []
            for row in self.unitary:
                acc = comps[0] * complex(row[0])
                for k in range(1, self.dim):
                    acc = acc + comps[k] * complex(row[k])
                mixed.append(acc)
            comps = mixed
        return comps

    def jacobian(self, p: CPoint) -> np.ndarray:
        """Holomorphic Jacobian J[m, b] = d m^m / d z^b from order-1 jets."""
        comps = self.jets(p, 1)
        n = self.dim
        return np.array(
            [[comps[m].partial((b,), ()) for b in range(n)] for m in range(n)]
        )

    def inverse(self) -> "MoebiusMap":
        if self.unitary is None:
            return self
        ua = CPoint(tuple(self.unitary @ self.a.array))
        return MoebiusMap(ua, self.unitary.conj().T)

    def __repr__(self):
        tag = ", unitary" if self.unitary is not None else ""
        return f"MoebiusMap(a={self.a!r}{tag})"


def moebius(a: CPoint) -> MoebiusMap:
    return MoebiusMap(a)


def moebius_apply(m: MoebiusMap, p: CPoint) -> CPoint:
    return m.apply(p)


def moebius_jet(m: MoebiusMap, p: CPoint, order: int) -> list[WJet]:
    return m.jets(p, order)


def identity_map(dim: int) -> MoebiusMap:
    """The identity automorphism, as the involution at 0 times -I."""
    return MoebiusMap(CPoint.of(*([0.0] * dim)), -np.eye(dim, dtype=complex))


def boundary_sequence(target: CPoint, count: int) -> list[MoebiusMap]:
    """Maps m_{a_j} with a_j = (1 - 2^-j) target, so m_{a_j}(0) -> boundary."""
    nrm = target.norm()
    if abs(nrm - 1.0) > 1e-9:
        raise InvalidParameterError("boundary target must be a unit vector")
    direction = target.array / nrm
    return [
        MoebiusMap(CPoint(tuple((1.0 - 2.0 ** (-j)) * direction)))
        for j in range(1, count + 1)
    ]


# ----------------------------------------------------------------------
# pullbacks
# ----------------------------------------------------------------------
class PullbackPotential(Potential):
    """phi(f(z)) - phi(f(p0)): the rescaled potential attached to a map.

    The pullback of a potential by a metric automorphism is again a potential
    of the same metric, so Einstein diagnostics carry over unchanged.
    """

    def __init__(self, phi: Potential, fmap: MoebiusMap, p0: CPoint):
        if phi.dim != fmap.dim or p0.n != phi.dim:
            raise IncompatibleJetsError("pullback pieces disagree on dimension")
        self.phi = phi
        self.map = fmap
        self.p0 = p0
        self.dim = phi.dim
        self.shift = phi.value(fmap.apply(p0))
        self.name = f"{phi.name}|pullback"
        self.grad_length_bound = phi.grad_length_bound
        self.constant_gradient_length = phi.constant_gradient_length

    def margin(self, p: CPoint) -> float:
        return min(1.0 - p.norm(), self.phi.margin(self.map.apply(p)))

    def contains(self, p: CPoint) -> bool:
        return p.n == self.dim and p.norm() < 1.0 and self.phi.contains(self.map.apply(p))

    def value(self, p: CPoint) -> float:
        q = self.map.apply(p)
        if not self.phi.contains(q):
            raise EvaluationError(
                f"image point of {p!r} exits the numerical domain margin"
            )
        return self.phi.value(q) - self.shift

    def jet(self, p: CPoint, order: int) -> WJet:
        comps = self.map.jets(p, order)
        q = CPoint(tuple(j.value for j in comps))
        if not self.phi.contains(q):
            raise EvaluationError(
                f"image point of {p!r} exits the numerical domain margin"
            )
        return compose_jet(self.phi.jet(q, order), comps) - self.shift


# ----------------------------------------------------------------------
# catalog registry
# ----------------------------------------------------------------------
def potential_catalog(name: str, dim: int) -> Potential:
    if name == "ball":
        return BallPotential(dim)
    if name == "ball_horospherical":
        return HorosphericalPotential(dim)
    if name == "ball_tilted":
        return TiltedBallPotential(dim)
    if name == "ball_perturbed":
        return PerturbedBallPotential(dim)
    raise InvalidParameterError(f"unknown potential {name!r}")


def domain_catalog(name: str, dim: int) -> DefiningFunction:
    if name == "ball":
        return ball_defining(dim)
    if name.startswith("radial_eps="):
        rest = name[len("radial_eps="):]
        adjusted = rest.endswith("_adj")
        if adjusted:
            rest = rest[: -len("_adj")]
        try:
            eps = float(rest)
        except ValueError as exc:
            raise InvalidParameterError(f"cannot parse eps in {name!r}") from exc
        return radial_defining(dim, eps, adjusted=adjusted)
    raise InvalidParameterError(f"unknown domain {name!r}")
