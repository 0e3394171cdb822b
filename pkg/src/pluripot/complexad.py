"""Forward-mode jets in the Wirtinger variables.

A :class:`WJet` stores the truncated Taylor expansion of a scalar function
around a base point of C^n, with one coefficient per mixed monomial in the
holomorphic increments dz^a and their conjugates. Arithmetic is exact
truncated-polynomial algebra in 2n nilpotent variables, so every coefficient
of a composed expression equals the corresponding analytic Wirtinger partial
divided by multi-index factorials. Finite differences enter only through the
cross-validation oracle :func:`fd_check`.

Supported shapes are dimension n <= 4 and order 1..4; coefficients are stored
densely per total degree. Jets and points are immutable values, and all
operations here are pure functions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainError,
    IncompatibleJetsError,
    InvalidParameterError,
    InvalidStepError,
    UnsupportedOrderError,
)

MAX_ORDER = 4
MAX_DIM = 4

# Steps below this are dominated by rounding noise in double precision.
_MIN_FD_STEP = 1e-10


@dataclass(frozen=True)
class CPoint:
    """A point of C^n as an immutable tuple of finite complex coordinates."""

    coords: tuple[complex, ...]

    def __post_init__(self):
        coords = tuple(complex(c) for c in self.coords)
        if len(coords) == 0:
            raise DomainError("a point needs at least one coordinate")
        for c in coords:
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise DomainError(f"non-finite coordinate {c!r}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *coords) -> "CPoint":
        return cls(tuple(complex(c) for c in coords))

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=complex)

    def norm_sq(self) -> float:
        return float(sum((c * c.conjugate()).real for c in self.coords))

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def shifted(self, delta) -> "CPoint":
        return CPoint(tuple(self.array + np.asarray(delta, dtype=complex)))

    def __repr__(self):
        inner = ", ".join(format(c, "g") for c in self.coords)
        return f"CPoint({inner})"


def _monomials(slots: int, order: int):
    if slots == 0:
        yield ()
        return
    for e in range(order + 1):
        for rest in _monomials(slots - 1, order - e):
            yield (e,) + rest


def _multifactorial(mono) -> float:
    out = 1.0
    for e in mono:
        out *= math.factorial(e)
    return out


class JetSpace:
    """Shared monomial tables for truncated polynomials in 2n slots.

    Slots 0..n-1 carry exponents of the holomorphic increments, slots
    n..2n-1 exponents of their conjugates. Instances are cached per
    (n, order) and reused by every jet of that shape, which also makes the
    compatibility check between jets a cheap identity comparison.
    """

    def __init__(self, n: int, order: int):
        if not 1 <= n <= MAX_DIM:
            raise UnsupportedOrderError(
                f"dimension {n} outside the supported range 1..{MAX_DIM}"
            )
        if order not in (1, 2, 3, 4):
            raise UnsupportedOrderError(f"jet order {order} not in 1..{MAX_ORDER}")
        self.n = n
        self.order = order
        monos = sorted(_monomials(2 * n, order), key=lambda m: (sum(m), m))
        self.monomials = monos
        self.size = len(monos)
        self.index = {m: i for i, m in enumerate(monos)}
        self.degrees = np.array([sum(m) for m in monos], dtype=int)
        self.factorials = np.array([_multifactorial(m) for m in monos])
        self.conj_perm = np.array(
            [self.index[m[n:] + m[:n]] for m in monos], dtype=int
        )

        # Dense multiplication table, i-major so accumulation order is fixed.
        ii, jj, kk = [], [], []
        for i, mi in enumerate(monos):
            di = sum(mi)
            for j, mj in enumerate(monos):
                if di + sum(mj) > order:
                    continue
                ii.append(i)
                jj.append(j)
                kk.append(self.index[tuple(a + b for a, b in zip(mi, mj))])
        self._mul_i = np.array(ii, dtype=int)
        self._mul_j = np.array(jj, dtype=int)
        self._mul_k = np.array(kk, dtype=int)

        # Prefix decomposition m = e_slot + m' used by polynomial composition.
        first, prev = [-1], [-1]
        for m in monos[1:]:
            s = next(k for k, e in enumerate(m) if e > 0)
            shrunk = list(m)
            shrunk[s] -= 1
            first.append(s)
            prev.append(self.index[tuple(shrunk)])
        self.comp_first = first
        self.comp_prev = prev

    def mul_arr(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.zeros(self.size, dtype=complex)
        np.add.at(out, self._mul_k, a[self._mul_i] * b[self._mul_j])
        return out

    def __repr__(self):
        return f"JetSpace(n={self.n}, order={self.order})"


@lru_cache(maxsize=None)
def jet_space(n: int, order: int) -> JetSpace:
    return JetSpace(n, order)


class WJet:
    """Truncated mixed Taylor expansion of a scalar function at a point.

    ``coeffs[k]`` is the Taylor coefficient of the k-th monomial: the mixed
    Wirtinger partial divided by the product of exponent factorials. Missing
    indices (total degree above the order) are implicitly zero. Jets are
    immutable values; every operation returns a fresh jet and never reads
    coefficients above its own order.
    """

    __slots__ = ("space", "base", "coeffs")

    def __init__(self, space: JetSpace, base: CPoint, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (space.size,):
            raise IncompatibleJetsError(
                f"coefficient vector of length {coeffs.shape} does not match "
                f"{space!r}"
            )
        if base.n != space.n:
            raise IncompatibleJetsError("base point dimension does not match space")
        self.space = space
        self.base = base
        self.coeffs = coeffs

    # ------------------------------------------------------------------
    # queries
    # ------------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.space.n

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    def coeff(self, holo_exp, anti_exp) -> complex:
        """Taylor coefficient for exponent vectors (a, b); zero if absent."""
        mono = tuple(holo_exp) + tuple(anti_exp)
        i = self.space.index.get(mono)
        return 0j if i is None else complex(self.coeffs[i])

    def partial(self, holo=(), anti=()) -> complex:
        """Mixed Wirtinger partial along direction indices, repeats allowed.

        ``partial((a, m), (b,))`` is d^3 f / dz^a dz^m dzbar^b.
        """
        mono = [0] * (2 * self.n)
        for d in holo:
            mono[d] += 1
        for d in anti:
            mono[self.n + d] += 1
        i = self.space.index.get(tuple(mono))
        if i is None:
            raise UnsupportedOrderError(
                f"partial of total order {sum(mono)} not stored in {self.space!r}"
            )
        return complex(self.coeffs[i] * self.space.factorials[i])

    # ------------------------------------------------------------------
    # ring operations
    # ------------------------------------------------------------------
    def _require_compatible(self, other: "WJet"):
        if self.space is not other.space:
            raise IncompatibleJetsError(
                f"jet shapes differ: {self.space!r} vs {other.space!r}"
            )
        if self.base != other.base:
            raise IncompatibleJetsError("jet base points differ")

    def __add__(self, other):
        if isinstance(other, WJet):
            self._require_compatible(other)
            return WJet(self.space, self.base, self.coeffs + other.coeffs)
        out = self.coeffs.copy()
        out[0] += complex(other)
        return WJet(self.space, self.base, out)

    __radd__ = __add__

    def __neg__(self):
        return WJet(self.space, self.base, -self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, WJet) else -complex(other))

    def __rsub__(self, other):
        return (-self) + complex(other)

    def __mul__(self, other):
        if isinstance(other, WJet):
            self._require_compatible(other)
            return WJet(
                self.space, self.base, self.space.mul_arr(self.coeffs, other.coeffs)
            )
        return WJet(self.space, self.base, self.coeffs * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, WJet):
            return self * other.reciprocal()
        return self * (1.0 / complex(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * complex(other)

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise InvalidParameterError(
                f"jet power must be a non-negative integer, got {k!r}"
            )
        out = constant_jet(self.space, self.base, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def conj(self) -> "WJet":
        """Jet of the complex conjugate function."""
        return WJet(
            self.space, self.base, np.conj(self.coeffs[self.space.conj_perm])
        )

    # ------------------------------------------------------------------
    # analytic composition h(f) = sum_k h^(k)(f0)/k! (f - f0)^k
    # ------------------------------------------------------------------
    def _analytic(self, ders: Sequence[complex]) -> "WJet":
        space = self.space
        fhat = self.coeffs.copy()
        fhat[0] = 0.0
        out = np.zeros(space.size, dtype=complex)
        out[0] = ders[0]
        power = None
        for k in range(1, space.order + 1):
            power = fhat if k == 1 else space.mul_arr(power, fhat)
            out = out + (ders[k] / math.factorial(k)) * power
        return WJet(space, self.base, out)

    def exp(self) -> "WJet":
        ev = cmath.exp(self.value)
        return self._analytic([ev] * (self.order + 1))

    def log(self) -> "WJet":
        v = self.value
        if v == 0:
            raise DomainError("log of a jet with zero value")
        if v.imag == 0 and v.real < 0:
            raise DomainError("log of a jet with non-positive real value")
        ders = [cmath.log(v)]
        for k in range(1, self.order + 1):
            ders.append((-1) ** (k - 1) * math.factorial(k - 1) / v**k)
        return self._analytic(ders)

    def reciprocal(self) -> "WJet":
        v = self.value
        if v == 0:
            raise DomainError("reciprocal of a jet with zero value")
        ders = [(-1) ** k * math.factorial(k) / v ** (k + 1) for k in range(self.order + 1)]
        return self._analytic(ders)

    def __repr__(self):
        return f"WJet(n={self.n}, order={self.order}, value={self.value:g})"


# ----------------------------------------------------------------------
# constructors
# ----------------------------------------------------------------------
def constant_jet(space: JetSpace, base: CPoint, value) -> WJet:
    coeffs = np.zeros(space.size, dtype=complex)
    coeffs[0] = complex(value)
    return WJet(space, base, coeffs)


def coordinate_jet(space: JetSpace, base: CPoint, i: int) -> WJet:
    """Jet of the coordinate function z^i at the base point."""
    if not 0 <= i < space.n:
        raise IncompatibleJetsError(f"coordinate index {i} out of range")
    coeffs = np.zeros(space.size, dtype=complex)
    coeffs[0] = base.coords[i]
    unit = tuple(1 if k == i else 0 for k in range(2 * space.n))
    coeffs[space.index[unit]] = 1.0
    return WJet(space, base, coeffs)


def coordinate_jets(space: JetSpace, base: CPoint) -> list[WJet]:
    return [coordinate_jet(space, base, i) for i in range(space.n)]


# ----------------------------------------------------------------------
# named operations
# ----------------------------------------------------------------------
def jet_of(f, p: CPoint, order: int) -> WJet:
    """Exact truncated expansion of ``f`` at ``p``.

    ``f`` is either a catalog potential (anything with ``jet``/``contains``
    methods) or a plain callable receiving the list of coordinate jets, e.g.
    ``lambda z: z[0] * z[0].conj()``.
    """
    space = jet_space(p.n, order)
    if hasattr(f, "jet"):
        if hasattr(f, "contains") and not f.contains(p):
            raise DomainError(f"{p!r} is outside the domain of {getattr(f, 'name', f)!r}")
        return f.jet(p, order)
    out = f(coordinate_jets(space, p))
    if not isinstance(out, WJet):
        raise TypeError("jet-evaluable callables must return a WJet")
    return out


_JET_UNARY = {"neg": WJet.__neg__, "reciprocal": WJet.reciprocal,
              "log": WJet.log, "exp": WJet.exp}


def jet_arith(op: str, *args: WJet) -> WJet:
    """Named dispatch over the jet ring operations.

    The operators on :class:`WJet` are the natural interface; this wrapper
    exists so the arithmetic surface is addressable by name.
    """
    if op in ("add", "mul"):
        if len(args) < 2:
            raise IncompatibleJetsError(f"{op} needs at least two operands")
        out = args[0]
        for j in args[1:]:
            out = out + j if op == "add" else out * j
        return out
    if op in _JET_UNARY:
        if len(args) != 1:
            raise IncompatibleJetsError(f"{op} takes exactly one operand")
        return _JET_UNARY[op](args[0])
    raise InvalidParameterError(f"unknown jet operation {op!r}")


def compose_jet(outer: WJet, inner: Sequence[WJet]) -> WJet:
    """Expansion of F(w, wbar) with w = (inner_1(z), ..., inner_m(z)).

    The inner jets must be expansions of holomorphic map components sharing
    one base point and the outer order, with values matching the outer base
    coordinates. Conjugated slots of the outer expansion are fed with the
    conjugates of the inner jets, so the result is the exact truncation of
    the pullback.
    """
    m = outer.n
    if len(inner) != m:
        raise IncompatibleJetsError("component count does not match outer dimension")
    space = inner[0].space
    base = inner[0].base
    for j in inner:
        if j.space is not space or j.base != base:
            raise IncompatibleJetsError("inner jets disagree on space or base")
    if space.order != outer.order:
        raise IncompatibleJetsError("inner and outer jet orders differ")
    for j, q in zip(inner, outer.base.coords):
        if abs(j.value - q) > 1e-9 * (1.0 + abs(q)):
            raise IncompatibleJetsError(
                "inner jet values do not match the outer base point"
            )

    deltas = []
    for j in inner:
        d = j.coeffs.copy()
        d[0] = 0.0
        deltas.append(d)
    dbars = [WJet(space, base, d).conj().coeffs for d in deltas]

    one = np.zeros(space.size, dtype=complex)
    one[0] = 1.0
    cache: dict[int, np.ndarray] = {0: one}

    def prefix(k: int) -> np.ndarray:
        arr = cache.get(k)
        if arr is not None:
            return arr
        s = outer.space.comp_first[k]
        factor = deltas[s] if s < m else dbars[s - m]
        arr = space.mul_arr(prefix(outer.space.comp_prev[k]), factor)
        cache[k] = arr
        return arr

    out = np.zeros(space.size, dtype=complex)
    for k, c in enumerate(outer.coeffs):
        if c == 0:
            continue
        out = out + c * prefix(k)
    return WJet(space, base, out)


# ----------------------------------------------------------------------
# finite-difference oracle
# ----------------------------------------------------------------------
def _value_fn(f, n: int) -> Callable[[np.ndarray], complex]:
    if hasattr(f, "value"):
        return lambda z: complex(f.value(CPoint(tuple(z))))

    def call(z):
        return jet_of(f, CPoint(tuple(z)), 1).value

    return call


def _fd_recurse(F, z, holo, anti, h):
    if holo:
        d = holo[0]
        def rec(w):
            return _fd_recurse(F, w, holo[1:], anti, h)
        sign = -1j
    elif anti:
        d = anti[0]
        def rec(w):
            return _fd_recurse(F, w, holo, anti[1:], h)
        sign = 1j
    else:
        return complex(F(z))
    e = np.zeros(len(z), dtype=complex)
    e[d] = 1.0
    dx = (rec(z + h * e) - rec(z - h * e)) / (2 * h)
    dy = (rec(z + 1j * h * e) - rec(z - 1j * h * e)) / (2 * h)
    return (dx + sign * dy) / 2


def fd_check(f, p: CPoint, index_pair, h: float) -> complex:
    """Central finite-difference estimate of one mixed Wirtinger partial.

    ``index_pair`` is a pair of direction-index tuples (holomorphic, then
    conjugated), matching :meth:`WJet.partial`. This is the test-side oracle
    for :func:`jet_of`; it never touches the jet algebra.
    """
    h = float(h)
    if not math.isfinite(h) or h <= 0 or h < _MIN_FD_STEP:
        raise InvalidStepError(f"finite-difference step {h!r} underflows")
    holo, anti = tuple(index_pair[0]), tuple(index_pair[1])
    if hasattr(f, "margin"):
        if f.margin(p) <= h * (len(holo) + len(anti) + 1):
            raise DomainError("point too close to the boundary for this step")
    return _fd_recurse(_value_fn(f, p.n), p.array, holo, anti, h)
