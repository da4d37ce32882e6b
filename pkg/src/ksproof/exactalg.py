"""Exact arithmetic in Z[sqrt2] and ray/orthogonality primitives.

Rays are kept unnormalized so that every orthogonality check is an exact
integer computation. The ring Z[sqrt2] is Euclidean, which gives each ray a
unique canonical representative: divide out the gcd of the entries, then
fix the remaining unit ``±(1+sqrt2)^k`` using the first nonzero entry.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import reduce

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

_SQRT2 = math.sqrt(2.0)


def _checked(value: int) -> int:
    if not INT_MIN <= value <= INT_MAX:
        raise OverflowError(f"integer {value} does not fit in a signed 64-bit word")
    return value


@dataclass(frozen=True, slots=True)
class QuadInt:
    """The number ``a + b*sqrt(2)`` with integer ``a`` and ``b``.

    Coefficients are bounded to signed 64 bits; any operation whose result
    leaves that range raises ``OverflowError``.
    """

    a: int
    b: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.a, bool) or isinstance(self.b, bool):
            raise TypeError("QuadInt coefficients must be integers")
        object.__setattr__(self, "a", _checked(int(self.a)))
        object.__setattr__(self, "b", _checked(int(self.b)))

    @classmethod
    def coerce(cls, x: QuadInt | int) -> QuadInt:
        if isinstance(x, QuadInt):
            return x
        if isinstance(x, int) and not isinstance(x, bool):
            return cls(x, 0)
        raise TypeError(f"cannot convert {x!r} to QuadInt")

    def __add__(self, other: QuadInt | int) -> QuadInt:
        try:
            o = QuadInt.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadInt(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> QuadInt:
        return QuadInt(-self.a, -self.b)

    def __sub__(self, other: QuadInt | int) -> QuadInt:
        try:
            o = QuadInt.coerce(other)
        except TypeError:
            return NotImplemented
        return QuadInt(self.a - o.a, self.b - o.b)

    def __rsub__(self, other: QuadInt | int) -> QuadInt:
        return -self + other

    def __mul__(self, other: QuadInt | int) -> QuadInt:
        try:
            o = QuadInt.coerce(other)
        except TypeError:
            return NotImplemented
        return quad_mul(self, o)

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return self.a != 0 or self.b != 0

    def __float__(self) -> float:
        return self.a + self.b * _SQRT2

    def conjugate(self) -> QuadInt:
        """Galois conjugate ``a - b*sqrt2``."""
        return QuadInt(self.a, -self.b)

    def norm(self) -> int:
        """Field norm ``a^2 - 2 b^2`` (a rational integer, possibly negative)."""
        return _checked(self.a * self.a - 2 * self.b * self.b)

    def sign(self) -> int:
        """Exact sign of the real value: -1, 0 or +1."""
        a, b = self.a, self.b
        if a >= 0 and b >= 0:
            return 0 if a == 0 and b == 0 else 1
        if a <= 0 and b <= 0:
            return -1
        # mixed signs: compare a^2 against 2 b^2
        if a > 0:
            return 1 if a * a > 2 * b * b else -1
        return 1 if 2 * b * b > a * a else -1

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}√2"
        return f"{self.a}{self.b:+}√2"


ZERO = QuadInt(0, 0)
ONE = QuadInt(1, 0)
SQRT2 = QuadInt(0, 1)
# fundamental unit 1 + sqrt2 and its inverse sqrt2 - 1
UNIT = QuadInt(1, 1)
UNIT_INV = QuadInt(-1, 1)


def quad_mul(x: QuadInt, y: QuadInt) -> QuadInt:
    """Product in Z[sqrt2]: ``(x.a*y.a + 2*x.b*y.b, x.a*y.b + x.b*y.a)``."""
    return QuadInt(x.a * y.a + 2 * x.b * y.b, x.a * y.b + x.b * y.a)


def _round_div(n: int, d: int) -> int:
    # nearest integer to n/d, d != 0
    if d < 0:
        n, d = -n, -d
    return (2 * n + d) // (2 * d)


def quad_divmod(x: QuadInt, y: QuadInt) -> tuple[QuadInt, QuadInt]:
    """Euclidean division: ``x = q*y + r`` with ``|N(r)| < |N(y)|``."""
    if not y:
        raise ZeroDivisionError("division by zero in Z[sqrt2]")
    num = quad_mul(x, y.conjugate())
    n = y.norm()
    q = QuadInt(_round_div(num.a, n), _round_div(num.b, n))
    r = x - quad_mul(q, y)
    return q, r


def quad_exact_div(x: QuadInt, y: QuadInt) -> QuadInt:
    q, r = quad_divmod(x, y)
    if r:
        raise ArithmeticError(f"{y} does not divide {x}")
    return q


def quad_gcd(x: QuadInt, y: QuadInt) -> QuadInt:
    """A gcd of ``x`` and ``y``, determined up to a unit."""
    while y:
        _, r = quad_divmod(x, y)
        x, y = y, r
    return x


def _in_unit_domain(x: QuadInt) -> bool:
    # for x > 0: the ratio x/|conj(x)| lies in [1, (1+sqrt2)^2)
    y = quad_mul(x, UNIT_INV)
    return x.a * x.b >= 0 and y.a * y.b < 0


def _unit_normalizer(x: QuadInt) -> QuadInt:
    """Unit ``u`` such that ``u*x`` is positive and in the fixed unit domain."""
    u = ONE if x.sign() > 0 else -ONE
    x = quad_mul(u, x)
    while not _in_unit_domain(x):
        if x.a * x.b < 0:
            u, x = quad_mul(u, UNIT), quad_mul(x, UNIT)
        else:
            u, x = quad_mul(u, UNIT_INV), quad_mul(x, UNIT_INV)
    return u


@dataclass(frozen=True, slots=True)
class Ray:
    """A nonzero real vector with entries in Z[sqrt2], up to scaling.

    Equality and hashing are by canonical form, so two Rays compare equal
    iff they span the same line.
    """

    entries: tuple[QuadInt, ...]

    def __init__(self, entries: Iterable[QuadInt | int]) -> None:
        ents = tuple(QuadInt.coerce(e) for e in entries)
        if not ents:
            raise ValueError("ray must have positive dimension")
        if not any(ents):
            raise ValueError("zero vector is not a ray")
        object.__setattr__(self, "entries", ents)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def canonical(self) -> Ray:
        return canonicalize(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ray):
            return NotImplemented
        return canonicalize(self).entries == canonicalize(other).entries

    def __hash__(self) -> int:
        return hash(canonicalize(self).entries)

    def scaled(self, s: QuadInt | int) -> Ray:
        s = QuadInt.coerce(s)
        return Ray(quad_mul(s, e) for e in self.entries)

    def to_floats(self) -> list[float]:
        return [float(e) for e in self.entries]

    def __str__(self) -> str:
        return "(" + ",".join(str(e) for e in self.entries) + ")"

    def __repr__(self) -> str:
        return f"Ray({self})"


def dot(u: Ray, v: Ray) -> QuadInt:
    """Exact real inner product of two rays of the same dimension."""
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
    return reduce(lambda acc, p: acc + quad_mul(p[0], p[1]), zip(u.entries, v.entries), ZERO)


def canonicalize(r: Ray) -> Ray:
    """Canonical representative of the line spanned by ``r``.

    The entries are divided by their gcd in Z[sqrt2], then multiplied by the
    unique unit that makes the first nonzero entry positive and places it in
    a fixed fundamental domain for the unit group.
    """
    ents = r.entries
    if not any(ents):
        raise ValueError("zero vector is not a ray")
    g = reduce(quad_gcd, (e for e in ents if e))
    reduced = [quad_exact_div(e, g) for e in ents]
    lead = next(e for e in reduced if e)
    u = _unit_normalizer(lead)
    return Ray(quad_mul(u, e) for e in reduced)


def first_offending_pair(rays: Sequence[Ray]) -> tuple[int, int] | None:
    """Indices of the first pair of rays whose inner product is nonzero."""
    for i in range(len(rays)):
        for j in range(i + 1, len(rays)):
            if dot(rays[i], rays[j]):
                return i, j
    return None


def is_orthogonal_basis(rays: Sequence[Ray], dim: int) -> bool:
    """True iff ``rays`` are ``dim`` pairwise orthogonal nonzero rays of dimension ``dim``.

    Nonzero mutually orthogonal vectors are linearly independent, so this is
    the same as the rank-1 projectors summing to the identity.
    """
    if len(rays) != dim or any(r.dim != dim for r in rays):
        return False
    return first_offending_pair(rays) is None


def projector_numerator(r: Ray) -> list[list[QuadInt]]:
    """The matrix ``r r^T``; the projector onto ``r`` is this over ``dot(r, r)``."""
    return [[quad_mul(x, y) for y in r.entries] for x in r.entries]
