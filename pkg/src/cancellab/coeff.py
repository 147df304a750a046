"""Exact coefficient fields: the rationals and cyclotomic extensions Q(zeta_l).

Rationals are ``gmpy2.mpq`` values (always reduced, denominator positive).
Elements of Q(zeta_l) with phi(l) > 1 are :class:`Cyclotomic` residues kept
reduced modulo the l-th cyclotomic polynomial.
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd

from gmpy2 import mpq

from .errors import FieldMismatch, ParseError

ZERO = mpq(0)
ONE = mpq(1)


def Q(num, den=1):
    """Build a reduced rational."""
    return mpq(num, den)


def euler_phi(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)


def _pdivmod(a: list, b: list) -> tuple[list, list]:
    # dense coefficient lists, lowest degree first
    a = list(a)
    q = [ZERO] * max(len(a) - len(b) + 1, 1)
    lead = b[-1]
    while len(a) >= len(b) and any(a):
        shift = len(a) - len(b)
        c = a[-1] / lead
        q[shift] = c
        for i, bc in enumerate(b):
            a[shift + i] -= c * bc
        while a and a[-1] == 0:
            a.pop()
    return q, a


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple:
    """Coefficients of the n-th cyclotomic polynomial, lowest degree first."""
    num = [mpq(-1)] + [ZERO] * (n - 1) + [ONE]
    for d in range(1, n):
        if n % d == 0:
            num, r = _pdivmod(num, list(cyclotomic_poly(d)))
            assert not any(r)
    while num and num[-1] == 0:
        num.pop()
    return tuple(num)


class Cyclotomic:
    """Element of Q(zeta_l) stored as its reduced residue modulo Phi_l."""

    __slots__ = ("order", "coeffs", "_hash")

    def __init__(self, order: int, coeffs):
        phi = cyclotomic_poly(order)
        deg = len(phi) - 1
        c = [mpq(x) for x in coeffs]
        if len(c) > deg:
            _, c = _pdivmod(c, list(phi))
        c = c + [ZERO] * (deg - len(c))
        self.order = order
        self.coeffs = tuple(c)
        self._hash = None

    @classmethod
    def generator(cls, order: int) -> "Cyclotomic":
        return cls(order, [ZERO, ONE])

    # -- helpers
    def _coerce(self, other):
        if isinstance(other, Cyclotomic):
            if other.order != self.order:
                raise FieldMismatch(f"Q(zeta_{self.order}) vs Q(zeta_{other.order})")
            return other
        if isinstance(other, int) or type(other) is type(ZERO):
            return Cyclotomic(self.order, [mpq(other)])
        return NotImplemented

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    # -- arithmetic
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Cyclotomic(self.order, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.order, [-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Cyclotomic(self.order, [a - b for a, b in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        prod = [ZERO] * (2 * len(self.coeffs))
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    if b:
                        prod[i + j] += a * b
        return Cyclotomic(self.order, prod)

    __rmul__ = __mul__

    def inverse(self) -> "Cyclotomic":
        if not self:
            raise ZeroDivisionError("division by zero in Q(zeta)")
        # extended Euclid in Q[T]: s*self + t*Phi = 1
        a = list(self.coeffs)
        while a and a[-1] == 0:
            a.pop()
        b = list(cyclotomic_poly(self.order))
        s0, s1 = [ONE], [ZERO]
        r0, r1 = a, b
        while any(r1):
            q, r = _pdivmod(r0, r1)
            s_new = _psub(s0, _pmul(q, s1))
            r0, r1 = r1, r
            s0, s1 = s1, s_new
        # r0 is a nonzero constant
        c = r0[0]
        return Cyclotomic(self.order, [x / c for x in s0])

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = Cyclotomic(self.order, [ONE])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Cyclotomic):
            return self.order == other.order and self.coeffs == other.coeffs
        if isinstance(other, int) or type(other) is type(ZERO):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coeffs[0]) if self.is_rational() else hash((self.order, self.coeffs))
        return self._hash

    def __repr__(self):
        return f"Cyclotomic({self.order}, {format_coeff(self)!r})"

    def __str__(self):
        return format_coeff(self)


def _pmul(a, b):
    out = [ZERO] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _psub(a, b):
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else ZERO) - (b[i] if i < len(b) else ZERO) for i in range(n)]
    while out and out[-1] == 0:
        out.pop()
    return out


def simplify(c):
    """Demote a cyclotomic value lying in Q to a plain rational."""
    if isinstance(c, Cyclotomic) and c.is_rational():
        return c.coeffs[0]
    return c


class Field:
    """Descriptor of Q (``order`` in {1, 2}) or Q(zeta_order)."""

    def __init__(self, order: int = 1):
        if order < 1:
            raise ValueError("cyclotomic order must be positive")
        self.order = order

    @property
    def degree(self) -> int:
        return euler_phi(self.order)

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    def zeta(self):
        return root_of_unity(self.order, 1)

    def element(self, value):
        if isinstance(value, Cyclotomic):
            if self.is_rational:
                if not value.is_rational():
                    raise FieldMismatch("cyclotomic element in Q")
                return value.coeffs[0]
            if value.order != self.order:
                raise FieldMismatch(f"element of Q(zeta_{value.order}) in Q(zeta_{self.order})")
            return value
        return mpq(value)

    def to_json(self):
        return "Q" if self.is_rational else {"cyclotomic": self.order}

    @classmethod
    def from_json(cls, obj) -> "Field":
        if obj in (None, "Q"):
            return cls(1)
        if isinstance(obj, dict) and "cyclotomic" in obj:
            return cls(int(obj["cyclotomic"]))
        raise ParseError(f"unknown field descriptor {obj!r}")

    def __eq__(self, other):
        return isinstance(other, Field) and self.degree == other.degree and (
            self.is_rational or self.order == other.order)

    def __hash__(self):
        return hash(1 if self.is_rational else self.order)

    def __repr__(self):
        return "Q" if self.is_rational else f"Q(zeta_{self.order})"


QQ = Field(1)


def root_of_unity(l: int, k: int):
    """zeta_l ** k, as a rational when l <= 2."""
    if l < 1:
        raise ValueError("l must be positive")
    k %= l
    if l == 1:
        return ONE
    if l == 2:
        return ONE if k == 0 else mpq(-1)
    return simplify(Cyclotomic(l, [ZERO] * k + [ONE]))


def field_arith(a, b, op: str):
    """Exact ``a op b`` for op in add/sub/mul/div."""
    if isinstance(a, Cyclotomic) and isinstance(b, Cyclotomic) and a.order != b.order:
        raise FieldMismatch(f"Q(zeta_{a.order}) vs Q(zeta_{b.order})")
    if op == "add":
        r = a + b
    elif op == "sub":
        r = a - b
    elif op == "mul":
        r = a * b
    elif op == "div":
        if not b:
            raise ZeroDivisionError("division by zero")
        r = a / b
    else:
        raise ValueError(f"unknown op {op}")
    return r if isinstance(r, Cyclotomic) else mpq(r)


def format_rational(c) -> str:
    c = mpq(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_coeff(c) -> str:
    """Canonical text: ``a/b`` for rationals, a polynomial in ``zeta`` otherwise."""
    if not isinstance(c, Cyclotomic):
        return format_rational(c)
    parts = []
    for i in range(len(c.coeffs) - 1, -1, -1):
        a = c.coeffs[i]
        if not a:
            continue
        mono = "" if i == 0 else ("zeta" if i == 1 else f"zeta^{i}")
        if mono and abs(a) == 1:
            body = mono
        elif mono:
            body = f"{format_rational(abs(a))}*{mono}"
        else:
            body = format_rational(abs(a))
        if not parts:
            parts.append(("-" if a < 0 else "") + body)
        else:
            parts.append((" - " if a < 0 else " + ") + body)
    return "".join(parts) if parts else "0"


def parse_coeff(text: str, field: Field = QQ):
    """Parse a rational ``a/b`` or, over Q(zeta_l), a polynomial in ``zeta``."""
    from .poly import parse_polynomial

    p = parse_polynomial(text, (), field)
    if not p.terms:
        return ZERO
    if len(p.terms) != 1 or () not in p.terms:
        raise ParseError(f"not a constant: {text!r}")
    return p.terms[()]
