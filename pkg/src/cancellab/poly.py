"""Multivariate polynomials over exact fields, monomial orders, parsing.

A :class:`Polynomial` lives in an ambient ordered variable list and stores its
terms as a mapping from dense exponent tuples to nonzero coefficients.  The
canonical (printed) form lists terms descending in the graded reverse
lexicographic order with the ambient list as variable priority.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .coeff import QQ, Cyclotomic, Field, format_coeff, simplify
from .errors import AmbientMismatch, MissingImage, ParseError, UnknownVariable

_KEY_BITS = 32
_KEY_OFF = 1 << (_KEY_BITS - 1)


class MonomialOrder:
    """lex, grevlex, or a block order whose earlier blocks dominate.

    ``priority`` lists variable names from most to least significant; names
    absent from it follow in ambient order.  For block orders, ``blocks`` is a
    list of name lists; each block is compared with ``inner`` and unlisted
    variables form a trailing block.
    """

    def __init__(self, kind: str = "grevlex", priority: Sequence[str] | None = None,
                 blocks: Sequence[Sequence[str]] | None = None, inner: str = "grevlex"):
        if kind not in ("lex", "grevlex", "block"):
            raise ValueError(f"unknown order kind {kind!r}")
        if kind == "block" and not blocks:
            raise ValueError("block order needs blocks")
        self.kind = kind
        self.priority = tuple(priority or ())
        self.blocks = tuple(tuple(b) for b in blocks) if blocks else ()
        self.inner = inner
        self._cache: dict[tuple, object] = {}

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_cache"] = {}
        return state

    @classmethod
    def elimination(cls, eliminate: Sequence[str], inner: str = "grevlex") -> "MonomialOrder":
        return cls("block", blocks=[list(eliminate)], inner=inner)

    def __eq__(self, other):
        return (isinstance(other, MonomialOrder) and self.kind == other.kind
                and self.priority == other.priority and self.blocks == other.blocks
                and self.inner == other.inner)

    def __hash__(self):
        return hash((self.kind, self.priority, self.blocks, self.inner))

    def __repr__(self):
        if self.kind == "block":
            return f"block({[list(b) for b in self.blocks]}, {self.inner})"
        return self.kind if not self.priority else f"{self.kind}{list(self.priority)}"

    def _perm(self, vars: tuple, names: Sequence[str]) -> list[int]:
        idx = []
        for n in names:
            if n in vars and vars.index(n) not in idx:
                idx.append(vars.index(n))
        return idx

    @staticmethod
    def _components(kind: str, perm: list[int]):
        if kind == "lex":
            return lambda e: [e[i] for i in perm]
        rev = perm[::-1]
        return lambda e: [sum(e[i] for i in perm)] + [-e[i] for i in rev]

    def key_function(self, vars: tuple):
        """Map exponent tuples of ``vars`` to ints ordered like the monomials."""
        fn = self._cache.get(vars)
        if fn is not None:
            return fn
        if self.kind == "block":
            used: list[int] = []
            parts = []
            for b in self.blocks:
                perm = [i for i in self._perm(vars, b) if i not in used]
                used.extend(perm)
                if perm:
                    parts.append(self._components(self.inner, perm))
            rest = [i for i in range(len(vars)) if i not in used]
            if rest:
                parts.append(self._components(self.inner, rest))
            comps = lambda e: [c for p in parts for c in p(e)]
        else:
            perm = self._perm(vars, self.priority)
            perm += [i for i in range(len(vars)) if i not in perm]
            comps = self._components(self.kind, perm)
        memo: dict = {}

        def key(e):
            k = memo.get(e)
            if k is None:
                k = 0
                for c in comps(e):
                    k = (k << _KEY_BITS) | (c + _KEY_OFF)
                memo[e] = k
            return k

        self._cache[vars] = key
        return key


GREVLEX = MonomialOrder("grevlex")
LEX = MonomialOrder("lex")


def _coerce_coeff(c):
    if isinstance(c, Cyclotomic):
        return simplify(c)
    return mpq(c)


class Polynomial:
    """Immutable polynomial over Q or Q(zeta_l) in an ordered ambient."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Sequence[str], terms: Mapping | None = None, *, _trusted: bool = False):
        self.vars = tuple(vars)
        if _trusted:
            self.terms = terms
        else:
            clean = {}
            n = len(self.vars)
            for e, c in (terms or {}).items():
                e = tuple(e)
                if len(e) != n:
                    raise AmbientMismatch(f"exponent {e} has wrong length for {self.vars}")
                c = _coerce_coeff(c)
                if c:
                    clean[e] = clean.get(e, 0) + c
                    if not clean[e]:
                        del clean[e]
            self.terms = clean
        self._hash = None

    # -- constructors
    @classmethod
    def zero(cls, vars: Sequence[str]) -> "Polynomial":
        return cls(vars, {}, _trusted=True)

    @classmethod
    def const(cls, c, vars: Sequence[str]) -> "Polynomial":
        c = _coerce_coeff(c)
        vars = tuple(vars)
        return cls(vars, {(0,) * len(vars): c} if c else {}, _trusted=True)

    @classmethod
    def var(cls, name: str, vars: Sequence[str]) -> "Polynomial":
        vars = tuple(vars)
        if name not in vars:
            raise UnknownVariable(name)
        e = tuple(1 if v == name else 0 for v in vars)
        return cls(vars, {e: mpq(1)}, _trusted=True)

    @classmethod
    def monomial(cls, exp: Sequence[int], vars: Sequence[str], c=1) -> "Polynomial":
        return cls(vars, {tuple(exp): c})

    # -- basic queries
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self):
        return self.terms.get((0,) * len(self.vars), mpq(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, v: str) -> int:
        i = self._index(v)
        return max((e[i] for e in self.terms), default=-1)

    def used_vars(self) -> set[str]:
        out = set()
        for e in self.terms:
            for v, k in zip(self.vars, e):
                if k:
                    out.add(v)
        return out

    def _index(self, v: str) -> int:
        try:
            return self.vars.index(v)
        except ValueError:
            raise UnknownVariable(v) from None

    def sorted_terms(self, order: MonomialOrder = GREVLEX) -> list:
        key = order.key_function(self.vars)
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    def leading_term(self, order: MonomialOrder = GREVLEX):
        key = order.key_function(self.vars)
        e = max(self.terms, key=key)
        return e, self.terms[e]

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, type(mpq(0)), Cyclotomic)):
            return self == Polynomial.const(other, self.vars)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    # -- arithmetic
    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.vars != self.vars:
                raise AmbientMismatch(f"{self.vars} vs {other.vars}")
            return other
        if isinstance(other, (int, type(mpq(0)), Cyclotomic)):
            return Polynomial.const(other, self.vars)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        if len(o.terms) > len(self.terms):
            big, small = o.terms, self.terms
        else:
            big, small = self.terms, o.terms
        out = dict(big)
        for e, c in small.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Polynomial(self.vars, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.vars, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        out = dict(self.terms)
        for e, c in o.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = -c
            else:
                s = s - c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Polynomial(self.vars, out, _trusted=True)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return Polynomial(self.vars, _mul_terms(self.terms, o.terms), _trusted=True)

    __rmul__ = __mul__

    def scale(self, c) -> "Polynomial":
        c = _coerce_coeff(c)
        if not c:
            return Polynomial.zero(self.vars)
        return Polynomial(self.vars, {e: v * c for e, v in self.terms.items()}, _trusted=True)

    def mul_monomial(self, exp: Sequence[int], c=1) -> "Polynomial":
        c = _coerce_coeff(c)
        if not c:
            return Polynomial.zero(self.vars)
        out = {}
        for e, v in self.terms.items():
            out[tuple(a + b for a, b in zip(e, exp))] = v * c
        return Polynomial(self.vars, out, _trusted=True)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers need a non-negative integer exponent")
        result = Polynomial.const(1, self.vars)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- ambient changes
    def to_ambient(self, vars: Sequence[str]) -> "Polynomial":
        """Re-express in another variable list (must contain every used variable)."""
        vars = tuple(vars)
        if vars == self.vars:
            return self
        pos = []
        for i, v in enumerate(self.vars):
            pos.append(vars.index(v) if v in vars else None)
        out = {}
        n = len(vars)
        for e, c in self.terms.items():
            ne = [0] * n
            for i, k in enumerate(e):
                if k:
                    j = pos[i]
                    if j is None:
                        raise AmbientMismatch(f"variable {self.vars[i]} missing from {vars}")
                    ne[j] = k
            out[tuple(ne)] = c
        return Polynomial(vars, out, _trusted=True)

    def rename(self, mapping: Mapping[str, str]) -> "Polynomial":
        return Polynomial(tuple(mapping.get(v, v) for v in self.vars), self.terms, _trusted=True)

    # -- printing
    def format(self, order: MonomialOrder = GREVLEX) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for e, c in self.sorted_terms(order):
            mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k)
            neg = _is_negative(c)
            a = -c if neg else c
            cs = format_coeff(a)
            if isinstance(a, Cyclotomic) and not a.is_rational() and (
                    "+" in cs or " - " in cs or cs.startswith("-")):
                cs = f"({cs})"
            if mono:
                body = mono if a == 1 else f"{cs}*{mono}"
            else:
                body = cs
            if not pieces:
                pieces.append(("-" if neg else "") + body)
            else:
                pieces.append((" - " if neg else " + ") + body)
        return "".join(pieces)

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"Polynomial({self.format()!r}, vars={list(self.vars)})"


def _is_negative(c) -> bool:
    if isinstance(c, Cyclotomic):
        for a in reversed(c.coeffs):
            if a:
                return a < 0
        return False
    return c < 0


def _mul_terms(a: Mapping, b: Mapping) -> dict:
    if len(a) < len(b):
        a, b = b, a
    out: dict = {}
    get = out.get
    for e2, c2 in b.items():
        for e1, c1 in a.items():
            e = tuple([x + y for x, y in zip(e1, e2)])
            s = get(e)
            out[e] = c1 * c2 if s is None else s + c1 * c2
    return {e: c for e, c in out.items() if c}


def poly_arith(p: Polynomial, q: Polynomial, op: str) -> Polynomial:
    if p.vars != q.vars:
        raise AmbientMismatch(f"{p.vars} vs {q.vars}")
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown op {op}")


def substitute(p: Polynomial, images: Mapping[str, Polynomial], target_vars: Sequence[str] | None = None) -> Polynomial:
    """Apply the ring homomorphism sending each ambient variable to its image."""
    used = sorted(p.used_vars(), key=p.vars.index)
    amb = None
    if target_vars is not None:
        amb = tuple(target_vars)
    for v in p.vars:
        img = images.get(v)
        if img is None:
            if v in used:
                raise MissingImage(v)
            continue
        if amb is None:
            amb = img.vars
        elif img.vars != amb:
            raise AmbientMismatch(f"images live in {img.vars} and {amb}")
    if amb is None:
        amb = p.vars
    if not p.terms:
        return Polynomial.zero(amb)
    powers: dict[tuple[int, int], Polynomial] = {}

    def power(i: int, k: int) -> Polynomial:
        key = (i, k)
        r = powers.get(key)
        if r is None:
            if k == 1:
                r = images[p.vars[i]]
            else:
                half = power(i, k // 2)
                r = half * half
                if k % 2:
                    r = r * images[p.vars[i]]
            powers[key] = r
        return r

    acc: dict = {}
    zero_e = (0,) * len(amb)
    for e, c in p.terms.items():
        term = None
        for i, k in enumerate(e):
            if k:
                f = power(i, k)
                term = f if term is None else term * f
        if term is None:
            acc[zero_e] = acc.get(zero_e, 0) + c
            continue
        for te, tc in term.terms.items():
            s = acc.get(te)
            acc[te] = tc * c if s is None else s + tc * c
    return Polynomial(amb, {e: c for e, c in acc.items() if c}, _trusted=True)


def partial(p: Polynomial, v: str) -> Polynomial:
    """Formal partial derivative with respect to ``v``."""
    i = p._index(v)
    out = {}
    for e, c in p.terms.items():
        k = e[i]
        if k:
            ne = e[:i] + (k - 1,) + e[i + 1:]
            out[ne] = c * k
    return Polynomial(p.vars, out, _trusted=True)


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z][A-Za-z0-9_']*)|(\*\*|[-+*^()]))")
NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_']*$")


def _tokenize(text: str) -> list:
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos} in {text!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text, vars, field):
        self.toks = _tokenize(text)
        self.i = 0
        self.vars = tuple(vars)
        self.field = field
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> Polynomial:
        if not self.toks:
            raise ParseError("empty polynomial text")
        p = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing input in {self.text!r}")
        return p

    def expr(self):
        p = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while self.peek() == ("op", "*"):
            self.take()
            p = p * self.unary()
        return p

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num" or "/" in val:
                raise ParseError(f"exponent must be a non-negative integer in {self.text!r}")
            return base ** int(val)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            n, _, d = val.partition("/")
            if d and int(d) == 0:
                raise ParseError("zero denominator")
            return Polynomial.const(mpq(int(n), int(d) if d else 1), self.vars)
        if kind == "name":
            if val == "zeta" and not self.field.is_rational and val not in self.vars:
                return Polynomial.const(self.field.zeta(), self.vars)
            if val not in self.vars:
                raise UnknownVariable(val)
            return Polynomial.var(val, self.vars)
        if (kind, val) == ("op", "("):
            p = self.expr()
            if self.take() != ("op", ")"):
                raise ParseError(f"unbalanced parenthesis in {self.text!r}")
            return p
        raise ParseError(f"unexpected token {val!r} in {self.text!r}")


def parse_polynomial(text: str, vars: Sequence[str], field: Field = QQ) -> Polynomial:
    """Parse the textual grammar: literals, names, ``+ - * ^`` and parentheses."""
    return _Parser(text, vars, field).parse()


def P(text: str, vars: Sequence[str] | str, field: Field = QQ) -> Polynomial:
    """Shorthand used throughout the catalog: ``P("x^2 - y", "x y")``."""
    if isinstance(vars, str):
        vars = vars.split()
    return parse_polynomial(text, vars, field)


def monomials_up_to(nvars: int, degree: int) -> Iterable[tuple]:
    """All exponent tuples of total degree <= degree, by degree then lex."""
    def rec(n, d):
        if n == 1:
            yield (d,)
            return
        for k in range(d, -1, -1):
            for rest in rec(n - 1, d - k):
                yield (k,) + rest
    if nvars == 0:
        yield ()
        return
    for d in range(degree + 1):
        yield from rec(nvars, d)
