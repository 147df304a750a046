"""Programmatic construction of the threefolds, covers and derivations.

Everything is built from the integer parameters so nothing is transcribed by
hand.  Downstairs coordinates are ``x, y, z``; the trivializing cover uses
``X, Y, Z, u``; the Koras-Russell presentation adds ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import gcd

from ..coeff import QQ, Field
from ..errors import ParameterError
from ..lnd import Derivation, make_derivation
from ..poly import GREVLEX, LEX, MonomialOrder, Polynomial
from ..ring import MonomialGroupAction, PresentedRing, RingMap, present, tensor_with_polynomial_line, verify_map

ORDERS = {"grevlex": GREVLEX, "lex": LEX}


def f_text(d: int, l: int, x="x", y="y", z="z") -> str:
    return f"{y}^{l} + {x} - {x}^{d}*{z}"


def validate_u(d: int, l: int) -> None:
    if d < 1 or l < 2:
        raise ParameterError(f"U_(d,l) needs d >= 1 and l >= 2, got d={d}, l={l}")


def validate_x(d: int, k: int, l: int) -> None:
    if d < 2 or not (2 <= l < k) or gcd(k, l) != 1:
        raise ParameterError(f"X_(d,k,l) needs d >= 2, 2 <= l < k, gcd(k,l) = 1; got d={d}, k={k}, l={l}")


@dataclass
class CatalogEntry:
    d: int
    l: int
    k: int | None = None
    order_name: str = "grevlex"

    def __post_init__(self):
        validate_u(self.d, self.l)
        if self.k is not None:
            validate_x(self.d, self.k, self.l)

    @property
    def order(self) -> MonomialOrder:
        return ORDERS[self.order_name]

    @property
    def field(self) -> Field:
        return QQ if self.l <= 2 else Field(self.l)

    def _present(self, *a, **kw) -> PresentedRing:
        return present(*a, field=self.field, order=self.order, **kw)

    # -- downstairs
    @cached_property
    def f(self) -> Polynomial:
        return self.U.element(f_text(self.d, self.l))

    @cached_property
    def B(self) -> PresentedRing:
        """The excluded surface ``f = 0``."""
        return self._present(["x", "y", "z"], [f_text(self.d, self.l)], name=f"B_{self.d},{self.l}")

    @cached_property
    def U(self) -> PresentedRing:
        return self._present(["x", "y", "z"], [], [(f_text(self.d, self.l), "w_f")], name=f"U_{self.d},{self.l}")

    @cached_property
    def D(self) -> Derivation:
        d, l = self.d, self.l
        return make_derivation(self.U, {"x": "0", "y": f"x^{d}", "z": f"{l}*y^{l - 1}"}, f"D_{d},{l}")

    @cached_property
    def second(self) -> Derivation:
        """``l y^(l-1) d/dx + (z - 1) d/dy``, defined on U_(1,l) only."""
        if self.d != 1:
            raise ParameterError("the second derivation lives on U_(1,l)")
        l = self.l
        return make_derivation(self.U, {"x": f"{l}*y^{l - 1}", "y": "z - 1", "z": "0"}, f"delta_{l}")

    # -- cover
    @cached_property
    def S(self) -> PresentedRing:
        return self._present(["X", "Y", "Z"], [f"X^{self.d}*Z - Y^{self.l} - X + 1"], name=f"S_{self.d},{self.l}")

    @cached_property
    def SA(self) -> PresentedRing:
        """``S x A^1_*`` with the Laurent variable ``u``."""
        return self._present(["X", "Y", "Z", "u"], [f"X^{self.d}*Z - Y^{self.l} - X + 1"], [("u", "w_u")],
                             name=f"S_{self.d},{self.l} x A*")

    @cached_property
    def T(self) -> PresentedRing:
        """``U x_{A*} A*`` along ``t = f``, ``t = u^l``."""
        return self._present(["x", "y", "z", "u"], [f"{f_text(self.d, self.l)} - u^{self.l}"],
                             [(f_text(self.d, self.l), "w_f"), ("u", "w_u")], name="U x_A* A*")

    @cached_property
    def weights(self) -> dict:
        return {"X": 0, "Y": -1, "Z": 0, "u": 1}

    @cached_property
    def action(self) -> MonomialGroupAction:
        return MonomialGroupAction(self.SA, self.l, self.weights).verify()

    def _z_power(self) -> str:
        e = (self.d - 1) * self.l
        return "Z" if e == 0 else f"w_u^{e}*Z"

    @cached_property
    def Phi(self) -> RingMap:
        """Pullback ``T -> O(S x A*)`` of ``(X,Y,Z,u) -> (u^l X, u Y, u^((1-d)l) Z, u)``."""
        l = self.l
        return verify_map(RingMap(self.T, self.SA, {"x": f"u^{l}*X", "y": "u*Y", "z": self._z_power(),
                                                   "u": "u", "w_f": f"w_u^{l}", "w_u": "w_u"}, "Phi"))

    @cached_property
    def Phi_inverse(self) -> RingMap:
        l, d = self.l, self.d
        ze = (d - 1) * l
        return verify_map(RingMap(self.SA, self.T, {"X": f"w_u^{l}*x", "Y": "w_u*y",
                                                   "Z": "z" if ze == 0 else f"u^{ze}*z",
                                                   "u": "u", "w_u": "w_u"}, "Phi^-1"))

    @cached_property
    def descent(self) -> RingMap:
        """``O(U) -> O(S x A*)`` onto the invariants (Phi restricted to U)."""
        l = self.l
        return verify_map(RingMap(self.U, self.SA, {"x": f"u^{l}*X", "y": "u*Y", "z": self._z_power(),
                                                   "w_f": f"w_u^{l}"}, "descent"))

    @cached_property
    def xi(self) -> RingMap:
        """``t -> u^l`` on Laurent rings."""
        base = self._present(["t"], [], [("t", "w_t")])
        top = self._present(["u"], [], [("u", "w_u")])
        return verify_map(RingMap(base, top, {"t": f"u^{self.l}", "w_t": f"w_u^{self.l}"}, "xi"))

    @cached_property
    def D_lift(self) -> Derivation:
        d, l = self.d, self.l
        c = f"u^{l * d - 1}"
        return make_derivation(self.SA, {"X": "0", "Y": f"{c}*X^{d}", "Z": f"{l}*{c}*Y^{l - 1}", "u": "0"},
                               f"lift D_{d},{l}")

    @cached_property
    def D_T(self) -> Derivation:
        """``D_(d,l)`` on the fiber-product presentation with ``u`` in the kernel."""
        d, l = self.d, self.l
        return make_derivation(self.T, {"x": "0", "y": f"x^{d}", "z": f"{l}*y^{l - 1}", "u": "0"})

    # -- the family over the t-line
    @cached_property
    def R3(self) -> PresentedRing:
        d, l = self.d, self.l
        return self._present(["x", "y", "z", "t"], [f"x^{d}*z - y^{l} - x + t"], [("t", "w_t")], name="x^d z = y^l + x - t")

    @cached_property
    def R3x(self) -> PresentedRing:
        d, l = self.d, self.l
        return self._present(["x", "y", "z", "t"], [f"x^{d}*z - y^{l} - x + t"], [("t", "w_t"), ("x", "w_x")])

    @cached_property
    def R3_fiber(self) -> PresentedRing:
        """The fiber ``x = 0``: ``y^l = t``, ``z`` free."""
        return self._present(["y", "z", "t"], [f"y^{self.l} - t"], [("t", "w_t")])

    # -- Koras-Russell threefold
    @cached_property
    def X(self) -> PresentedRing:
        self._need_k()
        d, k, l = self.d, self.k, self.l
        return self._present(["x", "y", "z", "t"], [f"x^{d}*z - y^{l} - x + t^{k}"], name=f"X_{d},{k},{l}")

    @cached_property
    def X_cyl(self) -> PresentedRing:
        return tensor_with_polynomial_line(self.X, "v")

    @cached_property
    def A4(self) -> PresentedRing:
        return self._present(["x", "y", "z", "v"], [])

    @cached_property
    def cover(self) -> RingMap:
        """``p``: O(A^3 x A^1) -> O(X x A^1), forgetting ``t``."""
        return verify_map(RingMap(self.A4, self.X_cyl, {v: v for v in ("x", "y", "z", "v")}, "p"))

    def _need_k(self):
        if self.k is None:
            raise ParameterError("k is required for the Koras-Russell presentation")


def entry(d: int, l: int, k: int | None = None, order: str = "grevlex") -> CatalogEntry:
    return _cached_entry(d, l, k, order)


_entries: dict = {}


def _cached_entry(d, l, k, order):
    key = (d, l, k, order)
    hit = _entries.get(key)
    if hit is None:
        hit = CatalogEntry(d, l, k, order)
        _entries[key] = hit
    return hit


def danielewski(order: str = "grevlex") -> tuple:
    """``xz = y^2 - 1`` and ``x^2 z = y^2 - 1`` with their standard LNDs."""
    S1 = present(["x", "y", "z"], ["x*z - y^2 + 1"], order=ORDERS[order], name="S1")
    S2 = present(["x", "y", "z"], ["x^2*z - y^2 + 1"], order=ORDERS[order], name="S2")
    D1 = make_derivation(S1, {"x": "0", "y": "x", "z": "2*y"}, "D1")
    D2 = make_derivation(S2, {"x": "0", "y": "x^2", "z": "2*y"}, "D2")
    return S1, D1, S2, D2
