import pytest

from cancellab.coeff import Field, Q
from cancellab.errors import ParseError, UnknownVariable
from cancellab.poly import GREVLEX, LEX, MonomialOrder, P, Polynomial, monomials_up_to, partial, poly_arith, substitute

XYZ = "x y z"


def test_arith_examples():
    assert poly_arith(P("y^2 + x", XYZ), P("y^2", XYZ), "sub") == P("x", XYZ)
    assert poly_arith(P("y - 1", XYZ), P("y + 1", XYZ), "mul") == P("y^2 - 1", XYZ)


def test_grevlex_term_order_of_f22():
    f = P("y^2 + x - x^2*z", XYZ)
    assert [e for e, _ in f.sorted_terms(GREVLEX)] == [(2, 0, 1), (0, 2, 0), (1, 0, 0)]
    assert f.format() == "-x^2*z + y^2 + x"


def test_lex_vs_grevlex():
    p = P("x + y^3", "x y")
    assert p.leading_term(LEX)[0] == (1, 0)
    assert p.leading_term(GREVLEX)[0] == (0, 3)


def test_block_order_eliminates_first_block():
    order = MonomialOrder.elimination(["t"])
    p = P("t + x^5", "x t")
    assert p.leading_term(order)[0] == (0, 1)


def test_substitute_phi_pullback():
    V = "x y z X Y Z u"
    f = P("y^2 + x - x*z", V)
    img = substitute(f, {"x": P("u^2*X", V), "y": P("u*Y", V), "z": P("Z", V)})
    assert img == P("u^2*Y^2 + u^2*X - u^2*X*Z", V)


def test_substitute_identity_and_shift():
    p = P("x^2*y - 3*z + 1/2", XYZ)
    assert substitute(p, {v: P(v, XYZ) for v in ("x", "y", "z")}) == p
    assert substitute(P("y^2 - 1", XYZ), {"y": P("y + 1", XYZ)}) == P("y^2 + 2*y", XYZ)


def test_substitute_into_other_ambient():
    p = P("a*b", "a b")
    out = substitute(p, {"a": P("x + 1", "x"), "b": P("x", "x")}, target_vars=("x",))
    assert out == P("x^2 + x", "x")


def test_partials():
    for l in (2, 3, 5):
        assert partial(P(f"y^{l}", XYZ), "y") == P(f"{l}*y^{l - 1}", XYZ)
    assert partial(P("y^2 + x - x^2*z", XYZ), "x") == P("1 - 2*x*z", XYZ)
    assert partial(P("7/3", XYZ), "x").is_zero()


def test_parse_errors():
    with pytest.raises(UnknownVariable):
        P("q + 1", XYZ)
    for bad in ("", "x +", "(x", "x^y", "x^1/2", "1/0"):
        with pytest.raises(ParseError):
            P(bad, XYZ)


def test_format_round_trip_cyclotomic():
    F = Field(3)
    p = P("zeta*x^2 - (zeta + 1)*y + 1/3", XYZ, F)
    assert P(p.format(), XYZ, F) == p


def test_format_round_trip_rational():
    p = P("2/3*x - (1/2)*y^3", "x y")
    assert p.format() == "-1/2*y^3 + 2/3*x"
    assert P(p.format(), "x y") == p


def test_zero_and_constants():
    z = P("x - x", "x")
    assert z.is_zero() and z.format() == "0"
    assert Polynomial.const(Q(3, 2), ("x",)).constant_value() == Q(3, 2)


def test_monomials_up_to_has_no_duplicates():
    mons = list(monomials_up_to(3, 4))
    assert len(mons) == len(set(mons)) == 35
    assert list(monomials_up_to(2, 2)) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_degree_helpers():
    p = P("x^2*y*z^3 + y", XYZ)
    assert p.total_degree() == 6 and p.degree_in("z") == 3
    assert p.used_vars() == {"x", "y", "z"}
