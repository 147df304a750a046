import pytest

from cancellab.coeff import (QQ, Cyclotomic, Field, Q, cyclotomic_poly, euler_phi, field_arith, format_coeff,
                             parse_coeff, root_of_unity)
from cancellab.errors import FieldMismatch


def test_rational_product_reduces():
    assert field_arith(Q(2, 3), Q(9, 4), "mul") == Q(3, 2)


def test_zeta2_is_minus_one():
    z = Field(2).zeta()
    assert field_arith(z, z, "mul") == 1


def test_zeta3_relation():
    z = Field(3).zeta()
    assert z * z + z == -1
    assert format_coeff(z * z) == "-zeta - 1"


@pytest.mark.parametrize("l,k,expected", [(2, 1, -1), (4, 2, -1), (3, 3, 1), (6, 3, -1), (5, 0, 1)])
def test_root_of_unity_rational_values(l, k, expected):
    assert root_of_unity(l, k) == expected


def test_root_of_unity_negative_exponent_is_inverse():
    a, b = root_of_unity(5, 2), root_of_unity(5, -2)
    assert a * b == 1


def test_cyclotomic_polys():
    assert cyclotomic_poly(4) == (1, 0, 1)
    assert cyclotomic_poly(6) == (1, -1, 1)
    assert [euler_phi(n) for n in (1, 2, 3, 4, 12)] == [1, 1, 2, 2, 4]


def test_division_and_inverse():
    z = Field(7).zeta()
    a = z ** 3 + 2 * z - Q(1, 3)
    assert a * a.inverse() == 1
    assert field_arith(a, a, "div") == 1
    with pytest.raises(ZeroDivisionError):
        Cyclotomic(7, [0]).inverse()


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        field_arith(Field(3).zeta(), Field(4).zeta(), "add")


def test_format_parse_round_trip():
    F = Field(3)
    for c in (F.zeta(), F.zeta() * F.zeta() + Q(1, 2), Q(-7, 3)):
        assert parse_coeff(format_coeff(c), F) == c
    assert parse_coeff("-5/10") == Q(-1, 2)


def test_field_json():
    assert Field.from_json(Field(3).to_json()) == Field(3)
    assert Field.from_json(QQ.to_json()) == QQ
    assert Field(2).is_rational and not Field(3).is_rational
