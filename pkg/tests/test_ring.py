import pytest

from cancellab.errors import (BoundTooSmall, MissingImage, NotEquivariant, NotInverse, RelationNotPreserved,
                              VariableClash)
from cancellab.lab.catalog import entry
from cancellab.poly import P
from cancellab.ring import (MonomialGroupAction, PresentedRing, RingMap, compose_iso, equivariance_check,
                            identity_map, invariant_subring, present, tensor_with_polynomial_line, verify_iso,
                            verify_map)


def test_localization_adds_inverse_variable():
    U = present(["x", "y", "z"], [], [("y^2 + x - x*z", "w")])
    assert U.vars == ("x", "y", "z", "w")
    assert U.relations == [P("w*y^2 + w*x - w*x*z - 1", U.vars)]
    assert U.equal(U.var("w") * U.element("y^2 + x - x*z"), U.one())


def test_laurent_ring():
    L = present(["u"], [], ["u"])
    assert L.vars == ("u", "w_1") and L.inverse_of("w_1") == L.var("u")
    assert L.normal(L.element("u^3*w_1^2")) == L.var("u")


def test_trivial_relation_pruned():
    R = present(["x"], ["x - x"])
    assert R.relations == [] and not R.inconsistent


def test_inconsistent_presentation_flagged():
    R = present(["x"], ["x", "x - 1"], allow_inconsistent=True)
    assert R.inconsistent


def test_ring_json_round_trip():
    R = present(["x", "y"], ["x*y - 1 - y^3"], [("x", "w_x")])
    back = PresentedRing.from_json(R.to_json())
    assert back.same_presentation(R) and back.canonical() == R.canonical()


def test_variable_clash():
    with pytest.raises(VariableClash):
        present(["x", "w"], [], [("x", "w")])
    with pytest.raises(VariableClash):
        tensor_with_polynomial_line(present(["x", "v"]), "v")


def test_map_into_laurent_ring():
    A = present(["a", "b"], ["a*b - 1"])
    L = present(["u"], [], [("u", "w_u")])
    f = verify_map(RingMap(A, L, {"a": "u", "b": "w_u"}))
    assert f.verified and all(c.check() for c in f.relation_certificates)


def test_phi_pullback_map_verifies():
    e = entry(1, 2)
    assert e.Phi.verified
    assert e.Phi.apply(e.T.element("y^2 + x - x*z")) == e.SA.element("u^2")


def test_relation_not_preserved():
    A = present(["x"], ["x^2"])
    B = present(["y"])
    with pytest.raises(RelationNotPreserved):
        verify_map(RingMap(A, B, {"x": "y"}))


def test_missing_image():
    with pytest.raises(MissingImage):
        RingMap(present(["x", "y"]), present(["t"]), {"x": "t"})


def test_build_fills_inverse_images():
    U = present(["x"], [], [("x", "w_x")])
    f = RingMap.build(U, U, {"x": "2*x"})
    assert f.images["w_x"] == U.element("1/2*w_x")


def test_identity_iso():
    e = entry(2, 2)
    for R in (e.U, e.S, e.SA):
        cert = verify_iso(identity_map(R), identity_map(R))
        assert cert.check()


def test_phi_iso_with_explicit_inverse():
    e = entry(2, 2)
    cert = verify_iso(e.Phi, e.Phi_inverse)
    assert cert.check()
    assert all(nf.is_zero() for nf in cert.residual_normal_forms().values())


def test_not_inverse_reports_residual():
    Qx = present(["x"])
    with pytest.raises(NotInverse) as info:
        verify_iso(RingMap(Qx, Qx, {"x": "x + 1"}), RingMap(Qx, Qx, {"x": "x - 2"}))
    assert info.value.generator == "x" and info.value.residual == "-1"


def test_compose_iso():
    Qx = present(["x"])
    a = verify_iso(RingMap(Qx, Qx, {"x": "x + 1"}), RingMap(Qx, Qx, {"x": "x - 1"}))
    b = verify_iso(RingMap(Qx, Qx, {"x": "2*x"}), RingMap(Qx, Qx, {"x": "1/2*x"}))
    c = compose_iso(a, b)
    assert c.forward.images["x"] == Qx.element("2*x + 1")


def test_cylinder_of_koras_russell():
    e = entry(2, 2, k=3)
    C = tensor_with_polynomial_line(e.X, "v")
    assert C.vars == ("x", "y", "z", "t", "v") and len(C.relations) == 1


def test_invariant_generators_laurent_example():
    R = present(["Y", "u"], [], [("u", "w_u")])
    act = MonomialGroupAction(R, 2, {"Y": -1, "u": 1}).verify()
    inv = invariant_subring(R, act, 2)
    assert {g.format() for g in inv.generators} == {"u^2", "w_u^2", "Y*u"}
    assert inv.inclusion.verified
    with pytest.raises(BoundTooSmall):
        invariant_subring(R, act, 1)


def test_trivial_action_returns_ring_generators():
    R = present(["Y", "u"], [], [("u", "w_u")])
    act = MonomialGroupAction(R, 3, {}).verify()
    inv = invariant_subring(R, act, 1, present_ring=False)
    assert [g.format() for g in inv.generators] == ["Y", "u", "w_u"]


def test_invariants_of_cover_recover_U12():
    e = entry(1, 2)
    inv = invariant_subring(e.SA, e.action, 4)
    assert [g.format() for g in inv.generators] == ["X", "Z", "Y*u", "u^2", "w_u^2"]
    Q = inv.presentation
    g1, g2, g3, g4, g5 = Q.vars
    fwd = RingMap(e.U, Q, {"x": f"{g1}*{g4}", "y": g3, "z": g2, "w_f": g5})
    bwd = RingMap(Q, e.U, {g1: "x*w_f", g2: "z", g3: "y", g4: "y^2 + x - x*z", g5: "w_f"})
    assert verify_iso(fwd, bwd).check()


def test_action_weights_and_twist():
    e = entry(1, 3)
    act = e.action
    assert act.weights["w_u"] == 2
    assert act.is_invariant(e.SA.element("u^3*X"))
    assert not act.is_invariant(e.SA.element("Y"))


def test_equivariance_identity_and_failure():
    e = entry(1, 2)
    assert all(nf.is_zero() for nf in equivariance_check(identity_map(e.SA), e.action).values())
    # Y -> u: weight -1 against weight +1, distinct for l = 3
    R, L = present(["Y"]), present(["u"])
    actR = MonomialGroupAction(R, 3, {"Y": -1}).verify()
    actL = MonomialGroupAction(L, 3, {"u": 1}).verify()
    with pytest.raises(NotEquivariant):
        equivariance_check(RingMap(R, L, {"Y": "u"}), actR, actL)


def test_lifted_derivation_is_equivariant():
    e = entry(2, 3)
    out = equivariance_check(e.D_lift, e.action)
    assert set(out) == {"X", "Y", "Z", "u"}
