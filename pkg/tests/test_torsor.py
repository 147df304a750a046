import pytest

from cancellab.errors import NotClearable, PreconditionError, StageError
from cancellab.lab import catalog
from cancellab.lnd import certify_slice, check_locally_nilpotent, kernel_member, make_derivation
from cancellab.ring import RingMap, identity_map, present, tensor_with_polynomial_line, verify_iso, verify_map
from cancellab.torsor import (BundlePair, CylinderConfig, MatchingData, chart_cover, clear_denominators, cylinder_from_pair,
                              cylinder_iso, descend, matched_fiber_product, transport_derivation, trivialize_pair)

DANIELEWSKI = MatchingData(["x"], "x", [("y", "y")])


@pytest.fixture(scope="module")
def danielewski_pair():
    S1, D1, S2, D2 = catalog.danielewski()
    return S1, D1, S2, D2, matched_fiber_product(S1, D1, S2, D2, DANIELEWSKI, max_depth=4)


def test_chart_cover_generates_unit_ideal():
    for l in (2, 3):
        S = catalog.entry(1, l).S
        cov = chart_cover(S, "Y", l)
        assert len(cov.localizers) == l and cov.certificate.check()


def test_carrier_has_two_bundle_structures(danielewski_pair):
    S1, D1, S2, D2, bp = danielewski_pair
    W = bp.carrier
    for D, inj, s in ((bp.over1, bp.inj1, bp.slice1), (bp.over2, bp.inj2, bp.slice2)):
        assert W.equal(D.apply(s.element), W.one())
        for v in inj.source.vars:
            assert D.apply(inj.images[v]).is_zero()
    assert bp.inj1.verified and bp.inj2.verified
    assert check_locally_nilpotent(bp.over1) and check_locally_nilpotent(bp.over2)


def test_danielewski_cylinder_iso(danielewski_pair):
    S1, D1, S2, D2, bp = danielewski_pair
    cyl = cylinder_from_pair(bp)
    assert cyl.check()
    assert all(nf.is_zero() for nf in cyl.iso.residual_normal_forms().values())
    assert cyl.forward.source.same_presentation(tensor_with_polynomial_line(S1, "w"))
    assert cyl.forward.target.same_presentation(tensor_with_polynomial_line(S2, "w"))


def test_cylinder_iso_wrapper_matches():
    S1, D1, S2, D2 = catalog.danielewski()
    cyl = cylinder_iso(S1, D1, S2, D2, DANIELEWSKI, CylinderConfig(max_depth=4))
    assert cyl.check()


def test_same_ring_gives_identity():
    S1, D1, _, _ = catalog.danielewski()
    bp = matched_fiber_product(S1, D1, S1, D1, DANIELEWSKI)
    cyl = cylinder_from_pair(bp)
    assert all(cyl.forward.images[v] == cyl.forward.target.var(v) for v in cyl.forward.source.vars)


def test_trivial_pair_identity_shaped():
    R = present(["a", "w"])
    D = make_derivation(R, {"a": "0", "w": "1"})
    A = present(["a"])
    inj = RingMap(A, R, {"a": "a"})
    verify_map(inj)
    s = certify_slice(D, R.var("w"))
    bp = BundlePair(R, inj, inj, D, D, s, s)
    t1, t2 = trivialize_pair(bp, "v")
    assert t1.iso.check()
    assert t1.iso.forward.images == {"a": R.var("a"), "v": R.var("w")}


def test_unverified_injection_rejected(danielewski_pair):
    *_, bp = danielewski_pair
    raw = RingMap(bp.inj1.source, bp.carrier, bp.inj1.images)
    bad = BundlePair(bp.carrier, raw, bp.inj2, bp.over1, bp.over2, bp.slice1, bp.slice2)
    with pytest.raises(PreconditionError):
        trivialize_pair(bad)


def test_matching_exhausted_is_tagged():
    S1, D1, S2, D2 = catalog.danielewski()
    with pytest.raises(StageError) as info:
        matched_fiber_product(S1, D1, S2, D2, DANIELEWSKI, degree_bound=1, max_depth=4)
    assert type(info.value.cause).__name__ == "MatchingSearchExhausted"


def test_theorem1_descends_to_U():
    E1, E2 = catalog.entry(1, 2), catalog.entry(2, 2)
    match = MatchingData(["X", "u", "w_u"], "X", [("Y", "Y")])
    bp = matched_fiber_product(E1.SA, E1.D_lift, E2.SA, E2.D_lift, match, max_depth=4,
                               weights1=E1.weights, weights2=E2.weights, l=2)
    up = cylinder_from_pair(bp)
    down = descend(up, E1.descent, E2.descent)
    assert down.check()
    assert down.forward.source.same_presentation(tensor_with_polynomial_line(E1.U, "w"))
    assert down.forward.target.same_presentation(tensor_with_polynomial_line(E2.U, "w"))
    assert all(c.is_zero() for c in down.consistency.values())
    # transport of the second derivation: x is no longer in the kernel
    second = E1.second
    Uw = down.forward.source
    ext = make_derivation(Uw, {**{v: second.images[v] for v in E1.U.base_vars}, "w": "0"})
    moved, cert = transport_derivation(down, ext)
    ok, ev = kernel_member(moved, moved.ring.var("x"))
    assert not ok and not ev.is_zero()
    # through the identity and of the zero derivation
    same, _ = transport_derivation(verify_iso(identity_map(Uw), identity_map(Uw)), ext)
    assert all(same.image(v) == ext.image(v) for v in Uw.base_vars)
    zero = make_derivation(Uw, {v: "0" for v in Uw.base_vars})
    assert transport_derivation(down, zero)[0].is_zero()


def test_clear_denominators():
    R = present(["x", "y"], [], [("x", "w")])
    D = make_derivation(R, {"x": "0", "y": "w^2 + y*w"})
    out, N = clear_denominators(D, R.var("x"), "w")
    assert N == 2
    assert out.image("y") == out.ring.element("1 + x*y")
    P_ = make_derivation(R, {"x": "0", "y": "x^3"})
    out, N = clear_denominators(P_, R.var("x"), "w")
    assert N == 0 and out.image("y") == out.ring.element("x^3")
    bad = make_derivation(R, {"x": "1", "y": "0"})
    with pytest.raises(PreconditionError):
        clear_denominators(bad, R.var("x"), "w")
    with pytest.raises(NotClearable):
        clear_denominators(D, R.var("x"), "w", bound=1)
