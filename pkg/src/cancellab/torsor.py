"""Fiber-product trick: a carrier ring with two Ga-bundle structures, both
trivialized, composed into a certified cylinder isomorphism.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial
from typing import Sequence

from gmpy2 import mpq

from . import gb as _gb
from .coeff import root_of_unity
from .errors import (LabError, MatchingSearchExhausted, NoPreimage, NoSliceWithinBound, NotClearable,
                     PreconditionError, PreimageFailure, StageError, VariableClash)
from .linalg import IncrementalSolver
from .lnd import (Derivation, NilpotencyCertificate, Slice, _nilpotent_chain, check_locally_nilpotent,
                  default_bound, exp_apply, find_slice, kernel_member, make_derivation)
from .poly import Polynomial, monomials_up_to, substitute
from .ring import (IsoCertificate, MonomialGroupAction, PresentedRing, RingMap, identity_map,
                   tensor_with_polynomial_line, verify_iso, verify_map)

log = logging.getLogger(__name__)

DEFAULT_DEGREE = 16


def _stage(name: str):
    """Decorator-free helper: run ``fn`` and tag failures with a stage name."""
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, et, ev, tb):
            if ev is not None and isinstance(ev, LabError) and not isinstance(ev, StageError):
                raise StageError(name, ev) from ev
            return False
    return _Ctx()


# --------------------------------------------------------------------------
# chart cover


@dataclass
class ChartCover:
    """Charts ``{h_eta != 0}`` indexed by the l-th roots of unity."""

    ring: PresentedRing
    variable: str
    order: int
    labels: list
    localizers: list
    certificate: _gb.MembershipCertificate | None = None

    def certify(self) -> _gb.MembershipCertificate:
        one = self.ring.one()
        self.certificate = _gb.membership(one, self.localizers)
        return self.certificate


def chart_cover(ring: PresentedRing, variable: str, l: int) -> ChartCover:
    Y = ring.var(variable)
    labels = [root_of_unity(l, k) for k in range(l)]
    hs = []
    for eta in labels:
        h = ring.one()
        for eps in labels:
            if eps != eta:
                h = h * (Y - ring.const(eps))
        hs.append(h)
    cover = ChartCover(ring, variable, l, labels, hs)
    cover.certify()
    return cover


# --------------------------------------------------------------------------
# matched fiber product


@dataclass
class MatchingData:
    """Shared base variables, the dividing variable, and branch pairs ``(v1, v2)``."""

    shared: Sequence[str]
    divisor: str
    branches: Sequence[tuple[str, str]]
    suffix: str = "'"


@dataclass
class BundlePair:
    carrier: PresentedRing
    inj1: RingMap
    inj2: RingMap
    over1: Derivation          # kills inj1(A1): bundle over the first side
    over2: Derivation          # kills inj2(A2)
    slice1: Slice
    slice2: Slice
    divided: list = field(default_factory=list)      # (name, defining relation)
    action: MonomialGroupAction | None = None
    depth: int = 0


def _second_names(A2: PresentedRing, A1: PresentedRing, match: MatchingData) -> dict:
    names = {}
    for v in A2.vars:
        if v in match.shared:
            names[v] = v
        else:
            nv = v + match.suffix
            if nv in A1.vars:
                raise VariableClash(nv)
            names[v] = nv
    return names


def _div_by(W: PresentedRing, x: Polynomial, num: Polynomial) -> Polynomial:
    """``h`` with ``x * h == num`` in ``W`` (``x`` a non-zero-divisor)."""
    gens = list(W.relations) + [x]
    basis = _gb.buchberger(gens, W.order)
    rem, comb = basis.express(num)
    if not rem.is_zero():
        raise PreconditionError(f"{num} is not divisible by {x}")
    h = W.normal(comb[-1])
    assert W.normal(x * h - num).is_zero()
    return h


def matched_fiber_product(A1: PresentedRing, D1: Derivation, A2: PresentedRing, D2: Derivation,
                          match: MatchingData, *, degree_bound: int = DEFAULT_DEGREE, max_depth: int = 2,
                          weights1: dict | None = None, weights2: dict | None = None, l: int = 1,
                          slice_filter: bool | None = None) -> BundlePair:
    """Search for a carrier ``W`` by adjoining divided differences ``m_j``.

    With ``weights1``/``weights2`` the carrier gets a mu_l action, slices are
    searched among invariant monomials, and equivariance is verified.
    """
    if A1.same_presentation(A2) and D1.images == D2.images:
        return _degenerate_pair(A1, D1)
    names2 = _second_names(A2, A1, match)
    ren2 = lambda p: p.rename(names2)
    inv1 = set(A1.inverse_vars)
    second_only = [names2[v] for v in A2.vars if v not in match.shared]
    vars0 = list(A1.vars) + second_only
    inverted = list(A1.inverted)
    rels = list(A1.user_relations)
    for r in A2.user_relations:
        rels.append(ren2(r))
    for e, w in A2.inverted:
        if w in match.shared and w in inv1 and A1.inverse_of(w) == e:
            continue
        if w in match.shared:
            rels.append(Polynomial.var(w, vars0) * ren2(e).to_ambient(vars0) - 1)
        else:
            inverted.append((ren2(e), names2[w]))
    act = None
    weights = None
    if weights1 is not None:
        weights = dict(weights1)
        for v, k in (weights2 or {}).items():
            weights[names2[v]] = k
    first_vars = list(A1.vars)
    div = match.divisor
    prevs = [names2[b2] for _, b2 in match.branches]
    cur_vars = list(vars0)
    cur_rels = [r.to_ambient(cur_vars) for r in rels]
    cur_inv = [(e.to_ambient(cur_vars), w) for e, w in inverted]
    divided = []
    qs_all = []
    branch_eqs = [(b1, names2[b2]) for b1, b2 in match.branches]
    last_exc = None
    for depth in range(1, max_depth + 1):
        with _stage(f"matching depth {depth}"):
            W0 = PresentedRing(tuple(cur_vars), cur_rels, cur_inv, A1.field, A1.order)
            x0 = W0.var(div)
            cong = list(W0.relations) + [x0]
            if depth == 1:
                cong += [W0.var(b2) - W0.var(b1) for b1, b2 in branch_eqs]
            cgb = _gb.buchberger(cong, W0.order)
            new_vars = list(cur_vars)
            new_rels = list(cur_rels)
            step = []
            for k, prev in enumerate(prevs):
                q = _solve_congruence(cgb, W0, W0.var(prev), first_vars, degree_bound, weights,
                                      l, prev)
                name = _gb.fresh_name("m" if depth == 1 and k == 0 else f"m{depth}_{k}", new_vars)
                new_vars.append(name)
                step.append((prev, q, name))
                if weights is not None:
                    weights[name] = (weights.get(prev, 0) - weights.get(div, 0)) % l
            amb = tuple(new_vars)
            gens = [r.to_ambient(amb) for r in new_rels]
            gens += [w_ * e.to_ambient(amb) - 1 for e, w_ in ((e, Polynomial.var(w, amb)) for e, w in cur_inv)]
            for prev, q, name in step:
                gens.append(Polynomial.var(div, amb) * Polynomial.var(name, amb)
                            - (Polynomial.var(prev, amb) - q.to_ambient(amb)))
            sat = _gb.saturation(gens, Polynomial.var(div, amb))
            inv_now = [(e.to_ambient(amb), w) for e, w in cur_inv]
            inv_rels = {Polynomial.var(w, amb) * e - 1 for e, w in inv_now}
            W = PresentedRing(amb, [g for g in sat if g not in inv_rels], inv_now, A1.field, A1.order)
            for prev, q, name in step:
                rel = Polynomial.var(div, amb) * Polynomial.var(name, amb) - (Polynomial.var(prev, amb) - q.to_ambient(amb))
                assert W.normal(rel).is_zero()
                divided.append((name, rel))
            qs_all.append(step)
        with _stage(f"carrier derivations depth {depth}"):
            inj1 = verify_map(RingMap(A1, W, {v: W.var(v) for v in A1.vars}, "i1"))
            inj2 = verify_map(RingMap(A2, W, {v: W.var(names2[v]) for v in A2.vars}, "i2"))
            over1, over2 = _carrier_derivations(W, A1, D1, A2, D2, names2, qs_all, div)
            if weights is not None:
                act = MonomialGroupAction(W, l, weights).verify()
                from .ring import equivariance_check
                equivariance_check(over1, act)
                equivariance_check(over2, act)
        flt = None
        if act is not None and (slice_filter is None or slice_filter):
            flt = _twist_zero_filter(W, act)
        try:
            with _stage(f"slices depth {depth}"):
                check_locally_nilpotent(over1)
                check_locally_nilpotent(over2)
                s1 = find_slice(over1, degree_bound, monomial_filter=flt)
                s2 = find_slice(over2, degree_bound, monomial_filter=flt)
        except StageError as exc:
            if isinstance(exc.cause, NoSliceWithinBound):
                last_exc = exc
                log.info("depth %d: %s", depth, exc)
                prevs = [name for _, _, name in step]
                cur_vars = list(amb)
                cur_rels = list(W.user_relations)
                cur_inv = inv_now
                continue
            raise
        return BundlePair(W, inj1, inj2, over1, over2, s1, s2, divided, act, depth)
    if last_exc is not None:
        raise last_exc.cause
    raise MatchingSearchExhausted(degree_bound)


def _twist_zero_filter(W: PresentedRing, act: MonomialGroupAction):
    ws = [act.weights[v] for v in W.vars]
    l = act.order
    return lambda e: sum(a * b for a, b in zip(e, ws)) % l == 0


def _solve_congruence(cgb, W0: PresentedRing, target: Polynomial, first_vars: Sequence[str], bound: int,
                      weights, l, prev) -> Polynomial:
    """``q`` in the first-side variables with ``target == q`` modulo the congruence basis."""
    idx = [W0.vars.index(v) for v in first_vars]
    n = len(W0.vars)
    key = W0.order.key_function(W0.vars)
    solver = IncrementalSolver(row_key=key)
    cols = []
    rhs = cgb.reduce(target).terms
    tw = None if weights is None else weights.get(prev, 0) % l
    for deg in range(bound + 1):
        for sub in monomials_up_to(len(idx), deg):
            if sum(sub) != deg:
                continue
            e = [0] * n
            for i, k in zip(idx, sub):
                e[i] = k
            e = tuple(e)
            if tw is not None and sum(k * weights.get(v, 0) for v, k in zip(W0.vars, e)) % l != tw:
                continue
            cols.append(e)
            solver.add_column(cgb.reduce(Polynomial.monomial(e, W0.vars)).terms)
        sol = solver.solve(rhs)
        if sol is not None:
            return Polynomial(W0.vars, {cols[j]: c for j, c in sol.items() if c})
    raise MatchingSearchExhausted(bound)


def _carrier_derivations(W, A1, D1, A2, D2, names2, steps, div):
    """Extend D2 (killing A1) and D1 (killing A2) to W, dividing for each m_j."""
    first = set(A1.base_vars)
    out = []
    for D, side in ((D2, 2), (D1, 1)):
        imgs = {}
        for v in A1.base_vars:
            imgs[v] = W.zero() if side == 2 else D.images[v].to_ambient(W.vars)
        for v in A2.base_vars:
            nv = names2[v]
            if nv in first:
                continue
            imgs[nv] = W.zero() if side == 1 else D.images[v].rename(names2).to_ambient(W.vars)
        partial = Derivation(W, {**{v: W.zero() for v in W.base_vars}, **imgs})
        x = W.var(div)
        for step in steps:
            for prev, q, name in step:
                num = partial.images[prev] - partial.apply(q.to_ambient(W.vars)) if prev in partial.images \
                    else W.zero()
                imgs[name] = _div_by(W, x, num)
                partial = Derivation(W, {**{v: W.zero() for v in W.base_vars}, **imgs})
        label = "over first side" if side == 2 else "over second side"
        out.append(make_derivation(W, {v: imgs.get(v, W.zero()) for v in W.base_vars}, label))
    return out[0], out[1]


def _degenerate_pair(A: PresentedRing, D: Derivation) -> BundlePair:
    inj = identity_map(A)
    return BundlePair(A, inj, inj, D, D, None, None, [], None, 0)


# --------------------------------------------------------------------------
# trivialization


@dataclass
class SideTrivialization:
    """Certified ``A[w] ~= W`` where ``A`` embeds as the kernel."""

    iso: IsoCertificate          # forward A[w] -> W, backward W -> A[w]
    kernel_preimages: dict        # W-variable -> element of A
    slice: Slice


def trivialize_side(W: PresentedRing, D: Derivation, s: Slice, inj: RingMap, parameter: str = "w",
                    bound: int | None = None) -> SideTrivialization:
    if not inj.verified:
        raise PreconditionError("injection is not verified")
    A = inj.source
    bound = default_bound(D) if bound is None else bound
    minus_s = -s.element
    pre = {}
    for v in W.vars:
        pi = exp_apply(D, W.var(v), minus_s, bound)
        if not D.apply(pi).is_zero():
            raise PreconditionError(f"slice evaluation of {v} left the kernel")
        try:
            pre[v] = _gb.preimage(inj, pi)
        except NoPreimage as exc:
            raise PreimageFailure(f"kernel element {pi} not in the injected image") from exc
        assert inj.apply(pre[v]) == W.normal(pi)
    Aw = tensor_with_polynomial_line(A, parameter)
    wv = Aw.var(parameter)
    forward = RingMap(Aw, W, {**{v: inj.images[v] for v in A.vars}, parameter: s.element}, "trivialization")
    back = {}
    pre_w = {v: p.to_ambient(Aw.vars) for v, p in pre.items()}
    for v in W.vars:
        acc = Aw.zero()
        for k, term in enumerate(_nilpotent_chain(D, W.var(v), bound)):
            acc = acc + substitute(term, pre_w, Aw.vars) * wv ** k * mpq(1, factorial(k))
        back[v] = acc
    backward = RingMap(W, Aw, back, "trivialization inverse")
    verify_map(forward)
    verify_map(backward)
    return SideTrivialization(verify_iso(forward, backward), pre, s)


def trivialize_pair(bp: BundlePair, parameter: str = "w") -> tuple[SideTrivialization, SideTrivialization]:
    for inj in (bp.inj1, bp.inj2):
        if not inj.verified:
            raise PreconditionError("unverified injection")
    with _stage("trivialize first side"):
        t1 = trivialize_side(bp.carrier, bp.over1, bp.slice1, bp.inj1, parameter)
    with _stage("trivialize second side"):
        t2 = trivialize_side(bp.carrier, bp.over2, bp.slice2, bp.inj2, parameter)
    return t1, t2


# --------------------------------------------------------------------------
# cylinder isomorphisms


@dataclass
class CylinderIsoCertificate:
    iso: IsoCertificate                    # forward A1[w] -> A2[w]
    pair: BundlePair | None = None
    sides: tuple = ()
    upstairs: "CylinderIsoCertificate | None" = None
    consistency: dict = field(default_factory=dict)

    @property
    def forward(self) -> RingMap:
        return self.iso.forward

    @property
    def backward(self) -> RingMap:
        return self.iso.backward

    def check(self) -> bool:
        return self.iso.check()


def cylinder_from_pair(bp: BundlePair, parameter: str = "w") -> CylinderIsoCertificate:
    if bp.slice1 is None:
        R = tensor_with_polynomial_line(bp.carrier, parameter)
        return CylinderIsoCertificate(verify_iso(identity_map(R), identity_map(R)), bp)
    t1, t2 = trivialize_pair(bp, parameter)
    with _stage("compose cylinders"):
        fwd = t2.iso.backward.compose(t1.iso.forward, "cylinder iso")
        bwd = t1.iso.backward.compose(t2.iso.forward, "cylinder iso inverse")
        iso = verify_iso(verify_map(fwd), verify_map(bwd))
    return CylinderIsoCertificate(iso, bp, (t1, t2))


@dataclass
class CylinderConfig:
    degree_bound: int = DEFAULT_DEGREE
    max_depth: int = 2
    parameter: str = "w"


def cylinder_iso(A1: PresentedRing, D1: Derivation, A2: PresentedRing, D2: Derivation, match: MatchingData,
                 config: CylinderConfig | None = None, **kw) -> CylinderIsoCertificate:
    config = config or CylinderConfig()
    with _stage("matched fiber product"):
        bp = matched_fiber_product(A1, D1, A2, D2, match, degree_bound=config.degree_bound,
                                   max_depth=config.max_depth, **kw)
    return cylinder_from_pair(bp, config.parameter)


def descend(up: CylinderIsoCertificate, low1: RingMap, low2: RingMap, parameter: str = "w") -> CylinderIsoCertificate:
    """Push an equivariant upstairs iso down along the invariant inclusions.

    ``low_i : B_i -> A_i`` identify ``B_i`` with the invariant subring of
    ``A_i``; the upstairs forward map sends ``low1``-images to invariants, so
    each generator has a unique ``low2``-preimage.
    """
    B1w = tensor_with_polynomial_line(low1.source, parameter)
    B2w = tensor_with_polynomial_line(low2.source, parameter)
    A1w = up.forward.source
    A2w = up.forward.target
    e1 = verify_map(RingMap(B1w, A1w, {**low1.images, parameter: A1w.var(parameter)}, "invariant inclusion 1"))
    e2 = verify_map(RingMap(B2w, A2w, {**low2.images, parameter: A2w.var(parameter)}, "invariant inclusion 2"))
    fwd, bwd = {}, {}
    with _stage("descent"):
        for v in B1w.vars:
            try:
                fwd[v] = _gb.preimage(e2, up.forward.apply(e1.images[v]))
            except NoPreimage as exc:
                raise PreimageFailure(f"image of {v} is not invariant") from exc
        for v in B2w.vars:
            try:
                bwd[v] = _gb.preimage(e1, up.backward.apply(e2.images[v]))
            except NoPreimage as exc:
                raise PreimageFailure(f"image of {v} is not invariant") from exc
        F = verify_map(RingMap(B1w, B2w, fwd, "descended cylinder iso"))
        G = verify_map(RingMap(B2w, B1w, bwd, "descended cylinder iso inverse"))
        iso = verify_iso(F, G)
    consistency = {}
    for v in B1w.vars:
        consistency[v] = A2w.normal(e2.apply(F.images[v]) - up.forward.apply(e1.images[v]))
        if not consistency[v].is_zero():
            raise PreconditionError(f"descent inconsistent on {v}")
    return CylinderIsoCertificate(iso, up.pair, up.sides, up, consistency)


# --------------------------------------------------------------------------
# transport and power clearing


def transport_derivation(iso: CylinderIsoCertificate | IsoCertificate, D: Derivation,
                         bound: int | None = None) -> tuple[Derivation, NilpotencyCertificate]:
    """``phi o D o phi^{-1}`` on the target cylinder, re-certified."""
    F = iso.forward
    G = iso.backward
    if not D.ring.same_presentation(F.source):
        raise PreconditionError("derivation does not live on the iso source")
    T = F.target
    imgs = {v: F.apply(D.apply(G.images[v])) for v in T.base_vars}
    out = make_derivation(T, imgs, f"transport({D.name})" if D.name else "transport")
    return out, check_locally_nilpotent(out, bound)


def clear_denominators(D: Derivation, f: Polynomial, inverse_var: str, bound: int = 32,
                       target: PresentedRing | None = None) -> tuple[Derivation, int]:
    """Smallest ``N`` with ``f^N D`` polynomial on the non-inverse generators.

    Returns the restricted derivation on ``target`` (default: the ring with the
    inverse variable dropped) and ``N``.
    """
    R = D.ring
    ok, ev = kernel_member(D, f)
    if not ok:
        raise PreconditionError(f"f is not in the kernel: D(f) = {ev}")
    keep = [v for v in R.vars if v != inverse_var]
    imgs = {v: D.images[v] for v in R.base_vars}
    fR = R.element(f)
    N = None
    scaled = None
    for n in range(bound + 1):
        cur = {v: R.normal(fR ** n * p) for v, p in imgs.items()}
        if all(inverse_var not in p.used_vars() for p in cur.values()):
            N, scaled = n, cur
            break
    if N is None:
        raise NotClearable(bound)
    if target is None:
        target = PresentedRing(tuple(keep), [r.to_ambient(keep) for r in R.user_relations
                                             if inverse_var not in r.used_vars()],
                               [(e.to_ambient(keep), w) for e, w in R.inverted if w != inverse_var],
                               R.field, R.order)
    out = make_derivation(target, {v: scaled[v].to_ambient(target.vars) for v in target.base_vars},
                          f"f^{N}*{D.name}" if D.name else f"f^{N}*D")
    ok, ev = kernel_member(out, target.element(f.to_ambient(target.vars)) if isinstance(f, Polynomial) else f)
    if not ok:
        raise PreconditionError("f left the kernel after clearing")
    return out, N
