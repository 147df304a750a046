"""Named verification scenarios.  Each returns a :class:`Report`."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from math import factorial

from .. import gb as _gb
from ..coeff import format_coeff, root_of_unity
from ..errors import (MatchingSearchExhausted, NoSliceWithinBound, ParameterError, PreconditionError,
                      PreimageFailure, StageError)
from ..lnd import (certify_slice, check_locally_nilpotent, exponential, fixed_point_free, kernel_member,
                   lift_through_cover, make_derivation)
from ..ring import RingMap, verify_iso, verify_map
from ..torsor import (DEFAULT_DEGREE, MatchingData, chart_cover, clear_denominators, cylinder_from_pair,
                      descend, matched_fiber_product, transport_derivation)
from . import catalog
from .evidence import (chain_evidence, derivation_evidence, iso_evidence, lit, map_evidence, mul, scale, sub,
                       twist, via_der, via_map)
from .report import FAILED, MODULO_CITATION, Claim, ClaimRunner, Report, root_cause


@dataclass
class LabConfig:
    max_degree: int | None = None     # None: default bound with one doubling retry
    max_depth: int | None = None
    order: str = "grevlex"
    route: str = "upstairs"           # theorem1: via the equivariant cover, or "direct" on U_{d,l}
    timings: bool = False

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("timings")
        return d


def _cfg(config) -> LabConfig:
    return config if config is not None else LabConfig()


def _parameter_failure(rep: Report, exc: ParameterError) -> Report:
    rep.claims.append(Claim("parameters", "admissible parameters", FAILED, reason=f"ParameterError: {exc}"))
    return rep


def _bounded(fn, config: LabConfig):
    """Run ``fn(bound)``; at the default bound, retry once with the doubled bound."""
    bound = config.max_degree if config.max_degree is not None else DEFAULT_DEGREE
    try:
        return fn(bound)
    except (NoSliceWithinBound, MatchingSearchExhausted, StageError) as exc:
        cause = exc
        while isinstance(cause, StageError):
            cause = cause.cause
        if config.max_degree is not None or not isinstance(cause, (NoSliceWithinBound, MatchingSearchExhausted)):
            raise
        return fn(2 * bound)


# --------------------------------------------------------------------------
# foundations


def scenario_foundations(d: int = 1, l: int = 2, config: LabConfig | None = None) -> Report:
    config = _cfg(config)
    rep = Report("foundations", {"d": d, "l": l}, config=config.echo())
    run = ClaimRunner(rep, config.timings)
    st = run.state
    try:
        E = catalog.entry(d, l, order=config.order)
        E.U
    except ParameterError as exc:
        return _parameter_failure(rep, exc)

    def well_defined(ev):
        D = E.D
        st["D"] = derivation_evidence(ev, D, "D")
        return {"images": {v: D.images[v].format() for v in D.ring.base_vars}}

    def kernel_f(ev):
        D = E.D
        d_ = ev.der(D, "D")
        U = ev.ring(E.U, "U")
        ev.zero(U, via_der(d_, lit(U, E.f)), "D(f)")
        return {"f": E.f.format()}

    def chains(ev):
        D = E.D
        cert = check_locally_nilpotent(D)
        d_ = ev.der(D, "D")
        U = ev.ring(E.U, "U")
        chain_evidence(ev, D, cert, d_)
        zc = cert.chains["z"]
        if len(zc) - 1 != l + 1:
            raise PreconditionError(f"z-chain has length {len(zc) - 1}, expected {l + 1}")
        expected = E.U.element(f"{factorial(l)}*x^{d * (l - 1)}")
        ev.zero(U, sub(lit(U, zc[l]), lit(U, expected)), f"D^{l}(z) = {l}! x^{d * (l - 1)}")
        st["nil"] = cert
        return {"lengths": {v: cert.length(v) for v in cert.chains}, "top_z": zc[l].format()}

    def freeness(ev):
        cert = fixed_point_free(E.D)
        U = ev.ring(E.U, "U")
        ev.member(U, lit(U, E.U.one()), cert.generators, cert.combiners, cert.exponent, cert.saturating,
                  "1 in (D(x), D(y), D(z)) after saturation")
        if cert.exponent > d:
            raise PreconditionError(f"saturation exponent {cert.exponent} exceeds d = {d}")
        return {"exponent": cert.exponent}

    def exp_roundtrip(ev):
        D = E.D
        cert = st["nil"]
        plus = exponential(D, "w", cert=cert)
        Rw = plus.target
        minus = exponential(D, "w", cert=cert, target=Rw, sign=-1)
        ext = verify_map(RingMap(Rw, Rw, {**minus.images, "w": Rw.var("w")}, "exp(-w) on R[w]"))
        at0 = verify_map(RingMap(Rw, E.U, {**{v: E.U.var(v) for v in E.U.vars}, "w": E.U.zero()}, "w = 0"))
        p = map_evidence(ev, plus, "exp_plus")
        m = map_evidence(ev, ext, "exp_minus")
        z = ev.map(at0, "at_zero")
        U = ev.ring(E.U, "U")
        RW = ev.ring(Rw, "U[w]")
        for v in E.U.vars:
            ev.zero(RW, sub(via_map(m, via_map(p, lit(U, E.U.var(v)))), lit(RW, Rw.var(v))), f"exp(-w)exp(w)({v})")
            ev.zero(U, sub(via_map(z, via_map(p, lit(U, E.U.var(v)))), lit(U, E.U.var(v))), f"exp(0)({v})")
        return {"exp": {v: plus.images[v].format() for v in E.U.vars}}

    run.run("derivation well-defined", "free Ga-action on U_{d,l}", well_defined)
    run.run("f in kernel", "invariance of f_{d,l}", kernel_f, ["derivation well-defined"])
    run.run("local nilpotency", "locally nilpotent derivation x^d dy + l y^(l-1) dz", chains, ["derivation well-defined"])
    run.run("fixed-point free", "freeness of the Ga-action", freeness, ["derivation well-defined"])
    run.run("exponential round trip", "Ga co-action exp(wD)", exp_roundtrip, ["local nilpotency"])
    return rep


# --------------------------------------------------------------------------
# Phi


def scenario_phi(d: int = 1, l: int = 2, config: LabConfig | None = None) -> Report:
    config = _cfg(config)
    rep = Report("phi", {"d": d, "l": l}, config=config.echo())
    run = ClaimRunner(rep, config.timings)
    E = catalog.entry(d, l, order=config.order)

    def pullback(ev):
        phi = ev.map(E.Phi, "Phi")
        T = ev.ring(E.T, "T")
        SA = ev.ring(E.SA, "SA")
        target = E.SA.element(f"u^{l}*(Y^{l} + X - X^{d}*Z)")
        expr = sub(via_map(phi, lit(T, E.T.element(catalog.f_text(d, l)))), lit(SA, target))
        val = ev._context().eval(expr).to_ambient(E.SA.vars)
        laurent = E.SA.element("u*w_u - 1")
        cert = _gb.membership(val, [laurent])
        ev.member(SA, expr, [laurent], cert.combiners, label="Phi*(f) - u^l (Y^l + X - X^d Z) in (u w_u - 1)")
        return {"pullback": E.Phi.raw(E.T.element(catalog.f_text(d, l))).format()}

    def iso(ev):
        cert = verify_iso(E.Phi, E.Phi_inverse)
        iso_evidence(ev, cert)
        return {"inverse": {v: E.Phi_inverse.images[v].format() for v in E.SA.vars}}

    def equivariance(ev):
        act = E.action
        D = E.D_lift
        a = ev.action(act, "mu")
        d_ = derivation_evidence(ev, D, "lifted D")
        SA = ev.ring(E.SA, "SA")
        for r in E.SA.relations:
            ev.zero(SA, twist(a, lit(SA, r)), f"action preserves {r.format()}")
        for v in E.SA.base_vars:
            c = format_coeff(root_of_unity(l, act.weights[v]))
            img = via_der(d_, lit(SA, E.SA.var(v)))
            ev.zero(SA, sub(twist(a, img), scale(c, img)), f"sigma D({v}) = D(sigma {v})")
        return {"weights": act.weights, "field": E.field.to_json()}

    def pulled_back(ev):
        D = E.D_lift
        d_ = ev.der(D, "lifted D")
        dt = derivation_evidence(ev, E.D_T, "D on T")
        phi = ev.map(E.Phi, "Phi")
        inv = ev.map(E.Phi_inverse, "Phi^-1")
        SA = ev.ring(E.SA, "SA")
        for v in E.SA.base_vars:
            x = lit(SA, E.SA.var(v))
            ev.zero(SA, sub(via_map(phi, via_der(dt, via_map(inv, x))), via_der(d_, x)),
                    f"Phi* D Phi*^-1 ({v}) = lifted D({v})")
        return {"lifted": {v: D.images[v].format() for v in E.SA.base_vars}}

    run.run("pullback identity", "Phi*(f) = u^l (Y^l + X - X^d Z)", pullback)
    run.run("Phi isomorphism", "S x A* ~ U x_{A*} A*", iso)
    run.run("equivariance of lifted derivation", "mu_l-action commutes with the lifted LND", equivariance)
    run.run("lifted derivation is pullback", "u^(ld-1)(X^d dY + l Y^(l-1) dZ)", pulled_back)
    return rep


# --------------------------------------------------------------------------
# fiber-product pipelines


def _pair_evidence(ev, bp, act=None):
    W = ev.ring(bp.carrier, "W")
    map_evidence(ev, bp.inj1, "i1")
    map_evidence(ev, bp.inj2, "i2")
    d1 = derivation_evidence(ev, bp.over1, "over first")
    d2 = derivation_evidence(ev, bp.over2, "over second")
    one = lit(W, bp.carrier.one())
    for d_, s in ((d1, bp.slice1), (d2, bp.slice2)):
        ev.zero(W, sub(via_der(d_, lit(W, s.element)), one), f"{d_}: slice")
    for name, rel in bp.divided:
        ev.zero(W, lit(W, rel), f"divided variable {name}")
    for d_, inj, A in ((d1, "i1", bp.inj1.source), (d2, "i2", bp.inj2.source)):
        src = ev.ring(A)
        for v in A.vars:
            ev.zero(W, via_der(d_, via_map(inj, lit(src, A.var(v)))), f"{d_} kills {inj}({v})")
    if act is not None:
        a = ev.action(act, "mu")
        for r in bp.carrier.relations:
            ev.zero(W, twist(a, lit(W, r)), f"action preserves {r.format()}")
        for d_, D in ((d1, bp.over1), (d2, bp.over2)):
            for v in bp.carrier.base_vars:
                c = format_coeff(root_of_unity(act.order, act.weights[v]))
                img = via_der(d_, lit(W, bp.carrier.var(v)))
                ev.zero(W, sub(twist(a, img), scale(c, img)), f"{d_} equivariant on {v}")
        for s in (bp.slice1, bp.slice2):
            ev.zero(W, sub(twist(a, lit(W, s.element)), lit(W, s.element)), "slice invariant")
    return {"carrier": bp.carrier.to_json(), "depth": bp.depth,
            "slices": [bp.slice1.element.format(), bp.slice2.element.format()],
            "divided": [[n, r.format()] for n, r in bp.divided]}


def _cyl_detail(c) -> dict:
    return {"forward": {v: c.forward.images[v].format() for v in c.forward.source.vars},
            "backward": {v: c.backward.images[v].format() for v in c.backward.source.vars}}


def scenario_danielewski(config: LabConfig | None = None, same: bool = False) -> Report:
    config = _cfg(config)
    rep = Report("danielewski", {"same": same} if same else {}, config=config.echo())
    run = ClaimRunner(rep, config.timings)
    st = run.state
    S1, D1, S2, D2 = catalog.danielewski(config.order)
    if same:
        S2, D2 = S1, D1
    depth = config.max_depth or 4

    def carrier(ev):
        bp = _bounded(lambda b: matched_fiber_product(S1, D1, S2, D2, MatchingData(["x"], "x", [("y", "y")]),
                                                      degree_bound=b, max_depth=depth), config)
        st["bp"] = bp
        if bp.slice1 is None:
            map_evidence(ev, bp.inj1, "identity")
            return {"degenerate": True}
        return _pair_evidence(ev, bp)

    def trivializations(ev):
        c = cylinder_from_pair(st["bp"])
        st["cyl"] = c
        for k, side in enumerate(c.sides, 1):
            iso_evidence(ev, side.iso, f"side{k} ")
        return {"sides": len(c.sides)}

    def cylinder(ev):
        c = st["cyl"]
        iso_evidence(ev, c.iso)
        return _cyl_detail(c)

    run.run("carrier with two bundle structures", "fiber product over the doubled line", carrier)
    run.run("trivializations", "both bundles trivial", trivializations, ["carrier with two bundle structures"])
    run.run("cylinder isomorphism", "S1 x A1 ~ S2 x A1", cylinder, ["trivializations"])
    return rep


_theorem1_cache: dict = {}


def _direct_cylinder(bp):
    """Cylinder iso from a downstairs carrier; a carrier whose kernel is too big counts as a miss."""
    try:
        return cylinder_from_pair(bp)
    except StageError as exc:
        if not isinstance(root_cause(exc), PreimageFailure):
            raise
        raise MatchingSearchExhausted(bp.depth) from exc


def theorem1_pipeline(d: int, dprime: int, l: int, config: LabConfig):
    """Carrier pair, upstairs cylinder iso (None on the direct route) and the iso on U (cached)."""
    key = (d, dprime, l, config.max_degree, config.max_depth, config.order, config.route)
    hit = _theorem1_cache.get(key)
    if hit is not None:
        return hit
    E1 = catalog.entry(d, l, order=config.order)
    E2 = catalog.entry(dprime, l, order=config.order)
    depth = config.max_depth or max(d, dprime) * l
    if config.route == "direct":
        match = MatchingData(["x"], "x", [("y", "y")])
        bp = _bounded(lambda b: matched_fiber_product(E1.U, E1.D, E2.U, E2.D, match, degree_bound=b,
                                                      max_depth=depth), config)
        hit = (E1, E2, bp, None, _direct_cylinder(bp))
        _theorem1_cache[key] = hit
        return hit
    match = MatchingData(["X", "u", "w_u"], "X", [("Y", "Y")])
    bp = _bounded(lambda b: matched_fiber_product(E1.SA, E1.D_lift, E2.SA, E2.D_lift, match, degree_bound=b,
                                                  max_depth=depth, weights1=E1.weights, weights2=E2.weights,
                                                  l=l), config)
    up = cylinder_from_pair(bp)
    down = descend(up, E1.descent, E2.descent)
    hit = (E1, E2, bp, up, down)
    _theorem1_cache[key] = hit
    return hit


def _theorem1_direct(rep: Report, run: ClaimRunner, d: int, dprime: int, l: int, config: LabConfig) -> Report:
    E1 = catalog.entry(d, l, order=config.order)
    E2 = catalog.entry(dprime, l, order=config.order)
    depth = config.max_depth or max(d, dprime) * l
    st = run.state

    def carrier(ev):
        match = MatchingData(["x"], "x", [("y", "y")])
        bp = _bounded(lambda b: matched_fiber_product(E1.U, E1.D, E2.U, E2.D, match, degree_bound=b,
                                                      max_depth=depth), config)
        st["bp"] = bp
        if bp.slice1 is None:
            map_evidence(ev, bp.inj1, "identity")
            return {"degenerate": True}
        return _pair_evidence(ev, bp)

    def cylinder(ev):
        down = _direct_cylinder(st["bp"])
        iso_evidence(ev, down.iso)
        return _cyl_detail(down)

    run.run("carrier with two bundle structures", "fiber product over U_{d,l} and U_{d',l}", carrier)
    run.run("cylinder isomorphism", "U_{d,l} x A1 ~ U_{d',l} x A1", cylinder, ["carrier with two bundle structures"])
    return rep


def scenario_theorem1(d: int = 1, dprime: int = 2, l: int = 2, config: LabConfig | None = None) -> Report:
    config = _cfg(config)
    rep = Report("theorem1", {"d": d, "dprime": dprime, "l": l}, config=config.echo())
    run = ClaimRunner(rep, config.timings)
    st = run.state
    try:
        catalog.validate_u(d, l)
        catalog.validate_u(dprime, l)
    except ParameterError as exc:
        return _parameter_failure(rep, exc)
    if config.route == "direct":
        return _theorem1_direct(rep, run, d, dprime, l, config)
    E1 = catalog.entry(d, l, order=config.order)

    def charts(ev):
        cov = chart_cover(E1.S, "Y", l)
        S = ev.ring(E1.S, "S")
        c = cov.certificate
        ev.member(S, lit(S, E1.S.one()), c.generators, c.combiners, label="chart localizers generate 1")
        return {"localizers": [h.format() for h in cov.localizers]}

    def pipeline(ev):
        _, _, bp, up, down = theorem1_pipeline(d, dprime, l, config)
        st.update(bp=bp, up=up, down=down)
        if bp.slice1 is None:
            map_evidence(ev, bp.inj1, "identity")
            return {"degenerate": True}
        return _pair_evidence(ev, bp, bp.action)

    def upstairs(ev):
        iso_evidence(ev, st["up"].iso)
        return _cyl_detail(st["up"])

    def downstairs(ev):
        down = st["down"]
        up = st["up"]
        f, g = iso_evidence(ev, down.iso)
        e1 = ev.map(RingMap(down.forward.source, up.forward.source,
                            {**E1.descent.images, "w": up.forward.source.var("w")}), "inclusion 1")
        E2 = catalog.entry(dprime, l, order=config.order)
        e2 = ev.map(RingMap(down.forward.target, up.forward.target,
                            {**E2.descent.images, "w": up.forward.target.var("w")}), "inclusion 2")
        uf = ev.map(up.forward, "upstairs forward")
        B1 = ev.ring(down.forward.source)
        A2w = ev.ring(up.forward.target)
        for v in down.forward.source.vars:
            x = lit(B1, down.forward.source.var(v))
            ev.zero(A2w, sub(via_map(e2, via_map(f, x)), via_map(uf, via_map(e1, x))), f"descent consistency {v}")
        return _cyl_detail(down)

    run.run("chart cover", "charts C_eta indexed by mu_l", charts)
    run.run("equivariant carrier", "simultaneous Ga-bundle over both covers", pipeline)
    run.run("upstairs cylinder isomorphism", "equivariant trivializations", upstairs, ["equivariant carrier"])
    run.run("cylinder isomorphism", "U_{d,l} x A1 ~ U_{d',l} x A1", downstairs, ["upstairs cylinder isomorphism"])
    return rep


# --------------------------------------------------------------------------
# Koras-Russell cylinders


def scenario_corollary3(d: int = 2, k: int = 3, l: int = 2, config: LabConfig | None = None) -> Report:
    config = _cfg(config)
    rep = Report("corollary3", {"d": d, "k": k, "l": l}, config=config.echo())
    run = ClaimRunner(rep, config.timings)
    st = run.state
    try:
        catalog.validate_x(d, k, l)
    except ParameterError as exc:
        return _parameter_failure(rep, exc)
    E1 = catalog.entry(1, l, order=config.order)
    Ek = catalog.entry(d, l, k, order=config.order)

    def two_lnds(ev):
        U = ev.ring(E1.U, "U1")
        out = {}
        for name, D in (("D", E1.D), ("delta", E1.second)):
            d_ = derivation_evidence(ev, D, name)
            ev.zero(U, via_der(d_, lit(U, E1.f)), f"{name}(f) = 0")
            cert = check_locally_nilpotent(D)
            chain_evidence(ev, D, cert, d_)
            out[name] = {v: cert.length(v) for v in cert.chains}
        return {"chain_lengths": out}

    def iso(ev):
        _, _, _, _, down = theorem1_pipeline(1, d, l, config)
        st["down"] = down
        iso_evidence(ev, down.iso)
        return _cyl_detail(down)

    def transport(ev):
        down = st["down"]
        Uw = down.forward.source
        delta = E1.second
        ext = make_derivation(Uw, {**{v: delta.images[v] for v in E1.U.base_vars}, "w": "0"}, "delta on U1[w]")
        moved, cert = transport_derivation(down, ext)
        st["moved"] = moved
        a = derivation_evidence(ev, ext, "delta")
        b = derivation_evidence(ev, moved, "transported")
        f, g = ev.map(down.forward, "F"), ev.map(down.backward, "G")
        T = ev.ring(moved.ring)
        for v in moved.ring.base_vars:
            x = lit(T, moved.ring.var(v))
            ev.zero(T, sub(via_der(b, x), via_map(f, via_der(a, via_map(g, x)))), f"transport on {v}")
        chain_evidence(ev, moved, cert, b)
        return {"images": {v: moved.images[v].format() for v in moved.ring.base_vars},
                "chain_lengths": {v: cert.length(v) for v in cert.chains}}

    def clearing(ev):
        moved = st["moved"]
        Uw = moved.ring
        fU = Uw.element(catalog.f_text(d, l))
        P = catalog.entry(d, l, order=config.order)._present(["x", "y", "z", "w"], [])
        cleared, N = clear_denominators(moved, fU, "w_f", target=P)
        st["cleared"], st["N"] = cleared, N
        inc = verify_map(RingMap(P, Uw, {v: Uw.var(v) for v in P.vars}, "inclusion"))
        m = ev.map(inc, "inclusion")
        a = ev.der(moved, "transported")
        c = derivation_evidence(ev, cleared, "cleared")
        UW, PN = ev.ring(Uw), ev.ring(P)
        fN = lit(UW, fU ** N)
        for v in P.vars:
            ev.zero(UW, sub(mul(fN, via_der(a, lit(UW, Uw.var(v)))), via_map(m, via_der(c, lit(PN, P.var(v))))),
                    f"f^{N} transported({v}) = cleared({v})")
        fP = P.element(catalog.f_text(d, l))
        ev.zero(PN, via_der(c, lit(PN, fP)), "cleared(f) = 0")
        return {"N": N, "images": {v: cleared.images[v].format() for v in P.vars}}

    def invariance(ev):
        cleared = st["cleared"]
        P = cleared.ring
        fP = P.element(catalog.f_text(d, l))
        c = ev.der(cleared, "cleared")
        PN = ev.ring(P)
        expr = via_der(c, lit(PN, fP))
        val = ev._context().eval(expr)
        cert = _gb.membership(val, [fP])
        ev.member(PN, expr, [fP], cert.combiners, label="D(f) in (f)")
        return {}

    def lift(ev):
        cleared = st["cleared"]
        A4 = Ek.A4
        D4 = make_derivation(A4, {v: cleared.images[v if v != "v" else "w"].rename({"w": "v"}).to_ambient(A4.vars)
                                  for v in A4.vars}, "cleared on A4")
        lifted, cert = lift_through_cover(D4, Ek.cover, ["t"])
        st["lifted"] = lifted
        p = map_evidence(ev, Ek.cover, "p")
        d4 = ev.der(D4, "base")
        dl = derivation_evidence(ev, lifted, "lifted")
        Xc = ev.ring(Ek.X_cyl, "X x A1")
        A = ev.ring(A4, "A4")
        for v in A4.vars:
            x = lit(A, A4.var(v))
            ev.zero(Xc, sub(via_der(dl, via_map(p, x)), via_map(p, via_der(d4, x))), f"lift agrees on {v}")
        ev.zero(Xc, via_der(dl, lit(Xc, Ek.X_cyl.var("t"))), "D(t) = 0")
        chain_evidence(ev, lifted, cert, dl)
        return {"images": {v: lifted.images[v].format() for v in Ek.X_cyl.vars},
                "chain_lengths": {v: cert.length(v) for v in cert.chains}}

    def x_moves(ev):
        lifted = st["lifted"]
        dl = ev.der(lifted, "lifted")
        Xc = ev.ring(Ek.X_cyl, "X x A1")
        nf = ev.nonzero(Xc, via_der(dl, lit(Xc, Ek.X_cyl.var("x"))), "D(x) != 0")
        ok, _ = kernel_member(lifted, Ek.X_cyl.var("x"))
        assert not ok
        return {"evidence": nf.format()}

    def ml(ev):
        ev.value("cited", "Makar-Limanov invariant of X_{d,k,l} is contained in k[x]")
        ev.value("combined with", "locally nilpotent derivation on X x A1 moving x")
        return {"conclusion": "ML(X x A1) trivial"}

    run.run("two derivations on U_{1,l}", "l y^(l-1) dx + (z-1) dy", two_lnds)
    run.run("cylinder isomorphism", "U_{1,l} x A1 ~ U_{d,l} x A1", iso)
    run.run("transported derivation", "delta_{d,l} on U_{d,l} x A1", transport,
            ["two derivations on U_{1,l}", "cylinder isomorphism"])
    run.run("cleared f-powers", "multiplying by a power of f_{d,l}", clearing, ["transported derivation"])
    run.run("excluded surface invariant", "B_{d,l} x A1 stable", invariance, ["cleared f-powers"])
    run.run("lift through cover", "unique lift along t^k = f", lift, ["cleared f-powers"])
    run.run("x not in kernel", "derivation moving x", x_moves, ["lift through cover"])
    run.run("trivial Makar-Limanov invariant", "ML(X_{d,k,l} x A1) trivial", ml,
            ["x not in kernel"], status_on_success=MODULO_CITATION)
    return rep


# --------------------------------------------------------------------------
# the family x^d z = y^l + x - t


def scenario_remark3(d: int = 1, l: int = 2, config: LabConfig | None = None) -> Report:
    config = _cfg(config)
    rep = Report("remark3", {"d": d, "l": l}, config=config.echo())
    run = ClaimRunner(rep, config.timings)
    E = catalog.entry(d, l, order=config.order)
    imgs = {"x": "0", "y": f"x^{d}", "z": f"{l}*y^{l - 1}", "t": "0"}

    def kernel(ev):
        D = make_derivation(E.R3, imgs, "D")
        d_ = derivation_evidence(ev, D, "D")
        R = ev.ring(E.R3, "R")
        for v in ("x", "t"):
            ev.zero(R, via_der(d_, lit(R, E.R3.var(v))), f"D({v}) = 0")
        return {}

    def y_moves(ev):
        D = make_derivation(E.R3, imgs, "D")
        d_ = ev.der(D, "D")
        R = ev.ring(E.R3, "R")
        nf = ev.nonzero(R, via_der(d_, lit(R, E.R3.var("y"))), "D(y) != 0")
        return {"evidence": nf.format()}

    def chart(ev):
        D = make_derivation(E.R3x, imgs, "D")
        s = certify_slice(D, E.R3x.element(f"y*w_x^{d}"))
        d_ = derivation_evidence(ev, D, "D")
        R = ev.ring(E.R3x, "R_x")
        ev.zero(R, sub(via_der(d_, lit(R, s.element)), lit(R, E.R3x.one())), "D(y x^-d) = 1")
        return {"slice": s.element.format()}

    def fiber(ev):
        F = E.R3_fiber
        D0 = make_derivation(F, {"y": "0", "z": f"{l}*y^{l - 1}", "t": "0"}, "D mod x")
        c = F.element(f"1/{l}*y*w_t")
        unit = D0.scaled(c, "normalized")
        d0 = derivation_evidence(ev, D0, "D mod x")
        dn = derivation_evidence(ev, unit, "normalized")
        R = ev.ring(F, "fiber")
        one = lit(R, F.one())
        ev.zero(R, sub(via_der(dn, lit(R, F.var("z"))), one), "normalized(z) = 1")
        ev.zero(R, via_der(dn, lit(R, F.var("y"))), "normalized(y) = 0")
        ev.zero(R, via_der(dn, lit(R, F.var("t"))), "normalized(t) = 0")
        ev.zero(R, sub(via_der(d0, lit(R, c * F.var("z"))), one), "slice z y / (l t)")
        return {"unit": c.format()}

    run.run("x and t in kernel", "kernel contains k[x, t^{+-1}]", kernel)
    run.run("y not in kernel", "D(y) = x^d", y_moves)
    run.run("chart slice", "trivial bundle over x != 0", chart)
    run.run("fiber translations", "translations on the fiber over x = 0", fiber)
    return rep


SCENARIOS = {
    "foundations": scenario_foundations,
    "phi": scenario_phi,
    "danielewski": scenario_danielewski,
    "theorem1": scenario_theorem1,
    "corollary3": scenario_corollary3,
    "remark3": scenario_remark3,
}
