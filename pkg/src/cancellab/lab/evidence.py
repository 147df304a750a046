"""Replayable evidence: polynomial identities that re-expand without searching.

An :class:`Evidence` bundle holds a table of rings, maps and derivations plus a
list of entries.  Each entry names a ring and an *expression* built from
polynomial literals, substitutions, Leibniz expansions and twists; the entry
asserts that the expression equals an explicit combination of generators
(``kind: "zero"``) or differs from a stated normal form by such a combination
(``kind: "nonzero"``).  Rechecking only parses and multiplies out, except that
``nonzero`` entries also recompute a Groebner basis to confirm the normal form
is reduced.
"""

from __future__ import annotations

from typing import Any

from ..coeff import Field, parse_coeff, root_of_unity
from ..errors import LabError
from ..gb import buchberger
from ..poly import Polynomial, parse_polynomial, substitute
from ..ring import PresentedRing, RingMap


class RecheckFailure(LabError):
    pass


# expression nodes are JSON lists: [op, ...]


def lit(ring: str, p: Polynomial) -> list:
    return ["poly", ring, p.format()]


def via_map(name: str, e: list) -> list:
    return ["map", name, e]


def via_der(name: str, e: list) -> list:
    return ["der", name, e]


def sub(a: list, b: list) -> list:
    return ["sub", a, b]


def mul(a: list, b: list) -> list:
    return ["mul", a, b]


def twist(action: str, e: list) -> list:
    return ["twist", action, e]


def scale(c: str, e: list) -> list:
    return ["scale", c, e]


class Evidence:
    def __init__(self):
        self.rings: dict[str, dict] = {}
        self.maps: dict[str, dict] = {}
        self.ders: dict[str, dict] = {}
        self.actions: dict[str, dict] = {}
        self.entries: list[dict] = []
        self._ring_objs: dict[str, Any] = {}
        self._ring_names: dict[int, str] = {}
        self._ctx = None

    def _context(self) -> "_Context":
        if self._ctx is None:
            self._ctx = _Context(self.to_json(entries=False), self._ring_objs)
        return self._ctx

    # -- registration
    def ring(self, R: PresentedRing, name: str | None = None) -> str:
        key = id(R)
        if key in self._ring_names:
            return self._ring_names[key]
        for nm, other in self._ring_objs.items():
            if other.same_presentation(R) and other.field == R.field:
                self._ring_names[key] = nm
                return nm
        name = name or f"R{len(self.rings)}"
        self.rings[name] = {"vars": list(R.vars), "relations": [r.format() for r in R.relations],
                            "field": R.field.to_json()}
        self._ctx = None
        self._ring_objs[name] = R
        self._ring_names[key] = name
        return name

    def map(self, f: RingMap, name: str | None = None) -> str:
        name = name or f"F{len(self.maps)}"
        src = self.ring(f.source)
        tgt = self.ring(f.target)
        self._ctx = None
        self.maps[name] = {"source": src, "target": tgt,
                           "images": {v: f.images[v].format() for v in f.source.vars}}
        return name

    def der(self, D, name: str | None = None) -> str:
        name = name or f"D{len(self.ders)}"
        self._ctx = None
        self.ders[name] = {"ring": self.ring(D.ring), "images": {v: D.images[v].format() for v in D.ring.vars}}
        return name

    def action(self, act, name: str | None = None) -> str:
        name = name or f"A{len(self.actions)}"
        self._ctx = None
        self.actions[name] = {"ring": self.ring(act.ring), "order": act.order,
                              "weights": {v: act.weights[v] for v in act.ring.vars}}
        return name

    # -- entries
    def zero(self, ring: str, expr: list, label: str = "") -> Polynomial:
        """Assert ``expr`` vanishes in ``ring``; records cofactors."""
        ctx = self._context()
        val = ctx.eval(expr)
        R = self._ring_objs[ring]
        rem, comb = R.gb.express(val.to_ambient(R.vars))
        comb = comb[:len(R.relations)]
        if not rem.is_zero():
            raise RecheckFailure(f"{label or 'entry'}: expression is nonzero in {ring}: {rem}")
        self.entries.append({"label": label, "kind": "zero", "ring": ring, "expr": expr,
                             "combiners": [c.format() for c in comb]})
        return val

    def member(self, ring: str, expr: list, generators: list[Polynomial], combiners: list[Polynomial],
               exponent: int = 0, saturating: Polynomial | None = None, label: str = "") -> None:
        """Assert ``saturating^exponent * expr == sum c_i g_i`` for explicit generators."""
        entry = {"label": label, "kind": "member", "ring": ring, "expr": expr,
                 "generators": [g.format() for g in generators],
                 "combiners": [c.format() for c in combiners], "exponent": exponent,
                 "saturating": None if saturating is None else saturating.format()}
        _check_entry(self._context(), entry)
        self.entries.append(entry)

    def nonzero(self, ring: str, expr: list, label: str = "") -> Polynomial:
        """Record the normal form of ``expr`` and assert it is not zero."""
        ctx = self._context()
        val = ctx.eval(expr)
        R = self._ring_objs[ring]
        val = val.to_ambient(R.vars)
        rem, comb = R.gb.express(val)
        comb = comb[:len(R.relations)]
        if rem.is_zero():
            raise RecheckFailure(f"{label or 'entry'}: expression vanishes in {ring}")
        self.entries.append({"label": label, "kind": "nonzero", "ring": ring, "expr": expr,
                             "normal_form": rem.format(), "combiners": [c.format() for c in comb]})
        return rem

    def value(self, label: str, value) -> None:
        self.entries.append({"label": label, "kind": "value", "value": value})

    def to_json(self, entries: bool = True) -> dict:
        out = {"rings": self.rings, "maps": self.maps, "derivations": self.ders, "actions": self.actions}
        if entries:
            out["entries"] = self.entries
        return out


# --------------------------------------------------------------------------
# evaluation


class _Context:
    def __init__(self, data: dict, ring_objs: dict | None = None):
        self.data = data
        self.vars = {}
        self.fields = {}
        for nm, r in data["rings"].items():
            self.vars[nm] = tuple(r["vars"])
            self.fields[nm] = Field.from_json(r["field"])
        self._gens: dict = {}
        self._ring_objs = ring_objs or {}
        self._parsed_maps: dict = {}
        self._parsed_ders: dict = {}

    def parse(self, ring: str, text: str) -> Polynomial:
        return parse_polynomial(text, self.vars[ring], self.fields[ring])

    def generators(self, ring: str) -> list[Polynomial]:
        g = self._gens.get(ring)
        if g is None:
            g = [self.parse(ring, t) for t in self.data["rings"][ring]["relations"]]
            self._gens[ring] = g
        return g

    def map_images(self, name: str):
        hit = self._parsed_maps.get(name)
        if hit is None:
            m = self.data["maps"][name]
            hit = ({v: self.parse(m["target"], t) for v, t in m["images"].items()}, m["source"], m["target"])
            self._parsed_maps[name] = hit
        return hit

    def der_images(self, name: str):
        hit = self._parsed_ders.get(name)
        if hit is None:
            d = self.data["derivations"][name]
            hit = ({v: self.parse(d["ring"], t) for v, t in d["images"].items()}, d["ring"])
            self._parsed_ders[name] = hit
        return hit

    def eval(self, e: list) -> Polynomial:
        op = e[0]
        if op == "poly":
            return self.parse(e[1], e[2])
        if op == "sub":
            a, b = self.eval(e[1]), self.eval(e[2])
            return a - b.to_ambient(a.vars)
        if op == "mul":
            a, b = self.eval(e[1]), self.eval(e[2])
            return a * b.to_ambient(a.vars)
        if op == "scale":
            a = self.eval(e[2])
            return a.scale(parse_coeff(e[1], _field_of(a, self)))
        if op == "map":
            imgs, src, tgt = self.map_images(e[1])
            p = self.eval(e[2]).to_ambient(self.vars[src])
            return substitute(p, imgs, self.vars[tgt])
        if op == "der":
            imgs, ring = self.der_images(e[1])
            p = self.eval(e[2]).to_ambient(self.vars[ring])
            acc = Polynomial.zero(p.vars)
            from ..poly import partial
            used = p.used_vars()
            for v in p.vars:
                if v in used and imgs[v]:
                    acc = acc + partial(p, v) * imgs[v]
            return acc
        if op == "twist":
            a = self.data["actions"][e[1]]
            p = self.eval(e[2]).to_ambient(self.vars[a["ring"]])
            out = {}
            for ex, c in p.terms.items():
                wt = sum(k * a["weights"][v] for v, k in zip(p.vars, ex))
                out[ex] = c * root_of_unity(a["order"], wt)
            return Polynomial(p.vars, out)
        raise RecheckFailure(f"unknown expression node {op!r}")


def _field_of(p: Polynomial, ctx: _Context) -> Field:
    for nm, vs in ctx.vars.items():
        if vs == p.vars:
            return ctx.fields[nm]
    return Field(1)


def _check_entry(ctx: _Context, entry: dict) -> None:
    kind = entry["kind"]
    label = entry.get("label") or "entry"
    if kind == "value":
        return
    ring = entry["ring"]
    val = ctx.eval(entry["expr"]).to_ambient(ctx.vars[ring])
    if kind == "member":
        gens = [ctx.parse(ring, t) for t in entry["generators"]]
        lhs = val
        if entry.get("saturating") is not None and entry.get("exponent", 0):
            lhs = ctx.parse(ring, entry["saturating"]) ** entry["exponent"] * val
    else:
        gens = ctx.generators(ring)
        lhs = val
        if kind == "nonzero":
            nf = ctx.parse(ring, entry["normal_form"])
            if nf.is_zero():
                raise RecheckFailure(f"{label}: recorded normal form is zero")
            lhs = val - nf
    combs = [ctx.parse(ring, t) for t in entry["combiners"]]
    if len(combs) != len(gens):
        raise RecheckFailure(f"{label}: {len(combs)} combiners for {len(gens)} generators")
    acc = lhs
    for c, g in zip(combs, gens):
        if c:
            acc = acc - c * g
    if not acc.is_zero():
        raise RecheckFailure(f"{label}: identity does not re-expand (residual {acc})")
    if kind == "nonzero":
        nf = ctx.parse(ring, entry["normal_form"])
        gb = _ring_basis(ctx, ring)
        if gb.reduce(nf) != nf:
            raise RecheckFailure(f"{label}: recorded normal form is not reduced")


def _ring_basis(ctx: _Context, ring: str):
    cached = ctx._gens.get(("gb", ring))
    if cached is None:
        gens = ctx.generators(ring) or [Polynomial.zero(ctx.vars[ring])]
        cached = buchberger(gens)
        ctx._gens[("gb", ring)] = cached
    return cached


def recheck(data: dict) -> int:
    """Re-expand every entry of a serialized evidence bundle; returns the count."""
    ctx = _Context(data)
    n = 0
    for entry in data.get("entries", []):
        _check_entry(ctx, entry)
        n += 1
    return n


# --------------------------------------------------------------------------
# common evidence patterns


def map_evidence(ev: Evidence, f: RingMap, name: str | None = None) -> str:
    """Every source relation maps to zero."""
    m = ev.map(f, name)
    src = ev.ring(f.source)
    tgt = ev.ring(f.target)
    for r in f.source.relations:
        ev.zero(tgt, via_map(m, lit(src, r)), f"{m}: relation {r.format()}")
    return m


def iso_evidence(ev: Evidence, iso, prefix: str = "") -> tuple[str, str]:
    fwd = map_evidence(ev, iso.forward, f"{prefix}forward")
    bwd = map_evidence(ev, iso.backward, f"{prefix}backward")
    for f_name, g_name, R in ((fwd, bwd, iso.forward.source), (bwd, fwd, iso.backward.source)):
        rn = ev.ring(R)
        for v in R.vars:
            x = lit(rn, R.var(v))
            ev.zero(rn, sub(via_map(g_name, via_map(f_name, x)), x), f"round trip {g_name}({f_name}({v}))")
    return fwd, bwd


def derivation_evidence(ev: Evidence, D, name: str | None = None) -> str:
    """Well-definedness: every relation's Leibniz expansion lies in the ideal."""
    d = ev.der(D, name)
    rn = ev.ring(D.ring)
    for r in D.ring.relations:
        ev.zero(rn, via_der(d, lit(rn, r)), f"{d}: relation {r.format()}")
    return d


def chain_evidence(ev: Evidence, D, cert, d: str) -> None:
    rn = ev.ring(D.ring)
    for v, chain in cert.chains.items():
        ev.zero(rn, sub(lit(rn, D.ring.var(v)), lit(rn, chain[0])), f"chain start {v}")
        for k, (a, b) in enumerate(zip(chain, chain[1:])):
            ev.zero(rn, sub(via_der(d, lit(rn, a)), lit(rn, b)), f"{d}^{k + 1}({v})")
        ev.value(f"chain length {v}", len(chain) - 1)
