"""Finitely presented rings, verified ring maps, isomorphism certificates,
and monomial actions of cyclic groups with their invariant subrings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import gb as _gb
from .coeff import QQ, Field, root_of_unity
from .errors import (AmbientMismatch, BoundTooSmall, InconsistentPresentation, MissingImage,
                     NotEquivariant, NotInverse, ParseError, PreconditionError, RelationNotPreserved,
                     VariableClash)
from .gb import MembershipCertificate
from .poly import GREVLEX, NAME_RE, MonomialOrder, Polynomial, monomials_up_to, parse_polynomial, substitute


class PresentedRing:
    """``F[vars] / (relations)``; localizations appear as inverse variables.

    ``inverted`` holds ``(element, name)`` pairs; each contributes the relation
    ``name * element - 1``.  Ring equality of elements is normal-form equality
    against the cached reduced basis.
    """

    def __init__(self, vars: Sequence[str], relations: Sequence[Polynomial] = (),
                 inverted: Sequence[tuple[Polynomial, str]] = (), field: Field = QQ,
                 order: MonomialOrder = GREVLEX, *, allow_inconsistent: bool = False, name: str = ""):
        self.vars = tuple(vars)
        for v in self.vars:
            if not NAME_RE.match(v):
                raise ParseError(f"bad variable name {v!r}")
        if len(set(self.vars)) != len(self.vars):
            raise VariableClash(f"duplicate variables in {self.vars}")
        self.field = field
        self.order = order
        self.name = name
        self.inverted = [(e.to_ambient(self.vars), w) for e, w in inverted]
        inv_rel = {w: Polynomial.var(w, self.vars) * e - 1 for e, w in self.inverted}
        rels: list[Polynomial] = []
        for r in relations:
            r = r.to_ambient(self.vars)
            if r.is_zero() or r in rels or r in inv_rel.values():
                continue
            rels.append(r)
        self.user_relations = rels
        self.relations = rels + [inv_rel[w] for _, w in self.inverted]
        self.gb = _gb.buchberger(self.relations or [Polynomial.zero(self.vars)], order)
        self.inconsistent = self.gb.is_unit()
        if self.inconsistent and not allow_inconsistent:
            raise InconsistentPresentation(f"relations generate the unit ideal in {self.vars}")
        self._nf_cache: dict = {}

    # -- element helpers
    @property
    def inverse_vars(self) -> list[str]:
        return [w for _, w in self.inverted]

    @property
    def base_vars(self) -> list[str]:
        inv = set(self.inverse_vars)
        return [v for v in self.vars if v not in inv]

    def var(self, name: str) -> Polynomial:
        return Polynomial.var(name, self.vars)

    def const(self, c) -> Polynomial:
        return Polynomial.const(c, self.vars)

    def one(self) -> Polynomial:
        return Polynomial.const(1, self.vars)

    def zero(self) -> Polynomial:
        return Polynomial.zero(self.vars)

    def element(self, p) -> Polynomial:
        if isinstance(p, str):
            return parse_polynomial(p, self.vars, self.field)
        if isinstance(p, Polynomial):
            return p.to_ambient(self.vars)
        return self.const(p)

    def normal(self, p: Polynomial) -> Polynomial:
        if p.vars != self.vars:
            p = p.to_ambient(self.vars)
        hit = self._nf_cache.get(p)
        if hit is None:
            hit = self.gb.reduce(p)
            if len(self._nf_cache) < 20000:
                self._nf_cache[p] = hit
        return hit

    def equal(self, p: Polynomial, q: Polynomial) -> bool:
        return self.normal(p - q).is_zero()

    def certify_zero(self, p: Polynomial) -> MembershipCertificate:
        """Membership certificate of ``p`` in the relation ideal (raises if not zero)."""
        p = p.to_ambient(self.vars)
        rem, comb = self.gb.express(p)
        if not rem.is_zero():
            raise _gb.NotMember(f"{p} is not zero in the ring")
        comb = comb[:len(self.relations)]
        return MembershipCertificate(p, list(self.relations), comb)

    def inverse_of(self, name: str) -> Polynomial:
        for e, w in self.inverted:
            if w == name:
                return e
        raise KeyError(name)

    # -- serialization
    def to_json(self) -> dict:
        inv = set(self.inverse_vars)
        return {
            "vars": [v for v in self.vars if v not in inv],
            "relations": [r.format() for r in self.user_relations],
            "invert": [{"element": e.format(), "name": w} for e, w in self.inverted],
            "field": self.field.to_json(),
        }

    def canonical(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> "PresentedRing":
        field_ = Field.from_json(obj.get("field", "Q"))
        return present(obj["vars"], obj.get("relations", []), obj.get("invert", []), field=field_)

    def __repr__(self):
        rel = ", ".join(r.format() for r in self.relations)
        return f"PresentedRing({list(self.vars)} / ({rel}))"

    def same_presentation(self, other: "PresentedRing") -> bool:
        return self.vars == other.vars and self.gb.generators == other.gb.generators


def present(variables: Sequence[str], relations: Sequence = (), inverted: Sequence = (), *,
            field: Field = QQ, order: MonomialOrder = GREVLEX, allow_inconsistent: bool = False,
            name: str = "") -> PresentedRing:
    """Build a presented ring, appending one inverse variable per inverted element.

    ``inverted`` entries are element strings/polynomials (inverse variables are
    then named ``w_1, w_2, ...``) or ``{"element": ..., "name": ...}`` / pairs.
    Relations may mention the inverse variable names.
    """
    base = list(variables)
    specs = []
    for k, item in enumerate(inverted):
        if isinstance(item, dict):
            specs.append((item["element"], item["name"]))
        elif isinstance(item, tuple):
            specs.append(item)
        else:
            specs.append((item, None))
    names = []
    for k, (_, nm) in enumerate(specs):
        if nm is None:
            nm = _gb.fresh_name(f"w_{k + 1}", base + names)
        if nm in base or nm in names:
            raise VariableClash(nm)
        names.append(nm)
    allv = tuple(base + names)

    def parse(x):
        if isinstance(x, Polynomial):
            return x.to_ambient(allv)
        return parse_polynomial(str(x), allv, field)

    inv = [(parse(e), nm) for (e, _), nm in zip(specs, names)]
    for e, nm in inv:
        if e.used_vars() & set(names):
            raise ParseError(f"inverted element {e} must not involve inverse variables")
    rels = [parse(r) for r in relations]
    return PresentedRing(allv, rels, inv, field, order, allow_inconsistent=allow_inconsistent, name=name)


def tensor_with_polynomial_line(R: PresentedRing, new_var: str) -> PresentedRing:
    """``R[new_var]``: same relations, one extra free variable."""
    if new_var in R.vars:
        raise VariableClash(new_var)
    vars = R.vars + (new_var,)
    return PresentedRing(vars, [r.to_ambient(vars) for r in R.user_relations],
                         [(e.to_ambient(vars), w) for e, w in R.inverted], R.field, R.order,
                         name=f"{R.name}[{new_var}]" if R.name else "")


# --------------------------------------------------------------------------
# maps


class RingMap:
    """Homomorphism given by images of every source variable (inverse ones included)."""

    def __init__(self, source: PresentedRing, target: PresentedRing, images: Mapping, name: str = ""):
        self.source = source
        self.target = target
        self.name = name
        imgs = {}
        for v in source.vars:
            if v not in images:
                raise MissingImage(v)
            imgs[v] = target.normal(target.element(images[v]))
        self.images = imgs
        self.verified = False
        self.relation_certificates: list[MembershipCertificate] = []

    @classmethod
    def build(cls, source: PresentedRing, target: PresentedRing, images: Mapping, name: str = "",
              verify: bool = True) -> "RingMap":
        """Like the constructor, but fills in missing inverse-variable images."""
        imgs = {v: target.element(p) for v, p in images.items()}
        for e, w in source.inverted:
            if w not in imgs:
                imgs[w] = invert_element(target, substitute(e, imgs, target.vars))
        f = cls(source, target, imgs, name)
        return verify_map(f) if verify else f

    def apply(self, p: Polynomial) -> Polynomial:
        return self.target.normal(substitute(p.to_ambient(self.source.vars), self.images, self.target.vars))

    def __call__(self, p: Polynomial) -> Polynomial:
        return self.apply(p)

    def raw(self, p: Polynomial) -> Polynomial:
        return substitute(p.to_ambient(self.source.vars), self.images, self.target.vars)

    def compose(self, inner: "RingMap", name: str = "") -> "RingMap":
        """``self o inner`` (apply ``inner`` first)."""
        if inner.target is not self.source and not inner.target.same_presentation(self.source):
            raise AmbientMismatch("maps do not compose")
        return RingMap(inner.source, self.target, {v: self.apply(inner.images[v]) for v in inner.source.vars}, name)

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "images": {v: self.images[v].format() for v in self.source.vars},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RingMap":
        src = PresentedRing.from_json(obj["source"]) if isinstance(obj["source"], dict) else obj["source"]
        tgt = PresentedRing.from_json(obj["target"]) if isinstance(obj["target"], dict) else obj["target"]
        return cls(src, tgt, {v: tgt.element(t) for v, t in obj["images"].items()})

    def __repr__(self):
        body = ", ".join(f"{v}->{self.images[v]}" for v in self.source.vars)
        return f"RingMap({body})"


def identity_map(R: PresentedRing) -> RingMap:
    return verify_map(RingMap(R, R, {v: R.var(v) for v in R.vars}, "id"))


def invert_element(R: PresentedRing, e: Polynomial, max_exp: int = 6) -> Polynomial:
    """Inverse of a unit of ``R`` built from its inverse variables (small search)."""
    e = R.normal(e)
    if e.is_constant():
        if e.is_zero():
            raise ZeroDivisionError("zero is not invertible")
        return R.const(1 / e.constant_value())
    units = []
    for el, w in R.inverted:
        units.append((R.var(w), el))
        units.append((el, R.var(w)))
    # candidates: c * prod(inverse_j ** k_j)
    n = len(units)
    for total in range(1, max_exp + 1):
        for ks in _compositions(total, n):
            cand = R.one()
            for (inv, _), k in zip(units, ks):
                if k:
                    cand = cand * inv ** k
            prod = R.normal(cand * e)
            if prod.is_constant() and not prod.is_zero():
                return R.normal(cand.scale(1 / prod.constant_value()))
    raise PreconditionError(f"could not invert {e} in {R}")


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for k in range(total, -1, -1):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


def verify_map(f: RingMap) -> RingMap:
    """Check every source relation maps into the target relation ideal."""
    certs = []
    for r in f.source.relations:
        img = f.raw(r)
        nf = f.target.normal(img)
        if not nf.is_zero():
            raise RelationNotPreserved(r.format(), nf.format())
        certs.append(f.target.certify_zero(img))
    f.relation_certificates = certs
    f.verified = True
    return f


@dataclass
class IsoCertificate:
    """Two mutually inverse verified maps with round-trip evidence.

    ``forward_residuals[v]`` certifies ``backward(forward(v)) - v`` lies in the
    source relation ideal; ``backward_residuals`` likewise on the target.
    """

    forward: RingMap
    backward: RingMap
    forward_residuals: dict = field(default_factory=dict)
    backward_residuals: dict = field(default_factory=dict)

    def residual_normal_forms(self) -> dict:
        out = {}
        for v in self.forward.source.vars:
            out[("source", v)] = self.forward.source.normal(self.backward.raw(self.forward.images[v]) - self.forward.source.var(v))
        for v in self.backward.source.vars:
            out[("target", v)] = self.backward.source.normal(self.forward.raw(self.backward.images[v]) - self.backward.source.var(v))
        return out

    def check(self) -> bool:
        return all(c.check() for c in self.forward_residuals.values()) and \
            all(c.check() for c in self.backward_residuals.values()) and \
            all(c.check() for c in self.forward.relation_certificates) and \
            all(c.check() for c in self.backward.relation_certificates)

    def to_json(self) -> dict:
        return {
            "forward": self.forward.to_json(),
            "backward": self.backward.to_json(),
            "forward_relation_certificates": [c.to_json() for c in self.forward.relation_certificates],
            "backward_relation_certificates": [c.to_json() for c in self.backward.relation_certificates],
            "forward_residuals": {v: c.to_json() for v, c in self.forward_residuals.items()},
            "backward_residuals": {v: c.to_json() for v, c in self.backward_residuals.items()},
        }


def verify_iso(forward: RingMap, backward: RingMap) -> IsoCertificate:
    """Certify ``forward`` and ``backward`` are mutually inverse isomorphisms."""
    if forward.source is not backward.target and not forward.source.same_presentation(backward.target):
        raise PreconditionError("backward map must land in the forward source")
    if forward.target is not backward.source and not forward.target.same_presentation(backward.source):
        raise PreconditionError("backward map must start at the forward target")
    for f in (forward, backward):
        if not f.verified:
            verify_map(f)
    fres, bres = {}, {}
    for f, g, store in ((forward, backward, fres), (backward, forward, bres)):
        R = f.source
        for v in R.vars:
            resid = g.raw(f.images[v]) - R.var(v)
            nf = R.normal(resid)
            if not nf.is_zero():
                raise NotInverse(v, nf.format())
            store[v] = R.certify_zero(resid)
    return IsoCertificate(forward, backward, fres, bres)


def compose_iso(first: IsoCertificate, second: IsoCertificate) -> IsoCertificate:
    """Certificate for ``second.forward o first.forward``."""
    fwd = second.forward.compose(first.forward)
    bwd = first.backward.compose(second.backward)
    return verify_iso(fwd, bwd)


# --------------------------------------------------------------------------
# cyclic monomial actions


class MonomialGroupAction:
    """mu_l acting by ``eps . v = eps**weight[v] * v`` on ring generators."""

    def __init__(self, ring: PresentedRing, order: int, weights: Mapping[str, int]):
        self.ring = ring
        self.order = order
        w = {v: int(weights.get(v, 0)) % order for v in ring.vars}
        for e, name in ring.inverted:
            if name not in weights:
                w[name] = (-self.weight_of(e, w)) % order
        self.weights = w
        self.verified = False

    def weight_of(self, p: Polynomial, weights=None):
        """Common weight of a homogeneous element (None if mixed)."""
        weights = weights if weights is not None else self.weights
        ws = set()
        for e in p.terms:
            ws.add(sum(k * weights.get(v, 0) for v, k in zip(p.vars, e)) % self.order)
        if len(ws) > 1:
            return None
        return ws.pop() if ws else 0

    def apply(self, p: Polynomial, k: int = 1) -> Polynomial:
        """Image of ``p`` under ``zeta_l ** k``."""
        p = p.to_ambient(self.ring.vars)
        out = {}
        for e, c in p.terms.items():
            wt = sum(a * self.weights[v] for v, a in zip(p.vars, e))
            out[e] = c * root_of_unity(self.order, k * wt)
        return Polynomial(p.vars, out)

    def verify(self) -> "MonomialGroupAction":
        for r in self.ring.relations:
            nf = self.ring.normal(self.apply(r))
            if not nf.is_zero():
                raise RelationNotPreserved(r.format(), nf.format())
        self.verified = True
        return self

    def is_invariant(self, p: Polynomial) -> bool:
        return self.ring.equal(self.apply(p), p)

    def to_json(self) -> dict:
        return {"order": self.order, "weights": {v: self.weights[v] for v in self.ring.vars}}


def _laurent_data(R: PresentedRing):
    """For inverse variables of single variables, fold them into negative exponents."""
    fold = {}
    for e, w in R.inverted:
        if len(e.terms) == 1:
            (ex, c), = e.terms.items()
            if c == 1 and sum(ex) == 1:
                fold[w] = R.vars[ex.index(1)]
    axes = [v for v in R.vars if v not in fold]

    def vec(exp):
        out = dict.fromkeys(axes, 0)
        for v, k in zip(R.vars, exp):
            if v in fold:
                out[fold[v]] -= k
            else:
                out[v] += k
        return tuple(out[a] for a in axes)

    return fold, vec


@dataclass
class InvariantSubring:
    generators: list[Polynomial]
    names: list[str]
    presentation: PresentedRing
    inclusion: RingMap


def invariant_subring(R: PresentedRing, act: MonomialGroupAction, degree_bound: int,
                      names: Sequence[str] | None = None, present_ring: bool = True) -> InvariantSubring:
    """Twist-zero monomial generators up to ``degree_bound`` plus a presentation."""
    if not act.verified:
        act.verify()
    nontrivial = any(act.weights[v] for v in R.vars)
    if nontrivial and degree_bound < act.order:
        raise BoundTooSmall(f"degree bound {degree_bound} below group order {act.order}")
    fold, vec = _laurent_data(R)
    n = len(R.vars)
    chosen: list[tuple] = []
    chosen_vecs: list[tuple] = []
    reach: set = {vec((0,) * n)}
    max_factors = max(degree_bound, 1) + 1
    for exp in monomials_up_to(n, degree_bound):
        if not any(exp):
            continue
        # a monomial using both u and its inverse is never needed
        if any(exp[R.vars.index(w)] and exp[R.vars.index(u)] for w, u in fold.items()):
            continue
        if sum(k * act.weights[v] for v, k in zip(R.vars, exp)) % act.order:
            continue
        v = vec(exp)
        if v in reach:
            continue
        chosen.append(exp)
        chosen_vecs.append(v)
        reach = _closure(chosen_vecs, max_factors)
    # drop generators that later choices made redundant, latest candidates first
    for i in range(len(chosen) - 1, -1, -1):
        rest = chosen_vecs[:i] + chosen_vecs[i + 1:]
        if rest and chosen_vecs[i] in _closure(rest, max_factors):
            del chosen[i], chosen_vecs[i]
    gens = [Polynomial.monomial(e, R.vars) for e in chosen]
    if names is None:
        names = [_gb.fresh_name(f"g{i + 1}", R.vars) for i in range(len(gens))]
    names = list(names)
    if not present_ring:
        return InvariantSubring(gens, names, None, None)
    # relations among the generators: eliminate the ring variables
    amb = R.vars + tuple(names)
    graph = [r.to_ambient(amb) for r in R.relations]
    graph += [Polynomial.var(nm, amb) - g.to_ambient(amb) for nm, g in zip(names, gens)]
    rels = _gb.eliminate(graph, list(R.vars), keep_vars=names)
    pres = PresentedRing(tuple(names), [r for r in rels if not r.is_zero()], [], R.field)
    inclusion = verify_map(RingMap(pres, R, dict(zip(names, gens)), "inclusion"))
    return InvariantSubring(gens, names, pres, inclusion)


def _closure(vecs: list[tuple], max_factors: int) -> set:
    reach = {tuple(0 for _ in vecs[0])}
    frontier = set(reach)
    for _ in range(max_factors):
        nxt = set()
        for r in frontier:
            for v in vecs:
                s = tuple(a + b for a, b in zip(r, v))
                if s not in reach:
                    nxt.add(s)
        reach |= nxt
        frontier = nxt
        if not frontier:
            break
    return reach


def equivariance_check(f, act_source: MonomialGroupAction, act_target: MonomialGroupAction | None = None) -> dict:
    """Check ``sigma o f == f o sigma`` on generators for the generator of mu_l.

    ``f`` is a :class:`RingMap` or a derivation exposing ``ring`` and ``apply``.
    Returns the (all zero) residual normal forms keyed by generator.
    """
    act_target = act_target or act_source
    if act_source.order != act_target.order:
        raise PreconditionError("actions of different groups")
    for a in (act_source, act_target):
        if not a.verified:
            a.verify()
    l = act_source.order
    out = {}
    if isinstance(f, RingMap):
        src, tgt = f.source, f.target
        for v in src.vars:
            lhs = act_target.apply(f.images[v])
            rhs = f.images[v].scale(root_of_unity(l, act_source.weights[v]))
            nf = tgt.normal(lhs - rhs)
            if not nf.is_zero():
                raise NotEquivariant(v, nf.format())
            out[v] = nf
    else:
        R = f.ring
        for v in R.base_vars:
            dv = f.image(v)
            lhs = act_source.apply(dv)
            rhs = dv.scale(root_of_unity(l, act_source.weights[v]))
            nf = R.normal(lhs - rhs)
            if not nf.is_zero():
                raise NotEquivariant(v, nf.format())
            out[v] = nf
    return out
