"""Derivations on presented rings and the Ga-action toolkit built on them."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable, Mapping, Sequence

from gmpy2 import mpq

from . import gb as _gb
from .errors import (BoundExceeded, NoSliceWithinBound, NotFixedPointFree, NotWellDefined,
                     PreconditionError, VariableClash)
from .gb import MembershipCertificate
from .linalg import IncrementalSolver
from .poly import Polynomial, monomials_up_to, partial
from .ring import IsoCertificate, PresentedRing, RingMap, tensor_with_polynomial_line, verify_iso, verify_map


class Derivation:
    """A derivation of ``ring`` fixed by the images of the non-inverse variables."""

    def __init__(self, ring: PresentedRing, images: Mapping, name: str = ""):
        self.ring = ring
        self.name = name
        imgs = {}
        inv = set(ring.inverse_vars)
        for v in ring.vars:
            if v in inv:
                continue
            imgs[v] = ring.normal(ring.element(images.get(v, 0)))
        for e, w in ring.inverted:
            # D(1/e) = -(1/e)^2 D(e)
            wv = ring.var(w)
            imgs[w] = ring.normal(-(wv * wv) * self._apply_raw(e, imgs))
        self.images = imgs
        self.verified = False

    @staticmethod
    def _apply_raw(p: Polynomial, imgs: Mapping[str, Polynomial]) -> Polynomial:
        acc = Polynomial.zero(p.vars)
        used = p.used_vars()
        for v in p.vars:
            if v in used and not imgs[v].is_zero():
                acc = acc + partial(p, v) * imgs[v]
        return acc

    def image(self, v: str) -> Polynomial:
        return self.images[v]

    def raw(self, p: Polynomial) -> Polynomial:
        """Leibniz expansion without reduction."""
        return self._apply_raw(p.to_ambient(self.ring.vars), self.images)

    def apply(self, p: Polynomial) -> Polynomial:
        return self.ring.normal(self.raw(p))

    __call__ = apply

    def power(self, p: Polynomial, k: int) -> Polynomial:
        for _ in range(k):
            p = self.apply(p)
        return p

    def is_zero(self) -> bool:
        return all(img.is_zero() for img in self.images.values())

    def scaled(self, c: Polynomial, name: str = "") -> "Derivation":
        """``c * D`` (still a derivation; forced inverse images recomputed)."""
        c = c.to_ambient(self.ring.vars)
        return Derivation(self.ring, {v: self.ring.normal(c * self.images[v]) for v in self.ring.base_vars}, name)

    def to_json(self) -> dict:
        return {"ring": self.ring.to_json(), "images": {v: self.images[v].format() for v in self.ring.base_vars}}

    @classmethod
    def from_json(cls, obj: dict) -> "Derivation":
        R = PresentedRing.from_json(obj["ring"])
        return make_derivation(R, {v: R.element(s) for v, s in obj["images"].items()})

    def __repr__(self):
        body = " + ".join(f"({self.images[v]})*d/d{v}" for v in self.ring.base_vars if self.images[v])
        return f"Derivation({body or '0'})"


def make_derivation(ring: PresentedRing, images: Mapping, name: str = "") -> Derivation:
    """Build and verify: every relation must map into the relation ideal."""
    missing = [v for v in ring.base_vars if v not in images]
    if missing:
        from .errors import MissingImage
        raise MissingImage(", ".join(missing))
    extra = [v for v in images if v not in ring.vars]
    if extra:
        from .errors import UnknownVariable
        raise UnknownVariable(", ".join(extra))
    D = Derivation(ring, images, name)
    verify_derivation(D)
    return D


def verify_derivation(D: Derivation) -> Derivation:
    for r in D.ring.relations:
        nf = D.apply(r)
        if not nf.is_zero():
            raise NotWellDefined(r.format(), nf.format())
    D.verified = True
    return D


# --------------------------------------------------------------------------
# local nilpotency


def default_bound(D: Derivation) -> int:
    deg = max((img.total_degree() for img in D.images.values() if img), default=0)
    return 2 + deg * len(D.ring.vars)


@dataclass
class NilpotencyCertificate:
    """``chains[g] = [g, D g, ..., D^n g]`` with final entry 0."""

    chains: dict
    bound: int

    def length(self, v: str) -> int:
        """Number of nonzero entries: the least n with D^n(v) = 0."""
        return len(self.chains[v]) - 1

    def check(self, D: Derivation) -> bool:
        for v, chain in self.chains.items():
            if chain[0] != D.ring.normal(D.ring.var(v)) or not chain[-1].is_zero():
                return False
            for a, b in zip(chain, chain[1:]):
                if not D.ring.normal(D.raw(a) - b).is_zero():
                    return False
        return True

    def to_json(self) -> dict:
        return {"bound": self.bound, "chains": {v: [p.format() for p in c] for v, c in self.chains.items()}}


def check_locally_nilpotent(D: Derivation, bound: int | None = None, *, workers: int = 1) -> NilpotencyCertificate:
    if not D.verified:
        verify_derivation(D)
    bound = default_bound(D) if bound is None else bound
    chains = {}
    for v in D.ring.vars:
        p = D.ring.normal(D.ring.var(v))
        chain = [p]
        while not p.is_zero():
            if len(chain) > bound:
                raise BoundExceeded(v, p.format())
            p = D.apply(p)
            chain.append(p)
        chains[v] = chain
    return NilpotencyCertificate(chains, bound)


# --------------------------------------------------------------------------
# exponential, kernel


def _nilpotent_chain(D: Derivation, p: Polynomial, bound: int) -> list[Polynomial]:
    chain = [D.ring.normal(p)]
    while not chain[-1].is_zero():
        if len(chain) > bound:
            raise BoundExceeded(str(p), chain[-1].format())
        chain.append(D.apply(chain[-1]))
    return chain[:-1]


def exponential(D: Derivation, parameter: str = "w", *, cert: NilpotencyCertificate | None = None,
                target: PresentedRing | None = None, sign: int = 1) -> RingMap:
    """Co-action ``R -> R[w]``, ``v -> sum w^k D^k(v) / k!``."""
    cert = cert or check_locally_nilpotent(D)
    R = D.ring
    T = target or tensor_with_polynomial_line(R, parameter)
    w = T.var(parameter) * sign
    imgs = {}
    for v in R.vars:
        acc = T.zero()
        for k, term in enumerate(cert.chains[v][:-1]):
            acc = acc + term.to_ambient(T.vars) * w ** k * mpq(1, factorial(k))
        imgs[v] = acc
    return verify_map(RingMap(R, T, imgs, f"exp({parameter}D)"))


def exp_apply(D: Derivation, p: Polynomial, s: Polynomial, bound: int | None = None) -> Polynomial:
    """``sum s^k D^k(p) / k!`` inside the ring (``s`` any ring element)."""
    bound = default_bound(D) if bound is None else bound
    acc = D.ring.zero()
    spow = D.ring.one()
    for k, term in enumerate(_nilpotent_chain(D, p, bound)):
        acc = acc + term * spow * mpq(1, factorial(k))
        spow = D.ring.normal(spow * s)
    return D.ring.normal(acc)


def kernel_member(D: Derivation, p: Polynomial) -> tuple[bool, Polynomial]:
    nf = D.apply(D.ring.element(p))
    return nf.is_zero(), nf


# --------------------------------------------------------------------------
# slices


@dataclass
class Slice:
    element: Polynomial
    residual: Polynomial
    degree: int = 0

    def to_json(self) -> dict:
        return {"element": self.element.format(), "residual": self.residual.format()}


def certify_slice(D: Derivation, s: Polynomial) -> Slice:
    res = D.apply(s) - 1
    if not res.is_zero():
        raise PreconditionError(f"{s} is not a slice: D(s) - 1 = {res}")
    return Slice(D.ring.normal(s), res, s.total_degree())


def find_slice(D: Derivation, degree_bound: int, *, allowed_vars: Sequence[str] | None = None,
               monomial_filter: Callable[[tuple], bool] | None = None, start_degree: int = 0) -> Slice:
    """Least-pivot solution of ``D(ansatz) = 1`` over standard monomials.

    ``allowed_vars`` restricts the ansatz support; ``monomial_filter`` can drop
    further candidates (e.g. to keep only invariant monomials).
    """
    R = D.ring
    allowed = set(R.vars if allowed_vars is None else allowed_vars)
    idx = [i for i, v in enumerate(R.vars) if v in allowed]
    n = len(R.vars)
    key = R.order.key_function(R.vars)
    solver = IncrementalSolver(row_key=key)
    cols: list[tuple] = []
    one = {(0,) * n: mpq(1)}
    seen = set()
    for deg in range(degree_bound + 1):
        for sub in monomials_up_to(len(idx), deg):
            if sum(sub) != deg:
                continue
            e = [0] * n
            for i, k in zip(idx, sub):
                e[i] = k
            e = tuple(e)
            if e in seen or not R.gb.is_standard(e):
                continue
            if monomial_filter is not None and not monomial_filter(e):
                continue
            seen.add(e)
            cols.append(e)
            solver.add_column(D.apply(Polynomial.monomial(e, R.vars)).terms)
        if deg < start_degree:
            continue
        sol = solver.solve(one)
        if sol is not None:
            terms = {cols[j]: c for j, c in sol.items() if c}
            s = Polynomial(R.vars, terms)
            return certify_slice(D, s)
    raise NoSliceWithinBound(degree_bound)


# --------------------------------------------------------------------------
# Dixmier trivialization


def _kernel_name(v: str, taken) -> str:
    return _gb.fresh_name("k_" + v.replace("'", "p"), taken)


@dataclass
class Trivialization:
    """``R ~= K[w]`` where ``K = R / (s)`` is identified with ker D."""

    derivation: Derivation
    slice: Slice
    kernel_generators: dict          # R-variable -> pi(v), an element of ker D
    kernel_ring: PresentedRing       # K, variables k_v
    names: dict                      # R-variable -> K-variable
    cylinder: PresentedRing          # K[w]
    iso: IsoCertificate              # forward K[w] -> R, backward R -> K[w]
    parameter: str = "w"


def dixmier_trivialize(D: Derivation, s: Slice | Polynomial, parameter: str = "w",
                       bound: int | None = None) -> Trivialization:
    R = D.ring
    if isinstance(s, Polynomial):
        s = certify_slice(D, s)
    elif not (D.apply(s.element) - 1).is_zero():
        raise PreconditionError("slice no longer satisfies D(s) = 1")
    bound = default_bound(D) if bound is None else bound
    minus_s = -s.element
    pis = {v: exp_apply(D, R.var(v), minus_s, bound) for v in R.vars}
    for v, p in pis.items():
        if not D.apply(p).is_zero():
            raise PreconditionError(f"slice evaluation of {v} left the kernel")
    taken = list(R.vars) + [parameter]
    names = {}
    for v in R.vars:
        names[v] = _kernel_name(v, taken)
        taken.append(names[v])
    if parameter in names.values():
        raise VariableClash(parameter)
    kvars = tuple(names[v] for v in R.vars)
    ren = lambda p: p.rename(names)
    K = PresentedRing(kvars, [ren(r) for r in R.user_relations] + [ren(s.element)],
                      [(ren(e), names[w]) for e, w in R.inverted], R.field, R.order)
    KW = tensor_with_polynomial_line(K, parameter)
    forward = RingMap(KW, R, {**{names[v]: pis[v] for v in R.vars}, parameter: s.element}, "trivialization")
    w = KW.var(parameter)
    back = {}
    for v in R.vars:
        acc = KW.zero()
        for k, term in enumerate(_nilpotent_chain(D, R.var(v), bound)):
            acc = acc + ren(term).to_ambient(KW.vars) * w ** k * mpq(1, factorial(k))
        back[v] = acc
    backward = RingMap(R, KW, back, "trivialization inverse")
    verify_map(forward)
    verify_map(backward)
    iso = verify_iso(backward, forward)
    return Trivialization(D, s, pis, K, names, KW, iso, parameter)


# --------------------------------------------------------------------------
# freeness


def fixed_point_free(D: Derivation, max_n: int = 8) -> MembershipCertificate:
    """``f^N * 1`` in (images of base generators) + relations, f the inverted product."""
    R = D.ring
    base = R.base_vars
    imgs = [D.images[v] for v in base]
    inv_names = set(R.inverse_vars)
    clean = all(not (img.used_vars() & inv_names) for img in imgs)
    clean = clean and all(not (r.used_vars() & inv_names) for r in R.user_relations)
    one = R.one()
    if R.inverted and clean:
        sat = R.one()
        for e, _ in R.inverted:
            sat = sat * e
        gens = [g.to_ambient(R.vars) for g in imgs + R.user_relations if not g.is_zero()]
        if gens:
            try:
                return _gb.membership(one, gens, saturate_by=sat, max_n=max_n)
            except _gb.NotMember:
                pass
    gens = [g for g in imgs if not g.is_zero()] + list(R.relations)
    if not gens:
        raise NotFixedPointFree("zero derivation on a nonzero ring")
    try:
        return _gb.membership(one, gens)
    except _gb.NotMember as exc:
        raise NotFixedPointFree(str(exc)) from None


# --------------------------------------------------------------------------
# covers


def lift_through_cover(D: Derivation, cover: RingMap, forced_zero_vars: Sequence[str] = (),
                       bound: int | None = None) -> tuple[Derivation, NilpotencyCertificate]:
    """Extend ``D`` along an inclusion-like cover, sending ``forced_zero_vars`` to 0."""
    if not cover.verified:
        verify_map(cover)
    total = cover.target
    preimage_of: dict[str, str] = {}
    for s, img in cover.images.items():
        if len(img.terms) == 1:
            (e, c), = img.terms.items()
            if c == 1 and sum(e) == 1:
                preimage_of.setdefault(total.vars[e.index(1)], s)
    imgs = {}
    for v in total.base_vars:
        if v in forced_zero_vars:
            imgs[v] = total.zero()
        elif v in preimage_of:
            imgs[v] = cover.apply(D.images[preimage_of[v]])
        else:
            raise PreconditionError(f"cover variable {v} is neither a base image nor forced")
    lifted = make_derivation(total, imgs, f"lift({D.name})" if D.name else "lift")
    return lifted, check_locally_nilpotent(lifted, bound)
